//! Line-based biphoton pipelines.
//!
//! ```text
//! source spdc-hg00 c0=0.08 c1=0.04 c2=-0.03
//! filter
//! sort theta=0.7853981633974483 phi=0 frame=exit
//! select BB
//! schmidt
//! pbs
//! ```
//!
//! Directives: `source spdc-hg00|spdc-hg45|table <path>`, `filter`,
//! `compressor axis=<rad> retardance=<rad>`, `sort [theta=] [phi=] [frame=exit|lab]`,
//! `select <AA|AB|BA|BB>`, `herald port=<A|B> mode=<n>,<m>`, `schmidt`, `pbs`,
//! `overlap <hg45|hg:n,m|lg:0,l>`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt::{self, Write as _};
use std::path::PathBuf;

use super::{
    compressor_apply, compressor_apply_biphoton, fiber_filter_biphoton, herald,
    parse_biphoton_table, pbs_split_bell, schmidt_coefficients, sort_biphoton, spdc_hg00_with,
    spdc_hg45_with, BiphotonExpansion, BranchLabel, CompressorSpec, PolarizationPair,
    SortedBiphoton, SpdcCoefficients,
};
use crate::error::{Error, Result};
use crate::interferometer::{Port, PortFrame, SagnacStage};
use crate::modes::io::parse_num;
use crate::modes::{lg_to_hg, BeamGeometry, HGIndex, LGIndex, ModeExpansion};

pub const NAMED_PIPELINES: [&str; 3] = ["bell", "herald", "herald-lg"];

/// Script text of a built-in pipeline.
pub fn named_script(name: &str) -> Option<String> {
    let parity = format!("sort theta={FRAC_PI_4:?} phi=0 frame=exit");
    match name {
        "bell" => Some(format!("source spdc-hg00\nfilter\n{parity}\nselect BB\nschmidt\npbs\n")),
        "herald" => Some(format!(
            "source spdc-hg45\nfilter\n{parity}\nherald port=A mode=0,0\noverlap hg45\n"
        )),
        "herald-lg" => Some(format!(
            "source spdc-hg45\nfilter\ncompressor axis={FRAC_PI_2:?} retardance={FRAC_PI_2:?}\n{parity}\n\
             herald port=A mode=0,0\noverlap lg:0,1\n"
        )),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Hg00(SpdcCoefficients),
    Hg45(f64),
    Table(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
enum Target {
    Hg45,
    Hg(HGIndex),
    Lg(LGIndex),
}

#[derive(Debug, Clone, PartialEq)]
enum Directive {
    Source(Source),
    Filter,
    Compressor(CompressorSpec),
    Sort(SagnacStage, PortFrame),
    Select(BranchLabel),
    Herald(Port, HGIndex),
    Schmidt,
    Pbs,
    Overlap(Target),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Empty,
    Pair,
    Sorted,
    Single,
}

/// A parsed, type-checked list of pipeline stages.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    name: String,
    steps: Vec<(String, Directive)>,
}

impl Pipeline {
    pub fn named(name: &str) -> Result<Self> {
        let script = named_script(name).ok_or_else(|| {
            Error::OutOfRange(format!(
                "unknown pipeline {name} (expected one of {})",
                NAMED_PIPELINES.join(", ")
            ))
        })?;
        Self::parse(name, &script)
    }

    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut steps = Vec::new();
        let mut kind = Kind::Empty;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let d = parse_directive(line, line_no)?;
            kind = check_kind(&d, kind).map_err(|m| Error::parse(line_no, m))?;
            steps.push((line.split_whitespace().collect::<Vec<_>>().join(" "), d));
        }
        if steps.is_empty() {
            return Err(Error::parse(1, "pipeline has no stages"));
        }
        Ok(Pipeline {
            name: name.to_string(),
            steps,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn run(&self) -> Result<PipelineReport> {
        let mut state = State::Empty;
        let mut stages = Vec::with_capacity(self.steps.len());
        for (text, d) in &self.steps {
            let mut values = Vec::new();
            state = apply(d, state, &mut values)?;
            stages.push(StageReport {
                directive: text.clone(),
                values,
            });
        }
        Ok(PipelineReport {
            name: self.name.clone(),
            stages,
            final_state: state.into_final(),
        })
    }
}

fn check_kind(d: &Directive, kind: Kind) -> std::result::Result<Kind, String> {
    let need = |ok: &[Kind], what: &str, next: Kind| {
        if ok.contains(&kind) {
            Ok(next)
        } else {
            Err(format!("`{what}` cannot follow the current stage"))
        }
    };
    match d {
        Directive::Source(_) => Ok(Kind::Pair),
        Directive::Filter => need(&[Kind::Pair], "filter", Kind::Pair),
        Directive::Compressor(_) => need(&[Kind::Pair, Kind::Single], "compressor", kind),
        Directive::Sort(..) => need(&[Kind::Pair], "sort", Kind::Sorted),
        Directive::Select(_) => need(&[Kind::Sorted], "select", Kind::Pair),
        Directive::Herald(..) => need(&[Kind::Sorted], "herald", Kind::Single),
        Directive::Schmidt => need(&[Kind::Pair], "schmidt", Kind::Pair),
        Directive::Pbs => need(&[Kind::Pair], "pbs", Kind::Pair),
        Directive::Overlap(_) => need(&[Kind::Single], "overlap", Kind::Single),
    }
}

fn keyed<'a>(
    words: &[&'a str],
    line_no: usize,
    allowed: &[&str],
) -> Result<Vec<(&'a str, &'a str)>> {
    let mut out = Vec::new();
    for w in words {
        let (k, v) = w
            .split_once('=')
            .ok_or_else(|| Error::parse(line_no, format!("expected key=value, got {w}")))?;
        if !allowed.contains(&k) {
            return Err(Error::parse(line_no, format!("unknown key {k}")));
        }
        if out.iter().any(|(seen, _)| *seen == k) {
            return Err(Error::parse(line_no, format!("key {k} given twice")));
        }
        out.push((k, v));
    }
    Ok(out)
}

fn parse_index(s: &str, line_no: usize) -> Result<(u32, u32)> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Error::parse(line_no, format!("expected <n>,<m>, got {s}")))?;
    Ok((parse_num(a, line_no, "n")?, parse_num(b, line_no, "m")?))
}

fn parse_directive(line: &str, line_no: usize) -> Result<Directive> {
    let words: Vec<&str> = line.split_whitespace().collect();
    let rest = &words[1..];
    let no_args = |d: Directive| {
        if rest.is_empty() {
            Ok(d)
        } else {
            Err(Error::parse(
                line_no,
                format!("`{}` takes no arguments", words[0]),
            ))
        }
    };
    match words[0] {
        "source" => {
            let Some((&which, kv)) = rest.split_first() else {
                return Err(Error::parse(
                    line_no,
                    "expected `source spdc-hg00|spdc-hg45|table <path>`",
                ));
            };
            match which {
                "spdc-hg00" => {
                    let mut c = SpdcCoefficients::default();
                    for (k, v) in keyed(kv, line_no, &["c0", "c1", "c2"])? {
                        let x = parse_num(v, line_no, k)?;
                        match k {
                            "c0" => c.c0 = x,
                            "c1" => c.c1 = x,
                            _ => c.c2 = x,
                        }
                    }
                    Ok(Directive::Source(Source::Hg00(c)))
                }
                "spdc-hg45" => {
                    let mut c1 = SpdcCoefficients::default().c1;
                    for (k, v) in keyed(kv, line_no, &["c1"])? {
                        c1 = parse_num(v, line_no, k)?;
                    }
                    Ok(Directive::Source(Source::Hg45(c1)))
                }
                "table" => match kv {
                    [path] => Ok(Directive::Source(Source::Table(PathBuf::from(path)))),
                    _ => Err(Error::parse(line_no, "expected `source table <path>`")),
                },
                other => Err(Error::parse(line_no, format!("unknown source {other}"))),
            }
        }
        "filter" => no_args(Directive::Filter),
        "schmidt" => no_args(Directive::Schmidt),
        "pbs" => no_args(Directive::Pbs),
        "compressor" => {
            let (mut axis, mut ret) = (None, None);
            for (k, v) in keyed(rest, line_no, &["axis", "retardance"])? {
                let x: f64 = parse_num(v, line_no, k)?;
                if k == "axis" {
                    axis = Some(x);
                } else {
                    ret = Some(x);
                }
            }
            let (Some(a), Some(r)) = (axis, ret) else {
                return Err(Error::parse(
                    line_no,
                    "compressor needs axis= and retardance=",
                ));
            };
            let spec =
                CompressorSpec::new(a, r).map_err(|e| Error::parse(line_no, e.to_string()))?;
            Ok(Directive::Compressor(spec))
        }
        "sort" => {
            let (mut theta, mut phi, mut frame) = (FRAC_PI_4, 0.0, PortFrame::Exit);
            for (k, v) in keyed(rest, line_no, &["theta", "phi", "frame"])? {
                match k {
                    "theta" => theta = parse_num(v, line_no, k)?,
                    "phi" => phi = parse_num(v, line_no, k)?,
                    _ => {
                        frame = match v {
                            "exit" => PortFrame::Exit,
                            "lab" => PortFrame::Lab,
                            _ => return Err(Error::parse(line_no, format!("unknown frame {v}"))),
                        }
                    }
                }
            }
            let stage =
                SagnacStage::new(theta, phi).map_err(|e| Error::parse(line_no, e.to_string()))?;
            Ok(Directive::Sort(stage, frame))
        }
        "select" => match rest {
            [b] => Ok(Directive::Select(
                b.parse().map_err(|e: String| Error::parse(line_no, e))?,
            )),
            _ => Err(Error::parse(line_no, "expected `select <AA|AB|BA|BB>`")),
        },
        "herald" => {
            let (mut port, mut mode) = (None, None);
            for (k, v) in keyed(rest, line_no, &["port", "mode"])? {
                if k == "port" {
                    port = Some(match v {
                        "A" => Port::A,
                        "B" => Port::B,
                        _ => return Err(Error::parse(line_no, format!("unknown port {v}"))),
                    });
                } else {
                    let (n, m) = parse_index(v, line_no)?;
                    mode = Some(HGIndex::new(n, m));
                }
            }
            let (Some(p), Some(m)) = (port, mode) else {
                return Err(Error::parse(line_no, "herald needs port= and mode="));
            };
            Ok(Directive::Herald(p, m))
        }
        "overlap" => {
            let target = match rest {
                ["hg45"] => Target::Hg45,
                [t] if t.starts_with("hg:") => {
                    let (n, m) = parse_index(&t[3..], line_no)?;
                    Target::Hg(HGIndex::new(n, m))
                }
                [t] if t.starts_with("lg:") => {
                    let (p, l) = t[3..].split_once(',').ok_or_else(|| {
                        Error::parse(line_no, format!("expected lg:<p>,<l>, got {t}"))
                    })?;
                    let idx =
                        LGIndex::new(parse_num(p, line_no, "p")?, parse_num(l, line_no, "l")?);
                    if idx.p != 0 || idx.l.abs() != 1 {
                        return Err(Error::parse(
                            line_no,
                            "overlap targets are limited to first-order LG modes",
                        ));
                    }
                    Target::Lg(idx)
                }
                _ => {
                    return Err(Error::parse(
                        line_no,
                        "expected `overlap <hg45|hg:n,m|lg:0,l>`",
                    ))
                }
            };
            Ok(Directive::Overlap(target))
        }
        other => Err(Error::parse(line_no, format!("unknown stage {other}"))),
    }
}

enum State {
    Empty,
    Pair(BiphotonExpansion),
    Sorted(SortedBiphoton),
    Single(ModeExpansion, PolarizationPair),
}

impl State {
    fn into_final(self) -> FinalState {
        match self {
            State::Empty => FinalState::None,
            State::Pair(b) => FinalState::Pair(b),
            State::Sorted(s) => FinalState::Sorted(s),
            State::Single(e, p) => FinalState::Single(e, p),
        }
    }
}

/// Numeric result attached to a stage.
#[derive(Debug, Clone, PartialEq)]
pub enum ReportValue {
    Number(f64),
    Numbers(Vec<f64>),
    Text(String),
}

impl fmt::Display for ReportValue {
    // Adding zero folds -0 into +0.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportValue::Number(x) => write!(f, "{:.16e}", x + 0.0),
            ReportValue::Numbers(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| format!("{:.16e}", x + 0.0)).collect();
                write!(f, "{}", parts.join(" "))
            }
            ReportValue::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub directive: String,
    pub values: Vec<(String, ReportValue)>,
}

#[derive(Debug, Clone)]
pub enum FinalState {
    None,
    Pair(BiphotonExpansion),
    Sorted(SortedBiphoton),
    Single(ModeExpansion, PolarizationPair),
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub name: String,
    pub stages: Vec<StageReport>,
    pub final_state: FinalState,
}

impl PipelineReport {
    /// Value `key` from the last stage whose directive starts with `stage`.
    pub fn value(&self, stage: &str, key: &str) -> Option<&ReportValue> {
        self.stages
            .iter()
            .rev()
            .find(|s| s.directive.split_whitespace().next() == Some(stage))
            .and_then(|s| s.values.iter().find(|(k, _)| k == key).map(|(_, v)| v))
    }

    pub fn number(&self, stage: &str, key: &str) -> Option<f64> {
        match self.value(stage, key) {
            Some(ReportValue::Number(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn numbers(&self, stage: &str, key: &str) -> Option<&[f64]> {
        match self.value(stage, key) {
            Some(ReportValue::Numbers(x)) => Some(x),
            _ => None,
        }
    }
}

fn pol_line(p: &PolarizationPair) -> String {
    let parts: Vec<String> = [("hv", p.hv), ("vh", p.vh), ("hh", p.hh), ("vv", p.vv)]
        .iter()
        .map(|(k, z)| format!("{k}={:.16e},{:.16e}", z.re, z.im))
        .collect();
    parts.join(" ")
}

impl fmt::Display for PipelineReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pipeline {}", self.name)?;
        for (i, s) in self.stages.iter().enumerate() {
            writeln!(f, "stage {}: {}", i + 1, s.directive)?;
            for (k, v) in &s.values {
                writeln!(f, "  {k} = {v}")?;
            }
        }
        let mut out = String::new();
        match &self.final_state {
            FinalState::None => out.push_str("final state: none\n"),
            FinalState::Pair(b) => {
                writeln!(out, "final state: biphoton").unwrap();
                writeln!(out, "  polarization {}", pol_line(b.polarization())).unwrap();
                for (x, y, c) in b.terms() {
                    writeln!(
                        out,
                        "  {} {} {} {} {:.16e} {:.16e}",
                        x.n, x.m, y.n, y.m, c.re, c.im
                    )
                    .unwrap();
                }
            }
            FinalState::Sorted(s) => {
                writeln!(out, "final state: sorted").unwrap();
                for b in &s.branches {
                    writeln!(out, "  {} {:.16e}", b.label, b.probability).unwrap();
                }
            }
            FinalState::Single(e, p) => {
                writeln!(out, "final state: single photon").unwrap();
                writeln!(out, "  polarization {}", pol_line(p)).unwrap();
                for (idx, c) in e.terms() {
                    writeln!(out, "  {} {} {:.16e} {:.16e}", idx.n, idx.m, c.re, c.im).unwrap();
                }
            }
        }
        f.write_str(&out)
    }
}

fn num(values: &mut Vec<(String, ReportValue)>, key: &str, x: f64) {
    values.push((key.to_string(), ReportValue::Number(x)));
}

fn apply(d: &Directive, state: State, values: &mut Vec<(String, ReportValue)>) -> Result<State> {
    Ok(match (d, state) {
        (Directive::Source(src), _) => {
            let b = match src {
                Source::Hg00(c) => spdc_hg00_with(*c, BeamGeometry::default()),
                Source::Hg45(c1) => spdc_hg45_with(*c1, BeamGeometry::default()),
                Source::Table(path) => {
                    let text = std::fs::read_to_string(path)?;
                    let parsed = parse_biphoton_table(&text)?;
                    for w in parsed.warnings {
                        values.push(("warning".into(), ReportValue::Text(w)));
                    }
                    parsed.expansion
                }
            };
            num(values, "terms", b.len() as f64);
            num(values, "norm_sqr", b.norm_sqr());
            State::Pair(b)
        }
        (Directive::Filter, State::Pair(b)) => {
            let f = fiber_filter_biphoton(&b)?;
            num(values, "post_selection_probability", f.probability);
            num(values, "norm_sqr", f.state.norm_sqr());
            State::Pair(f.state)
        }
        (Directive::Compressor(spec), State::Pair(b)) => {
            let out = compressor_apply_biphoton(&b, spec)?;
            num(values, "norm_sqr", out.norm_sqr());
            State::Pair(out)
        }
        (Directive::Compressor(spec), State::Single(e, p)) => {
            let out = compressor_apply(&e, spec)?;
            num(values, "norm_sqr", out.norm_sqr());
            State::Single(out, p)
        }
        (Directive::Sort(stage, frame), State::Pair(b)) => {
            let s = sort_biphoton(&b, stage, *frame)?;
            for br in &s.branches {
                num(values, &format!("p_{}", br.label), br.probability);
            }
            State::Sorted(s)
        }
        (Directive::Select(label), State::Sorted(s)) => {
            let br = s.branch(*label);
            num(values, "probability", br.probability);
            let st = br.normalized()?;
            num(values, "norm_sqr", st.norm_sqr());
            State::Pair(st)
        }
        (Directive::Herald(port, mode), State::Sorted(s)) => {
            let h = herald(&s, *port, *mode)?;
            num(values, "trigger_probability", h.probability);
            num(values, "norm_sqr", h.spatial.norm_sqr());
            State::Single(h.spatial, h.polarization)
        }
        (Directive::Schmidt, State::Pair(b)) => {
            let s = schmidt_coefficients(&b)?;
            values.push(("schmidt".into(), ReportValue::Numbers(s.to_vec())));
            State::Pair(b)
        }
        (Directive::Pbs, State::Pair(b)) => {
            let r = pbs_split_bell(&b)?;
            num(values, "success_probability", r.success_probability);
            if let Some(s) = r.path_schmidt {
                values.push(("path_schmidt".into(), ReportValue::Numbers(s.to_vec())));
            }
            values.push((
                "spatial_unchanged".into(),
                ReportValue::Text(r.spatial_unchanged.to_string()),
            ));
            num(
                values,
                "beam_splitter_probability",
                r.beam_splitter_probability,
            );
            State::Pair(r.path_state)
        }
        (Directive::Overlap(t), State::Single(e, p)) => {
            let g = *e.geometry();
            let target = match t {
                Target::Hg45 => ModeExpansion::hg45(g),
                Target::Hg(idx) => ModeExpansion::hg(*idx, g),
                Target::Lg(idx) => lg_to_hg(*idx, g)?,
            };
            num(values, "overlap", e.overlap(&target));
            State::Single(e, p)
        }
        _ => unreachable!("stage order is checked when parsing"),
    })
}
