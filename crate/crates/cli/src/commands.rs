//! Subcommand bodies.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::path::Path;

use sagnac_core::geometry::{omega_from_theta, psi_from_omega};
use sagnac_core::interferometer::{
    cascade_build, cascade_route, parse_network, port_powers, route_network, sagnac_transfer,
    CascadeInput, SagnacStage,
};
use sagnac_core::modes::{sample_mode, BeamGeometry, GridSpec, LGIndex};
use sagnac_core::quantum::pipeline::{Pipeline, NAMED_PIPELINES};
use sagnac_core::render::{
    analyze_fork, interference_field, render_intensity, render_phase, InterferenceSpec,
};

use crate::output::Artifacts;
use crate::source::{grid_for, ModeSource, SourceKind};
use crate::{CascadeArgs, Cli, Command, Failure, InterfereArgs, StageArgs};

pub fn run(cli: &Cli, args: &[String]) -> Result<(), Failure> {
    let geom = BeamGeometry::with_waist(cli.w0)?;
    let grid = grid_for(&geom, cli.half_width, cli.grid_size)?;
    match &cli.command {
        Command::Mode { spec, phase } => cmd_mode(cli, args, geom, spec, *phase),
        Command::Sort { spec, stage } => cmd_sort(cli, args, geom, spec, stage),
        Command::Interfere(a) => cmd_interfere(cli, args, geom, a),
        Command::SweepTheta { samples } => cmd_sweep(cli, args, *samples),
        Command::Cascade(a) => cmd_cascade(cli, args, geom, &grid, a),
        Command::Pipeline { pipeline } => cmd_pipeline(cli, args, pipeline),
    }
}

/// Source plus the grid scaled to its own waist (expansion files carry one).
fn load(cli: &Cli, geom: BeamGeometry, spec: &str) -> Result<(ModeSource, GridSpec), Failure> {
    let grid = grid_for(&geom, cli.half_width, cli.grid_size)?;
    let source = ModeSource::parse(spec, geom, &grid)?;
    let grid = grid_for(source.expansion.geometry(), cli.half_width, cli.grid_size)?;
    if let Some(order) = source.expansion.max_order() {
        grid.check_resolution(source.expansion.geometry(), order)?;
    }
    Ok((source, grid))
}

fn cmd_mode(
    cli: &Cli,
    args: &[String],
    geom: BeamGeometry,
    spec: &str,
    phase: bool,
) -> Result<(), Failure> {
    let (source, grid) = load(cli, geom, spec)?;
    let field = source.field(&grid);
    let mut out = Artifacts::new(&cli.out_dir, "mode")?;
    let mut report = format!("mode {}\n", source.label);
    let name = Artifacts::image_name("mode_intensity", cli.format);
    out.write(&name, &render_intensity(&field, cli.format))?;
    writeln!(report, "intensity {name}").unwrap();
    if phase {
        let name = Artifacts::image_name("mode_phase", cli.format);
        out.write(&name, &render_phase(&field, cli.format))?;
        writeln!(report, "phase {name}").unwrap();
    }
    print!("{report}");
    out.finish(args, Some(&grid), source.expansion.geometry().w0())
}

fn cmd_sort(
    cli: &Cli,
    args: &[String],
    geom: BeamGeometry,
    spec: &str,
    stage: &StageArgs,
) -> Result<(), Failure> {
    let (source, grid) = load(cli, geom, spec)?;
    let st = SagnacStage::new(stage.theta, stage.phi)?;
    let pair = sagnac_transfer(&source.expansion, &st)?;
    let (pa, pb) = port_powers(&pair)?;
    let mut out = Artifacts::new(&cli.out_dir, "sort")?;
    for (stem, port) in [("sort_port_a", &pair.port_a), ("sort_port_b", &pair.port_b)] {
        let name = Artifacts::image_name(stem, cli.format);
        out.write(
            &name,
            &render_intensity(&sample_mode(port, &grid), cli.format),
        )?;
    }
    let mut report = format!("input {}\n", source.label);
    writeln!(report, "theta {:.16e}", st.theta()).unwrap();
    writeln!(report, "phi {:.16e}", st.phi()).unwrap();
    writeln!(report, "omega {:.16e}", st.omega()).unwrap();
    writeln!(report, "port A power {:.6}", pa.max(0.0)).unwrap();
    writeln!(report, "port B power {:.6}", pb.max(0.0)).unwrap();
    out.write("sort_report.txt", report.as_bytes())?;
    print!("{report}");
    out.finish(args, Some(&grid), source.expansion.geometry().w0())
}

fn parse_offset(text: &str) -> Result<(f64, f64), Failure> {
    let bad = || Failure::Usage(format!("offset must be `dx,dy`, got `{text}`"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

/// Reference displacement and mirror used for the demo inputs.
fn preset_alignment(kind: SourceKind) -> ((f64, f64), bool) {
    use sagnac_core::modes::HGIndex;
    let d = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        SourceKind::Hg(idx) if idx == HGIndex::new(1, 1) => ((0.0, -1.0), false),
        SourceKind::Hg45 => ((d, -d), true),
        _ => ((0.0, 0.0), false),
    }
}

fn cmd_interfere(
    cli: &Cli,
    args: &[String],
    geom: BeamGeometry,
    a: &InterfereArgs,
) -> Result<(), Failure> {
    let (source, grid) = load(cli, geom, &a.spec)?;
    let reference = match &a.reference {
        Some(spec) => ModeSource::parse(spec, *source.expansion.geometry(), &grid)?.expansion,
        None => source.expansion.clone(),
    };
    let (output, port) = if a.no_sort {
        (source.expansion.clone(), "input".to_string())
    } else {
        let st = SagnacStage::new(a.stage.theta, a.stage.phi)?;
        let pair = sagnac_transfer(&source.expansion, &st)?;
        let (pa, pb) = port_powers(&pair)?;
        let use_a = match a.port.as_deref() {
            Some(p) => p == "A",
            None => pa >= pb,
        };
        if use_a {
            (pair.port_a, "A".to_string())
        } else {
            (pair.port_b, "B".to_string())
        }
    };
    let (preset_offset, preset_mirror) = preset_alignment(source.kind);
    let offset = match &a.offset {
        Some(text) => parse_offset(text)?,
        None => preset_offset,
    };
    let flip_x = match a.mirror.as_str() {
        "on" => true,
        "off" => false,
        _ => preset_mirror,
    };
    let spec = InterferenceSpec {
        reference,
        tilt: a.tilt,
        offset,
        phase: a.ref_phase,
        flip_x,
    };
    let image = interference_field(&sample_mode(&output, &grid), &spec)?;
    let mut out = Artifacts::new(&cli.out_dir, "interfere")?;
    let name = Artifacts::image_name("interfere", cli.format);
    out.write(&name, &render_intensity(&image, cli.format))?;
    let mut report = format!("input {}\nport {port}\n", source.label);
    writeln!(report, "tilt {:.16e}", spec.tilt).unwrap();
    writeln!(report, "offset {:.16e} {:.16e}", offset.0, offset.1).unwrap();
    writeln!(report, "mirror {}", if flip_x { "on" } else { "off" }).unwrap();
    if a.analyze_fork {
        let fork = analyze_fork(&image, source.expansion.geometry().w0());
        writeln!(report, "fork upper_maxima {}", fork.upper).unwrap();
        writeln!(report, "fork lower_maxima {}", fork.lower).unwrap();
        writeln!(report, "fork difference {}", fork.difference()).unwrap();
    }
    writeln!(report, "image {name}").unwrap();
    out.write("interfere_report.txt", report.as_bytes())?;
    print!("{report}");
    out.finish(args, Some(&grid), source.expansion.geometry().w0())
}

fn cmd_sweep(cli: &Cli, args: &[String], samples: usize) -> Result<(), Failure> {
    if samples < 2 {
        return Err(Failure::Usage(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let mut csv = String::from("theta_rad,omega_rad,psi_rad\n");
    for i in 0..samples {
        let theta = FRAC_PI_2 * (i as f64 / (samples - 1) as f64);
        let omega = omega_from_theta(theta)?;
        let psi = psi_from_omega(omega)?;
        writeln!(csv, "{theta:.16e},{omega:.16e},{psi:.16e}").unwrap();
    }
    let mut out = Artifacts::new(&cli.out_dir, "sweep-theta")?;
    out.write("sweep_theta.csv", csv.as_bytes())?;
    print!("{csv}");
    out.finish(args, None, cli.w0)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn parse_l_list(text: &str) -> Result<Vec<i32>, Failure> {
    let bad = || Failure::Usage(format!("invalid l list `{text}`"));
    if let Some((a, b)) = text.split_once("..") {
        let (a, b): (i32, i32) = (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        );
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',')
        .map(|v| v.trim().parse().map_err(|_| bad()))
        .collect()
}

fn cmd_cascade(
    cli: &Cli,
    args: &[String],
    geom: BeamGeometry,
    grid: &GridSpec,
    a: &CascadeArgs,
) -> Result<(), Failure> {
    let mut inputs: Vec<(String, CascadeInput)> = Vec::new();
    if let Some(list) = &a.l {
        for l in parse_l_list(list)? {
            inputs.push((format!("lg:0,{l}"), CascadeInput::Lg(LGIndex::new(0, l))));
        }
    }
    for spec in &a.input {
        let source = ModeSource::parse(spec, geom, grid)?;
        let input = match source.kind {
            SourceKind::Lg(idx) => CascadeInput::Lg(idx),
            _ => CascadeInput::Expansion(source.expansion),
        };
        inputs.push((source.label, input));
    }
    if inputs.is_empty() {
        return Err(Failure::Usage("cascade needs --l or --input".into()));
    }
    let mut csv = String::from("input_label,leaf_label,power_fraction\n");
    let mut push = |label: &str, leaf: &str, power: f64| {
        writeln!(csv, "{},{},{power:.16e}", csv_field(label), csv_field(leaf)).unwrap();
    };
    match &a.network {
        Some(path) => {
            let text = read_input(path)?;
            let net = parse_network(&text)?;
            for (label, input) in &inputs {
                for (leaf, power) in route_network(&net, input)? {
                    push(label, &leaf, power);
                }
            }
        }
        None => {
            let tree = cascade_build(a.depth)?;
            for (label, input) in &inputs {
                for leaf in cascade_route(&tree, input)? {
                    push(label, &leaf.label(), leaf.power);
                }
            }
        }
    }
    let mut out = Artifacts::new(&cli.out_dir, "cascade")?;
    out.write("cascade.csv", csv.as_bytes())?;
    print!("{csv}");
    out.finish(args, None, cli.w0)
}

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn cmd_pipeline(cli: &Cli, args: &[String], which: &str) -> Result<(), Failure> {
    let pipeline = if NAMED_PIPELINES.contains(&which) {
        Pipeline::named(which)?
    } else if Path::new(which).is_file() {
        let name = Path::new(which)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| which.to_string());
        Pipeline::parse(&name, &read_input(Path::new(which))?)?
    } else {
        return Err(Failure::Usage(format!(
            "unknown pipeline `{which}` (expected {} or a script file)",
            NAMED_PIPELINES.join(", ")
        )));
    };
    let report = pipeline.run()?.to_string();
    let mut out = Artifacts::new(&cli.out_dir, "pipeline")?;
    out.write("pipeline_report.txt", report.as_bytes())?;
    print!("{report}");
    out.finish(args, None, cli.w0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l_lists() {
        assert_eq!(parse_l_list("-2..1").unwrap(), vec![-2, -1, 0, 1]);
        assert_eq!(parse_l_list("7, -3").unwrap(), vec![7, -3]);
        assert!(parse_l_list("3..1").is_err());
        assert!(parse_l_list("a").is_err());
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("lg:0,1"), "\"lg:0,1\"");
        assert_eq!(csv_field("1 mod 2"), "1 mod 2");
    }

    #[test]
    fn demo_alignments() {
        use sagnac_core::modes::HGIndex;
        let (off, mirror) = preset_alignment(SourceKind::Hg45);
        assert!(mirror && off.0 > 0.0 && off.1 < 0.0);
        let (off, mirror) = preset_alignment(SourceKind::Hg(HGIndex::new(1, 1)));
        assert!(!mirror && off.0 == 0.0 && off.1 < 0.0);
        assert_eq!(preset_alignment(SourceKind::FiberDemo), ((0.0, 0.0), false));
    }
}
