//! Mode descriptions given on the command line.

use std::f64::consts::PI;
use std::path::Path;

use sagnac_core::modes::{
    decompose_grid, io::parse_expansion, lg_to_hg, sample_lg, sample_mode, BeamGeometry, GridField,
    GridSpec, HGIndex, LGIndex, ModeExpansion,
};
use sagnac_core::quantum::fiber_demo_state;
use sagnac_core::Complex64;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Hg(HGIndex),
    Lg(LGIndex),
    Hg45,
    FiberDemo,
    File,
}

#[derive(Debug, Clone)]
pub struct ModeSource {
    pub label: String,
    pub kind: SourceKind,
    pub expansion: ModeExpansion,
}

impl ModeSource {
    /// `hg:n,m`, `lg:p,l`, `hg45`, `fiber-demo`, or a path to an expansion file.
    pub fn parse(spec: &str, geom: BeamGeometry, grid: &GridSpec) -> Result<Self, Failure> {
        let (kind, expansion) = if let Some(rest) = spec.strip_prefix("hg:") {
            let (n, m) = index_pair::<u32, u32>(rest, spec)?;
            let idx = HGIndex::new(n, m);
            (SourceKind::Hg(idx), single_hg(idx, geom)?)
        } else if let Some(rest) = spec.strip_prefix("lg:") {
            let (p, l) = index_pair::<u32, i32>(rest, spec)?;
            let idx = LGIndex::new(p, l);
            (SourceKind::Lg(idx), lg_expansion(idx, geom, grid)?)
        } else if spec == "hg45" {
            (SourceKind::Hg45, ModeExpansion::hg45(geom))
        } else if spec == "fiber-demo" {
            (SourceKind::FiberDemo, fiber_demo_state(geom))
        } else if Path::new(spec).is_file() {
            let text = std::fs::read_to_string(spec)
                .map_err(|e| Failure::Usage(format!("cannot read {spec}: {e}")))?;
            (SourceKind::File, parse_expansion(&text)?)
        } else {
            return Err(Failure::Usage(format!(
                "unknown mode `{spec}` (expected hg:n,m, lg:p,l, hg45, fiber-demo or an expansion file)"
            )));
        };
        Ok(ModeSource {
            label: spec.to_string(),
            kind,
            expansion,
        })
    }

    /// Sampled profile; LG modes are sampled directly rather than through their expansion.
    pub fn field(&self, grid: &GridSpec) -> GridField {
        match self.kind {
            SourceKind::Lg(idx) => sample_lg(idx, self.expansion.geometry(), grid),
            _ => sample_mode(&self.expansion, grid),
        }
    }
}

fn index_pair<A: std::str::FromStr, B: std::str::FromStr>(
    text: &str,
    spec: &str,
) -> Result<(A, B), Failure> {
    let bad = || Failure::Usage(format!("malformed mode index in `{spec}`"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn single_hg(idx: HGIndex, geom: BeamGeometry) -> Result<ModeExpansion, Failure> {
    let mut e = ModeExpansion::with_cutoff(geom, idx.order())?;
    e.add_term(idx, Complex64::new(1.0, 0.0))?;
    Ok(e)
}

fn lg_expansion(
    idx: LGIndex,
    geom: BeamGeometry,
    grid: &GridSpec,
) -> Result<ModeExpansion, Failure> {
    if idx.p == 0 && idx.l.abs() == 1 {
        return Ok(lg_to_hg(idx, geom)?);
    }
    let field = sample_lg(idx, &geom, grid);
    Ok(decompose_grid(&field, &geom, idx.order())?
        .expansion
        .pruned(1e-12))
}

/// Grid scaled to the source waist.
pub fn grid_for(
    geom: &BeamGeometry,
    half_width_w0: f64,
    samples: usize,
) -> Result<GridSpec, Failure> {
    Ok(GridSpec::new(half_width_w0 * geom.w0(), samples)?)
}

/// Plain numbers or multiples of pi such as `pi/4`, `-3pi/8`, `3*pi/8`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let Some((coef, rest)) = t.split_once("pi") else {
        return t.parse().map_err(|_| format!("invalid angle `{text}`"));
    };
    let coef = coef.trim_end_matches('*');
    let k: f64 = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse().map_err(|_| format!("invalid angle `{text}`"))?,
    };
    let d: f64 = match rest {
        "" => 1.0,
        r => r
            .strip_prefix('/')
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| format!("invalid angle `{text}`"))?,
    };
    let v = k * PI / d;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("invalid angle `{text}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi/4").unwrap(), PI / 4.0);
        assert_eq!(parse_angle("-3pi/8").unwrap(), -3.0 * PI / 8.0);
        assert_eq!(parse_angle("3*pi/8").unwrap(), 3.0 * PI / 8.0);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        assert!(parse_angle("pi/").is_err());
        assert!(parse_angle("x").is_err());
        assert!(parse_angle("pi/0").is_err());
    }

    #[test]
    fn presets() {
        let g = BeamGeometry::default();
        let grid = GridSpec::default_for(&g);
        let s = ModeSource::parse("hg:1,5", g, &grid).unwrap();
        assert_eq!(s.kind, SourceKind::Hg(HGIndex::new(1, 5)));
        let lg = ModeSource::parse("lg:0,2", g, &grid).unwrap();
        assert!((lg.expansion.norm_sqr() - 1.0).abs() < 1e-6);
        assert!(ModeSource::parse("hg:1", g, &grid).is_err());
        assert!(ModeSource::parse("nope", g, &grid).is_err());
    }
}
