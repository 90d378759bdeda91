use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::grid::decompose_onto;
use super::{sample_rotated, GridSpec, HGIndex, LGIndex, ModeExpansion};
use crate::error::{Error, Result};

/// Angles this close to 0 or pi (mod 2pi) take the exact closed forms.
const ANGLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationPath {
    /// Closed forms where they exist, grid resampling for the rest.
    Auto,
    /// Resample every order on the grid, even where a closed form exists.
    Grid,
}

#[derive(Debug, Clone)]
pub struct Rotated {
    pub expansion: ModeExpansion,
    /// Power lost by the grid path (0 when only closed forms were used).
    pub residual_power: f64,
}

/// Turns the transverse profile anti-clockwise by `angle` on the default grid.
pub fn rotate_expansion(expansion: &ModeExpansion, angle: f64) -> Result<ModeExpansion> {
    let spec = GridSpec::default_for(expansion.geometry());
    rotate_expansion_on(expansion, angle, &spec, RotationPath::Auto).map(|r| r.expansion)
}

pub fn rotate_expansion_on(
    expansion: &ModeExpansion,
    angle: f64,
    spec: &GridSpec,
    path: RotationPath,
) -> Result<Rotated> {
    if !angle.is_finite() {
        return Err(Error::OutOfRange(format!(
            "rotation angle must be finite, got {angle}"
        )));
    }
    if path == RotationPath::Grid {
        return rotate_on_grid(expansion, angle, spec);
    }
    let reduced = angle.rem_euclid(TAU);
    if reduced < ANGLE_EPS || TAU - reduced < ANGLE_EPS {
        return Ok(exact(expansion.clone()));
    }
    if (reduced - PI).abs() < ANGLE_EPS {
        return Ok(exact(
            expansion.map_coefficients(|idx, c| c * idx.parity_2d().sign()),
        ));
    }

    let (s, c) = angle.sin_cos();
    let mut out = expansion.empty_like();
    let c00 = expansion.coefficient(HGIndex::new(0, 0));
    let c10 = expansion.coefficient(HGIndex::new(1, 0));
    let c01 = expansion.coefficient(HGIndex::new(0, 1));
    let orders = expansion.orders();
    if orders.contains(&0) {
        out.insert_unchecked(HGIndex::new(0, 0), c00);
    }
    if orders.contains(&1) {
        out.insert_unchecked(HGIndex::new(1, 0), c10 * c - c01 * s);
        out.insert_unchecked(HGIndex::new(0, 1), c10 * s + c01 * c);
    }

    let high = expansion.filtered(|idx| idx.order() >= 2);
    if high.is_empty() {
        return Ok(exact(out));
    }
    let rotated_high = rotate_on_grid(&high, angle, spec)?;
    for (idx, amp) in rotated_high.expansion.terms() {
        out.insert_unchecked(idx, amp);
    }
    Ok(Rotated {
        expansion: out,
        residual_power: rotated_high.residual_power,
    })
}

fn exact(expansion: ModeExpansion) -> Rotated {
    Rotated {
        expansion,
        residual_power: 0.0,
    }
}

/// Rotation preserves total order, so the resampled field is projected back
/// onto exactly the orders present in the input.
fn rotate_on_grid(expansion: &ModeExpansion, angle: f64, spec: &GridSpec) -> Result<Rotated> {
    let Some(max_order) = expansion.max_order() else {
        return Ok(exact(expansion.clone()));
    };
    let geom = *expansion.geometry();
    let field = sample_rotated(expansion, spec, angle);
    let indices: Vec<HGIndex> = expansion
        .orders()
        .into_iter()
        .flat_map(HGIndex::of_order)
        .collect();
    let d = decompose_onto(&field, &geom, max_order, &indices)?;
    let mut out = expansion.empty_like();
    for (idx, amp) in d.expansion.terms() {
        out.insert_unchecked(idx, amp);
    }
    Ok(Rotated {
        residual_power: expansion.norm_sqr() - out.norm_sqr(),
        expansion: out,
    })
}

/// Eigenvalue exp(-i l angle) of an LG mode under an anti-clockwise rotation.
pub fn oam_phase(idx: LGIndex, angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, -f64::from(idx.l) * angle)
}
