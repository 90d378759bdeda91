use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use super::BiphotonExpansion;
use crate::error::{Error, Result};
use crate::modes::{HGIndex, ModeExpansion};

/// Fiber squeezed along `axis_angle`: a retarder acting on first-order modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressorSpec {
    axis_angle: f64,
    retardance: f64,
}

impl CompressorSpec {
    /// The retardance is reduced into [0, 2 pi).
    pub fn new(axis_angle: f64, retardance: f64) -> Result<Self> {
        if !(axis_angle.is_finite() && retardance.is_finite()) {
            return Err(Error::OutOfRange("compressor angles must be finite".into()));
        }
        let r = retardance.rem_euclid(TAU);
        Ok(CompressorSpec {
            axis_angle,
            retardance: if r >= TAU { 0.0 } else { r },
        })
    }

    pub fn axis_angle(&self) -> f64 {
        self.axis_angle
    }

    pub fn retardance(&self) -> f64 {
        self.retardance
    }

    /// 2x2 action on (c10, c01): R(a) diag(e^{i delta}, 1) R(-a).
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let (s, c) = self.axis_angle.sin_cos();
        let e = Complex64::from_polar(1.0, self.retardance) - 1.0;
        [[1.0 + e * c * c, e * c * s], [e * c * s, 1.0 + e * s * s]]
    }
}

pub fn compressor_apply(e: &ModeExpansion, spec: &CompressorSpec) -> Result<ModeExpansion> {
    if e.terms().any(|(idx, _)| idx.order() > 1) {
        return Err(Error::CompressorOrder);
    }
    let m = spec.matrix();
    let c10 = e.coefficient(HGIndex::new(1, 0));
    let c01 = e.coefficient(HGIndex::new(0, 1));
    let mut out = e.filtered(|idx| idx.order() == 0);
    if e.orders().contains(&1) {
        out.add_term(HGIndex::new(1, 0), m[0][0] * c10 + m[0][1] * c01)?;
        out.add_term(HGIndex::new(0, 1), m[1][0] * c10 + m[1][1] * c01)?;
    }
    Ok(out)
}

/// The same compressor applied to each photon of the pair.
pub fn compressor_apply_biphoton(
    b: &BiphotonExpansion,
    spec: &CompressorSpec,
) -> Result<BiphotonExpansion> {
    if b.terms().any(|(x, y, _)| x.order() > 1 || y.order() > 1) {
        return Err(Error::CompressorOrder);
    }
    let g = *b.geometry();
    let f = |idx: HGIndex| compressor_apply(&ModeExpansion::hg(idx, g), spec);
    Ok(b.map_photons(f, f)?.pruned(0.0))
}

/// Half-wave then quarter-wave compressor angles reaching a first-order target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoCompressors {
    pub half_wave: CompressorSpec,
    pub quarter_wave: CompressorSpec,
}

impl TwoCompressors {
    pub fn apply(&self, e: &ModeExpansion) -> Result<ModeExpansion> {
        compressor_apply(&compressor_apply(e, &self.half_wave)?, &self.quarter_wave)
    }
}

/// Angles taking HG10 to `target` (up to global phase).
///
/// A target with orientation psi and ellipticity chi on the first-order
/// sphere is R(psi)(cos chi, i sin chi); the quarter-wave axis is psi and the
/// half-wave axis (psi - chi)/2.
pub fn solve_two_compressors(target: &ModeExpansion) -> Result<TwoCompressors> {
    if target.terms().any(|(idx, _)| idx.order() != 1) {
        return Err(Error::CompressorOrder);
    }
    let a = target.coefficient(HGIndex::new(1, 0));
    let b = target.coefficient(HGIndex::new(0, 1));
    let n = a.norm_sqr() + b.norm_sqr();
    if !(n > 0.0) {
        return Err(Error::ZeroInput);
    }
    let s1 = (a.norm_sqr() - b.norm_sqr()) / n;
    let ab = a.conj() * b;
    let s2 = 2.0 * ab.re / n;
    let s3 = 2.0 * ab.im / n;
    let psi = 0.5 * s2.atan2(s1);
    let chi = 0.5 * s3.clamp(-1.0, 1.0).asin();
    Ok(TwoCompressors {
        half_wave: CompressorSpec::new((psi - chi) / 2.0, PI)?,
        quarter_wave: CompressorSpec::new(psi, FRAC_PI_2)?,
    })
}
