//! Post-selected photon pairs from down-conversion, filtered by a few-mode
//! fiber and sorted by a parity Sagnac.

mod compressor;
mod fiber;
pub mod pipeline;
mod sorting;
mod table;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modes::{BeamGeometry, HGIndex, ModeExpansion, DEFAULT_CUTOFF};

pub use compressor::{
    compressor_apply, compressor_apply_biphoton, solve_two_compressors, CompressorSpec,
    TwoCompressors,
};
pub use fiber::{
    fiber_demo_state, fiber_filter_biphoton, fiber_filter_single, guided_modes, FiberSpec,
    FilteredBiphoton, FilteredSingle, GuidedModes, FIBER_DEMO_FRACTION,
};
pub use sorting::{
    herald, pbs_split_bell, schmidt_coefficients, sort_biphoton, Branch, BranchLabel, Heralded,
    PbsReport, SortedBiphoton,
};
pub use table::{format_biphoton_table, parse_biphoton_table, ParsedTable};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Two-photon polarization over the product basis (photon 1, photon 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationPair {
    pub hv: Complex64,
    pub vh: Complex64,
    pub hh: Complex64,
    pub vv: Complex64,
}

impl PolarizationPair {
    /// (|H>|V> + |V>|H>)/sqrt2
    pub fn psi_plus() -> Self {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        PolarizationPair {
            hv: s,
            vh: s,
            hh: ZERO,
            vv: ZERO,
        }
    }

    pub fn product_hv() -> Self {
        PolarizationPair {
            hv: Complex64::new(1.0, 0.0),
            vh: ZERO,
            hh: ZERO,
            vv: ZERO,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.hv.norm_sqr() + self.vh.norm_sqr() + self.hh.norm_sqr() + self.vv.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        [self.hv, self.vh, self.hh, self.vv]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Photon labels swapped.
    pub fn exchanged(&self) -> Self {
        PolarizationPair {
            hv: self.vh,
            vh: self.hv,
            ..*self
        }
    }
}

/// Joint transverse amplitude of a photon pair: sum of c_{jk,st} |HG_jk>|HG_st>.
#[derive(Debug, Clone, PartialEq)]
pub struct BiphotonExpansion {
    terms: BTreeMap<(HGIndex, HGIndex), Complex64>,
    polarization: PolarizationPair,
    geometry: BeamGeometry,
}

impl BiphotonExpansion {
    pub fn new(geometry: BeamGeometry, polarization: PolarizationPair) -> Result<Self> {
        if !polarization.is_finite() {
            return Err(Error::OutOfRange(
                "polarization amplitudes must be finite".into(),
            ));
        }
        Ok(BiphotonExpansion {
            terms: BTreeMap::new(),
            polarization,
            geometry,
        })
    }

    pub fn add_term(
        &mut self,
        first: HGIndex,
        second: HGIndex,
        amplitude: Complex64,
    ) -> Result<()> {
        for idx in [first, second] {
            if idx.order() > DEFAULT_CUTOFF {
                return Err(Error::OrderTooLarge {
                    order: idx.order(),
                    limit: DEFAULT_CUTOFF,
                });
            }
        }
        if !(amplitude.re.is_finite() && amplitude.im.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "non-finite amplitude for {first} {second}"
            )));
        }
        *self.terms.entry((first, second)).or_insert(ZERO) += amplitude;
        Ok(())
    }

    pub(crate) fn insert(&mut self, first: HGIndex, second: HGIndex, amplitude: Complex64) {
        *self.terms.entry((first, second)).or_insert(ZERO) += amplitude;
    }

    pub(crate) fn empty_like(&self) -> Self {
        BiphotonExpansion {
            terms: BTreeMap::new(),
            polarization: self.polarization,
            geometry: self.geometry,
        }
    }

    pub fn coefficient(&self, first: HGIndex, second: HGIndex) -> Complex64 {
        self.terms.get(&(first, second)).copied().unwrap_or(ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (HGIndex, HGIndex, Complex64)> + '_ {
        self.terms.iter().map(|(&(a, b), &c)| (a, b, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn polarization(&self) -> &PolarizationPair {
        &self.polarization
    }

    pub fn geometry(&self) -> &BeamGeometry {
        &self.geometry
    }

    /// Squared norm of the spatial part.
    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn scaled(&self, z: Complex64) -> Self {
        self.map(|_, _, c| c * z)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n > 0.0) {
            return Err(Error::ZeroInput);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn filtered(&self, mut keep: impl FnMut(HGIndex, HGIndex) -> bool) -> Self {
        BiphotonExpansion {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| keep(k.0, k.1))
                .map(|(k, c)| (*k, *c))
                .collect(),
            ..self.empty_like()
        }
    }

    fn map(&self, mut f: impl FnMut(HGIndex, HGIndex, Complex64) -> Complex64) -> Self {
        BiphotonExpansion {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (*k, f(k.0, k.1, *c)))
                .collect(),
            ..self.empty_like()
        }
    }

    pub fn pruned(&self, eps: f64) -> Self {
        BiphotonExpansion {
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() > eps)
                .map(|(k, c)| (*k, *c))
                .collect(),
            ..self.empty_like()
        }
    }

    /// Photon labels swapped in both the spatial and polarization parts.
    pub fn exchanged(&self) -> Self {
        BiphotonExpansion {
            terms: self.terms.iter().map(|(k, c)| ((k.1, k.0), *c)).collect(),
            polarization: self.polarization.exchanged(),
            geometry: self.geometry,
        }
    }

    /// Largest |c(a, b) - c(b, a)| over stored terms.
    pub fn exchange_asymmetry(&self) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| (c - self.coefficient(k.1, k.0)).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &BiphotonExpansion) -> f64 {
        self.terms
            .keys()
            .chain(other.terms.keys())
            .map(|k| (self.coefficient(k.0, k.1) - other.coefficient(k.0, k.1)).norm())
            .fold(0.0, f64::max)
    }

    /// Applies the linear single-photon map `f` to each photon, where `f(idx)`
    /// is the image of the basis state |idx>.
    pub fn map_photons(
        &self,
        mut f1: impl FnMut(HGIndex) -> Result<ModeExpansion>,
        mut f2: impl FnMut(HGIndex) -> Result<ModeExpansion>,
    ) -> Result<Self> {
        let mut cache1 = BTreeMap::new();
        let mut cache2 = BTreeMap::new();
        for (a, b, _) in self.terms() {
            if let std::collections::btree_map::Entry::Vacant(v) = cache1.entry(a) {
                v.insert(f1(a)?);
            }
            if let std::collections::btree_map::Entry::Vacant(v) = cache2.entry(b) {
                v.insert(f2(b)?);
            }
        }
        let mut out = self.empty_like();
        for (a, b, c) in self.terms() {
            for (ia, ca) in cache1[&a].terms() {
                for (ib, cb) in cache2[&b].terms() {
                    out.insert(ia, ib, c * ca * cb);
                }
            }
        }
        Ok(out)
    }
}

/// Pump-dependent amplitudes of the truncated down-conversion expansions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdcCoefficients {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for SpdcCoefficients {
    fn default() -> Self {
        SpdcCoefficients {
            c0: 0.08,
            c1: 0.04,
            c2: -0.03,
        }
    }
}

/// Gaussian pump: c0|00>|00> + c1(|10>|10> + |01>|01>) + c2(|00>|02> + |02>|00> + |00>|20> + |20>|00>).
pub fn spdc_hg00() -> BiphotonExpansion {
    spdc_hg00_with(SpdcCoefficients::default(), BeamGeometry::default())
}

pub fn spdc_hg00_with(c: SpdcCoefficients, geometry: BeamGeometry) -> BiphotonExpansion {
    let h = HGIndex::new;
    let mut b = BiphotonExpansion::new(geometry, PolarizationPair::psi_plus())
        .expect("finite polarization");
    let terms = [
        (h(0, 0), h(0, 0), c.c0),
        (h(1, 0), h(1, 0), c.c1),
        (h(0, 1), h(0, 1), c.c1),
        (h(0, 0), h(0, 2), c.c2),
        (h(0, 2), h(0, 0), c.c2),
        (h(0, 0), h(2, 0), c.c2),
        (h(2, 0), h(0, 0), c.c2),
    ];
    for (a, bb, v) in terms {
        if v != 0.0 {
            b.insert(a, bb, Complex64::new(v, 0.0));
        }
    }
    b
}

/// HG45 pump, first order only: c1(|10>|00> + |00>|10> + |01>|00> + |00>|01>).
pub fn spdc_hg45() -> BiphotonExpansion {
    spdc_hg45_with(SpdcCoefficients::default().c1, BeamGeometry::default())
}

pub fn spdc_hg45_with(c1: f64, geometry: BeamGeometry) -> BiphotonExpansion {
    let h = HGIndex::new;
    let mut b = BiphotonExpansion::new(geometry, PolarizationPair::psi_plus())
        .expect("finite polarization");
    let c = Complex64::new(c1, 0.0);
    for (a, bb) in [
        (h(1, 0), h(0, 0)),
        (h(0, 0), h(1, 0)),
        (h(0, 1), h(0, 0)),
        (h(0, 0), h(0, 1)),
    ] {
        b.insert(a, bb, c);
    }
    b
}
