use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::{BeamGeometry, HGIndex, LGIndex, MAX_FIELD_ORDER};
use crate::error::{Error, Result};

/// Default bound on the total order n + m an expansion may hold.
pub const DEFAULT_CUTOFF: u32 = 24;

/// A transverse beam state: complex amplitudes over the HG basis.
///
/// The norm is whatever the amplitudes say; nothing here renormalizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeExpansion {
    terms: BTreeMap<HGIndex, Complex64>,
    geometry: BeamGeometry,
    cutoff: u32,
}

impl ModeExpansion {
    pub fn new(geometry: BeamGeometry) -> Self {
        ModeExpansion {
            terms: BTreeMap::new(),
            geometry,
            cutoff: DEFAULT_CUTOFF,
        }
    }

    pub fn with_cutoff(geometry: BeamGeometry, cutoff: u32) -> Result<Self> {
        if cutoff > MAX_FIELD_ORDER {
            return Err(Error::OrderTooLarge {
                order: cutoff,
                limit: MAX_FIELD_ORDER,
            });
        }
        Ok(ModeExpansion {
            terms: BTreeMap::new(),
            geometry,
            cutoff,
        })
    }

    /// A single unit-amplitude HG mode.
    pub fn hg(idx: HGIndex, geometry: BeamGeometry) -> Self {
        let mut e = Self::new(geometry);
        e.cutoff = e.cutoff.max(idx.order());
        e.terms.insert(idx, Complex64::new(1.0, 0.0));
        e
    }

    /// (HG10 + HG01)/sqrt2: HG10 turned through 45 degrees.
    pub fn hg45(geometry: BeamGeometry) -> Self {
        Self::from_terms(
            geometry,
            [
                (HGIndex::new(1, 0), Complex64::new(FRAC_1_SQRT_2, 0.0)),
                (HGIndex::new(0, 1), Complex64::new(FRAC_1_SQRT_2, 0.0)),
            ],
        )
        .expect("first-order terms are within the default cutoff")
    }

    pub fn from_terms(
        geometry: BeamGeometry,
        terms: impl IntoIterator<Item = (HGIndex, Complex64)>,
    ) -> Result<Self> {
        let mut e = Self::new(geometry);
        for (idx, c) in terms {
            e.add_term(idx, c)?;
        }
        Ok(e)
    }

    /// Adds `amplitude` to the coefficient of `idx`.
    pub fn add_term(&mut self, idx: HGIndex, amplitude: Complex64) -> Result<()> {
        if idx.order() > self.cutoff {
            return Err(Error::OrderTooLarge {
                order: idx.order(),
                limit: self.cutoff,
            });
        }
        if !(amplitude.re.is_finite() && amplitude.im.is_finite()) {
            return Err(Error::OutOfRange(format!("non-finite amplitude for {idx}")));
        }
        *self.terms.entry(idx).or_insert(Complex64::new(0.0, 0.0)) += amplitude;
        Ok(())
    }

    /// Inserts without the cutoff check; used by linear maps that preserve order.
    pub(crate) fn insert_unchecked(&mut self, idx: HGIndex, amplitude: Complex64) {
        *self.terms.entry(idx).or_insert(Complex64::new(0.0, 0.0)) += amplitude;
    }

    pub fn coefficient(&self, idx: HGIndex) -> Complex64 {
        self.terms.get(&idx).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (HGIndex, Complex64)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn geometry(&self) -> &BeamGeometry {
        &self.geometry
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn max_order(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.order()).max()
    }

    /// Distinct total orders carrying a stored term, ascending.
    pub fn orders(&self) -> Vec<u32> {
        let mut orders: Vec<u32> = self.terms.keys().map(|k| k.order()).collect();
        orders.sort_unstable();
        orders.dedup();
        orders
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Power carried by total order `order`.
    pub fn order_power(&self, order: u32) -> f64 {
        self.terms
            .iter()
            .filter(|(k, _)| k.order() == order)
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }

    /// <self|other>, antilinear in `self`.
    pub fn inner(&self, other: &ModeExpansion) -> Complex64 {
        self.terms
            .iter()
            .filter_map(|(k, a)| other.terms.get(k).map(|b| a.conj() * b))
            .sum()
    }

    /// |<self|other>| / (|self| |other|).
    pub fn overlap(&self, other: &ModeExpansion) -> f64 {
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            0.0
        } else {
            self.inner(other).norm() / denom
        }
    }

    pub fn scaled(&self, factor: Complex64) -> ModeExpansion {
        self.map_coefficients(|_, c| c * factor)
    }

    pub fn normalized(&self) -> Result<ModeExpansion> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroInput);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    /// Sum of two expansions over the same beam geometry.
    pub fn plus(&self, other: &ModeExpansion) -> Result<ModeExpansion> {
        if self.geometry != other.geometry {
            return Err(Error::GeometryMismatch);
        }
        let mut out = self.clone();
        out.cutoff = out.cutoff.max(other.cutoff);
        for (k, c) in other.terms() {
            out.insert_unchecked(k, c);
        }
        Ok(out)
    }

    pub fn map_coefficients(
        &self,
        mut f: impl FnMut(HGIndex, Complex64) -> Complex64,
    ) -> ModeExpansion {
        ModeExpansion {
            terms: self.terms.iter().map(|(k, c)| (*k, f(*k, *c))).collect(),
            geometry: self.geometry,
            cutoff: self.cutoff,
        }
    }

    /// Keeps only terms accepted by `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(HGIndex) -> bool) -> ModeExpansion {
        ModeExpansion {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| keep(**k))
                .map(|(k, c)| (*k, *c))
                .collect(),
            geometry: self.geometry,
            cutoff: self.cutoff,
        }
    }

    /// Drops terms whose amplitude modulus is at most `eps`.
    pub fn pruned(&self, eps: f64) -> ModeExpansion {
        ModeExpansion {
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() > eps)
                .map(|(k, c)| (*k, *c))
                .collect(),
            geometry: self.geometry,
            cutoff: self.cutoff,
        }
    }

    pub(crate) fn empty_like(&self) -> ModeExpansion {
        ModeExpansion {
            terms: BTreeMap::new(),
            geometry: self.geometry,
            cutoff: self.cutoff,
        }
    }

    /// Largest coefficient difference against `other`, over the union of supports.
    pub fn max_abs_diff(&self, other: &ModeExpansion) -> f64 {
        self.terms
            .keys()
            .chain(other.terms.keys())
            .map(|k| (self.coefficient(*k) - other.coefficient(*k)).norm())
            .fold(0.0, f64::max)
    }
}

/// First-order LG modes written over the HG basis: (HG10 +/- i HG01)/sqrt2.
///
/// Higher-order LG modes go through [`super::sample_lg`] and
/// [`super::decompose_grid`].
pub fn lg_to_hg(idx: LGIndex, geometry: BeamGeometry) -> Result<ModeExpansion> {
    if idx.p != 0 || idx.l.abs() != 1 {
        return Err(Error::UnsupportedConversion { p: idx.p, l: idx.l });
    }
    let sign = f64::from(idx.l.signum());
    ModeExpansion::from_terms(
        geometry,
        [
            (HGIndex::new(1, 0), Complex64::new(FRAC_1_SQRT_2, 0.0)),
            (
                HGIndex::new(0, 1),
                Complex64::new(0.0, sign * FRAC_1_SQRT_2),
            ),
        ],
    )
}
