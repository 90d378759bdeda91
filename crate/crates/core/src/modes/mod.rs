//! Hermite-Gauss / Laguerre-Gauss modes at the beam waist.
//!
//! A beam is a [`ModeExpansion`]: complex amplitudes over the HG basis. The
//! basis functions are unit normalized over the transverse plane, so the
//! squared norm of an expansion is its power.

mod expansion;
mod grid;
mod hermite;
pub mod io;
mod rotation;

pub use expansion::{lg_to_hg, ModeExpansion, DEFAULT_CUTOFF};
pub use grid::{
    decompose_grid, sample_lg, sample_mode, sample_rotated, Decomposition, GridField, GridSpec,
};
pub use hermite::{hermite_polynomial, laguerre_generalized, HermiteTable};
pub use rotation::{oam_phase, rotate_expansion, rotate_expansion_on, Rotated, RotationPath};

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest total order accepted by the field evaluators (n! overflows f64 past 170).
pub const MAX_FIELD_ORDER: u32 = 170;

/// Index of a Hermite-Gauss mode: `n` counts nodes along x, `m` along y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HGIndex {
    pub n: u32,
    pub m: u32,
}

impl HGIndex {
    pub const fn new(n: u32, m: u32) -> Self {
        HGIndex { n, m }
    }

    pub const fn order(self) -> u32 {
        self.n + self.m
    }

    /// Eigenvalue class under E(x, y) -> E(-x, -y).
    pub const fn parity_2d(self) -> Parity {
        Parity::of(self.n + self.m)
    }

    /// Eigenvalue class under E(x, y) -> E(-x, y).
    pub const fn parity_1d(self) -> Parity {
        Parity::of(self.n)
    }

    /// All indices with total order exactly `order`, ordered by `n`.
    pub fn of_order(order: u32) -> impl Iterator<Item = HGIndex> {
        (0..=order).map(move |n| HGIndex::new(n, order - n))
    }

    /// All indices with total order at most `max_order`.
    pub fn up_to_order(max_order: u32) -> impl Iterator<Item = HGIndex> {
        (0..=max_order).flat_map(HGIndex::of_order)
    }
}

impl fmt::Display for HGIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HG{},{}", self.n, self.m)
    }
}

/// Index of a Laguerre-Gauss mode: radial `p`, signed azimuthal (OAM) `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LGIndex {
    pub p: u32,
    pub l: i32,
}

impl LGIndex {
    pub const fn new(p: u32, l: i32) -> Self {
        LGIndex { p, l }
    }

    pub const fn order(self) -> u32 {
        2 * self.p + self.l.unsigned_abs()
    }

    /// Two-dimensional parity of an LG mode follows the parity of `l`.
    pub const fn parity_2d(self) -> Parity {
        Parity::of(self.l.unsigned_abs())
    }
}

impl fmt::Display for LGIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LG{},{}", self.p, self.l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub const fn of(value: u32) -> Self {
        if value % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// +1 for even, -1 for odd.
    pub const fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

pub fn parity_2d(idx: HGIndex) -> Parity {
    idx.parity_2d()
}

pub fn parity_1d(idx: HGIndex) -> Parity {
    idx.parity_1d()
}

/// Waist radius and wavelength, both in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamGeometry {
    w0: f64,
    wavelength: f64,
}

impl BeamGeometry {
    /// Helium-neon line, used whenever a wavelength is not given.
    pub const DEFAULT_WAVELENGTH: f64 = 632.8e-9;

    pub fn new(w0: f64, wavelength: f64) -> Result<Self> {
        if !(w0.is_finite() && w0 > 0.0) {
            return Err(Error::OutOfRange(format!(
                "waist radius must be positive, got {w0}"
            )));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::OutOfRange(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        Ok(BeamGeometry { w0, wavelength })
    }

    pub fn with_waist(w0: f64) -> Result<Self> {
        Self::new(w0, Self::DEFAULT_WAVELENGTH)
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
}

impl Default for BeamGeometry {
    fn default() -> Self {
        BeamGeometry {
            w0: 1.0e-3,
            wavelength: Self::DEFAULT_WAVELENGTH,
        }
    }
}

/// Value of the unit-normalized HG mode at transverse position (x, y) in the waist plane.
///
/// The field is real at the waist; it is returned as a complex number so it
/// can be combined directly with expansion coefficients.
pub fn hg_field_at(idx: HGIndex, x: f64, y: f64, geom: &BeamGeometry) -> Result<Complex64> {
    check_order(idx.order())?;
    let tx = HermiteTable::at(idx.n, x, geom.w0());
    let ty = HermiteTable::at(idx.m, y, geom.w0());
    Ok(Complex64::new(tx.value(idx.n) * ty.value(idx.m), 0.0))
}

pub(crate) fn check_order(order: u32) -> Result<()> {
    if order > MAX_FIELD_ORDER {
        Err(Error::OrderTooLarge {
            order,
            limit: MAX_FIELD_ORDER,
        })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// Literal evaluation of the waist-plane HG formula with explicit factorials.
    fn hg_reference(n: u32, m: u32, x: f64, y: f64, w0: f64) -> f64 {
        let a = (2.0
            / (2f64.powi((n + m) as i32) * std::f64::consts::PI * factorial(n) * factorial(m)))
        .sqrt();
        let s = std::f64::consts::SQRT_2;
        a / w0
            * hermite_polynomial(n, s * x / w0)
            * hermite_polynomial(m, s * y / w0)
            * (-(x * x + y * y) / (w0 * w0)).exp()
    }

    #[test]
    fn field_matches_closed_formula() {
        let geom = BeamGeometry::with_waist(0.5e-3).unwrap();
        for idx in HGIndex::up_to_order(8) {
            for &(x, y) in &[(0.1e-3, -0.3e-3), (0.7e-3, 0.2e-3), (-1.1e-3, 0.9e-3)] {
                let got = hg_field_at(idx, x, y, &geom).unwrap().re;
                let want = hg_reference(idx.n, idx.m, x, y, geom.w0());
                assert!(
                    (got - want).abs() <= 1e-10 * want.abs().max(1.0),
                    "{idx} at ({x},{y}): {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn hg10_vanishes_on_y_axis() {
        let geom = BeamGeometry::default();
        for y in [-2e-3, 0.0, 0.4e-3, 3e-3] {
            assert_eq!(
                hg_field_at(HGIndex::new(1, 0), 0.0, y, &geom)
                    .unwrap()
                    .norm(),
                0.0
            );
        }
    }

    #[test]
    fn gaussian_normalization_by_adaptive_quadrature() {
        // Adaptive Simpson over r in [0, 8 w0], the integrand is rotationally symmetric.
        let geom = BeamGeometry::with_waist(1.3).unwrap();
        let f = |r: f64| {
            let v = hg_field_at(HGIndex::new(0, 0), r, 0.0, &geom)
                .unwrap()
                .norm_sqr();
            2.0 * std::f64::consts::PI * r * v
        };
        let total = adaptive_simpson(&f, 0.0, 8.0 * geom.w0(), 1e-10, 40);
        assert!((total - 1.0).abs() < 1e-8, "{total}");
    }

    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            let c = 0.5 * (a + b);
            (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b))
        }
        fn recurse(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let c = 0.5 * (a + b);
            let left = simpson(f, a, c);
            let right = simpson(f, c, b);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                recurse(f, a, c, left, tol / 2.0, depth - 1)
                    + recurse(f, c, b, right, tol / 2.0, depth - 1)
            }
        }
        recurse(f, a, b, simpson(f, a, b), tol, depth)
    }

    #[test]
    fn order_guard() {
        let geom = BeamGeometry::default();
        let err = hg_field_at(HGIndex::new(100, 71), 0.0, 0.0, &geom).unwrap_err();
        assert!(err.to_string().contains("order too large"));
        assert!(hg_field_at(HGIndex::new(100, 70), 0.0, 0.0, &geom).is_ok());
    }

    #[test]
    fn parity_tables() {
        assert_eq!(parity_2d(HGIndex::new(1, 1)), Parity::Even);
        assert_eq!(parity_2d(HGIndex::new(3, 2)), Parity::Odd);
        assert_eq!(parity_2d(HGIndex::new(0, 0)), Parity::Even);
        assert_eq!(parity_1d(HGIndex::new(1, 0)), Parity::Odd);
        assert_eq!(parity_1d(HGIndex::new(0, 1)), Parity::Even);
        assert_eq!(parity_1d(HGIndex::new(2, 3)), Parity::Even);
        assert_eq!(parity_1d(HGIndex::new(0, 0)), Parity::Even);
        assert_eq!(LGIndex::new(0, -3).parity_2d(), Parity::Odd);
        assert_eq!(LGIndex::new(2, 1).order(), 5);
    }

    #[test]
    fn geometry_validation() {
        assert!(BeamGeometry::new(0.0, 1e-6).is_err());
        assert!(BeamGeometry::new(1e-3, -1.0).is_err());
        assert!(BeamGeometry::new(f64::NAN, 1e-6).is_err());
    }
}
