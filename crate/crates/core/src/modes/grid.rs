use num_complex::Complex64;
use rayon::prelude::*;

use super::hermite::laguerre_generalized;
use super::{check_order, BeamGeometry, HGIndex, HermiteTable, LGIndex, ModeExpansion};
use crate::error::{Error, Result};

/// Amplitudes at or below this modulus are dropped from decompositions.
const PRUNE_EPS: f64 = 1e-13;

/// Minimum number of samples across one lobe of the highest requested mode.
const SAMPLES_PER_LOBE: f64 = 6.0;

/// Square, cell-centered sampling window: sample i sits at -L + (i + 1/2) dx.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    half_width: f64,
    samples_per_side: usize,
}

impl GridSpec {
    pub const DEFAULT_HALF_WIDTH_IN_WAISTS: f64 = 8.0;
    pub const DEFAULT_SAMPLES: usize = 256;

    pub fn new(half_width: f64, samples_per_side: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        if samples_per_side < 16 || samples_per_side % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "samples per side must be even and at least 16, got {samples_per_side}"
            )));
        }
        Ok(GridSpec {
            half_width,
            samples_per_side,
        })
    }

    /// 8 w0 half width, 256 samples per side.
    pub fn default_for(geom: &BeamGeometry) -> Self {
        GridSpec {
            half_width: Self::DEFAULT_HALF_WIDTH_IN_WAISTS * geom.w0(),
            samples_per_side: Self::DEFAULT_SAMPLES,
        }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn samples_per_side(&self) -> usize {
        self.samples_per_side
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.samples_per_side as f64
    }

    /// Area of one sample cell.
    pub fn cell_area(&self) -> f64 {
        let d = self.spacing();
        d * d
    }

    /// Physical coordinate of sample `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.samples_per_side).map(|i| self.coord(i)).collect()
    }

    /// Checks that HG modes up to `max_order` are resolved and contained.
    pub fn check_resolution(&self, geom: &BeamGeometry, max_order: u32) -> Result<()> {
        let order = f64::from(max_order);
        let turning = geom.w0() * ((2.0 * order + 1.0) / 2.0).sqrt();
        let lobe = 2.0 * turning / (order + 1.0);
        let per_lobe = lobe / self.spacing();
        if per_lobe < SAMPLES_PER_LOBE {
            return Err(Error::UnderResolved {
                order: max_order,
                detail: format!("{per_lobe:.2} samples per lobe, need {SAMPLES_PER_LOBE}"),
            });
        }
        if self.half_width < turning + 2.0 * geom.w0() {
            return Err(Error::UnderResolved {
                order: max_order,
                detail: format!(
                    "half width {:.3} w0 does not contain the mode (need {:.3} w0)",
                    self.half_width / geom.w0(),
                    turning / geom.w0() + 2.0
                ),
            });
        }
        Ok(())
    }
}

/// Complex field samples, row-major: `values[j * N + i]` is at (x_i, y_j).
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    spec: GridSpec,
    values: Vec<Complex64>,
}

impl GridField {
    pub fn zeros(spec: GridSpec) -> Self {
        let n = spec.samples_per_side;
        GridField {
            spec,
            values: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_values(spec: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        let n = spec.samples_per_side;
        if values.len() != n * n {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                n * n,
                values.len()
            )));
        }
        Ok(GridField { spec, values })
    }

    /// Samples `f(x, y)` at every grid point.
    pub fn from_fn(spec: GridSpec, f: impl Fn(f64, f64) -> Complex64 + Sync) -> Self {
        let n = spec.samples_per_side;
        let mut values = vec![Complex64::new(0.0, 0.0); n * n];
        values.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            let y = spec.coord(j);
            for (i, v) in row.iter_mut().enumerate() {
                *v = f(spec.coord(i), y);
            }
        });
        GridField { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[j * self.spec.samples_per_side + i]
    }

    pub fn row(&self, j: usize) -> &[Complex64] {
        let n = self.spec.samples_per_side;
        &self.values[j * n..(j + 1) * n]
    }

    /// Riemann-sum power, sum |E|^2 dx dy.
    pub fn norm_sqr(&self) -> f64 {
        let n = self.spec.samples_per_side;
        let rows: Vec<f64> = self
            .values
            .par_chunks(n)
            .map(|row| row.iter().map(|v| v.norm_sqr()).sum::<f64>())
            .collect();
        rows.iter().sum::<f64>() * self.spec.cell_area()
    }

    /// Discrete <self|other>.
    pub fn inner(&self, other: &GridField) -> Result<Complex64> {
        if self.spec != other.spec {
            return Err(Error::InvalidGrid(
                "inner product of fields on different grids".into(),
            ));
        }
        let n = self.spec.samples_per_side;
        let rows: Vec<Complex64> = self
            .values
            .par_chunks(n)
            .zip(other.values.par_chunks(n))
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(p, q)| p.conj() * q)
                    .sum::<Complex64>()
            })
            .collect();
        Ok(rows.iter().sum::<Complex64>() * self.spec.cell_area())
    }

    pub fn scaled(&self, factor: Complex64) -> GridField {
        GridField {
            spec: self.spec,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn plus(&self, other: &GridField) -> Result<GridField> {
        if self.spec != other.spec {
            return Err(Error::InvalidGrid(
                "sum of fields on different grids".into(),
            ));
        }
        Ok(GridField {
            spec: self.spec,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// E(x, y) -> E(x, -y) on the sample lattice.
    pub fn mirrored_y(&self) -> GridField {
        let n = self.spec.samples_per_side;
        let mut values = Vec::with_capacity(n * n);
        for j in (0..n).rev() {
            values.extend_from_slice(self.row(j));
        }
        GridField {
            spec: self.spec,
            values,
        }
    }

    /// E(x, y) -> E(-x, y) on the sample lattice.
    pub fn mirrored_x(&self) -> GridField {
        let n = self.spec.samples_per_side;
        let mut values = Vec::with_capacity(n * n);
        for j in 0..n {
            values.extend(self.row(j).iter().rev());
        }
        GridField {
            spec: self.spec,
            values,
        }
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn phase(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.arg()).collect()
    }

    /// Bilinear interpolation at a physical point; zero outside the sampled square.
    pub fn interpolate(&self, x: f64, y: f64) -> Complex64 {
        let n = self.spec.samples_per_side;
        let d = self.spec.spacing();
        let fx = (x + self.spec.half_width) / d - 0.5;
        let fy = (y + self.spec.half_width) / d - 0.5;
        if !(fx >= 0.0 && fy >= 0.0 && fx <= (n - 1) as f64 && fy <= (n - 1) as f64) {
            return Complex64::new(0.0, 0.0);
        }
        let i0 = (fx.floor() as usize).min(n - 2);
        let j0 = (fy.floor() as usize).min(n - 2);
        let tx = fx - i0 as f64;
        let ty = fy - j0 as f64;
        let v00 = self.get(i0, j0);
        let v10 = self.get(i0 + 1, j0);
        let v01 = self.get(i0, j0 + 1);
        let v11 = self.get(i0 + 1, j0 + 1);
        v00 * ((1.0 - tx) * (1.0 - ty))
            + v10 * (tx * (1.0 - ty))
            + v01 * ((1.0 - tx) * ty)
            + v11 * (tx * ty)
    }

    /// Profile turned anti-clockwise by `angle`, resampled bilinearly.
    ///
    /// Returns the rotated field and the power lost to interpolation and to
    /// samples rotated out of the window (input power minus output power).
    pub fn rotated_bilinear(&self, angle: f64) -> (GridField, f64) {
        let (s, c) = angle.sin_cos();
        let out = GridField::from_fn(self.spec, |x, y| {
            self.interpolate(c * x + s * y, -s * x + c * y)
        });
        let residual = self.norm_sqr() - out.norm_sqr();
        (out, residual)
    }
}

/// Per-axis HG factor tables for a grid: `table[k][i] = f_k(x_i)`.
fn axis_tables(spec: &GridSpec, max_index: u32, w0: f64) -> Vec<Vec<f64>> {
    let n = spec.samples_per_side();
    let mut out = vec![vec![0.0; n]; max_index as usize + 1];
    for i in 0..n {
        let t = HermiteTable::at(max_index, spec.coord(i), w0);
        for (k, row) in out.iter_mut().enumerate() {
            row[i] = t.values()[k];
        }
    }
    out
}

/// Evaluates an expansion on a grid (linear in the coefficients).
pub fn sample_mode(expansion: &ModeExpansion, spec: &GridSpec) -> GridField {
    let Some(max_order) = expansion.max_order() else {
        return GridField::zeros(*spec);
    };
    let w0 = expansion.geometry().w0();
    let table = axis_tables(spec, max_order, w0);
    let terms: Vec<(HGIndex, Complex64)> = expansion.terms().collect();
    let n = spec.samples_per_side();
    let mut values = vec![Complex64::new(0.0, 0.0); n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        for &(idx, c) in &terms {
            let cy = c * table[idx.m as usize][j];
            let fx = &table[idx.n as usize];
            for (v, f) in row.iter_mut().zip(fx) {
                *v += cy * *f;
            }
        }
    });
    GridField {
        spec: *spec,
        values,
    }
}

/// Samples the expansion's profile turned anti-clockwise by `angle`.
///
/// The rotated field is E(R(-angle) r), evaluated exactly from the expansion
/// at the back-rotated coordinates rather than interpolated.
pub fn sample_rotated(expansion: &ModeExpansion, spec: &GridSpec, angle: f64) -> GridField {
    let Some(max_order) = expansion.max_order() else {
        return GridField::zeros(*spec);
    };
    let w0 = expansion.geometry().w0();
    let terms: Vec<(HGIndex, Complex64)> = expansion.terms().collect();
    let (s, c) = angle.sin_cos();
    GridField::from_fn(*spec, |x, y| {
        let xr = c * x + s * y;
        let yr = -s * x + c * y;
        let tx = HermiteTable::at(max_order, xr, w0);
        let ty = HermiteTable::at(max_order, yr, w0);
        terms
            .iter()
            .map(|(idx, coef)| coef * (tx.value(idx.n) * ty.value(idx.m)))
            .sum()
    })
}

/// Unit-discrete-norm LG mode rho^|l| L_p^|l|(2 rho^2/w0^2) exp(-rho^2/w0^2) exp(i l phi).
pub fn sample_lg(idx: LGIndex, geom: &BeamGeometry, spec: &GridSpec) -> GridField {
    let w0 = geom.w0();
    let abs_l = idx.l.unsigned_abs();
    let raw = GridField::from_fn(*spec, |x, y| {
        let r2 = (x * x + y * y) / (w0 * w0);
        let radial = (2.0 * r2).sqrt().powi(abs_l as i32)
            * laguerre_generalized(idx.p, f64::from(abs_l), 2.0 * r2)
            * (-r2).exp();
        let phi = y.atan2(x);
        Complex64::from_polar(radial, f64::from(idx.l) * phi)
    });
    let norm = raw.norm_sqr().sqrt();
    if norm == 0.0 {
        raw
    } else {
        raw.scaled(Complex64::new(1.0 / norm, 0.0))
    }
}

/// Result of projecting a sampled field onto the HG basis.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub expansion: ModeExpansion,
    /// Field power not captured by the retained modes.
    pub residual_power: f64,
}

/// Projects a sampled field onto every HG mode with n + m <= `max_order`.
pub fn decompose_grid(
    field: &GridField,
    geom: &BeamGeometry,
    max_order: u32,
) -> Result<Decomposition> {
    let indices: Vec<HGIndex> = HGIndex::up_to_order(max_order).collect();
    decompose_onto(field, geom, max_order, &indices)
}

/// Projection onto an explicit set of HG modes, all of order <= `max_order`.
pub(crate) fn decompose_onto(
    field: &GridField,
    geom: &BeamGeometry,
    max_order: u32,
    indices: &[HGIndex],
) -> Result<Decomposition> {
    check_order(max_order)?;
    field.spec().check_resolution(geom, max_order)?;
    let spec = field.spec();
    let n = spec.samples_per_side();
    let table = axis_tables(spec, max_order, geom.w0());
    let kmax = max_order as usize + 1;

    // Per row j: g[k] = sum_i f_k(x_i) E(x_i, y_j).
    let row_sums: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let row = field.row(j);
            (0..kmax)
                .map(|k| {
                    table[k]
                        .iter()
                        .zip(row)
                        .map(|(f, v)| v * *f)
                        .sum::<Complex64>()
                })
                .collect()
        })
        .collect();

    let area = spec.cell_area();
    let mut expansion = ModeExpansion::with_cutoff(*geom, max_order.max(super::DEFAULT_CUTOFF))?;
    for &idx in indices {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, g) in row_sums.iter().enumerate() {
            acc += g[idx.n as usize] * table[idx.m as usize][j];
        }
        let c = acc * area;
        if c.norm() > PRUNE_EPS {
            expansion.insert_unchecked(idx, c);
        }
    }
    let residual_power = field.norm_sqr() - expansion.norm_sqr();
    Ok(Decomposition {
        expansion,
        residual_power,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;

    use super::*;

    fn geom() -> BeamGeometry {
        BeamGeometry::default()
    }

    #[test]
    fn spec_validation() {
        assert!(GridSpec::new(1.0, 15).is_err());
        assert!(GridSpec::new(1.0, 17).is_err());
        assert!(GridSpec::new(0.0, 64).is_err());
        let s = GridSpec::new(2.0, 16).unwrap();
        assert!((s.coord(0) + 1.875).abs() < 1e-15);
        assert!((s.coord(15) - 1.875).abs() < 1e-15);
    }

    #[test]
    fn zero_expansion_gives_zero_field() {
        let g = geom();
        let f = sample_mode(&ModeExpansion::new(g), &GridSpec::default_for(&g));
        assert!(f.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn gaussian_discrete_norm() {
        let g = geom();
        let f = sample_mode(
            &ModeExpansion::hg(HGIndex::new(0, 0), g),
            &GridSpec::default_for(&g),
        );
        assert!((f.norm_sqr() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn hg01_is_odd_in_y() {
        let g = geom();
        let f = sample_mode(
            &ModeExpansion::hg(HGIndex::new(0, 1), g),
            &GridSpec::default_for(&g),
        );
        let m = f.mirrored_y();
        for (a, b) in f.values().iter().zip(m.values()) {
            assert!((a + b).norm() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_linear() {
        let g = geom();
        let spec = GridSpec::new(8.0 * g.w0(), 64).unwrap();
        let a = ModeExpansion::hg(HGIndex::new(2, 1), g);
        let b = ModeExpansion::hg(HGIndex::new(0, 3), g).scaled(Complex64::new(0.3, -0.2));
        let lhs = sample_mode(&a.plus(&b).unwrap(), &spec);
        let rhs = sample_mode(&a, &spec)
            .plus(&sample_mode(&b, &spec))
            .unwrap();
        for (p, q) in lhs.values().iter().zip(rhs.values()) {
            assert!((p - q).norm() < 1e-9 * (1.0 / g.w0()));
        }
    }

    #[test]
    fn hg20_round_trip() {
        let g = geom();
        let spec = GridSpec::default_for(&g);
        let f = sample_mode(&ModeExpansion::hg(HGIndex::new(2, 0), g), &spec);
        let d = decompose_grid(&f, &g, 6).unwrap();
        for idx in HGIndex::up_to_order(6) {
            let c = d.expansion.coefficient(idx);
            if idx == HGIndex::new(2, 0) {
                assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-6);
            } else {
                assert!(c.norm() < 1e-6, "{idx}: {c}");
            }
        }
        assert!(d.residual_power.abs() < 1e-6);
    }

    #[test]
    fn zero_field_decomposes_to_nothing() {
        let g = geom();
        let d = decompose_grid(&GridField::zeros(GridSpec::default_for(&g)), &g, 4).unwrap();
        assert!(d.expansion.is_empty());
        assert_eq!(d.residual_power, 0.0);
    }

    #[test]
    fn fiber_mix_power_fraction() {
        let g = geom();
        let a = (0.075f64).sqrt();
        let e = ModeExpansion::from_terms(
            g,
            [
                (HGIndex::new(0, 0), Complex64::new(0.85f64.sqrt(), 0.0)),
                (HGIndex::new(1, 0), Complex64::new(a, 0.0)),
                (HGIndex::new(0, 1), Complex64::new(a, 0.0)),
            ],
        )
        .unwrap();
        let d = decompose_grid(&sample_mode(&e, &GridSpec::default_for(&g)), &g, 3).unwrap();
        assert!((d.expansion.coefficient(HGIndex::new(0, 0)).norm_sqr() - 0.85).abs() < 1e-4);
    }

    #[test]
    fn lg_plus_one_decomposition() {
        let g = geom();
        let spec = GridSpec::default_for(&g);
        let d = decompose_grid(&sample_lg(LGIndex::new(0, 1), &g, &spec), &g, 5).unwrap();
        let c10 = d.expansion.coefficient(HGIndex::new(1, 0));
        let c01 = d.expansion.coefficient(HGIndex::new(0, 1));
        assert!((c10 - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-6);
        assert!((c01 - Complex64::new(0.0, FRAC_1_SQRT_2)).norm() < 1e-6);
    }

    #[test]
    fn lg_fundamental_is_the_gaussian() {
        let g = geom();
        let spec = GridSpec::new(8.0 * g.w0(), 64).unwrap();
        let lg = sample_lg(LGIndex::new(0, 0), &g, &spec);
        let hg = sample_mode(&ModeExpansion::hg(HGIndex::new(0, 0), g), &spec);
        let scale = hg.norm_sqr().sqrt();
        for (a, b) in lg.values().iter().zip(hg.values()) {
            assert!((a * scale - b).norm() < 1e-9 / g.w0());
        }
    }

    #[test]
    fn lg_two_is_two_dimensionally_even() {
        let g = geom();
        let spec = GridSpec::default_for(&g);
        let d = decompose_grid(&sample_lg(LGIndex::new(0, 2), &g, &spec), &g, 6).unwrap();
        for (idx, c) in d.expansion.terms() {
            if idx.order() % 2 == 1 {
                assert!(c.norm() < 1e-9, "{idx}: {c}");
            }
        }
        assert!((d.expansion.order_power(2) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn under_resolved_grid_is_rejected() {
        let g = geom();
        let spec = GridSpec::new(8.0 * g.w0(), 32).unwrap();
        let f = sample_mode(&ModeExpansion::hg(HGIndex::new(0, 0), g), &spec);
        let err = decompose_grid(&f, &g, 8).unwrap_err();
        assert!(err.to_string().contains("grid under-resolved"));
        let narrow = GridSpec::new(2.0 * g.w0(), 256).unwrap();
        assert!(decompose_grid(&GridField::zeros(narrow), &g, 4).is_err());
    }

    #[test]
    fn orthonormality_through_order_eight() {
        let g = geom();
        let spec = GridSpec::default_for(&g);
        // Orthonormality of the sampled basis is the same statement as the
        // decomposition of a sampled basis function being a unit vector.
        for idx in HGIndex::up_to_order(8) {
            let f = sample_mode(&ModeExpansion::hg(idx, g), &spec);
            let d = decompose_grid(&f, &g, 8).unwrap();
            for other in HGIndex::up_to_order(8) {
                let want = if other == idx { 1.0 } else { 0.0 };
                let got = d.expansion.coefficient(other);
                assert!(
                    (got - Complex64::new(want, 0.0)).norm() < 1e-6,
                    "<{other}|{idx}> = {got}"
                );
            }
        }
    }

    #[test]
    fn bilinear_rotation_reports_loss() {
        let g = geom();
        let spec = GridSpec::default_for(&g);
        let f = sample_mode(&ModeExpansion::hg(HGIndex::new(2, 1), g), &spec);
        let (rot, residual) = f.rotated_bilinear(0.3);
        let exact = sample_rotated(&ModeExpansion::hg(HGIndex::new(2, 1), g), &spec, 0.3);
        assert!(residual.abs() < 1e-2);
        let overlap = rot.inner(&exact).unwrap().norm();
        assert!((overlap - 1.0).abs() < 1e-2, "{overlap}");
    }

    #[test]
    fn quarter_turn_by_resampling_maps_hg10_to_hg01() {
        let g = geom();
        let spec = GridSpec::default_for(&g);
        let rot = sample_rotated(
            &ModeExpansion::hg(HGIndex::new(1, 0), g),
            &spec,
            std::f64::consts::FRAC_PI_2,
        );
        let d = decompose_grid(&rot, &g, 1).unwrap();
        assert!(
            (d.expansion.coefficient(HGIndex::new(0, 1)) - Complex64::new(1.0, 0.0)).norm() < 1e-9
        );
    }
}
