use std::f64::consts::{FRAC_2_PI, SQRT_2};

/// Unit-normalized one-dimensional HG factors f_0..f_N at a single coordinate.
///
/// f_k(x) = (2/pi)^(1/4) w0^(-1/2) H_k(sqrt2 x/w0) exp(-x^2/w0^2) / sqrt(2^k k!),
/// so HG_nm(x, y) = f_n(x) f_m(y). Evaluated with the three-term recurrence of
/// the normalized Hermite functions, which does not overflow for large k.
#[derive(Debug, Clone)]
pub struct HermiteTable {
    values: Vec<f64>,
}

impl HermiteTable {
    pub fn at(max_index: u32, x: f64, w0: f64) -> Self {
        let mut values = Vec::with_capacity(max_index as usize + 1);
        let u = SQRT_2 * x / w0;
        let prefactor = FRAC_2_PI.sqrt().sqrt() / w0.sqrt();
        let mut prev = 0.0;
        let mut cur = prefactor * (-0.5 * u * u).exp();
        values.push(cur);
        for k in 0..max_index {
            let kf = f64::from(k);
            let next = (2.0 / (kf + 1.0)).sqrt() * u * cur - (kf / (kf + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
            values.push(cur);
        }
        HermiteTable { values }
    }

    #[inline]
    pub fn value(&self, k: u32) -> f64 {
        self.values[k as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Physicists' Hermite polynomial H_n(u).
pub fn hermite_polynomial(n: u32, u: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * u;
    for k in 1..n {
        let next = 2.0 * u * cur - 2.0 * f64::from(k) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Generalized Laguerre polynomial L_p^alpha(x).
pub fn laguerre_generalized(p: u32, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..p {
        let kf = f64::from(k);
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_hermite() {
        let u = 0.7;
        assert_eq!(hermite_polynomial(0, u), 1.0);
        assert!((hermite_polynomial(1, u) - 2.0 * u).abs() < 1e-15);
        assert!((hermite_polynomial(2, u) - (4.0 * u * u - 2.0)).abs() < 1e-14);
        assert!((hermite_polynomial(3, u) - (8.0 * u.powi(3) - 12.0 * u)).abs() < 1e-14);
        assert_eq!(hermite_polynomial(1, 0.0), 0.0);
    }

    #[test]
    fn low_order_laguerre() {
        let x = 1.3;
        assert!((laguerre_generalized(1, 2.0, x) - (3.0 - x)).abs() < 1e-15);
        // L_2^a(x) = (x^2 - 2(a+2)x + (a+1)(a+2)) / 2
        let a = 1.0;
        let want = (x * x - 2.0 * (a + 2.0) * x + (a + 1.0) * (a + 2.0)) / 2.0;
        assert!((laguerre_generalized(2, a, x) - want).abs() < 1e-14);
    }

    #[test]
    fn table_is_finite_at_high_index() {
        let t = HermiteTable::at(160, 3.0, 1.0);
        assert!(t.values().iter().all(|v| v.is_finite()));
    }
}
