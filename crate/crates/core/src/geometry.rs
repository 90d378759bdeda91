//! Geometric image rotation from out-of-plane mirror paths.
//!
//! After `n` reflections a beam travelling along k has helicity vector
//! h = (-1)^n k. The geodesic loop traced by the helicity vectors on the unit
//! sphere encloses a solid angle equal to the rotation of the transverse
//! profile about the beam axis. For the isosceles out-of-plane Sagnac loop
//! with base angle theta this reduces to cos(Omega/2) = sin(theta).

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

const UNIT_TOL: f64 = 1e-12;
const DEDUP_TOL: f64 = 1e-9;
const EULER_CLAMP_TOL: f64 = 1e-9;
const DEGENERATE_TOL: f64 = 1e-12;

/// Propagation directions between successive reflections.
#[derive(Debug, Clone, PartialEq)]
pub struct MirrorPath {
    segments: Vec<Vec3>,
}

impl MirrorPath {
    pub fn new(segments: Vec<Vec3>) -> Result<Self> {
        for (i, k) in segments.iter().enumerate() {
            if !((k.norm() - 1.0).abs() <= UNIT_TOL) {
                return Err(Error::InvalidPath(format!(
                    "segment {i} is not a unit vector (|k| = {})",
                    k.norm()
                )));
            }
        }
        for (i, w) in segments.windows(2).enumerate() {
            if w[0].dot(&w[1]) <= -1.0 + UNIT_TOL {
                return Err(Error::InvalidPath(format!(
                    "segments {i} and {} are antiparallel",
                    i + 1
                )));
            }
        }
        Ok(MirrorPath { segments })
    }

    pub fn segments(&self) -> &[Vec3] {
        &self.segments
    }

    /// The same loop traversed in the opposite sense.
    pub fn reversed(&self) -> MirrorPath {
        MirrorPath {
            segments: self.segments.iter().rev().map(|k| -k).collect(),
        }
    }
}

/// Helicity vectors h_j = (-1)^{n_j} k_j of a mirror path.
#[derive(Debug, Clone, PartialEq)]
pub struct HelicitySequence {
    vectors: Vec<Vec3>,
    /// Number of reflections preceding each vector, modulo 2.
    reflection_parity: Vec<u8>,
    closed: bool,
}

impl HelicitySequence {
    pub fn vectors(&self) -> &[Vec3] {
        &self.vectors
    }

    pub fn reflection_parity(&self) -> &[u8] {
        &self.reflection_parity
    }

    /// True when the last helicity vector coincided with the first and was dropped.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Arc lengths between consecutive points of the closed loop.
    pub fn side_arcs(&self) -> Vec<f64> {
        let n = self.vectors.len();
        (0..n)
            .map(|i| arc(&self.vectors[i], &self.vectors[(i + 1) % n]))
            .collect()
    }

    /// Signed solid angle enclosed by the geodesic loop, wrapped to (-pi, pi].
    ///
    /// Positive for anti-clockwise traversal. A rotation is only defined modulo
    /// 2 pi, so a loop that wraps a hemisphere reads as 0.
    pub fn enclosed_area(&self) -> f64 {
        wrap_pi(signed_loop_area(&self.vectors))
    }
}

pub fn helicity_from_path(path: &MirrorPath) -> Result<HelicitySequence> {
    let segs = path.segments();
    if segs.len() < 2 {
        return Err(Error::InvalidPath("need at least two segments".into()));
    }
    let mut vectors = Vec::with_capacity(segs.len());
    let mut reflection_parity = Vec::with_capacity(segs.len());
    for (n, k) in segs.iter().enumerate() {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        vectors.push(k * sign);
        reflection_parity.push((n % 2) as u8);
    }
    let closed = vectors.len() > 2 && (vectors[0] - vectors[vectors.len() - 1]).norm() <= DEDUP_TOL;
    if closed {
        vectors.pop();
        reflection_parity.pop();
    }
    Ok(HelicitySequence {
        vectors,
        reflection_parity,
        closed,
    })
}

fn arc(a: &Vec3, b: &Vec3) -> f64 {
    // atan2 form stays accurate for nearly parallel and nearly antiparallel pairs.
    a.cross(b).norm().atan2(a.dot(b))
}

/// Signed spherical excess of the triangle (a, b, c) from the triple product.
pub fn signed_triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let num = a.dot(&b.cross(c));
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

/// Signed area of a spherical polygon by fan decomposition from its first vertex.
pub fn signed_loop_area(points: &[Vec3]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let p0 = &points[0];
    points[1..]
        .windows(2)
        .map(|w| signed_triangle_area(p0, &w[0], &w[1]))
        .sum()
}

fn wrap_pi(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Area of a geodesic triangle with side arcs alpha, beta, gamma.
///
/// cos(Omega/2) = (1 + cos a + cos b + cos c) / (4 cos(a/2) cos(b/2) cos(c/2)).
pub fn euler_area(alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
        if !(v > 0.0 && v < PI) {
            return Err(Error::InvalidTriangle(format!(
                "{name} = {v} is outside (0, pi)"
            )));
        }
    }
    let den = 4.0 * (alpha / 2.0).cos() * (beta / 2.0).cos() * (gamma / 2.0).cos();
    if den.abs() < DEGENERATE_TOL {
        return Err(Error::DegenerateTriangle);
    }
    let rhs = (1.0 + alpha.cos() + beta.cos() + gamma.cos()) / den;
    if rhs.abs() > 1.0 + EULER_CLAMP_TOL {
        return Err(Error::InvalidTriangle(format!(
            "cos(Omega/2) = {rhs} is outside [-1, 1]"
        )));
    }
    Ok(2.0 * rhs.clamp(-1.0, 1.0).acos())
}

/// Rotation Omega = 2 acos(sin theta) of the isosceles Sagnac loop.
///
/// Symmetric about theta = pi/2, reaching pi at theta = 0 and pi.
pub fn omega_from_theta(theta: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::OutOfRange(format!(
            "theta = {theta} is outside [0, pi]"
        )));
    }
    Ok(2.0 * theta.sin().clamp(-1.0, 1.0).acos())
}

/// Unfolded alternative pi - 2 theta, monotone on [0, pi] and equal to
/// [`omega_from_theta`] on [0, pi/2].
pub fn omega_from_theta_unfolded(theta: f64) -> f64 {
    PI - 2.0 * theta
}

/// Relative rotation between the counter-propagating beams, Psi = pi - |2 Omega - pi|.
pub fn psi_from_omega(omega: f64) -> Result<f64> {
    if !(0.0..=TAU).contains(&omega) {
        return Err(Error::OutOfRange(format!(
            "omega = {omega} is outside [0, 2 pi]"
        )));
    }
    Ok(PI - (2.0 * omega - PI).abs())
}

/// Base angle giving relative rotation `psi`, on the Omega <= pi/2 branch.
///
/// Every psi < pi has a second solution psi/4; the stage list pi/4, 3pi/8,
/// 7pi/16, ... lives on theta in [pi/4, pi/2).
pub fn theta_for_psi(psi: f64) -> Result<f64> {
    if !(psi > 0.0 && psi <= PI) {
        return Err(Error::OutOfRange(format!("psi = {psi} is outside (0, pi]")));
    }
    Ok(FRAC_PI_2 - psi / 4.0)
}

/// Base angle and apex angle of the isosceles out-of-plane loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SorterAngles {
    pub theta: f64,
    pub beta: f64,
}

impl SorterAngles {
    pub fn new(theta: f64) -> Self {
        SorterAngles {
            theta,
            beta: PI - 2.0 * theta,
        }
    }
}

/// Anti-clockwise Sagnac loop for base angle `theta`.
///
/// The beam enters along +z, climbs the two congruent sides of an isosceles
/// triangle in the x-y plane and leaves along -z. The helicity triangle then
/// has side arcs (pi/2, pi - 2 theta, pi/2).
pub fn build_sagnac_path(theta: f64) -> Result<MirrorPath> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::OutOfRange(format!(
            "theta = {theta} is outside (0, pi/2)"
        )));
    }
    let (s, c) = theta.sin_cos();
    MirrorPath::new(vec![
        Vec3::new(0.0, 0.0, 1.0),
        Vec3::new(c, s, 0.0),
        Vec3::new(c, -s, 0.0),
        Vec3::new(0.0, 0.0, -1.0),
    ])
}
