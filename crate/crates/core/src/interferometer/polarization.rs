use std::f64::consts::FRAC_PI_4;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type JonesMatrix = Matrix2<Complex64>;

const VERTICAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector {
    pub h: Complex64,
    pub v: Complex64,
}

impl JonesVector {
    pub fn new(h: Complex64, v: Complex64) -> Self {
        JonesVector { h, v }
    }

    pub fn real(h: f64, v: f64) -> Self {
        JonesVector::new(Complex64::new(h, 0.0), Complex64::new(v, 0.0))
    }

    pub fn horizontal() -> Self {
        JonesVector::real(1.0, 0.0)
    }

    pub fn vertical() -> Self {
        JonesVector::real(0.0, 1.0)
    }

    /// Linear polarization at `angle` from horizontal.
    pub fn linear(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        JonesVector::real(c, s)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.h.norm_sqr() + self.v.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        [self.h, self.v]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// <self|other>
    pub fn inner(&self, other: &JonesVector) -> Complex64 {
        self.h.conj() * other.h + self.v.conj() * other.v
    }

    pub fn apply(&self, m: &JonesMatrix) -> JonesVector {
        let r = m * Vector2::new(self.h, self.v);
        JonesVector::new(r[0], r[1])
    }

    pub fn scaled(&self, z: Complex64) -> JonesVector {
        JonesVector::new(self.h * z, self.v * z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

/// Matrices are written in one fixed lab (h, v) frame for both directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolarizationElement {
    /// Faraday glass: the lab-frame rotation is set by the field alone, so
    /// relative to the beam the sense flips when the beam reverses.
    FaradayRotator { angle: f64, field_sign: f64 },
    /// Linear retarder with phases on its fast and slow axes.
    Waveplate {
        retardance_fast: f64,
        retardance_slow: f64,
        axis_angle: f64,
    },
    /// Transmits linear polarization along `axis_angle`, reflects the orthogonal one.
    Pbs { axis_angle: f64 },
}

impl PolarizationElement {
    pub fn matrix(&self, _direction: Direction) -> JonesMatrix {
        match *self {
            PolarizationElement::FaradayRotator { angle, field_sign } => {
                rotation(field_sign * angle)
            }
            PolarizationElement::Waveplate {
                retardance_fast,
                retardance_slow,
                axis_angle,
            } => {
                let d = Matrix2::new(
                    Complex64::from_polar(1.0, retardance_fast),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::from_polar(1.0, retardance_slow),
                );
                rotation(axis_angle) * d * rotation(-axis_angle)
            }
            PolarizationElement::Pbs { axis_angle } => projector(axis_angle),
        }
    }

    /// Faraday rotation sense as seen by a beam travelling in `direction`.
    pub fn beam_frame_rotation(&self, direction: Direction) -> Option<f64> {
        match *self {
            PolarizationElement::FaradayRotator { angle, field_sign } => {
                Some(field_sign * angle * direction.sign())
            }
            _ => None,
        }
    }
}

fn rotation(a: f64) -> JonesMatrix {
    let (s, c) = a.sin_cos();
    Matrix2::new(c, -s, s, c).map(|x| Complex64::new(x, 0.0))
}

fn projector(a: f64) -> JonesMatrix {
    let (s, c) = a.sin_cos();
    Matrix2::new(c * c, c * s, c * s, s * s).map(|x| Complex64::new(x, 0.0))
}

/// Faraday glass, waveplate, Faraday glass: returns a vertical photon to
/// vertical with phase retardance_fast forwards and retardance_slow backwards.
pub fn phase_device(
    pol: &JonesVector,
    direction: Direction,
    retardance_fast: f64,
    retardance_slow: f64,
) -> Result<(JonesVector, f64)> {
    let norm = pol.norm_sqr().sqrt();
    if !pol.is_finite() || norm == 0.0 || pol.h.norm() > VERTICAL_TOL * norm {
        return Err(Error::NonVerticalInput);
    }
    let m = phase_device_matrix(direction, retardance_fast, retardance_slow);
    let out = pol.apply(&m);
    let phase = (out.v / pol.v).arg();
    Ok((out, phase))
}

/// Lab-frame matrix of the whole device for one pass.
pub fn phase_device_matrix(
    direction: Direction,
    retardance_fast: f64,
    retardance_slow: f64,
) -> JonesMatrix {
    let entry = PolarizationElement::FaradayRotator {
        angle: FRAC_PI_4,
        field_sign: 1.0,
    };
    let exit = PolarizationElement::FaradayRotator {
        angle: FRAC_PI_4,
        field_sign: -1.0,
    };
    let plate = PolarizationElement::Waveplate {
        retardance_fast,
        retardance_slow,
        axis_angle: 3.0 * FRAC_PI_4,
    };
    let chain = match direction {
        Direction::Forward => [entry, plate, exit],
        Direction::Backward => [exit, plate, entry],
    };
    chain.iter().fold(JonesMatrix::identity(), |acc, el| {
        el.matrix(direction) * acc
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pbs {
    Pbs1,
    Pbs2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IsolatorOutcome {
    Transmitted(JonesVector),
    DeflectedAt(Pbs, JonesVector),
    /// Power leaves through more than one exit.
    Split,
}

/// Amplitudes at the three exits of the isolator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsolatorOutput {
    pub transmitted: JonesVector,
    pub deflected_pbs1: JonesVector,
    pub deflected_pbs2: JonesVector,
}

impl IsolatorOutput {
    /// The single exit carrying all but `tol` of the power, if any.
    pub fn outcome(&self, tol: f64) -> IsolatorOutcome {
        let total = self.transmitted.norm_sqr()
            + self.deflected_pbs1.norm_sqr()
            + self.deflected_pbs2.norm_sqr();
        let exits = [
            IsolatorOutcome::Transmitted(self.transmitted),
            IsolatorOutcome::DeflectedAt(Pbs::Pbs1, self.deflected_pbs1),
            IsolatorOutcome::DeflectedAt(Pbs::Pbs2, self.deflected_pbs2),
        ];
        let powers = [
            self.transmitted.norm_sqr(),
            self.deflected_pbs1.norm_sqr(),
            self.deflected_pbs2.norm_sqr(),
        ];
        for (o, p) in exits.into_iter().zip(powers) {
            if total > 0.0 && p >= (1.0 - tol) * total {
                return o;
            }
        }
        IsolatorOutcome::Split
    }
}

const PBS1_AXIS: f64 = FRAC_PI_4;
const PBS2_AXIS: f64 = 2.0 * FRAC_PI_4;

/// PBS1 (passes +45 deg), Faraday glass (+45 deg), PBS2 (passes vertical).
pub fn faraday_isolator(pol: &JonesVector, direction: Direction) -> IsolatorOutput {
    let glass = PolarizationElement::FaradayRotator {
        angle: FRAC_PI_4,
        field_sign: 1.0,
    };
    let pbs1 = projector(PBS1_AXIS);
    let pbs2 = projector(PBS2_AXIS);
    let id = JonesMatrix::identity();
    let g = glass.matrix(direction);
    match direction {
        Direction::Forward => {
            let through1 = pol.apply(&pbs1);
            let rotated = through1.apply(&g);
            IsolatorOutput {
                deflected_pbs1: pol.apply(&(id - pbs1)),
                deflected_pbs2: rotated.apply(&(id - pbs2)),
                transmitted: rotated.apply(&pbs2),
            }
        }
        Direction::Backward => {
            let through2 = pol.apply(&pbs2);
            let rotated = through2.apply(&g);
            IsolatorOutput {
                deflected_pbs2: pol.apply(&(id - pbs2)),
                deflected_pbs1: rotated.apply(&(id - pbs1)),
                transmitted: rotated.apply(&pbs1),
            }
        }
    }
}
