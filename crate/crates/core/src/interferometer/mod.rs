//! Two-port Sagnac sorters, cascaded OAM sorting and the polarization devices
//! that make them lossless.

mod cascade;
mod network;
mod polarization;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{omega_from_theta, psi_from_omega, theta_for_psi};
use crate::modes::{rotate_expansion, ModeExpansion};

pub use cascade::{
    cascade_build, cascade_route, cascade_route_many, CascadeInput, CascadeNode, LeafPower,
    MAX_CASCADE_DEPTH,
};
pub use network::{parse_network, route_network, Network, NetworkNode, Port};
pub use polarization::{
    faraday_isolator, phase_device, phase_device_matrix, Direction, IsolatorOutcome,
    IsolatorOutput, JonesMatrix, JonesVector, Pbs, PolarizationElement,
};

/// One out-of-plane Sagnac loop with an optional direction-dependent phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SagnacStage {
    theta: f64,
    phi: f64,
    omega: f64,
    psi: f64,
}

impl SagnacStage {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::OutOfRange(format!("phi must be finite, got {phi}")));
        }
        let omega = omega_from_theta(theta)?;
        let psi = psi_from_omega(omega)?;
        Ok(SagnacStage {
            theta,
            phi,
            omega,
            psi,
        })
    }

    /// Stage on the theta in [pi/4, pi/2) branch giving relative rotation `psi`.
    pub fn for_psi(psi: f64, phi: f64) -> Result<Self> {
        Self::new(theta_for_psi(psi)?, phi)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }
}

/// Reference frame in which the two output ports are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PortFrame {
    /// Physical outputs, including the rotation R(+Omega) common to both ports.
    #[default]
    Lab,
    /// Outputs with the common rotation removed, so the loop acts as a pure projector.
    Exit,
}

#[derive(Debug, Clone)]
pub struct PortPair {
    pub port_a: ModeExpansion,
    pub port_b: ModeExpansion,
    input_norm_sqr: f64,
}

impl PortPair {
    pub fn new(port_a: ModeExpansion, port_b: ModeExpansion, input_norm_sqr: f64) -> Self {
        PortPair {
            port_a,
            port_b,
            input_norm_sqr,
        }
    }

    pub fn input_norm_sqr(&self) -> f64 {
        self.input_norm_sqr
    }
}

/// port_a = 1/2 (R(+Omega) + e^{i phi} R(-Omega)) input, port_b with the minus sign.
pub fn sagnac_transfer(input: &ModeExpansion, stage: &SagnacStage) -> Result<PortPair> {
    sagnac_transfer_in(input, stage, PortFrame::Lab)
}

pub fn sagnac_transfer_in(
    input: &ModeExpansion,
    stage: &SagnacStage,
    frame: PortFrame,
) -> Result<PortPair> {
    for (_, c) in input.terms() {
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::OutOfRange(
                "input has non-finite coefficients".into(),
            ));
        }
    }
    // R(+W) (1 +/- e^{i phi} R(-2W)) / 2: a single relative rotation, exact whenever 2W = pi.
    let back = rotate_expansion(input, -2.0 * stage.omega)?;
    let e = Complex64::from_polar(0.5, stage.phi);
    let half = Complex64::new(0.5, 0.0);
    let a = input.scaled(half).plus(&back.scaled(e))?;
    let b = input.scaled(half).plus(&back.scaled(-e))?;
    let (a, b) = match frame {
        PortFrame::Exit => (a, b),
        PortFrame::Lab => (
            rotate_expansion(&a, stage.omega)?,
            rotate_expansion(&b, stage.omega)?,
        ),
    };
    Ok(PortPair::new(
        a.pruned(PORT_PRUNE),
        b.pruned(PORT_PRUNE),
        input.norm_sqr(),
    ))
}

const PORT_PRUNE: f64 = 1e-15;

/// Fractions of the input power leaving ports A and B.
pub fn port_powers(pair: &PortPair) -> Result<(f64, f64)> {
    let total = pair.input_norm_sqr;
    if !(total > 0.0) {
        return Err(Error::ZeroInput);
    }
    Ok((
        pair.port_a.norm_sqr() / total,
        pair.port_b.norm_sqr() / total,
    ))
}

/// Ideal Mach-Zehnder sorter with a mirror reflection in one arm: even n to A.
pub fn mz_1d_sort(input: &ModeExpansion) -> PortPair {
    PortPair::new(
        input.filtered(|idx| idx.n % 2 == 0),
        input.filtered(|idx| idx.n % 2 == 1),
        input.norm_sqr(),
    )
}
