use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{sagnac_transfer_in, PortFrame, SagnacStage};
use crate::error::{Error, Result};
use crate::modes::{oam_phase, LGIndex, ModeExpansion};

pub const MAX_CASCADE_DEPTH: u32 = 5;

/// Branches carrying less power than this are not followed further.
const NEGLIGIBLE_POWER: f64 = 1e-16;

/// Binary sorting tree. A node at level j holds OAM values with l = residue
/// (mod 2^(j-1)) and splits them by the next binary digit.
#[derive(Debug, Clone, PartialEq)]
pub enum CascadeNode {
    Stage {
        stage: SagnacStage,
        residue: u32,
        modulus: u32,
        port_a: Box<CascadeNode>,
        port_b: Box<CascadeNode>,
    },
    Leaf {
        residue: u32,
        modulus: u32,
    },
}

impl CascadeNode {
    pub fn depth(&self) -> u32 {
        match self {
            CascadeNode::Leaf { .. } => 0,
            CascadeNode::Stage { port_a, port_b, .. } => 1 + port_a.depth().max(port_b.depth()),
        }
    }

    /// Leaves in depth-first order, port A before port B.
    pub fn leaves(&self) -> Vec<(u32, u32)> {
        match self {
            CascadeNode::Leaf { residue, modulus } => vec![(*residue, *modulus)],
            CascadeNode::Stage { port_a, port_b, .. } => {
                let mut v = port_a.leaves();
                v.extend(port_b.leaves());
                v
            }
        }
    }

    pub fn stages(&self) -> Vec<(u32, u32, SagnacStage)> {
        match self {
            CascadeNode::Leaf { .. } => Vec::new(),
            CascadeNode::Stage {
                stage,
                residue,
                modulus,
                port_a,
                port_b,
            } => {
                let mut v = vec![(*residue, *modulus, *stage)];
                v.extend(port_a.stages());
                v.extend(port_b.stages());
                v
            }
        }
    }
}

/// Tree of `depth` levels whose leaves partition l mod 2^depth.
///
/// Level j uses Psi = pi / 2^(j-1); on the branch holding residue r the phase
/// phi = -r Psi makes l = r (mod 2^j) leave through port A.
pub fn cascade_build(depth: u32) -> Result<CascadeNode> {
    if !(1..=MAX_CASCADE_DEPTH).contains(&depth) {
        return Err(Error::OutOfRange(format!(
            "cascade depth {depth} is outside 1..={MAX_CASCADE_DEPTH}"
        )));
    }
    build_level(1, depth, 0)
}

fn build_level(level: u32, depth: u32, residue: u32) -> Result<CascadeNode> {
    let modulus = 1u32 << (level - 1);
    if level > depth {
        return Ok(CascadeNode::Leaf { residue, modulus });
    }
    let psi = PI / f64::from(modulus);
    let phi = wrap_phase(-f64::from(residue) * psi);
    Ok(CascadeNode::Stage {
        stage: SagnacStage::for_psi(psi, phi)?,
        residue,
        modulus,
        port_a: Box::new(build_level(level + 1, depth, residue)?),
        port_b: Box::new(build_level(level + 1, depth, residue + modulus)?),
    })
}

fn wrap_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

#[derive(Debug, Clone)]
pub enum CascadeInput {
    Expansion(ModeExpansion),
    Lg(LGIndex),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafPower {
    pub residue: u32,
    pub modulus: u32,
    pub power: f64,
}

impl LeafPower {
    pub fn label(&self) -> String {
        format!("{} mod {}", self.residue, self.modulus)
    }
}

/// Power fraction reaching each leaf, in [`CascadeNode::leaves`] order.
pub fn cascade_route(node: &CascadeNode, input: &CascadeInput) -> Result<Vec<LeafPower>> {
    let mut out = Vec::new();
    match input {
        CascadeInput::Lg(idx) => route_lg(node, *idx, 1.0, &mut out),
        CascadeInput::Expansion(e) => {
            let total = e.norm_sqr();
            if !(total > 0.0) {
                return Err(Error::ZeroInput);
            }
            route_expansion(node, e, total, &mut out)?;
        }
    }
    Ok(out)
}

/// Routes many inputs through the same tree in parallel.
pub fn cascade_route_many(
    node: &CascadeNode,
    inputs: &[CascadeInput],
) -> Result<Vec<Vec<LeafPower>>> {
    inputs.par_iter().map(|i| cascade_route(node, i)).collect()
}

// An LG mode is a rotation eigenstate, so it stays itself through every port
// and only its power splits: |1 +/- e^{i phi} eig(R(-2 Omega))|^2 / 4.
fn route_lg(node: &CascadeNode, idx: LGIndex, power: f64, out: &mut Vec<LeafPower>) {
    match node {
        CascadeNode::Leaf { residue, modulus } => out.push(LeafPower {
            residue: *residue,
            modulus: *modulus,
            power,
        }),
        CascadeNode::Stage {
            stage,
            port_a,
            port_b,
            ..
        } => {
            let z = Complex64::from_polar(1.0, stage.phi()) * oam_phase(idx, -2.0 * stage.omega());
            let one = Complex64::new(1.0, 0.0);
            let pa = (one + z).norm_sqr() / 4.0;
            let pb = (one - z).norm_sqr() / 4.0;
            route_lg(port_a, idx, power * pa, out);
            route_lg(port_b, idx, power * pb, out);
        }
    }
}

fn route_expansion(
    node: &CascadeNode,
    e: &ModeExpansion,
    total: f64,
    out: &mut Vec<LeafPower>,
) -> Result<()> {
    match node {
        CascadeNode::Leaf { residue, modulus } => out.push(LeafPower {
            residue: *residue,
            modulus: *modulus,
            power: e.norm_sqr() / total,
        }),
        CascadeNode::Stage {
            stage,
            port_a,
            port_b,
            ..
        } => {
            if e.norm_sqr() / total < NEGLIGIBLE_POWER {
                let zero = e.filtered(|_| false);
                route_expansion(port_a, &zero, total, out)?;
                return route_expansion(port_b, &zero, total, out);
            }
            // Powers do not depend on the output frame, and Exit avoids an extra rotation.
            let pair = sagnac_transfer_in(e, stage, PortFrame::Exit)?;
            route_expansion(port_a, &pair.port_a, total, out)?;
            route_expansion(port_b, &pair.port_b, total, out)?;
        }
    }
    Ok(())
}
