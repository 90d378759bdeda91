use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use super::BiphotonExpansion;
use crate::error::{Error, Result};
use crate::modes::{BeamGeometry, HGIndex, LGIndex, ModeExpansion};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;
const MAX_INDEX_CONTRAST: f64 = 0.05;

/// Mode group g = 2p + |l| + 1 of a parabolic-index core is guided when V > 2g,
/// so exactly the g = 1 and g = 2 groups survive for 4 < V < 6.
const THREE_MODE_V: (f64, f64) = (4.0, 6.0);

/// Weakly guiding parabolic-index fiber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberSpec {
    core_radius: f64,
    v_number: f64,
    index_contrast: f64,
    n0: f64,
    pump_frequency: f64,
}

impl FiberSpec {
    /// V = (omega_p n0 / c) a sqrt(2 delta).
    pub fn new(
        core_radius: f64,
        index_contrast: f64,
        n0: f64,
        pump_frequency: f64,
    ) -> Result<Self> {
        validate(core_radius, index_contrast, n0)?;
        if !(pump_frequency > 0.0 && pump_frequency.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "pump frequency {pump_frequency} must be positive"
            )));
        }
        let v_number =
            pump_frequency * n0 / SPEED_OF_LIGHT * core_radius * (2.0 * index_contrast).sqrt();
        Ok(FiberSpec {
            core_radius,
            v_number,
            index_contrast,
            n0,
            pump_frequency,
        })
    }

    /// Fiber with a prescribed V; the pump frequency is inferred.
    pub fn from_v(core_radius: f64, v_number: f64, index_contrast: f64, n0: f64) -> Result<Self> {
        validate(core_radius, index_contrast, n0)?;
        if !(v_number > 0.0 && v_number.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "V = {v_number} must be positive"
            )));
        }
        let pump_frequency =
            v_number * SPEED_OF_LIGHT / (n0 * core_radius * (2.0 * index_contrast).sqrt());
        Ok(FiberSpec {
            core_radius,
            v_number,
            index_contrast,
            n0,
            pump_frequency,
        })
    }

    /// A few-micron fiber in the middle of the three-mode window.
    pub fn three_mode_example() -> Self {
        FiberSpec::from_v(4.0e-6, 5.0, 0.005, 1.46).expect("valid example fiber")
    }

    pub fn core_radius(&self) -> f64 {
        self.core_radius
    }

    pub fn v_number(&self) -> f64 {
        self.v_number
    }

    pub fn index_contrast(&self) -> f64 {
        self.index_contrast
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn pump_frequency(&self) -> f64 {
        self.pump_frequency
    }

    /// Gaussian waist matched to the fundamental mode, a sqrt(2/V).
    pub fn matched_waist(&self) -> f64 {
        self.core_radius * (2.0 / self.v_number).sqrt()
    }
}

fn validate(core_radius: f64, index_contrast: f64, n0: f64) -> Result<()> {
    if !(core_radius > 0.0 && core_radius.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "core radius {core_radius} must be positive"
        )));
    }
    if !(index_contrast > 0.0 && index_contrast < MAX_INDEX_CONTRAST) {
        return Err(Error::OutOfRange(format!(
            "index contrast {index_contrast} is outside (0, {MAX_INDEX_CONTRAST})"
        )));
    }
    if !(n0 >= 1.0 && n0.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "core index {n0} must be at least 1"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuidedModes {
    pub modes: Vec<LGIndex>,
    pub matched_waist: f64,
}

pub fn guided_modes(fiber: &FiberSpec) -> Result<GuidedModes> {
    let v = fiber.v_number();
    let (lo, hi) = THREE_MODE_V;
    if !(v > lo && v < hi) {
        return Err(Error::FiberRegime(format!(
            "V = {v} is outside ({lo}, {hi})"
        )));
    }
    Ok(GuidedModes {
        modes: vec![LGIndex::new(0, 0), LGIndex::new(0, 1), LGIndex::new(0, -1)],
        matched_waist: fiber.matched_waist(),
    })
}

fn guided(idx: HGIndex) -> bool {
    idx.order() <= 1
}

#[derive(Debug, Clone)]
pub struct FilteredSingle {
    pub expansion: ModeExpansion,
    /// Fraction of the input power carried by the guided modes.
    pub transmitted_fraction: f64,
}

impl FilteredSingle {
    pub fn is_zero(&self) -> bool {
        self.expansion.is_empty()
    }

    pub fn renormalized(&self) -> Result<ModeExpansion> {
        self.expansion.normalized()
    }
}

/// Projection onto span{HG00, HG10, HG01}; amplitudes are kept as they are.
pub fn fiber_filter_single(e: &ModeExpansion) -> FilteredSingle {
    let total = e.norm_sqr();
    let expansion = e.filtered(guided);
    let transmitted_fraction = if total > 0.0 {
        expansion.norm_sqr() / total
    } else {
        0.0
    };
    FilteredSingle {
        expansion,
        transmitted_fraction,
    }
}

#[derive(Debug, Clone)]
pub struct FilteredBiphoton {
    /// Renormalized surviving state.
    pub state: BiphotonExpansion,
    /// Probability that both photons are guided.
    pub probability: f64,
}

pub fn fiber_filter_biphoton(b: &BiphotonExpansion) -> Result<FilteredBiphoton> {
    let total = b.norm_sqr();
    let kept = b.filtered(|x, y| guided(x) && guided(y));
    let kept_power = kept.norm_sqr();
    if !(kept_power > 0.0) {
        return Err(Error::StateRejected);
    }
    Ok(FilteredBiphoton {
        state: kept.normalized()?,
        probability: kept_power / total,
    })
}

/// Power fraction in HG00 of the fiber-output demonstration beam.
pub const FIBER_DEMO_FRACTION: f64 = 0.85;

/// sqrt(0.85) HG00 + sqrt(0.15) HG45: the fundamental plus a first-order admixture.
pub fn fiber_demo_state(geometry: BeamGeometry) -> ModeExpansion {
    let a = FIBER_DEMO_FRACTION.sqrt();
    let b = (1.0 - FIBER_DEMO_FRACTION).sqrt() / SQRT_2;
    ModeExpansion::from_terms(
        geometry,
        [
            (HGIndex::new(0, 0), Complex64::new(a, 0.0)),
            (HGIndex::new(1, 0), Complex64::new(b, 0.0)),
            (HGIndex::new(0, 1), Complex64::new(b, 0.0)),
        ],
    )
    .expect("low-order terms")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{spdc_hg00, spdc_hg45};

    #[test]
    fn three_mode_window() {
        let f = FiberSpec::three_mode_example();
        let g = guided_modes(&f).unwrap();
        assert_eq!(g.modes.len(), 3);
        assert!((g.matched_waist - 4.0e-6 * (0.4f64).sqrt()).abs() < 1e-18);
        assert!(matches!(
            guided_modes(&FiberSpec::from_v(4e-6, 7.0, 0.005, 1.46).unwrap()),
            Err(Error::FiberRegime(_))
        ));
        assert!(guided_modes(&FiberSpec::from_v(4e-6, 3.0, 0.005, 1.46).unwrap()).is_err());
        assert!(FiberSpec::from_v(4e-6, 5.0, 0.2, 1.46).is_err());
    }

    #[test]
    fn v_from_pump_frequency() {
        let f = FiberSpec::three_mode_example();
        let again = FiberSpec::new(
            f.core_radius(),
            f.index_contrast(),
            f.n0(),
            f.pump_frequency(),
        )
        .unwrap();
        assert!((again.v_number() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn single_filter() {
        let only_high = ModeExpansion::hg(HGIndex::new(2, 0), BeamGeometry::default());
        let f = fiber_filter_single(&only_high);
        assert!(f.is_zero());
        assert_eq!(f.transmitted_fraction, 0.0);
        assert!(f.renormalized().is_err());

        let g = BeamGeometry::default();
        let mut e = fiber_demo_state(g);
        e.add_term(HGIndex::new(1, 1), Complex64::new(0.3, 0.1))
            .unwrap();
        let f = fiber_filter_single(&e);
        assert_eq!(f.expansion, fiber_demo_state(g));
        assert!((f.transmitted_fraction - 1.0 / 1.1).abs() < 1e-12);
    }

    #[test]
    fn biphoton_filter() {
        let f = fiber_filter_biphoton(&spdc_hg00()).unwrap();
        let (c0, c1, c2) = (0.08f64, 0.04f64, -0.03f64);
        let keep = c0 * c0 + 2.0 * c1 * c1;
        assert!((f.probability - keep / (keep + 4.0 * c2 * c2)).abs() < 1e-12);
        assert_eq!(f.state.len(), 3);
        assert!((f.state.norm_sqr() - 1.0).abs() < 1e-12);

        let f = fiber_filter_biphoton(&spdc_hg45()).unwrap();
        assert!((f.probability - 1.0).abs() < 1e-15);
        assert!(f.state.max_abs_diff(&spdc_hg45().normalized().unwrap()) < 1e-15);

        let high = spdc_hg00().filtered(|a, b| a.order() == 2 || b.order() == 2);
        assert!(matches!(
            fiber_filter_biphoton(&high),
            Err(Error::StateRejected)
        ));
    }
}
