use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::{BiphotonExpansion, PolarizationPair};
use crate::error::{Error, Result};
use crate::interferometer::{sagnac_transfer_in, Port, PortFrame, SagnacStage};
use crate::modes::{HGIndex, ModeExpansion};

const POLARIZATION_TOL: f64 = 1e-12;

/// Output ports of (photon 1, photon 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct BranchLabel(pub Port, pub Port);

impl BranchLabel {
    pub const ALL: [BranchLabel; 4] = [
        BranchLabel(Port::A, Port::A),
        BranchLabel(Port::A, Port::B),
        BranchLabel(Port::B, Port::A),
        BranchLabel(Port::B, Port::B),
    ];
}

impl fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0, self.1)
    }
}

impl std::str::FromStr for BranchLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let port = |c: char| match c {
            'A' => Ok(Port::A),
            'B' => Ok(Port::B),
            _ => Err(format!("unknown branch {s}")),
        };
        let mut chars = s.chars();
        match (chars.next(), chars.next(), chars.next()) {
            (Some(a), Some(b), None) => Ok(BranchLabel(port(a)?, port(b)?)),
            _ => Err(format!("unknown branch {s}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub label: BranchLabel,
    /// Unnormalized conditional state; its squared norm over the input's is `probability`.
    pub state: BiphotonExpansion,
    pub probability: f64,
}

impl Branch {
    pub fn normalized(&self) -> Result<BiphotonExpansion> {
        self.state.normalized().map_err(|_| Error::EmptyTrigger)
    }
}

#[derive(Debug, Clone)]
pub struct SortedBiphoton {
    pub branches: Vec<Branch>,
    input_norm_sqr: f64,
}

impl SortedBiphoton {
    pub fn branch(&self, label: BranchLabel) -> &Branch {
        self.branches
            .iter()
            .find(|b| b.label == label)
            .expect("all four branches present")
    }

    pub fn input_norm_sqr(&self) -> f64 {
        self.input_norm_sqr
    }
}

/// Sends each photon through its own copy of `stage`.
pub fn sort_biphoton(
    b: &BiphotonExpansion,
    stage: &SagnacStage,
    frame: PortFrame,
) -> Result<SortedBiphoton> {
    let total = b.norm_sqr();
    if !(total > 0.0) {
        return Err(Error::ZeroInput);
    }
    let g = *b.geometry();
    let mut ports: BTreeMap<HGIndex, (ModeExpansion, ModeExpansion)> = BTreeMap::new();
    for (x, y, _) in b.terms() {
        for idx in [x, y] {
            if let Entry::Vacant(slot) = ports.entry(idx) {
                let pair = sagnac_transfer_in(&ModeExpansion::hg(idx, g), stage, frame)?;
                slot.insert((pair.port_a, pair.port_b));
            }
        }
    }
    let pick = |port: Port| {
        let ports = &ports;
        move |idx: HGIndex| {
            let (a, b) = &ports[&idx];
            Ok(match port {
                Port::A => a.clone(),
                Port::B => b.clone(),
            })
        }
    };
    let mut branches = Vec::with_capacity(4);
    for label in BranchLabel::ALL {
        let state = b.map_photons(pick(label.0), pick(label.1))?.pruned(1e-15);
        let probability = state.norm_sqr() / total;
        branches.push(Branch {
            label,
            state,
            probability,
        });
    }
    Ok(SortedBiphoton {
        branches,
        input_norm_sqr: total,
    })
}

#[derive(Debug, Clone)]
pub struct Heralded {
    /// Normalized transverse state of the untriggered photon.
    pub spatial: ModeExpansion,
    /// Two-photon polarization, carried through unchanged.
    pub polarization: PolarizationPair,
    /// Probability of a trigger detection in the requested port and mode.
    pub probability: f64,
}

/// State of the photon leaving the port opposite `trigger_port`, conditioned
/// on its partner being detected in `trigger_mode`.
///
/// Either photon may be the trigger; the two contributions are added coherently.
pub fn herald(
    sorted: &SortedBiphoton,
    trigger_port: Port,
    trigger_mode: HGIndex,
) -> Result<Heralded> {
    let other = match trigger_port {
        Port::A => Port::B,
        Port::B => Port::A,
    };
    let first = sorted.branch(BranchLabel(trigger_port, other));
    let second = sorted.branch(BranchLabel(other, trigger_port));
    let g = *first.state.geometry();
    let mut from_first = ModeExpansion::new(g);
    for (x, y, c) in first.state.terms() {
        if x == trigger_mode {
            from_first.add_term(y, c)?;
        }
    }
    let mut from_second = ModeExpansion::new(g);
    for (x, y, c) in second.state.terms() {
        if y == trigger_mode {
            from_second.add_term(x, c)?;
        }
    }
    let probability = (from_first.norm_sqr() + from_second.norm_sqr()) / sorted.input_norm_sqr;
    let sum = from_first.plus(&from_second)?;
    if !(probability > 0.0) || !(sum.norm_sqr() > 0.0) {
        return Err(Error::EmptyTrigger);
    }
    Ok(Heralded {
        spatial: sum.normalized()?.pruned(1e-15),
        polarization: *first.state.polarization(),
        probability,
    })
}

const FIRST_ORDER: [HGIndex; 2] = [HGIndex::new(1, 0), HGIndex::new(0, 1)];

fn first_order_matrix(b: &BiphotonExpansion) -> Result<[[Complex64; 2]; 2]> {
    let pos = |idx: HGIndex| FIRST_ORDER.iter().position(|&f| f == idx);
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (x, y, c) in b.terms() {
        match (pos(x), pos(y)) {
            (Some(i), Some(j)) => m[i][j] = c,
            _ if c == Complex64::new(0.0, 0.0) => {}
            _ => {
                return Err(Error::UnsupportedTerms(format!(
                    "{x} {y} is outside the first-order block"
                )))
            }
        }
    }
    Ok(m)
}

/// Singular values of the first-order coefficient block, largest first, unit sum of squares.
pub fn schmidt_coefficients(b: &BiphotonExpansion) -> Result<[f64; 2]> {
    let m = first_order_matrix(b)?;
    let frob: f64 = m.iter().flatten().map(|z| z.norm_sqr()).sum();
    if !(frob > 0.0) {
        return Err(Error::ZeroInput);
    }
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).norm() / frob;
    // s1^2 + s2^2 = 1 and s1 s2 = |det|, so s1 +/- s2 = sqrt(1 +/- 2|det|).
    let sum = (1.0 + 2.0 * det).sqrt();
    let diff = (1.0 - 2.0 * det).max(0.0).sqrt();
    Ok([(sum + diff) / 2.0, (sum - diff) / 2.0])
}

#[derive(Debug, Clone)]
pub struct PbsReport {
    /// Spatial state with photon 1 in the H path and photon 2 in the V path.
    pub path_state: BiphotonExpansion,
    /// Probability that the two photons leave in different paths.
    pub success_probability: f64,
    pub input_schmidt: Option<[f64; 2]>,
    pub path_schmidt: Option<[f64; 2]>,
    /// The spatial coefficient matrix is unchanged up to normalization.
    pub spatial_unchanged: bool,
    /// Different-output probability if a 50:50 beam splitter replaces the PBS.
    pub beam_splitter_probability: f64,
}

const BEAM_SPLITTER_REFLECTIVITY: f64 = 0.5;

/// Separates the photons of an (HV + VH) pair by polarization.
pub fn pbs_split_bell(b: &BiphotonExpansion) -> Result<PbsReport> {
    let p = b.polarization();
    let n = p.norm_sqr().sqrt();
    if !(n > 0.0)
        || p.hh.norm() > POLARIZATION_TOL * n
        || p.vv.norm() > POLARIZATION_TOL * n
        || (p.hv - p.vh).norm() > POLARIZATION_TOL * n
    {
        return Err(Error::UnsupportedPolarization(
            "expected the symmetric (HV + VH) polarization state".into(),
        ));
    }
    let mut path = BiphotonExpansion::new(*b.geometry(), PolarizationPair::product_hv())?;
    for (x, y, c) in b.terms() {
        path.insert(x, y, p.hv * c);
        path.insert(y, x, p.vh * c);
    }
    let path = path.pruned(0.0).normalized()?;
    let input = b.normalized()?;
    let aligned = {
        let ov: Complex64 = input
            .terms()
            .map(|(x, y, c)| path.coefficient(x, y).conj() * c)
            .sum();
        let phase = if ov.norm() > 0.0 {
            ov / ov.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        path.scaled(phase)
    };
    let r = BEAM_SPLITTER_REFLECTIVITY;
    Ok(PbsReport {
        spatial_unchanged: aligned.max_abs_diff(&input) < 1e-12,
        input_schmidt: schmidt_coefficients(&input).ok(),
        path_schmidt: schmidt_coefficients(&path).ok(),
        path_state: path,
        success_probability: 1.0,
        beam_splitter_probability: 2.0 * r * (1.0 - r),
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    use nalgebra::Matrix2;

    use super::*;
    use crate::modes::{lg_to_hg, BeamGeometry, LGIndex};
    use crate::quantum::{
        compressor_apply_biphoton, fiber_filter_biphoton, spdc_hg00, spdc_hg45, CompressorSpec,
    };

    fn h(n: u32, m: u32) -> HGIndex {
        HGIndex::new(n, m)
    }

    fn parity_stage() -> SagnacStage {
        SagnacStage::new(FRAC_PI_4, 0.0).unwrap()
    }

    fn block(values: [[f64; 2]; 2]) -> BiphotonExpansion {
        let mut b =
            BiphotonExpansion::new(BeamGeometry::default(), PolarizationPair::psi_plus()).unwrap();
        for (i, x) in FIRST_ORDER.iter().enumerate() {
            for (j, y) in FIRST_ORDER.iter().enumerate() {
                if values[i][j] != 0.0 {
                    b.insert(*x, *y, Complex64::new(values[i][j], 0.0));
                }
            }
        }
        b
    }

    #[test]
    fn bell_branch() {
        let f = fiber_filter_biphoton(&spdc_hg00()).unwrap();
        let s = sort_biphoton(&f.state, &parity_stage(), PortFrame::Exit).unwrap();
        let total: f64 = s.branches.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let bb = s.branch(BranchLabel(Port::B, Port::B));
        let (c0, c1) = (0.08f64, 0.04f64);
        assert!((bb.probability - 2.0 * c1 * c1 / (c0 * c0 + 2.0 * c1 * c1)).abs() < 1e-12);
        let st = bb.normalized().unwrap();
        assert!((st.coefficient(h(1, 0), h(1, 0)).norm() - FRAC_1_SQRT_2).abs() < 1e-12);
        let [a, b] = schmidt_coefficients(&st).unwrap();
        assert!((a - FRAC_1_SQRT_2).abs() < 1e-12 && (b - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn hg45_branches() {
        let s = sort_biphoton(&spdc_hg45(), &parity_stage(), PortFrame::Exit).unwrap();
        let ab = s.branch(BranchLabel(Port::A, Port::B));
        assert!((ab.probability - 0.5).abs() < 1e-12);
        assert!(s.branch(BranchLabel(Port::A, Port::A)).probability < 1e-20);
        let st = ab.normalized().unwrap();
        assert!(
            (st.coefficient(h(0, 0), h(1, 0)) - st.coefficient(h(0, 0), h(0, 1))).norm() < 1e-15
        );
    }

    #[test]
    fn herald_hg45_and_lg() {
        let g = BeamGeometry::default();
        let s = sort_biphoton(&spdc_hg45(), &parity_stage(), PortFrame::Exit).unwrap();
        let hd = herald(&s, Port::A, h(0, 0)).unwrap();
        assert!((hd.spatial.overlap(&ModeExpansion::hg45(g)) - 1.0).abs() < 1e-12);
        assert!((hd.probability - 1.0).abs() < 1e-12);

        let comp =
            CompressorSpec::new(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2).unwrap();
        let pumped = compressor_apply_biphoton(&spdc_hg45(), &comp).unwrap();
        let s = sort_biphoton(&pumped, &parity_stage(), PortFrame::Lab).unwrap();
        let hd = herald(&s, Port::A, h(0, 0)).unwrap();
        let lg = lg_to_hg(LGIndex::new(0, 1), g).unwrap();
        assert!((hd.spatial.overlap(&lg) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn herald_on_empty_branch() {
        let s = sort_biphoton(&spdc_hg45(), &parity_stage(), PortFrame::Exit).unwrap();
        assert!(matches!(
            herald(&s, Port::B, h(0, 0)),
            Err(Error::EmptyTrigger)
        ));
        assert!(matches!(
            herald(&s, Port::A, h(1, 1)),
            Err(Error::EmptyTrigger)
        ));
    }

    #[test]
    fn schmidt_examples() {
        assert_eq!(
            schmidt_coefficients(&block([[1.0, 0.0], [0.0, 0.0]])).unwrap(),
            [1.0, 0.0]
        );
        let [a, b] = schmidt_coefficients(&block([[0.9, 0.0], [0.0, 0.19f64.sqrt()]])).unwrap();
        assert!((a - 0.9).abs() < 1e-12 && (b - 0.19f64.sqrt()).abs() < 1e-12);
        assert!(matches!(
            schmidt_coefficients(&spdc_hg00()),
            Err(Error::UnsupportedTerms(_))
        ));
    }

    #[test]
    fn schmidt_matches_svd() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..200 {
            let z: Vec<Complex64> = (0..4)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let mut b =
                BiphotonExpansion::new(BeamGeometry::default(), PolarizationPair::psi_plus())
                    .unwrap();
            b.insert(h(1, 0), h(1, 0), z[0]);
            b.insert(h(1, 0), h(0, 1), z[1]);
            b.insert(h(0, 1), h(1, 0), z[2]);
            b.insert(h(0, 1), h(0, 1), z[3]);
            let m = Matrix2::new(z[0], z[1], z[2], z[3]);
            let sv = m.singular_values();
            let n = (sv[0] * sv[0] + sv[1] * sv[1]).sqrt();
            let (hi, lo) = (sv[0].max(sv[1]) / n, sv[0].min(sv[1]) / n);
            let got = schmidt_coefficients(&b).unwrap();
            assert!((got[0] - hi).abs() < 1e-9 && (got[1] - lo).abs() < 1e-9);
        }
    }

    #[test]
    fn pbs_keeps_spatial_entanglement() {
        let f = fiber_filter_biphoton(&spdc_hg00()).unwrap();
        let s = sort_biphoton(&f.state, &parity_stage(), PortFrame::Exit).unwrap();
        let bell = s
            .branch(BranchLabel(Port::B, Port::B))
            .normalized()
            .unwrap();
        let r = pbs_split_bell(&bell).unwrap();
        assert_eq!(r.success_probability, 1.0);
        assert!(r.spatial_unchanged);
        let [a, b] = r.path_schmidt.unwrap();
        assert!((a - FRAC_1_SQRT_2).abs() < 1e-12 && (b - FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(r.beam_splitter_probability, 0.5);

        let mut product =
            BiphotonExpansion::new(BeamGeometry::default(), PolarizationPair::product_hv())
                .unwrap();
        product.insert(h(1, 0), h(1, 0), Complex64::new(1.0, 0.0));
        assert!(matches!(
            pbs_split_bell(&product),
            Err(Error::UnsupportedPolarization(_))
        ));
    }

    #[test]
    fn branch_labels_parse() {
        assert_eq!(
            "BA".parse::<BranchLabel>().unwrap(),
            BranchLabel(Port::B, Port::A)
        );
        assert!("AC".parse::<BranchLabel>().is_err());
        assert!("ABA".parse::<BranchLabel>().is_err());
        assert_eq!(BranchLabel(Port::A, Port::B).to_string(), "AB");
    }
}
