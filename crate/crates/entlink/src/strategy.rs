//! Measurement scheduling: the probability table over the nine basis
//! combinations, the processing rate summed over the five key-generating
//! cells, the asymmetric and symmetric strategies, and the region map
//! comparing them over the (eta, F) plane.
//!
//! Alice draws from {B_A1, B_A2, B_A3} and Bob from {B_B1, B_B2, B_B3}.
//! The four combinations with both indices in {1, 2} are reserved for the
//! CHSH estimate and each occurs with probability eta; the remaining five
//! combinations generate key.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::keyrate::{devetak_winter_rate, optimal_rate_werner};
use crate::quantum::{werner_from_fidelity, DensityOperator4, MeasurementBasis, Subsystem};

/// The computational basis used by Alice for the CHSH estimate (Z).
pub fn basis_a1() -> MeasurementBasis {
    MeasurementBasis::computational()
}

/// Alice's second CHSH basis, the Hadamard basis (X).
pub fn basis_a2() -> MeasurementBasis {
    MeasurementBasis::bloch(std::f64::consts::FRAC_PI_2, 0.0)
}

/// Bob's first CHSH basis, diagonalizing (Z + X)/sqrt(2).
pub fn basis_b1() -> MeasurementBasis {
    MeasurementBasis::bloch(std::f64::consts::FRAC_PI_4, 0.0)
}

/// Bob's second CHSH basis, diagonalizing (Z - X)/sqrt(2).
pub fn basis_b2() -> MeasurementBasis {
    MeasurementBasis::bloch(-std::f64::consts::FRAC_PI_4, 0.0)
}

/// The CHSH quartet in the order [B_A1, B_A2, B_B1, B_B2].
pub fn chsh_quartet() -> [MeasurementBasis; 4] {
    [basis_a1(), basis_a2(), basis_b1(), basis_b2()]
}

fn validate_eta(eta: f64) -> Result<()> {
    if eta <= 0.0 || eta >= 0.25 {
        return Err(Error::EtaOutOfRange(eta));
    }
    Ok(())
}

fn validate_gamma(eta: f64, gamma: f64) -> Result<()> {
    if gamma < 2.0 * eta - 1e-12 || gamma > 0.5 + 1e-12 {
        return Err(Error::GammaOutOfRange {
            gamma,
            min: 2.0 * eta,
        });
    }
    Ok(())
}

fn validate_fidelity(f: f64) -> Result<()> {
    if !(0.25..=1.0).contains(&f) {
        return Err(Error::FidelityOutOfRange(f));
    }
    Ok(())
}

/// Marginal basis probabilities: P_A = (eta/gamma, eta/gamma,
/// 1 - 2 eta/gamma) for Alice and P_B = (gamma, gamma, 1 - 2 gamma)
/// for Bob.
pub fn basis_marginals(eta: f64, gamma: f64) -> Result<([f64; 3], [f64; 3])> {
    validate_eta(eta)?;
    validate_gamma(eta, gamma)?;
    let pa = [eta / gamma, eta / gamma, 1.0 - 2.0 * eta / gamma];
    let pb = [gamma, gamma, 1.0 - 2.0 * gamma];
    Ok((pa, pb))
}

/// The 3x3 joint probability table, indexed [alice - 1][bob - 1], with
/// P_{Ai,Bj} = P_Ai P_Bj. The four CHSH cells all equal eta.
pub fn probability_table(eta: f64, gamma: f64) -> Result<[[f64; 3]; 3]> {
    let (pa, pb) = basis_marginals(eta, gamma)?;
    let mut table = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            table[i][j] = pa[i] * pb[j];
        }
    }
    Ok(table)
}

/// The five key-generating cells: Alice in basis 3, Bob in basis 3, or
/// both.
pub const PROCESSING_CELLS: [(usize, usize); 5] = [(1, 3), (2, 3), (3, 1), (3, 2), (3, 3)];

/// A full basis schedule: the CHSH probability eta, the free parameter
/// gamma, and the freely chosen third bases of both parties. The first
/// two bases of each party are pinned to the CHSH quartet.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSchedule {
    eta: f64,
    gamma: f64,
    basis_a3: MeasurementBasis,
    basis_b3: MeasurementBasis,
}

impl BasisSchedule {
    pub fn new(
        eta: f64,
        gamma: f64,
        basis_a3: MeasurementBasis,
        basis_b3: MeasurementBasis,
    ) -> Result<Self> {
        validate_eta(eta)?;
        validate_gamma(eta, gamma)?;
        Ok(Self {
            eta,
            gamma,
            basis_a3,
            basis_b3,
        })
    }

    /// The literature schedule: gamma = 2 eta so that the (3, 3) cell
    /// never occurs, with each party's third basis copied from the other
    /// party's CHSH set.
    pub fn asymmetric(eta: f64) -> Result<Self> {
        Self::new(eta, 2.0 * eta, basis_b1(), basis_a1())
    }

    /// The symmetric schedule: gamma = sqrt(eta) maximizes the (3, 3)
    /// cell, with both parties sharing the same third basis.
    pub fn symmetric(eta: f64, shared: &MeasurementBasis) -> Result<Self> {
        require_quartet_member(shared)?;
        Self::new(eta, eta.sqrt(), *shared, *shared)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn basis_a(&self, i: usize) -> MeasurementBasis {
        match i {
            1 => basis_a1(),
            2 => basis_a2(),
            3 => self.basis_a3,
            _ => panic!("basis index must be 1, 2 or 3"),
        }
    }

    pub fn basis_b(&self, j: usize) -> MeasurementBasis {
        match j {
            1 => basis_b1(),
            2 => basis_b2(),
            3 => self.basis_b3,
            _ => panic!("basis index must be 1, 2 or 3"),
        }
    }

    pub fn table(&self) -> [[f64; 3]; 3] {
        probability_table(self.eta, self.gamma).expect("validated at construction")
    }
}

fn require_quartet_member(basis: &MeasurementBasis) -> Result<()> {
    if chsh_quartet()
        .iter()
        .any(|b| b.same_projectors(basis, 1e-10))
    {
        Ok(())
    } else {
        Err(Error::BasisNotInQuartet)
    }
}

/// Which processing strategy to schedule measurements with.
#[derive(Debug, Clone)]
pub enum StrategyKind {
    /// Asymmetric optimum: gamma at a boundary, third bases copied from
    /// the other party.
    AsymmetricOptimal,
    /// Symmetric: gamma = sqrt(eta), shared third basis; the best of the
    /// four allowed shared bases is reported.
    Symmetric,
    /// A caller-supplied schedule. Its eta is replaced by the scan's
    /// per-k eta when used inside rate curves.
    Custom(BasisSchedule),
}

/// One key-generating cell of the schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRate {
    /// Alice's basis index in {1, 2, 3}.
    pub alice: usize,
    /// Bob's basis index in {1, 2, 3}.
    pub bob: usize,
    /// Sift weight P_{Ai,Bj} of the cell.
    pub probability: f64,
    /// max{0, r_key} of the cell's basis pair.
    pub clamped_rate: f64,
    /// probability * clamped_rate.
    pub product: f64,
}

/// Per-cell decomposition of the processing rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RateBreakdown {
    pub cells: Vec<CellRate>,
    /// Sum of the per-cell products.
    pub total: f64,
    pub eta: f64,
    pub gamma: f64,
    /// Fidelity of the processed state.
    pub fidelity: f64,
}

/// Processing rate: sum over the five key-generating cells of the sift
/// weight times the clamped key rate of that cell's basis pair.
pub fn processing_rate(rho: &DensityOperator4, schedule: &BasisSchedule) -> RateBreakdown {
    let table = schedule.table();
    let mut cells = Vec::with_capacity(PROCESSING_CELLS.len());
    let mut total = 0.0;
    for &(i, j) in &PROCESSING_CELLS {
        let probability = table[i - 1][j - 1];
        let rate = devetak_winter_rate(rho, &schedule.basis_a(i), &schedule.basis_b(j)).rate;
        let clamped = if rate > 0.0 { rate } else { 0.0 };
        let product = probability * clamped;
        total += product;
        cells.push(CellRate {
            alice: i,
            bob: j,
            probability,
            clamped_rate: clamped,
            product,
        });
    }
    RateBreakdown {
        cells,
        total,
        eta: schedule.eta,
        gamma: schedule.gamma,
        fidelity: rho.fidelity(),
    }
}

/// Closed form of the optimal asymmetric processing rate,
/// (1/2 - 2 eta) max{0, r'_key(F)}; the optimum sits at gamma = 2 eta or
/// gamma = 1/2.
pub fn asymmetric_optimal_rate(fidelity: f64, eta: f64) -> Result<f64> {
    validate_fidelity(fidelity)?;
    validate_eta(eta)?;
    let r = optimal_rate_werner(fidelity)?;
    Ok((0.5 - 2.0 * eta) * if r > 0.0 { r } else { 0.0 })
}

/// Symmetric processing rate with the given shared third basis, evaluated
/// cell by cell on the Werner state of the given fidelity.
pub fn symmetric_rate(fidelity: f64, eta: f64, shared: &MeasurementBasis) -> Result<f64> {
    validate_fidelity(fidelity)?;
    let schedule = BasisSchedule::symmetric(eta, shared)?;
    let rho = werner_from_fidelity(fidelity)?;
    Ok(processing_rate(&rho, &schedule).total)
}

/// Best symmetric rate over the four allowed shared bases.
pub fn symmetric_rate_best(fidelity: f64, eta: f64) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for basis in &chsh_quartet() {
        best = best.max(symmetric_rate(fidelity, eta, basis)?);
    }
    Ok(best)
}

/// Key rate of the cross-party CHSH pair (B_Ai, B_Bj) on a Werner state.
/// Positive only above a boundary fidelity of roughly 0.895, and always
/// below half the optimal rate.
pub fn suboptimal_pair_rate(fidelity: f64, i: usize, j: usize) -> Result<f64> {
    validate_fidelity(fidelity)?;
    if !(1..=2).contains(&i) || !(1..=2).contains(&j) {
        return Err(Error::BadBasisIndex);
    }
    let rho = werner_from_fidelity(fidelity)?;
    let ba = if i == 1 { basis_a1() } else { basis_a2() };
    let bb = if j == 1 { basis_b1() } else { basis_b2() };
    Ok(devetak_winter_rate(&rho, &ba, &bb).rate)
}

/// Key rate when both parties measure distinct bases from the same
/// party's CHSH set. The joint distribution is uniform, so the rate is
/// -chi(A:E) and never positive.
pub fn wasted_pair_rate(fidelity: f64, i: usize, j: usize, side: Subsystem) -> Result<f64> {
    validate_fidelity(fidelity)?;
    if !(1..=2).contains(&i) || !(1..=2).contains(&j) || i == j {
        return Err(Error::BadBasisIndex);
    }
    let pick = |idx: usize| match (side, idx) {
        (Subsystem::A, 1) => basis_a1(),
        (Subsystem::A, 2) => basis_a2(),
        (Subsystem::B, 1) => basis_b1(),
        (Subsystem::B, 2) => basis_b2(),
        _ => unreachable!(),
    };
    let rho = werner_from_fidelity(fidelity)?;
    Ok(devetak_winter_rate(&rho, &pick(i), &pick(j)).rate)
}

/// Which strategy wins at a grid point of the region map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    Asym,
    Sym,
    Tie,
    NoKey,
}

impl RegionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::Asym => "asym",
            RegionLabel::Sym => "sym",
            RegionLabel::Tie => "tie",
            RegionLabel::NoKey => "nokey",
        }
    }
}

/// One grid point of the strategy comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionPoint {
    pub eta: f64,
    pub fidelity: f64,
    pub asym_rate: f64,
    pub sym_rate: f64,
    pub label: RegionLabel,
}

fn grid(range: (f64, f64), steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![range.0];
    }
    (0..steps)
        .map(|i| range.0 + i as f64 * (range.1 - range.0) / (steps - 1) as f64)
        .collect()
}

/// Compares the asymmetric optimum against the best symmetric rate over
/// a (eta, F) grid with `steps` points per axis. Rows are eta-major.
/// NoKey marks points where neither strategy generates key and takes
/// precedence over Tie; otherwise rates within 1e-12 tie.
pub fn region_map(
    eta_range: (f64, f64),
    f_range: (f64, f64),
    steps: usize,
) -> Result<Vec<RegionPoint>> {
    validate_eta(eta_range.0)?;
    validate_eta(eta_range.1)?;
    validate_fidelity(f_range.0)?;
    validate_fidelity(f_range.1)?;
    let etas = grid(eta_range, steps);
    let fs = grid(f_range, steps);

    let points: Vec<(f64, f64)> = etas
        .iter()
        .flat_map(|&eta| fs.iter().map(move |&f| (eta, f)))
        .collect();
    points
        .par_iter()
        .map(|&(eta, fidelity)| {
            let asym = asymmetric_optimal_rate(fidelity, eta)?;
            let sym = symmetric_rate_best(fidelity, eta)?;
            let label = if asym == 0.0 && sym == 0.0 {
                RegionLabel::NoKey
            } else if (asym - sym).abs() <= 1e-12 {
                RegionLabel::Tie
            } else if asym > sym {
                RegionLabel::Asym
            } else {
                RegionLabel::Sym
            };
            Ok(RegionPoint {
                eta,
                fidelity,
                asym_rate: asym,
                sym_rate: sym,
                label,
            })
        })
        .collect()
}

/// Serializes a region map as CSV with header
/// `eta,F,asym_rate,sym_rate,label`, one row per grid point in input
/// order, numbers at 12 significant digits.
pub fn write_region_csv<W: Write>(points: &[RegionPoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "eta,F,asym_rate,sym_rate,label")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{}",
            crate::csv_number(p.eta),
            crate::csv_number(p.fidelity),
            crate::csv_number(p.asym_rate),
            crate::csv_number(p.sym_rate),
            p.label.as_str()
        )?;
    }
    Ok(())
}
