//! Achievable secure-key rates for Bell-inequality-based entanglement QKD
//! links, covering the full processing chain: recurrence entanglement
//! distillation, measurement-basis scheduling, and the one-way secret-key
//! capacity of the measured state.

pub mod distill;
pub mod error;
pub mod keyrate;
pub mod kopt;
pub mod quantum;
pub mod strategy;

pub use distill::{
    distill_step, ent_rate, trajectory, DistillationStep, DistillationTrajectory, ProtocolKind,
    ProtocolTag,
};
pub use error::{Error, Result};
pub use keyrate::{
    basis_grid_oracle, chsh_value, conditional_state_b, devetak_winter_rate, holevo_ab,
    joint_distribution, mutual_information, optimal_rate_werner, rate_bell_diagonal_computational,
    reduced_rate_bell_diagonal, JointDistribution, KeyRateReport, OracleResult,
};
pub use kopt::{
    find_k_loc, find_k_opt, kappa_bounds, rate_curve, total_rate, EtaMode, KLocOutcome, KOptResult,
    KappaBounds, RatePoint,
};
pub use quantum::{
    bell_diagonal_to_operator, bell_phi_plus, binary_entropy, maximally_mixed_2, maximally_mixed_4,
    shannon_entropy, werner_from_fidelity, werner_twirl, BellDiagonalState, DensityOperator2,
    DensityOperator4, MeasurementBasis, StateVector2, Subsystem, WernerState,
};
pub use strategy::{
    asymmetric_optimal_rate, probability_table, processing_rate, region_map, suboptimal_pair_rate,
    symmetric_rate, symmetric_rate_best, wasted_pair_rate, BasisSchedule, RateBreakdown,
    RegionLabel, RegionPoint, StrategyKind,
};

/// Formats a number with 12 significant digits for CSV and report output.
pub fn csv_number(x: f64) -> String {
    format!("{x:.11e}")
}
