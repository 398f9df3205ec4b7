//! Measurement statistics on the shared state and the one-way secret-key
//! rate of Devetak and Winter, r_key = I(A:B) - chi(A:E).
//!
//! For a purified worst-case eavesdropper the Holevo term reduces to the
//! A-B system, chi(A:E) = S(rho_AB) - sum_a p_A(a) S(rho_B^a), which is
//! what is computed here. Closed forms for Werner and Bell-diagonal
//! states live alongside the generic pipeline, plus a brute-force basis
//! search and a CHSH evaluator.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quantum::{
    shannon_entropy, BellDiagonalState, DensityOperator2, DensityOperator4, MeasurementBasis, C64,
};

/// Outcome probabilities below this cannot be conditioned on.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-12;

/// Joint outcome distribution `p[a][b]` of a pair of local projective
/// measurements on the shared state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDistribution {
    p: [[f64; 2]; 2],
}

impl JointDistribution {
    pub fn new(p: [[f64; 2]; 2]) -> Result<Self> {
        let mut sum = 0.0;
        for row in &p {
            for &x in row {
                if x < -1e-10 {
                    return Err(Error::InvalidDistribution(format!("negative entry {x}")));
                }
                sum += x;
            }
        }
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(Self {
            p: p.map(|row| row.map(|x| x.max(0.0))),
        })
    }

    pub fn probability(&self, a: usize, b: usize) -> f64 {
        self.p[a][b]
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.p
    }

    pub fn marginal_a(&self) -> [f64; 2] {
        [self.p[0][0] + self.p[0][1], self.p[1][0] + self.p[1][1]]
    }

    pub fn marginal_b(&self) -> [f64; 2] {
        [self.p[0][0] + self.p[1][0], self.p[0][1] + self.p[1][1]]
    }

    /// I(A:B) = H(A) + H(B) - H(A,B) in bits.
    pub fn mutual_information(&self) -> f64 {
        mutual_information(self)
    }
}

/// The 2x2 blocks <a|_A rho |a>_A for the two outcomes of A's basis.
/// Block `a` has trace p_A(a) and, normalized, is the conditional state
/// of B given outcome a.
fn conditional_blocks(rho: &Matrix4<C64>, basis_a: &MeasurementBasis) -> [Matrix2<C64>; 2] {
    let mut blocks = [Matrix2::zeros(), Matrix2::zeros()];
    for (slot, ket) in [basis_a.first(), basis_a.second()].into_iter().enumerate() {
        let amp = [ket.c0(), ket.c1()];
        let mut block = Matrix2::zeros();
        for b1 in 0..2 {
            for b2 in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for a1 in 0..2 {
                    for a2 in 0..2 {
                        acc += amp[a1].conj() * rho[(2 * a1 + b1, 2 * a2 + b2)] * amp[a2];
                    }
                }
                block[(b1, b2)] = acc;
            }
        }
        blocks[slot] = block;
    }
    blocks
}

fn expectation(block: &Matrix2<C64>, ket: &crate::quantum::StateVector2) -> f64 {
    let amp = [ket.c0(), ket.c1()];
    let mut acc = C64::new(0.0, 0.0);
    for b1 in 0..2 {
        for b2 in 0..2 {
            acc += amp[b1].conj() * block[(b1, b2)] * amp[b2];
        }
    }
    acc.re
}

/// Eigenvalues of a trace-p Hermitian 2x2 block.
fn block_spectrum(block: &Matrix2<C64>) -> [f64; 2] {
    let t = block.trace().re;
    let det = (block[(0, 0)] * block[(1, 1)] - block[(0, 1)] * block[(1, 0)]).re;
    let disc = (t * t / 4.0 - det).max(0.0).sqrt();
    [t / 2.0 - disc, t / 2.0 + disc]
}

fn entropy_bits(eigs: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = 0.0;
    for lambda in eigs {
        let lambda = lambda.max(0.0);
        if lambda > 0.0 {
            s -= lambda * lambda.log2();
        }
    }
    s
}

/// Joint measurement distribution p(a, b) = (<a| (x) <b|) rho (|a> (x) |b>).
pub fn joint_distribution(
    rho: &DensityOperator4,
    basis_a: &MeasurementBasis,
    basis_b: &MeasurementBasis,
) -> JointDistribution {
    let blocks = conditional_blocks(rho.matrix(), basis_a);
    let mut p = [[0.0; 2]; 2];
    for a in 0..2 {
        for (b, ket) in [basis_b.first(), basis_b.second()].into_iter().enumerate() {
            p[a][b] = expectation(&blocks[a], ket);
        }
    }
    JointDistribution::new(p).expect("projective probabilities of a valid state")
}

/// Conditional state of B after A measured `outcome` in `basis_a`:
/// tr_A[(M_a (x) I) rho] / p_A(a).
pub fn conditional_state_b(
    rho: &DensityOperator4,
    basis_a: &MeasurementBasis,
    outcome: usize,
) -> Result<DensityOperator2> {
    let block = conditional_blocks(rho.matrix(), basis_a)[outcome];
    let p = block.trace().re;
    if p <= MIN_OUTCOME_PROBABILITY {
        return Err(Error::ZeroProbabilityOutcome(p));
    }
    DensityOperator2::new(block / C64::new(p, 0.0))
}

/// I(A:B) = H(A) + H(B) - H(A,B) of a joint outcome distribution.
pub fn mutual_information(d: &JointDistribution) -> f64 {
    let p = d.entries();
    let h_ab = entropy_bits([p[0][0], p[0][1], p[1][0], p[1][1]]);
    let h_a = entropy_bits(d.marginal_a());
    let h_b = entropy_bits(d.marginal_b());
    h_a + h_b - h_ab
}

/// Holevo bound chi(A:E) = S(rho_AB) - sum_a p_A(a) S(rho_B^a), reduced
/// to the A-B system through the purification argument. Outcomes with
/// vanishing probability carry zero weight and are skipped.
pub fn holevo_ab(rho: &DensityOperator4, basis_a: &MeasurementBasis) -> f64 {
    rho.von_neumann_entropy() - conditional_entropy_term(rho.matrix(), basis_a)
}

fn conditional_entropy_term(rho: &Matrix4<C64>, basis_a: &MeasurementBasis) -> f64 {
    let blocks = conditional_blocks(rho, basis_a);
    let mut acc = 0.0;
    for block in &blocks {
        let p = block.trace().re;
        if p > MIN_OUTCOME_PROBABILITY {
            let [l1, l2] = block_spectrum(block);
            acc += p * entropy_bits([l1 / p, l2 / p]);
        }
    }
    acc
}

/// Full breakdown of the secret-key rate of one basis pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRateReport {
    /// I(A:B) of the measured joint distribution, in bits.
    pub mutual_information: f64,
    /// chi(A:E) reduced to the A-B system, in bits.
    pub holevo: f64,
    /// sum_a p_A(a) S(rho_B^a), in bits.
    pub conditional_entropy_term: f64,
    /// r_key = I(A:B) - chi(A:E); may be negative.
    pub rate: f64,
}

/// Secret-key rate r_key(rho, B_A, B_B) = I(A:B) - chi(A:E). Negative
/// values are returned as-is; clamping is the scheduler's business.
pub fn devetak_winter_rate(
    rho: &DensityOperator4,
    basis_a: &MeasurementBasis,
    basis_b: &MeasurementBasis,
) -> KeyRateReport {
    rate_with_state_entropy(rho.matrix(), rho.von_neumann_entropy(), basis_a, basis_b)
}

/// Shared worker: the state entropy S(rho_AB) does not depend on the
/// bases, so sweeps compute it once.
fn rate_with_state_entropy(
    rho: &Matrix4<C64>,
    state_entropy: f64,
    basis_a: &MeasurementBasis,
    basis_b: &MeasurementBasis,
) -> KeyRateReport {
    let blocks = conditional_blocks(rho, basis_a);
    let mut p = [[0.0; 2]; 2];
    for a in 0..2 {
        for (b, ket) in [basis_b.first(), basis_b.second()].into_iter().enumerate() {
            p[a][b] = expectation(&blocks[a], ket).max(0.0);
        }
    }
    let h_ab = entropy_bits([p[0][0], p[0][1], p[1][0], p[1][1]]);
    let h_a = entropy_bits([p[0][0] + p[0][1], p[1][0] + p[1][1]]);
    let h_b = entropy_bits([p[0][0] + p[1][0], p[0][1] + p[1][1]]);
    let mutual = h_a + h_b - h_ab;

    let mut cond = 0.0;
    for block in &blocks {
        let pa = block.trace().re;
        if pa > MIN_OUTCOME_PROBABILITY {
            let [l1, l2] = block_spectrum(block);
            cond += pa * entropy_bits([l1 / pa, l2 / pa]);
        }
    }
    let holevo = state_entropy - cond;
    KeyRateReport {
        mutual_information: mutual,
        holevo,
        conditional_entropy_term: cond,
        rate: mutual - holevo,
    }
}

/// Reduced key-rate form valid for Bell-diagonal states, where both
/// marginals are maximally mixed: 2 - H(A,B) - S(rho_AB) + S(rho_B^alpha).
pub fn reduced_rate_bell_diagonal(
    rho: &DensityOperator4,
    basis_a: &MeasurementBasis,
    basis_b: &MeasurementBasis,
) -> Result<f64> {
    let d = joint_distribution(rho, basis_a, basis_b);
    let p = d.entries();
    let h_ab = entropy_bits([p[0][0], p[0][1], p[1][0], p[1][1]]);
    let s_cond = conditional_state_b(rho, basis_a, 0)?.von_neumann_entropy();
    Ok(2.0 - h_ab - rho.von_neumann_entropy() + s_cond)
}

/// Optimal key rate of a Werner state over all basis pairs, in closed
/// form: 1 + F ld F + (1 - F) ld((1 - F)/3). Negative below the
/// threshold fidelity of roughly 0.8107.
pub fn optimal_rate_werner(fidelity: f64) -> Result<f64> {
    if !(0.25..=1.0).contains(&fidelity) {
        return Err(Error::FidelityOutOfRange(fidelity));
    }
    Ok(1.0
        - entropy_bits([fidelity, (1.0 - fidelity) / 3.0])
        - 2.0 * entropy_bits([(1.0 - fidelity) / 3.0]))
}

/// Key rate of a Bell-diagonal state with both parties measuring in the
/// computational basis: 1 - H(F, delta, epsilon, tau) = 1 - S(rho).
pub fn rate_bell_diagonal_computational(s: &BellDiagonalState) -> f64 {
    1.0 - shannon_entropy(&s.coefficients()).expect("validated coefficients")
}

/// Result of the brute-force basis search.
#[derive(Debug, Clone, Copy)]
pub struct OracleResult {
    pub rate: f64,
    /// Bloch angles (theta_a, phi_a, theta_b, phi_b) of the maximizer.
    pub angles: (f64, f64, f64, f64),
    pub basis_a: MeasurementBasis,
    pub basis_b: MeasurementBasis,
}

/// Maximizes the key rate over a uniform grid of Bloch-parameterized
/// basis pairs, theta in [0, pi] and phi in [0, 2 pi), each sampled
/// `grid_steps` times. Ties break lexicographically on the angle grid
/// indices, so the result is independent of thread count.
pub fn basis_grid_oracle(rho: &DensityOperator4, grid_steps: usize) -> Result<OracleResult> {
    if grid_steps < 8 {
        return Err(Error::GridTooCoarse(grid_steps));
    }
    let thetas: Vec<f64> = (0..grid_steps)
        .map(|i| i as f64 * std::f64::consts::PI / (grid_steps - 1) as f64)
        .collect();
    let phis: Vec<f64> = (0..grid_steps)
        .map(|j| j as f64 * 2.0 * std::f64::consts::PI / grid_steps as f64)
        .collect();
    let bases: Vec<MeasurementBasis> = thetas
        .iter()
        .flat_map(|&t| phis.iter().map(move |&p| MeasurementBasis::bloch(t, p)))
        .collect();
    let state_entropy = rho.von_neumann_entropy();
    let m = rho.matrix();
    let n = bases.len();

    let best = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (ia, ib) = (idx / n, idx % n);
            let r = rate_with_state_entropy(m, state_entropy, &bases[ia], &bases[ib]).rate;
            (r, idx)
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |x, y| {
                if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                    y
                } else {
                    x
                }
            },
        );

    let (ia, ib) = (best.1 / n, best.1 % n);
    let angle = |i: usize| (thetas[i / grid_steps], phis[i % grid_steps]);
    let (ta, pa) = angle(ia);
    let (tb, pb) = angle(ib);
    Ok(OracleResult {
        rate: best.0,
        angles: (ta, pa, tb, pb),
        basis_a: bases[ia],
        basis_b: bases[ib],
    })
}

/// CHSH value of the state under the standard observable quartet
/// A1 = Z, A2 = X and the two diagonal combinations (Z +/- X)/sqrt(2),
/// `S = <A1 B1> + <A1 B2> + <A2 B1> - <A2 B2>`. Only |S| is meaningful;
/// the pairing convention is fixed here once and for all.
pub fn chsh_value(rho: &DensityOperator4) -> f64 {
    let quartet = crate::strategy::chsh_quartet();
    let a1 = quartet[0].observable();
    let a2 = quartet[1].observable();
    let b1 = quartet[2].observable();
    let b2 = quartet[3].observable();

    let correlation = |oa: &Matrix2<C64>, ob: &Matrix2<C64>| -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for a1i in 0..2 {
            for b1i in 0..2 {
                for a2i in 0..2 {
                    for b2i in 0..2 {
                        acc += oa[(a2i, a1i)]
                            * ob[(b2i, b1i)]
                            * rho.matrix()[(2 * a1i + b1i, 2 * a2i + b2i)];
                    }
                }
            }
        }
        acc.re
    };

    correlation(&a1, &b1) + correlation(&a1, &b2) + correlation(&a2, &b1) - correlation(&a2, &b2)
}

/// Dense eigendecomposition helper for tests that cross-check the
/// closed-form spectra used in the hot paths.
pub fn dense_spectrum(rho: &DensityOperator4) -> Vec<f64> {
    let mut eigs: Vec<f64> = SymmetricEigen::new(*rho.matrix())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}
