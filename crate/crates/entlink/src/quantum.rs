//! Exact two-qubit density-operator algebra: state vectors, measurement
//! bases, Werner and Bell-diagonal states, entropies, traces and twirls.
//!
//! Everything here is immutable after construction and every operation is
//! a pure function, so values can be copied and shared across threads
//! freely. Computational-basis indices follow |q_A q_B> with the A qubit
//! as the most significant bit.

use nalgebra::{Complex, Matrix2, Matrix4, SymmetricEigen, Vector2};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Tolerance for normalization and orthogonality of state vectors.
pub const VECTOR_TOL: f64 = 1e-12;
/// Tolerance for Hermiticity and unit trace of density operators.
pub const OPERATOR_TOL: f64 = 1e-12;
/// Eigenvalues below this are a genuine positivity violation; values in
/// [PSD_FLOOR, 0) are treated as numerical noise and clamped to zero.
pub const PSD_FLOOR: f64 = -1e-10;
/// Tolerance on the normalization of classical probability vectors.
pub const PROBABILITY_TOL: f64 = 1e-9;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A normalized single-qubit pure state c0|0> + c1|1>.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector2 {
    c0: C64,
    c1: C64,
}

impl StateVector2 {
    pub fn new(c0: C64, c1: C64) -> Result<Self> {
        let norm = c0.norm_sqr() + c1.norm_sqr();
        if (norm - 1.0).abs() > VECTOR_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { c0, c1 })
    }

    pub fn ket_zero() -> Self {
        Self {
            c0: c(1.0, 0.0),
            c1: c(0.0, 0.0),
        }
    }

    pub fn ket_one() -> Self {
        Self {
            c0: c(0.0, 0.0),
            c1: c(1.0, 0.0),
        }
    }

    pub fn c0(&self) -> C64 {
        self.c0
    }

    pub fn c1(&self) -> C64 {
        self.c1
    }

    /// Entrywise complex conjugate.
    pub fn conjugate(&self) -> Self {
        Self {
            c0: self.c0.conj(),
            c1: self.c1.conj(),
        }
    }

    pub fn as_vector(&self) -> Vector2<C64> {
        Vector2::new(self.c0, self.c1)
    }

    /// Rank-one projector |psi><psi|.
    pub fn projector(&self) -> Matrix2<C64> {
        let v = self.as_vector();
        v * v.adjoint()
    }
}

/// An orthonormal pair of single-qubit states defining a projective
/// measurement. The ordering of the two vectors labels the outcomes but
/// never affects any rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementBasis {
    first: StateVector2,
    second: StateVector2,
}

impl MeasurementBasis {
    pub fn new(first: StateVector2, second: StateVector2) -> Result<Self> {
        let inner = first.c0.conj() * second.c0 + first.c1.conj() * second.c1;
        if inner.norm() > VECTOR_TOL {
            return Err(Error::NotOrthogonal(inner.norm()));
        }
        Ok(Self { first, second })
    }

    /// The computational basis {|0>, |1>}.
    pub fn computational() -> Self {
        Self {
            first: StateVector2::ket_zero(),
            second: StateVector2::ket_one(),
        }
    }

    /// Basis at Bloch angles (theta, phi):
    /// {(cos(t/2), e^{i phi} sin(t/2)), (sin(t/2), -e^{i phi} cos(t/2))}.
    pub fn bloch(theta: f64, phi: f64) -> Self {
        let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let phase = c(phi.cos(), phi.sin());
        Self {
            first: StateVector2 {
                c0: c(ct, 0.0),
                c1: phase * st,
            },
            second: StateVector2 {
                c0: c(st, 0.0),
                c1: -phase * ct,
            },
        }
    }

    /// Partner basis of entrywise conjugated vectors.
    pub fn conjugate(&self) -> Self {
        Self {
            first: self.first.conjugate(),
            second: self.second.conjugate(),
        }
    }

    pub fn first(&self) -> &StateVector2 {
        &self.first
    }

    pub fn second(&self) -> &StateVector2 {
        &self.second
    }

    pub fn vector(&self, outcome: usize) -> &StateVector2 {
        match outcome {
            0 => &self.first,
            1 => &self.second,
            _ => panic!("measurement outcome must be 0 or 1"),
        }
    }

    /// The +/-1-valued observable P_first - P_second.
    pub fn observable(&self) -> Matrix2<C64> {
        self.first.projector() - self.second.projector()
    }

    /// Whether both bases project onto the same pair of rays. Global
    /// phases and outcome ordering are ignored.
    pub fn same_projectors(&self, other: &Self, tol: f64) -> bool {
        let direct = (self.first.projector() - other.first.projector()).norm()
            + (self.second.projector() - other.second.projector()).norm();
        let swapped = (self.first.projector() - other.second.projector()).norm()
            + (self.second.projector() - other.first.projector()).norm();
        direct.min(swapped) < tol
    }
}

/// Which subsystem of the bipartite state to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

fn hermiticity_and_trace<const N: usize>(m: &nalgebra::SMatrix<C64, N, N>) -> Result<()> {
    let mut herm_dev: f64 = 0.0;
    for i in 0..N {
        for j in 0..N {
            herm_dev = herm_dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if herm_dev > OPERATOR_TOL {
        return Err(Error::NotHermitian(herm_dev));
    }
    let trace = m.trace();
    if (trace.re - 1.0).abs() > OPERATOR_TOL || trace.im.abs() > OPERATOR_TOL {
        return Err(Error::BadTrace(trace.re));
    }
    Ok(())
}

fn check_spectrum_floor(eigs: &[f64]) -> Result<()> {
    for &lambda in eigs {
        if lambda < PSD_FLOOR {
            return Err(Error::NotPositiveSemidefinite(lambda));
        }
    }
    Ok(())
}

fn entropy_from_spectrum(eigs: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = 0.0;
    for lambda in eigs {
        let lambda = lambda.max(0.0);
        if lambda > 0.0 {
            s -= lambda * lambda.log2();
        }
    }
    s
}

/// A validated 4x4 density operator (Hermitian, unit trace, positive
/// semidefinite up to tolerance) for the shared two-qubit state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator4 {
    m: Matrix4<C64>,
}

impl DensityOperator4 {
    pub fn new(m: Matrix4<C64>) -> Result<Self> {
        hermiticity_and_trace(&m)?;
        let eigen = SymmetricEigen::new(m);
        check_spectrum_floor(eigen.eigenvalues.as_slice())?;
        Ok(Self { m })
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.m
    }

    /// Overlap <Phi+|rho|Phi+> with the target Bell state.
    pub fn fidelity(&self) -> f64 {
        0.5 * (self.m[(0, 0)] + self.m[(0, 3)] + self.m[(3, 0)] + self.m[(3, 3)]).re
    }

    /// Von Neumann entropy in bits via dense Hermitian eigendecomposition.
    pub fn von_neumann_entropy(&self) -> f64 {
        let eigen = SymmetricEigen::new(self.m);
        entropy_from_spectrum(eigen.eigenvalues.iter().copied())
    }

    /// Reduced state of the remaining qubit after tracing out `subsystem`.
    pub fn partial_trace(&self, subsystem: Subsystem) -> DensityOperator2 {
        let mut r = Matrix2::zeros();
        match subsystem {
            // tr_A: keep B indices, sum over A's bit (the high bit).
            Subsystem::A => {
                for b1 in 0..2 {
                    for b2 in 0..2 {
                        r[(b1, b2)] = self.m[(b1, b2)] + self.m[(2 + b1, 2 + b2)];
                    }
                }
            }
            Subsystem::B => {
                for a1 in 0..2 {
                    for a2 in 0..2 {
                        r[(a1, a2)] = self.m[(2 * a1, 2 * a2)] + self.m[(2 * a1 + 1, 2 * a2 + 1)];
                    }
                }
            }
        }
        DensityOperator2 { m: r }
    }
}

/// A validated 2x2 density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator2 {
    m: Matrix2<C64>,
}

impl DensityOperator2 {
    pub fn new(m: Matrix2<C64>) -> Result<Self> {
        hermiticity_and_trace(&m)?;
        let probe = Self { m };
        check_spectrum_floor(&probe.eigenvalues())?;
        Ok(probe)
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.m
    }

    /// Eigenvalues from the closed-form solution of the characteristic
    /// polynomial of a 2x2 Hermitian matrix.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let t = self.m.trace().re;
        let det = (self.m[(0, 0)] * self.m[(1, 1)] - self.m[(0, 1)] * self.m[(1, 0)]).re;
        let disc = (t * t / 4.0 - det).max(0.0).sqrt();
        [t / 2.0 - disc, t / 2.0 + disc]
    }

    pub fn von_neumann_entropy(&self) -> f64 {
        entropy_from_spectrum(self.eigenvalues())
    }
}

/// The maximally mixed single-qubit state I/2.
pub fn maximally_mixed_2() -> DensityOperator2 {
    DensityOperator2 {
        m: Matrix2::identity() * c(0.5, 0.0),
    }
}

/// The maximally mixed two-qubit state I/4.
pub fn maximally_mixed_4() -> DensityOperator4 {
    DensityOperator4 {
        m: Matrix4::identity() * c(0.25, 0.0),
    }
}

/// The four Bell state vectors in the order Phi+, Psi-, Psi+, Phi-.
/// This ordering matches the coefficient order of [`BellDiagonalState`].
pub(crate) fn bell_vectors() -> [nalgebra::Vector4<C64>; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        nalgebra::Vector4::new(c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)),
        nalgebra::Vector4::new(c(0.0, 0.0), c(h, 0.0), c(-h, 0.0), c(0.0, 0.0)),
        nalgebra::Vector4::new(c(0.0, 0.0), c(h, 0.0), c(h, 0.0), c(0.0, 0.0)),
        nalgebra::Vector4::new(c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-h, 0.0)),
    ]
}

/// Rank-one projector onto the Bell state |Phi+> = (|00> + |11>)/sqrt(2).
pub fn bell_phi_plus() -> DensityOperator4 {
    let v = &bell_vectors()[0];
    DensityOperator4 { m: v * v.adjoint() }
}

/// A Werner state, fully described by its fidelity F in [0.25, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerState {
    fidelity: f64,
}

impl WernerState {
    pub fn new(fidelity: f64) -> Result<Self> {
        // Fidelities computed from valid states can land a few ulps
        // outside the closed interval; clamp those, reject the rest.
        if !(0.25 - VECTOR_TOL..=1.0 + VECTOR_TOL).contains(&fidelity) {
            return Err(Error::FidelityOutOfRange(fidelity));
        }
        Ok(Self {
            fidelity: fidelity.clamp(0.25, 1.0),
        })
    }

    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }

    /// The noise parameter w = 4(1 - F)/3 in [0, 1].
    pub fn werner_parameter(&self) -> f64 {
        4.0 * (1.0 - self.fidelity) / 3.0
    }

    /// Bell-diagonal coefficients (F, x, x, x) with x = (1 - F)/3.
    pub fn coefficients(&self) -> BellDiagonalState {
        let x = (1.0 - self.fidelity) / 3.0;
        BellDiagonalState {
            f: self.fidelity,
            delta: x,
            epsilon: x,
            tau: x,
        }
    }

    /// ((4F - 1)/3) |Phi+><Phi+| + ((1 - F)/3) I_4.
    pub fn to_operator(&self) -> DensityOperator4 {
        let f = self.fidelity;
        let m = bell_phi_plus().m * c((4.0 * f - 1.0) / 3.0, 0.0)
            + Matrix4::identity() * c((1.0 - f) / 3.0, 0.0);
        DensityOperator4 { m }
    }
}

/// Convenience constructor for the Werner density operator of fidelity F.
pub fn werner_from_fidelity(fidelity: f64) -> Result<DensityOperator4> {
    Ok(WernerState::new(fidelity)?.to_operator())
}

/// Fidelity-preserving projection onto the Werner family. Refuses states
/// whose fidelity is below 1/4, since the resulting Werner form would not
/// be positive semidefinite.
pub fn werner_twirl(rho: &DensityOperator4) -> Result<WernerState> {
    WernerState::new(rho.fidelity())
}

/// A mixture of the four Bell projectors with weights (F, delta, epsilon,
/// tau) on (Phi+, Psi-, Psi+, Phi-).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellDiagonalState {
    f: f64,
    delta: f64,
    epsilon: f64,
    tau: f64,
}

impl BellDiagonalState {
    pub fn new(f: f64, delta: f64, epsilon: f64, tau: f64) -> Result<Self> {
        for &w in &[f, delta, epsilon, tau] {
            if w < -VECTOR_TOL {
                return Err(Error::InvalidCoefficients(format!("negative weight {w}")));
            }
        }
        let sum = f + delta + epsilon + tau;
        if (sum - 1.0).abs() > VECTOR_TOL {
            return Err(Error::InvalidCoefficients(format!("weights sum to {sum}")));
        }
        // Weights in [-tol, 0) are numerical noise from upstream circuits.
        Ok(Self {
            f: f.max(0.0),
            delta: delta.max(0.0),
            epsilon: epsilon.max(0.0),
            tau: tau.max(0.0),
        })
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.f, self.delta, self.epsilon, self.tau]
    }

    /// The weight on |Phi+><Phi+|, which is the state's fidelity.
    pub fn fidelity(&self) -> f64 {
        self.f
    }

    pub fn to_operator(&self) -> DensityOperator4 {
        let vs = bell_vectors();
        let ws = self.coefficients();
        let mut m = Matrix4::zeros();
        for (v, w) in vs.iter().zip(ws) {
            m += v * v.adjoint() * c(w, 0.0);
        }
        DensityOperator4 { m }
    }
}

/// Weighted sum of the four Bell projectors.
pub fn bell_diagonal_to_operator(s: &BellDiagonalState) -> DensityOperator4 {
    s.to_operator()
}

/// Base-2 Shannon entropy of a probability vector, with 0 log 0 := 0.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for &x in p {
        if x < 0.0 {
            return Err(Error::InvalidDistribution(format!("negative entry {x}")));
        }
        sum += x;
    }
    if (sum - 1.0).abs() > PROBABILITY_TOL {
        return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
    }
    Ok(entropy_from_spectrum(p.iter().copied()))
}

/// Binary Shannon entropy H(p, 1-p).
pub fn binary_entropy(p: f64) -> f64 {
    entropy_from_spectrum([p, 1.0 - p])
}
