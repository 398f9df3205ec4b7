//! Property tests over randomized states, bases and schedule parameters.

use entlink::{
    devetak_winter_rate, ent_rate, joint_distribution, probability_table, trajectory,
    werner_from_fidelity, BellDiagonalState, MeasurementBasis, ProtocolKind,
};
use proptest::prelude::*;

fn bloch_basis_strategy() -> impl Strategy<Value = MeasurementBasis> {
    (0.0..std::f64::consts::PI, 0.0..2.0 * std::f64::consts::PI)
        .prop_map(|(theta, phi)| MeasurementBasis::bloch(theta, phi))
}

fn bell_diagonal_strategy() -> impl Strategy<Value = BellDiagonalState> {
    (1e-9..1.0f64, 1e-9..1.0f64, 1e-9..1.0f64, 1e-9..1.0f64).prop_map(|(a, b, c, d)| {
        let sum = a + b + c + d;
        BellDiagonalState::new(a / sum, b / sum, c / sum, d / sum).unwrap()
    })
}

proptest! {
    #[test]
    fn werner_round_trip(f in 0.25..=1.0f64) {
        let rho = werner_from_fidelity(f).unwrap();
        prop_assert!((rho.fidelity() - f).abs() < 1e-12);
    }

    #[test]
    fn bloch_bases_are_orthonormal(basis in bloch_basis_strategy()) {
        for v in [basis.first(), basis.second()] {
            let norm = v.c0().norm_sqr() + v.c1().norm_sqr();
            prop_assert!((norm - 1.0).abs() < 1e-12);
        }
        let inner = basis.first().c0().conj() * basis.second().c0()
            + basis.first().c1().conj() * basis.second().c1();
        prop_assert!(inner.norm() < 1e-12);
        // Conjugation preserves orthonormality.
        let conj = basis.conjugate();
        let inner = conj.first().c0().conj() * conj.second().c0()
            + conj.first().c1().conj() * conj.second().c1();
        prop_assert!(inner.norm() < 1e-12);
    }

    #[test]
    fn joint_distributions_are_normalized(
        s in bell_diagonal_strategy(),
        ba in bloch_basis_strategy(),
        bb in bloch_basis_strategy(),
    ) {
        let d = joint_distribution(&s.to_operator(), &ba, &bb);
        let mut sum = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                prop_assert!(d.probability(a, b) >= 0.0);
                sum += d.probability(a, b);
            }
        }
        prop_assert!((sum - 1.0).abs() < 1e-10);
        for p in d.marginal_a().into_iter().chain(d.marginal_b()) {
            prop_assert!((p - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn rate_report_is_self_consistent(
        s in bell_diagonal_strategy(),
        ba in bloch_basis_strategy(),
        bb in bloch_basis_strategy(),
    ) {
        let report = devetak_winter_rate(&s.to_operator(), &ba, &bb);
        prop_assert!((report.rate - (report.mutual_information - report.holevo)).abs() < 1e-10);
        prop_assert!(report.holevo >= -1e-10);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&report.mutual_information));
    }

    #[test]
    fn schedule_table_is_a_distribution(
        eta in 1e-4..0.2499f64,
        t in 0.0..=1.0f64,
    ) {
        let gamma = 2.0 * eta + (0.5 - 2.0 * eta) * t;
        let table = probability_table(eta, gamma).unwrap();
        let mut sum = 0.0;
        for row in &table {
            for &cell in row {
                prop_assert!(cell >= -1e-12);
                sum += cell;
            }
        }
        prop_assert!((sum - 1.0).abs() < 1e-10);
    }

    #[test]
    fn distillation_yield_is_bounded_by_halving(
        f0 in 0.25..=1.0f64,
        k in 0u32..5,
    ) {
        let t = trajectory(f0, k, ProtocolKind::bbpssw()).unwrap();
        let r = ent_rate(&t);
        prop_assert!(r <= 0.5f64.powi(k as i32) + 1e-15);
        prop_assert!(r > 0.0);
    }
}
