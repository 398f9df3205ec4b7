//! Acceptance suite. Each test pins one observable property of the
//! pipeline at a fixed tolerance and runtime budget and prints a
//! pass/fail line (run with `--nocapture` to see them).

use std::time::Instant;

use entlink::kopt::{self, EtaMode};
use entlink::strategy;
use entlink::{
    basis_grid_oracle, devetak_winter_rate, distill_step, optimal_rate_werner,
    rate_bell_diagonal_computational, reduced_rate_bell_diagonal, suboptimal_pair_rate,
    wasted_pair_rate, werner_from_fidelity, BellDiagonalState, MeasurementBasis, ProtocolKind,
    StrategyKind, Subsystem, WernerState,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn report(number: usize, name: &str, start: Instant, budget_secs: f64) {
    let secs = start.elapsed().as_secs_f64();
    println!("acceptance criterion {number} ({name}): PASS ({secs:.2}s, budget {budget_secs}s)");
    assert!(
        secs < budget_secs,
        "criterion {number} exceeded its {budget_secs}s budget: {secs:.2}s"
    );
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_basis(rng: &mut impl Rng) -> MeasurementBasis {
    MeasurementBasis::bloch(
        rng.gen_range(0.0..std::f64::consts::PI),
        rng.gen_range(0.0..2.0 * std::f64::consts::PI),
    )
}

fn random_bell_diagonal(rng: &mut impl Rng) -> BellDiagonalState {
    let mut w = [0.0; 4];
    let mut sum = 0.0;
    for x in w.iter_mut() {
        *x = -rng.gen_range(1e-12f64..1.0).ln();
        sum += *x;
    }
    BellDiagonalState::new(w[0] / sum, w[1] / sum, w[2] / sum, w[3] / sum).unwrap()
}

/// Root of the optimal Werner rate in (0.25, 1).
fn threshold_fidelity() -> f64 {
    let mut lo = 0.25_f64;
    let mut hi = 1.0_f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if optimal_rate_werner(mid).unwrap() < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sign change of the cross-party CHSH pair rate.
fn boundary_fidelity() -> f64 {
    let mut lo = 0.85_f64;
    let mut hi = 0.95_f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if suboptimal_pair_rate(mid, 1, 1).unwrap() < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn criterion_01_threshold_fidelity() {
    let start = Instant::now();
    let f_th = threshold_fidelity();
    assert!(
        (f_th - 0.8107).abs() <= 5e-4,
        "threshold fidelity {f_th} not within 5e-4 of 0.8107"
    );
    report(1, "threshold fidelity", start, 1.0);
}

#[test]
fn criterion_02_boundary_fidelity() {
    let start = Instant::now();
    let f_bnd = boundary_fidelity();
    assert!(
        (f_bnd - 0.895).abs() <= 5e-3,
        "boundary fidelity {f_bnd} not within 5e-3 of 0.895"
    );
    report(2, "boundary fidelity", start, 5.0);
}

#[test]
fn criterion_03_strategy_crossover() {
    let start = Instant::now();
    let f_th = threshold_fidelity();
    let f_bnd = boundary_fidelity();

    // At eta = 1/16 both strategies keep only optimally paired cells for
    // F <= F_bnd, so their totals coincide.
    for i in 0..50 {
        let f = f_th + 1e-6 + (f_bnd - f_th - 1e-6) * (i as f64 + 1.0) / 50.0;
        let asym = strategy::asymmetric_optimal_rate(f, 0.0625).unwrap();
        let sym = strategy::symmetric_rate_best(f, 0.0625).unwrap();
        assert!(
            (asym - sym).abs() <= 1e-10,
            "F={f}: asym {asym} vs sym {sym}"
        );
    }

    // Below eta = 1/16 the symmetric strategy strictly dominates.
    let mut rng = rng(0xc3);
    for _ in 0..50 {
        let eta = rng.gen_range(1e-4..0.0624);
        let f = rng.gen_range(f_th + 1e-4..=1.0);
        let asym = strategy::asymmetric_optimal_rate(f, eta).unwrap();
        let sym = strategy::symmetric_rate_best(f, eta).unwrap();
        assert!(sym > asym, "eta={eta} F={f}: sym {sym} !> asym {asym}");
    }
    report(3, "strategy crossover", start, 10.0);
}

#[test]
fn criterion_04_capacity_attainment() {
    let start = Instant::now();
    let mut rng = rng(0xc4);
    for i in 0..20 {
        let f = 0.25 + 0.75 * i as f64 / 19.0;
        let rho = werner_from_fidelity(f).unwrap();
        let expected = optimal_rate_werner(f).unwrap();

        // Any basis paired with its conjugate attains the capacity.
        for _ in 0..200 {
            let ba = random_basis(&mut rng);
            let rate = devetak_winter_rate(&rho, &ba, &ba.conjugate()).rate;
            assert!(
                (rate - expected).abs() <= 1e-10,
                "F={f}: conjugate-pair rate {rate} vs {expected}"
            );
        }

        // The grid search gets there too, from below.
        let oracle = basis_grid_oracle(&rho, 24).unwrap().rate;
        assert!(
            (oracle - expected).abs() <= 1e-3,
            "F={f}: oracle {oracle} vs {expected}"
        );
        assert!(oracle <= expected + 1e-9);
    }
    report(4, "capacity attainment", start, 60.0);
}

#[test]
fn criterion_05_wasted_pairs() {
    let start = Instant::now();
    for i in 0..100 {
        let f = 0.25 + 0.75 * i as f64 / 99.0;
        for side in [Subsystem::A, Subsystem::B] {
            for (i, j) in [(1, 2), (2, 1)] {
                let rate = wasted_pair_rate(f, i, j, side).unwrap();
                assert!(rate <= 1e-10, "F={f} {side:?} ({i},{j}): rate {rate}");
            }
        }
    }
    report(5, "wasted pairs", start, 5.0);
}

#[test]
fn criterion_06_half_bound() {
    let start = Instant::now();
    for i in 0..1000 {
        let f = 0.25 + 0.75 * i as f64 / 999.0;
        let half_opt = 0.5 * optimal_rate_werner(f).unwrap().max(0.0);
        let sub = suboptimal_pair_rate(f, 1, 1).unwrap().max(0.0);
        assert!(half_opt >= sub, "F={f}: {half_opt} < {sub}");
    }
    report(6, "half bound", start, 5.0);
}

#[test]
fn criterion_07_reduced_form_equivalence() {
    let start = Instant::now();
    let mut rng = rng(0xc7);
    let comp = MeasurementBasis::computational();
    for _ in 0..1000 {
        let s = random_bell_diagonal(&mut rng);
        let rho = s.to_operator();
        let ba = random_basis(&mut rng);
        let bb = random_basis(&mut rng);
        let full = devetak_winter_rate(&rho, &ba, &bb).rate;
        let reduced = reduced_rate_bell_diagonal(&rho, &ba, &bb).unwrap();
        assert!((full - reduced).abs() <= 1e-10, "{full} vs {reduced}");

        // The computational-basis closed form 1 - S(rho).
        let closed = rate_bell_diagonal_computational(&s);
        let pipeline = devetak_winter_rate(&rho, &comp, &comp).rate;
        assert!((closed - pipeline).abs() <= 1e-10, "{closed} vs {pipeline}");
    }
    report(7, "reduced-form equivalence", start, 30.0);
}

#[test]
fn criterion_08_distillation_recursions() {
    let start = Instant::now();

    // Twirled protocol against its published Werner recursion.
    for i in 0..100 {
        let f = 0.25 + 0.75 * i as f64 / 99.0;
        let input = WernerState::new(f).unwrap().coefficients();
        let x = (1.0 - f) / 3.0;
        let p = f * f + 2.0 * f * x + 5.0 * x * x;
        let f_next = (f * f + x * x) / p;
        let step = distill_step(&input, ProtocolKind::bbpssw()).unwrap();
        assert!((step.output.fidelity() - f_next).abs() <= 1e-10);
        assert!((step.success_probability - p).abs() <= 1e-10);
    }

    // Rotated protocol against its published coefficient recursion.
    for i in 0..100 {
        let f = 0.25 + 0.75 * i as f64 / 99.0;
        let input = WernerState::new(f).unwrap().coefficients();
        let [a, b, c, d] = input.coefficients();
        let n = (a + b) * (a + b) + (c + d) * (c + d);
        let expected = [
            (a * a + b * b) / n,
            2.0 * c * d / n,
            (c * c + d * d) / n,
            2.0 * a * b / n,
        ];
        let step = distill_step(&input, ProtocolKind::dejmps()).unwrap();
        assert!((step.success_probability - n).abs() <= 1e-10);
        for (got, want) in step.output.coefficients().into_iter().zip(expected) {
            assert!((got - want).abs() <= 1e-10);
        }
    }

    // Strict fidelity gain on the distillable open interval.
    for protocol in [ProtocolKind::bbpssw(), ProtocolKind::dejmps()] {
        for i in 0..100 {
            let f = 0.5 + 0.5 * (i as f64 + 1.0) / 102.0;
            let input = WernerState::new(f).unwrap().coefficients();
            let step = distill_step(&input, protocol).unwrap();
            assert!(
                step.output.fidelity() > f,
                "{protocol:?} F={f}: {} not above input",
                step.output.fidelity()
            );
        }
    }
    report(8, "distillation recursions", start, 10.0);
}

#[test]
fn criterion_09_bounded_depth_search() {
    let start = Instant::now();
    let mut rng = rng(0xc9);
    let strategies = [StrategyKind::AsymmetricOptimal, StrategyKind::Symmetric];
    for trial in 0..200 {
        let f0 = if trial % 4 == 0 {
            rng.gen_range(0.26..0.5)
        } else {
            rng.gen_range(0.55..1.0)
        };
        let eta0 = rng.gen_range(0.001..0.2);
        let protocol = if rng.gen() {
            ProtocolKind::bbpssw()
        } else {
            ProtocolKind::dejmps()
        };
        let strategy = &strategies[rng.gen_range(0..2)];
        let eta_mode = if rng.gen() {
            EtaMode::Fixed(eta0)
        } else {
            EtaMode::Scaled(eta0 * 0.5)
        };

        let result = kopt::find_k_opt(f0, protocol, strategy, eta_mode, 30).unwrap();
        assert!(!result.saturated, "saturated curve at f0={f0}");

        let curve = kopt::rate_curve(f0, protocol, strategy, eta_mode, 30).unwrap();
        let mut k_ex = 0u32;
        let mut r_ex = curve[0].r_total;
        for p in &curve {
            if p.r_total > r_ex {
                k_ex = p.k;
                r_ex = p.r_total;
            }
        }
        assert_eq!(
            result.k_opt, k_ex,
            "f0={f0} eta0={eta0} {protocol:?}: bounded {} vs exhaustive {k_ex}",
            result.k_opt
        );
        assert!((result.rate - r_ex).abs() <= 1e-15);

        // The window bounds must contain any strictly better optimum.
        if !result.no_key {
            let r_loc = curve[result.k_loc as usize].r_total;
            if r_ex > r_loc {
                assert!(k_ex != result.k_loc + 1, "optimum in the excluded gap");
                assert!(
                    k_ex <= result.k_loc + result.kappa,
                    "optimum {k_ex} beyond k_loc {} + kappa {}",
                    result.k_loc,
                    result.kappa
                );
            }
        }
    }
    report(9, "bounded depth search", start, 120.0);
}

#[test]
fn criterion_10_region_map_shape() {
    let start = Instant::now();
    let f_th = threshold_fidelity();
    let f_bnd = boundary_fidelity();

    let points = strategy::region_map((0.005, 0.12), (0.75, 1.0), 200).unwrap();
    let mut csv = Vec::new();
    strategy::write_region_csv(&points, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();

    // Work from the serialized rows, as emitted.
    let mut rows: Vec<(f64, f64, String)> = Vec::new();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        rows.push((
            fields[0].parse().unwrap(),
            fields[1].parse().unwrap(),
            fields[4].to_string(),
        ));
    }
    assert_eq!(rows.len(), 200 * 200);

    let eta_step = (0.12 - 0.005) / 199.0;

    // (a) Vertical no-key band below the threshold fidelity, and key
    // everywhere above it.
    for &(eta, f, ref label) in &rows {
        if f < f_th {
            assert_eq!(label, "nokey", "eta={eta} F={f} labeled {label}");
        } else {
            assert_ne!(label, "nokey", "eta={eta} F={f} labeled {label}");
        }
    }

    // Boundary column per fidelity row: largest eta still labeled sym.
    let mut fs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    fs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    fs.dedup();
    let boundary = |f: f64| -> Option<f64> {
        rows.iter()
            .filter(|r| r.1 == f && r.2 == "sym")
            .map(|r| r.0)
            .fold(None, |acc: Option<f64>, eta| {
                Some(acc.map_or(eta, |a| a.max(eta)))
            })
    };

    // (b) For F between the threshold and boundary fidelities the
    // strategies swap at eta = 1/16, up to one grid step.
    for &f in fs.iter().filter(|&&f| f > f_th && f <= f_bnd) {
        let b = boundary(f).expect("symmetric region must exist");
        assert!(
            (b - 0.0625).abs() <= eta_step,
            "F={f}: boundary {b} not at 0.0625"
        );
        // Everything beyond the crossover is asymmetric.
        for r in rows.iter().filter(|r| r.1 == f && r.0 > b + 1e-15) {
            assert_eq!(r.2, "asym");
        }
    }

    // (c) Above the boundary fidelity the crossover moves to larger eta
    // monotonically and visibly exceeds 1/16.
    let mut last = 0.0625 - eta_step;
    for &f in fs.iter().filter(|&&f| f > f_bnd) {
        let b = boundary(f).expect("symmetric region must exist");
        assert!(
            b >= last - 1e-15,
            "F={f}: boundary {b} dropped below {last}"
        );
        last = b;
    }
    assert!(
        last > 0.0625 + eta_step,
        "boundary never bent upward: {last}"
    );

    report(10, "region map shape", start, 60.0);
}
