//! End-to-end acceptance suite. Each test covers one numbered criterion and
//! prints a single `PASS`/`FAIL` line (visible with `--nocapture`, and in
//! the failure report otherwise).

mod common;

use std::sync::Mutex;
use std::time::Instant;

use rand::Rng;
use unmix::bench::{run_benchmark, BenchOptions, SolverId};
use unmix::csunsal::{CsunsalRun, CsunsalWorkspace};
use unmix::datagen::{self, NoiseKind, SynthesisSpec};
use unmix::linalg::DenseVector;
use unmix::model::objective;
use unmix::oracles;
use unmix::prox::{project_ball, soft_threshold, soft_threshold_nonneg, Ball};
use unmix::sunsal::{self, SunsalRun, SunsalWorkspace};
use unmix::{ProblemKind, SolverConfig};

/// Serializes the wall-clock-sensitive criteria so concurrent tests do not
/// distort their timings.
static TIMING_GATE: Mutex<()> = Mutex::new(());

fn report(id: u32, name: &str, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("[acceptance] criterion {id:02} {name}: {verdict} ({detail})");
    assert!(ok, "criterion {id:02} {name} failed: {detail}");
}

#[test]
fn criterion_01_cls_matches_active_set_oracle() {
    let t0 = Instant::now();
    let mut hits = 0;
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let lib = datagen::gaussian_library(20, 10, seed).unwrap();
        let x_true = datagen::sparse_simplex_abundance(10, 4, 1000 + seed).unwrap();
        let y = lib.matrix().matvec(&x_true).unwrap();
        let cfg = SolverConfig::new(ProblemKind::Cls)
            .with_mu(0.01)
            .with_max_iters(1000);
        let res = sunsal::solve(&lib, &y, &cfg).unwrap();
        let oracle = oracles::fcls(
            lib.matrix(),
            &y,
            oracles::fcls_default_weight(lib.matrix()),
        )
        .unwrap();
        let gap = res.abundances.sub(&oracle).norm_inf();
        worst = worst.max(gap);
        if gap <= 1e-4 {
            hits += 1;
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    report(
        1,
        "cls-oracle-equivalence",
        hits >= 48 && elapsed < 10.0,
        &format!("{hits}/50 within 1e-4 (worst gap {worst:.2e}), {elapsed:.2}s"),
    );
}

#[test]
fn criterion_02_per_iteration_feasibility() {
    let mut rng = common::rng(201);
    let mut checked = 0usize;
    for case in 0..100 {
        let k = rng.gen_range(5..15);
        let n = rng.gen_range(3..10);
        let lib = common::random_library(&mut rng, k, n);
        let y = common::random_vector(&mut rng, k);
        if case % 2 == 0 {
            let lambda = rng.gen_range(0.0..0.1);
            let cfg = SolverConfig::new(ProblemKind::Csr).with_lambda(lambda);
            let ws = SunsalWorkspace::prepare(&lib, &y, &cfg).unwrap();
            let mut run = SunsalRun::new(&ws, &lib, &y, &cfg).unwrap();
            for _ in 0..60 {
                run.step().unwrap();
                let s = run.state();
                assert!((s.x.sum() - 1.0).abs() <= 1e-12, "case {case}: ASC broken");
                assert!(s.u.min() >= 0.0, "case {case}: ANC broken");
                checked += 1;
            }
        } else {
            let delta = rng.gen_range(1e-3..0.5);
            let cfg = SolverConfig::new(ProblemKind::Cbpdn).with_delta(delta);
            let ws = CsunsalWorkspace::prepare(&lib, &cfg).unwrap();
            let mut run = CsunsalRun::new(&ws, &lib, &y, &cfg).unwrap();
            for _ in 0..60 {
                run.step().unwrap();
                let s = run.state();
                assert!((s.x.sum() - 1.0).abs() <= 1e-12, "case {case}: ASC broken");
                assert!(s.u2.min() >= 0.0, "case {case}: ANC broken");
                assert!(
                    s.u1.dist2(&y) <= delta * (1.0 + 1e-12),
                    "case {case}: ball constraint broken"
                );
                checked += 1;
            }
        }
    }
    report(
        2,
        "per-iteration-feasibility",
        true,
        &format!("{checked} iterates over 100 solves"),
    );
}

#[test]
fn criterion_03_x_update_kkt() {
    let mut rng = common::rng(303);
    let mut worst_std = 0.0f64;
    let mut worst_sum = 0.0f64;
    for case in 0..1000 {
        let k = rng.gen_range(3..=10);
        let n = rng.gen_range(2..=8);
        let lib = common::random_library(&mut rng, k, n);
        let y = common::random_vector(&mut rng, k);
        let mu = 10f64.powf(rng.gen_range(-3.0..1.0));
        let cfg = SolverConfig::new(ProblemKind::Csr).with_mu(mu);
        let ws = SunsalWorkspace::prepare(&lib, &y, &cfg).unwrap();
        let u = common::random_vector(&mut rng, n);
        let d = common::random_vector(&mut rng, n);
        let x = sunsal::x_update(&ws, &u, &d, mu).unwrap();

        let mut w = lib.matrix().matvec_t(&y).unwrap();
        for i in 0..n {
            w[i] += mu * (u[i] + d[i]);
        }
        let b = lib.matrix().gram_plus_diag(mu);
        // Stationarity on the sum-constrained subspace: Bx − w = ν·1, so
        // the residual must be a constant vector.
        let r = b.matvec(&x).unwrap().sub(&w);
        let mean = r.sum() / n as f64;
        let var = r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        let bound = 1e-8 * (1.0 + w.norm_inf());
        worst_std = worst_std.max(std / bound);
        assert!(std <= bound, "case {case}: stddev {std:.2e} > {bound:.2e}");
        let sum_gap = (x.sum() - 1.0).abs();
        worst_sum = worst_sum.max(sum_gap);
        assert!(sum_gap <= 1e-12, "case {case}: sum gap {sum_gap:.2e}");

        // Independent elimination-based reference for the same QP.
        let x_ref = common::simplex_qp_kkt(&b, &w);
        let gap = x.sub(&x_ref).norm_inf();
        assert!(
            gap <= 1e-6 * (1.0 + x_ref.norm_inf()),
            "case {case}: x vs KKT reference gap {gap:.2e}"
        );
    }
    report(
        3,
        "x-update-kkt",
        true,
        &format!("1000 cases, worst stddev {worst_std:.2e}x bound, worst sum gap {worst_sum:.2e}"),
    );
}

#[test]
fn criterion_04_cbp_equals_cbpdn_with_zero_delta() {
    let mut rng = common::rng(404);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let k = rng.gen_range(6..12);
        let n = rng.gen_range(4..10);
        let lib = common::random_library(&mut rng, k, n);
        let x_true = common::random_sparse_simplex(&mut rng, n, 3.min(n));
        let y = lib.matrix().matvec(&x_true).unwrap();

        let cfg_cbp = SolverConfig::new(ProblemKind::Cbp);
        let cfg_dn = SolverConfig::new(ProblemKind::Cbpdn).with_delta(0.0);
        let ws_cbp = CsunsalWorkspace::prepare(&lib, &cfg_cbp).unwrap();
        let ws_dn = CsunsalWorkspace::prepare(&lib, &cfg_dn).unwrap();
        let mut run_cbp = CsunsalRun::new(&ws_cbp, &lib, &y, &cfg_cbp).unwrap();
        let mut run_dn = CsunsalRun::new(&ws_dn, &lib, &y, &cfg_dn).unwrap();
        for it in 0..100 {
            run_cbp.step().unwrap();
            run_dn.step().unwrap();
            let (a, b) = (run_cbp.state(), run_dn.state());
            let gap = a
                .x
                .sub(&b.x)
                .norm_inf()
                .max(a.u1.sub(&b.u1).norm_inf())
                .max(a.d1.sub(&b.d1).norm_inf())
                .max(a.u2.sub(&b.u2).norm_inf())
                .max(a.d2.sub(&b.d2).norm_inf());
            worst = worst.max(gap);
            assert!(gap <= 1e-14, "case {case} iter {it}: iterate gap {gap:.2e}");
        }
    }
    report(
        4,
        "cbp-equals-cbpdn-at-zero-delta",
        true,
        &format!("20 instances x 100 iterations, worst gap {worst:.2e}"),
    );
}

#[test]
fn criterion_05_small_instance_csr_optimality() {
    let mut rng = common::rng(505);
    let mut worst_rel = 0.0f64;
    for case in 0..100 {
        let n = 2 + (case % 2);
        let k = rng.gen_range(4..10);
        let lib = common::random_library(&mut rng, k, n);
        let x_true = common::random_simplex(&mut rng, n);
        let noise = common::random_vector(&mut rng, k).scale(0.05);
        let y = lib.matrix().matvec(&x_true).unwrap().add(&noise);
        let lambda = rng.gen_range(0.0..0.05);

        let cfg = SolverConfig::new(ProblemKind::Csr)
            .with_lambda(lambda)
            .with_primal_tol(1e-10)
            .with_max_iters(100_000);
        let res = sunsal::solve(&lib, &y, &cfg).unwrap();
        let obj_solver = objective(&lib, &y, &cfg, &res.abundances).unwrap();

        let step = 1e-3;
        let x_grid = oracles::grid_csr(lib.matrix(), &y, lambda, step).unwrap();
        let obj_grid = objective(&lib, &y, &cfg, &x_grid).unwrap();

        // Generous Lipschitz bound of the objective over the simplex.
        let frob: f64 = lib.matrix().entries().iter().map(|v| v * v).sum::<f64>().sqrt();
        let lip = frob * (frob + y.norm2()) + lambda * n as f64;
        let tol = lip * step + 1e-12;
        let gap = (obj_solver - obj_grid).abs();
        worst_rel = worst_rel.max(gap / tol);
        assert!(
            gap <= tol,
            "case {case}: objective gap {gap:.3e} > {tol:.3e}"
        );
    }
    report(
        5,
        "small-instance-csr-optimality",
        true,
        &format!("100 cases, worst gap {worst_rel:.2e}x the Lipschitz*step budget"),
    );
}

#[test]
fn criterion_06_benchmark_trend() {
    let _gate = TIMING_GATE.lock().unwrap_or_else(|e| e.into_inner());
    let t0 = Instant::now();
    let snrs = [20.0, 30.0, 40.0, 50.0];
    let grid: Vec<SynthesisSpec> = snrs
        .iter()
        .map(|&snr| SynthesisSpec {
            k: 200,
            n: 400,
            s: 5,
            target_snr_db: snr,
            noise_kind: NoiseKind::Lowpass,
            lowpass_window: 9,
            seed: 0,
        })
        .collect();
    let opts = BenchOptions {
        runs: 10,
        solvers: vec![SolverId::Sunsal, SolverId::Oracle],
        ..Default::default()
    };
    let report_data = run_benchmark(&grid, &opts).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();

    let mean = |solver: &str, snr: f64| -> f64 {
        report_data
            .rows
            .iter()
            .find(|r| r.solver == solver && r.snr_db == snr)
            .unwrap_or_else(|| panic!("missing {solver} row at {snr} dB"))
            .mean_rsnr_db
    };
    let sunsal: Vec<f64> = snrs.iter().map(|&s| mean("sunsal", s)).collect();
    let oracle: Vec<f64> = snrs.iter().map(|&s| mean("oracle", s)).collect();

    let increasing = sunsal.windows(2).all(|w| w[1] > w[0]);
    let floors = sunsal[1] >= 25.0 && sunsal[3] >= 40.0;
    let beats_baseline = sunsal.iter().zip(&oracle).all(|(s, o)| s >= o);
    let in_time = elapsed <= 300.0;
    report(
        6,
        "benchmark-trend",
        increasing && floors && beats_baseline && in_time,
        &format!(
            "sunsal RSNR {sunsal:.1?} vs baseline {oracle:.1?} dB at {snrs:?} dB SNR, {elapsed:.1}s"
        ),
    );
}

#[test]
fn criterion_07_speed_ratio_vs_oracle() {
    let _gate = TIMING_GATE.lock().unwrap_or_else(|e| e.into_inner());
    let spec = SynthesisSpec {
        k: 200,
        n: 400,
        s: 5,
        target_snr_db: 30.0,
        noise_kind: NoiseKind::Lowpass,
        lowpass_window: 9,
        seed: 7,
    };
    let lib = spec.build_library().unwrap();
    let runs: Vec<_> = (0..5).map(|r| spec.realize(&lib, r).unwrap()).collect();
    let cfg = SolverConfig::new(ProblemKind::Csr)
        .with_lambda(1e-3)
        .with_max_iters(200);
    let ws0 = SunsalWorkspace::prepare(&lib, &runs[0].y_noisy, &cfg).unwrap();

    let t = Instant::now();
    for r in &runs {
        let ws = ws0.with_observation(&lib, &r.y_noisy).unwrap();
        sunsal::solve_with_workspace(&ws, &lib, &r.y_noisy, &cfg).unwrap();
    }
    let sunsal_per_solve = t.elapsed().as_secs_f64() / runs.len() as f64;

    let t = Instant::now();
    oracles::fcls(
        lib.matrix(),
        &runs[0].y_noisy,
        oracles::fcls_default_weight(lib.matrix()),
    )
    .unwrap();
    let oracle_per_solve = t.elapsed().as_secs_f64();

    let ratio = oracle_per_solve / sunsal_per_solve;
    report(
        7,
        "speed-ratio-vs-oracle",
        ratio >= 10.0,
        &format!(
            "sunsal {sunsal_per_solve:.4}s vs oracle {oracle_per_solve:.3}s per solve, {ratio:.1}x"
        ),
    );
}

#[test]
fn criterion_08_per_iteration_scaling() {
    let _gate = TIMING_GATE.lock().unwrap_or_else(|e| e.into_inner());
    let cfg = SolverConfig::new(ProblemKind::Csr).with_lambda(1e-3);
    let iters = 100;
    let time_per_iter = |n: usize| -> f64 {
        let lib = datagen::gaussian_library(200, n, 42).unwrap();
        let x_true = datagen::sparse_simplex_abundance(n, 5, 43).unwrap();
        let y = lib.matrix().matvec(&x_true).unwrap();
        let ws = SunsalWorkspace::prepare(&lib, &y, &cfg).unwrap();
        // Best of three repetitions to damp scheduler noise.
        (0..3)
            .map(|_| {
                let mut run = SunsalRun::new(&ws, &lib, &y, &cfg).unwrap();
                let t = Instant::now();
                for _ in 0..iters {
                    run.step().unwrap();
                }
                t.elapsed().as_secs_f64() / iters as f64
            })
            .fold(f64::INFINITY, f64::min)
    };
    let t200 = time_per_iter(200);
    let t400 = time_per_iter(400);
    let t800 = time_per_iter(800);
    let r1 = t400 / t200;
    let r2 = t800 / t400;
    report(
        8,
        "per-iteration-scaling",
        r1 <= 5.0 && r2 <= 5.0,
        &format!(
            "per-iter {:.1}us -> {:.1}us -> {:.1}us (x{r1:.2}, x{r2:.2} per doubling)",
            t200 * 1e6,
            t400 * 1e6,
            t800 * 1e6
        ),
    );
}

#[test]
fn criterion_09_prox_property_suite() {
    let mut rng = common::rng(909);
    let mut checks = 0usize;
    let mut failures = 0usize;
    let mut by_property = [0usize; 4];
    let grid_prox = |val: f64, tau: f64, nonneg: bool| -> f64 {
        let step = 1e-4;
        let lo = if nonneg { 0.0 } else { -3.0 };
        let mut best = (f64::INFINITY, 0.0);
        let mut u = lo;
        while u <= 3.0 {
            let obj = 0.5 * (u - val) * (u - val) + tau * u.abs();
            if obj < best.0 {
                best = (obj, u);
            }
            u += step;
        }
        best.1
    };
    for _ in 0..2500 {
        let n = rng.gen_range(1..6);
        let a = common::random_vector(&mut rng, n).scale(3.0);
        let b = common::random_vector(&mut rng, n).scale(3.0);
        let tau = rng.gen_range(0.0..2.0);
        let center = common::random_vector(&mut rng, n);
        let radius = rng.gen_range(0.0..2.0);
        let ball = Ball::new(&center, radius).unwrap();

        // 1. Nonexpansiveness of all three operators.
        let dist = a.dist2(&b) + 1e-12;
        let ok = soft_threshold(&a, tau)
            .unwrap()
            .dist2(&soft_threshold(&b, tau).unwrap())
            <= dist
            && soft_threshold_nonneg(&a, tau)
                .unwrap()
                .dist2(&soft_threshold_nonneg(&b, tau).unwrap())
                <= dist
            && project_ball(&a, &ball)
                .unwrap()
                .dist2(&project_ball(&b, &ball).unwrap())
                <= dist;
        checks += 1;
        failures += usize::from(!ok);
        by_property[0] += usize::from(!ok);

        // 2. Projection idempotence, bitwise.
        let p = project_ball(&a, &ball).unwrap();
        let pp = project_ball(&p, &ball).unwrap();
        let ok = p
            .iter()
            .zip(pp.iter())
            .all(|(x, y)| x.to_bits() == y.to_bits());
        checks += 1;
        failures += usize::from(!ok);
        by_property[1] += usize::from(!ok);

        // 3. Ball membership of the projection. The absolute term covers
        // re-measuring ‖p−c‖ for radii below the rounding floor of points
        // stored near the center.
        let ok = p.dist2(&center) <= radius * (1.0 + 1e-12) + 1e-14 * (1.0 + center.norm2());
        checks += 1;
        failures += usize::from(!ok);
        by_property[2] += usize::from(!ok);

        // 4. 1-D grid-oracle agreement of both thresholds.
        let v = rng.gen_range(-2.0..2.0);
        let t1 = rng.gen_range(0.0..1.0);
        let one = DenseVector::new(vec![v]).unwrap();
        let soft = soft_threshold(&one, t1).unwrap()[0];
        let soft_nn = soft_threshold_nonneg(&one, t1).unwrap()[0];
        let ok = (soft - grid_prox(v, t1, false)).abs() <= 2e-4
            && (soft_nn - grid_prox(v, t1, true)).abs() <= 2e-4;
        checks += 1;
        failures += usize::from(!ok);
        by_property[3] += usize::from(!ok);
    }
    report(
        9,
        "prox-property-suite",
        checks == 10_000 && failures == 0,
        &format!("{failures} failures in {checks} checks, by property {by_property:?}"),
    );
}

#[test]
fn criterion_10_determinism() {
    let spec = SynthesisSpec {
        k: 60,
        n: 40,
        s: 4,
        target_snr_db: 30.0,
        noise_kind: NoiseKind::Lowpass,
        lowpass_window: 9,
        seed: 99,
    };
    let a = spec.synthesize().unwrap();
    let b = spec.synthesize().unwrap();
    let bits = |v: &DenseVector<f64>| -> Vec<u64> { v.iter().map(|x| x.to_bits()).collect() };
    let synth_ok = a
        .library
        .matrix()
        .entries()
        .iter()
        .zip(b.library.matrix().entries())
        .all(|(x, y)| x.to_bits() == y.to_bits())
        && bits(&a.x_true) == bits(&b.x_true)
        && bits(&a.y_noisy) == bits(&b.y_noisy)
        && a.realized_snr_db.to_bits() == b.realized_snr_db.to_bits();

    let grid = vec![
        SynthesisSpec {
            target_snr_db: 25.0,
            ..spec.clone()
        },
        SynthesisSpec {
            target_snr_db: 45.0,
            ..spec.clone()
        },
    ];
    let opts = BenchOptions {
        runs: 3,
        iters: 60,
        ..Default::default()
    };
    let r1 = run_benchmark(&grid, &opts).unwrap();
    let r2 = run_benchmark(&grid, &opts).unwrap();
    let bench_ok = r1.rows.len() == r2.rows.len()
        && r1.rows.iter().zip(&r2.rows).all(|(x, y)| {
            x.solver == y.solver
                && x.snr_db.to_bits() == y.snr_db.to_bits()
                && x.mean_rsnr_db.to_bits() == y.mean_rsnr_db.to_bits()
                && x.lambda.to_bits() == y.lambda.to_bits()
                && x.delta.to_bits() == y.delta.to_bits()
                && x.per_run_rsnr_db
                    .iter()
                    .zip(&y.per_run_rsnr_db)
                    .all(|(p, q)| p.to_bits() == q.to_bits())
        });
    report(
        10,
        "determinism",
        synth_ok && bench_ok,
        &format!("synth bit-identical: {synth_ok}, bench bit-identical: {bench_ok}"),
    );
}
