//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Tolerances are fixed here and not tuned per run.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use isowiener::algorithms::{
    classical_mc_avg_error, empirical_app_error, empirical_haber_error, haber_avg_error, linear_rule_avg_error,
    n_app_for_epsilon, n_int_for_epsilon, pc_avg_error, pc_avg_error_exact_sum, QuadratureRule,
};
use isowiener::constants::{c_app, c_int, mc_cross_check};
use isowiener::experiments::{complexity_curve, fit_error_rows, halving_sequence, rate_study, Problem, StudyOptions};
use isowiener::kernel::{covariance_matrix, kernel_double_integral};
use isowiener::sampler::{sample_field, FieldSampler};
use isowiener::{CubePartition, Point, RngStream};

const SIGMAS: f64 = 4.0;
const APP_ALLOWANCE: f64 = 0.02;
const EXACT_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-8;
const SLOPE_TOL_INT: f64 = 0.05;
const SLOPE_TOL_APP: f64 = 0.1;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>, failures: &mut Vec<String>) -> bool {
    if !ok {
        failures.push(detail.into());
    }
    ok
}

fn finish(failures: Vec<String>, summary: String) -> Outcome {
    if failures.is_empty() {
        Outcome { ok: true, detail: summary }
    } else {
        Outcome {
            ok: false,
            detail: failures.join("; "),
        }
    }
}

fn pt(c: &[f64]) -> Point {
    Point::new(c.to_vec()).unwrap()
}

fn within_budget(start: Instant, budget: Duration, f: &mut Vec<String>) {
    let took = start.elapsed();
    check(took < budget, format!("runtime {took:?} exceeds {budget:?}"), f);
}

fn c1_haber_one_dim() -> Outcome {
    let start = Instant::now();
    let mut f = Vec::new();
    let mut parts = Vec::new();
    for p in [1usize, 2, 4] {
        let est = empirical_haber_error(1, p, 500, &RngStream::new(1001, p as u64), 32).unwrap();
        let target = (1.0f64 / 6.0).sqrt() / p as f64;
        let dev = (est.value - target).abs();
        check(
            dev <= SIGMAS * est.stderr,
            format!("p={p}: empirical {:.6} vs {target:.6}, |dev| {dev:.2e} > 4·{:.2e}", est.value, est.stderr),
            &mut f,
        );
        parts.push(format!("p={p} {:.5}/{target:.5} ({:.1}σ)", est.value, dev / est.stderr));
    }
    within_budget(start, Duration::from_secs(60), &mut f);
    finish(f, parts.join(", "))
}

fn c2_app_one_dim() -> Outcome {
    let start = Instant::now();
    let mut f = Vec::new();
    let mut parts = Vec::new();
    for p in [1usize, 2, 4] {
        let est = empirical_app_error(1, p, 64, 400, &RngStream::new(1002, p as u64)).unwrap();
        let target = 0.5 / (p as f64).sqrt();
        let dev = (est.value - target).abs();
        check(
            dev <= SIGMAS * est.stderr + APP_ALLOWANCE,
            format!("p={p}: empirical {:.6} vs {target:.6}", est.value),
            &mut f,
        );
        parts.push(format!("p={p} {:.5}/{target:.5}", est.value));
    }
    within_budget(start, Duration::from_secs(120), &mut f);
    finish(f, parts.join(", "))
}

fn c3_two_dim() -> Outcome {
    let start = Instant::now();
    let mut f = Vec::new();
    let mut parts = Vec::new();
    let (ci, ca) = (c_int(2, 32).unwrap(), c_app(2, 32).unwrap());
    let mc = mc_cross_check(2, 10_000_000, &mut RngStream::new(1003, 0)).unwrap();
    check(
        (mc.estimate_int - ci).abs() <= SIGMAS * mc.stderr_int,
        format!("c_int(2) {ci:.8} vs MC {:.8} ± {:.1e}", mc.estimate_int, mc.stderr_int),
        &mut f,
    );
    check(
        (mc.estimate_app - ca).abs() <= SIGMAS * mc.stderr_app,
        format!("c_app(2) {ca:.8} vs MC {:.8} ± {:.1e}", mc.estimate_app, mc.stderr_app),
        &mut f,
    );
    parts.push(format!("c_int {ci:.7}, c_app {ca:.7}"));
    for p in [1usize, 2, 3] {
        let n = (p * p) as f64;
        let est = empirical_haber_error(2, p, 500, &RngStream::new(1004, p as u64), 32).unwrap();
        let target = ci.sqrt() / n.powf(0.75);
        check(
            (est.value - target).abs() <= SIGMAS * est.stderr,
            format!("Int p={p}: {:.6} vs {target:.6} (se {:.1e})", est.value, est.stderr),
            &mut f,
        );
        let est_app = empirical_app_error(2, p, 8 * p, 400, &RngStream::new(1005, p as u64)).unwrap();
        let target_app = ca.sqrt() / n.powf(0.25);
        check(
            (est_app.value - target_app).abs() <= SIGMAS * est_app.stderr + APP_ALLOWANCE,
            format!("App p={p}: {:.6} vs {target_app:.6}", est_app.value),
            &mut f,
        );
        parts.push(format!("p={p} int {:.5}/{target:.5} app {:.5}/{target_app:.5}", est.value, est_app.value));
    }
    within_budget(start, Duration::from_secs(300), &mut f);
    finish(f, parts.join(", "))
}

fn c4_exponents() -> Outcome {
    let mut f = Vec::new();
    let mut worst = 0.0f64;
    for d in 1..=4usize {
        for problem in [Problem::Int, Problem::App] {
            let rows: Vec<(usize, f64)> = (1..=8usize)
                .map(|p| (p.pow(d as u32), problem.analytic_error(d, p).unwrap()))
                .collect();
            let slope = fit_error_rows(&rows).unwrap().slope;
            let expected = match problem {
                Problem::Int => -(0.5 + 1.0 / (2.0 * d as f64)),
                Problem::App => -1.0 / (2.0 * d as f64),
            };
            worst = worst.max((slope - expected).abs());
            check(
                (slope - expected).abs() <= EXACT_TOL,
                format!("{problem} d={d}: slope {slope} vs {expected}"),
                &mut f,
            );
        }
    }
    finish(f, format!("max slope deviation {worst:.1e}"))
}

fn c5_mc_ratio() -> Outcome {
    let mut f = Vec::new();
    let mut worst = 0.0f64;
    for d in 1..=3usize {
        for p in [2usize, 3, 4] {
            let n = p.pow(d as u32);
            let ratio = classical_mc_avg_error(d, n).unwrap() / haber_avg_error(d, p).unwrap();
            let expected = (n as f64).powf(1.0 / (2.0 * d as f64));
            worst = worst.max((ratio - expected).abs());
            check(
                (ratio - expected).abs() <= EXACT_TOL,
                format!("d={d} p={p}: ratio {ratio} vs {expected}"),
                &mut f,
            );
        }
    }
    finish(f, format!("max ratio deviation {worst:.1e}"))
}

fn c6_complexity() -> Outcome {
    let start = Instant::now();
    let mut f = Vec::new();
    let mut parts = Vec::new();
    let eps = halving_sequence(0.05, 0.003);
    for d in 1..=2usize {
        for (problem, tol) in [(Problem::Int, SLOPE_TOL_INT), (Problem::App, SLOPE_TOL_APP)] {
            let curve = complexity_curve(problem, d, &eps).unwrap();
            let slope = curve.exponent_fit().unwrap().slope;
            let expected = problem.complexity_exponent(d);
            check(
                (slope - expected).abs() <= tol,
                format!("{problem} d={d}: slope {slope:.4} vs {expected:.4} ± {tol}"),
                &mut f,
            );
            for r in &curve.rows {
                check(
                    r.achieved_error <= r.epsilon,
                    format!("{problem} d={d} ε={}: achieved {} > ε", r.epsilon, r.achieved_error),
                    &mut f,
                );
            }
            parts.push(format!("{problem} d={d} {slope:.3}/{expected:.3}"));
        }
    }
    within_budget(start, Duration::from_secs(10), &mut f);
    finish(f, parts.join(", "))
}

fn c7_oracles() -> Outcome {
    let mut f = Vec::new();
    let mut worst = 0.0f64;
    for d in 1..=3usize {
        for p in 1..=4usize {
            let a = pc_avg_error_exact_sum(&CubePartition::new(d, p).unwrap(), 32).unwrap();
            let b = pc_avg_error(d, p).unwrap();
            worst = worst.max((a - b).abs());
            check((a - b).abs() <= ORACLE_TOL, format!("pc d={d} p={p}: {a} vs {b}"), &mut f);
        }
        let e = linear_rule_avg_error(&QuadratureRule::empty(d), 32).unwrap();
        let kdi = kernel_double_integral(d).unwrap();
        check(
            (e * e - kdi).abs() <= ORACLE_TOL,
            format!("empty rule d={d}: {} vs {kdi}", e * e),
            &mut f,
        );
    }
    let k1 = kernel_double_integral(1).unwrap();
    check((k1 - 1.0 / 3.0).abs() <= EXACT_TOL, format!("∫∫K d=1: {k1}"), &mut f);
    finish(f, format!("max exact-sum deviation {worst:.1e}"))
}

fn c8_sampler() -> Outcome {
    let mut f = Vec::new();
    // 10-point empirical covariance, d = 2
    let mut rng = RngStream::new(1008, 0);
    let pts: Vec<Point> = (0..10).map(|_| pt(&[rng.uniform(), rng.uniform()])).collect();
    let cov = covariance_matrix(&pts).unwrap();
    let sampler = FieldSampler::new(pts).unwrap();
    let draws = 20_000usize;
    let base = RngStream::new(1009, 0);
    let mut acc = vec![0.0; 100];
    for r in 0..draws {
        let v = sampler.draw_values(&mut base.split(r as u64));
        for i in 0..10 {
            for j in 0..=i {
                acc[i * 10 + j] += v[i] * v[j];
            }
        }
    }
    let mut worst_z = 0.0f64;
    for i in 0..10 {
        for j in 0..=i {
            let s = cov.entry(i, j);
            let se = ((cov.entry(i, i) * cov.entry(j, j) + s * s) / draws as f64).sqrt();
            let z = (acc[i * 10 + j] / draws as f64 - s).abs() / se;
            worst_z = worst_z.max(z);
            check(z <= SIGMAS, format!("cov ({i},{j}) off by {z:.2}σ"), &mut f);
        }
    }
    // d = 1 covariance is min(x, y)
    let grid: Vec<Point> = (0..=10).map(|k| pt(&[k as f64 / 10.0])).collect();
    let c1 = covariance_matrix(&grid).unwrap();
    for i in 0..=10 {
        for j in 0..=10 {
            let m = (i.min(j)) as f64 / 10.0;
            check((c1.entry(i, j) - m).abs() <= 1e-15, format!("d=1 K({i},{j}) ≠ min"), &mut f);
        }
    }
    // origin
    let mut r0 = RngStream::new(1010, 0);
    for _ in 0..100 {
        let s = sample_field(&[pt(&[0.0, 0.0]), pt(&[0.4, 0.7])], &mut r0).unwrap();
        check(s.values[0] == 0.0, format!("f(origin) = {}", s.values[0]), &mut f);
    }
    // bit-identical studies
    let run = || {
        rate_study(Problem::Int, 2, &[1, 2, 3], 50, &RngStream::new(7, 0), StudyOptions::for_dimension(2)).unwrap()
    };
    let (a, b) = (run(), run());
    let same = a.iter().zip(&b).all(|(x, y)| {
        x.empirical_error.to_bits() == y.empirical_error.to_bits() && x.stderr.to_bits() == y.stderr.to_bits()
    });
    check(same, "fixed-seed rate studies differ", &mut f);
    let run_app = || {
        rate_study(Problem::App, 1, &[1, 2], 40, &RngStream::new(7, 0), StudyOptions::for_dimension(1)).unwrap()
    };
    check(run_app() == run_app(), "fixed-seed App studies differ", &mut f);
    finish(f, format!("worst covariance deviation {worst_z:.2}σ"))
}

fn c9_spot_values() -> Outcome {
    let mut f = Vec::new();
    let single = QuadratureRule::new(1, vec![pt(&[0.5])], vec![1.0], false).unwrap();
    let e = linear_rule_avg_error(&single, 32).unwrap();
    check(
        (e - (1.0f64 / 12.0).sqrt()).abs() <= ORACLE_TOL,
        format!("midpoint node error {e}"),
        &mut f,
    );
    let na = n_app_for_epsilon(0.25, 1).unwrap();
    check(na == 4, format!("n_app(0.25, 1) = {na}"), &mut f);
    let ni = n_int_for_epsilon(0.1, 1).unwrap();
    check(ni == 5, format!("n_int(0.1, 1) = {ni}"), &mut f);
    finish(f, format!("e={e:.8}, n_app={na}, n_int={ni}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 integration error, d=1", c1_haber_one_dim),
        ("2 approximation error, d=1", c2_app_one_dim),
        ("3 both errors and constants, d=2", c3_two_dim),
        ("4 analytic error exponents", c4_exponents),
        ("5 classical Monte Carlo ratio", c5_mc_ratio),
        ("6 cost exponents of n(ε)", c6_complexity),
        ("7 oracle equivalences", c7_oracles),
        ("8 sampler correctness", c8_sampler),
        ("9 closed-form spot values", c9_spot_values),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let status = if outcome.ok { "PASS" } else { "FAIL" };
        if !outcome.ok {
            failed += 1;
        }
        println!("[{status}] criterion {name} ({:.2?}): {}", start.elapsed(), outcome.detail);
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
