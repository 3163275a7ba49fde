//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{bell_oracle, lambda_oracle, partition_closed_form, three_sigma};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stsm::ensemble::{ensemble, sample_with, Arrangement, Preparation};
use stsm::interferometer::{
    delayed_choice_report_with, run_experiment, run_experiment_with, OpticalSetup, Placement,
};
use stsm::maxent::{
    estimate, expectation_sigma_z, expectation_sigma_z_outcomes, maxent_density,
    partition_function, reconstruct_density_matrix, relative_entropy_joint,
    relative_entropy_marginal, solve_lambda, von_neumann_check, JointDensity, MarginalDensity,
    DEFAULT_TOL,
};
use stsm::{bloch::bell_joint_probability, BlochDirection, Execution, Sign, SphericalGrid};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, pass: String, fail: String) -> Outcome {
    if cond {
        Ok(pass)
    } else {
        Err(fail)
    }
}

fn sigma_grid() -> Vec<f64> {
    (-9..=9).map(|k| k as f64 / 10.0).collect()
}

fn default_grid() -> SphericalGrid {
    SphericalGrid::new(64, 8).unwrap()
}

fn random_direction(rng: &mut ChaCha8Rng) -> BlochDirection {
    let u: f64 = rng.gen_range(-1.0..1.0);
    BlochDirection::new(u.acos(), rng.gen_range(0.0..std::f64::consts::TAU)).unwrap()
}

fn random_marginal(rng: &mut ChaCha8Rng, grid: &SphericalGrid) -> MarginalDensity {
    let values: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total = grid.integrate_values(&values);
    MarginalDensity::new(grid.clone(), values.iter().map(|v| v / total).collect()).unwrap()
}

fn density_matrix_agreement() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for sigma in sigma_grid() {
        let est = estimate(sigma, 64, 8).map_err(|e| e.to_string())?;
        let target = von_neumann_check(sigma).map_err(|e| e.to_string())?;
        worst = worst.max(est.rho.max_abs_diff(&target));
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-8 && elapsed < 1.0,
        format!("max |rho - (I + s Z)/2| = {worst:.2e} over 19 values in {elapsed:.3} s"),
        format!("max deviation {worst:.2e} (tol 1e-8), elapsed {elapsed:.3} s (limit 1 s)"),
    )
}

fn lambda_against_oracle() -> Outcome {
    let sol = solve_lambda(0.5, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let oracle = lambda_oracle(0.5);
    let zero = solve_lambda(0.0, DEFAULT_TOL)
        .map_err(|e| e.to_string())?
        .lambda;
    let prior = MarginalDensity::uniform(default_grid());
    let mut worst_z = 0.0f64;
    for lambda in [-5.0, -1.0, -0.1, 0.1, 1.0, 5.0] {
        let (_, log_z) = partition_function(&prior, lambda);
        worst_z = worst_z.max((log_z.exp() - partition_closed_form(lambda)).abs());
        // the same Z comes back through a solve at the matching constraint
        let sigma = -common::langevin(lambda);
        let sol = solve_lambda(sigma, DEFAULT_TOL).map_err(|e| e.to_string())?;
        worst_z = worst_z.max((sol.partition - partition_closed_form(sol.lambda)).abs());
    }
    let ok = (sol.lambda - oracle).abs() <= 1e-3 && zero.abs() <= 1e-12 && worst_z <= 1e-9;
    check(
        ok,
        format!(
            "lambda(0.5) = {:.6} vs oracle {oracle:.6}, lambda(0) = {zero:e}, max |Z - sinh/l| = {worst_z:.2e}",
            sol.lambda
        ),
        format!(
            "lambda(0.5) = {} vs oracle {oracle}, lambda(0) = {zero}, max Z error {worst_z:e}",
            sol.lambda
        ),
    )
}

fn lambda_literal_value() -> Outcome {
    let sol = solve_lambda(0.5, DEFAULT_TOL).map_err(|e| e.to_string())?;
    check(
        (sol.lambda + 1.800).abs() <= 1e-3,
        format!("lambda(0.5) = {:.6} within 1e-3 of -1.800", sol.lambda),
        format!(
            "lambda(0.5) = {:.6} is {:.2e} from -1.800 (tol 1e-3); the root of -L(l) = 0.5 is {:.6}",
            sol.lambda,
            (sol.lambda + 1.800).abs(),
            lambda_oracle(0.5)
        ),
    )
}

fn entropy_reductions() -> Outcome {
    let grid = default_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_h, mut worst_e) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let p = random_marginal(&mut rng, &grid);
        let m = random_marginal(&mut rng, &grid);
        let h2 = relative_entropy_marginal(&p, &m).map_err(|e| e.to_string())?;
        let h3 = relative_entropy_joint(
            &JointDensity::from_marginal(&p),
            &JointDensity::from_marginal(&m),
        )
        .map_err(|e| e.to_string())?;
        worst_h = worst_h.max((h3 - h2).abs());
    }
    for _ in 0..50 {
        let joint = JointDensity::from_marginal(&random_marginal(&mut rng, &grid));
        worst_e =
            worst_e.max((expectation_sigma_z_outcomes(&joint) - expectation_sigma_z(&joint)).abs());
    }
    check(
        worst_h <= 1e-10 && worst_e <= 1e-10,
        format!("max |H3 - H2| = {worst_h:.2e}, max expectation chain gap = {worst_e:.2e}"),
        format!("max |H3 - H2| = {worst_h:e}, chain gap {worst_e:e} (tol 1e-10)"),
    )
}

fn variational_optimality() -> Outcome {
    let grid = default_grid();
    let eps = 1e-3;
    let prior = MarginalDensity::uniform(grid.clone());
    let sol = solve_lambda(0.5, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let best = maxent_density(&sol, &grid).marginal();
    let h_best = relative_entropy_marginal(&best, &prior).map_err(|e| e.to_string())?;
    let w = grid.weights();
    let u: Vec<f64> = grid.nodes().map(|n| n.u).collect();
    let dot = |a: &[f64], b: &[f64]| {
        grid.integrate_values(&a.iter().zip(b).map(|(x, y)| x * y).collect::<Vec<_>>())
    };
    let ones = vec![1.0; w.len()];
    // orthonormal basis of span{1, u} under the grid inner product
    let e1: Vec<f64> = ones.iter().map(|v| v / dot(&ones, &ones).sqrt()).collect();
    let c = dot(&u, &e1);
    let mut e2: Vec<f64> = u.iter().zip(&e1).map(|(a, b)| a - c * b).collect();
    let n2 = dot(&e2, &e2).sqrt();
    e2.iter_mut().for_each(|v| *v /= n2);

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::NEG_INFINITY;
    let mut trials = 0;
    while trials < 20 {
        let mut delta: Vec<f64> = best
            .values()
            .iter()
            .map(|p| p * rng.gen_range(-1.0..1.0))
            .collect();
        for e in [&e1, &e2] {
            let c = dot(&delta, e);
            delta
                .iter_mut()
                .zip(e.iter())
                .for_each(|(d, v)| *d -= c * v);
        }
        let moved: Vec<f64> = best
            .values()
            .iter()
            .zip(&delta)
            .map(|(p, d)| p + eps * d)
            .collect();
        if moved.iter().any(|v| *v < 0.0) {
            continue;
        }
        trials += 1;
        let moved = MarginalDensity::new(grid.clone(), moved).map_err(|e| e.to_string())?;
        let h = relative_entropy_marginal(&moved, &prior).map_err(|e| e.to_string())?;
        worst = worst.max(h - h_best);
    }
    check(
        worst <= 1e-12,
        format!("largest change H(p' + e dp) - H(p') = {worst:.2e} over 20 perturbations"),
        format!("perturbation raised H by {worst:e} (tol 1e-12)"),
    )
}

fn interferometer_statistics() -> Outcome {
    let n = 10_000;
    let mut notes = Vec::new();
    for seed in 0..20 {
        let direct = run_experiment(&OpticalSetup::direct(), seed, n).map_err(|e| e.to_string())?;
        if direct.tally.detector_counts.d1 != n || direct.tally.path_counts.a != n {
            return Err(format!("direct layout missed D1 at seed {seed}"));
        }
        // 3σ bands are single-run checks, made at the default seed; the
        // exact assertions hold for every seed
        let single =
            run_experiment(&OpticalSetup::single_bs(), seed, n).map_err(|e| e.to_string())?;
        let d1 = single.tally.detector_counts.d1 as f64;
        if seed == 0 && (d1 - n as f64 / 2.0).abs() > three_sigma(n, 0.5) {
            return Err(format!("single-bs D1 = {d1} of {n} at seed {seed}"));
        }
        let double =
            run_experiment(&OpticalSetup::double_bs(), seed, n).map_err(|e| e.to_string())?;
        let dc = double.tally.detector_counts;
        if (dc.d1, dc.d2) != (n, 0) {
            return Err(format!(
                "double-bs counts {{{}, {}}} at seed {seed}",
                dc.d1, dc.d2
            ));
        }
        let report = delayed_choice_report_with(seed, 2 * n, Execution::Serial)
            .map_err(|e| e.to_string())?;
        let first = report.placement(Placement::AfterFirstBs);
        let m = first.runs;
        if seed == 0
            && (first.detector_counts.d1 as f64 - m as f64 / 2.0).abs() > three_sigma(m, 0.5)
        {
            return Err(format!(
                "delayed choice after-first-bs D1 = {} of {m}",
                first.detector_counts.d1
            ));
        }
        let second = report.placement(Placement::AfterSecondBs);
        if second.detector_counts.d2 != 0 || second.detector_counts.d1 != second.runs {
            return Err(format!(
                "delayed choice after-second-bs reached D2 at seed {seed}"
            ));
        }
        if seed == 0 {
            notes.push(format!(
                "single-bs D1 {d1}/{n}, double-bs {{{n}, 0}}, delayed {}+{} runs",
                first.runs, second.runs
            ));
        }
    }
    Ok(format!("exact over 20 seeds; seed 0: {}", notes.join("")))
}

fn bell_against_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst, mut worst_marg) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let a = random_direction(&mut rng);
        let b = random_direction(&mut rng);
        for ra in Sign::BOTH {
            for rb in Sign::BOTH {
                let got = bell_joint_probability(a, b, ra, rb);
                let want = bell_oracle(
                    (a.theta(), a.phi()),
                    (b.theta(), b.phi()),
                    ra.value() as i32,
                    rb.value() as i32,
                );
                worst = worst.max((got - want).abs());
            }
        }
        let dist = ensemble(&Arrangement::bell(a, b)).map_err(|e| e.to_string())?;
        for side in 0..2 {
            let m = dist.marginal(side).map_err(|e| e.to_string())?;
            worst_marg = worst_marg.max((m[0] - 0.5).abs()).max((m[1] - 0.5).abs());
        }
    }
    check(
        worst <= 1e-10 && worst_marg <= 1e-12,
        format!("max joint error {worst:.2e}, max marginal error {worst_marg:.2e} over 100 pairs"),
        format!("joint error {worst:e} (tol 1e-10), marginal error {worst_marg:e} (tol 1e-12)"),
    )
}

fn determinism() -> Outcome {
    let n = 20_000;
    let dist = ensemble(&Arrangement::single(
        Preparation::z_plus(),
        BlochDirection::new(1.1, 0.4).unwrap(),
    ))
    .map_err(|e| e.to_string())?;
    let bell = ensemble(&Arrangement::bell(BlochDirection::Z, BlochDirection::X))
        .map_err(|e| e.to_string())?;
    let mut outputs: Vec<(&str, Vec<String>)> = Vec::new();
    for (name, d) in [("single", &dist), ("bell", &bell)] {
        let runs = [Execution::Serial, Execution::Parallel, Execution::Parallel]
            .map(|exec| {
                let s = sample_with(d, 42, n, exec).unwrap();
                serde_json::to_string(&(&s.records, &s.counts)).unwrap()
            })
            .to_vec();
        outputs.push((name, runs));
    }
    for setup in [OpticalSetup::single_bs(), OpticalSetup::double_bs()] {
        let runs = [Execution::Serial, Execution::Parallel, Execution::Parallel]
            .map(|exec| {
                let o = run_experiment_with(&setup, 42, n, exec).unwrap();
                serde_json::to_string(&(&o.runs, &o.tally)).unwrap()
            })
            .to_vec();
        outputs.push(("interferometer", runs));
    }
    let runs = [Execution::Serial, Execution::Parallel, Execution::Parallel]
        .map(|exec| {
            let r = delayed_choice_report_with(42, n, exec).unwrap();
            serde_json::to_string(&(&r.outcome.runs, r.summary(42))).unwrap()
        })
        .to_vec();
    outputs.push(("delayed-choice", runs));
    for (name, runs) in &outputs {
        if runs.iter().any(|r| r != &runs[0]) {
            return Err(format!("{name} output differs between runs"));
        }
    }
    Ok(format!(
        "{} sampling operations byte-identical across serial and two parallel runs",
        outputs.len()
    ))
}

fn grid_convergence() -> Outcome {
    let edge = common::langevin(10.0);
    let mut sigmas = sigma_grid();
    sigmas.extend([edge, -edge]);
    let mut worst = 0.0f64;
    let mut worst_at = 0.0;
    for sigma in sigmas {
        let a = estimate(sigma, 64, 8).map_err(|e| e.to_string())?.report();
        let b = estimate(sigma, 128, 8).map_err(|e| e.to_string())?.report();
        let mut diffs = vec![
            a.lambda - b.lambda,
            a.partition - b.partition,
            a.log_partition - b.log_partition,
            a.entropy - b.entropy,
            a.residual - b.residual,
        ];
        for (x, y) in a.rho.iter().zip(&b.rho) {
            diffs.push(x[0] - y[0]);
            diffs.push(x[1] - y[1]);
        }
        let d = diffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if d > worst {
            worst = d;
            worst_at = sigma;
        }
    }
    check(
        worst <= 1e-10,
        format!("max change 64 -> 128 nodes = {worst:.2e} (at sigma_z = {worst_at:.4})"),
        format!("change {worst:e} at sigma_z = {worst_at} (tol 1e-10)"),
    )
}

fn main() -> ExitCode {
    // one estimate up front so the timed criterion does not pay for thread pool start-up
    let _ = reconstruct_density_matrix(&maxent_density(
        &solve_lambda(0.1, DEFAULT_TOL).unwrap(),
        &default_grid(),
    ));

    let criteria: [Criterion; 9] = [
        ("1 density matrix agreement", density_matrix_agreement),
        ("2a Lagrange solve against oracle", lambda_against_oracle),
        (
            "2b Lagrange solve literal value -1.800",
            lambda_literal_value,
        ),
        ("3 entropy and expectation reductions", entropy_reductions),
        ("4 variational optimality", variational_optimality),
        ("5 interferometer statistics", interferometer_statistics),
        ("6 Bell ensemble", bell_against_oracle),
        ("7 determinism", determinism),
        ("8 grid convergence", grid_convergence),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        match run() {
            Ok(msg) => println!("[PASS] criterion {name}: {msg}"),
            Err(msg) => {
                failures += 1;
                println!("[FAIL] criterion {name}: {msg}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
