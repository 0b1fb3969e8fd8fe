//! End-to-end acceptance checks. Each numbered check prints one PASS/FAIL
//! line; the test fails at the end if any check failed.

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Display;
use std::time::Instant;
use tvab::harness::{fit_rate, grid_search_eta, load_preset, run_experiment, ExperimentConfig};
use tvab::linalg::spectral_radius;
use tvab::objectives::{LeastSquaresLocal, LocalObjective};
use tvab::theory::{
    approx_phi, approx_phi_with, consensus_decay, distance_contraction_check,
    inequality_system_check, measured_weight_floor, overlap_bounds_check, trace_t,
    tracker_norm_bound_check,
};
use tvab::{
    make_least_squares_problem, make_line_fit_problem, make_logistic_problem, residual, run,
    solve_centralized, uniform_weights, validate_weights, ContractionConstants, Digraph,
    GraphSequence, Method, PerturbationSystem, Problem, RunTrace,
};

fn e<T, E: Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|err| err.to_string())
}

fn ensure(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

struct Suite {
    failures: Vec<String>,
}

impl Suite {
    fn report(&mut self, idx: usize, name: &str, outcome: Result<String, String>, secs: f64) {
        match outcome {
            Ok(detail) => println!("[acceptance {idx:02}] {name}: PASS ({detail}, {secs:.2}s)"),
            Err(msg) => {
                println!("[acceptance {idx:02}] {name}: FAIL ({msg}, {secs:.2}s)");
                self.failures.push(format!("{idx:02} {name}: {msg}"));
            }
        }
    }
}

fn preset(name: &str) -> ExperimentConfig {
    load_preset(name).expect("preset must parse")
}

fn built(cfg: &ExperimentConfig) -> (Problem, GraphSequence, Array1<f64>, Array2<f64>) {
    let problem = cfg.build_problem().expect("problem builds");
    let seq = cfg.build_graphs(cfg.seed).expect("graphs build");
    let (x_star, _) = solve_centralized(&problem).expect("solvable");
    let x0 = Array2::<f64>::zeros((problem.n(), problem.dim));
    (problem, seq, x_star, x0)
}

fn single_agent_reduction() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let dim = 3;
    let mut h = Array2::from_shape_fn((dim, dim), |_| rng.random::<f64>() * 2.0 - 1.0);
    for i in 0..dim {
        h[[i, i]] += 2.0;
    }
    let b = Array1::from_shape_fn(dim, |_| rng.random::<f64>() * 2.0 - 1.0);
    let problem = Problem {
        locals: vec![LocalObjective::LeastSquares(LeastSquaresLocal { h, b })],
        dim,
        mu: 0.5,
        big_l: 20.0,
        ell: vec![1.0],
    };
    let (x_star, _) = e(solve_centralized(&problem))?;
    let eta = 0.02;
    let x0 = Array2::<f64>::zeros((1, dim));
    let seq = GraphSequence::Static(Digraph::loops_only(1));
    let trace = e(run(&problem, &seq, Method::TvAb, eta, &x0, &x_star.view(), 200))?;
    let mut x = Array1::<f64>::zeros(dim);
    let mut worst = 0.0f64;
    for k in 0..=200 {
        let manual = residual(&x.clone().insert_axis(Axis(0)), &x_star.view());
        let dev = (trace.residuals[k] - manual).abs() / manual.abs().max(1.0);
        worst = worst.max(dev);
        let g = problem.gradient(&x.view());
        x = &x - &(g * eta);
    }
    ensure(worst <= 1e-12, format!("iterate deviation {worst:.3e} above 1e-12"))?;
    Ok(format!("200 iterations, max relative deviation {worst:.1e}"))
}

fn ring_linear_convergence(
    problem: &Problem,
    seq: &GraphSequence,
    x_star: &Array1<f64>,
    x0: &Array2<f64>,
    horizon: usize,
) -> Result<(String, RunTrace), String> {
    let grid = [0.0003, 0.001, 0.003];
    let go = e(grid_search_eta(problem, seq, Method::TvAb, &grid, x0, &x_star.view(), horizon))?;
    let trace = e(run(problem, seq, Method::TvAb, go.best_eta, x0, &x_star.view(), horizon))?;
    let last = *trace.residuals.last().unwrap();
    ensure(last <= 1e-8, format!("final residual {last:.3e} above 1e-8"))?;
    let fit = e(fit_rate(&trace.residuals, 1e-13))?;
    ensure(fit.slope_log10 < 0.0, format!("slope {:.3e} not negative", fit.slope_log10))?;
    ensure(fit.r2 >= 0.99, format!("r2 {:.4} below 0.99", fit.r2))?;
    Ok((
        format!("eta={} final={last:.1e} slope={:.2e} r2={:.4}", go.best_eta, fit.slope_log10, fit.r2),
        trace,
    ))
}

fn ring_baseline_ordering(
    problem: &Problem,
    seq: &GraphSequence,
    x_star: &Array1<f64>,
    x0: &Array2<f64>,
    horizon: usize,
) -> Result<(String, Option<RunTrace>), String> {
    let grid = [0.0003, 0.001, 0.003, 0.01, 0.03];
    let mut finals = Vec::new();
    for method in [Method::TvAb, Method::PushDiging, Method::SubgradPushDimin] {
        let go = e(grid_search_eta(problem, seq, method, &grid, x0, &x_star.view(), horizon))?;
        finals.push((method, go.best_eta, go.best_final));
    }
    ensure(
        finals[0].2 <= finals[1].2 && finals[1].2 <= finals[2].2,
        format!(
            "ordering broken: tvab {:.3e}, push-diging {:.3e}, subgrad-dimin {:.3e}",
            finals[0].2, finals[1].2, finals[2].2
        ),
    )?;
    let pd = e(run(problem, seq, Method::PushDiging, finals[1].1, x0, &x_star.view(), horizon))?;
    Ok((
        format!(
            "tvab {:.1e} <= push-diging {:.1e} <= subgrad-dimin {:.1e}",
            finals[0].2, finals[1].2, finals[2].2
        ),
        Some(pd),
    ))
}

fn preset_reaches(cfg: &ExperimentConfig, target: f64) -> Result<(String, RunTrace), String> {
    let (problem, seq, x_star, x0) = built(cfg);
    let eta = cfg.run.etas[0];
    let trace = e(run(&problem, &seq, Method::TvAb, eta, &x0, &x_star.view(), cfg.horizon))?;
    let last = *trace.residuals.last().unwrap();
    ensure(last <= target, format!("final residual {last:.3e} above {target:.0e}"))?;
    Ok((format!("eta={eta} horizon={} final={last:.1e}", cfg.horizon), trace))
}

fn preset_decays(cfg: &ExperimentConfig) -> Result<(String, RunTrace), String> {
    let (problem, seq, x_star, x0) = built(cfg);
    let eta = cfg.run.etas[0];
    let trace = e(run(&problem, &seq, Method::TvAb, eta, &x0, &x_star.view(), cfg.horizon))?;
    let fit = e(fit_rate(&trace.residuals, 1e-13))?;
    ensure(fit.slope_log10 < 0.0, format!("slope {:.3e} not negative", fit.slope_log10))?;
    ensure(fit.r2 >= 0.95, format!("r2 {:.4} below 0.95", fit.r2))?;
    Ok((format!("slope={:.2e} r2={:.4}", fit.slope_log10, fit.r2), trace))
}

fn conservation(traces: &[(String, RunTrace)]) -> Result<String, String> {
    let mut worst = 0.0f64;
    let mut steps = 0usize;
    for (label, trace) in traces {
        for (k, gap) in trace.tracking_gaps.iter().enumerate() {
            steps += 1;
            if *gap > worst {
                worst = *gap;
            }
            ensure(
                *gap <= 1e-9,
                format!("{label}: tracker gap {gap:.3e} at step {k}"),
            )?;
        }
    }
    Ok(format!("{} tracked runs, {steps} steps, worst gap {worst:.1e}", traces.len()))
}

fn stochasticity_all_presets(names: &[&str]) -> Result<String, String> {
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for name in names {
        let cfg = preset(name);
        for seed in cfg.run_seeds() {
            let seq = e(cfg.build_graphs(seed))?;
            for k in 0..cfg.horizon {
                let g = seq.graph_at(k);
                let pair = e(uniform_weights(&g))?;
                let d = validate_weights(&pair, &g);
                worst = worst.max(d.row_err).max(d.col_err);
                ensure(
                    d.row_err <= 1e-12 && d.col_err <= 1e-12,
                    format!("{name} step {k}: row_err {:.3e} col_err {:.3e}", d.row_err, d.col_err),
                )?;
                ensure(d.diag_ok, format!("{name} step {k}: nonpositive diagonal"))?;
                ensure(d.pattern_ok, format!("{name} step {k}: zero pattern mismatch"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} weight pairs, worst sum error {worst:.1e}"))
}

fn functional_recursion(cfg: &ExperimentConfig) -> Result<String, String> {
    let seq = e(cfg.build_graphs(cfg.seed))?;
    let c = cfg.graph.c();
    let horizon = 600;
    let pa = e(approx_phi(&seq, c, horizon))?;
    let mut worst = 0.0f64;
    for k in 0..horizon {
        let w = e(uniform_weights(&seq.graph_at(k)))?;
        let back = w.a.t().dot(&pa.phis[k + 1]);
        for (a, b) in pa.phis[k].iter().zip(back.iter()) {
            worst = worst.max((a - b).abs());
        }
        let sum: f64 = pa.phis[k].sum();
        ensure((sum - 1.0).abs() <= 1e-12, format!("phi_{k} sums to {sum}"))?;
    }
    ensure(worst <= 1e-10, format!("recursion residual {worst:.3e} above 1e-10"))?;
    let pa_tight = e(approx_phi_with(&seq, c, horizon, 1e-14))?;
    let mut tail_shift = 0.0f64;
    for (a, b) in pa.phis[0].iter().zip(pa_tight.phis[0].iter()) {
        tail_shift = tail_shift.max((a - b).abs());
    }
    ensure(tail_shift <= 1e-10, format!("tail sensitivity {tail_shift:.3e} above 1e-10"))?;
    Ok(format!("residual {worst:.1e}, tail sensitivity {tail_shift:.1e}"))
}

fn unit_spectrum_instance(sys: &PerturbationSystem, npm: f64) -> Result<(f64, f64), String> {
    let pair = e(sys.stationary_pair_check())?;
    ensure(
        pair.right_residual <= 1e-12 && pair.left_residual <= 1e-12,
        format!("residuals {:.3e}/{:.3e}", pair.right_residual, pair.left_residual),
    )?;
    ensure(
        (pair.derivative + sys.mu / npm).abs() <= 1e-12,
        format!("derivative {:.6e} vs -mu/n^(nc-1)", pair.derivative),
    )?;
    let deflated = pair.deflated_radius.ok_or("deflated radius unavailable")?;
    ensure(deflated < 1.0 - 1e-6, format!("deflated radius {deflated} too close to 1"))?;
    let m0 = e(sys.build_m(0.0))?;
    let rho = e(spectral_radius(&m0.view(), 1e-12, 100_000))?;
    ensure((rho - 1.0).abs() <= 1e-10, format!("rho(M0) = {rho}"))?;
    Ok((deflated, rho))
}

fn unit_spectrum() -> Result<String, String> {
    let small_pair = e(PerturbationSystem::from_parts(2, 1, 0.5, 1.0, 5.0, 0.6, 0.8, 3.0, 9.0))?;
    let (d1, _) = unit_spectrum_instance(&small_pair, 2.0)?;
    let small_trio = e(PerturbationSystem::from_parts(3, 2, 0.5, 1.0, 5.0, 0.6, 0.8, 3.0, 12.0))?;
    let (d2, _) = unit_spectrum_instance(&small_trio, 243.0)?;
    let cc = e(ContractionConstants::from_bounds(2, 1, 0.5, 0.5))?;
    let real = e(PerturbationSystem::from_constants(&cc, 0.5, 1.0))?;
    let pair = e(real.stationary_pair_check())?;
    ensure(
        pair.right_residual == 0.0 && pair.left_residual == 0.0,
        format!("real-constants residuals {:.3e}/{:.3e}", pair.right_residual, pair.left_residual),
    )?;
    Ok(format!("deflated radii {d1:.4}/{d2:.4}, unit eigenpair exact at window 3547"))
}

fn derivative_and_threshold() -> Result<String, String> {
    let fixture = e(PerturbationSystem::from_parts(2, 1, 0.5, 1.0, 5.0, 0.6, 0.8, 3.0, 9.0))?;
    let pair = e(fixture.stationary_pair_check())?;
    ensure(
        (pair.derivative + 0.25).abs() <= 1e-12,
        format!("derivative {:.6e} vs -0.25", pair.derivative),
    )?;
    let fd = e(fixture.fd_slope(1e-8))?;
    let rel = (fd - pair.derivative).abs() / pair.derivative.abs();
    ensure(rel <= 0.05, format!("fd slope {fd:.6e} off by {:.2}%", rel * 100.0))?;
    let cc = e(ContractionConstants::from_bounds(2, 1, 0.5, 0.5))?;
    let real = e(PerturbationSystem::from_constants(&cc, 0.5, 1.0))?;
    let eta_star = e(real.eta_threshold(1e-6))?;
    ensure(eta_star > 0.0, format!("threshold {eta_star}"))?;
    let stable = e(real.rho_less_than(1.0, eta_star * 0.5))?;
    ensure(stable, format!("rho(M(eta*/2)) not below 1 at eta*={eta_star:.3e}"))?;
    Ok(format!("fd within {:.2}%, eta*={eta_star:.2e}, contraction holds at eta*/2", rel * 100.0))
}

fn stacked_rows_on_quadratic(
    cfg: &ExperimentConfig,
) -> Result<(String, tvab::theory::TkTrace, PerturbationSystem, Problem), String> {
    let (problem, seq, x_star, x0) = built(cfg);
    let (alpha, beta) = e(measured_weight_floor(&seq, 200))?;
    let cc = e(ContractionConstants::from_bounds(2, 1, alpha, beta))?;
    let sys = e(PerturbationSystem::from_constants(&cc, problem.mu, problem.big_l))?;
    let eta_star = e(sys.eta_threshold(1e-6))?;
    let eta = eta_star * 0.5;
    let horizon = sys.cbar as usize - 1 + 500;
    let tr = e(trace_t(&problem, &seq, 1, eta, &x0, &x_star.view(), horizon))?;
    let rep = e(inequality_system_check(&tr, &sys, 1e-9, 1e-12))?;
    ensure(rep.checked == 500, format!("expected 500 transitions, checked {}", rep.checked))?;
    ensure(
        rep.violations == 0,
        format!("{} violations, max excess {:.3e}", rep.violations, rep.max_excess),
    )?;
    Ok((
        format!("eta=eta*/2={eta:.2e}, 500 transitions, 0 violations"),
        tr,
        sys,
        problem,
    ))
}

fn stepwise_rows(tr: &tvab::theory::TkTrace, problem: &Problem) -> Result<String, String> {
    let yb = tracker_norm_bound_check(tr, 2, problem.big_l, 1e-9);
    ensure(
        yb.violations == 0,
        format!("tracker-norm: {} violations, excess {:.3e}", yb.violations, yb.max_excess),
    )?;
    let dc = e(distance_contraction_check(tr, 2, 1, problem.mu, problem.big_l, 1e-9, 1e-12))?;
    ensure(
        dc.violations == 0,
        format!("distance-pull: {} violations, excess {:.3e}", dc.violations, dc.max_excess),
    )?;
    let ob = overlap_bounds_check(tr, 2, 1, 1e-9);
    ensure(
        ob.violations == 0,
        format!("overlap: {} violations, excess {:.3e}", ob.violations, ob.max_excess),
    )?;
    Ok(format!(
        "tracker/distance/overlap rows all hold over {} steps",
        yb.checked
    ))
}

fn averaging_products_rank_one(cfg: &ExperimentConfig) -> Result<String, String> {
    let seq = e(cfg.build_graphs(cfg.seed))?;
    let c = cfg.graph.c();
    let blocks = 25;
    let decay = e(consensus_decay(&seq, c, 0, blocks))?;
    let hit = decay.iter().position(|&d| d <= 1e-8);
    let hit = hit.ok_or_else(|| {
        format!("disagreement still {:.3e} after {blocks} blocks", decay.last().unwrap())
    })?;
    let windows = (hit + 1) * seq.n();
    ensure(windows <= 200, format!("took {windows} windows of length c"))?;
    let fit = e(fit_rate(&decay, 0.0))?;
    ensure(fit.factor() < 1.0, format!("fitted factor {:.4} not below 1", fit.factor()))?;
    Ok(format!(
        "disagreement {:.1e} after {windows} windows, per-block factor {:.3}",
        decay[hit],
        fit.factor()
    ))
}

fn gradients_match_differences() -> Result<String, String> {
    let problems = [
        ("logistic", make_logistic_problem(4, 10, 4, 0.5, 17)),
        ("least-squares", make_least_squares_problem(4, 2, 5, 17)),
        ("line-fit", make_line_fit_problem(6, 0.05, 17)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for (label, problem) in problems {
        let problem = e(problem)?;
        for _ in 0..100 {
            let x = Array1::from_shape_fn(problem.dim, |_| rng.random::<f64>() * 4.0 - 2.0);
            let g = problem.gradient(&x.view());
            let h = 1e-6;
            for d in 0..problem.dim {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[d] += h;
                xm[d] -= h;
                let fd = (problem.value(&xp.view()) - problem.value(&xm.view())) / (2.0 * h);
                let rel = (g[d] - fd).abs() / g[d].abs().max(1.0);
                worst = worst.max(rel);
                ensure(
                    rel <= 1e-5,
                    format!("{label}: coordinate {d} analytic {:.6e} vs fd {fd:.6e}", g[d]),
                )?;
            }
        }
    }
    Ok(format!("3 families x 100 points, worst relative gap {worst:.1e}"))
}

fn reruns_byte_identical(cfg: &ExperimentConfig) -> Result<String, String> {
    let d1 = e(tempfile::tempdir())?;
    let d2 = e(tempfile::tempdir())?;
    e(run_experiment(cfg, Some(d1.path())))?;
    e(run_experiment(cfg, Some(d2.path())))?;
    let mut names: Vec<String> = std::fs::read_dir(d1.path())
        .unwrap()
        .map(|entry| entry.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    ensure(!names.is_empty(), "no files written".into())?;
    for name in &names {
        let a = e(std::fs::read(d1.path().join(name)))?;
        let b = e(std::fs::read(d2.path().join(name)))?;
        if name == "summary.csv" {
            let strip = |raw: &[u8]| -> String {
                String::from_utf8_lossy(raw)
                    .lines()
                    .map(|line| {
                        let mut cols: Vec<&str> = line.split(',').collect();
                        if cols.len() > 5 {
                            cols.remove(5);
                        }
                        cols.join(",")
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            ensure(
                strip(&a) == strip(&b),
                "summary rows differ between reruns beyond wall time".into(),
            )?;
        } else {
            ensure(a == b, format!("{name} differs between reruns"))?;
        }
    }
    Ok(format!("{} files identical across reruns (wall-time column excluded)", names.len()))
}

#[test]
fn acceptance() {
    let mut suite = Suite { failures: Vec::new() };
    let mut traces: Vec<(String, RunTrace)> = Vec::new();

    let t = Instant::now();
    let outcome = single_agent_reduction();
    let secs = t.elapsed().as_secs_f64();
    let outcome = outcome.and_then(|d| {
        ensure(secs < 1.0, format!("took {secs:.2}s, budget 1s"))?;
        Ok(d)
    });
    suite.report(1, "single agent matches plain descent", outcome, secs);

    let ring_cfg = preset("ring-logistic");
    let (ring_problem, ring_seq, ring_star, ring_x0) = built(&ring_cfg);

    let t = Instant::now();
    let outcome = ring_linear_convergence(&ring_problem, &ring_seq, &ring_star, &ring_x0, ring_cfg.horizon);
    let secs = t.elapsed().as_secs_f64();
    let outcome = outcome.and_then(|(d, trace)| {
        traces.push(("ring-logistic tvab".into(), trace));
        ensure(secs < 30.0, format!("took {secs:.2}s, budget 30s"))?;
        Ok(d)
    });
    suite.report(2, "periodic-ring preset converges linearly", outcome, secs);

    let t = Instant::now();
    let outcome = ring_baseline_ordering(&ring_problem, &ring_seq, &ring_star, &ring_x0, ring_cfg.horizon);
    let secs = t.elapsed().as_secs_f64();
    let outcome = outcome.map(|(d, pd)| {
        if let Some(trace) = pd {
            traces.push(("ring-logistic push-diging".into(), trace));
        }
        d
    });
    suite.report(3, "grid-best baseline ordering", outcome, secs);

    let clustered_cfg = preset("clustered-least-squares");
    let t = Instant::now();
    let outcome = preset_reaches(&clustered_cfg, 1e-6);
    let secs = t.elapsed().as_secs_f64();
    let outcome = outcome.and_then(|(d, trace)| {
        traces.push(("clustered-least-squares tvab".into(), trace));
        ensure(secs < 120.0, format!("took {secs:.2}s, budget 120s"))?;
        Ok(d)
    });
    suite.report(4, "slow-mixing clustered preset reaches 1e-6", outcome, secs);

    let wide_cfg = preset("wide-random-logistic");
    let t = Instant::now();
    let outcome = preset_decays(&wide_cfg);
    let secs = t.elapsed().as_secs_f64();
    let outcome = outcome.and_then(|(d, trace)| {
        traces.push(("wide-random-logistic tvab".into(), trace));
        ensure(secs < 120.0, format!("took {secs:.2}s, budget 120s"))?;
        Ok(d)
    });
    suite.report(5, "wide random preset decays geometrically", outcome, secs);

    let t = Instant::now();
    let outcome = (|| {
        for name in ["pair-static", "quad-periodic", "gossip-line-fit"] {
            let mut cfg = preset(name);
            cfg.horizon = cfg.horizon.min(3000);
            for seed in cfg.run_seeds() {
                let problem = e(cfg.build_problem())?;
                let seq = e(cfg.build_graphs(seed))?;
                let (x_star, _) = e(solve_centralized(&problem))?;
                let x0 = Array2::<f64>::zeros((problem.n(), problem.dim));
                for method in e(cfg.methods())? {
                    if !method.tracks_gradients() {
                        continue;
                    }
                    let trace =
                        e(run(&problem, &seq, method, cfg.run.etas[0], &x0, &x_star.view(), cfg.horizon))?;
                    traces.push((format!("{name} {} seed {seed}", method.name()), trace));
                }
            }
        }
        conservation(&traces)
    })();
    let secs = t.elapsed().as_secs_f64();
    suite.report(6, "tracker conservation on every preset run", outcome, secs);

    let t = Instant::now();
    let outcome = stochasticity_all_presets(&[
        "ring-logistic",
        "clustered-least-squares",
        "wide-random-logistic",
        "gossip-line-fit",
        "pair-static",
        "quad-periodic",
    ]);
    let secs = t.elapsed().as_secs_f64();
    suite.report(7, "every weight pair stochastic with positive diagonal", outcome, secs);

    let quad_cfg = preset("quad-periodic");
    let t = Instant::now();
    let outcome = functional_recursion(&quad_cfg);
    let secs = t.elapsed().as_secs_f64();
    suite.report(8, "weighted-mean functional recursion", outcome, secs);

    let t = Instant::now();
    let outcome = unit_spectrum();
    let secs = t.elapsed().as_secs_f64();
    suite.report(9, "unperturbed comparison matrix has a simple unit eigenvalue", outcome, secs);

    let t = Instant::now();
    let outcome = derivative_and_threshold();
    let secs = t.elapsed().as_secs_f64();
    suite.report(10, "eigenvalue derivative and stable step threshold", outcome, secs);

    let pair_cfg = preset("pair-static");
    let t = Instant::now();
    let stacked = stacked_rows_on_quadratic(&pair_cfg);
    let secs = t.elapsed().as_secs_f64();
    let (outcome, kept) = match stacked {
        Ok((d, tr, sys, problem)) => (Ok(d), Some((tr, sys, problem))),
        Err(msg) => (Err(msg), None),
    };
    suite.report(11, "stacked comparison rows hold at the certified step", outcome, secs);

    let t = Instant::now();
    let outcome = match &kept {
        Some((tr, _, problem)) => stepwise_rows(tr, problem),
        None => Err("skipped: stacked run unavailable".into()),
    };
    let secs = t.elapsed().as_secs_f64();
    suite.report(12, "stepwise trace bounds hold on the same run", outcome, secs);

    let t = Instant::now();
    let outcome = averaging_products_rank_one(&ring_cfg);
    let secs = t.elapsed().as_secs_f64();
    suite.report(13, "averaging products become rank one", outcome, secs);

    let t = Instant::now();
    let outcome = gradients_match_differences();
    let secs = t.elapsed().as_secs_f64();
    suite.report(14, "analytic gradients match central differences", outcome, secs);

    let t = Instant::now();
    let outcome = reruns_byte_identical(&pair_cfg);
    let secs = t.elapsed().as_secs_f64();
    suite.report(15, "seeded reruns are byte identical", outcome, secs);

    assert!(
        suite.failures.is_empty(),
        "acceptance failures:\n{}",
        suite.failures.join("\n")
    );
}
