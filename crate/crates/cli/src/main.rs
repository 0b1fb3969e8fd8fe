//! Command-line front end: batch experiments, step-size grids, window
//! constant certification, and inequality checks along real runs.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use ndarray::Array2;
use std::path::PathBuf;
use std::process::ExitCode;
use tvab::harness::{emit_plot_script, grid_search_eta, resolve, run_experiment, PRESET_NAMES};
use tvab::harness::{load_preset, ProblemConfig};
use tvab::theory::{
    distance_contraction_check, inequality_system_check, measured_weight_floor,
    overlap_bounds_check, trace_t, tracker_norm_bound_check,
};
use tvab::{solve_centralized, ContractionConstants, Error, Method, PerturbationSystem};

#[derive(Parser)]
#[command(
    name = "tvab",
    version,
    about = "Distributed optimization over time-varying directed graphs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment's full method/step/seed grid and write CSV output.
    Run(RunArgs),
    /// Scan a step-size grid with one method and report the best step.
    Grid(GridArgs),
    /// Compute window contraction constants and the stable-step threshold.
    Certify(CertifyArgs),
    /// Check the per-step error bounds along a real run.
    Check(CheckArgs),
    /// List built-in experiment presets.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// Preset name or path to a TOML experiment file.
    config: String,
    /// Output directory for CSV files (default: runs/<name>).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Print the summary only, writing nothing.
    #[arg(long)]
    no_files: bool,
}

#[derive(Args)]
struct GridArgs {
    /// Preset name or path to a TOML experiment file.
    config: String,
    #[arg(long, default_value = "tvab")]
    method: String,
    /// Comma-separated step sizes; defaults to the config's grid.
    #[arg(long)]
    etas: Option<String>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CertifyArgs {
    /// Derive nodes, window, weight floors, and curvature from a preset.
    #[arg(long, conflicts_with_all = ["n", "c", "alpha", "beta", "mu", "big_l"])]
    preset: Option<String>,
    /// Number of agents.
    #[arg(long)]
    n: Option<usize>,
    /// Window length over which graph unions are strongly connected.
    #[arg(long)]
    c: Option<usize>,
    /// Lower bound on positive row-stochastic weight entries.
    #[arg(long)]
    alpha: Option<f64>,
    /// Lower bound on positive column-stochastic weight entries.
    #[arg(long)]
    beta: Option<f64>,
    /// Strong convexity modulus of the average objective.
    #[arg(long)]
    mu: Option<f64>,
    /// Largest local smoothness constant.
    #[arg(long)]
    big_l: Option<f64>,
    /// Relative tolerance for the threshold bisection.
    #[arg(long, default_value_t = 1e-6)]
    rel_tol: f64,
}

#[derive(Args)]
struct CheckArgs {
    /// Preset name or path to a TOML experiment file.
    config: String,
    /// Step size (default: first entry of the config grid).
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Relative slack allowed before a bound row counts as violated.
    #[arg(long, default_value_t = 1e-9)]
    rel_tol: f64,
    /// Absolute noise floor below which transition rows are not scored.
    #[arg(long, default_value_t = 1e-12)]
    floor: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            let kind = e
                .downcast_ref::<Error>()
                .map(|t| t.kind())
                .unwrap_or("cli");
            eprintln!(
                "{}",
                serde_json::json!({ "error": kind, "message": format!("{e:#}") })
            );
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Cmd) -> anyhow::Result<ExitCode> {
    match cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Grid(args) => cmd_grid(args),
        Cmd::Certify(args) => cmd_certify(args),
        Cmd::Check(args) => cmd_check(args),
        Cmd::Presets => cmd_presets(),
    }
}

fn cmd_run(args: RunArgs) -> anyhow::Result<ExitCode> {
    let mut cfg = resolve(&args.config)?;
    if let Some(h) = args.horizon {
        cfg.horizon = h;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let out_dir = if args.no_files {
        None
    } else {
        Some(args.out.unwrap_or_else(|| PathBuf::from("runs").join(&cfg.name)))
    };
    let outcome = run_experiment(&cfg, out_dir.as_deref())
        .with_context(|| format!("running experiment '{}'", cfg.name))?;
    for record in &outcome.records {
        let key = &record.key;
        match record.final_residual() {
            Some(f) => println!(
                "{} eta={} seed={} final={:.3e} wall={:.2}s",
                key.method.name(),
                key.eta,
                key.seed,
                f,
                record.wall_secs
            ),
            None => println!(
                "{} eta={} seed={} DIVERGED wall={:.2}s",
                key.method.name(),
                key.eta,
                key.seed,
                record.wall_secs
            ),
        }
    }
    if let Some(dir) = out_dir {
        emit_plot_script(&dir)?;
        println!("wrote {} files to {}", outcome.written.len() + 1, dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_grid(args: GridArgs) -> anyhow::Result<ExitCode> {
    let mut cfg = resolve(&args.config)?;
    if let Some(h) = args.horizon {
        cfg.horizon = h;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let method = Method::parse(&args.method)?;
    let etas: Vec<f64> = match &args.etas {
        Some(list) => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad step size '{s}'"))
            })
            .collect::<anyhow::Result<_>>()?,
        None => cfg.run.etas.clone(),
    };
    let problem = cfg.build_problem()?;
    let seq = cfg.build_graphs(cfg.seed)?;
    let (x_star, _) = solve_centralized(&problem)?;
    let x0 = Array2::<f64>::zeros((problem.n(), problem.dim));
    let out = grid_search_eta(
        &problem,
        &seq,
        method,
        &etas,
        &x0,
        &x_star.view(),
        cfg.horizon,
    )?;
    for (eta, fin) in &out.tried {
        match fin {
            Some(f) => println!("eta={eta} final={f:.3e}"),
            None => println!("eta={eta} DIVERGED"),
        }
    }
    println!("best eta={} final={:.3e}", out.best_eta, out.best_final);
    Ok(ExitCode::SUCCESS)
}

fn cmd_certify(args: CertifyArgs) -> anyhow::Result<ExitCode> {
    let (n, c, alpha, beta, mu, big_l) = match &args.preset {
        Some(name) => {
            let cfg = resolve(name)?;
            let n = cfg.graph.n();
            let c = cfg.graph.c();
            let problem = cfg.build_problem()?;
            let seq = cfg.build_graphs(cfg.seed)?;
            let window = (10 * c).max(200);
            let (alpha, beta) = measured_weight_floor(&seq, window)?;
            println!(
                "measured weight floors over {window} steps: alpha={alpha:.6} beta={beta:.6}"
            );
            (n, c, alpha, beta, problem.mu, problem.big_l)
        }
        None => {
            let missing = |what: &str| format!("--{what} is required without --preset");
            (
                args.n.with_context(|| missing("n"))?,
                args.c.with_context(|| missing("c"))?,
                args.alpha.with_context(|| missing("alpha"))?,
                args.beta.with_context(|| missing("beta"))?,
                args.mu.with_context(|| missing("mu"))?,
                args.big_l.with_context(|| missing("big-l"))?,
            )
        }
    };
    if !(mu > 0.0 && big_l >= mu) {
        bail!("need 0 < mu <= big-l, got mu={mu} big-l={big_l}");
    }
    let cc = ContractionConstants::from_bounds(n, c, alpha, beta)?;
    println!("n={n} c={c} alpha={alpha:.6} beta={beta:.6} mu={mu} L={big_l}");
    println!("rows: Q_A={:.6e} cbar_a={}", cc.q_a, cc.cbar_a);
    println!("columns: tau={:.6e} Q_B={:.6e} cbar_b={}", cc.tau, cc.q_b, cc.cbar_b);
    if cc.representable {
        println!(
            "common window cbar={} gamma_a={:.6e} gamma_b={:.6e}",
            cc.cbar, cc.gamma_a, cc.gamma_b
        );
        let sys = PerturbationSystem::from_constants(&cc, mu, big_l)?;
        println!("coupling m={:.6e} step cap={:.6e}", sys.m, sys.eta_cap());
        let pair = sys.stationary_pair_check()?;
        println!(
            "stationary pair: right_residual={:.3e} left_residual={:.3e} derivative={:.6e}",
            pair.right_residual, pair.left_residual, pair.derivative
        );
        let eta_star = sys.eta_threshold(args.rel_tol)?;
        println!("stable step threshold eta*={eta_star:.6e}");
    } else {
        println!(
            "common window cbar={:e} is beyond exact f64 integers; ln_gamma_a={:.6e}, \
             column factor within rounding of 1 at this depth",
            cc.cbar, cc.ln_gamma_a
        );
        println!("comparison system skipped: stacked history of this depth is not representable");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(args: CheckArgs) -> anyhow::Result<ExitCode> {
    let mut cfg = resolve(&args.config)?;
    if let Some(h) = args.horizon {
        cfg.horizon = h;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let n = cfg.graph.n();
    let c = cfg.graph.c();
    let eta = args.eta.unwrap_or(cfg.run.etas[0]);
    let problem = cfg.build_problem()?;
    let seq = cfg.build_graphs(cfg.seed)?;
    let (x_star, _) = solve_centralized(&problem)?;
    let x0 = Array2::<f64>::zeros((n, problem.dim));
    let tr = trace_t(&problem, &seq, c, eta, &x0, &x_star.view(), cfg.horizon)?;
    let mut failures = 0usize;
    let yb = tracker_norm_bound_check(&tr, n, problem.big_l, args.rel_tol);
    println!(
        "tracker-norm: checked={} violations={} max_excess={:.3e}",
        yb.checked, yb.violations, yb.max_excess
    );
    failures += yb.violations;
    if eta < 1.0 / (n as f64 * problem.big_l) {
        let dc =
            distance_contraction_check(&tr, n, c, problem.mu, problem.big_l, args.rel_tol, args.floor)?;
        println!(
            "distance-pull: checked={} floored={} violations={} max_excess={:.3e}",
            dc.checked, dc.floored, dc.violations, dc.max_excess
        );
        failures += dc.violations;
    } else {
        println!(
            "distance-pull: skipped (step {} is not below 1/(nL)={:.3e})",
            eta,
            1.0 / (n as f64 * problem.big_l)
        );
    }
    let ob = overlap_bounds_check(&tr, n, c, args.rel_tol.max(1e-9));
    println!(
        "overlap: checked={} violations={} max_excess={:.3e}",
        ob.checked, ob.violations, ob.max_excess
    );
    failures += ob.violations;
    let (alpha, beta) = measured_weight_floor(&seq, cfg.horizon)?;
    let cc = ContractionConstants::from_bounds(n, c, alpha, beta)?;
    if cc.representable && cc.cbar <= 1e6 && cfg.horizon + 1 >= cc.cbar as usize + 1 {
        let sys = PerturbationSystem::from_constants(&cc, problem.mu, problem.big_l)?;
        let report = inequality_system_check(&tr, &sys, args.rel_tol, args.floor)?;
        println!(
            "stacked-system: checked={} floored={} violations={} max_excess={:.3e}",
            report.checked, report.floored, report.violations, report.max_excess
        );
        failures += report.violations;
    } else {
        println!(
            "stacked-system: skipped (window cbar={:e}, horizon {})",
            cc.cbar, cfg.horizon
        );
    }
    if failures == 0 {
        println!("verdict: PASS");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("verdict: FAIL ({failures} violated rows)");
        Ok(ExitCode::from(2))
    }
}

fn cmd_presets() -> anyhow::Result<ExitCode> {
    for name in PRESET_NAMES {
        let cfg = load_preset(name)?;
        let kind = match cfg.problem {
            ProblemConfig::Logistic { .. } => "logistic",
            ProblemConfig::LeastSquares { .. } => "least-squares",
            ProblemConfig::LineFit { .. } => "line-fit",
        };
        println!(
            "{name}: n={} c={} problem={kind} horizon={} etas={:?}",
            cfg.graph.n(),
            cfg.graph.c(),
            cfg.horizon,
            cfg.run.etas
        );
    }
    Ok(ExitCode::SUCCESS)
}
