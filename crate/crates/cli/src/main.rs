//! `trivopt`: bound tables, verification suites and trivialization runs.
//!
//! Exit status: 0 on success, 1 when a check fails or the optimizer does not
//! converge, 2 for usage and configuration errors.

mod commands;
mod config;
mod error;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use trivopt_core::StoppingRule;

use config::{CheckKind, Command, ExperimentConfig, Format, ManifoldKind, ProblemName, ProfileOverride, RandomProblem};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "trivopt",
    version,
    about = "Curvature bounds and dynamic trivializations on Riemannian manifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Monte-Carlo certification of the bounds on a manifold.
    Verify(VerifyArgs),
    /// Tabulate the bounds for a curvature profile.
    Bounds(BoundsArgs),
    /// Run the dynamic trivialization optimizer on a benchmark problem.
    Optimize(OptimizeArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON experiment configuration; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct ProfileArgs {
    /// Lower sectional-curvature bound δ.
    #[arg(long, allow_hyphen_values = true)]
    sec_lower: Option<f64>,
    /// Upper sectional-curvature bound Δ.
    #[arg(long, allow_hyphen_values = true)]
    sec_upper: Option<f64>,
    /// Bound Λ on ‖∇R‖.
    #[arg(long)]
    lambda: Option<f64>,
    /// Lower bound on the injectivity radius.
    #[arg(long)]
    inj: Option<f64>,
}

impl ProfileArgs {
    fn to_override(&self) -> ProfileOverride {
        ProfileOverride {
            sec_lower: self.sec_lower,
            sec_upper: self.sec_upper,
            lambda: self.lambda,
            inj_lower: self.inj,
        }
    }
}

#[derive(Args)]
struct GeometryArgs {
    #[arg(long, value_enum)]
    manifold: Option<ManifoldKind>,
    /// Dimension (`n` for SO(n) and Gr(n, k)).
    #[arg(long)]
    dim: Option<usize>,
    /// Subspace dimension for the Grassmannian.
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    profile: ProfileArgs,
    /// Explicit comma-separated radii.
    #[arg(long, value_delimiter = ',')]
    r_grid: Option<Vec<f64>>,
    /// Largest radius of an equally spaced grid.
    #[arg(long)]
    rmax: Option<f64>,
    /// Number of points of the equally spaced grid.
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    geometry: GeometryArgs,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated subset of checks to run.
    #[arg(long, value_enum, value_delimiter = ',')]
    checks: Option<Vec<CheckKind>>,
    /// Ball radius for the law-of-cosines check.
    #[arg(long)]
    ball_radius: Option<f64>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Weak-convexity constant of the objective; fills the alpha_hat column.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Generate a random instance of this problem.
    #[arg(long, value_enum)]
    problem: Option<ProblemName>,
    /// Problem size: R^n, S^(n-1), SO(n), H^n or Gr(n, k).
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Karcher mean: number of points.
    #[arg(long)]
    count: Option<usize>,
    /// Karcher mean: radius of the ball the points are drawn from.
    #[arg(long)]
    spread: Option<f64>,
    #[command(flatten)]
    profile: ProfileArgs,
    /// never, always, or grad_ratio:LOW,HIGH.
    #[arg(long)]
    rule: Option<StoppingRule>,
    #[arg(long)]
    trust_radius: Option<f64>,
    /// Target norm of the pullback gradient.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    max_outer: Option<usize>,
    #[arg(long)]
    max_inner: Option<usize>,
    /// Step 1/α̂_s with s the current ‖v‖ instead of 1/α̂_r.
    #[arg(long)]
    dynamic_step: bool,
    /// Override the objective's weak-convexity constant.
    #[arg(long)]
    alpha: Option<f64>,
    /// Also write the run summary as JSON to this file.
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn base_config(command: Command, common: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.check_command(command)?;
    cfg.seed = common.seed.or(cfg.seed);
    cfg.output = common.out.clone().or(cfg.output.take());
    cfg.format = common.format.or(cfg.format);
    Ok(cfg)
}

fn apply_geometry(cfg: &mut ExperimentConfig, g: &GeometryArgs) -> Result<(), CliError> {
    cfg.merge_manifold(g.manifold, g.dim, g.k)?;
    cfg.merge_profile(&g.profile.to_override());
    // A grid given on the command line replaces whichever grid the file had.
    if g.r_grid.is_some() {
        cfg.r_grid = g.r_grid.clone();
        cfg.rmax = None;
    }
    if g.rmax.is_some() {
        cfg.rmax = g.rmax;
        cfg.r_grid = None;
    }
    cfg.points = g.points.or(cfg.points);
    Ok(())
}

fn build_config(sub: &Sub) -> Result<ExperimentConfig, CliError> {
    match sub {
        Sub::Verify(a) => {
            let mut cfg = base_config(Command::Verify, &a.common)?;
            apply_geometry(&mut cfg, &a.geometry)?;
            cfg.trials = a.trials.or(cfg.trials);
            cfg.checks = a.checks.clone().or(cfg.checks.take());
            cfg.ball_radius = a.ball_radius.or(cfg.ball_radius);
            Ok(cfg)
        }
        Sub::Bounds(a) => {
            let mut cfg = base_config(Command::Bounds, &a.common)?;
            apply_geometry(&mut cfg, &a.geometry)?;
            cfg.alpha = a.alpha.or(cfg.alpha);
            Ok(cfg)
        }
        Sub::Optimize(a) => {
            let mut cfg = base_config(Command::Optimize, &a.common)?;
            cfg.merge_profile(&a.profile.to_override());
            if let Some(kind) = a.problem {
                cfg.problem = None;
                cfg.random_problem = Some(RandomProblem {
                    kind,
                    n: None,
                    k: None,
                    count: None,
                    spread: None,
                });
            }
            let sizes = [a.dim.is_some(), a.k.is_some(), a.count.is_some(), a.spread.is_some()];
            if sizes.iter().any(|&s| s) {
                let rp = cfg.random_problem.as_mut().ok_or_else(|| {
                    CliError::Config("--dim/--k/--count/--spread need a random problem (--problem)".into())
                })?;
                rp.n = a.dim.or(rp.n);
                rp.k = a.k.or(rp.k);
                rp.count = a.count.or(rp.count);
                rp.spread = a.spread.or(rp.spread);
            }
            let opt = cfg.optimizer.get_or_insert_with(Default::default);
            opt.rule = a.rule.or(opt.rule);
            opt.trust_radius = a.trust_radius.or(opt.trust_radius);
            opt.eps_target = a.eps.or(opt.eps_target);
            opt.max_outer = a.max_outer.or(opt.max_outer);
            opt.max_inner = a.max_inner.or(opt.max_inner);
            opt.alpha = a.alpha.or(opt.alpha);
            if a.dynamic_step {
                opt.dynamic_step = Some(true);
            }
            cfg.summary = a.summary.clone().or(cfg.summary.take());
            Ok(cfg)
        }
    }
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let cfg = build_config(&cli.command)?;
    let out = match cli.command {
        Sub::Verify(_) => commands::verify(&cfg)?,
        Sub::Bounds(_) => commands::bounds(&cfg)?,
        Sub::Optimize(_) => commands::optimize(&cfg)?,
    };
    match &cfg.output {
        Some(path) => write_file(path, &out.body)?,
        None => print!("{}", out.body),
    }
    if let (Some(path), Some(summary)) = (&cfg.summary, &out.summary) {
        write_file(path, summary)?;
    }
    Ok(out.success)
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("trivopt: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
