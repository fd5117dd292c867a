//! Experiment configuration: a JSON document whose keys can be overridden
//! from the command line, resolved into concrete settings per subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use trivopt_core::problems::MatrixData;
use trivopt_core::{CurvatureProfile, ManifoldSpec, ProblemKind, StoppingRule};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Verify,
    Bounds,
    Optimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    Euclidean,
    Sphere,
    Hyperbolic,
    So,
    Grassmann,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Rauch,
    SecondOrder,
    LawOfCosines,
    Jacobi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ProblemName {
    Quadratic,
    Rayleigh,
    Procrustes,
    Karcher,
    GrassmannTrace,
}

/// Partial override of a curvature profile; missing fields keep the
/// manifold's values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileOverride {
    pub sec_lower: Option<f64>,
    pub sec_upper: Option<f64>,
    pub lambda: Option<f64>,
    pub inj_lower: Option<f64>,
}

impl ProfileOverride {
    pub fn apply(&self, base: CurvatureProfile) -> Result<CurvatureProfile, CliError> {
        let prof = CurvatureProfile::new(
            self.sec_lower.unwrap_or(base.sec_lower),
            self.sec_upper.unwrap_or(base.sec_upper),
            self.lambda.unwrap_or(base.lambda),
            self.inj_lower.unwrap_or(base.inj_lower),
        )?;
        Ok(prof)
    }

    fn merge(&mut self, other: &ProfileOverride) {
        self.sec_lower = other.sec_lower.or(self.sec_lower);
        self.sec_upper = other.sec_upper.or(self.sec_upper);
        self.lambda = other.lambda.or(self.lambda);
        self.inj_lower = other.inj_lower.or(self.inj_lower);
    }

    fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

/// A randomly generated benchmark problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomProblem {
    pub kind: ProblemName,
    /// Ambient size: `R^n`, `S^{n−1}`, `SO(n)`, `H^n` or `Gr(n, k)`.
    pub n: Option<usize>,
    pub k: Option<usize>,
    /// Karcher mean: number of points and radius of the ball they are drawn from.
    pub count: Option<usize>,
    pub spread: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub trust_radius: Option<f64>,
    pub eps_target: Option<f64>,
    pub max_outer: Option<usize>,
    pub max_inner: Option<usize>,
    pub dynamic_step: Option<bool>,
    pub alpha: Option<f64>,
    pub rule: Option<StoppingRule>,
}

/// Everything a run can be configured with. Every key is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub manifold: Option<ManifoldSpec>,
    pub profile: Option<ProfileOverride>,
    pub r_grid: Option<Vec<f64>>,
    pub rmax: Option<f64>,
    /// Number of grid points when the grid is derived from `rmax`.
    pub points: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub checks: Option<Vec<CheckKind>>,
    pub ball_radius: Option<f64>,
    /// `α` for the `alpha_hat` column of the bounds table.
    pub alpha: Option<f64>,
    pub problem: Option<ProblemKind>,
    pub random_problem: Option<RandomProblem>,
    pub optimizer: Option<OptimizerSection>,
    /// Starting point, row-major.
    pub x0: Option<MatrixData>,
    pub output: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn check_command(&self, command: Command) -> Result<(), CliError> {
        match self.command {
            Some(c) if c != command => Err(CliError::Config(format!(
                "config is for {c:?}, but the {command:?} subcommand was invoked"
            ))),
            _ => Ok(()),
        }
    }

    pub fn merge_profile(&mut self, flags: &ProfileOverride) {
        if flags.is_empty() {
            return;
        }
        self.profile.get_or_insert_with(ProfileOverride::default).merge(flags);
    }

    /// Replace the manifold kind and/or its dimensions.
    pub fn merge_manifold(
        &mut self,
        kind: Option<ManifoldKind>,
        dim: Option<usize>,
        k: Option<usize>,
    ) -> Result<(), CliError> {
        if kind.is_none() && dim.is_none() && k.is_none() {
            return Ok(());
        }
        let (base_kind, base_dim, base_k) = match self.manifold {
            Some(spec) => split_spec(spec),
            None => {
                let kind = kind.ok_or_else(|| CliError::Config("--dim/--k given without --manifold".into()))?;
                (kind, default_dim(kind), 2)
            }
        };
        let kind = kind.unwrap_or(base_kind);
        let dim = dim.unwrap_or(if kind == base_kind { base_dim } else { default_dim(kind) });
        let k = k.unwrap_or(base_k);
        self.manifold = Some(match kind {
            ManifoldKind::Euclidean => ManifoldSpec::Euclidean { dim },
            ManifoldKind::Sphere => ManifoldSpec::Sphere { dim },
            ManifoldKind::Hyperbolic => ManifoldSpec::Hyperbolic { dim },
            ManifoldKind::So => ManifoldSpec::SpecialOrthogonal { n: dim },
            ManifoldKind::Grassmann => ManifoldSpec::Grassmann { n: dim, k },
        });
        Ok(())
    }
}

fn default_dim(kind: ManifoldKind) -> usize {
    match kind {
        ManifoldKind::Euclidean | ManifoldKind::Sphere | ManifoldKind::Hyperbolic => 2,
        ManifoldKind::So => 3,
        ManifoldKind::Grassmann => 4,
    }
}

fn split_spec(spec: ManifoldSpec) -> (ManifoldKind, usize, usize) {
    match spec {
        ManifoldSpec::Euclidean { dim } => (ManifoldKind::Euclidean, dim, 2),
        ManifoldSpec::Sphere { dim } => (ManifoldKind::Sphere, dim, 2),
        ManifoldSpec::Hyperbolic { dim } => (ManifoldKind::Hyperbolic, dim, 2),
        ManifoldSpec::SpecialOrthogonal { n } => (ManifoldKind::So, n, 2),
        ManifoldSpec::Grassmann { n, k } => (ManifoldKind::Grassmann, n, k),
    }
}

/// Default largest radius: half of `π_Δ`, or 2 when `Δ ≤ 0`.
pub fn default_rmax(prof: &CurvatureProfile) -> f64 {
    let first = prof.radius_first();
    if first.is_finite() {
        first / 2.0
    } else {
        2.0
    }
}

/// The radius grid: explicit, or `points` equally spaced values up to `rmax`.
/// Every radius must lie in `(0, π_{(Δ+δ)/2})`.
pub fn resolve_grid(
    cfg: &ExperimentConfig,
    prof: &CurvatureProfile,
    default_points: usize,
) -> Result<Vec<f64>, CliError> {
    let limit = prof.radius_second();
    let grid = match (&cfg.r_grid, cfg.rmax) {
        (Some(_), Some(_)) => return Err(CliError::Config("give either r_grid or rmax, not both".into())),
        (Some(g), None) => g.clone(),
        (None, rmax) => {
            let rmax = rmax.unwrap_or_else(|| default_rmax(prof));
            if !(rmax > 0.0 && rmax < limit) {
                return Err(CliError::Config(format!(
                    "rmax {rmax} is outside the validity range (0, {limit}) of the curvature profile"
                )));
            }
            let points = cfg.points.unwrap_or(default_points);
            if points == 0 {
                return Err(CliError::Config("points must be positive".into()));
            }
            (1..=points).map(|i| rmax * i as f64 / points as f64).collect()
        }
    };
    if grid.is_empty() {
        return Err(CliError::Config("empty radius grid".into()));
    }
    for &r in &grid {
        if !(r > 0.0 && r < limit) {
            return Err(CliError::Config(format!(
                "radius {r} is outside the validity range (0, {limit}) of the curvature profile"
            )));
        }
    }
    Ok(grid)
}
