//! The three subcommands. Each returns the document to write and whether the
//! run succeeded; configuration problems surface as [`CliError`].

use std::fmt::Write as _;

use serde::Serialize;
use trivopt_core::bounds::{certify, weak_convexity_constant, BoundCertificate};
use trivopt_core::manifolds::Euclidean;
use trivopt_core::optimize::{dynamic_trivialization, OptimizeSummary, TraceRow};
use trivopt_core::problems::MatrixData;
use trivopt_core::verify::{self, CheckConfig};
use trivopt_core::{
    CheckReport, CurvatureProfile, Manifold, ManifoldSpec, OptimizerConfig, ProblemInstance, ProblemKind, StoppingRule,
};

use crate::config::{resolve_grid, CheckKind, ExperimentConfig, Format, ProblemName, RandomProblem};
use crate::error::CliError;

pub struct RunOutput {
    pub body: String,
    pub summary: Option<String>,
    pub success: bool,
}

/// 17 significant digits, so that every value round-trips exactly.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn profile_for(cfg: &ExperimentConfig, base: CurvatureProfile) -> Result<CurvatureProfile, CliError> {
    match &cfg.profile {
        Some(o) => o.apply(base),
        None => Ok(base),
    }
}

#[derive(Serialize)]
struct VerifyDocument<'a> {
    manifold: ManifoldSpec,
    profile: CurvatureProfile,
    r_grid: &'a [f64],
    trials: usize,
    seed: u64,
    pass: bool,
    reports: &'a [CheckReport],
}

fn default_checks(m: &dyn Manifold) -> Vec<CheckKind> {
    let mut checks = vec![CheckKind::Rauch];
    if m.is_embedded() {
        checks.push(CheckKind::SecondOrder);
    }
    checks.push(CheckKind::LawOfCosines);
    checks
}

pub fn verify(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let spec = cfg
        .manifold
        .ok_or_else(|| CliError::Config("verify needs a manifold (--manifold or \"manifold\")".into()))?;
    let m = spec.build()?;
    let prof = profile_for(cfg, m.curvature_profile())?;
    let grid = resolve_grid(cfg, &prof, 5)?;
    let trials = cfg.trials.unwrap_or(100);
    if trials == 0 {
        return Err(CliError::Config("trials must be positive".into()));
    }
    let seed = cfg.seed.unwrap_or(0);
    let mut checks = cfg.checks.clone().unwrap_or_else(|| default_checks(m.as_ref()));
    checks.sort();
    checks.dedup();

    let mut cc = CheckConfig::new(trials, grid.clone(), seed);
    cc.profile = Some(prof);
    cc.ball_radius = cfg.ball_radius;
    let reports = checks
        .iter()
        .map(|c| match c {
            CheckKind::Rauch => verify::check_rauch(m.as_ref(), &cc),
            CheckKind::SecondOrder => verify::check_second_order(m.as_ref(), &cc),
            CheckKind::LawOfCosines => verify::check_law_of_cosines(m.as_ref(), &cc),
            CheckKind::Jacobi => verify::check_jacobi(m.as_ref(), &cc),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let pass = reports.iter().all(|r| r.pass);
    for r in &reports {
        eprintln!(
            "{} on {}: {} (worst margin {:.3e}, tolerance {:.0e})",
            r.name,
            r.manifold,
            if r.pass { "pass" } else { "FAIL" },
            r.worst_margin,
            r.tolerance
        );
    }

    let body = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&VerifyDocument {
            manifold: spec,
            profile: prof,
            r_grid: &grid,
            trials,
            seed,
            pass,
            reports: &reports,
        }),
        Format::Csv => {
            let mut out = String::from("check,r,kind,measured,bound,margin,pass\n");
            for rep in &reports {
                for row in &rep.rows {
                    let ok = row.margin >= -rep.tolerance;
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{ok}",
                        rep.name,
                        num(row.r),
                        row.kind,
                        num(row.measured),
                        num(row.bound),
                        num(row.margin)
                    )
                    .expect("writing to a String cannot fail");
                }
            }
            out
        }
    };
    Ok(RunOutput {
        body,
        summary: None,
        success: pass,
    })
}

#[derive(Serialize)]
struct BoundsRow {
    #[serde(flatten)]
    certificate: BoundCertificate,
    alpha_hat: Option<f64>,
}

#[derive(Serialize)]
struct BoundsDocument<'a> {
    manifold: Option<ManifoldSpec>,
    profile: CurvatureProfile,
    alpha: Option<f64>,
    rows: &'a [BoundsRow],
}

pub fn bounds(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let base = match cfg.manifold {
        Some(spec) => spec.build()?.curvature_profile(),
        None => CurvatureProfile::EUCLIDEAN,
    };
    let prof = profile_for(cfg, base)?;
    let grid = resolve_grid(cfg, &prof, 10)?;
    let rows = grid
        .iter()
        .map(|&r| {
            let alpha_hat = cfg
                .alpha
                .map(|a| weak_convexity_constant(a, &prof, r).map(|w| w.alpha_hat))
                .transpose()?;
            Ok(BoundsRow {
                certificate: certify(&prof, r)?,
                alpha_hat,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&BoundsDocument {
            manifold: cfg.manifold,
            profile: prof,
            alpha: cfg.alpha,
            rows: &rows,
        }),
        Format::Csv => {
            let mut out = String::from(
                "r,dexp_lo,dexp_hi,hess_radial_lo,hess_radial_hi,hess_normal,hess_full,hess_full_tight,alpha_hat\n",
            );
            for row in &rows {
                let c = &row.certificate;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    num(c.r),
                    opt_num(c.dexp_lo),
                    num(c.dexp_hi),
                    opt_num(c.hess_radial_lo),
                    opt_num(c.hess_radial_hi),
                    num(c.hess_normal),
                    num(c.hess_full),
                    opt_num(c.hess_full_tight),
                    opt_num(row.alpha_hat)
                )
                .expect("writing to a String cannot fail");
            }
            out
        }
    };
    Ok(RunOutput {
        body,
        summary: None,
        success: true,
    })
}

fn generate(rp: &RandomProblem, seed: u64) -> Result<ProblemInstance, CliError> {
    let inst = match rp.kind {
        ProblemName::Quadratic => {
            let n = rp.n.unwrap_or(3);
            let target = Euclidean::new(n)?.random_point_seeded(seed).iter().copied().collect();
            let mut inst = ProblemInstance::new(ProblemKind::Quadratic { target })?;
            inst.seed = Some(seed);
            inst
        }
        ProblemName::Rayleigh => ProblemInstance::random_rayleigh(rp.n.unwrap_or(10), seed)?,
        ProblemName::Procrustes => ProblemInstance::random_procrustes(rp.n.unwrap_or(3), seed)?,
        ProblemName::Karcher => {
            let spread = rp.spread.unwrap_or(1.0);
            if spread.is_nan() || spread <= 0.0 {
                return Err(CliError::Config(format!("spread must be positive, got {spread}")));
            }
            ProblemInstance::random_karcher(rp.n.unwrap_or(2), rp.count.unwrap_or(10), spread, seed)?
        }
        ProblemName::GrassmannTrace => {
            ProblemInstance::random_grassmann_trace(rp.n.unwrap_or(6), rp.k.unwrap_or(2), seed)?
        }
    };
    Ok(inst)
}

/// Half the validity radius `π_{(Δ+δ)/2}` when it is finite, so that static
/// pullbacks can reach most of the manifold; `1` on curved spaces where it is
/// infinite, since `α̂_r` grows like `sinh²r` there. In flat space the radius
/// does not enter `α̂`, so it only needs to be large.
pub fn default_trust_radius(prof: &CurvatureProfile) -> f64 {
    let limit = prof.radius_second();
    if prof.sec_lower == 0.0 && prof.sec_upper == 0.0 && prof.lambda == 0.0 {
        1e3
    } else if limit.is_finite() {
        limit / 2.0
    } else {
        1.0
    }
}

#[derive(Serialize)]
struct OptimizeDocument<'a> {
    problem: &'a ProblemInstance,
    optimizer: &'a OptimizerConfig,
    rule: StoppingRule,
    x0: MatrixData,
    summary: &'a OptimizeSummary,
    trace: &'a [TraceRow],
}

pub fn optimize(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let seed = cfg.seed.unwrap_or(0);
    let instance = match (&cfg.problem, &cfg.random_problem) {
        (Some(kind), None) => ProblemInstance::new(kind.clone())?,
        (None, Some(rp)) => generate(rp, seed)?,
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "give either problem or random_problem, not both".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Config(
                "optimize needs a problem (--problem or \"problem\"/\"random_problem\")".into(),
            ))
        }
    };
    if let Some(spec) = cfg.manifold {
        if spec != instance.manifold {
            return Err(CliError::Config(format!(
                "problem lives on {}, config names {}",
                instance.manifold.name(),
                spec.name()
            )));
        }
    }
    let (m, obj) = instance.build()?;
    let prof = profile_for(cfg, m.curvature_profile())?;
    let section = cfg.optimizer.clone().unwrap_or_default();
    let mut oc = OptimizerConfig::new(
        section.trust_radius.unwrap_or_else(|| default_trust_radius(&prof)),
        section.eps_target.unwrap_or(1e-6),
    );
    if let Some(v) = section.max_outer {
        oc.max_outer = v;
    }
    if let Some(v) = section.max_inner {
        oc.max_inner = v;
    }
    oc.dynamic_step = section.dynamic_step.unwrap_or(false);
    oc.alpha = section.alpha;
    oc.seed = seed;
    if cfg.profile.is_some() {
        oc.profile = Some(prof);
    }
    let rule = section.rule.unwrap_or(StoppingRule::GradRatio {
        eps_low: 0.1,
        eps_high: 10.0,
    });

    let x0 = match &cfg.x0 {
        Some(data) => {
            let x = data.to_matrix()?;
            m.check_point(&x)?;
            x
        }
        None => instance.default_start(m.as_ref(), seed.wrapping_add(1))?,
    };
    let st = dynamic_trivialization(m.as_ref(), obj.as_ref(), &x0, &oc, rule)?;
    let summary = st.summary();
    eprintln!(
        "{}: converged={} iterations={} budget={} clips={} rebases={} f={:.6e} (f*={:.6e})",
        instance.manifold.name(),
        summary.converged,
        summary.iterations,
        summary.budget,
        summary.clip_count,
        summary.rebases,
        summary.f_final,
        summary.f_star
    );

    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => st.trace_csv(),
        Format::Json => to_json(&OptimizeDocument {
            problem: &instance,
            optimizer: &oc,
            rule,
            x0: MatrixData::from_matrix(&x0),
            summary: &summary,
            trace: &st.trace,
        }),
    };
    Ok(RunOutput {
        body,
        summary: Some(to_json(&summary)),
        success: summary.converged,
    })
}
