//! Dynamic trivialization: gradient descent on the pullback `f ∘ exp_p`,
//! rebasing `p` at the current iterate whenever a stopping rule fires.
//!
//! With [`StoppingRule::Never`] the base point is fixed (static
//! trivialization); with [`StoppingRule::Always`] every step rebases, which is
//! Riemannian gradient descent with the exponential retraction. The step size
//! is `η = 1/α̂_r`, where `α̂_r` bounds the Hessian of the pullback on the trust
//! ball `‖v‖ ≤ r` (see [`crate::bounds::weak_convexity_constant`]).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bounds::{alpha_hat_at, weak_convexity_constant, CurvatureProfile, WeakConvexityReport};
use crate::error::{Error, Result};
use crate::manifolds::{Manifold, Point, Tangent};

/// A smooth function on a manifold with a known Hessian bound.
pub trait Objective: Send + Sync {
    fn value(&self, x: &Point) -> f64;

    /// Riemannian gradient, tangent at `x`.
    fn gradient(&self, x: &Point) -> Tangent;

    /// `α` with `‖Hess f‖ ≤ α` on the region of interest.
    fn alpha(&self) -> f64;

    /// A lower bound on `f`.
    fn f_star(&self) -> f64;
}

/// When to move the trivialization point to the current iterate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StoppingRule {
    Never,
    Always,
    /// Rebase when `‖grad(f ∘ exp_p)(v)‖ / ‖grad f(exp_p v)‖` leaves
    /// `[eps_low, eps_high]`, i.e. when `d exp_p` has stopped acting like an
    /// isometry in the gradient direction.
    GradRatio {
        eps_low: f64,
        eps_high: f64,
    },
}

impl StoppingRule {
    pub fn validate(&self) -> Result<()> {
        if let StoppingRule::GradRatio { eps_low, eps_high } = *self {
            if !(0.0 < eps_low && eps_low < 1.0 && 1.0 < eps_high && eps_high.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "grad-ratio rule needs 0 < eps_low < 1 < eps_high, got ({eps_low}, {eps_high})"
                )));
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for StoppingRule {
    type Err = Error;

    /// `never`, `always`, or `grad_ratio:LOW,HIGH`.
    fn from_str(s: &str) -> Result<Self> {
        let rule = match s {
            "never" => StoppingRule::Never,
            "always" => StoppingRule::Always,
            _ => {
                let parsed = s.strip_prefix("grad_ratio:").and_then(|rest| {
                    let (lo, hi) = rest.split_once(',')?;
                    Some((lo.trim().parse().ok()?, hi.trim().parse().ok()?))
                });
                let (eps_low, eps_high) = parsed.ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "unknown rule {s:?}; expected never, always or grad_ratio:LOW,HIGH"
                    ))
                })?;
                StoppingRule::GradRatio { eps_low, eps_high }
            }
        };
        rule.validate()?;
        Ok(rule)
    }
}

fn default_max_loop() -> usize {
    100_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Radius `r` of the trust ball in each tangent space.
    pub trust_radius: f64,
    /// Stop once the pullback gradient norm drops below this.
    pub eps_target: f64,
    #[serde(default = "default_max_loop")]
    pub max_outer: usize,
    /// Safeguard on the length of one inner loop; reaching it forces a rebase.
    #[serde(default = "default_max_loop")]
    pub max_inner: usize,
    #[serde(default)]
    pub seed: u64,
    /// Use `η = 1/α̂_s` with `s = ‖v‖` instead of the fixed `1/α̂_r`.
    #[serde(default)]
    pub dynamic_step: bool,
    /// Overrides the objective's `α`.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Overrides the manifold's curvature profile.
    #[serde(default)]
    pub profile: Option<CurvatureProfile>,
}

impl OptimizerConfig {
    pub fn new(trust_radius: f64, eps_target: f64) -> Self {
        Self {
            trust_radius,
            eps_target,
            max_outer: default_max_loop(),
            max_inner: default_max_loop(),
            seed: 0,
            dynamic_step: false,
            alpha: None,
            profile: None,
        }
    }

    pub fn validate(&self, prof: &CurvatureProfile) -> Result<()> {
        prof.validate()?;
        let limit = prof.radius_second();
        if !(self.trust_radius > 0.0 && self.trust_radius < limit) {
            return Err(Error::domain(
                "trust_radius",
                self.trust_radius,
                format!("(0, {limit})"),
            ));
        }
        if !(self.eps_target > 0.0 && self.eps_target.is_finite()) {
            return Err(Error::domain("eps_target", self.eps_target, "(0, ∞)"));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::InvalidArgument(
                "max_outer and max_inner must be positive".into(),
            ));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::domain("alpha", a, "(0, ∞)"));
            }
        }
        Ok(())
    }
}

/// One evaluated iterate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub outer: usize,
    pub inner: usize,
    pub f: f64,
    pub pullback_grad_norm: f64,
    pub riem_grad_norm: f64,
    /// The step that produced this iterate was clipped to the trust ball.
    pub step_clipped: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrivializationState {
    /// Current trivialization point `p_i`.
    pub base: Point,
    /// Current iterate `v_{i,k} ∈ T_{p_i}M`.
    pub iterate: Tangent,
    pub outer_index: usize,
    pub inner_index: usize,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
    /// Number of gradient steps taken.
    pub iterations: usize,
    pub clips: usize,
    pub rule: StoppingRule,
    pub weak_convexity: WeakConvexityReport,
    pub eta: f64,
    pub f0: f64,
    pub f_star: f64,
    pub budget: u64,
}

/// Machine-readable run summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeSummary {
    pub converged: bool,
    pub iterations: usize,
    pub budget: u64,
    pub within_budget: bool,
    pub alpha_hat: f64,
    pub eta: f64,
    pub clip_count: usize,
    pub rebases: usize,
    pub f0: f64,
    pub f_final: f64,
    pub f_star: f64,
    pub final_grad_norm: f64,
}

impl TrivializationState {
    /// Current point `exp_{p_i}(v_{i,k})`.
    pub fn point(&self, m: &dyn Manifold) -> Point {
        m.exp(&self.base, &self.iterate)
    }

    pub fn summary(&self) -> OptimizeSummary {
        let last = self.trace.last();
        OptimizeSummary {
            converged: self.converged,
            iterations: self.iterations,
            budget: self.budget,
            within_budget: self.converged && self.iterations as u64 <= self.budget,
            alpha_hat: self.weak_convexity.alpha_hat,
            eta: self.eta,
            clip_count: self.clips,
            rebases: self.outer_index,
            f0: self.f0,
            f_final: last.map_or(self.f0, |r| r.f),
            f_star: self.f_star,
            final_grad_norm: last.map_or(f64::NAN, |r| r.pullback_grad_norm),
        }
    }

    /// Trace as CSV with 17 significant digits.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("outer,inner,f,pullback_grad_norm,riem_grad_norm,step_clipped\n");
        for r in &self.trace {
            writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e},{}",
                r.outer, r.inner, r.f, r.pullback_grad_norm, r.riem_grad_norm, r.step_clipped
            )
            .expect("writing to a String cannot fail");
        }
        out
    }
}

/// `⌈2α̂ (f0 − f*)/ε²⌉`, the iteration bound of the convergence theorems.
///
/// A relative slack of a few ulps is removed before the ceiling so that exact
/// integers are not pushed up by rounding in the product.
pub fn convergence_budget(alpha_hat: f64, f0: f64, f_star: f64, eps: f64) -> Result<u64> {
    if !(eps > 0.0) {
        return Err(Error::domain("convergence_budget eps", eps, "(0, ∞)"));
    }
    if !(alpha_hat > 0.0) || !alpha_hat.is_finite() {
        return Err(Error::domain("convergence_budget alpha_hat", alpha_hat, "(0, ∞)"));
    }
    if !(f0 >= f_star) {
        return Err(Error::InvalidArgument(format!("f0 = {f0} is below f_star = {f_star}")));
    }
    let x = 2.0 * alpha_hat * (f0 - f_star) / (eps * eps);
    Ok((x * (1.0 - 4.0 * f64::EPSILON)).ceil() as u64)
}

fn is_zero(v: &Tangent) -> bool {
    v.iter().all(|&x| x == 0.0)
}

/// Gradient of `f ∘ exp_p` at `v`: the adjoint of `(d exp_p)_v` applied to
/// `grad f(exp_p v)`, assembled on an orthonormal basis of `T_pM`.
///
/// At `v = 0` this is exactly `grad f(p)`. Fails with
/// [`Error::ConjugatePoint`] when `‖v‖ ≥ π_Δ`, where the first-order lower
/// bound no longer certifies that `d exp_p` is invertible.
pub fn pullback_grad(m: &dyn Manifold, obj: &dyn Objective, p: &Point, v: &Tangent) -> Result<Tangent> {
    let prof = m.curvature_profile();
    pullback_grad_in(m, obj, &prof, p, v, &m.tangent_basis(p)).map(|(g, _)| g)
}

/// Pullback gradient and the Riemannian gradient at `exp_p(v)`.
fn pullback_grad_in(
    m: &dyn Manifold,
    obj: &dyn Objective,
    prof: &CurvatureProfile,
    p: &Point,
    v: &Tangent,
    basis: &[Tangent],
) -> Result<(Tangent, Tangent)> {
    if is_zero(v) {
        let g = obj.gradient(p);
        return Ok((g.clone(), g));
    }
    let s = m.norm(p, v);
    if s >= prof.radius_first() {
        return Err(Error::ConjugatePoint { radius: s });
    }
    let q = m.exp(p, v);
    let g = obj.gradient(&q);
    let mut out = Tangent::zeros(v.nrows(), v.ncols());
    for e in basis {
        let c = m.inner(&q, &g, &m.dexp(p, v, e));
        out += e * c;
    }
    Ok((out, g))
}

struct Eval {
    f: f64,
    pullback: Tangent,
    pullback_norm: f64,
    riem_norm: f64,
}

/// Run the dynamic trivialization framework from `x0`.
///
/// Terminates when the pullback gradient norm drops below `cfg.eps_target`
/// (`converged = true`) or when `cfg.max_outer` trivialization points have
/// been used. Steps leaving the trust ball are clipped radially to `‖v‖ = r`
/// and counted in `clips`; a pullback gradient that cannot be certified (see
/// [`pullback_grad`]) forces a rebase instead of an error. Only an invalid
/// configuration is an error.
pub fn dynamic_trivialization(
    m: &dyn Manifold,
    obj: &dyn Objective,
    x0: &Point,
    cfg: &OptimizerConfig,
    rule: StoppingRule,
) -> Result<TrivializationState> {
    let prof = cfg.profile.unwrap_or_else(|| m.curvature_profile());
    cfg.validate(&prof)?;
    rule.validate()?;
    m.check_point(x0)?;
    let alpha = cfg.alpha.unwrap_or_else(|| obj.alpha());
    let weak_convexity = weak_convexity_constant(alpha, &prof, cfg.trust_radius)?;
    let eta = 1.0 / weak_convexity.alpha_hat;
    let f0 = obj.value(x0);
    let f_star = obj.f_star();
    let budget = convergence_budget(weak_convexity.alpha_hat, f0, f_star.min(f0), cfg.eps_target)?;
    let (rows, cols) = m.ambient_shape();

    let mut st = TrivializationState {
        base: x0.clone(),
        iterate: Tangent::zeros(rows, cols),
        outer_index: 0,
        inner_index: 0,
        trace: Vec::new(),
        converged: false,
        iterations: 0,
        clips: 0,
        rule,
        weak_convexity,
        eta,
        f0,
        f_star,
        budget,
    };
    let mut basis = m.tangent_basis(&st.base);
    let mut clipped = false;
    let mut pending: Option<Eval> = None;

    let evaluate = |st: &TrivializationState, basis: &[Tangent]| -> Result<Eval> {
        let (pullback, riem) = pullback_grad_in(m, obj, &prof, &st.base, &st.iterate, basis)?;
        let x = if is_zero(&st.iterate) {
            st.base.clone()
        } else {
            m.exp(&st.base, &st.iterate)
        };
        Ok(Eval {
            f: obj.value(&x),
            pullback_norm: m.norm(&st.base, &pullback),
            riem_norm: m.norm(&x, &riem),
            pullback,
        })
    };

    loop {
        let eval = match pending.take() {
            Some(e) => e,
            None => match evaluate(&st, &basis) {
                Ok(e) => e,
                Err(err) => {
                    log::warn!("rebasing early: {err}");
                    rebase(m, &mut st, &mut basis);
                    if st.outer_index >= cfg.max_outer {
                        break;
                    }
                    continue;
                }
            },
        };
        st.trace.push(TraceRow {
            outer: st.outer_index,
            inner: st.inner_index,
            f: eval.f,
            pullback_grad_norm: eval.pullback_norm,
            riem_grad_norm: eval.riem_norm,
            step_clipped: clipped,
        });
        if eval.pullback_norm < cfg.eps_target {
            st.converged = true;
            break;
        }

        let step = if cfg.dynamic_step {
            let s = m.norm(&st.base, &st.iterate);
            1.0 / alpha_hat_at(alpha, &prof, s)?
        } else {
            eta
        };
        let mut next = &st.iterate - &eval.pullback * step;
        let len = m.norm(&st.base, &next);
        clipped = len > cfg.trust_radius;
        if clipped {
            next *= cfg.trust_radius / len;
            st.clips += 1;
        }
        st.iterate = next;
        st.iterations += 1;
        st.inner_index += 1;

        let stop = match rule {
            StoppingRule::Never => false,
            StoppingRule::Always => true,
            StoppingRule::GradRatio { eps_low, eps_high } => match evaluate(&st, &basis) {
                Ok(e) => {
                    let ratio = e.pullback_norm / e.riem_norm;
                    let leave = e.riem_norm > 0.0 && !(eps_low..=eps_high).contains(&ratio);
                    if !leave {
                        pending = Some(e);
                    }
                    leave
                }
                Err(_) => true,
            },
        };
        if stop || st.inner_index >= cfg.max_inner {
            pending = None;
            rebase(m, &mut st, &mut basis);
            if st.outer_index >= cfg.max_outer {
                break;
            }
        }
    }
    Ok(st)
}

fn rebase(m: &dyn Manifold, st: &mut TrivializationState, basis: &mut Vec<Tangent>) {
    st.base = m.exp(&st.base, &st.iterate);
    st.iterate.fill(0.0);
    st.outer_index += 1;
    st.inner_index = 0;
    *basis = m.tangent_basis(&st.base);
}

/// `|f(exp_x(tu)) − f(x) − t⟨grad f(x), u⟩|`, which is `O(t²)` for a correct gradient.
pub fn directional_derivative_error(m: &dyn Manifold, obj: &dyn Objective, x: &Point, u: &Tangent, t: f64) -> f64 {
    let g = obj.gradient(x);
    let moved = obj.value(&m.exp(x, &(u * t)));
    (moved - obj.value(x) - t * m.inner(x, &g, u)).abs()
}
