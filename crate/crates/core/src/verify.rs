//! Numerical oracles for the bounds in [`crate::bounds`].
//!
//! * [`integrate_jacobi`] integrates `J̈ + R(J, γ̇)γ̇ = 0` with RK4 in a
//!   parallel orthonormal frame, so `(d exp_p)_{rv}(w) = J(r)/r`.
//! * [`hessian_ode`] integrates `K̈ + R(K, γ̇)γ̇ + Y = 0` for
//!   `K(t) = (∇d exp_p)_{tv}(tw₁, tw₂)` on locally symmetric spaces.
//! * [`fd_dexp`] and [`fd_hess_exp`] are central finite differences of `exp`.
//! * The `check_*` functions run Monte-Carlo sweeps and compare the measured
//!   quantities against the closed-form bounds.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, CurvatureProfile};
use crate::error::{Error, Result};
use crate::manifolds::{central_difference_dexp, Manifold, ManifoldRng, Point, Tangent};
use rand::{Rng, SeedableRng};

/// Default step for first-order finite differences.
pub const FD_STEP: f64 = 1e-4;
/// Default step for the finite-difference Hessian of `exp`.
pub const FD_HESS_STEP: f64 = 1e-3;
/// RK4 steps per unit of geodesic length.
pub const STEPS_PER_UNIT: f64 = 1000.0;

/// Threshold on the smallest singular value of `d exp` below which a
/// Hessian sample is flagged as near the conjugate locus.
const CONJUGATE_TOL: f64 = 1e-6;

/// Unit-speed geodesic `t ↦ exp_p(t·direction)`, `t ∈ [0, length]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSpec {
    pub base: Point,
    pub direction: Tangent,
    pub length: f64,
}

impl GeodesicSpec {
    pub fn new(m: &dyn Manifold, base: Point, direction: Tangent, length: f64) -> Result<Self> {
        m.check_point(&base)?;
        m.check_tangent(&base, &direction)?;
        let n = m.norm(&base, &direction);
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidTangent(format!("direction has norm {n}, expected 1")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::domain("geodesic length", length, "(0, ∞)"));
        }
        Ok(Self {
            base,
            direction,
            length,
        })
    }

    /// Random unit-speed geodesic of the given length.
    pub fn random(m: &dyn Manifold, length: f64, rng: &mut ManifoldRng) -> Result<Self> {
        let base = m.random_point(rng);
        let direction = loop {
            if let Some(d) = m.normalize(&base, &m.random_tangent(&base, rng)) {
                break d;
            }
        };
        Self::new(m, base, direction, length)
    }

    pub fn endpoint(&self, m: &dyn Manifold) -> Point {
        m.exp(&self.base, &(&self.direction * self.length))
    }
}

/// Steps used for a geodesic of length `r` at the default resolution.
pub fn steps_for_length(r: f64) -> usize {
    ((STEPS_PER_UNIT * r).ceil() as usize).max(10)
}

/// `J(t)` in the parallel frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobiSample {
    pub t: f64,
    pub coords: Vec<f64>,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobiTrace {
    pub geodesic: GeodesicSpec,
    pub samples: Vec<JacobiSample>,
    pub steps: usize,
    /// `J(r)` as a tangent vector at the endpoint.
    pub endpoint: Tangent,
}

impl JacobiTrace {
    pub fn last(&self) -> &JacobiSample {
        self.samples.last().expect("trace has at least the initial sample")
    }
}

/// Orthonormal frame transported along a geodesic, with the curvature
/// operator `M_{jl}(t) = ⟨R(E_l, γ̇)γ̇, E_j⟩` evaluated on demand.
struct ParallelFrame<'a> {
    m: &'a dyn Manifold,
    g: &'a GeodesicSpec,
    basis: Vec<Tangent>,
}

struct FrameAt {
    point: Point,
    velocity: Tangent,
    frame: Vec<Tangent>,
}

impl<'a> ParallelFrame<'a> {
    fn new(m: &'a dyn Manifold, g: &'a GeodesicSpec) -> Result<Self> {
        let basis = m.tangent_basis(&g.base);
        // Probe for curvature and transport support before integrating.
        m.riemann(&g.base, &basis[0], &g.direction, &g.direction)?;
        m.parallel_transport(&g.base, &g.direction, &basis[0])?;
        Ok(Self { m, g, basis })
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn at(&self, t: f64) -> Result<FrameAt> {
        let vt = &self.g.direction * t;
        let frame = self
            .basis
            .iter()
            .map(|e| self.m.parallel_transport(&self.g.base, &vt, e))
            .collect::<Result<Vec<_>>>()?;
        let velocity = self.m.parallel_transport(&self.g.base, &vt, &self.g.direction)?;
        Ok(FrameAt {
            point: self.m.exp(&self.g.base, &vt),
            velocity,
            frame,
        })
    }

    fn coords(&self, at: &FrameAt, x: &Tangent) -> DVector<f64> {
        DVector::from_iterator(at.frame.len(), at.frame.iter().map(|e| self.m.inner(&at.point, x, e)))
    }

    fn ambient(&self, at: &FrameAt, c: &[f64]) -> Tangent {
        let mut out = Tangent::zeros(at.velocity.nrows(), at.velocity.ncols());
        for (e, &ci) in at.frame.iter().zip(c) {
            out += e * ci;
        }
        out
    }

    fn curvature_matrix(&self, at: &FrameAt) -> Result<nalgebra::DMatrix<f64>> {
        let d = self.dim();
        let mut mat = nalgebra::DMatrix::zeros(d, d);
        for (l, el) in at.frame.iter().enumerate() {
            let r = self.m.riemann(&at.point, el, &at.velocity, &at.velocity)?;
            mat.set_column(l, &self.coords(at, &r));
        }
        Ok(mat)
    }
}

/// `(t, x, ẋ)`.
type RkState = (f64, DVector<f64>, DVector<f64>);

/// Fixed-step RK4 for `ẍ = F(t, x, ẋ)` on `[0, length]` with `x(0) = 0`.
/// `accel` receives the stage time and state. Returns `(t, x, ẋ)` per step.
fn rk4_second_order(
    dim: usize,
    v0: DVector<f64>,
    length: f64,
    steps: usize,
    mut accel: impl FnMut(f64, &DVector<f64>, &DVector<f64>) -> Result<DVector<f64>>,
) -> Result<Vec<RkState>> {
    let h = length / steps as f64;
    let mut x = DVector::zeros(dim);
    let mut v = v0;
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, x.clone(), v.clone()));
    for i in 0..steps {
        let t = i as f64 * h;
        let k1x = v.clone();
        let k1v = accel(t, &x, &v)?;
        let x2 = &x + &k1x * (h / 2.0);
        let v2 = &v + &k1v * (h / 2.0);
        let k2v = accel(t + h / 2.0, &x2, &v2)?;
        let x3 = &x + &v2 * (h / 2.0);
        let v3 = &v + &k2v * (h / 2.0);
        let k3v = accel(t + h / 2.0, &x3, &v3)?;
        let x4 = &x + &v3 * h;
        let v4 = &v + &k3v * h;
        let k4v = accel(t + h, &x4, &v4)?;
        x += (k1x + &v2 * 2.0 + &v3 * 2.0 + &v4) * (h / 6.0);
        v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
        out.push(((i + 1) as f64 * h, x.clone(), v.clone()));
    }
    Ok(out)
}

/// Memoizes frame data by stage time; RK4 revisits `t + h/2` and `t + h`.
struct FrameCache<'a> {
    frame: &'a ParallelFrame<'a>,
    entries: Vec<(f64, FrameAt, nalgebra::DMatrix<f64>)>,
}

impl<'a> FrameCache<'a> {
    fn new(frame: &'a ParallelFrame<'a>) -> Self {
        Self {
            frame,
            entries: Vec::new(),
        }
    }

    fn get(&mut self, t: f64) -> Result<(&FrameAt, &nalgebra::DMatrix<f64>)> {
        if let Some(i) = self.entries.iter().position(|e| e.0 == t) {
            let e = &self.entries[i];
            return Ok((&e.1, &e.2));
        }
        let at = self.frame.at(t)?;
        let curv = self.frame.curvature_matrix(&at)?;
        if self.entries.len() >= 4 {
            self.entries.remove(0);
        }
        self.entries.push((t, at, curv));
        let e = self.entries.last().expect("just pushed");
        Ok((&e.1, &e.2))
    }
}

/// Jacobi field along `g` with `J(0) = 0`, `J̇(0) = jdot0`.
///
/// Requires a curvature tensor and parallel transport (space forms and
/// `SO(n)`) and at least 10 steps.
pub fn integrate_jacobi(m: &dyn Manifold, g: &GeodesicSpec, jdot0: &Tangent, steps: usize) -> Result<JacobiTrace> {
    if steps < 10 {
        return Err(Error::InvalidArgument(format!(
            "need at least 10 RK4 steps, got {steps}"
        )));
    }
    m.check_tangent(&g.base, jdot0)?;
    let frame = ParallelFrame::new(m, g)?;
    let start = frame.at(0.0)?;
    let v0 = frame.coords(&start, jdot0);
    let mut cache = FrameCache::new(&frame);
    let path = rk4_second_order(frame.dim(), v0, g.length, steps, |t, x, _| {
        let (_, curv) = cache.get(t)?;
        Ok(-(curv * x))
    })?;
    let end = frame.at(g.length)?;
    let last = &path.last().expect("at least one step").1;
    let endpoint = frame.ambient(&end, last.as_slice());
    let samples = path
        .into_iter()
        .map(|(t, x, _)| JacobiSample {
            t,
            norm: x.norm(),
            coords: x.iter().copied().collect(),
        })
        .collect();
    Ok(JacobiTrace {
        geodesic: g.clone(),
        samples,
        steps,
        endpoint,
    })
}

/// `K(r)` from `K̈ + R(K, γ̇)γ̇ + Y = 0`, `K(0) = K̇(0) = 0`, with
/// `Y = 2R(J₁, γ̇)J̇₂ + 2R(J₂, γ̇)J̇₁` built from the Jacobi fields `J̇ᵢ(0) = wᵢ`.
///
/// The terms with `∇R` are dropped, so this is exact only on locally symmetric
/// spaces. `(∇d exp_p)_{rv}(w₁, w₂) = K(r)/r²`. Both `wᵢ` must be orthogonal
/// to the direction of `g`.
pub fn hessian_ode(m: &dyn Manifold, g: &GeodesicSpec, w1: &Tangent, w2: &Tangent, steps: usize) -> Result<Tangent> {
    if steps < 10 {
        return Err(Error::InvalidArgument(format!(
            "need at least 10 RK4 steps, got {steps}"
        )));
    }
    for w in [w1, w2] {
        m.check_tangent(&g.base, w)?;
        let scale = m.norm(&g.base, w).max(1.0);
        if m.inner(&g.base, w, &g.direction).abs() > 1e-10 * scale {
            return Err(Error::InvalidArgument("hessian_ode needs w ⟂ direction".into()));
        }
    }
    let frame = ParallelFrame::new(m, g)?;
    let d = frame.dim();
    let start = frame.at(0.0)?;
    let (a1, a2) = (frame.coords(&start, w1), frame.coords(&start, w2));
    let mut cache = FrameCache::new(&frame);
    // State: (J₁, J₂, K) stacked; J̈ᵢ = −M Jᵢ, K̈ = −M K − Y.
    let mut v0 = DVector::zeros(3 * d);
    v0.rows_mut(0, d).copy_from(&a1);
    v0.rows_mut(d, d).copy_from(&a2);
    let path = rk4_second_order(3 * d, v0, g.length, steps, |t, x, xd| {
        let (at, curv) = cache.get(t)?;
        let j1 = frame.ambient(at, x.rows(0, d).as_slice());
        let j2 = frame.ambient(at, x.rows(d, d).as_slice());
        let j1d = frame.ambient(at, xd.rows(0, d).as_slice());
        let j2d = frame.ambient(at, xd.rows(d, d).as_slice());
        let y = (m.riemann(&at.point, &j1, &at.velocity, &j2d)? + m.riemann(&at.point, &j2, &at.velocity, &j1d)?) * 2.0;
        let yc = frame.coords(at, &y);
        let mut acc = DVector::zeros(3 * d);
        acc.rows_mut(0, d).copy_from(&-(curv * x.rows(0, d)));
        acc.rows_mut(d, d).copy_from(&-(curv * x.rows(d, d)));
        acc.rows_mut(2 * d, d).copy_from(&(-(curv * x.rows(2 * d, d)) - yc));
        Ok(acc)
    })?;
    let end = frame.at(g.length)?;
    let last = &path.last().expect("at least one step").1;
    Ok(frame.ambient(&end, last.rows(2 * d, d).as_slice()))
}

/// Central difference `(exp(p, v + hw) − exp(p, v − hw))/(2h)` projected to
/// the tangent space at `exp(p, v)`.
pub fn fd_dexp(m: &dyn Manifold, p: &Point, v: &Tangent, w: &Tangent, h: f64) -> Result<Tangent> {
    if !(h > 0.0) {
        return Err(Error::domain("fd_dexp h", h, "(0, ∞)"));
    }
    Ok(central_difference_dexp(m, p, v, w, h))
}

/// Finite-difference `(∇d exp_p)_v(w₁, w₂)` split against the geodesic velocity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianSample {
    pub geodesic: Option<GeodesicSpec>,
    pub w1: Tangent,
    pub w2: Tangent,
    /// Tangent vector at `exp_p(v)`.
    pub k: Tangent,
    /// `⟨K, γ̇(r)⟩` for the unit-speed geodesic; 0 when `v = 0`.
    pub radial_part: f64,
    pub normal_part_norm: f64,
    pub norm: f64,
    /// `d exp_p` at `v` has a singular value below `1e-6`.
    pub near_conjugate: bool,
}

/// Smallest singular value of `(d exp_p)_v` in orthonormal bases.
pub fn dexp_min_singular_value(m: &dyn Manifold, p: &Point, v: &Tangent) -> f64 {
    let q = m.exp(p, v);
    let src = m.tangent_basis(p);
    let dst = m.tangent_basis(&q);
    let d = src.len();
    let mut mat = nalgebra::DMatrix::zeros(d, d);
    for (j, e) in src.iter().enumerate() {
        let img = m.dexp(p, v, e);
        for (i, f) in dst.iter().enumerate() {
            mat[(i, j)] = m.inner(&q, &img, f);
        }
    }
    mat.singular_values().min()
}

/// `K = Proj_q[(dexp(p, v + h w₂, w₁) − dexp(p, v − h w₂, w₁))/(2h)]`.
///
/// The tangential projection of the ambient derivative is the Levi-Civita
/// covariant derivative only for isometrically embedded representations, so
/// the Grassmannian is [`Error::Unsupported`]. A sample near the conjugate
/// locus is flagged and logged, not rejected.
pub fn fd_hess_exp(
    m: &dyn Manifold,
    p: &Point,
    v: &Tangent,
    w1: &Tangent,
    w2: &Tangent,
    h: f64,
) -> Result<HessianSample> {
    if !m.is_embedded() {
        return Err(Error::unsupported("finite-difference Hessian of exp", m.spec().name()));
    }
    if !(h > 0.0) {
        return Err(Error::domain("fd_hess_exp h", h, "(0, ∞)"));
    }
    let q = m.exp(p, v);
    let plus = m.dexp(p, &(v + w2 * h), w1);
    let minus = m.dexp(p, &(v - w2 * h), w1);
    let k = m.project_tangent(&q, &((plus - minus) / (2.0 * h)));
    let norm = m.norm(&q, &k);
    let r = m.norm(p, v);
    let sigma_min = dexp_min_singular_value(m, p, v);
    let near_conjugate = sigma_min < CONJUGATE_TOL;
    if near_conjugate {
        log::warn!("fd_hess_exp: d exp is nearly singular at ‖v‖ = {r} (σ_min = {sigma_min:e})");
    }
    let (geodesic, radial_part, normal_part_norm) = if r > 0.0 {
        let dir = v / r;
        let vel = m.dexp(p, v, &dir);
        let radial = m.inner(&q, &k, &vel);
        let normal = &k - &vel * radial;
        let g = GeodesicSpec {
            base: p.clone(),
            direction: dir,
            length: r,
        };
        (Some(g), radial, m.norm(&q, &normal))
    } else {
        (None, 0.0, norm)
    };
    Ok(HessianSample {
        geodesic,
        w1: w1.clone(),
        w2: w2.clone(),
        k,
        radial_part,
        normal_part_norm,
        norm,
        near_conjugate,
    })
}

/// Options shared by the Monte-Carlo checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub trials: usize,
    pub r_grid: Vec<f64>,
    pub seed: u64,
    /// Overrides the check's default tolerance.
    pub tolerance: Option<f64>,
    /// Overrides the manifold's curvature profile.
    pub profile: Option<CurvatureProfile>,
    /// Ball radius for the law-of-cosines check.
    pub ball_radius: Option<f64>,
}

impl CheckConfig {
    pub fn new(trials: usize, r_grid: Vec<f64>, seed: u64) -> Self {
        Self {
            trials,
            r_grid,
            seed,
            tolerance: None,
            profile: None,
            ball_radius: None,
        }
    }
}

/// Worst case of one bound at one radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub r: f64,
    /// Which quantity is compared, e.g. `dexp_lower`.
    pub kind: String,
    /// The measured value closest to violating the bound.
    pub measured: f64,
    pub bound: f64,
    /// `bound − measured` for upper bounds, `measured − bound` for lower ones.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub manifold: String,
    pub seed: u64,
    pub trials: usize,
    pub h: Option<f64>,
    pub steps: Option<usize>,
    pub tolerance: f64,
    pub rows: Vec<CheckRow>,
    pub worst_margin: f64,
    pub near_conjugate: usize,
    pub pass: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Upper,
    Lower,
}

/// One measurement against a bound.
struct Obs {
    kind: &'static str,
    side: Side,
    measured: f64,
    bound: f64,
}

impl Obs {
    fn upper(kind: &'static str, measured: f64, bound: f64) -> Self {
        Self {
            kind,
            side: Side::Upper,
            measured,
            bound,
        }
    }

    fn lower(kind: &'static str, measured: f64, bound: f64) -> Self {
        Self {
            kind,
            side: Side::Lower,
            measured,
            bound,
        }
    }

    fn margin(&self) -> f64 {
        match self.side {
            Side::Upper => self.bound - self.measured,
            Side::Lower => self.measured - self.bound,
        }
    }
}

/// Seed of trial `i` at grid index `j`; independent of thread scheduling.
fn trial_seed(seed: u64, j: usize, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((j as u64) << 32)
        .wrapping_add(i as u64)
}

/// Keeps, for every `(r, kind)`, the observation with the smallest margin.
/// Rows are ordered by grid index, then by first appearance of `kind`.
fn aggregate(r_grid: &[f64], per_r: Vec<Vec<Vec<Obs>>>) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    for (r, trials) in r_grid.iter().zip(per_r) {
        let mut worst: Vec<Obs> = Vec::new();
        for obs in trials.into_iter().flatten() {
            match worst.iter_mut().find(|w| w.kind == obs.kind) {
                Some(w) if obs.margin() < w.margin() => *w = obs,
                Some(_) => {}
                None => worst.push(obs),
            }
        }
        rows.extend(worst.into_iter().map(|o| CheckRow {
            r: *r,
            kind: o.kind.to_string(),
            measured: o.measured,
            bound: o.bound,
            margin: o.margin(),
        }));
    }
    rows
}

fn finish_report(
    name: &str,
    m: &dyn Manifold,
    cfg: &CheckConfig,
    tolerance: f64,
    h: Option<f64>,
    rows: Vec<CheckRow>,
    near_conjugate: usize,
) -> CheckReport {
    let worst_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    CheckReport {
        name: name.to_string(),
        manifold: m.spec().name(),
        seed: cfg.seed,
        trials: cfg.trials,
        h,
        steps: None,
        tolerance,
        pass: rows.iter().all(|r| r.margin >= -tolerance),
        rows,
        worst_margin,
        near_conjugate,
    }
}

/// Unit `v` and unit `w ⟂ v` at `p`.
fn orthonormal_pair(m: &dyn Manifold, p: &Point, rng: &mut ManifoldRng) -> (Tangent, Tangent) {
    loop {
        let v = m.random_tangent(p, rng);
        let w = m.random_tangent(p, rng);
        let Some(v) = m.normalize(p, &v) else { continue };
        let w = &w - &v * m.inner(p, &w, &v);
        if let Some(w) = m.normalize(p, &w) {
            return (v, w);
        }
    }
}

fn unit_tangent(m: &dyn Manifold, p: &Point, rng: &mut ManifoldRng) -> Tangent {
    loop {
        if let Some(u) = m.normalize(p, &m.random_tangent(p, rng)) {
            return u;
        }
    }
}

fn check_grid(r_grid: &[f64], limit: f64, what: &'static str) -> Result<()> {
    if r_grid.is_empty() {
        return Err(Error::InvalidArgument("empty r grid".into()));
    }
    for &r in r_grid {
        if !(r > 0.0 && r < limit) {
            return Err(Error::domain(what, r, format!("(0, {limit})")));
        }
    }
    Ok(())
}

/// Runs `trial(j, r, rng)` for every grid point and trial in parallel and
/// returns the observations in grid/trial order.
fn sweep<F>(cfg: &CheckConfig, trial: F) -> Result<Vec<Vec<Vec<Obs>>>>
where
    F: Fn(f64, &mut ManifoldRng) -> Result<Vec<Obs>> + Sync,
{
    cfg.r_grid
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            (0..cfg.trials)
                .into_par_iter()
                .map(|i| trial(r, &mut ManifoldRng::seed_from_u64(trial_seed(cfg.seed, j, i))))
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

/// First-order bounds: `min{1, sn_Δ(r)/r} ≤ ‖(d exp_p)_{rv}(w)‖ ≤ max{1, sn_δ(r)/r}`
/// for unit `w ⟂ v`, measured with the analytic `dexp`. The lower bound is
/// checked for `r ≤ π_Δ`, the upper one on the whole grid, which must lie
/// below `π_{(Δ+δ)/2}`. Default tolerance `1e-6`.
pub fn check_rauch(m: &dyn Manifold, cfg: &CheckConfig) -> Result<CheckReport> {
    let prof = cfg.profile.unwrap_or_else(|| m.curvature_profile());
    prof.validate()?;
    check_grid(
        &cfg.r_grid,
        prof.radius_second().max(prof.radius_first()),
        "check_rauch r",
    )?;
    let tol = cfg.tolerance.unwrap_or(1e-6);
    let results = sweep(cfg, |r, rng| {
        let p = m.random_point(rng);
        let (v, w) = orthonormal_pair(m, &p, rng);
        let q = m.exp(&p, &(&v * r));
        let measured = m.norm(&q, &m.dexp(&p, &(&v * r), &w));
        let mut obs = vec![Obs::upper("dexp_upper", measured, bounds::first_order_upper(&prof, r))];
        if r <= prof.radius_first() {
            let (lo, _) = bounds::first_order_bounds(&prof, r)?;
            obs.push(Obs::lower("dexp_lower", measured, lo));
        }
        Ok(obs)
    })?;
    let rows = aggregate(&cfg.r_grid, results);
    Ok(finish_report("rauch", m, cfg, tol, None, rows, 0))
}

/// Second-order bounds, by [`fd_hess_exp`] at `h = 1e-3`:
///
/// * unit `w ⟂ v`, `w₁ = w₂ = w`: radial part within the radial bounds and
///   the full vector within `√(σ² + ρ²)` (for `r < π_Δ`), normal part below `ρ`;
/// * independent unit `w₁, w₂`: norm below the full-Hessian bound.
///
/// The grid must lie below `π_{(Δ+δ)/2}`. Default tolerance `1e-4`.
pub fn check_second_order(m: &dyn Manifold, cfg: &CheckConfig) -> Result<CheckReport> {
    let prof = cfg.profile.unwrap_or_else(|| m.curvature_profile());
    prof.validate()?;
    check_grid(&cfg.r_grid, prof.radius_second(), "check_second_order r")?;
    if !m.is_embedded() {
        return Err(Error::unsupported("finite-difference Hessian of exp", m.spec().name()));
    }
    let tol = cfg.tolerance.unwrap_or(1e-4);
    let h = FD_HESS_STEP;
    let near = std::sync::atomic::AtomicUsize::new(0);
    let results = sweep(cfg, |r, rng| {
        let p = m.random_point(rng);
        let (v, w) = orthonormal_pair(m, &p, rng);
        let vr = &v * r;
        let normal = fd_hess_exp(m, &p, &vr, &w, &w, h)?;
        let mut obs = Vec::with_capacity(5);
        if r < prof.radius_first() {
            let (lo, hi) = bounds::hess_radial_bounds(&prof, r)?;
            obs.push(Obs::lower("radial_lower", normal.radial_part, lo));
            obs.push(Obs::upper("radial_upper", normal.radial_part, hi));
            obs.push(Obs::upper(
                "tight_upper",
                normal.norm,
                bounds::hess_full_tight(&prof, r)?,
            ));
        }
        obs.push(Obs::upper(
            "normal_upper",
            normal.normal_part_norm,
            bounds::hess_normal_bound(&prof, r)?,
        ));
        let w1 = unit_tangent(m, &p, rng);
        let w2 = unit_tangent(m, &p, rng);
        let general = fd_hess_exp(m, &p, &vr, &w1, &w2, h)?;
        obs.push(Obs::upper(
            "full_upper",
            general.norm,
            bounds::hess_full_bound(&prof, r)?,
        ));
        let flagged = usize::from(normal.near_conjugate) + usize::from(general.near_conjugate);
        near.fetch_add(flagged, std::sync::atomic::Ordering::Relaxed);
        Ok(obs)
    })?;
    let rows = aggregate(&cfg.r_grid, results);
    Ok(finish_report(
        "second_order",
        m,
        cfg,
        tol,
        Some(h),
        rows,
        near.into_inner(),
    ))
}

/// Default ball radius for the law of cosines: `min(π_Δ, inj)/2`, capped at 2.
pub fn default_ball_radius(prof: &CurvatureProfile) -> f64 {
    (prof.radius_first().min(prof.inj_lower) / 2.0).min(2.0)
}

/// Point at distance `< radius` from `p`, uniform in the radial parameter.
fn point_in_ball(m: &dyn Manifold, p: &Point, radius: f64, rng: &mut ManifoldRng) -> Point {
    let u = unit_tangent(m, p, rng);
    let s: f64 = rng.random::<f64>() * radius;
    m.exp(p, &(u * s))
}

/// Law of cosines on random triangles `p, x, y` with `x, y ∈ B_p(R)` and the
/// segment `xy` inside the ball: `d(y,p)²` between the lower and upper
/// right-hand sides. Triangles whose segment leaves the ball are resampled.
/// Default tolerance `1e-8`.
pub fn check_law_of_cosines(m: &dyn Manifold, cfg: &CheckConfig) -> Result<CheckReport> {
    let prof = cfg.profile.unwrap_or_else(|| m.curvature_profile());
    prof.validate()?;
    let radius = cfg.ball_radius.unwrap_or_else(|| default_ball_radius(&prof));
    let limit = prof.radius_first().min(prof.inj_lower);
    if !(radius > 0.0 && radius <= limit) {
        return Err(Error::domain(
            "law of cosines ball radius",
            radius,
            format!("(0, {limit}]"),
        ));
    }
    let tol = cfg.tolerance.unwrap_or(1e-8);
    let grid = [radius];
    let sub = CheckConfig {
        r_grid: grid.to_vec(),
        ..cfg.clone()
    };
    let results = sweep(&sub, |_, rng| {
        let (p, x, y) = loop {
            let p = m.random_point(rng);
            let x = point_in_ball(m, &p, radius, rng);
            let y = point_in_ball(m, &p, radius, rng);
            let Ok(l) = m.log(&x, &y) else { continue };
            let inside = (1..16).all(|i| m.distance(&p, &m.exp(&x, &(&l * (i as f64 / 16.0)))) < radius);
            if inside {
                break (p, x, y);
            }
        };
        let dxy = m.distance(&x, &y);
        let dxp = m.distance(&x, &p);
        let dyp = m.distance(&y, &p);
        let cos = if dxy > 0.0 && dxp > 0.0 {
            let a = m.log(&x, &p)?;
            let b = m.log(&x, &y)?;
            (m.inner(&x, &a, &b) / (m.norm(&x, &a) * m.norm(&x, &b))).clamp(-1.0, 1.0)
        } else {
            1.0
        };
        let (upper, lower) = bounds::law_of_cosines_rhs(&prof, radius, dxy, dxp, cos)?;
        let measured = dyp * dyp;
        Ok(vec![
            Obs::upper("cosines_upper", measured, upper),
            Obs::lower("cosines_lower", measured, lower),
        ])
    })?;
    let rows = aggregate(&grid, results);
    Ok(finish_report("law_of_cosines", m, cfg, tol, None, rows, 0))
}

/// Jacobi-field check: `‖J(r)/r − d exp_p(rv)(w)‖` for unit `w` and the
/// analytic `dexp`, reported as an upper bound of 0 with tolerance `1e-5`.
pub fn check_jacobi(m: &dyn Manifold, cfg: &CheckConfig) -> Result<CheckReport> {
    let prof = cfg.profile.unwrap_or_else(|| m.curvature_profile());
    check_grid(
        &cfg.r_grid,
        prof.radius_second().max(prof.radius_first()),
        "check_jacobi r",
    )?;
    let tol = cfg.tolerance.unwrap_or(1e-5);
    let results = sweep(cfg, |r, rng| {
        let g = GeodesicSpec::random(m, r, rng)?;
        let w = unit_tangent(m, &g.base, rng);
        let trace = integrate_jacobi(m, &g, &w, steps_for_length(r))?;
        let q = g.endpoint(m);
        let exact = m.dexp(&g.base, &(&g.direction * r), &w);
        let err = m.norm(&q, &(&trace.endpoint / r - exact));
        Ok(vec![Obs::upper("jacobi_error", err, 0.0)])
    })?;
    let rows = aggregate(&cfg.r_grid, results);
    let mut report = finish_report("jacobi", m, cfg, tol, None, rows, 0);
    report.steps = cfg.r_grid.iter().map(|&r| steps_for_length(r)).max();
    Ok(report)
}
