//! Riemannian gradient descent `p_{k+1} = exp_{p_k}(−t_k grad f(p_k))` and a
//! feasibility-preserving Euclidean baseline.
//!
//! Every run stops as soon as `‖f'(p_k)‖_∞ ≤ tol`, where `f'` is the Euclidean
//! gradient flattened entrywise. Stepsizes:
//!
//! - `Lipschitz`: constant `t = 1/L`.
//! - `Adaptive`: trial `τᵢ = 1/(ηⁱ L_{k−1})`, first `i ≥ 0` satisfying the
//!   Armijo condition; then `L_k = ηⁱ L_{k−1}`, so stepsizes never grow.
//! - `Armijo`: largest `2⁻ⁱ` satisfying the Armijo condition.
//! - `EuclideanArmijo`: `x − t f'(x)` with `t` started at
//!   `min(1, boundary_fraction · t_max)` and halved, `t_max` being the largest
//!   step that keeps the iterate in the open cone.
//!
//! The Armijo condition is `f(trial) ≤ f(p_k) − β t ‖grad f(p_k)‖²`.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{self, check_point, Point, Tangent};
use crate::objectives::Objective;
use crate::orthant::OrthantPoint;
use crate::spd::{sym_eig, SpdMatrix, SymMatrix};

/// Default cap on line-search trials per iteration.
pub const MAX_TRIALS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StepsizeStrategy {
    Lipschitz { l: f64 },
    Adaptive { beta: f64, l0: f64, eta: f64 },
    Armijo { beta: f64 },
    EuclideanArmijo { beta: f64, boundary_fraction: f64 },
}

impl StepsizeStrategy {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        match *self {
            StepsizeStrategy::Lipschitz { l } => {
                if !(l > 0.0 && l.is_finite()) {
                    return Err(invalid(format!("Lipschitz constant must be positive, got {l}")));
                }
            }
            StepsizeStrategy::Adaptive { beta, l0, eta } => {
                unit("beta", beta)?;
                if !(l0 > 0.0 && l0.is_finite()) {
                    return Err(invalid(format!("L0 must be positive, got {l0}")));
                }
                if !(eta > 1.0 && eta.is_finite()) {
                    return Err(invalid(format!("eta must exceed 1, got {eta}")));
                }
            }
            StepsizeStrategy::Armijo { beta } => unit("beta", beta)?,
            StepsizeStrategy::EuclideanArmijo { beta, boundary_fraction } => {
                unit("beta", beta)?;
                unit("boundary_fraction", boundary_fraction)?;
            }
        }
        Ok(())
    }

    /// Short label used in result tables.
    pub fn label(&self) -> &'static str {
        match self {
            StepsizeStrategy::Lipschitz { .. } => "lipschitz",
            StepsizeStrategy::Adaptive { .. } => "adaptive",
            StepsizeStrategy::Armijo { .. } => "armijo",
            StepsizeStrategy::EuclideanArmijo { .. } => "euclidean",
        }
    }

    /// The descent constant `ν` of `f(p_{k+1}) ≤ f(p_k) − ν t_k ‖grad f(p_k)‖²`.
    pub fn descent_nu(&self) -> f64 {
        match *self {
            StepsizeStrategy::Lipschitz { .. } => 0.5,
            StepsizeStrategy::Adaptive { beta, .. }
            | StepsizeStrategy::Armijo { beta }
            | StepsizeStrategy::EuclideanArmijo { beta, .. } => beta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub tol_inf_egrad: f64,
    pub max_iter: usize,
    /// Keep every iterate in the report (needed for distance-based checks).
    pub record_trajectory: bool,
    /// Carried into reports for bookkeeping; the solver itself draws no random numbers.
    pub rng_seed: u64,
    pub max_trials: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol_inf_egrad: 1e-5, max_iter: 1000, record_trajectory: false, rng_seed: 0, max_trials: MAX_TRIALS }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_inf_egrad > 0.0) {
            return Err(invalid("tolerance must be positive"));
        }
        if self.max_iter < 1 {
            return Err(invalid("max_iter must be at least 1"));
        }
        if self.max_trials < 1 {
            return Err(invalid("max_trials must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIter,
    LineSearchFailed,
    NumericError,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIter => "max_iter",
            Status::LineSearchFailed => "line_search_failed",
            Status::NumericError => "numeric_error",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Full record of one run. Histories indexed by `k = 0..=iters` describe the
/// point `p_k`; `step_hist[k]` is the stepsize that moved `p_k` to `p_{k+1}`.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: Status,
    pub iters: usize,
    pub nfev: usize,
    pub ngev: usize,
    pub f_hist: Vec<f64>,
    pub egrad_infnorm_hist: Vec<f64>,
    pub rgrad_norm_hist: Vec<f64>,
    pub step_hist: Vec<f64>,
    /// Cumulative `nfev` after `p_k` was accepted.
    pub nfev_hist: Vec<usize>,
    pub iterates: Option<Vec<Point>>,
    pub final_point: Point,
    pub wall_time: f64,
    /// Failure detail for `LineSearchFailed` / `NumericError`.
    pub message: Option<String>,
}

impl SolveReport {
    pub fn final_f(&self) -> f64 {
        *self.f_hist.last().expect("at least the starting point is recorded")
    }

    pub fn final_egrad_infnorm(&self) -> f64 {
        *self.egrad_infnorm_hist.last().expect("at least the starting point is recorded")
    }

    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    /// CSV with columns `iter,f,egrad_infnorm,rgrad_norm,step,cum_nfev`; the
    /// last row has an empty `step`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["iter", "f", "egrad_infnorm", "rgrad_norm", "step", "cum_nfev"])?;
        for k in 0..self.f_hist.len() {
            let step = self.step_hist.get(k).map(|t| t.to_string()).unwrap_or_default();
            out.write_record([
                k.to_string(),
                self.f_hist[k].to_string(),
                self.egrad_infnorm_hist[k].to_string(),
                self.rgrad_norm_hist[k].to_string(),
                step,
                self.nfev_hist[k].to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Result of evaluating one trial stepsize.
#[derive(Debug, Clone)]
pub enum Trial<P> {
    /// The trial point could not be formed (overflow or left the cone); no evaluation happened.
    Infeasible,
    /// The trial point and its objective value (possibly non-finite).
    Evaluated(P, f64),
}

/// An accepted stepsize along with the point it produced.
#[derive(Debug, Clone)]
pub struct StepOutcome<P> {
    pub t: f64,
    pub point: P,
    pub value: f64,
    /// Number of trials tried, including the accepted one.
    pub trials: usize,
    /// Number of trials that evaluated the objective.
    pub evaluations: usize,
    /// Updated `L_k` for the adaptive rule; `1/t` otherwise.
    pub l_new: f64,
}

/// Failed line search, with the evaluations spent on it.
#[derive(Debug, Clone, Copy)]
pub struct SearchFailure {
    pub trials: usize,
    pub evaluations: usize,
}

/// Constant stepsize `1/L`.
pub fn step_lipschitz(l: f64) -> Result<f64> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(invalid(format!("Lipschitz constant must be positive, got {l}")));
    }
    Ok(1.0 / l)
}

fn armijo_ok(f0: f64, f1: f64, beta: f64, t: f64, g2: f64) -> bool {
    f1.is_finite() && f1 <= f0 - beta * t * g2
}

/// Backtracking over trial steps `steps(i)` for `i = 0, 1, …, max_trials − 1`.
fn backtrack<P>(
    f0: f64,
    g2: f64,
    beta: f64,
    max_trials: usize,
    steps: impl Fn(usize) -> f64,
    mut trial: impl FnMut(f64) -> Trial<P>,
) -> std::result::Result<(usize, StepOutcome<P>), SearchFailure> {
    let mut evaluations = 0;
    for i in 0..max_trials {
        let t = steps(i);
        if let Trial::Evaluated(point, value) = trial(t) {
            evaluations += 1;
            if armijo_ok(f0, value, beta, t, g2) {
                let out = StepOutcome { t, point, value, trials: i + 1, evaluations, l_new: 1.0 / t };
                return Ok((i, out));
            }
        }
    }
    Err(SearchFailure { trials: max_trials, evaluations })
}

/// Adaptive rule: tries `τᵢ = 1/(ηⁱ L_prev)` and returns `L_new = ηⁱ L_prev`.
pub fn step_adaptive<P>(
    l_prev: f64,
    beta: f64,
    eta: f64,
    f0: f64,
    g2: f64,
    max_trials: usize,
    trial: impl FnMut(f64) -> Trial<P>,
) -> std::result::Result<StepOutcome<P>, SearchFailure> {
    let (i, mut out) = backtrack(f0, g2, beta, max_trials, |i| 1.0 / (l_prev * eta.powi(i as i32)), trial)?;
    out.l_new = l_prev * eta.powi(i as i32);
    Ok(out)
}

/// Armijo rule over `1, 1/2, 1/4, …`.
pub fn step_armijo<P>(
    beta: f64,
    f0: f64,
    g2: f64,
    max_trials: usize,
    trial: impl FnMut(f64) -> Trial<P>,
) -> std::result::Result<StepOutcome<P>, SearchFailure> {
    backtrack(f0, g2, beta, max_trials, |i| 0.5f64.powi(i as i32), trial).map(|(_, o)| o)
}

struct Recorder {
    f_hist: Vec<f64>,
    egrad_infnorm_hist: Vec<f64>,
    rgrad_norm_hist: Vec<f64>,
    step_hist: Vec<f64>,
    nfev_hist: Vec<usize>,
    iterates: Option<Vec<Point>>,
    nfev: usize,
    ngev: usize,
}

impl Recorder {
    fn new(record: bool) -> Self {
        Self {
            f_hist: Vec::new(),
            egrad_infnorm_hist: Vec::new(),
            rgrad_norm_hist: Vec::new(),
            step_hist: Vec::new(),
            nfev_hist: Vec::new(),
            iterates: record.then(Vec::new),
            nfev: 0,
            ngev: 0,
        }
    }

    fn push_point(&mut self, p: &Point, f: f64, ginf: f64, rnorm: f64) {
        self.f_hist.push(f);
        self.egrad_infnorm_hist.push(ginf);
        self.rgrad_norm_hist.push(rnorm);
        self.nfev_hist.push(self.nfev);
        if let Some(it) = self.iterates.as_mut() {
            it.push(p.clone());
        }
    }

    fn finish(self, status: Status, final_point: Point, start: Instant, message: Option<String>) -> SolveReport {
        SolveReport {
            status,
            iters: self.step_hist.len(),
            nfev: self.nfev,
            ngev: self.ngev,
            f_hist: self.f_hist,
            egrad_infnorm_hist: self.egrad_infnorm_hist,
            rgrad_norm_hist: self.rgrad_norm_hist,
            step_hist: self.step_hist,
            nfev_hist: self.nfev_hist,
            iterates: self.iterates,
            final_point,
            wall_time: start.elapsed().as_secs_f64(),
            message,
        }
    }
}

fn finite(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Runs Riemannian gradient descent from `x0`.
///
/// A Euclidean strategy is forwarded to [`euclidean_solve`]. Errors are
/// returned only for invalid input (bad configuration, infeasible start, or
/// non-finite value/gradient at `x0`); problems met later end the run with
/// `LineSearchFailed` or `NumericError`.
pub fn solve(
    objective: &dyn Objective,
    x0: &Point,
    strategy: &StepsizeStrategy,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    if let StepsizeStrategy::EuclideanArmijo { .. } = strategy {
        return euclidean_solve(objective, x0, strategy, cfg);
    }
    strategy.validate()?;
    cfg.validate()?;
    let kind = objective.kind();
    check_point(kind, x0)?;
    let start = Instant::now();
    let mut rec = Recorder::new(cfg.record_trajectory);

    let mut p = x0.clone();
    let mut f = finite(objective.value(&p)?, "objective value at the starting point")?;
    rec.nfev += 1;
    let (mut g, mut r) = objective.gradients(&p)?;
    rec.ngev += 1;
    if !g.is_finite() || !r.is_finite() {
        return Err(Error::NonFinite("gradient at the starting point"));
    }
    let mut rnorm = geometry::norm(kind, &p, &r)?;
    rec.push_point(&p, f, g.inf_norm(), rnorm);

    let mut l_prev = match *strategy {
        StepsizeStrategy::Adaptive { l0, .. } => l0,
        _ => f64::NAN,
    };

    let fail = |rec: Recorder, status, p: Point, msg: String| Ok(rec.finish(status, p, start, Some(msg)));

    loop {
        if g.inf_norm() <= cfg.tol_inf_egrad {
            return Ok(rec.finish(Status::Converged, p, start, None));
        }
        if rec.step_hist.len() >= cfg.max_iter {
            return Ok(rec.finish(Status::MaxIter, p, start, None));
        }
        let g2 = rnorm * rnorm;
        let trial = |t: f64| -> Trial<Point> {
            match geometry::exp_map(kind, &p, &r.scale(-t)) {
                Ok(q) => {
                    let fq = objective.value(&q).unwrap_or(f64::NAN);
                    Trial::Evaluated(q, fq)
                }
                Err(_) => Trial::Infeasible,
            }
        };
        let outcome = match *strategy {
            StepsizeStrategy::Lipschitz { l } => {
                let t = step_lipschitz(l)?;
                match trial(t) {
                    Trial::Evaluated(q, fq) if fq.is_finite() => {
                        StepOutcome { t, point: q, value: fq, trials: 1, evaluations: 1, l_new: l }
                    }
                    Trial::Evaluated(..) => {
                        rec.nfev += 1;
                        return fail(rec, Status::NumericError, p, "non-finite objective value".into());
                    }
                    Trial::Infeasible => {
                        return fail(rec, Status::NumericError, p, "exponential map overflow".into());
                    }
                }
            }
            StepsizeStrategy::Adaptive { beta, eta, .. } => {
                match step_adaptive(l_prev, beta, eta, f, g2, cfg.max_trials, trial) {
                    Ok(o) => o,
                    Err(e) => {
                        rec.nfev += e.evaluations;
                        let msg = Error::LineSearchFailed { trials: e.trials }.to_string();
                        return fail(rec, Status::LineSearchFailed, p, msg);
                    }
                }
            }
            StepsizeStrategy::Armijo { beta } => match step_armijo(beta, f, g2, cfg.max_trials, trial) {
                Ok(o) => o,
                Err(e) => {
                    rec.nfev += e.evaluations;
                    let msg = Error::LineSearchFailed { trials: e.trials }.to_string();
                    return fail(rec, Status::LineSearchFailed, p, msg);
                }
            },
            StepsizeStrategy::EuclideanArmijo { .. } => unreachable!("dispatched above"),
        };
        rec.nfev += outcome.evaluations;
        l_prev = outcome.l_new;

        let (g_new, r_new) = match objective.gradients(&outcome.point) {
            Ok(gr) if gr.0.is_finite() && gr.1.is_finite() => gr,
            Ok(_) => return fail(rec, Status::NumericError, p, "non-finite gradient".into()),
            Err(e) => return fail(rec, Status::NumericError, p, e.to_string()),
        };
        rec.ngev += 1;
        let rn = match geometry::norm(kind, &outcome.point, &r_new) {
            Ok(v) => v,
            Err(e) => return fail(rec, Status::NumericError, p, e.to_string()),
        };
        rec.step_hist.push(outcome.t);
        p = outcome.point;
        f = outcome.value;
        g = g_new;
        r = r_new;
        rnorm = rn;
        rec.push_point(&p, f, g.inf_norm(), rnorm);
    }
}

/// Largest `t` keeping `x − t f'(x)` feasible (`+∞` when every direction is safe).
pub fn euclidean_max_step(p: &Point, g: &Tangent) -> Result<f64> {
    match (p, g) {
        (Point::Orthant(x), Tangent::Orthant(g)) => Ok(x
            .coords()
            .iter()
            .zip(g.iter())
            .filter(|(_, &gi)| gi > 0.0)
            .map(|(&xi, &gi)| xi / gi)
            .fold(f64::INFINITY, f64::min)),
        (Point::Spd(x), Tangent::Spd(g)) => {
            // X − tG loses definiteness when t reaches 1/λ_max(X^{-1/2} G X^{-1/2}).
            let s = x.inv_sqrt();
            let w = SymMatrix::symmetrize(s.matrix() * g.matrix() * s.matrix())?;
            let lmax = sym_eig(&w)?.largest();
            Ok(if lmax > 0.0 { 1.0 / lmax } else { f64::INFINITY })
        }
        _ => Err(Error::KindMismatch { expected: p.kind().to_string(), found: g.shape_kind().to_string() }),
    }
}

fn euclidean_trial(p: &Point, g: &Tangent, t: f64) -> Option<Point> {
    match (p, g) {
        (Point::Orthant(x), Tangent::Orthant(g)) => OrthantPoint::new(x.coords() - g * t).ok().map(Point::Orthant),
        (Point::Spd(x), Tangent::Spd(g)) => SpdMatrix::new(x.matrix() - g.matrix() * t).ok().map(Point::Spd),
        _ => None,
    }
}

/// Euclidean gradient descent `x_{k+1} = x_k − t_k f'(x_k)` with a
/// feasibility-capped Armijo search.
pub fn euclidean_solve(
    objective: &dyn Objective,
    x0: &Point,
    strategy: &StepsizeStrategy,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    let StepsizeStrategy::EuclideanArmijo { beta, boundary_fraction } = *strategy else {
        return Err(invalid("euclidean_solve needs the EuclideanArmijo strategy"));
    };
    strategy.validate()?;
    cfg.validate()?;
    let kind = objective.kind();
    check_point(kind, x0)?;
    let start = Instant::now();
    let mut rec = Recorder::new(cfg.record_trajectory);

    let mut p = x0.clone();
    let mut f = finite(objective.value(&p)?, "objective value at the starting point")?;
    rec.nfev += 1;
    let mut g = objective.egrad(&p)?;
    rec.ngev += 1;
    if !g.is_finite() {
        return Err(Error::NonFinite("gradient at the starting point"));
    }
    rec.push_point(&p, f, g.inf_norm(), geometry::rgrad_norm(kind, &p, &g)?);

    loop {
        if g.inf_norm() <= cfg.tol_inf_egrad {
            return Ok(rec.finish(Status::Converged, p, start, None));
        }
        if rec.step_hist.len() >= cfg.max_iter {
            return Ok(rec.finish(Status::MaxIter, p, start, None));
        }
        let t_max = match euclidean_max_step(&p, &g) {
            Ok(t) => t,
            Err(e) => return Ok(rec.finish(Status::NumericError, p, start, Some(e.to_string()))),
        };
        let t0 = (boundary_fraction * t_max).min(1.0);
        let g2 = g.flat_norm().powi(2);
        let trial = |t: f64| match euclidean_trial(&p, &g, t) {
            Some(q) => {
                let fq = objective.value(&q).unwrap_or(f64::NAN);
                Trial::Evaluated(q, fq)
            }
            None => Trial::Infeasible,
        };
        let outcome = match backtrack(f, g2, beta, cfg.max_trials, |i| t0 * 0.5f64.powi(i as i32), trial) {
            Ok((_, o)) => o,
            Err(e) => {
                rec.nfev += e.evaluations;
                let msg = Error::LineSearchFailed { trials: e.trials }.to_string();
                return Ok(rec.finish(Status::LineSearchFailed, p, start, Some(msg)));
            }
        };
        rec.nfev += outcome.evaluations;
        let g_new = match objective.egrad(&outcome.point) {
            Ok(g) if g.is_finite() => g,
            Ok(_) => return Ok(rec.finish(Status::NumericError, p, start, Some("non-finite gradient".into()))),
            Err(e) => return Ok(rec.finish(Status::NumericError, p, start, Some(e.to_string()))),
        };
        rec.ngev += 1;
        let rn = geometry::rgrad_norm(kind, &outcome.point, &g_new)?;
        rec.step_hist.push(outcome.t);
        p = outcome.point;
        f = outcome.value;
        g = g_new;
        rec.push_point(&p, f, g.inf_norm(), rn);
    }
}
