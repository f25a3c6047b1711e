//! Inequalities evaluated along recorded trajectories.

use std::io::Write;

use super::{
    c_rho_kappa, complexity_grad_bound, complexity_value_bound, fejer_radius, nonconvex_grad_bound,
    BoundConstants, CurvatureParams,
};
use crate::error::{Error, Result};
use crate::geometry::{self, Point};
use crate::objectives::Objective;
use crate::solver::SolveReport;

const REL_SLACK: f64 = 1e-9;
const ABS_SLACK: f64 = 1e-12;

/// `lhs ≤ rhs` up to the shared relative and absolute slack.
pub fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + REL_SLACK * rhs.abs() + ABS_SLACK
}

/// Per-iteration left and right sides of one inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundTrace {
    pub name: String,
    pub iters: Vec<usize>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub satisfied: Vec<bool>,
}

impl BoundTrace {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), iters: Vec::new(), lhs: Vec::new(), rhs: Vec::new(), satisfied: Vec::new() }
    }

    pub fn push(&mut self, iter: usize, lhs: f64, rhs: f64) {
        self.iters.push(iter);
        self.lhs.push(lhs);
        self.rhs.push(rhs);
        self.satisfied.push(within(lhs, rhs));
    }

    pub fn len(&self) -> usize {
        self.lhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lhs.is_empty()
    }

    pub fn violations(&self) -> usize {
        self.satisfied.iter().filter(|s| !**s).count()
    }

    pub fn all_satisfied(&self) -> bool {
        self.violations() == 0
    }

    /// CSV with columns `iter,lhs,rhs,satisfied`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["iter", "lhs", "rhs", "satisfied"])?;
        for i in 0..self.len() {
            out.write_record([
                self.iters[i].to_string(),
                self.lhs[i].to_string(),
                self.rhs[i].to_string(),
                self.satisfied[i].to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn check_hist(report: &SolveReport) -> Result<()> {
    let n = report.iters;
    if report.f_hist.len() != n + 1 || report.rgrad_norm_hist.len() != n + 1 || report.step_hist.len() != n {
        return Err(Error::MissingData("trajectory histories"));
    }
    Ok(())
}

fn iterates(report: &SolveReport) -> Result<&[Point]> {
    check_hist(report)?;
    match &report.iterates {
        Some(it) if it.len() == report.iters + 1 => Ok(it),
        _ => Err(Error::MissingData("recorded iterates")),
    }
}

/// `f(p_{k+1}) ≤ f(p_k) − ν t_k ‖grad f(p_k)‖²` for every step.
pub fn check_descent(report: &SolveReport, nu: f64) -> Result<BoundTrace> {
    check_hist(report)?;
    let mut tr = BoundTrace::new("descent");
    for k in 0..report.iters {
        let g = report.rgrad_norm_hist[k];
        tr.push(k, report.f_hist[k + 1], report.f_hist[k] - nu * report.step_hist[k] * g * g);
    }
    Ok(tr)
}

fn distances(objective: &dyn Objective, pts: &[Point], q: &Point) -> Result<Vec<f64>> {
    let kind = objective.kind();
    pts.iter().map(|p| geometry::dist(kind, p, q)).collect()
}

/// `tanh(x)/x`, continuous at zero.
fn tanhc(x: f64) -> f64 {
    if x < 1e-8 {
        1.0
    } else {
        x.tanh() / x
    }
}

/// The two comparison inequalities along each step `γ(t_k) = p_{k+1}`:
/// the `cosh` form and the `d²` form. At `κ̂ = 0` both reduce to
/// `d²(p_{k+1}, q) ≤ d²(p_k, q) + t²‖g‖² − 2t(f(p_k) − f(q))`.
pub fn check_lemli(
    objective: &dyn Objective,
    report: &SolveReport,
    q: &Point,
    curvature: CurvatureParams,
) -> Result<(BoundTrace, BoundTrace)> {
    let pts = iterates(report)?;
    let fq = objective.value(q)?;
    let d = distances(objective, pts, q)?;
    let k = curvature.kappa_hat;
    let mut cosh_tr = BoundTrace::new("lemma_cosh");
    let mut sq_tr = BoundTrace::new("lemma_dist_sq");
    for i in 0..report.iters {
        let t = report.step_hist[i];
        let g = report.rgrad_norm_hist[i];
        let gap = report.f_hist[i] - fq;
        let (d0, d1) = (d[i], d[i + 1]);
        if g == 0.0 {
            cosh_tr.push(i, d1 * d1, d0 * d0);
            sq_tr.push(i, d1 * d1, d0 * d0);
            continue;
        }
        if k == 0.0 {
            let rhs = d0 * d0 + t * g * (t * g - 2.0 * gap / g);
            cosh_tr.push(i, d1 * d1, rhs);
            sq_tr.push(i, d1 * d1, rhs);
            continue;
        }
        let c0 = (k * d0).cosh();
        let lhs = (k * d1).cosh();
        let bracket = t * g / 2.0 - tanhc(k * d0) * gap / g;
        cosh_tr.push(i, lhs, c0 + k * c0 * (t * k * g).sinh() * bracket);
        let sq_rhs = d0 * d0 + (k * t * g).sinh() / k * (t * g / tanhc(k * d0) - 2.0 * gap / g);
        sq_tr.push(i, d1 * d1, sq_rhs);
    }
    Ok((cosh_tr, sq_tr))
}

/// `d(p_k, q) ≤ R(κ̂, ρ, d(p₀, q))` for every recorded iterate.
pub fn check_fejer(
    objective: &dyn Objective,
    report: &SolveReport,
    q: &Point,
    curvature: CurvatureParams,
    rho: f64,
) -> Result<BoundTrace> {
    let pts = iterates(report)?;
    let d = distances(objective, pts, q)?;
    let radius = fejer_radius(curvature, rho, d[0])?;
    let mut tr = BoundTrace::new("fejer_radius");
    for (k, &dk) in d.iter().enumerate() {
        tr.push(k, dk, radius);
    }
    Ok(tr)
}

/// `Σ_k max(0, d²(p_{k+1}, q) − d²(p_k, q))`.
pub fn quasi_fejer_excess(objective: &dyn Objective, report: &SolveReport, q: &Point) -> Result<f64> {
    let pts = iterates(report)?;
    let d = distances(objective, pts, q)?;
    Ok(d.windows(2).map(|w| (w[1] * w[1] - w[0] * w[0]).max(0.0)).sum())
}

/// `d²(p_{k+1}, q) ≤ d²(p_k, q) + (t_k/ν) C [f(p_k) − f(p_{k+1})] + 2 t_k [f(q) − f(p_k)]`.
pub fn check_desgen(
    objective: &dyn Objective,
    report: &SolveReport,
    q: &Point,
    curvature: CurvatureParams,
    rho: f64,
    nu: f64,
) -> Result<BoundTrace> {
    let pts = iterates(report)?;
    let fq = objective.value(q)?;
    let d = distances(objective, pts, q)?;
    let c = c_rho_kappa(rho, curvature, d[0])?;
    let mut tr = BoundTrace::new("distance_recursion");
    for k in 0..report.iters {
        let t = report.step_hist[k];
        let rhs = d[k] * d[k] + t / nu * c * (report.f_hist[k] - report.f_hist[k + 1]) + 2.0 * t * (fq - report.f_hist[k]);
        tr.push(k, d[k + 1] * d[k + 1], rhs);
    }
    Ok(tr)
}

/// Complexity bounds evaluated at every `N` along a run.
#[derive(Debug, Clone)]
pub struct ComplexityTraces {
    /// `f(p_N) − f*` against the value bound, `N ≥ 1`.
    pub value: BoundTrace,
    /// `min_{k≤N} ‖grad f(p_k)‖` against the convex gradient bound, `N ≥ 1`.
    pub grad: BoundTrace,
    /// The same minimum against the convexity-free bound, `N ≥ 0`.
    pub nonconvex: BoundTrace,
    pub c: f64,
    pub d0: f64,
    pub delta0: f64,
}

/// Builds the three complexity traces; `l` in `consts` must be a valid
/// Lipschitz constant and `q` a minimizer with value `fstar`.
pub fn complexity_traces(
    objective: &dyn Objective,
    report: &SolveReport,
    consts: BoundConstants,
    q: &Point,
    fstar: f64,
    curvature: CurvatureParams,
    rho: f64,
) -> Result<ComplexityTraces> {
    check_hist(report)?;
    let x0 = match &report.iterates {
        Some(it) if !it.is_empty() => &it[0],
        _ => return Err(Error::MissingData("recorded iterates")),
    };
    let d0 = geometry::dist(objective.kind(), x0, q)?;
    let delta0 = report.f_hist[0] - fstar;
    let c = c_rho_kappa(rho, curvature, d0)?;
    let l = match consts {
        BoundConstants::Lipschitz { l } | BoundConstants::Adaptive { l, .. } => l,
    };
    let mut value = BoundTrace::new("complexity_value");
    let mut grad = BoundTrace::new("complexity_grad");
    let mut nonconvex = BoundTrace::new("nonconvex_grad");
    let mut best = f64::INFINITY;
    for n in 0..=report.iters {
        best = best.min(report.rgrad_norm_hist[n]);
        nonconvex.push(n, best, nonconvex_grad_bound(n, l, delta0));
        if n >= 1 {
            value.push(n, report.f_hist[n] - fstar, complexity_value_bound(n, consts, d0, delta0, c)?);
            grad.push(n, best, complexity_grad_bound(n, l, d0, delta0, c)?);
        }
    }
    Ok(ComplexityTraces { value, grad, nonconvex, c, d0, delta0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{com_orthant, ComOrthantData};
    use crate::orthant::OrthantPoint;
    use crate::solver::{solve, SolverConfig, StepsizeStrategy};

    fn run(strategy: StepsizeStrategy) -> (crate::objectives::ComOrthant, SolveReport) {
        let data = ComOrthantData::new(vec![
            OrthantPoint::from_slice(&[1.0, 30.0, 2.0]).unwrap(),
            OrthantPoint::from_slice(&[8.0, 0.3, 5.0]).unwrap(),
            OrthantPoint::from_slice(&[0.5, 7.0, 50.0]).unwrap(),
        ])
        .unwrap();
        let f = com_orthant(data).unwrap();
        let x0 = Point::Orthant(OrthantPoint::from_slice(&[90.0, 0.01, 3.0]).unwrap());
        let cfg = SolverConfig { record_trajectory: true, ..Default::default() };
        let rep = solve(&f, &x0, &strategy, &cfg).unwrap();
        (f, rep)
    }

    #[test]
    fn slack_rule() {
        assert!(within(1.0, 1.0));
        assert!(within(1.0 + 5e-10, 1.0));
        assert!(!within(1.0 + 1e-8, 1.0));
        assert!(within(1e-13, 0.0));
        assert!(!within(-0.9, -1.0));
    }

    #[test]
    fn descent_holds_for_each_rule() {
        for s in [
            StepsizeStrategy::Lipschitz { l: 3.0 },
            StepsizeStrategy::Adaptive { beta: 0.5, l0: 1.0, eta: 2.0 },
            StepsizeStrategy::Armijo { beta: 0.5 },
        ] {
            let (_, rep) = run(s);
            let tr = check_descent(&rep, s.descent_nu()).unwrap();
            assert_eq!(tr.len(), rep.iters);
            assert!(tr.all_satisfied(), "{}", s.label());
        }
    }

    #[test]
    fn zero_iteration_run_gives_empty_trace() {
        let (f, _) = run(StepsizeStrategy::Armijo { beta: 0.5 });
        let x = f.known_minimizer().unwrap();
        let cfg = SolverConfig { record_trajectory: true, ..Default::default() };
        let rep = solve(&f, &x, &StepsizeStrategy::Armijo { beta: 0.5 }, &cfg).unwrap();
        assert!(check_descent(&rep, 0.5).unwrap().is_empty());
        assert!(check_lemli(&f, &rep, &x, CurvatureParams::flat()).unwrap().0.is_empty());
    }

    #[test]
    fn flat_lemma_and_radius_hold_on_com_orthant() {
        let s = StepsizeStrategy::Lipschitz { l: 3.0 };
        let (f, rep) = run(s);
        let q = f.known_minimizer().unwrap();
        let fstar = f.known_fstar().unwrap();
        let (a, b) = check_lemli(&f, &rep, &q, CurvatureParams::flat()).unwrap();
        assert!(a.all_satisfied() && b.all_satisfied());
        let rho = crate::analysis::rho_bound(&s, rep.f_hist[0], fstar).unwrap();
        assert!(check_fejer(&f, &rep, &q, CurvatureParams::flat(), rho).unwrap().all_satisfied());
        assert!(check_desgen(&f, &rep, &q, CurvatureParams::flat(), rho, 0.5).unwrap().all_satisfied());
        let tr = complexity_traces(&f, &rep, BoundConstants::Lipschitz { l: 3.0 }, &q, fstar, CurvatureParams::flat(), rho)
            .unwrap();
        assert_eq!(tr.c, 1.0);
        assert!(tr.value.all_satisfied() && tr.grad.all_satisfied() && tr.nonconvex.all_satisfied());
        assert!(quasi_fejer_excess(&f, &rep, &q).unwrap() < 1e-9);
    }

    #[test]
    fn missing_iterates_are_reported() {
        let data = ComOrthantData::new(vec![OrthantPoint::from_slice(&[2.0]).unwrap()]).unwrap();
        let f = com_orthant(data).unwrap();
        let x0 = Point::Orthant(OrthantPoint::from_slice(&[5.0]).unwrap());
        let rep = solve(&f, &x0, &StepsizeStrategy::Armijo { beta: 0.5 }, &SolverConfig::default()).unwrap();
        let q = f.known_minimizer().unwrap();
        assert!(matches!(check_fejer(&f, &rep, &q, CurvatureParams::flat(), 1.0), Err(Error::MissingData(_))));
    }

    #[test]
    fn trace_csv_layout() {
        let mut tr = BoundTrace::new("x");
        tr.push(0, 1.0, 2.0);
        tr.push(1, 3.0, 2.0);
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "iter,lhs,rhs,satisfied\n0,1,2,true\n1,3,2,false\n");
        assert_eq!(tr.violations(), 1);
    }
}
