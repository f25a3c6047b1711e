//! Builds instances, runs every (instance, start, strategy) job and collects
//! result rows, aggregates, bound traces and performance profiles.

use std::sync::Arc;

use rayon::prelude::*;
use riemgrad::analysis::{
    afsari_stepsize, check_descent, check_desgen, check_fejer, check_lemli, complexity_traces, performance_profile,
    rho_bound, BoundConstants, BoundTrace, CurvatureParams, PerformanceProfile,
};
use riemgrad::objectives::{com_orthant, karcher_spd, log2log, logdet2, logdetratio, loglog, Problem1Params, Problem2Params};
use riemgrad::solver::{solve, SolveReport, SolverConfig, Status, StepsizeStrategy};
use riemgrad::spd::SpdMatrix;
use riemgrad::{Objective, Point};
use serde::Serialize;

use crate::config::{Experiment, ExperimentSpec, ParamsFile, StrategyName};
use crate::error::BenchError;
use crate::generators::{
    gen_com_orthant, gen_karcher_spd, gen_problem1, gen_problem2, gen_problem3, gen_problem4, orthant_start,
    random_spd,
};
use crate::rng::{start_stream, stream, Purpose};

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub strategy: String,
    /// `instance · runs + start`.
    pub run: usize,
    pub status: String,
    pub iters: usize,
    pub nfev: usize,
    pub ngev: usize,
    pub final_f: f64,
    pub final_g_inf: f64,
    pub wall_s: f64,
}

/// One line of `aggregate.csv`; means are over converged runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub experiment: String,
    pub strategy: String,
    pub pct_converged: f64,
    pub mean_it: f64,
    pub mean_nfev: f64,
}

/// How the comparison point `q` of a bound check was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    Exact,
    /// The run's own final iterate.
    Estimated,
}

#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub strategy: StrategyName,
    pub run: usize,
    pub reference: Reference,
    pub trace: BoundTrace,
}

impl TraceRecord {
    pub fn file_name(&self) -> String {
        format!("{}_run{}_{}.csv", self.strategy.as_str(), self.run, self.trace.name)
    }
}

#[derive(Debug, Clone)]
pub struct JobResult {
    pub strategy: StrategyName,
    pub instance: usize,
    pub start: usize,
    pub row: ResultRow,
    pub traces: Vec<TraceRecord>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub spec: ExperimentSpec,
    /// Sorted by strategy (in `spec.strategies` order), then run.
    pub jobs: Vec<JobResult>,
    pub aggregate: Vec<AggregateRow>,
    pub profile: Option<PerformanceProfile>,
}

impl ExperimentOutput {
    pub fn rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.jobs.iter().map(|j| &j.row)
    }
}

/// Where a minimizer is known, or how to find a point of the solution set.
#[derive(Clone)]
enum Target {
    Point(Point),
    /// Solution set `{ln det X = s}`; the nearest member of a scalar multiple family.
    LnDet(f64),
    Unknown,
}

struct Instance {
    objective: Arc<dyn Objective>,
    /// Start shared by every run (Karcher explog mean).
    fixed_start: Option<Point>,
    radius: Option<f64>,
    target: Target,
    fstar: Option<f64>,
    /// A constant known to bound the hessian, used for complexity traces.
    valid_l: Option<f64>,
}

fn build_instance(spec: &ExperimentSpec, index: usize, params: Option<&ParamsFile>) -> Result<Instance, BenchError> {
    let mut r = stream(spec.seed, Purpose::Instance, index as u64);
    let n = spec.n;
    let inst = match spec.experiment {
        Experiment::Problem1 => {
            let p = match params {
                Some(f) => {
                    let s = f.instance[index];
                    Problem1Params::uniform(n, s.a, s.b, s.c, s.d)
                }
                None => gen_problem1(n, &mut r),
            };
            let obj = log2log(p)?;
            let l = obj.lipschitz_bound();
            Instance { objective: Arc::new(obj), fixed_start: None, radius: None, target: Target::Unknown, fstar: None, valid_l: l }
        }
        Experiment::Problem2 => {
            let p = match params {
                Some(f) => {
                    let s = f.instance[index];
                    Problem2Params::uniform(n, s.a, s.b, s.c, s.d)
                }
                None => gen_problem2(n, &mut r),
            };
            let obj = loglog(p)?;
            let x = Point::Orthant(obj.minimizer());
            let fstar = obj.value(&x)?;
            let l = obj.tight_lipschitz();
            Instance { objective: Arc::new(obj), fixed_start: None, radius: None, target: Target::Point(x), fstar: Some(fstar), valid_l: Some(l) }
        }
        Experiment::Problem3 => {
            let p = gen_problem3();
            let obj = logdet2(p, n)?;
            let s = p.b / (2.0 * p.a);
            let (fstar, l) = (obj.known_fstar(), obj.lipschitz_bound());
            Instance { objective: Arc::new(obj), fixed_start: None, radius: None, target: Target::LnDet(s), fstar, valid_l: l }
        }
        Experiment::Problem4 => {
            let obj = logdetratio(gen_problem4(), n)?;
            let s = obj.critical_ln_det();
            let (fstar, l) = (obj.known_fstar(), obj.lipschitz_bound());
            Instance { objective: Arc::new(obj), fixed_start: None, radius: None, target: Target::LnDet(s), fstar, valid_l: l }
        }
        Experiment::KarcherSpd | Experiment::Profile => {
            let k = gen_karcher_spd(n, spec.m, &mut r);
            let obj = karcher_spd(k.data)?;
            let (target, fstar) = match obj.known_minimizer() {
                Some(x) => {
                    let f = obj.value(&x)?;
                    (Target::Point(x), Some(f))
                }
                None => (Target::Unknown, None),
            };
            Instance {
                objective: Arc::new(obj),
                fixed_start: Some(Point::Spd(k.start)),
                radius: Some(k.radius),
                target,
                fstar,
                valid_l: None,
            }
        }
        Experiment::ComOrthant => {
            let c = gen_com_orthant(n, spec.m, spec.box_hi, &mut r);
            let obj = com_orthant(c.data)?;
            let x = Point::Orthant(c.solution);
            let fstar = obj.value(&x)?;
            let l = obj.lipschitz_bound();
            Instance { objective: Arc::new(obj), fixed_start: None, radius: None, target: Target::Point(x), fstar: Some(fstar), valid_l: l }
        }
    };
    Ok(inst)
}

fn sample_start(spec: &ExperimentSpec, inst: &Instance, index: usize, run: usize) -> Point {
    if let Some(x) = &inst.fixed_start {
        return x.clone();
    }
    let mut r = start_stream(spec.seed, index, run);
    if spec.experiment.is_spd() {
        Point::Spd(random_spd(spec.n, spec.eig_lo, spec.eig_hi, &mut r))
    } else {
        Point::Orthant(orthant_start(spec.n, spec.box_hi, &mut r))
    }
}

/// The Lipschitz constant Strategy 1 uses on this instance.
fn strategy1_constant(spec: &ExperimentSpec, inst: &Instance) -> Result<f64, BenchError> {
    if let Some(l) = spec.lipschitz_const {
        return Ok(l);
    }
    if spec.afsari {
        if let Some(r) = inst.radius {
            // r = 0 only for m = 1, where the start is already optimal
            return Ok(if r > 0.0 { 1.0 / (1.99 * afsari_stepsize(r)?) } else { 1.0 });
        }
    }
    // loglog: the attained supremum rather than the loose closed-form bound
    if spec.experiment == Experiment::Problem2 {
        return inst.valid_l.ok_or_else(|| BenchError::Config("no Lipschitz constant".into()));
    }
    inst.objective
        .lipschitz_bound()
        .ok_or_else(|| BenchError::Config(format!("{} has no Lipschitz constant; pass --lipschitz-const", spec.experiment)))
}

fn make_strategy(spec: &ExperimentSpec, inst: &Instance, name: StrategyName) -> Result<StepsizeStrategy, BenchError> {
    let s = match name {
        StrategyName::Lipschitz => StepsizeStrategy::Lipschitz { l: strategy1_constant(spec, inst)? },
        StrategyName::Adaptive => StepsizeStrategy::Adaptive { beta: spec.beta, l0: spec.l0, eta: spec.eta },
        StrategyName::Armijo => StepsizeStrategy::Armijo { beta: spec.beta },
        StrategyName::Euclidean => {
            StepsizeStrategy::EuclideanArmijo { beta: spec.beta, boundary_fraction: spec.boundary_fraction }
        }
    };
    s.validate()?;
    Ok(s)
}

fn curvature(spec: &ExperimentSpec) -> Result<CurvatureParams, BenchError> {
    Ok(match spec.kappa_hat {
        Some(k) => CurvatureParams::new(k)?,
        None if spec.experiment.is_spd() => CurvatureParams::spd_affine_invariant(),
        None => CurvatureParams::flat(),
    })
}

/// Every bound check that applies to a finished run.
fn traces_for(
    spec: &ExperimentSpec,
    inst: &Instance,
    strategy: &StepsizeStrategy,
    rep: &SolveReport,
    x0: &Point,
) -> Result<(Reference, Vec<BoundTrace>), BenchError> {
    let mut out = Vec::new();
    if let StepsizeStrategy::EuclideanArmijo { .. } = strategy {
        return Ok((Reference::Exact, out));
    }
    let descent_ok = match strategy {
        StepsizeStrategy::Lipschitz { l } => inst.valid_l.is_some_and(|v| *l >= v),
        _ => true,
    };
    out.push(check_descent(rep, strategy.descent_nu())?);
    let obj = inst.objective.as_ref();
    let (reference, q, fstar) = match (&inst.target, inst.fstar) {
        (Target::Point(q), Some(f)) => (Reference::Exact, q.clone(), f),
        (Target::LnDet(s), Some(f)) => {
            let x = x0.as_spd().expect("log-det problems live on SPD");
            let scale = ((s - x.ln_det()) / x.dim() as f64).exp();
            (Reference::Exact, Point::Spd(SpdMatrix::new(x.matrix() * scale)?), f)
        }
        _ => (Reference::Estimated, rep.final_point.clone(), rep.final_f()),
    };
    let curv = curvature(spec)?;
    let (cosh_tr, sq_tr) = check_lemli(obj, rep, &q, curv)?;
    out.push(cosh_tr);
    out.push(sq_tr);
    if !descent_ok {
        return Ok((reference, out));
    }
    let rho = rho_bound(strategy, rep.f_hist[0], fstar.min(rep.f_hist[0]))?;
    out.push(check_fejer(obj, rep, &q, curv, rho)?);
    out.push(check_desgen(obj, rep, &q, curv, rho, strategy.descent_nu())?);
    let consts = match (*strategy, inst.valid_l) {
        (StepsizeStrategy::Lipschitz { l }, Some(_)) => Some(BoundConstants::Lipschitz { l }),
        (StepsizeStrategy::Adaptive { l0, eta, .. }, Some(l)) => Some(BoundConstants::Adaptive { l, l0, eta }),
        _ => None,
    };
    if let (Some(consts), Reference::Exact) = (consts, reference) {
        let c = complexity_traces(obj, rep, consts, &q, fstar, curv, rho)?;
        out.extend([c.value, c.grad, c.nonconvex]);
    }
    Ok((reference, out))
}

/// Runs every job of `spec`. Individual run failures are recorded in the rows.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput, BenchError> {
    spec.validate()?;
    let params = match &spec.params {
        Some(p) => Some(ParamsFile::load(p)?),
        None => None,
    };
    let instances = params.as_ref().map_or(spec.instances, |p| p.instance.len());
    let built: Vec<Instance> =
        (0..instances).map(|i| build_instance(spec, i, params.as_ref())).collect::<Result<_, _>>()?;
    let cfg = SolverConfig {
        tol_inf_egrad: spec.tol,
        max_iter: spec.max_iter,
        record_trajectory: spec.traces,
        rng_seed: spec.seed,
        ..SolverConfig::default()
    };

    let mut jobs = Vec::new();
    for (si, &name) in spec.strategies.iter().enumerate() {
        for i in 0..instances {
            for j in 0..spec.runs {
                jobs.push((si, name, i, j));
            }
        }
    }
    let mut results: Vec<(usize, JobResult)> = jobs
        .into_par_iter()
        .map(|(si, name, i, j)| -> Result<(usize, JobResult), BenchError> {
            let inst = &built[i];
            let strategy = make_strategy(spec, inst, name)?;
            let x0 = sample_start(spec, inst, i, j);
            let run = i * spec.runs + j;
            let rep = solve(inst.objective.as_ref(), &x0, &strategy, &cfg)?;
            let mut traces = Vec::new();
            if spec.traces {
                let (reference, trs) = traces_for(spec, inst, &strategy, &rep, &x0)?;
                traces = trs.into_iter().map(|trace| TraceRecord { strategy: name, run, reference, trace }).collect();
            }
            let row = ResultRow {
                experiment: spec.experiment.to_string(),
                strategy: name.as_str().to_string(),
                run,
                status: rep.status.as_str().to_string(),
                iters: rep.iters,
                nfev: rep.nfev,
                ngev: rep.ngev,
                final_f: rep.final_f(),
                final_g_inf: rep.final_egrad_infnorm(),
                wall_s: rep.wall_time,
            };
            Ok((si, JobResult { strategy: name, instance: i, start: j, row, traces }))
        })
        .collect::<Result<_, _>>()?;
    results.sort_by_key(|(si, j)| (*si, j.row.run));
    let jobs: Vec<JobResult> = results.into_iter().map(|(_, j)| j).collect();

    let aggregate = aggregate_rows(spec, &jobs);
    let profile = if spec.profile { Some(build_profile(spec, &jobs)?) } else { None };
    Ok(ExperimentOutput { spec: spec.clone(), jobs, aggregate, profile })
}

pub fn aggregate_rows(spec: &ExperimentSpec, jobs: &[JobResult]) -> Vec<AggregateRow> {
    spec.strategies
        .iter()
        .map(|&name| {
            let rows: Vec<&ResultRow> = jobs.iter().filter(|j| j.strategy == name).map(|j| &j.row).collect();
            let ok: Vec<&&ResultRow> = rows.iter().filter(|r| r.status == Status::Converged.as_str()).collect();
            let mean = |f: &dyn Fn(&ResultRow) -> usize| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(|r| f(r) as f64).sum::<f64>() / ok.len() as f64
                }
            };
            AggregateRow {
                experiment: spec.experiment.to_string(),
                strategy: name.as_str().to_string(),
                pct_converged: 100.0 * ok.len() as f64 / rows.len() as f64,
                mean_it: mean(&|r| r.iters),
                mean_nfev: mean(&|r| r.nfev),
            }
        })
        .collect()
}

/// Profile over nfev; each (instance, start) pair is one problem.
fn build_profile(spec: &ExperimentSpec, jobs: &[JobResult]) -> Result<PerformanceProfile, BenchError> {
    let names: Vec<String> = spec.strategies.iter().map(|s| s.as_str().to_string()).collect();
    let problems = jobs.iter().map(|j| j.row.run).max().map_or(0, |m| m + 1);
    let mut costs = vec![vec![f64::INFINITY; names.len()]; problems];
    for j in jobs {
        let s = spec.strategies.iter().position(|&n| n == j.strategy).expect("strategy from spec");
        if j.row.status == Status::Converged.as_str() {
            costs[j.row.run][s] = (j.row.nfev.max(1)) as f64;
        }
    }
    Ok(performance_profile(&names, &costs)?)
}
