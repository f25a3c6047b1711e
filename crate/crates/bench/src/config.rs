//! Experiment descriptions: built-in desk-scale defaults, TOML config files
//! and command-line overrides, applied in that order.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    Problem1,
    Problem2,
    Problem3,
    Problem4,
    KarcherSpd,
    ComOrthant,
    /// Karcher SPD instances summarized as a performance profile.
    Profile,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Problem1 => "problem1",
            Experiment::Problem2 => "problem2",
            Experiment::Problem3 => "problem3",
            Experiment::Problem4 => "problem4",
            Experiment::KarcherSpd => "karcher_spd",
            Experiment::ComOrthant => "com_orthant",
            Experiment::Profile => "profile",
        }
    }

    pub fn is_spd(&self) -> bool {
        matches!(self, Experiment::Problem3 | Experiment::Problem4 | Experiment::KarcherSpd | Experiment::Profile)
    }

    pub fn uses_m(&self) -> bool {
        matches!(self, Experiment::KarcherSpd | Experiment::ComOrthant | Experiment::Profile)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    Lipschitz,
    Adaptive,
    Armijo,
    Euclidean,
}

impl StrategyName {
    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyName::Lipschitz => "lipschitz",
            StrategyName::Adaptive => "adaptive",
            StrategyName::Armijo => "armijo",
            StrategyName::Euclidean => "euclidean",
        }
    }
}

/// Fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub n: usize,
    pub m: usize,
    /// Starting points per instance.
    pub runs: usize,
    /// Independent random instances.
    pub instances: usize,
    pub seed: u64,
    pub strategies: Vec<StrategyName>,
    pub beta: f64,
    pub l0: f64,
    pub eta: f64,
    pub boundary_fraction: f64,
    pub lipschitz_const: Option<f64>,
    /// Karcher only: Strategy 1 uses `t = 1.99 t̄(r)`.
    pub afsari: bool,
    pub kappa_hat: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub eig_lo: f64,
    pub eig_hi: f64,
    /// Upper end of the orthant starting box `(0, hi]ⁿ`; also the anchor box for `com_orthant`.
    pub box_hi: f64,
    pub traces: bool,
    pub profile: bool,
    pub out: PathBuf,
    /// Per-instance scalar parameters for problem1/problem2 (TOML, `[[instance]]` tables).
    pub params: Option<PathBuf>,
}

/// Every field optional; used for both config files and flag overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecOverrides {
    pub experiment: Option<Experiment>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub runs: Option<usize>,
    pub instances: Option<usize>,
    pub seed: Option<u64>,
    pub strategies: Option<Vec<StrategyName>>,
    pub beta: Option<f64>,
    pub l0: Option<f64>,
    pub eta: Option<f64>,
    pub boundary_fraction: Option<f64>,
    pub lipschitz_const: Option<f64>,
    pub afsari: Option<bool>,
    pub kappa_hat: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub eig_lo: Option<f64>,
    pub eig_hi: Option<f64>,
    pub box_hi: Option<f64>,
    pub traces: Option<bool>,
    pub profile: Option<bool>,
    pub out: Option<PathBuf>,
    pub params: Option<PathBuf>,
}

impl SpecOverrides {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// `self` with every field set in `other` replaced.
    pub fn merged(self, other: SpecOverrides) -> SpecOverrides {
        macro_rules! pick {
            ($($f:ident),*) => { SpecOverrides { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            experiment, n, m, runs, instances, seed, strategies, beta, l0, eta, boundary_fraction, lipschitz_const,
            afsari, kappa_hat, tol, max_iter, eig_lo, eig_hi, box_hi, traces, profile, out, params
        )
    }
}

impl ExperimentSpec {
    /// Desk-scale defaults.
    pub fn defaults(experiment: Experiment) -> Self {
        use StrategyName::*;
        let (n, m, runs, instances, strategies, box_hi): (usize, usize, usize, usize, Vec<StrategyName>, f64) =
            match experiment {
                Experiment::Problem1 | Experiment::Problem2 => (100, 1, 10, 10, vec![Armijo, Euclidean], 20.0),
                Experiment::Problem3 => (10, 1, 10, 1, vec![Armijo], 20.0),
                Experiment::Problem4 => (20, 1, 10, 1, vec![Lipschitz, Adaptive, Armijo], 20.0),
                Experiment::KarcherSpd | Experiment::Profile => (20, 5, 1, 10, vec![Lipschitz, Adaptive, Armijo], 100.0),
                Experiment::ComOrthant => (100, 5, 10, 1, vec![Lipschitz, Adaptive, Armijo], 100.0),
            };
        ExperimentSpec {
            experiment,
            n,
            m,
            runs,
            instances,
            seed: 1,
            strategies,
            beta: 0.5,
            l0: 1.0,
            eta: 2.0,
            boundary_fraction: 0.99,
            lipschitz_const: None,
            afsari: experiment.uses_m() && experiment.is_spd(),
            kappa_hat: None,
            tol: 1e-5,
            max_iter: 1000,
            eig_lo: 0.0,
            eig_hi: 20.0,
            box_hi,
            traces: false,
            profile: experiment == Experiment::Profile,
            out: PathBuf::from("out"),
            params: None,
        }
    }

    /// Defaults for the chosen experiment, then `layers` in order.
    pub fn resolve(layers: &[SpecOverrides]) -> Result<Self, BenchError> {
        let merged = layers.iter().cloned().fold(SpecOverrides::default(), SpecOverrides::merged);
        let experiment = merged.experiment.ok_or_else(|| BenchError::Config("no experiment given".into()))?;
        let d = Self::defaults(experiment);
        let spec = ExperimentSpec {
            experiment,
            n: merged.n.unwrap_or(d.n),
            m: merged.m.unwrap_or(d.m),
            runs: merged.runs.unwrap_or(d.runs),
            instances: merged.instances.unwrap_or(d.instances),
            seed: merged.seed.unwrap_or(d.seed),
            strategies: merged.strategies.unwrap_or(d.strategies),
            beta: merged.beta.unwrap_or(d.beta),
            l0: merged.l0.unwrap_or(d.l0),
            eta: merged.eta.unwrap_or(d.eta),
            boundary_fraction: merged.boundary_fraction.unwrap_or(d.boundary_fraction),
            lipschitz_const: merged.lipschitz_const.or(d.lipschitz_const),
            afsari: merged.afsari.unwrap_or(d.afsari),
            kappa_hat: merged.kappa_hat.or(d.kappa_hat),
            tol: merged.tol.unwrap_or(d.tol),
            max_iter: merged.max_iter.unwrap_or(d.max_iter),
            eig_lo: merged.eig_lo.unwrap_or(d.eig_lo),
            eig_hi: merged.eig_hi.unwrap_or(d.eig_hi),
            box_hi: merged.box_hi.unwrap_or(d.box_hi),
            traces: merged.traces.unwrap_or(d.traces),
            profile: merged.profile.unwrap_or(d.profile),
            out: merged.out.unwrap_or(d.out),
            params: merged.params.or(d.params),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: String| Err(BenchError::Config(msg));
        if self.n < 1 || self.m < 1 || self.runs < 1 || self.instances < 1 {
            return bad("n, m, runs and instances must all be at least 1".into());
        }
        if self.strategies.is_empty() {
            return bad("at least one strategy is required".into());
        }
        let mut seen = self.strategies.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.strategies.len() {
            return bad("strategies must not repeat".into());
        }
        if !(self.eig_lo >= 0.0 && self.eig_hi > self.eig_lo && self.eig_hi.is_finite()) {
            return bad(format!("need 0 <= eig_lo < eig_hi, got ({}, {})", self.eig_lo, self.eig_hi));
        }
        if !(self.box_hi > 0.0 && self.box_hi.is_finite()) {
            return bad(format!("box_hi must be positive, got {}", self.box_hi));
        }
        if let Some(k) = self.kappa_hat {
            if !(k >= 0.0 && k.is_finite()) {
                return bad(format!("kappa_hat must be non-negative, got {k}"));
            }
        }
        if let Some(l) = self.lipschitz_const {
            if !(l > 0.0 && l.is_finite()) {
                return bad(format!("lipschitz_const must be positive, got {l}"));
            }
        }
        if self.params.is_some() && !matches!(self.experiment, Experiment::Problem1 | Experiment::Problem2) {
            return bad("params files apply to problem1 and problem2 only".into());
        }
        let karcher = matches!(self.experiment, Experiment::KarcherSpd | Experiment::Profile);
        if karcher && self.strategies.contains(&StrategyName::Lipschitz) && !self.afsari && self.lipschitz_const.is_none() {
            return bad("the Karcher objective has no global Lipschitz constant; pass --afsari or --lipschitz-const".into());
        }
        if self.profile && self.strategies.len() < 2 {
            return bad("a performance profile needs at least two strategies".into());
        }
        riemgrad::solver::SolverConfig {
            tol_inf_egrad: self.tol,
            max_iter: self.max_iter,
            ..Default::default()
        }
        .validate()
        .map_err(|e| BenchError::Config(e.to_string()))?;
        Ok(())
    }
}

/// Scalar parameters broadcast to every coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub instance: Vec<ScalarParams>,
}

impl ParamsFile {
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let file: ParamsFile = toml::from_str(&text).map_err(|e| BenchError::Config(e.to_string()))?;
        if file.instance.is_empty() {
            return Err(BenchError::Config(format!("{} lists no instances", path.display())));
        }
        Ok(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_experiment(e: Experiment) -> SpecOverrides {
        SpecOverrides { experiment: Some(e), ..Default::default() }
    }

    #[test]
    fn flags_override_file() {
        let file = SpecOverrides::from_toml("experiment = \"problem2\"\nn = 7\nruns = 3\nstrategies = [\"armijo\"]\n").unwrap();
        let flags = SpecOverrides { runs: Some(5), ..Default::default() };
        let s = ExperimentSpec::resolve(&[file, flags]).unwrap();
        assert_eq!((s.experiment, s.n, s.runs), (Experiment::Problem2, 7, 5));
        assert_eq!(s.strategies, vec![StrategyName::Armijo]);
        assert_eq!(s.instances, 10);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(SpecOverrides::from_toml("nn = 3").is_err());
    }

    #[test]
    fn invalid_specs() {
        let base = with_experiment(Experiment::Problem3);
        let runs0 = SpecOverrides { runs: Some(0), ..Default::default() };
        assert!(ExperimentSpec::resolve(&[base.clone(), runs0]).is_err());
        let eig = SpecOverrides { eig_lo: Some(5.0), eig_hi: Some(1.0), ..Default::default() };
        assert!(ExperimentSpec::resolve(&[base.clone(), eig]).is_err());
        let karcher = SpecOverrides { afsari: Some(false), ..with_experiment(Experiment::KarcherSpd) };
        assert!(ExperimentSpec::resolve(&[karcher]).is_err());
        assert!(ExperimentSpec::resolve(&[SpecOverrides::default()]).is_err());
        let dup = SpecOverrides { strategies: Some(vec![StrategyName::Armijo, StrategyName::Armijo]), ..base };
        assert!(ExperimentSpec::resolve(&[dup]).is_err());
    }

    #[test]
    fn desk_defaults() {
        let k = ExperimentSpec::defaults(Experiment::KarcherSpd);
        assert!(k.afsari && k.n == 20 && k.m == 5);
        let p = ExperimentSpec::defaults(Experiment::Profile);
        assert!(p.profile);
        assert!(!ExperimentSpec::defaults(Experiment::ComOrthant).afsari);
    }
}
