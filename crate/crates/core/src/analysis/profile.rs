//! Dolan–Moré performance profiles.

use std::io::Write;

use crate::error::{invalid, Result};

/// Cost ratios `r_{p,s} = cost_{p,s} / min_s cost_{p,s}`; failures carry `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceProfile {
    pub solvers: Vec<String>,
    /// `ratios[p][s]`.
    pub ratios: Vec<Vec<f64>>,
}

/// Builds a profile from `costs[problem][solver]`. Costs must be positive;
/// encode failures as `f64::INFINITY`.
pub fn performance_profile(solvers: &[String], costs: &[Vec<f64>]) -> Result<PerformanceProfile> {
    if solvers.is_empty() || costs.is_empty() {
        return Err(invalid("performance profile needs at least one solver and one problem"));
    }
    let mut ratios = Vec::with_capacity(costs.len());
    for (p, row) in costs.iter().enumerate() {
        if row.len() != solvers.len() {
            return Err(invalid(format!("problem {p} has {} costs for {} solvers", row.len(), solvers.len())));
        }
        if row.iter().any(|c| c.is_nan() || *c <= 0.0) {
            return Err(invalid(format!("problem {p} has a non-positive or NaN cost")));
        }
        let best = row.iter().copied().fold(f64::INFINITY, f64::min);
        ratios.push(row.iter().map(|&c| if best.is_finite() { c / best } else { f64::INFINITY }).collect());
    }
    Ok(PerformanceProfile { solvers: solvers.to_vec(), ratios })
}

impl PerformanceProfile {
    /// `ρ_s(τ)`: fraction of problems with ratio at most `τ`.
    pub fn fraction(&self, solver: usize, tau: f64) -> f64 {
        let hits = self.ratios.iter().filter(|r| r[solver] <= tau).count();
        hits as f64 / self.ratios.len() as f64
    }

    /// Every finite ratio (and 1), sorted; the curves only change at these points.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut taus: Vec<f64> = self.ratios.iter().flatten().copied().filter(|r| r.is_finite()).collect();
        taus.push(1.0);
        taus.sort_by(f64::total_cmp);
        taus.dedup();
        taus
    }

    /// CSV with columns `tau,solver,fraction` over [`PerformanceProfile::breakpoints`].
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["tau", "solver", "fraction"])?;
        for tau in self.breakpoints() {
            for (s, name) in self.solvers.iter().enumerate() {
                out.write_record([tau.to_string(), name.clone(), self.fraction(s, tau).to_string()])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}
