//! CSV writers.
//!
//! Layout under the output directory:
//!
//! - `results.csv`: `experiment,strategy,run,status,iters,nfev,ngev,final_f,final_g_inf,wall_s`
//! - `aggregate.csv`: `experiment,strategy,pct_converged,mean_it,mean_nfev`
//! - `traces/index.csv` and one `iter,lhs,rhs,satisfied` file per check (with `--traces`)
//! - `profile.csv`: `tau,solver,fraction` (with `--profile`)
//! - `experiment.toml`: the resolved settings
//!
//! `wall_s` is the only column that varies between identical runs; it is
//! always last so it can be cut off before comparing files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::BenchError;
use crate::runner::ExperimentOutput;

fn create(path: &Path) -> Result<BufWriter<File>, BenchError> {
    File::create(path).map(BufWriter::new).map_err(|e| BenchError::io(path, e))
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))?;
    Ok(())
}

#[derive(Serialize)]
struct TraceIndexRow<'a> {
    file: String,
    strategy: &'a str,
    run: usize,
    check: &'a str,
    reference: crate::runner::Reference,
    points: usize,
    violations: usize,
}

/// Writes every output file and returns the paths written.
pub fn write_outputs(out: &ExperimentOutput, dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let mut written = Vec::new();

    let results = dir.join("results.csv");
    // an experiment always has rows, so the header comes from serde
    write_rows(&results, out.rows())?;
    written.push(results);

    let aggregate = dir.join("aggregate.csv");
    write_rows(&aggregate, &out.aggregate)?;
    written.push(aggregate);

    if out.spec.traces {
        let tdir = dir.join("traces");
        fs::create_dir_all(&tdir).map_err(|e| BenchError::io(&tdir, e))?;
        let mut index = Vec::new();
        for t in out.jobs.iter().flat_map(|j| &j.traces) {
            let path = tdir.join(t.file_name());
            let mut w = create(&path)?;
            t.trace.write_csv(&mut w)?;
            w.flush().map_err(|e| BenchError::io(&path, e))?;
            index.push(TraceIndexRow {
                file: t.file_name(),
                strategy: t.strategy.as_str(),
                run: t.run,
                check: &t.trace.name,
                reference: t.reference,
                points: t.trace.len(),
                violations: t.trace.violations(),
            });
            written.push(path);
        }
        let ipath = tdir.join("index.csv");
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(create(&ipath)?);
        w.write_record(["file", "strategy", "run", "check", "reference", "points", "violations"])?;
        for r in &index {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| BenchError::io(&ipath, e))?;
        written.push(ipath);
    }

    if let Some(p) = &out.profile {
        let path = dir.join("profile.csv");
        let mut w = create(&path)?;
        p.write_csv(&mut w)?;
        w.flush().map_err(|e| BenchError::io(&path, e))?;
        written.push(path);
    }

    let spath = dir.join("experiment.toml");
    let text = toml::to_string(&out.spec).map_err(|e| BenchError::Config(e.to_string()))?;
    fs::write(&spath, text).map_err(|e| BenchError::io(&spath, e))?;
    written.push(spath);
    Ok(written)
}

/// `results.csv` text with the trailing `wall_s` column removed.
pub fn strip_timing(results_csv: &str) -> String {
    results_csv
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Plain-text table of the aggregate rows.
pub fn summary_table(out: &ExperimentOutput) -> String {
    let mut s = String::new();
    s.push_str(&format!("{:<12} {:<10} {:>8} {:>10} {:>10}\n", "experiment", "strategy", "%", "it", "nfev"));
    for a in &out.aggregate {
        s.push_str(&format!(
            "{:<12} {:<10} {:>8.1} {:>10.1} {:>10.1}\n",
            a.experiment, a.strategy, a.pct_converged, a.mean_it, a.mean_nfev
        ));
    }
    s
}
