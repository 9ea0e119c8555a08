//! Batch experiments: inequality audits, empirical operator norms and
//! convergence maps over (p, α).
//!
//! Random test functions enter through their degree-K truncations
//! P_K f = Σ_{k<=K} Y_k f, whose projections are known exactly (see
//! [`crate::family`]). Trial `t` draws from its own ChaCha stream, so runs
//! are reproducible and independent of thread scheduling.

pub mod audit;
pub mod config;
pub mod convergence;
pub mod norms;
pub mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use ndarray::{s, Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use audit::{audit_functions, audit_inequalities, audit_report};
pub use config::ExperimentConfig;
pub use convergence::{
    classify, convergence_experiment, convergence_series, critical_lines, fit_slope, minimal_converging,
    n_ladder, threshold_map, Classification, PointConvergence,
};
pub use norms::{operator_norm_estimate, operator_norm_trials, NormOperator, NormSetup};
pub use report::{
    fmt_num, write_outputs, AuditRow, ExperimentReport, PlotPoint, ResultRow, RunHeader, RunOutput,
    Witness,
};

use crate::error::Result;
use crate::family::{Family, TestFunction};
use crate::sphere::{sample_uniform_with, SphereGrid, SpherePoint};
use crate::summability::{averaged_from_series, maximal_from_series, square_from_series, RieszMeanSeries};

pub(crate) fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The `trial`-th member of a family for a given seed.
pub fn trial_function(
    family: Family,
    dim: usize,
    degree_max: usize,
    p: f64,
    seed: u64,
    trial: usize,
) -> Result<TestFunction> {
    let mut rng = trial_rng(seed, trial as u64 + 1);
    family.draw(dim, degree_max, degree_max, p, &mut rng)
}

/// Uniform evaluation points, independent of every trial stream.
pub fn eval_points(dim: usize, count: usize, seed: u64) -> Result<Vec<SpherePoint>> {
    sample_uniform_with(dim, count, &mut trial_rng(seed, 0))
}

/// Exact degree rows of P_K f at the grid nodes, and P_K f itself.
pub(crate) fn grid_rows(f: &TestFunction, grid: &SphereGrid, k_max: usize) -> Result<(Array2<f64>, Vec<f64>)> {
    let pts: Vec<&[f64]> = (0..grid.len()).map(|i| grid.coords(i)).collect();
    let rows = f.degree_values(&pts, k_max)?;
    let values = rows.sum_axis(ndarray::Axis(0)).to_vec();
    Ok((rows, values))
}

pub(crate) fn grid_for(dim: usize, degree_max: usize) -> Result<Arc<SphereGrid>> {
    Ok(Arc::new(SphereGrid::for_degree(dim, degree_max)?))
}

/// E_*, M and G at orders α, α+1, …, α+orders-1 and several cutoffs.
/// Indexing is `[order][cutoff][point]`; `g` has one order fewer.
pub(crate) struct OrderFields {
    pub e: Vec<Vec<Vec<f64>>>,
    pub m: Vec<Vec<Vec<f64>>>,
    pub g: Vec<Vec<Vec<f64>>>,
}

const CHUNK: usize = 2048;

pub(crate) fn order_fields(
    dim: usize,
    rows: ArrayView2<'_, f64>,
    alpha: f64,
    orders: usize,
    cutoffs: &[usize],
) -> Result<OrderFields> {
    let top = cutoffs.iter().copied().max().unwrap_or(0);
    let blank = |k: usize| vec![vec![Vec::with_capacity(rows.ncols()); cutoffs.len()]; k];
    let mut out = OrderFields {
        e: blank(orders),
        m: blank(orders),
        g: blank(orders.saturating_sub(1)),
    };
    let mut start = 0;
    while start < rows.ncols() {
        let end = (start + CHUNK).min(rows.ncols());
        let sub = rows.slice(s![.., start..end]);
        let series = (0..orders)
            .map(|j| RieszMeanSeries::from_rows(dim, sub, alpha + j as f64, top))
            .collect::<Result<Vec<_>>>()?;
        for (j, sj) in series.iter().enumerate() {
            for (c, &n) in cutoffs.iter().enumerate() {
                out.e[j][c].extend(maximal_from_series(sj, n).values);
                out.m[j][c].extend(averaged_from_series(sj, n).values);
                if j + 1 < orders {
                    out.g[j][c].extend(square_from_series(sj, &series[j + 1], n)?.values);
                }
            }
        }
        start = end;
    }
    Ok(out)
}

/// Runs the audit, the operator-norm table and the threshold map.
pub fn run_experiments(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let mut reports = Vec::new();
    let mut plots = BTreeMap::new();

    let t = Instant::now();
    let mut audit = audit_report(cfg)?;
    audit.runtimes.push(("total".into(), t.elapsed().as_secs_f64()));
    reports.push(audit);

    let t = Instant::now();
    let (mut norms, norm_plot) = norms::norm_table(cfg)?;
    norms.runtimes.push(("total".into(), t.elapsed().as_secs_f64()));
    reports.push(norms);
    plots.insert("norms".to_string(), norm_plot);

    let t = Instant::now();
    let (mut map, map_plot, curve_plot) = convergence::threshold_map_with_plots(cfg)?;
    map.runtimes.push(("total".into(), t.elapsed().as_secs_f64()));
    reports.push(map);
    plots.insert("threshold_map".to_string(), map_plot);
    plots.insert("convergence".to_string(), curve_plot);

    Ok(RunOutput { reports, plots })
}

/// [`run_experiments`] followed by [`write_outputs`] into `cfg.out_dir`.
pub fn run_and_write(cfg: &ExperimentConfig, header: &RunHeader) -> Result<(RunOutput, Vec<PathBuf>)> {
    let out = run_experiments(cfg)?;
    let files = write_outputs(&cfg.out_dir, header, &out)?;
    Ok((out, files))
}
