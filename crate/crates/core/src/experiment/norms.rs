//! Empirical L_p → L_p norms over a random family.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::ExperimentConfig;
use super::report::{params, ExperimentReport, PlotPoint, ResultRow};
use super::{grid_for, grid_rows, order_fields, trial_function};
use crate::error::{Error, Result};
use crate::family::Family;
use crate::sphere::SphereGrid;
use crate::summability::{default_radii, CapAverager};
use crate::transform::weighted_lp_norm;
use crate::zonal::order_weights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormOperator {
    Identity,
    /// A single mean E_n^α.
    RieszMean { n: usize },
    Maximal,
    HardyLittlewood,
    SquareFunction,
    AveragedMaximal,
}

impl NormOperator {
    pub fn name(&self) -> String {
        match self {
            Self::Identity => "identity".into(),
            Self::RieszMean { n } => format!("riesz_mean_{n}"),
            Self::Maximal => "maximal".into(),
            Self::HardyLittlewood => "hardy_littlewood".into(),
            Self::SquareFunction => "square_function".into(),
            Self::AveragedMaximal => "averaged_maximal".into(),
        }
    }

    fn uses_alpha(&self) -> bool {
        !matches!(self, Self::Identity | Self::HardyLittlewood)
    }
}

/// Function space and truncation shared by all trials.
#[derive(Debug, Clone)]
pub struct NormSetup {
    pub dim: usize,
    pub degree_max: usize,
    pub n_max: usize,
    pub family: Family,
}

impl NormSetup {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            dim: cfg.dimension,
            degree_max: cfg.degree_max,
            n_max: cfg.n_max,
            family: cfg.family,
        }
    }
}

struct Prepared {
    grid: Arc<SphereGrid>,
    caps: Option<CapAverager>,
}

fn prepare(setup: &NormSetup, op: NormOperator) -> Result<Prepared> {
    let grid = grid_for(setup.dim, setup.degree_max)?;
    let caps = match op {
        NormOperator::HardyLittlewood => {
            Some(CapAverager::new(grid.clone(), &default_radii(&grid))?.with_node_bins())
        }
        _ => None,
    };
    Ok(Prepared { grid, caps })
}

/// ‖op f‖_p / ‖f‖_p for each trial, on the exact quadrature grid of the
/// degree-K truncation.
pub fn operator_norm_trials(
    op: NormOperator,
    p: f64,
    alpha: f64,
    trials: usize,
    seed: u64,
    setup: &NormSetup,
) -> Result<Vec<f64>> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            expected: "1 <= p <= 2",
        });
    }
    let prep = prepare(setup, op)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let f = trial_function(setup.family, setup.dim, setup.degree_max, p, seed, t)?;
            trial_ratio(&prep, setup, op, p, alpha, &f)
        })
        .collect()
}

/// max over trials of ‖op f‖_p / ‖f‖_p.
pub fn operator_norm_estimate(
    op: NormOperator,
    p: f64,
    alpha: f64,
    trials: usize,
    seed: u64,
    setup: &NormSetup,
) -> Result<f64> {
    let r = operator_norm_trials(op, p, alpha, trials, seed, setup)?;
    Ok(r.into_iter().fold(0.0, f64::max))
}

fn trial_ratio(
    prep: &Prepared,
    setup: &NormSetup,
    op: NormOperator,
    p: f64,
    alpha: f64,
    f: &crate::family::TestFunction,
) -> Result<f64> {
    let grid = &prep.grid;
    let (rows, values) = grid_rows(f, grid, setup.degree_max)?;
    let w = grid.weights();
    let denom = weighted_lp_norm(w, &values, p)?;
    let image = match op {
        NormOperator::Identity => values,
        NormOperator::RieszMean { n } => {
            let wn = order_weights(setup.dim, n, alpha);
            let mut mean = vec![0.0; grid.len()];
            for (k, wk) in wn.iter().enumerate().take(rows.nrows()) {
                for (m, y) in mean.iter_mut().zip(rows.row(k)) {
                    *m += wk * y;
                }
            }
            mean
        }
        NormOperator::HardyLittlewood => prep.caps.as_ref().expect("prepared").maximal(&values)?.values,
        NormOperator::Maximal | NormOperator::AveragedMaximal | NormOperator::SquareFunction => {
            let orders = if op == NormOperator::SquareFunction { 2 } else { 1 };
            let mut fl = order_fields(setup.dim, rows.view(), alpha, orders, &[setup.n_max])?;
            match op {
                NormOperator::Maximal => fl.e.swap_remove(0).swap_remove(0),
                NormOperator::AveragedMaximal => fl.m.swap_remove(0).swap_remove(0),
                _ => fl.g.swap_remove(0).swap_remove(0),
            }
        }
    };
    Ok(weighted_lp_norm(w, &image, p)? / denom)
}

/// Estimates for every operator over p_grid × alpha_grid, plus plot data
/// (x = p, y = estimate, one series per operator and order).
pub fn norm_table(cfg: &ExperimentConfig) -> Result<(ExperimentReport, Vec<PlotPoint>)> {
    cfg.validate()?;
    let setup = NormSetup::from_config(cfg);
    let ops = [
        NormOperator::Identity,
        NormOperator::RieszMean { n: cfg.n_max },
        NormOperator::Maximal,
        NormOperator::HardyLittlewood,
        NormOperator::SquareFunction,
        NormOperator::AveragedMaximal,
    ];
    let mut report = ExperimentReport::new("norms", Some(cfg.clone()));
    let mut plot = Vec::new();
    for op in ops {
        let alphas: Vec<Option<f64>> = if op.uses_alpha() {
            cfg.alpha_grid.iter().map(|a| Some(*a)).collect()
        } else {
            vec![None]
        };
        for a in alphas {
            for &p in &cfg.p_grid {
                let r = operator_norm_trials(op, p, a.unwrap_or(0.0), cfg.trials, cfg.seed, &setup)?;
                let (worst, est) = r
                    .iter()
                    .enumerate()
                    .fold((0, 0.0), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
                let mean = r.iter().sum::<f64>() / r.len() as f64;
                report.rows.push(
                    ResultRow::new(params([
                        ("operator", json!(op.name())),
                        ("alpha", a.map_or(json!(null), |a| json!(a))),
                        ("p", json!(p)),
                    ]))
                    .metric("estimate", est)
                    .metric("mean_ratio", mean)
                    .metric("worst_trial", worst as f64),
                );
                let series = match a {
                    Some(a) => format!("{}@alpha={a}", op.name()),
                    None => op.name(),
                };
                plot.push(PlotPoint { x: p, y: est, series });
            }
        }
    }
    Ok((report, plot))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(family: Family) -> NormSetup {
        NormSetup {
            dim: 2,
            degree_max: 12,
            n_max: 24,
            family,
        }
    }

    #[test]
    fn identity_and_contraction() {
        for fam in [Family::BandLimited, Family::Mixed] {
            let s = setup(fam);
            let id = operator_norm_estimate(NormOperator::Identity, 1.5, 0.0, 5, 1, &s).unwrap();
            assert!((id - 1.0).abs() < 1e-12);
            for n in [0, 5, 12, 20] {
                let e = operator_norm_estimate(NormOperator::RieszMean { n }, 2.0, 0.5, 5, 1, &s).unwrap();
                assert!(e <= 1.0 + 1e-8, "{n}: {e}");
            }
        }
    }

    #[test]
    fn maximal_operators_dominate_and_are_deterministic() {
        let s = setup(Family::Mixed);
        let e = operator_norm_trials(NormOperator::Maximal, 2.0, 0.5, 4, 9, &s).unwrap();
        let again = operator_norm_trials(NormOperator::Maximal, 2.0, 0.5, 4, 9, &s).unwrap();
        assert_eq!(e, again);
        assert!(e.iter().all(|v| *v >= 1.0 - 1e-12));
        let hl = operator_norm_estimate(NormOperator::HardyLittlewood, 1.0, 0.0, 4, 9, &s).unwrap();
        assert!(hl >= 1.0 - 1e-12);
        let g = operator_norm_estimate(NormOperator::SquareFunction, 2.0, 0.0, 4, 9, &s).unwrap();
        assert!(g.is_finite() && g > 0.0);
        assert!(operator_norm_estimate(NormOperator::Identity, 2.5, 0.0, 1, 0, &s).is_err());
    }
}
