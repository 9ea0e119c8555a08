//! Pointwise convergence of Riesz means of zonal profiles, computed on the
//! one-dimensional Funk–Hecke route: E_n^α f(x) = Σ_k w_k(n, α) μ_k Z_k(t)
//! with t = ⟨x, pole⟩.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::ExperimentConfig;
use super::report::{params, AuditRow, ExperimentReport, PlotPoint, ResultRow};
use crate::error::{Error, Result};
use crate::sphere::{SpherePoint, clamped_cos};
use crate::transform::{funk_hecke_coefficients, singular_profile, ZonalProfile};
use crate::zonal::{order_weights, ZonalTable};

pub const CONVERGING_SLOPE: f64 = -0.1;
pub const DIVERGING_SLOPE: f64 = 0.1;
pub const LADDER_START: usize = 8;
/// The threshold map uses s = N/(2p) - this, just inside L_p.
pub const EXPONENT_MARGIN: f64 = 0.05;
/// Polar angles of the meridian evaluation points; π is the antipode of
/// the pole.
pub const MERIDIAN: [f64; 4] = [PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Converging,
    Stalling,
    Diverging,
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Converging => "converging",
            Self::Stalling => "stalling",
            Self::Diverging => "diverging",
        }
    }

    pub fn code(&self) -> f64 {
        match self {
            Self::Converging => 1.0,
            Self::Stalling => 0.0,
            Self::Diverging => -1.0,
        }
    }
}

pub fn classify(slope: f64) -> Classification {
    if slope < CONVERGING_SLOPE {
        Classification::Converging
    } else if slope > DIVERGING_SLOPE {
        Classification::Diverging
    } else {
        Classification::Stalling
    }
}

/// round(8 · 2^{j/2}) for j = 0, 1, … while ≤ k_max.
pub fn n_ladder(k_max: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for j in 0.. {
        let n = (LADDER_START as f64 * 2f64.powf(j as f64 / 2.0)).round() as usize;
        if n > k_max {
            break;
        }
        if out.last() != Some(&n) {
            out.push(n);
        }
    }
    out
}

/// Least-squares slope of log(error) against log(n) over the upper half of
/// the ladder.
pub fn fit_slope(ns: &[usize], errors: &[f64]) -> f64 {
    let len = ns.len().min(errors.len());
    let start = len / 2;
    let xs: Vec<f64> = ns[start..len].iter().map(|n| (*n as f64).ln()).collect();
    let ys: Vec<f64> = errors[start..len]
        .iter()
        .map(|e| e.max(f64::MIN_POSITIVE).ln())
        .collect();
    let m = xs.len() as f64;
    if xs.len() < 2 {
        return f64::NAN;
    }
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Error trace at one point and order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointConvergence {
    pub alpha: f64,
    pub point: usize,
    /// Angle between the point and the profile's pole.
    pub theta: f64,
    pub value: f64,
    pub ladder: Vec<usize>,
    /// max |E_n^α f(x) - f(x)| over n in [ladder[i], ladder[i+1]).
    pub errors: Vec<f64>,
    pub slope: f64,
    pub class: Classification,
}

/// Error traces for every (α, point) pair up to degree `k_max`.
pub fn convergence_series(
    profile: &ZonalProfile,
    alpha_grid: &[f64],
    eval_points: &[SpherePoint],
    k_max: usize,
) -> Result<Vec<PointConvergence>> {
    let ladder = n_ladder(k_max);
    if ladder.len() < 2 {
        return Err(Error::OutOfRange {
            name: "k_max",
            value: k_max as f64,
            expected: "k_max >= 11 for a two-step ladder",
        });
    }
    let dim = profile.dim();
    let mu = funk_hecke_coefficients(profile, k_max)?.mu;
    let table = ZonalTable::new(dim, k_max)?;
    let mut out = Vec::new();
    for (pi, x) in eval_points.iter().enumerate() {
        if x.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: x.dim(),
                right: dim,
            });
        }
        let t = clamped_cos(x.coords(), profile.pole().coords());
        if t > 1.0 - 1e-12 {
            return Err(Error::OutOfRange {
                name: "eval point",
                value: t,
                expected: "a point away from the pole",
            });
        }
        let mut z = vec![0.0; k_max + 1];
        table.fill(t, &mut z);
        let c: Vec<f64> = mu.iter().zip(&z).map(|(m, z)| m * z).collect();
        let value = profile.eval(x);
        for &alpha in alpha_grid {
            let err: Vec<f64> = (0..=k_max)
                .map(|n| {
                    let w = order_weights(dim, n, alpha);
                    let e: f64 = w.iter().zip(&c).map(|(w, c)| w * c).sum();
                    (e - value).abs()
                })
                .collect();
            let errors: Vec<f64> = ladder
                .iter()
                .enumerate()
                .map(|(i, &n)| {
                    let end = ladder.get(i + 1).copied().unwrap_or(k_max + 1);
                    err[n..end].iter().copied().fold(0.0, f64::max)
                })
                .collect();
            let slope = fit_slope(&ladder, &errors);
            out.push(PointConvergence {
                alpha,
                point: pi,
                theta: t.acos(),
                value,
                ladder: ladder.clone(),
                errors,
                slope,
                class: classify(slope),
            });
        }
    }
    Ok(out)
}

/// Report form of [`convergence_series`]: one row per (α, point).
pub fn convergence_experiment(
    profile: &ZonalProfile,
    alpha_grid: &[f64],
    p: f64,
    eval_points: &[SpherePoint],
    k_max: usize,
) -> Result<ExperimentReport> {
    let series = convergence_series(profile, alpha_grid, eval_points, k_max)?;
    let mut report = ExperimentReport::new("convergence", None);
    for s in &series {
        report.rows.push(point_row(s, p, &profile.shape().label()));
    }
    Ok(report)
}

fn point_row(s: &PointConvergence, p: f64, label: &str) -> ResultRow {
    ResultRow::new(params([
        ("kind", json!("point")),
        ("profile", json!(label)),
        ("p", json!(p)),
        ("alpha", json!(s.alpha)),
        ("theta", json!(s.theta)),
        ("class", json!(s.class.name())),
    ]))
    .metric("slope", s.slope)
    .metric("final_error", *s.errors.last().unwrap_or(&f64::NAN))
    .metric("class_code", s.class.code())
}

/// α = (N-1)(1/p - 1/2) and α = N(1/p - 1/2) - 1/2.
pub fn critical_lines(dim: usize, p: f64) -> (f64, f64) {
    let n = dim as f64;
    let d = 1.0 / p - 0.5;
    ((n - 1.0) * d, n * d - 0.5)
}

/// Worst class over the points: converging only if every point converges.
fn cell_class(points: &[&PointConvergence]) -> Classification {
    if points.iter().all(|p| p.class == Classification::Converging) {
        Classification::Converging
    } else if points.iter().any(|p| p.class == Classification::Diverging) {
        Classification::Diverging
    } else {
        Classification::Stalling
    }
}

/// Classification of every (p, α) cell for the singular profile
/// (1 - t)^{-s}, s = N/(2p) - 0.05, on the meridian points.
pub fn threshold_map(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    Ok(threshold_map_with_plots(cfg)?.0)
}

/// [`threshold_map`] plus plot data for the map and the error traces.
pub fn threshold_map_with_plots(
    cfg: &ExperimentConfig,
) -> Result<(ExperimentReport, Vec<PlotPoint>, Vec<PlotPoint>)> {
    cfg.validate()?;
    let dim = cfg.dimension;
    let pole = SpherePoint::north(dim)?;
    let points = MERIDIAN
        .iter()
        .map(|&th| SpherePoint::at_polar_angle(dim, th))
        .collect::<Result<Vec<_>>>()?;
    let mut report = ExperimentReport::new("threshold_map", Some(cfg.clone()));
    let mut map_plot = Vec::new();
    let mut curves = Vec::new();
    let mut minimal: Vec<(f64, Option<f64>)> = Vec::new();

    for &p in &cfg.p_grid {
        let s = dim as f64 / (2.0 * p) - EXPONENT_MARGIN;
        let profile = singular_profile(s, 0.0)?.zonal(dim, pole.clone())?;
        let series = convergence_series(&profile, &cfg.alpha_grid, &points, cfg.degree_max)?;
        let (cond, cond2) = critical_lines(dim, p);
        let mut classes = Vec::new();
        for &alpha in &cfg.alpha_grid {
            let cell: Vec<&PointConvergence> = series.iter().filter(|x| x.alpha == alpha).collect();
            let class = cell_class(&cell);
            let worst = cell.iter().map(|x| x.slope).fold(f64::NEG_INFINITY, f64::max);
            classes.push((alpha, class));
            report.rows.push(
                ResultRow::new(params([
                    ("kind", json!("cell")),
                    ("p", json!(p)),
                    ("alpha", json!(alpha)),
                    ("s", json!(s)),
                    ("class", json!(class.name())),
                ]))
                .metric("worst_slope", worst)
                .metric("class_code", class.code())
                .metric("cond", cond)
                .metric("cond2", cond2),
            );
            map_plot.push(PlotPoint {
                x: p,
                y: alpha,
                series: class.name().to_string(),
            });
            for x in &cell {
                report.rows.push(point_row(x, p, &profile.shape().label()));
                for (n, e) in x.ladder.iter().zip(&x.errors) {
                    curves.push(PlotPoint {
                        x: *n as f64,
                        y: *e,
                        series: format!("p={p};alpha={alpha};theta={:.6}", x.theta),
                    });
                }
            }
        }
        let mut sorted = classes.clone();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let min_alpha = sorted
            .iter()
            .find(|(_, c)| *c == Classification::Converging)
            .map(|(a, _)| *a);
        let mut mono = AuditRow::constant("alpha_monotone", params([("p", json!(p))]));
        let mut seen = false;
        for (i, (_, c)) in sorted.iter().enumerate() {
            mono.checks += 1;
            if seen && *c != Classification::Converging {
                mono.violations += 1;
                mono.passed = false;
                mono.witness.get_or_insert(super::report::Witness {
                    trial: 0,
                    point: i,
                    lhs: sorted[i].0,
                    rhs: 0.0,
                });
            }
            seen |= *c == Classification::Converging;
        }
        report.audits.push(mono);
        report.rows.push(
            ResultRow::new(params([
                ("kind", json!("summary")),
                ("p", json!(p)),
                ("s", json!(s)),
                ("min_converging_alpha", min_alpha.map_or(json!(null), |a| json!(a))),
            ]))
            .metric("cond", cond)
            .metric("cond2", cond2),
        );
        if let Some(a) = min_alpha {
            map_plot.push(PlotPoint {
                x: p,
                y: a,
                series: "min_converging_alpha".into(),
            });
        }
        minimal.push((p, min_alpha));
    }

    for i in 0..=20 {
        let p = 1.0 + i as f64 / 20.0;
        let (c1, c2) = critical_lines(dim, p);
        map_plot.push(PlotPoint { x: p, y: c1, series: "cond".into() });
        map_plot.push(PlotPoint { x: p, y: c2, series: "cond2".into() });
    }

    let mut trend = AuditRow::constant("min_alpha_nonincreasing_in_p", params([]));
    minimal.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for w in minimal.windows(2) {
        trend.checks += 1;
        let lo = w[0].1.unwrap_or(f64::INFINITY);
        let hi = w[1].1.unwrap_or(f64::INFINITY);
        if hi > lo {
            trend.violations += 1;
            trend.passed = false;
        }
    }
    report.audits.push(trend);
    Ok((report, map_plot, curves))
}

/// Minimal converging α per p from a threshold-map report.
pub fn minimal_converging(report: &ExperimentReport) -> Vec<(f64, Option<f64>)> {
    report
        .rows
        .iter()
        .filter(|r| r.params.get("kind") == Some(&json!("summary")))
        .map(|r| {
            (
                r.params["p"].as_f64().unwrap_or(f64::NAN),
                r.params["min_converging_alpha"].as_f64(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::Family;
    use crate::transform::GegenbauerProfile;
    use std::sync::Arc;

    #[test]
    fn ladder_and_slopes() {
        assert_eq!(n_ladder(256), vec![8, 11, 16, 23, 32, 45, 64, 91, 128, 181, 256]);
        assert_eq!(n_ladder(10), vec![8]);
        let ns = n_ladder(256);
        let e: Vec<f64> = ns.iter().map(|n| 3.0 * (*n as f64).powf(-1.5)).collect();
        assert!((fit_slope(&ns, &e) + 1.5).abs() < 1e-12);
        assert_eq!(classify(-0.5), Classification::Converging);
        assert_eq!(classify(0.05), Classification::Stalling);
        assert_eq!(classify(0.5), Classification::Diverging);
    }

    #[test]
    fn harmonic_error_is_explicit() {
        let dim = 2;
        let k = 3;
        let profile = ZonalProfile::new(
            dim,
            SpherePoint::north(dim).unwrap(),
            Arc::new(GegenbauerProfile::new(dim, k).unwrap()),
        )
        .unwrap();
        let x = SpherePoint::at_polar_angle(dim, 1.0).unwrap();
        let s = convergence_series(&profile, &[1.0], &[x.clone()], 64).unwrap();
        let fx = profile.eval(&x).abs();
        let ladder = &s[0].ladder;
        for (i, &n) in ladder.iter().enumerate() {
            // 1 - w_k(n) decreases in n, so the window max sits at its start
            let expect = (1.0 - order_weights(dim, n, 1.0)[k]) * fx;
            assert!((s[0].errors[i] - expect).abs() < 1e-10, "{n}");
        }
        assert_eq!(s[0].class, Classification::Converging);
    }

    #[test]
    fn smooth_profile_converges_everywhere() {
        let dim = 2;
        let profile = singular_profile(0.5, 0.5)
            .unwrap()
            .zonal(dim, SpherePoint::north(dim).unwrap())
            .unwrap();
        let pts: Vec<SpherePoint> = MERIDIAN
            .iter()
            .map(|&t| SpherePoint::at_polar_angle(dim, t).unwrap())
            .collect();
        let s = convergence_series(&profile, &[1.0], &pts, 128).unwrap();
        for x in &s {
            assert_eq!(x.class, Classification::Converging, "{x:?}");
            for w in x.errors.windows(2).skip(1) {
                assert!(w[1] <= w[0] * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn pole_is_rejected() {
        let dim = 2;
        let profile = singular_profile(0.3, 0.0)
            .unwrap()
            .zonal(dim, SpherePoint::north(dim).unwrap())
            .unwrap();
        assert!(convergence_series(&profile, &[1.0], &[SpherePoint::north(2).unwrap()], 32).is_err());
    }

    #[test]
    fn small_threshold_map() {
        let cfg = ExperimentConfig {
            dimension: 2,
            degree_max: 64,
            n_max: 8,
            alpha_grid: vec![0.5, 1.0, 2.0],
            p_grid: vec![1.5, 2.0],
            family: Family::BandLimited,
            trials: 1,
            seed: 0,
            out_dir: "unused".into(),
        };
        let r = threshold_map(&cfg).unwrap();
        let cells = r.rows.iter().filter(|x| x.params["kind"] == json!("cell")).count();
        assert_eq!(cells, 6);
        let min = minimal_converging(&r);
        assert_eq!(min.len(), 2);
        let (c1, c2) = critical_lines(2, 2.0);
        assert!(c1 <= 0.0 && c2 <= 0.0);
    }
}
