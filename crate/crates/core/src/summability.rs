//! Riesz means and the maximal operators built from them.
//!
//! Means are computed from a [`DegreeDecomposition`] as a matrix product
//! W·Y where W[n][k] = w_k(n, α) is lower triangular; the kernel route
//! integrates Θ^α(⟨x, ·⟩, n) against grid samples instead.

use std::sync::Arc;

use ndarray::{s, Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{check_dim, clamped_cos, SphereGrid, SpherePoint};
use crate::transform::{DegreeDecomposition, GridFunction};
use crate::zonal::{check_degree, order_weights, RieszKernel};

/// Number of radii in the default Hardy–Littlewood ladder.
pub const DEFAULT_RADII: usize = 24;

fn check_order(alpha: f64) -> Result<()> {
    if !(alpha > -0.5) || !alpha.is_finite() {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            expected: "alpha > -1/2",
        });
    }
    Ok(())
}

fn check_n(n: usize, k_max: usize) -> Result<()> {
    if n > k_max {
        return Err(Error::DegreeTooLarge {
            degree: n,
            max: k_max,
        });
    }
    Ok(())
}

/// E_n^α f for n = 0..=n_max at a set of points (usually grid nodes).
#[derive(Debug, Clone)]
pub struct RieszMeanSeries {
    alpha: f64,
    values: Array2<f64>,
}

impl RieszMeanSeries {
    pub fn new(dec: &DegreeDecomposition, alpha: f64, n_max: usize) -> Result<Self> {
        check_n(n_max, dec.k_max())?;
        Self::from_rows(dec.dim(), dec.rows().view(), alpha, n_max)
    }

    /// Means from degree rows Y_k at arbitrary points (row k, column point).
    /// Degrees beyond the last row are taken to vanish, so `n_max` may
    /// exceed the row count for band-limited inputs.
    pub fn from_rows(dim: usize, rows: ArrayView2<'_, f64>, alpha: f64, n_max: usize) -> Result<Self> {
        check_order(alpha)?;
        check_dim(dim)?;
        check_degree(n_max)?;
        let kk = rows.nrows().min(n_max + 1);
        let mut w = Array2::<f64>::zeros((n_max + 1, kk));
        for n in 0..=n_max {
            for (k, wk) in order_weights(dim, n, alpha).into_iter().take(kk).enumerate() {
                w[(n, k)] = wk;
            }
        }
        Ok(Self {
            alpha,
            values: w.dot(&rows.slice(s![..kk, ..])),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_max(&self) -> usize {
        self.values.nrows() - 1
    }

    /// Rows indexed by n, columns by point.
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn mean(&self, n: usize) -> ArrayView1<'_, f64> {
        self.values.row(n)
    }

    pub fn at(&self, n: usize, point: usize) -> f64 {
        self.values[(n, point)]
    }

    pub fn mean_function(&self, grid: Arc<SphereGrid>, n: usize) -> Result<GridFunction> {
        GridFunction::new(grid, self.values.row(n).to_vec())
    }
}

/// Σ_{k<=n} w_k(n, α) Y_k(f, x) at one node.
pub fn riesz_mean(dec: &DegreeDecomposition, n: usize, alpha: f64, node: usize) -> Result<f64> {
    check_order(alpha)?;
    check_n(n, dec.k_max())?;
    if node >= dec.grid().len() {
        return Err(Error::OutOfRange {
            name: "node",
            value: node as f64,
            expected: "index below the grid size",
        });
    }
    let w = order_weights(dec.dim(), n, alpha);
    Ok(w.iter().enumerate().map(|(k, wk)| wk * dec.rows()[(k, node)]).sum())
}

/// ∫ Θ^α(⟨x, y⟩, n) f(y) dσ(y) by grid quadrature.
pub fn riesz_mean_kernel(f: &GridFunction, n: usize, alpha: f64, x: &SpherePoint) -> Result<f64> {
    let grid = f.grid();
    if x.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: grid.dim(),
        });
    }
    if n > grid.degree_budget() {
        return Err(Error::DegreeBudget {
            degree: n,
            budget: grid.degree_budget(),
        });
    }
    let kernel = RieszKernel::new(grid.dim(), n, alpha)?;
    Ok(kernel_sum(&kernel, grid, f.values(), x.coords()))
}

fn kernel_sum(kernel: &RieszKernel, grid: &SphereGrid, values: &[f64], x: &[f64]) -> f64 {
    grid.weights()
        .iter()
        .zip(values)
        .enumerate()
        .map(|(j, (w, v))| w * v * kernel.eval(clamped_cos(x, grid.coords(j))))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorTag {
    Maximal,
    HardyLittlewood,
    SquareFunction,
    AveragedMaximal,
}

impl OperatorTag {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Maximal => "maximal",
            Self::HardyLittlewood => "hardy_littlewood",
            Self::SquareFunction => "square_function",
            Self::AveragedMaximal => "averaged_maximal",
        }
    }
}

/// Nonnegative per-node values of a maximal-type operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaximalField {
    pub op: OperatorTag,
    pub alpha: Option<f64>,
    pub n_max: Option<usize>,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Index (n or radius) achieving the supremum at each node.
    pub argmax: Option<Vec<usize>>,
}

impl MaximalField {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// E_*^α f = max_{n <= n_max} |E_n^α f|.
pub fn maximal_riesz(dec: &DegreeDecomposition, alpha: f64, n_max: usize) -> Result<MaximalField> {
    Ok(maximal_from_series(&RieszMeanSeries::new(dec, alpha, n_max)?, n_max))
}

/// E_*^α from a precomputed series, truncated at `n_max`.
pub fn maximal_from_series(series: &RieszMeanSeries, n_max: usize) -> MaximalField {
    let n_max = n_max.min(series.n_max());
    let vals = series.values();
    let nodes = vals.ncols();
    let mut values = vec![0.0; nodes];
    let mut arg = vec![0usize; nodes];
    for n in 0..=n_max {
        for (i, v) in vals.row(n).iter().enumerate() {
            if v.abs() > values[i] {
                values[i] = v.abs();
                arg[i] = n;
            }
        }
    }
    MaximalField {
        op: OperatorTag::Maximal,
        alpha: Some(series.alpha()),
        n_max: Some(n_max),
        radii: Vec::new(),
        values,
        argmax: Some(arg),
    }
}

/// G^α f = (Σ_{n=1}^{n_max} (1/n) |E_n^{α+1} f − E_n^α f|²)^{1/2}.
pub fn square_function_g(dec: &DegreeDecomposition, alpha: f64, n_max: usize) -> Result<MaximalField> {
    let lo = RieszMeanSeries::new(dec, alpha, n_max)?;
    let hi = RieszMeanSeries::new(dec, alpha + 1.0, n_max)?;
    square_from_series(&lo, &hi, n_max)
}

pub fn square_from_series(
    lo: &RieszMeanSeries,
    hi: &RieszMeanSeries,
    n_max: usize,
) -> Result<MaximalField> {
    if (hi.alpha() - lo.alpha() - 1.0).abs() > 1e-12 || lo.values().ncols() != hi.values().ncols() {
        return Err(Error::Violation(
            "square function needs series of orders alpha and alpha + 1 on one grid".into(),
        ));
    }
    let n_max = n_max.min(lo.n_max()).min(hi.n_max());
    let nodes = lo.values().ncols();
    let mut acc = vec![0.0; nodes];
    for n in 1..=n_max {
        let inv = 1.0 / n as f64;
        for ((a, l), h) in acc.iter_mut().zip(lo.mean(n)).zip(hi.mean(n)) {
            let d = h - l;
            *a += inv * d * d;
        }
    }
    Ok(MaximalField {
        op: OperatorTag::SquareFunction,
        alpha: Some(lo.alpha()),
        n_max: Some(n_max),
        radii: Vec::new(),
        values: acc.into_iter().map(f64::sqrt).collect(),
        argmax: None,
    })
}

/// M^α f = sup_{1<=n<=n_max} ((1/n) Σ_{k=1}^n |E_k^α f|²)^{1/2}.
pub fn averaged_maximal_m(dec: &DegreeDecomposition, alpha: f64, n_max: usize) -> Result<MaximalField> {
    Ok(averaged_from_series(&RieszMeanSeries::new(dec, alpha, n_max)?, n_max))
}

pub fn averaged_from_series(series: &RieszMeanSeries, n_max: usize) -> MaximalField {
    let n_max = n_max.min(series.n_max());
    let nodes = series.values().ncols();
    let mut sum = vec![0.0; nodes];
    let mut best = vec![0.0; nodes];
    let mut arg = vec![0usize; nodes];
    for n in 1..=n_max {
        let inv = 1.0 / n as f64;
        for (i, v) in series.mean(n).iter().enumerate() {
            sum[i] += v * v;
            let r = sum[i] * inv;
            if r > best[i] || n == 1 {
                best[i] = r;
                arg[i] = n;
            }
        }
    }
    MaximalField {
        op: OperatorTag::AveragedMaximal,
        alpha: Some(series.alpha()),
        n_max: Some(n_max),
        radii: Vec::new(),
        values: best.into_iter().map(f64::sqrt).collect(),
        argmax: Some(arg),
    }
}

/// Geometric ladder of `count` radii from twice the grid spacing to π.
pub fn default_radii(grid: &SphereGrid) -> Vec<f64> {
    radius_ladder(2.0 * grid.spacing(), std::f64::consts::PI, DEFAULT_RADII)
}

pub fn radius_ladder(r_min: f64, r_max: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![r_max];
    }
    let ratio = (r_max / r_min).ln() / (count - 1) as f64;
    (0..count)
        .map(|i| if i + 1 == count { r_max } else { r_min * (ratio * i as f64).exp() })
        .collect()
}

/// f*(x) = sup_r |B(x, r)|^{-1} ∫_{B(x, r)} |f| dσ over the given radii.
pub fn hardy_littlewood(f: &GridFunction, radii: &[f64]) -> Result<MaximalField> {
    CapAverager::new(f.grid().clone(), radii)?.maximal(f.values())
}

/// Discrete cap averages at the grid nodes for a fixed radius set.
///
/// Each node pair is binned by the smallest radius whose cap holds it, so
/// one pass over the pairs yields the averages for every radius.
#[derive(Debug, Clone)]
pub struct CapAverager {
    grid: Arc<SphereGrid>,
    radii: Vec<f64>,
    cos_radii: Vec<f64>,
    bins: Option<Vec<u8>>,
}

/// Pair-bin tables above this many entries are recomputed on the fly.
const MAX_BIN_ENTRIES: usize = 1 << 27;

impl CapAverager {
    pub fn new(grid: Arc<SphereGrid>, radii: &[f64]) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::OutOfRange {
                name: "radii",
                value: 0.0,
                expected: "at least one radius",
            });
        }
        if radii.len() > 254 {
            return Err(Error::OutOfRange {
                name: "radii",
                value: radii.len() as f64,
                expected: "at most 254 radii",
            });
        }
        for &r in radii {
            if !(r > 0.0 && r <= std::f64::consts::PI) {
                return Err(Error::OutOfRange {
                    name: "radius",
                    value: r,
                    expected: "0 < r <= pi",
                });
            }
        }
        let mut radii = radii.to_vec();
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let cos_radii: Vec<f64> = radii.iter().map(|r| r.cos()).collect();
        Ok(Self {
            grid,
            radii,
            cos_radii,
            bins: None,
        })
    }

    /// Stores the cap membership of every node pair, which pays off when
    /// [`CapAverager::maximal`] runs on many functions over one grid.
    /// Grids too large for the table are left as they are.
    pub fn with_node_bins(mut self) -> Self {
        let n = self.grid.len();
        if self.bins.is_none() && n.saturating_mul(n) <= MAX_BIN_ENTRIES {
            let bins: Vec<Vec<u8>> = (0..n).into_par_iter().map(|i| self.bin_row(i)).collect();
            self.bins = Some(bins.concat());
        }
        self
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    fn bin(&self, c: f64) -> u8 {
        // d < r  <=>  cos d > cos r; cos_radii is decreasing.
        // r = pi covers the whole sphere, antipode included.
        self.cos_radii.partition_point(|&cr| !(c > cr || cr <= -1.0)) as u8
    }

    /// Smallest radius index b with d(x_i, x_j) < r_b, or radii.len().
    fn bin_row(&self, i: usize) -> Vec<u8> {
        let x = self.grid.coords(i);
        (0..self.grid.len())
            .map(|j| self.bin(if i == j { 1.0 } else { clamped_cos(x, self.grid.coords(j)) }))
            .collect()
    }

    fn accumulate(&self, bins: impl Iterator<Item = u8>, values: &[f64]) -> Vec<Option<f64>> {
        let r = self.radii.len();
        let mut mass = vec![0.0; r + 1];
        let mut total = vec![0.0; r + 1];
        let w = self.grid.weights();
        for (j, b) in bins.enumerate() {
            mass[b as usize] += w[j];
            total[b as usize] += w[j] * values[j].abs();
        }
        let mut out = Vec::with_capacity(r);
        let (mut m, mut t) = (0.0, 0.0);
        for b in 0..r {
            m += mass[b];
            t += total[b];
            out.push(if m > 0.0 { Some(t / m) } else { None });
        }
        out
    }

    /// Cap averages of |values| around an arbitrary point.
    pub fn averages_at(&self, x: &[f64], values: &[f64]) -> Vec<Option<f64>> {
        let g = &self.grid;
        self.accumulate((0..g.len()).map(|j| self.bin(clamped_cos(x, g.coords(j)))), values)
    }

    /// f*(x) at arbitrary points; grid values give the integrand.
    pub fn maximal_at(&self, points: &[&[f64]], values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.grid.len() {
            return Err(Error::LengthMismatch {
                values: values.len(),
                nodes: self.grid.len(),
            });
        }
        Ok(points
            .par_iter()
            .map(|x| {
                self.averages_at(x, values)
                    .into_iter()
                    .flatten()
                    .fold(0.0, f64::max)
            })
            .collect())
    }

    /// Cap averages of |values| at node i for each radius; `None` where the
    /// cap holds no node.
    pub fn averages(&self, i: usize, values: &[f64]) -> Vec<Option<f64>> {
        match &self.bins {
            Some(bins) => {
                let n = self.grid.len();
                self.accumulate(bins[i * n..(i + 1) * n].iter().copied(), values)
            }
            None => self.accumulate(self.bin_row(i).into_iter(), values),
        }
    }

    pub fn maximal(&self, values: &[f64]) -> Result<MaximalField> {
        let n = self.grid.len();
        if values.len() != n {
            return Err(Error::LengthMismatch {
                values: values.len(),
                nodes: n,
            });
        }
        let per_node: Vec<(f64, usize, bool)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut best = 0.0;
                let mut arg = 0;
                let mut skipped = false;
                for (b, a) in self.averages(i, values).into_iter().enumerate() {
                    match a {
                        Some(a) if a > best => {
                            best = a;
                            arg = b;
                        }
                        Some(_) => {}
                        None => skipped = true,
                    }
                }
                (best, arg, skipped)
            })
            .collect();
        if per_node.iter().any(|p| p.2) {
            log::warn!("some caps contain no grid node; those radii were skipped");
        }
        Ok(MaximalField {
            op: OperatorTag::HardyLittlewood,
            alpha: None,
            n_max: None,
            radii: self.radii.clone(),
            values: per_node.iter().map(|p| p.0).collect(),
            argmax: Some(per_node.iter().map(|p| p.1).collect()),
        })
    }
}
