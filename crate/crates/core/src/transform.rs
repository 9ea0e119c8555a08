//! Degree projections Y_k(f, ·) of functions on S^N.
//!
//! Two routes are provided. General grid-sampled functions are projected by
//! kernel quadrature, Y_k(f, x) = ∫ Z_k(⟨x, y⟩) f(y) dσ(y). Zonal functions
//! f(y) = g(⟨y, pole⟩) go through the Funk–Hecke formula, which reduces
//! the projection to one integral per degree:
//!
//! ```text
//! Y_k(f, x) = μ_k Z_k(⟨x, pole⟩),
//! μ_k = ω_{N-1} ∫_{-1}^{1} g(t) C_k(t)/C_k(1) (1 - t²)^{(N-2)/2} dt.
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_jacobi, gauss_legendre, Rule};
use crate::sphere::{check_dim, clamped_cos, sphere_measure, SphereGrid, SpherePoint};
use crate::zonal::{check_degree, ZonalTable};

/// Samples of a function at the nodes of a grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                values: values.len(),
                nodes: grid.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` (given the node coordinates) at every node.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: Arc<SphereGrid>, f: F) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Arc<SphereGrid>, c: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![c; n])
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }
}

/// (Σ_j w_j |f_j|^p)^{1/p}; `p = f64::INFINITY` gives the max norm.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    weighted_lp_norm(f.grid.weights(), &f.values, p)
}

pub(crate) fn weighted_lp_norm(weights: &[f64], values: &[f64], p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            expected: "p >= 1",
        });
    }
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    let s: f64 = if p == 2.0 {
        weights.iter().zip(values).map(|(w, v)| w * v * v).sum()
    } else if p == 1.0 {
        weights.iter().zip(values).map(|(w, v)| w * v.abs()).sum()
    } else {
        weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v.abs().powf(p))
            .sum()
    };
    Ok(s.powf(1.0 / p))
}

/// Rows k = 0..=K of projections Y_k(f, ·) sampled at the grid nodes.
#[derive(Debug, Clone)]
pub struct DegreeDecomposition {
    grid: Arc<SphereGrid>,
    rows: Array2<f64>,
}

impl DegreeDecomposition {
    /// Wraps a (K+1) × nodes matrix of projections.
    pub fn from_rows(grid: Arc<SphereGrid>, rows: Array2<f64>) -> Result<Self> {
        if rows.ncols() != grid.len() {
            return Err(Error::LengthMismatch {
                values: rows.ncols(),
                nodes: grid.len(),
            });
        }
        if rows.nrows() == 0 {
            return Err(Error::OutOfRange {
                name: "rows",
                value: 0.0,
                expected: "at least degree 0",
            });
        }
        Ok(Self { grid, rows })
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn k_max(&self) -> usize {
        self.rows.nrows() - 1
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn rows(&self) -> &Array2<f64> {
        &self.rows
    }

    pub fn row(&self, k: usize) -> ArrayView1<'_, f64> {
        self.rows.row(k)
    }

    /// ‖Y_k‖²_{L²} on the grid, per degree.
    pub fn degree_norms_sq(&self) -> Vec<f64> {
        let w = self.grid.weights();
        self.rows
            .rows()
            .into_iter()
            .map(|r| r.iter().zip(w).map(|(v, w)| w * v * v).sum())
            .collect()
    }

    /// Σ_k Y_k(f, ·).
    pub fn reconstruct(&self) -> Result<GridFunction> {
        let values = self.rows.sum_axis(ndarray::Axis(0)).to_vec();
        GridFunction::new(self.grid.clone(), values)
    }
}

fn check_budget(grid: &SphereGrid, k: usize) -> Result<()> {
    check_degree(k)?;
    if k > grid.degree_budget() {
        return Err(Error::DegreeBudget {
            degree: k,
            budget: grid.degree_budget(),
        });
    }
    Ok(())
}

/// Y_k(f, x) by kernel quadrature.
pub fn project_degree(f: &GridFunction, k: usize, x: &SpherePoint) -> Result<f64> {
    let grid = &f.grid;
    if x.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: grid.dim(),
        });
    }
    check_budget(grid, k)?;
    let table = ZonalTable::new(grid.dim(), k)?;
    let mut z = vec![0.0; k + 1];
    let w = grid.weights();
    let mut acc = 0.0;
    for j in 0..grid.len() {
        table.fill(clamped_cos(x.coords(), grid.coords(j)), &mut z);
        acc += w[j] * z[k] * f.values[j];
    }
    Ok(acc)
}

/// All projections Y_0..Y_K at every node.
pub fn decompose(f: &GridFunction, k_max: usize) -> Result<DegreeDecomposition> {
    let mut out = decompose_batch(std::slice::from_ref(f), k_max)?;
    Ok(out.pop().expect("one decomposition"))
}

/// Decomposes several functions sampled on the same grid, sharing the
/// kernel evaluations between them.
pub fn decompose_batch(fs: &[GridFunction], k_max: usize) -> Result<Vec<DegreeDecomposition>> {
    let Some(first) = fs.first() else {
        return Ok(Vec::new());
    };
    let grid = first.grid.clone();
    if fs.iter().any(|f| !Arc::ptr_eq(&f.grid, &grid)) {
        return Err(Error::Config("batch members must share one grid".into()));
    }
    check_budget(&grid, k_max)?;
    let table = ZonalTable::new(grid.dim(), k_max)?;
    let nf = fs.len();
    let nodes = grid.len();
    let kk = k_max + 1;

    // weighted samples, node-major: wf[j * nf + m] = w_j f_m(y_j)
    let w = grid.weights();
    let mut wf = vec![0.0; nodes * nf];
    for j in 0..nodes {
        for (m, f) in fs.iter().enumerate() {
            wf[j * nf + m] = w[j] * f.values[j];
        }
    }

    let per_node: Vec<Vec<f64>> = (0..nodes)
        .into_par_iter()
        .map_init(
            || vec![0.0; kk],
            |z, i| {
                let xi = grid.coords(i);
                let mut acc = vec![0.0; kk * nf];
                for j in 0..nodes {
                    table.fill(clamped_cos(xi, grid.coords(j)), z);
                    let src = &wf[j * nf..(j + 1) * nf];
                    for (k, &zk) in z.iter().enumerate() {
                        let dst = &mut acc[k * nf..(k + 1) * nf];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += zk * s;
                        }
                    }
                }
                acc
            },
        )
        .collect();

    (0..nf)
        .map(|m| {
            let mut rows = Array2::<f64>::zeros((kk, nodes));
            for (i, acc) in per_node.iter().enumerate() {
                for k in 0..kk {
                    rows[(k, i)] = acc[k * nf + m];
                }
            }
            DegreeDecomposition::from_rows(grid.clone(), rows)
        })
        .collect()
}

/// A profile t ↦ g(t) on [-1, 1] defining the zonal function g(⟨·, pole⟩).
pub trait Profile: Send + Sync + fmt::Debug {
    fn value(&self, t: f64) -> f64;

    /// g(1 - u), for callers that know the gap u = 1 - t more accurately
    /// than t itself.
    fn value_at_gap(&self, u: f64) -> f64 {
        self.value(1.0 - u)
    }

    /// Exponent s when g(1 - u) u^s stays bounded and smooth as u → 0.
    fn pole_exponent(&self) -> Option<f64> {
        None
    }

    /// g(1 - u) u^s for the exponent above.
    fn regular_part(&self, u: f64) -> f64 {
        match self.pole_exponent() {
            Some(s) => self.value_at_gap(u) * u.powf(s),
            None => self.value_at_gap(u),
        }
    }

    /// True when the profile varies on scales much finer than the
    /// oscillation of the degree-K polynomials near t = 1.
    fn needs_grading(&self) -> bool {
        false
    }

    fn label(&self) -> String;
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantProfile(pub f64);

impl Profile for ConstantProfile {
    fn value(&self, _t: f64) -> f64 {
        self.0
    }
    fn label(&self) -> String {
        format!("constant:{}", self.0)
    }
}

/// g(t) = t^m.
#[derive(Debug, Clone, Copy)]
pub struct MonomialProfile(pub u32);

impl Profile for MonomialProfile {
    fn value(&self, t: f64) -> f64 {
        t.powi(self.0 as i32)
    }
    fn label(&self) -> String {
        format!("power:{}", self.0)
    }
}

/// g(t) = C_m(t) / C_m(1) with the Gegenbauer parameter of S^N.
#[derive(Debug, Clone)]
pub struct GegenbauerProfile {
    degree: usize,
    table: ZonalTable,
}

impl GegenbauerProfile {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        Ok(Self {
            degree,
            table: ZonalTable::new(dim, degree)?,
        })
    }
}

impl Profile for GegenbauerProfile {
    fn value(&self, t: f64) -> f64 {
        let mut buf = vec![0.0; self.degree + 1];
        self.table.fill_normalized(t, &mut buf);
        buf[self.degree]
    }
    fn label(&self) -> String {
        format!("gegenbauer:{}", self.degree)
    }
}

/// g(t) = (1 - t + eps)^{-s}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularProfile {
    pub s: f64,
    pub eps: f64,
}

impl SingularProfile {
    /// Whether g(⟨·, pole⟩) lies in L_p(S^N): always for eps > 0, otherwise
    /// exactly when 2sp < N.
    pub fn in_lp(&self, dim: usize, p: f64) -> bool {
        if self.eps > 0.0 {
            return true;
        }
        if p.is_infinite() {
            return false;
        }
        2.0 * self.s * p < dim as f64
    }

    pub fn zonal(self, dim: usize, pole: SpherePoint) -> Result<ZonalProfile> {
        ZonalProfile::new(dim, pole, Arc::new(self))
    }
}

impl Profile for SingularProfile {
    fn value(&self, t: f64) -> f64 {
        self.value_at_gap(1.0 - t)
    }
    fn value_at_gap(&self, u: f64) -> f64 {
        (u.max(0.0) + self.eps).powf(-self.s)
    }
    fn pole_exponent(&self) -> Option<f64> {
        (self.eps == 0.0).then_some(self.s)
    }
    fn regular_part(&self, u: f64) -> f64 {
        if self.eps == 0.0 {
            1.0
        } else {
            self.value_at_gap(u)
        }
    }
    fn needs_grading(&self) -> bool {
        true
    }
    fn label(&self) -> String {
        format!("singular:{},{}", self.s, self.eps)
    }
}

pub fn singular_profile(s: f64, eps: f64) -> Result<SingularProfile> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::OutOfRange {
            name: "s",
            value: s,
            expected: "s > 0",
        });
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::OutOfRange {
            name: "eps",
            value: eps,
            expected: "eps >= 0",
        });
    }
    Ok(SingularProfile { s, eps })
}

/// Wraps an arbitrary closure.
pub struct FnProfile {
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    name: String,
}

impl FnProfile {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(name: &str, f: F) -> Self {
        Self {
            f: Box::new(f),
            name: name.to_string(),
        }
    }
}

impl fmt::Debug for FnProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnProfile({})", self.name)
    }
}

impl Profile for FnProfile {
    fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }
    fn label(&self) -> String {
        self.name.clone()
    }
}

/// A zonal function g(⟨·, pole⟩) on S^N.
#[derive(Debug, Clone)]
pub struct ZonalProfile {
    dim: usize,
    pole: SpherePoint,
    shape: Arc<dyn Profile>,
}

impl ZonalProfile {
    pub fn new(dim: usize, pole: SpherePoint, shape: Arc<dyn Profile>) -> Result<Self> {
        check_dim(dim)?;
        if pole.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: pole.dim(),
                right: dim,
            });
        }
        Ok(Self { dim, pole, shape })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pole(&self) -> &SpherePoint {
        &self.pole
    }

    pub fn shape(&self) -> &Arc<dyn Profile> {
        &self.shape
    }

    /// g(⟨x, pole⟩) for raw coordinates.
    pub fn eval_coords(&self, x: &[f64]) -> f64 {
        let t = clamped_cos(x, self.pole.coords());
        self.shape.value(t)
    }

    pub fn eval(&self, x: &SpherePoint) -> f64 {
        self.eval_coords(x.coords())
    }

    pub fn sample(&self, grid: Arc<SphereGrid>) -> Result<GridFunction> {
        let shape = &self.shape;
        let pole = self.pole.coords().to_vec();
        GridFunction::from_fn(grid, move |x| shape.value(clamped_cos(x, &pole)))
    }
}

/// Funk–Hecke coefficients μ_0..μ_K of a zonal profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZonalCoefficients {
    pub dim: usize,
    pub k_max: usize,
    pub mu: Vec<f64>,
    /// Absolute quadrature agreement between the last two refinements.
    pub achieved: f64,
}

const FH_TOL: f64 = 1e-12;
const FH_MAX_LEVEL: u32 = 5;
const FH_GRADING_STEPS: i32 = 40;

/// μ_k for k = 0..=K by panel Gauss quadrature in θ = arccos t, graded
/// geometrically toward θ = 0 for singular or sharply peaked profiles,
/// refined until two successive levels agree.
pub fn funk_hecke_coefficients(profile: &ZonalProfile, k_max: usize) -> Result<ZonalCoefficients> {
    check_degree(k_max)?;
    let dim = profile.dim;
    if let Some(s) = profile.shape.pole_exponent() {
        if !(dim as f64 - 2.0 * s > 0.0) {
            return Err(Error::OutOfRange {
                name: "pole exponent s",
                value: s,
                expected: "2s < N (integrable profile)",
            });
        }
    }
    let table = ZonalTable::new(dim, k_max)?;
    let (mut prev, _) = funk_hecke_level(profile, &table, k_max, 0)?;
    let mut achieved = f64::INFINITY;
    for level in 1..=FH_MAX_LEVEL {
        let (cur, scale) = funk_hecke_level(profile, &table, k_max, level)?;
        let diff = cur
            .iter()
            .zip(&prev)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        achieved = diff;
        if diff <= FH_TOL * scale.max(f64::MIN_POSITIVE) {
            return Ok(ZonalCoefficients {
                dim,
                k_max,
                mu: cur,
                achieved,
            });
        }
        prev = cur;
    }
    Err(Error::QuadratureStalled {
        achieved,
        target: FH_TOL,
    })
}

/// μ_k for a single degree.
pub fn funk_hecke_coefficient(profile: &ZonalProfile, k: usize) -> Result<f64> {
    Ok(funk_hecke_coefficients(profile, k)?.mu[k])
}

fn funk_hecke_level(
    profile: &ZonalProfile,
    table: &ZonalTable,
    k_max: usize,
    level: u32,
) -> Result<(Vec<f64>, f64)> {
    let dim = profile.dim;
    let shape = &profile.shape;
    let order = 16 + 8 * level as usize;
    let gl = gauss_legendre(order)?;
    let panels = (k_max / 2 + 8) << level;
    let h = PI / panels as f64;
    let m = (dim - 1) as i32;

    // (θ, weight including sin^{N-1}θ, g value); the singular panel folds
    // θ^{N-1-2s} into the weight and the rest into the value.
    let mut pts: Vec<(f64, f64, f64)> = Vec::new();
    let push_gl = |rule: &Rule, pts: &mut Vec<(f64, f64, f64)>| {
        for (&th, &w) in rule.nodes.iter().zip(&rule.weights) {
            let u = 2.0 * (0.5 * th).sin().powi(2);
            pts.push((th, w * th.sin().powi(m), shape.value_at_gap(u)));
        }
    };

    let graded = shape.needs_grading() || shape.pole_exponent().is_some();
    let mut start = 0.0;
    if graded {
        let first = h * 2f64.powi(-FH_GRADING_STEPS);
        match shape.pole_exponent() {
            Some(s) => {
                let c = m as f64 - 2.0 * s;
                let rule = gauss_jacobi(order, 0.0, c)?;
                let pref = (0.5 * first).powf(c + 1.0);
                for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let th = 0.5 * first * (1.0 + x);
                    let u = 2.0 * (0.5 * th).sin().powi(2);
                    let value = shape.regular_part(u)
                        * (u / (th * th)).powf(-s)
                        * (th.sin() / th).powi(m);
                    pts.push((th, pref * w, value));
                }
            }
            None => push_gl(&gl.mapped(0.0, first), &mut pts),
        }
        let mut lo = first;
        for _ in 0..FH_GRADING_STEPS {
            let hi = 2.0 * lo;
            push_gl(&gl.mapped(lo, hi), &mut pts);
            lo = hi;
        }
        start = h;
    }
    let first_panel = if graded { 1 } else { 0 };
    for p in first_panel..panels {
        let a = if p == first_panel { start } else { p as f64 * h };
        push_gl(&gl.mapped(a, (p + 1) as f64 * h), &mut pts);
    }

    let omega_m1 = sphere_measure(dim - 1);
    let mut mu = vec![0.0; k_max + 1];
    let mut scale = 0.0;
    let mut r = vec![0.0; k_max + 1];
    for &(th, w, g) in &pts {
        let rho = w * g;
        scale += rho.abs();
        table.fill_normalized(th.cos(), &mut r);
        for (m, rk) in mu.iter_mut().zip(&r) {
            *m += rho * rk;
        }
    }
    mu.iter_mut().for_each(|v| *v *= omega_m1);
    Ok((mu, scale * omega_m1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{build_grid, sample_uniform, surface_area};
    use crate::zonal::{harmonic_dimension, zonal_harmonic};

    fn grid(dim: usize, n: usize) -> Arc<SphereGrid> {
        Arc::new(build_grid(dim, n).unwrap())
    }

    fn north(dim: usize) -> SpherePoint {
        SpherePoint::north(dim).unwrap()
    }

    #[test]
    fn constant_projections() {
        let g = grid(2, 8);
        let f = GridFunction::constant(g.clone(), 2.5).unwrap();
        let x = SpherePoint::from_unnormalized(vec![0.1, 0.2, 0.9]).unwrap();
        assert!((project_degree(&f, 0, &x).unwrap() - 2.5).abs() < 1e-12);
        for k in 1..=7 {
            assert!(project_degree(&f, k, &x).unwrap().abs() < 1e-9 * 2.5);
        }
        assert!(matches!(
            project_degree(&f, 8, &x),
            Err(Error::DegreeBudget { .. })
        ));
    }

    #[test]
    fn zonal_harmonic_reproduces() {
        let dim = 3;
        let g = grid(dim, 9);
        let m = 4;
        let table = ZonalTable::new(dim, m).unwrap();
        let e = north(dim);
        let f = GridFunction::from_fn(g.clone(), |x| {
            let mut z = vec![0.0; m + 1];
            table.fill(x[0], &mut z);
            z[m]
        })
        .unwrap();
        let zm1 = harmonic_dimension(dim, m).unwrap() as f64 / surface_area(dim).unwrap();
        assert!((project_degree(&f, m, &e).unwrap() - zm1).abs() < 1e-8);
        for k in 0..=8 {
            if k != m {
                assert!(project_degree(&f, k, &e).unwrap().abs() < 1e-8);
            }
        }
    }

    #[test]
    fn decomposition_of_zonal_sum() {
        let dim = 2;
        let g = grid(dim, 8);
        let e = SpherePoint::from_unnormalized(vec![0.3, -0.4, 0.5]).unwrap();
        let f = GridFunction::from_fn(g.clone(), |x| {
            let z = zonal_harmonic(2, 3, clamped_cos(x, e.coords())).unwrap();
            z.values[1] + z.values[3]
        })
        .unwrap();
        let dec = decompose(&f, 7).unwrap();
        let peak = dec.rows().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in [0, 2, 4, 5, 6, 7] {
            assert!(dec.row(k).iter().all(|v| v.abs() <= 1e-9 * peak), "row {k}");
        }
        assert!(dec.row(1).iter().any(|v| v.abs() > 1e-3));
        assert!(dec.row(3).iter().any(|v| v.abs() > 1e-3));
        // idempotence
        let again = decompose(&dec.reconstruct().unwrap(), 7).unwrap();
        let diff = (&again.rows - &dec.rows).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(diff < 1e-8 * peak.max(1.0));

        let zero = decompose(&GridFunction::constant(g, 0.0).unwrap(), 5).unwrap();
        assert!(zero.rows().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn batch_matches_single() {
        let g = grid(2, 6);
        let f1 = GridFunction::from_fn(g.clone(), |x| x[0] * x[1] + x[2]).unwrap();
        let f2 = GridFunction::from_fn(g.clone(), |x| (3.0 * x[0]).sin()).unwrap();
        let batch = decompose_batch(&[f1.clone(), f2.clone()], 5).unwrap();
        let s1 = decompose(&f1, 5).unwrap();
        let s2 = decompose(&f2, 5).unwrap();
        assert_eq!(batch[0].rows(), s1.rows());
        assert_eq!(batch[1].rows(), s2.rows());
    }

    #[test]
    fn bessel_for_non_band_limited() {
        let g = grid(2, 12);
        let f = GridFunction::from_fn(g.clone(), |x| (x[0] - 0.2).abs().sqrt()).unwrap();
        let dec = decompose(&f, 11).unwrap();
        let total: f64 = dec.degree_norms_sq().iter().sum();
        let norm = lp_norm(&f, 2.0).unwrap().powi(2);
        assert!(total <= norm * (1.0 + 1e-8));
    }

    #[test]
    fn norms() {
        let g = grid(2, 10);
        let one = GridFunction::constant(g.clone(), 1.0).unwrap();
        assert!((lp_norm(&one, 2.0).unwrap() - (4.0 * PI).sqrt()).abs() < 1e-12);
        assert!((lp_norm(&one, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
        let f = GridFunction::from_fn(g.clone(), |x| x[0] * x[0] - 0.3 * x[1]).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let a = lp_norm(&f, p).unwrap();
            let b = lp_norm(&f.scaled(-3.0), p).unwrap();
            assert!((b - 3.0 * a).abs() < 1e-12 * b);
        }
        let omega = surface_area(2).unwrap();
        assert!(lp_norm(&f, 1.0).unwrap() <= omega.sqrt() * lp_norm(&f, 2.0).unwrap());
        assert!(lp_norm(&f, 0.5).is_err());
    }

    fn zonal(dim: usize, shape: Arc<dyn Profile>) -> ZonalProfile {
        ZonalProfile::new(dim, north(dim), shape).unwrap()
    }

    #[test]
    fn funk_hecke_constant_and_linear() {
        let c = funk_hecke_coefficients(&zonal(2, Arc::new(ConstantProfile(1.0))), 6).unwrap();
        assert!((c.mu[0] - 4.0 * PI).abs() < 1e-12);
        for k in 1..=6 {
            assert!(c.mu[k].abs() < 1e-9);
        }
        let mu1 = funk_hecke_coefficient(&zonal(2, Arc::new(MonomialProfile(1))), 1).unwrap();
        assert!((mu1 - 4.0 * PI / 3.0).abs() < 1e-12);
        for dim in 3..=5 {
            let c = funk_hecke_coefficients(&zonal(dim, Arc::new(ConstantProfile(1.0))), 3).unwrap();
            assert!((c.mu[0] - surface_area(dim).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn gegenbauer_profile_is_an_eigenfunction() {
        for dim in [2, 3, 4] {
            let m = 5;
            let prof = zonal(dim, Arc::new(GegenbauerProfile::new(dim, m).unwrap()));
            let c = funk_hecke_coefficients(&prof, 12).unwrap();
            // μ_m = ω_N / a_m since the profile equals Z_m / Z_m(1)
            let expect = surface_area(dim).unwrap() / harmonic_dimension(dim, m).unwrap() as f64;
            for k in 0..=12 {
                if k == m {
                    assert!((c.mu[k] - expect).abs() < 1e-9 * expect);
                } else {
                    assert!(c.mu[k].abs() < 1e-9 * expect, "dim {dim} k {k}: {}", c.mu[k]);
                }
            }
        }
    }

    /// ∫_{-1}^{1} (1-t)^{-s} P_k(t) dt = I_k with I_0 = 2^{1-s}/(1-s) and
    /// I_k = I_{k-1} (k-1+s)/(k+1-s).
    fn legendre_singular_moments(s: f64, k_max: usize) -> Vec<f64> {
        let mut out = vec![2f64.powf(1.0 - s) / (1.0 - s)];
        for k in 1..=k_max {
            let kf = k as f64;
            let prev = out[k - 1];
            out.push(prev * (kf - 1.0 + s) / (kf + 1.0 - s));
        }
        out
    }

    #[test]
    fn singular_coefficients_match_closed_form() {
        for s in [0.3, 0.75, 0.95] {
            let prof = singular_profile(s, 0.0).unwrap().zonal(2, north(2)).unwrap();
            let c = funk_hecke_coefficients(&prof, 256).unwrap();
            let exact = legendre_singular_moments(s, 256);
            for k in 0..=256 {
                let e = 2.0 * PI * exact[k];
                assert!(
                    (c.mu[k] - e).abs() < 1e-10 * exact[0],
                    "s {s} k {k}: {} vs {}",
                    c.mu[k],
                    e
                );
            }
        }
    }

    #[test]
    fn closed_form_oracle_holds_for_polynomial_profiles() {
        // s = -1, -2 make the profile a polynomial; the recurrence must
        // reproduce the direct Legendre moments.
        let m1 = legendre_singular_moments(-1.0, 4);
        assert!((m1[0] - 2.0).abs() < 1e-15);
        assert!((m1[1] + 2.0 / 3.0).abs() < 1e-15);
        assert!(m1[2].abs() < 1e-15 && m1[3].abs() < 1e-15);
        let m2 = legendre_singular_moments(-2.0, 4);
        // (1-t)^2 = 1 - 2t + t^2 → P-moments 8/3, -4/3, 4/15, 0
        assert!((m2[0] - 8.0 / 3.0).abs() < 1e-14);
        assert!((m2[1] + 4.0 / 3.0).abs() < 1e-14);
        assert!((m2[2] - 4.0 / 15.0).abs() < 1e-14);
        assert!(m2[3].abs() < 1e-15);
    }

    #[test]
    fn funk_hecke_agrees_with_grid_projection() {
        for dim in [2, 3] {
            let pole = SpherePoint::from_unnormalized(if dim == 2 {
                vec![0.2, 0.7, -0.3]
            } else {
                vec![0.2, 0.7, -0.3, 0.4]
            })
            .unwrap();
            let shape: Arc<dyn Profile> = Arc::new(FnProfile::new("exp", |t: f64| (1.5 * t).exp()));
            let prof = ZonalProfile::new(dim, pole.clone(), shape).unwrap();
            let n = if dim == 2 { 30 } else { 16 };
            let g = grid(dim, n);
            let f = prof.sample(g.clone()).unwrap();
            let c = funk_hecke_coefficients(&prof, 6).unwrap();
            let x = sample_uniform(dim, 3, 5).unwrap();
            for xi in &x {
                let z = zonal_harmonic(dim, 6, xi.dot(&pole).unwrap()).unwrap();
                for k in 0..=6 {
                    let direct = project_degree(&f, k, xi).unwrap();
                    assert!((direct - c.mu[k] * z.values[k]).abs() < 1e-7, "dim {dim} k {k}");
                }
            }
        }
    }

    #[test]
    fn regularized_singular_profile_converges() {
        let prof = singular_profile(0.45, 1e-3).unwrap().zonal(2, north(2)).unwrap();
        let c = funk_hecke_coefficients(&prof, 128).unwrap();
        assert!(c.mu.iter().all(|v| v.is_finite()));
        let exact0 = 2.0 * PI * ((2.0f64 + 1e-3).powf(0.55) - 1e-3f64.powf(0.55)) / 0.55;
        assert!((c.mu[0] - exact0).abs() < 1e-10 * exact0);
    }

    #[test]
    fn singular_membership() {
        let p = singular_profile(0.4, 0.0).unwrap();
        assert!(p.in_lp(2, 2.0));
        assert!(p.in_lp(2, 2.49));
        assert!(!p.in_lp(2, 2.5));
        assert!(!p.in_lp(2, 2.6));
        let boundary = singular_profile(2.0 / (2.0 * 1.5), 0.0).unwrap();
        assert!(!boundary.in_lp(2, 1.5));
        assert!(singular_profile(0.4, 0.1).unwrap().in_lp(2, 100.0));
        assert!(singular_profile(0.0, 0.0).is_err());
        let bad = singular_profile(1.2, 0.0).unwrap().zonal(2, north(2)).unwrap();
        assert!(funk_hecke_coefficients(&bad, 4).is_err());
    }
}
