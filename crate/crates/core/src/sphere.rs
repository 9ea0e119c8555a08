//! Points, caps, surface measure and product quadrature grids on S^N.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_gegenbauer, integrate_adaptive};

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 6;

const UNIT_TOL: f64 = 1e-12;

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if (MIN_DIM..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

/// A unit vector in R^{N+1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Wraps `coords`, which must already have unit norm.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::UnsupportedDimension(0));
        }
        check_dim(coords.len() - 1)?;
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self { coords })
    }

    /// Normalizes `coords` onto the sphere.
    pub fn from_unnormalized(mut coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::UnsupportedDimension(0));
        }
        check_dim(coords.len() - 1)?;
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotUnit { norm });
        }
        coords.iter_mut().for_each(|c| *c /= norm);
        Ok(Self { coords })
    }

    /// The pole e_0 = (1, 0, ..., 0) of S^N.
    pub fn north(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let mut coords = vec![0.0; dim + 1];
        coords[0] = 1.0;
        Ok(Self { coords })
    }

    /// Point at polar angle `theta` from the north pole, in the (x_0, x_1) plane.
    pub fn at_polar_angle(dim: usize, theta: f64) -> Result<Self> {
        check_dim(dim)?;
        let mut coords = vec![0.0; dim + 1];
        coords[0] = theta.cos();
        coords[1] = theta.sin();
        Self::from_unnormalized(coords)
    }

    /// Sphere dimension N (the ambient space is R^{N+1}).
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dot(&self, other: &SpherePoint) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(dot(&self.coords, &other.coords))
    }

    pub fn antipode(&self) -> SpherePoint {
        antipode(self)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine of the angle between two unit vectors, clamped to [-1, 1].
#[inline]
pub(crate) fn clamped_cos(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).clamp(-1.0, 1.0)
}

/// Geodesic distance γ(x, y) in radians.
pub fn spherical_distance(x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
    Ok(x.dot(y)?.clamp(-1.0, 1.0).acos())
}

/// The antipodal point -x.
pub fn antipode(x: &SpherePoint) -> SpherePoint {
    SpherePoint {
        coords: x.coords.iter().map(|c| -c).collect(),
    }
}

/// Surface measure of S^d for any d >= 0 via ω_d = 2π ω_{d-2} / (d - 1).
pub(crate) fn sphere_measure(d: usize) -> f64 {
    match d {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI * sphere_measure(d - 2) / (d as f64 - 1.0),
    }
}

/// ω_N = 2π^{(N+1)/2} / Γ((N+1)/2).
pub fn surface_area(dim: usize) -> Result<f64> {
    check_dim(dim)?;
    Ok(sphere_measure(dim))
}

/// Measure of a geodesic ball of radius `r`,
/// ω_{N-1} ∫_0^r sin^{N-1}θ dθ.
pub fn cap_measure(dim: usize, r: f64) -> Result<f64> {
    check_dim(dim)?;
    if !(r > 0.0 && r <= PI) {
        return Err(Error::OutOfRange {
            name: "cap radius",
            value: r,
            expected: "0 < r <= pi",
        });
    }
    let m = (dim - 1) as i32;
    let total = sphere_measure(dim);
    let integral = integrate_adaptive(|t: f64| t.sin().powi(m), 0.0, r, 1e-15 * total)?;
    Ok(sphere_measure(dim - 1) * integral)
}

/// Geodesic ball B(x, r) = { y : γ(x, y) < r }.
#[derive(Debug, Clone, PartialEq)]
pub struct Cap {
    center: SpherePoint,
    radius: f64,
}

impl Cap {
    pub fn new(center: SpherePoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= PI) {
            return Err(Error::OutOfRange {
                name: "cap radius",
                value: radius,
                expected: "0 < r <= pi",
            });
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &SpherePoint {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, y: &SpherePoint) -> Result<bool> {
        Ok(spherical_distance(&self.center, y)? < self.radius)
    }

    pub fn measure(&self) -> Result<f64> {
        cap_measure(self.center.dim(), self.radius)
    }
}

/// Tensor-product quadrature grid on S^N.
///
/// Polar axis j (1-based) carries the Gauss rule for (1 - t^2)^{(N-j-1)/2}
/// in t = cos θ_j, so the sin^{N-j} Jacobian factor is integrated exactly.
/// The azimuth is the uniform trapezoid rule with 2·n_polar points. The
/// grid integrates every polynomial of degree <= 2·n_polar - 1 exactly.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    dim: usize,
    n_polar: usize,
    n_azimuth: usize,
    coords: Array2<f64>,
    weights: Vec<f64>,
}

impl SphereGrid {
    pub fn new(dim: usize, n_polar: usize) -> Result<Self> {
        build_grid(dim, n_polar)
    }

    /// Smallest grid whose exactness degree is at least 2K+1.
    pub fn for_degree(dim: usize, degree_max: usize) -> Result<Self> {
        build_grid(dim, degree_max + 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn n_polar(&self) -> usize {
        self.n_polar
    }

    pub fn n_azimuth(&self) -> usize {
        self.n_azimuth
    }

    /// Per-axis node counts: N-1 polar axes then the azimuth.
    pub fn axis_counts(&self) -> Vec<usize> {
        let mut counts = vec![self.n_polar; self.dim - 1];
        counts.push(self.n_azimuth);
        counts
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coords(&self, i: usize) -> &[f64] {
        self.coords.row(i).to_slice().expect("standard layout")
    }

    pub fn coords_matrix(&self) -> &Array2<f64> {
        &self.coords
    }

    pub fn point(&self, i: usize) -> SpherePoint {
        SpherePoint {
            coords: self.coords(i).to_vec(),
        }
    }

    pub fn points(&self) -> Vec<SpherePoint> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exactness_degree(&self) -> usize {
        (2 * self.n_polar - 1).min(self.n_azimuth - 1)
    }

    /// Largest degree k for which a projection of a function of degree <= k
    /// is computed exactly.
    pub fn degree_budget(&self) -> usize {
        self.exactness_degree() / 2
    }

    /// Nominal node spacing in radians.
    pub fn spacing(&self) -> f64 {
        PI / self.n_polar as f64
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Writes the grid as text: `#` header lines, then one node per line
    /// with N+1 coordinates followed by the weight.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# sphere-grid dim={} n_polar={} n_azimuth={} nodes={}",
            self.dim,
            self.n_polar,
            self.n_azimuth,
            self.len()
        )?;
        for i in 0..self.len() {
            let mut line = String::new();
            for c in self.coords(i) {
                line.push_str(&format!("{c:.16e} "));
            }
            line.push_str(&format!("{:.16e}", self.weights[i]));
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut header: Option<(usize, usize, usize, usize)> = None;
        let mut flat = Vec::new();
        let mut weights = Vec::new();
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if rest.trim_start().starts_with("sphere-grid") {
                    header = Some(parse_grid_header(rest)?);
                }
                continue;
            }
            let (dim, ..) = header.ok_or_else(|| Error::Parse("missing grid header".into()))?;
            let fields: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}"))))
                .collect::<Result<_>>()?;
            if fields.len() != dim + 2 {
                return Err(Error::Parse(format!(
                    "expected {} fields per node, got {}",
                    dim + 2,
                    fields.len()
                )));
            }
            flat.extend_from_slice(&fields[..=dim]);
            weights.push(fields[dim + 1]);
        }
        let (dim, n_polar, n_azimuth, nodes) =
            header.ok_or_else(|| Error::Parse("missing grid header".into()))?;
        if weights.len() != nodes {
            return Err(Error::LengthMismatch {
                values: weights.len(),
                nodes,
            });
        }
        let coords = Array2::from_shape_vec((nodes, dim + 1), flat)
            .map_err(|e| Error::Parse(e.to_string()))?;
        Ok(Self {
            dim,
            n_polar,
            n_azimuth,
            coords,
            weights,
        })
    }
}

fn parse_grid_header(rest: &str) -> Result<(usize, usize, usize, usize)> {
    let mut vals = [None; 4];
    for tok in rest.split_whitespace().skip(1) {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header token {tok}")))?;
        let v: usize = v.parse().map_err(|_| Error::Parse(format!("bad header value {tok}")))?;
        let slot = match k {
            "dim" => 0,
            "n_polar" => 1,
            "n_azimuth" => 2,
            "nodes" => 3,
            _ => continue,
        };
        vals[slot] = Some(v);
    }
    match vals {
        [Some(a), Some(b), Some(c), Some(d)] => {
            check_dim(a)?;
            Ok((a, b, c, d))
        }
        _ => Err(Error::Parse("incomplete grid header".into())),
    }
}

/// Product grid with `n_polar` Gauss nodes per polar axis and 2·n_polar
/// azimuthal nodes.
pub fn build_grid(dim: usize, n_polar: usize) -> Result<SphereGrid> {
    check_dim(dim)?;
    if n_polar < 2 {
        return Err(Error::OutOfRange {
            name: "n_polar",
            value: n_polar as f64,
            expected: ">= 2",
        });
    }
    let n_azimuth = 2 * n_polar;
    let axes = (1..dim)
        .map(|j| gauss_gegenbauer(n_polar, (dim - j - 1) as f64 / 2.0))
        .collect::<Result<Vec<_>>>()?;
    let total = n_polar.pow(dim as u32 - 1) * n_azimuth;
    let mut flat = Vec::with_capacity(total * (dim + 1));
    let mut weights = Vec::with_capacity(total);
    let dphi = 2.0 * PI / n_azimuth as f64;

    let mut idx = vec![0usize; dim - 1];
    loop {
        let mut prefix = Vec::with_capacity(dim + 1);
        let mut sin_prod = 1.0;
        let mut w_polar = 1.0;
        for (axis, &i) in axes.iter().zip(&idx) {
            let t = axis.nodes[i];
            prefix.push(sin_prod * t);
            sin_prod *= (1.0 - t * t).max(0.0).sqrt();
            w_polar *= axis.weights[i];
        }
        for l in 0..n_azimuth {
            let phi = dphi * l as f64;
            flat.extend_from_slice(&prefix);
            flat.push(sin_prod * phi.cos());
            flat.push(sin_prod * phi.sin());
            weights.push(w_polar * dphi);
        }
        // odometer over the polar axes, last axis fastest
        let mut axis = dim - 1;
        loop {
            if axis == 0 {
                let coords = Array2::from_shape_vec((total, dim + 1), flat)
                    .map_err(|e| Error::Parse(e.to_string()))?;
                return Ok(SphereGrid {
                    dim,
                    n_polar,
                    n_azimuth,
                    coords,
                    weights,
                });
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < n_polar {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// `count` i.i.d. uniform points on S^N (normalized Gaussian vectors).
pub fn sample_uniform(dim: usize, count: usize, seed: u64) -> Result<Vec<SpherePoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_uniform_with(dim, count, &mut rng)
}

pub fn sample_uniform_with<R: rand::Rng + ?Sized>(
    dim: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<SpherePoint>> {
    check_dim(dim)?;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..=dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-8 {
            out.push(SpherePoint::from_unnormalized(v)?);
        }
    }
    Ok(out)
}
