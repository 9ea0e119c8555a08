//! Test functions whose degree decomposition is known in closed form.
//!
//! Band-limited functions are stored as finite sums of zonal harmonics
//! Σ_k c_k Z_k(⟨x, center⟩); each such sum lies in ⊕_k H_k with the k-th
//! piece equal to the projection Y_k. Zonal profiles contribute their
//! Funk–Hecke coefficients μ_k Z_k(⟨x, pole⟩). Either way the rows of a
//! [`DegreeDecomposition`] can be filled without quadrature, at any degree.

use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{check_dim, clamped_cos, sample_uniform_with, sphere_measure, SphereGrid, SpherePoint};
use crate::transform::{
    funk_hecke_coefficients, singular_profile, DegreeDecomposition, GridFunction, ZonalCoefficients,
    ZonalProfile,
};
use crate::zonal::ZonalTable;

/// Regularization used when a singular profile is sampled on a grid.
pub const GRID_SINGULAR_EPS: f64 = 1e-3;

/// Σ_k coeffs[k] Z_k(⟨·, center⟩).
#[derive(Debug, Clone)]
pub struct ZonalSeries {
    pub center: SpherePoint,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ProfileTerm {
    pub amplitude: f64,
    pub profile: ZonalProfile,
    pub coefficients: ZonalCoefficients,
}

#[derive(Debug, Clone)]
pub struct TestFunction {
    dim: usize,
    series: Vec<ZonalSeries>,
    profiles: Vec<ProfileTerm>,
    label: String,
}

impl TestFunction {
    pub fn from_series(dim: usize, series: Vec<ZonalSeries>, label: &str) -> Result<Self> {
        check_dim(dim)?;
        for s in &series {
            if s.center.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: s.center.dim(),
                    right: dim,
                });
            }
        }
        Ok(Self {
            dim,
            series,
            profiles: Vec::new(),
            label: label.to_string(),
        })
    }

    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        let series = ZonalSeries {
            center: SpherePoint::north(dim)?,
            coeffs: vec![c * sphere_measure(dim)],
        };
        Self::from_series(dim, vec![series], "constant")
    }

    /// The eigenfunction Z_k(⟨·, center⟩) of degree k.
    pub fn zonal_harmonic(dim: usize, k: usize, center: SpherePoint) -> Result<Self> {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = 1.0;
        Self::from_series(dim, vec![ZonalSeries { center, coeffs }], "harmonic")
    }

    /// A zonal profile, with Funk–Hecke coefficients up to `k_max`.
    pub fn from_profile(profile: ZonalProfile, amplitude: f64, k_max: usize) -> Result<Self> {
        let dim = profile.dim();
        let label = profile.shape().label();
        let mut f = Self::from_series(dim, Vec::new(), &label)?;
        f.add_profile(profile, amplitude, k_max)?;
        Ok(f)
    }

    pub fn add_profile(&mut self, profile: ZonalProfile, amplitude: f64, k_max: usize) -> Result<()> {
        if profile.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: profile.dim(),
                right: self.dim,
            });
        }
        let coefficients = funk_hecke_coefficients(&profile, k_max)?;
        self.profiles.push(ProfileTerm {
            amplitude,
            profile,
            coefficients,
        });
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn series(&self) -> &[ZonalSeries] {
        &self.series
    }

    pub fn profiles(&self) -> &[ProfileTerm] {
        &self.profiles
    }

    /// Highest degree present, when the function is band-limited.
    pub fn band_limit(&self) -> Option<usize> {
        if !self.profiles.is_empty() {
            return None;
        }
        Some(self.series.iter().map(|s| s.coeffs.len().saturating_sub(1)).max().unwrap_or(0))
    }

    fn series_k_max(&self) -> usize {
        self.series.iter().map(|s| s.coeffs.len()).max().unwrap_or(1).max(1) - 1
    }

    pub fn eval_coords(&self, x: &[f64]) -> f64 {
        let km = self.series_k_max();
        let table = ZonalTable::new(self.dim, km).expect("validated degree");
        let mut v = 0.0;
        for s in &self.series {
            v += table.clenshaw(&s.coeffs, clamped_cos(x, s.center.coords()));
        }
        for p in &self.profiles {
            v += p.amplitude * p.profile.eval_coords(x);
        }
        v
    }

    pub fn eval(&self, x: &SpherePoint) -> f64 {
        self.eval_coords(x.coords())
    }

    pub fn sample(&self, grid: Arc<SphereGrid>) -> Result<GridFunction> {
        let km = self.series_k_max();
        let table = ZonalTable::new(self.dim, km)?;
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let x = grid.coords(i);
                let mut v = 0.0;
                for s in &self.series {
                    v += table.clenshaw(&s.coeffs, clamped_cos(x, s.center.coords()));
                }
                for p in &self.profiles {
                    v += p.amplitude * p.profile.eval_coords(x);
                }
                v
            })
            .collect();
        GridFunction::new(grid, values)
    }

    /// Exact projections Y_0..Y_K at the grid nodes.
    pub fn decomposition(&self, grid: Arc<SphereGrid>, k_max: usize) -> Result<DegreeDecomposition> {
        if grid.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: grid.dim(),
                right: self.dim,
            });
        }
        let points: Vec<&[f64]> = (0..grid.len()).map(|i| grid.coords(i)).collect();
        let rows = self.degree_values(&points, k_max)?;
        DegreeDecomposition::from_rows(grid, rows)
    }

    /// Y_k(f, x) for k = 0..=K (rows) at arbitrary points (columns).
    pub fn degree_values(&self, points: &[&[f64]], k_max: usize) -> Result<Array2<f64>> {
        for p in &self.profiles {
            if p.coefficients.k_max < k_max {
                return Err(Error::DegreeTooLarge {
                    degree: k_max,
                    max: p.coefficients.k_max,
                });
            }
        }
        if let Some(x) = points.iter().find(|x| x.len() != self.dim + 1) {
            return Err(Error::DimensionMismatch {
                left: x.len() - 1,
                right: self.dim,
            });
        }
        let table = ZonalTable::new(self.dim, k_max)?;
        let kk = k_max + 1;
        let cols: Vec<Vec<f64>> = points
            .par_iter()
            .map_init(
                || vec![0.0; kk],
                |z, x| {
                    let mut col = vec![0.0; kk];
                    for s in &self.series {
                        let len = s.coeffs.len().min(kk);
                        table.fill(clamped_cos(x, s.center.coords()), &mut z[..len]);
                        for k in 0..len {
                            col[k] += s.coeffs[k] * z[k];
                        }
                    }
                    for p in &self.profiles {
                        table.fill(clamped_cos(x, p.profile.pole().coords()), z);
                        for k in 0..kk {
                            col[k] += p.amplitude * p.coefficients.mu[k] * z[k];
                        }
                    }
                    col
                },
            )
            .collect();
        let mut rows = Array2::<f64>::zeros((kk, points.len()));
        for (i, col) in cols.iter().enumerate() {
            for k in 0..kk {
                rows[(k, i)] = col[k];
            }
        }
        Ok(rows)
    }

    /// ‖Y_k‖²_{L²} for k = 0..=K from the reproducing property
    /// ∫ Z_k(⟨x, a⟩) Z_k(⟨x, b⟩) dσ(x) = Z_k(⟨a, b⟩).
    pub fn degree_norms_sq(&self, k_max: usize) -> Result<Vec<f64>> {
        let mut terms: Vec<(&[f64], Vec<f64>)> = self
            .series
            .iter()
            .map(|s| (s.center.coords(), s.coeffs.clone()))
            .collect();
        for p in &self.profiles {
            let len = (k_max + 1).min(p.coefficients.mu.len());
            terms.push((
                p.profile.pole().coords(),
                p.coefficients.mu[..len].iter().map(|m| p.amplitude * m).collect(),
            ));
        }
        let table = ZonalTable::new(self.dim, k_max)?;
        let mut out = vec![0.0; k_max + 1];
        let mut z = vec![0.0; k_max + 1];
        for (a, ca) in &terms {
            for (b, cb) in &terms {
                table.fill(clamped_cos(a, b), &mut z);
                let len = ca.len().min(cb.len()).min(k_max + 1);
                for k in 0..len {
                    out[k] += ca[k] * cb[k] * z[k];
                }
            }
        }
        Ok(out)
    }
}

/// Random band-limited function of degree <= `degree_max`: for each degree
/// the component is a sum of `centers` zonal harmonics with i.i.d. normal
/// coefficients, scaled so its expected L² norm is (1 + k)^{-1}.
pub fn random_band_limited<R: Rng + ?Sized>(
    dim: usize,
    degree_max: usize,
    centers: usize,
    rng: &mut R,
) -> Result<TestFunction> {
    let table = ZonalTable::new(dim, degree_max)?;
    let pts = sample_uniform_with(dim, centers.max(1), rng)?;
    let series = pts
        .into_iter()
        .map(|center| {
            let coeffs = (0..=degree_max)
                .map(|k| {
                    let z: f64 = StandardNormal.sample(rng);
                    z / ((1.0 + k as f64) * (centers.max(1) as f64 * table.at_one(k)).sqrt())
                })
                .collect();
            ZonalSeries { center, coeffs }
        })
        .collect();
    TestFunction::from_series(dim, series, "bandlimited")
}

pub const DEFAULT_CENTERS: usize = 4;

/// Random test-function families used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// [`random_band_limited`] functions.
    BandLimited,
    /// A single singular zonal profile (1 - t + eps)^{-s} at a random pole,
    /// with s drawn so the function stays in L_p.
    Singular,
    /// Band-limited plus a singular profile.
    Mixed,
}

impl Family {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bandlimited" | "band-limited" | "band_limited" => Ok(Self::BandLimited),
            "singular" => Ok(Self::Singular),
            "mixed" => Ok(Self::Mixed),
            other => Err(Error::Config(format!("unknown family '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::BandLimited => "bandlimited",
            Self::Singular => "singular",
            Self::Mixed => "mixed",
        }
    }

    /// Draws one member. `degree_max` bounds the band-limited part and
    /// `k_max` the degrees for which profile coefficients are prepared;
    /// singular exponents are kept inside L_p.
    pub fn draw<R: Rng + ?Sized>(
        &self,
        dim: usize,
        degree_max: usize,
        k_max: usize,
        p: f64,
        rng: &mut R,
    ) -> Result<TestFunction> {
        match self {
            Self::BandLimited => random_band_limited(dim, degree_max, DEFAULT_CENTERS, rng),
            Self::Singular => {
                let profile = random_singular(dim, p, rng)?;
                let amp = 1.0;
                TestFunction::from_profile(profile, amp, k_max)
            }
            Self::Mixed => {
                let mut f = random_band_limited(dim, degree_max, DEFAULT_CENTERS, rng)?;
                let profile = random_singular(dim, p, rng)?;
                let z: f64 = StandardNormal.sample(rng);
                f.add_profile(profile, z, k_max)?;
                f.label = "mixed".to_string();
                Ok(f)
            }
        }
    }
}

fn random_singular<R: Rng + ?Sized>(dim: usize, p: f64, rng: &mut R) -> Result<ZonalProfile> {
    let s_max = dim as f64 / (2.0 * p);
    let s = rng.random_range(0.2..0.9) * s_max;
    let pole = sample_uniform_with(dim, 1, rng)?.remove(0);
    singular_profile(s, GRID_SINGULAR_EPS)?.zonal(dim, pole)
}
