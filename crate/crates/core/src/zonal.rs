//! Degree-indexed spectral data on S^N: harmonic dimensions, Laplace
//! eigenvalues, Gegenbauer polynomials, zonal harmonics, Riesz weights and
//! the Riesz kernel.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::sphere::{check_dim, sphere_measure};

/// Largest expansion degree supported anywhere in the crate.
pub const MAX_DEGREE: usize = 512;

pub(crate) fn check_degree(k: usize) -> Result<()> {
    if k > MAX_DEGREE {
        Err(Error::DegreeTooLarge {
            degree: k,
            max: MAX_DEGREE,
        })
    } else {
        Ok(())
    }
}

fn binomial(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or(Error::Overflow("binomial coefficient"))?
            / (i as u128 + 1);
    }
    Ok(acc)
}

/// dim H_k = C(N+k, N) - C(N+k-2, N), which is N+1 at k = 1.
pub fn harmonic_dimension(dim: usize, k: usize) -> Result<u64> {
    check_dim(dim)?;
    check_degree(k)?;
    if k == 0 {
        return Ok(1);
    }
    let n = dim as u64;
    let k = k as u64;
    let hi = binomial(n + k, n)?;
    let lo = binomial(n + k - 2, n)?;
    u64::try_from(hi - lo).map_err(|_| Error::Overflow("harmonic dimension"))
}

/// λ_k = k(k + N - 1).
pub fn eigenvalue(dim: usize, k: usize) -> f64 {
    (k * (k + dim - 1)) as f64
}

/// Dimensions and eigenvalues for degrees 0..=k_max.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegreeTable {
    pub dim: usize,
    pub k_max: usize,
    pub a: Vec<u64>,
    pub lambda: Vec<f64>,
}

impl DegreeTable {
    pub fn new(dim: usize, k_max: usize) -> Result<Self> {
        check_dim(dim)?;
        check_degree(k_max)?;
        let a = (0..=k_max)
            .map(|k| harmonic_dimension(dim, k))
            .collect::<Result<_>>()?;
        let lambda = (0..=k_max).map(|k| eigenvalue(dim, k)).collect();
        Ok(Self {
            dim,
            k_max,
            a,
            lambda,
        })
    }
}

/// C_0^λ(t), ..., C_K^λ(t) by the three-term recurrence.
pub fn gegenbauer_eval(lambda: f64, k_max: usize, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; k_max + 1];
    out[0] = 1.0;
    if k_max >= 1 {
        out[1] = 2.0 * lambda * t;
    }
    for k in 2..=k_max {
        let kf = k as f64;
        out[k] = (2.0 * (kf + lambda - 1.0) * t * out[k - 1] - (kf + 2.0 * lambda - 2.0) * out[k - 2])
            / kf;
    }
    out
}

/// Precomputed recurrence for the zonal harmonics Z_0..Z_K on S^N,
/// Z_k(t) = (a_k / ω_N) C_k^{(N-1)/2}(t) / C_k^{(N-1)/2}(1).
#[derive(Debug, Clone)]
pub struct ZonalTable {
    dim: usize,
    k_max: usize,
    /// a_k / (ω_N C_k(1))
    scale: Vec<f64>,
    /// C_{k+1} = rec_a[k] t C_k + rec_b[k] C_{k-1}
    rec_a: Vec<f64>,
    rec_b: Vec<f64>,
    /// 1 / C_k(1)
    inv_at_one: Vec<f64>,
    /// a_k / ω_N
    at_one: Vec<f64>,
}

impl ZonalTable {
    pub fn new(dim: usize, k_max: usize) -> Result<Self> {
        check_dim(dim)?;
        check_degree(k_max)?;
        let lam = (dim as f64 - 1.0) / 2.0;
        let omega = sphere_measure(dim);
        let mut scale = Vec::with_capacity(k_max + 1);
        let mut inv_at_one = Vec::with_capacity(k_max + 1);
        let mut at_one = Vec::with_capacity(k_max + 1);
        let mut c1 = 1.0;
        for k in 0..=k_max {
            if k > 0 {
                let kf = k as f64;
                c1 *= (kf + 2.0 * lam - 1.0) / kf;
            }
            let a = harmonic_dimension(dim, k)? as f64;
            scale.push(a / (omega * c1));
            inv_at_one.push(1.0 / c1);
            at_one.push(a / omega);
        }
        let rec_a = (0..=k_max + 1)
            .map(|k| 2.0 * (k as f64 + lam) / (k as f64 + 1.0))
            .collect();
        let rec_b = (0..=k_max + 1)
            .map(|k| -(k as f64 + 2.0 * lam - 1.0) / (k as f64 + 1.0))
            .collect();
        Ok(Self {
            dim,
            k_max,
            scale,
            rec_a,
            rec_b,
            inv_at_one,
            at_one,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Z_k(1) = a_k / ω_N.
    pub fn at_one(&self, k: usize) -> f64 {
        self.at_one[k]
    }

    /// Fills `out[k] = C_k(t)` for k < out.len().
    #[inline]
    pub(crate) fn fill_gegenbauer(&self, t: f64, out: &mut [f64]) {
        let n = out.len();
        if n == 0 {
            return;
        }
        out[0] = 1.0;
        if n > 1 {
            out[1] = self.rec_a[0] * t;
        }
        for k in 2..n {
            out[k] = self.rec_a[k - 1] * t * out[k - 1] + self.rec_b[k - 1] * out[k - 2];
        }
    }

    /// Fills `out[k] = Z_k(t)` for k < out.len() (at most k_max + 1).
    #[inline]
    pub fn fill(&self, t: f64, out: &mut [f64]) {
        self.fill_gegenbauer(t, out);
        for (v, s) in out.iter_mut().zip(&self.scale) {
            *v *= s;
        }
    }

    /// Fills `out[k] = C_k(t) / C_k(1)`.
    #[inline]
    pub fn fill_normalized(&self, t: f64, out: &mut [f64]) {
        self.fill_gegenbauer(t, out);
        for (v, s) in out.iter_mut().zip(&self.inv_at_one) {
            *v *= s;
        }
    }

    /// Σ_k coeffs[k] Z_k(t) by Clenshaw's backward recurrence.
    pub fn clenshaw(&self, coeffs: &[f64], t: f64) -> f64 {
        let n = coeffs.len();
        if n == 0 {
            return 0.0;
        }
        // b_k multiplies C_k
        let b = |k: usize| coeffs[k] * self.scale[k];
        if n == 1 {
            return b(0);
        }
        let mut y1 = 0.0; // y_{k+1}
        let mut y2 = 0.0; // y_{k+2}
        for k in (1..n).rev() {
            let y = b(k) + self.rec_a[k] * t * y1 + self.rec_b[k + 1] * y2;
            y2 = y1;
            y1 = y;
        }
        b(0) + self.rec_a[0] * t * y1 + self.rec_b[1] * y2
    }
}

/// Per-degree zonal harmonic values at one t.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZonalKernelValue {
    pub t: f64,
    pub values: Vec<f64>,
}

pub fn zonal_harmonic(dim: usize, k_max: usize, t: f64) -> Result<ZonalKernelValue> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            expected: "-1 <= t <= 1",
        });
    }
    let table = ZonalTable::new(dim, k_max)?;
    let mut values = vec![0.0; k_max + 1];
    table.fill(t, &mut values);
    Ok(ZonalKernelValue { t, values })
}

/// The multipliers (1 - λ_k/λ_n)^α for k = 0..=n.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RieszWeights {
    pub dim: usize,
    pub n: usize,
    pub alpha: f64,
    pub w: Vec<f64>,
}

/// 1 - λ_k/λ_n, factored to avoid cancellation.
#[inline]
pub(crate) fn riesz_base(dim: usize, n: usize, k: usize) -> f64 {
    let m = (dim - 1) as f64;
    let (nf, kf) = (n as f64, k as f64);
    (nf - kf) * (nf + kf + m) / (nf * (nf + m))
}

pub fn riesz_weights(dim: usize, n: usize, alpha: f64) -> Result<RieszWeights> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            expected: "alpha >= 0",
        });
    }
    if n == 0 {
        return Err(Error::OutOfRange {
            name: "n",
            value: 0.0,
            expected: "n >= 1",
        });
    }
    check_dim(dim)?;
    check_degree(n)?;
    Ok(RieszWeights {
        dim,
        n,
        alpha,
        w: order_weights(dim, n, alpha),
    })
}

/// Riesz multipliers for any order α > -1/2 and any n >= 0.
///
/// n = 0 gives [1]. The top term k = n is 1 for α = 0 and 0 otherwise
/// (for α < 0 it is dropped, matching the strict cut λ_k < λ_n).
pub fn order_weights(dim: usize, n: usize, alpha: f64) -> Vec<f64> {
    if n == 0 {
        return vec![1.0];
    }
    let mut w: Vec<f64> = (0..n)
        .map(|k| {
            if alpha == 0.0 {
                1.0
            } else {
                riesz_base(dim, n, k).powf(alpha)
            }
        })
        .collect();
    w.push(if alpha == 0.0 { 1.0 } else { 0.0 });
    w
}

/// n · Σ_{k<n} |w_k - w_{k+1}|² for the order-β weights.
pub fn weight_difference_sum(dim: usize, n: usize, beta: f64) -> f64 {
    let w = order_weights(dim, n, beta);
    n as f64 * w.windows(2).map(|p| (p[0] - p[1]).powi(2)).sum::<f64>()
}

/// Θ^α(t, n) = Σ_{k<=n} w_k Z_k(t).
pub fn riesz_kernel(dim: usize, n: usize, alpha: f64, t: f64) -> Result<f64> {
    Ok(RieszKernel::new(dim, n, alpha)?.eval(t))
}

/// Θ^α(·, n) prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub struct RieszKernel {
    table: ZonalTable,
    weights: Vec<f64>,
}

impl RieszKernel {
    pub fn new(dim: usize, n: usize, alpha: f64) -> Result<Self> {
        let weights = if n == 0 {
            vec![1.0]
        } else {
            riesz_weights(dim, n, alpha)?.w
        };
        Ok(Self {
            table: ZonalTable::new(dim, n)?,
            weights,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.table.clenshaw(&self.weights, t.clamp(-1.0, 1.0))
    }
}

/// B(x, y) = Γ(x)Γ(y)/Γ(x+y), through log-gamma.
pub fn beta_function(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::OutOfRange {
            name: "x",
            value: x,
            expected: "x > 0",
        });
    }
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::OutOfRange {
            name: "y",
            value: y,
            expected: "y > 0",
        });
    }
    Ok((ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y)).exp())
}
