//! One-dimensional quadrature rules.
//!
//! Gauss–Jacobi rules come from the Golub–Welsch eigenvalue problem, then
//! get one round of Newton polishing on the orthonormal recurrence and
//! Christoffel-number weights. The adaptive integrator is a plain
//! Gauss–Kronrod 7/15 bisection scheme.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::zonal::beta_function;

/// Nodes and weights of an interval rule, nodes ascending.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Affine map from [-1, 1] onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Rule {
            nodes: self.nodes.iter().map(|x| mid + half * x).collect(),
            weights: self.weights.iter().map(|w| half * w).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Recurrence coefficients (a_k, b_k) of the monic Jacobi polynomials for
/// the weight (1-x)^alpha (1+x)^beta.
fn jacobi_recurrence(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let ab = alpha + beta;
    let mut a = Vec::with_capacity(n);
    let mut b = vec![0.0; n + 1];
    for k in 0..n {
        let kf = k as f64;
        if k == 0 {
            a.push((beta - alpha) / (ab + 2.0));
        } else {
            let s = 2.0 * kf + ab;
            a.push((beta * beta - alpha * alpha) / (s * (s + 2.0)));
        }
    }
    for (k, slot) in b.iter_mut().enumerate().skip(1) {
        let kf = k as f64;
        *slot = if k == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            let s = 2.0 * kf + ab;
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
    }
    (a, b)
}

/// Gauss–Jacobi rule on [-1, 1] for the weight (1-x)^alpha (1+x)^beta.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<Rule> {
    if n == 0 {
        return Err(Error::OutOfRange {
            name: "n",
            value: 0.0,
            expected: "at least one node",
        });
    }
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(Error::OutOfRange {
            name: "jacobi exponent",
            value: alpha.min(beta),
            expected: "> -1",
        });
    }
    let (a, b) = jacobi_recurrence(n, alpha, beta);
    let mu0 = 2f64.powf(alpha + beta + 1.0) * beta_function(alpha + 1.0, beta + 1.0)?;

    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jm[(k, k)] = a[k];
        if k + 1 < n {
            let off = b[k + 1].sqrt();
            jm[(k, k + 1)] = off;
            jm[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(jm);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let sqrt_b: Vec<f64> = b.iter().map(|v| v.sqrt()).collect();
    let q0 = 1.0 / mu0.sqrt();
    let mut weights = Vec::with_capacity(n);
    for t in nodes.iter_mut() {
        for _ in 0..2 {
            let (qn, dqn, _) = orthonormal_eval(*t, n, &a, &sqrt_b, q0);
            if dqn != 0.0 {
                let step = qn / dqn;
                if step.is_finite() && step.abs() < 1e-3 {
                    *t -= step;
                }
            }
        }
        let (_, _, sumsq) = orthonormal_eval(*t, n, &a, &sqrt_b, q0);
        weights.push(1.0 / sumsq);
    }
    Ok(Rule { nodes, weights })
}

/// Returns (q_n(t), q_n'(t), sum_{k<n} q_k(t)^2) for the orthonormal family.
fn orthonormal_eval(t: f64, n: usize, a: &[f64], sqrt_b: &[f64], q0: f64) -> (f64, f64, f64) {
    let mut q_prev = 0.0;
    let mut dq_prev = 0.0;
    let mut q = q0;
    let mut dq = 0.0;
    let mut sumsq = 0.0;
    for k in 0..n {
        sumsq += q * q;
        let next = ((t - a[k]) * q - sqrt_b[k] * q_prev) / sqrt_b[k + 1];
        let dnext = (q + (t - a[k]) * dq - sqrt_b[k] * dq_prev) / sqrt_b[k + 1];
        q_prev = q;
        dq_prev = dq;
        q = next;
        dq = dnext;
    }
    (q, dq, sumsq)
}

/// Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Result<Rule> {
    gauss_jacobi(n, 0.0, 0.0)
}

/// Gauss rule for the symmetric weight (1 - t^2)^exponent on [-1, 1].
pub fn gauss_gegenbauer(n: usize, exponent: f64) -> Result<Rule> {
    gauss_jacobi(n, exponent, exponent)
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * GK_WK[7];
    let mut gauss = fc * GK_WG[3];
    for i in 0..7 {
        let dx = h * GK_X[i];
        let s = f(c - dx) + f(c + dx);
        kron += GK_WK[i] * s;
        if i % 2 == 1 {
            gauss += GK_WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over [a, b] to absolute
/// tolerance `tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = gk15(&f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= tol {
            return Ok(total);
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureStalled {
                achieved: err,
                target: tol,
            });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}
