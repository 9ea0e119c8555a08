//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances are fixed here, not read from the library.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use riesz_sphere::experiment::{
    audit_report, critical_lines, minimal_converging, operator_norm_estimate, threshold_map,
    trial_function, ExperimentConfig, NormOperator, NormSetup,
};
use riesz_sphere::family::{random_band_limited, Family};
use riesz_sphere::sphere::{sample_uniform, SphereGrid};
use riesz_sphere::summability::{
    averaged_from_series, riesz_mean, riesz_mean_kernel, square_from_series,
    RieszMeanSeries,
};
use riesz_sphere::transform::{decompose_batch, lp_norm, GridFunction};
use riesz_sphere::zonal::{beta_function, riesz_kernel, ZonalTable};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Legendre P_0..P_K(t) by Bonnet's recurrence.
fn legendre(k_max: usize, t: f64) -> Vec<f64> {
    let mut p = vec![1.0, t];
    for k in 1..k_max {
        let kf = k as f64;
        p.push(((2.0 * kf + 1.0) * t * p[k] - kf * p[k - 1]) / (kf + 1.0));
    }
    p.truncate(k_max + 1);
    p
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().clamp(-1.0, 1.0)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let k_max = 64;
    let grid = SphereGrid::for_degree(2, k_max).unwrap();
    let w = grid.weights();
    let area_err = (grid.total_weight() - 4.0 * PI).abs() / (4.0 * PI);

    let pts = sample_uniform(2, 2, 5).unwrap();
    let (y, z) = (pts[0].coords(), pts[1].coords());
    // Z_k on S^2 is (2k+1)/(4π) P_k
    let zk = |t: f64| -> Vec<f64> {
        legendre(k_max, t)
            .into_iter()
            .enumerate()
            .map(|(k, p)| (2.0 * k as f64 + 1.0) / (4.0 * PI) * p)
            .collect()
    };
    let table = ZonalTable::new(2, k_max).unwrap();
    let mut lib_err: f64 = 0.0;
    let mut buf = vec![0.0; k_max + 1];
    let mut zy = Vec::with_capacity(grid.len());
    let mut zz = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let x = grid.coords(i);
        let a = zk(dot(x, y));
        table.fill(dot(x, y), &mut buf);
        for k in 0..=k_max {
            lib_err = lib_err.max((a[k] - buf[k]).abs());
        }
        zy.push(a);
        zz.push(zk(dot(x, z)));
    }
    let mut mean_err: f64 = 0.0;
    for k in 0..=k_max {
        let v: f64 = (0..grid.len()).map(|i| w[i] * zy[i][k]).sum();
        mean_err = mean_err.max((v - if k == 0 { 1.0 } else { 0.0 }).abs());
    }
    let direct = zk(dot(y, z));
    let mut repr_err: f64 = 0.0;
    for k in 0..=k_max {
        for j in 0..=k_max {
            let v: f64 = (0..grid.len()).map(|i| w[i] * zy[i][k] * zz[i][j]).sum();
            let expect = if k == j { direct[k] } else { 0.0 };
            repr_err = repr_err.max((v - expect).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        area_err <= 1e-10 && mean_err <= 1e-9 && repr_err <= 1e-8 && lib_err <= 1e-10 && secs < 30.0,
        format!(
            "weight sum rel err {area_err:.2e} (<=1e-10), mean of Z_k {mean_err:.2e} (<=1e-9), \
             reproducing {repr_err:.2e} (<=1e-8), Z_k vs Legendre {lib_err:.2e}, {secs:.1}s (<30s)"
        ),
    )
}

fn criterion_2() -> Outcome {
    let k_max = 32;
    let grid = Arc::new(SphereGrid::for_degree(2, k_max).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let fs: Vec<GridFunction> = (0..100)
        .map(|_| {
            random_band_limited(2, k_max, 4, &mut rng)
                .unwrap()
                .sample(grid.clone())
                .unwrap()
        })
        .collect();
    let decs = decompose_batch(&fs, k_max).unwrap();
    let mut worst: f64 = 0.0;
    for (f, d) in fs.iter().zip(&decs) {
        let total: f64 = d.degree_norms_sq().iter().sum();
        let l2 = lp_norm(f, 2.0).unwrap().powi(2);
        worst = worst.max((total - l2).abs() / l2);
    }
    outcome(worst <= 1e-8, format!("max relative Parseval defect {worst:.2e} (<=1e-8) over 100 functions"))
}

fn criterion_3() -> Outcome {
    let k_max = 32;
    let grid = Arc::new(SphereGrid::for_degree(2, k_max).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fs: Vec<GridFunction> = (0..20)
        .map(|_| {
            random_band_limited(2, k_max, 4, &mut rng)
                .unwrap()
                .sample(grid.clone())
                .unwrap()
        })
        .collect();
    let decs = decompose_batch(&fs, k_max).unwrap();
    let mut worst: f64 = 0.0;
    for (f, d) in fs.iter().zip(&decs) {
        let scale = lp_norm(f, 2.0).unwrap();
        let nodes: Vec<usize> = (0..12).map(|_| rng.random_range(0..grid.len())).collect();
        for &alpha in &[0.0, 0.5, 1.0] {
            for n in 0..=k_max {
                for &i in &nodes {
                    let a = riesz_mean(d, n, alpha, i).unwrap();
                    let b = riesz_mean_kernel(f, n, alpha, &grid.point(i)).unwrap();
                    worst = worst.max((a - b).abs() / scale);
                }
            }
        }
    }
    outcome(
        worst <= 1e-8,
        format!("max |coefficient route - kernel route| / ||f||_2 = {worst:.2e} (<=1e-8)"),
    )
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    for dim in [2usize, 3] {
        let grid = SphereGrid::for_degree(dim, 64).unwrap();
        let x = sample_uniform(dim, 1, 4).unwrap().remove(0);
        for n in [1usize, 4, 16, 64] {
            for alpha in [0.0, 0.5, (dim as f64 - 1.0) / 2.0, 2.0] {
                let mass: f64 = (0..grid.len())
                    .map(|i| grid.weights()[i] * riesz_kernel(dim, n, alpha, dot(x.coords(), grid.coords(i))).unwrap())
                    .sum();
                worst = worst.max((mass - 1.0).abs());
            }
        }
    }
    outcome(worst <= 1e-9, format!("max |kernel mass - 1| = {worst:.2e} (<=1e-9)"))
}

fn criterion_5() -> Outcome {
    let (dim, k_max, n_max) = (2, 24, 24);
    let grid = Arc::new(SphereGrid::for_degree(dim, k_max).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let nodes: Vec<usize> = (0..200).map(|_| rng.random_range(0..grid.len())).collect();
    let mut checks = 0usize;
    let mut violations = 0usize;
    let mut worst = f64::INFINITY;
    for t in 0..50 {
        let f = trial_function(Family::Mixed, dim, k_max, 1.5, 5, t).unwrap();
        let dec = f.decomposition(grid.clone(), k_max).unwrap();
        for alpha in [-0.25, 0.0, 0.5] {
            let s: Vec<RieszMeanSeries> = (0..=3)
                .map(|j| RieszMeanSeries::new(&dec, alpha + j as f64, n_max).unwrap())
                .collect();
            let m: Vec<Vec<f64>> = s.iter().map(|x| averaged_from_series(x, n_max).values).collect();
            let g: Vec<Vec<f64>> = (0..3)
                .map(|j| square_from_series(&s[j], &s[j + 1], n_max).unwrap().values)
                .collect();
            for mm in 1..=3 {
                for &i in &nodes {
                    let rhs = m[mm][i] + (0..mm).map(|j| g[j][i]).sum::<f64>();
                    let margin = rhs - m[0][i];
                    checks += 1;
                    worst = worst.min(margin);
                    if margin < -1e-10 {
                        violations += 1;
                    }
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations in {checks} checks, smallest margin {worst:.3e}"),
    )
}

fn criterion_6() -> Outcome {
    let cfg = ExperimentConfig {
        dimension: 2,
        degree_max: 16,
        n_max: 32,
        alpha_grid: vec![1.0],
        p_grid: vec![1.5],
        family: Family::Mixed,
        trials: 20,
        seed: 6,
        out_dir: "unused".into(),
    };
    let report = audit_report(&cfg).unwrap();
    let row = report.audit("l1_shape").next().unwrap();
    let (c, r) = (row.constant.unwrap(), row.refined_constant.unwrap());
    let change = (r / c - 1.0).abs();
    outcome(
        c.is_finite() && r.is_finite() && change < 0.10,
        format!("ratio {c:.4} on 24 polar nodes, {r:.4} on 48, change {:.2}% (<10%)", 100.0 * change),
    )
}

fn setup(n_max: usize) -> NormSetup {
    NormSetup {
        dim: 2,
        degree_max: 32,
        n_max,
        family: Family::Mixed,
    }
}

fn criterion_7() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [0.25, 0.5, 1.0] {
        let a = operator_norm_estimate(NormOperator::Maximal, 2.0, alpha, 50, 7, &setup(128)).unwrap();
        let b = operator_norm_estimate(NormOperator::Maximal, 2.0, alpha, 50, 7, &setup(256)).unwrap();
        let growth = b / a - 1.0;
        pass &= a.is_finite() && growth < 0.05;
        parts.push(format!("a={alpha}: {a:.4}->{b:.4} ({:+.2}%)", 100.0 * growth));
    }
    let mut single: f64 = 0.0;
    for alpha in [0.25, 0.5, 1.0] {
        for n in [1usize, 8, 32, 128, 256] {
            single = single.max(
                operator_norm_estimate(NormOperator::RieszMean { n }, 2.0, alpha, 50, 7, &setup(256)).unwrap(),
            );
        }
    }
    pass &= single <= 1.0 + 1e-8;
    outcome(
        pass,
        format!("{}; single mean max {single:.12} (<=1+1e-8)", parts.join(", ")),
    )
}

fn criterion_8() -> Outcome {
    // B(1, 5/2) = 2/5, B(2, 5/2) = 4/35
    let bounds = [(0.0, 3.0 * (0.5 * 0.4f64).sqrt()), (0.5, 3.0 * (0.5 * 4.0 / 35.0f64).sqrt())];
    let mut pass = true;
    let mut parts = Vec::new();
    for (alpha, bound) in bounds {
        let a = operator_norm_estimate(NormOperator::SquareFunction, 2.0, alpha, 50, 8, &setup(128)).unwrap();
        let b = operator_norm_estimate(NormOperator::SquareFunction, 2.0, alpha, 50, 8, &setup(256)).unwrap();
        let change = (b / a - 1.0).abs();
        pass &= a <= bound && b <= bound && change < 0.05;
        parts.push(format!(
            "a={alpha}: {a:.4}->{b:.4} (bound {bound:.4}, change {:.3}%)",
            100.0 * change
        ));
    }
    outcome(pass, parts.join(", "))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        dimension: 2,
        degree_max: 256,
        n_max: 8,
        alpha_grid: (0..=30).map(|i| i as f64 * 0.05).collect(),
        p_grid: vec![1.25, 1.5, 2.0],
        family: Family::Singular,
        trials: 1,
        seed: 9,
        out_dir: "unused".into(),
    };
    let report = threshold_map(&cfg).unwrap();
    let mins = minimal_converging(&report);
    let mut pass = mins.len() == 3;
    let mut prev = f64::INFINITY;
    let mut parts = Vec::new();
    for (p, a) in &mins {
        let (cond, _) = critical_lines(2, *p);
        match a {
            Some(a) => {
                pass &= *a <= prev && *a > cond - 0.15;
                prev = *a;
                parts.push(format!("p={p}: min alpha {a:.2} (line {cond:.3})"));
            }
            None => {
                pass = false;
                parts.push(format!("p={p}: none converging"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 600.0;
    outcome(pass, format!("{}; {secs:.1}s (<600s)", parts.join(", ")))
}

/// ∫_0^1 t^{x-1} (1-t)^{y-1} dt by tanh-sinh quadrature.
fn beta_oracle(x: f64, y: f64) -> f64 {
    let h = 1.0 / 256.0;
    let mut sum = 0.0;
    let mut k = -(8.0 / h) as i64;
    while k as f64 * h <= 8.0 {
        let s = k as f64 * h;
        let u = 0.5 * PI * s.sinh();
        // t = 1/(1+e^{-2u}), 1-t = 1/(1+e^{2u}), dt = (π/2) cosh s / (2 cosh² u) ds
        let t = 1.0 / (1.0 + (-2.0 * u).exp());
        let omt = 1.0 / (1.0 + (2.0 * u).exp());
        let dt = 0.5 * PI * s.cosh() / (2.0 * u.cosh().powi(2));
        let v = t.powf(x - 1.0) * omt.powf(y - 1.0) * dt;
        if v.is_finite() {
            sum += v;
        }
        k += 1;
    }
    sum * h
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = 4.0 - rng.random::<f64>() * 3.5;
        let y = 4.0 - rng.random::<f64>() * 3.5;
        let b = beta_function(x, y).unwrap();
        let o = beta_oracle(x, y);
        worst = worst.max((b - o).abs() / o);
    }
    outcome(worst <= 1e-10, format!("max relative deviation {worst:.2e} (<=1e-10) at 20 points"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("quadrature and orthogonality", criterion_1),
        ("Parseval", criterion_2),
        ("route equivalence", criterion_3),
        ("kernel mass", criterion_4),
        ("M/G chain", criterion_5),
        ("L1 shape stability", criterion_6),
        ("L2 maximal stability", criterion_7),
        ("square function bound", criterion_8),
        ("convergence threshold trend", criterion_9),
        ("Beta function", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let tag = if result.pass { "PASS" } else { "FAIL" };
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {tag} [{name}] {} ({:.1}s)",
            i + 1,
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
