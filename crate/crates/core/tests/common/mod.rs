//! Reference implementations that share no code with the library solvers.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Correlated Gaussian design: each column mixes a shared factor with its own noise.
pub fn random_design(rng: &mut ChaCha8Rng, n: usize, p: usize, rho: f64) -> Array2<f64> {
    let mut x = Array2::zeros((n, p));
    for i in 0..n {
        let f: f64 = StandardNormal.sample(rng);
        for j in 0..p {
            let e: f64 = StandardNormal.sample(rng);
            x[[i, j]] = rho.sqrt() * f + (1.0 - rho).sqrt() * e;
        }
    }
    x
}

pub fn random_response(rng: &mut ChaCha8Rng, x: &Array2<f64>, sparsity: f64, noise: f64) -> Array1<f64> {
    let p = x.ncols();
    let beta: Array1<f64> = (0..p)
        .map(|_| if rng.random::<f64>() < sparsity { StandardNormal.sample(rng) } else { 0.0 })
        .collect();
    let eps: Array1<f64> = (0..x.nrows()).map(|_| noise * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)).collect();
    x.dot(&beta) + eps
}

pub fn names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("x{j}")).collect()
}

fn to_na(x: ArrayView2<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[[i, j]])
}

/// Least squares through nalgebra's SVD.
pub fn ols(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Vec<f64> {
    let xm = to_na(x);
    let yv = DVector::from_iterator(y.len(), y.iter().copied());
    let svd = xm.svd(true, true);
    svd.solve(&yv, 1e-12).unwrap().iter().copied().collect()
}

/// Ridge via an LU solve of the normal equations.
pub fn ridge(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, lambda2: f64) -> Vec<f64> {
    let xm = to_na(x);
    let yv = DVector::from_iterator(y.len(), y.iter().copied());
    let mut a = xm.transpose() * &xm;
    for j in 0..a.ncols() {
        a[(j, j)] += lambda2;
    }
    a.lu().solve(&(xm.transpose() * yv)).unwrap().iter().copied().collect()
}

pub fn enet_objective(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, b: &[f64], l1: f64, l2: f64) -> f64 {
    let mut rss = 0.0;
    for i in 0..x.nrows() {
        let mut r = y[i];
        for j in 0..x.ncols() {
            r -= x[[i, j]] * b[j];
        }
        rss += r * r;
    }
    rss + l2 * b.iter().map(|v| v * v).sum::<f64>() + l1 * b.iter().map(|v| v.abs()).sum::<f64>()
}

/// FISTA with adaptive restart for `‖y − Xb‖² + λ₂‖b‖² + λ₁‖b‖₁`.
pub fn fista_enet(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, l1: f64, l2: f64, iters: usize) -> Vec<f64> {
    let xm = to_na(x);
    let yv = DVector::from_iterator(y.len(), y.iter().copied());
    let gram = xm.transpose() * &xm;
    let xty = xm.transpose() * yv;
    let eig = gram.clone().symmetric_eigen();
    let lip = 2.0 * eig.eigenvalues.max() + 2.0 * l2;
    let step = 1.0 / lip;
    let p = x.ncols();
    let mut b = DVector::<f64>::zeros(p);
    let mut z = b.clone();
    let mut t = 1.0f64;
    let prox = |v: f64| -> f64 {
        let g = l1 * step;
        if v > g {
            v - g
        } else if v < -g {
            v + g
        } else {
            0.0
        }
    };
    for _ in 0..iters {
        let grad = 2.0 * (&gram * &z - &xty) + 2.0 * l2 * &z;
        let next = (&z - step * grad).map(prox);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let momentum = (t - 1.0) / t_next;
        // restart when the momentum points uphill
        if (&z - &next).dot(&(&next - &b)) > 0.0 {
            z = next.clone();
            t = 1.0;
        } else {
            z = &next + momentum * (&next - &b);
            t = t_next;
        }
        let delta = (&next - &b).amax();
        b = next;
        if delta < 1e-15 {
            break;
        }
    }
    b.iter().copied().collect()
}

/// Exhaustive grid search over a cube around the origin, then repeated
/// zooming around the best point. Intended for p ≤ 3.
pub fn brute_force_min(f: impl Fn(&[f64]) -> f64, p: usize, radius: f64) -> Vec<f64> {
    assert!((1..=3).contains(&p));
    let per_axis = 21usize;
    let mut center = vec![0.0; p];
    let mut half = radius;
    for _ in 0..40 {
        let mut best = (f64::INFINITY, center.clone());
        for idx in 0..per_axis.pow(p as u32) {
            let mut b = vec![0.0; p];
            let mut rem = idx;
            for (bj, cj) in b.iter_mut().zip(&center) {
                let k = rem % per_axis;
                rem /= per_axis;
                *bj = cj - half + 2.0 * half * k as f64 / (per_axis - 1) as f64;
            }
            let v = f(&b);
            if v < best.0 {
                best = (v, b);
            }
        }
        center = best.1;
        half /= 3.0;
    }
    center
}

pub fn brute_force_enet(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, l1: f64, l2: f64, radius: f64) -> Vec<f64> {
    brute_force_min(|b| enet_objective(x, y, b, l1, l2), x.ncols(), radius)
}

/// Nadaraya-Watson at every sample point, written as the textbook double sum.
pub fn naive_nw(v: &[f64], t: &[f64], h: f64, kernel: fn(f64) -> f64) -> Vec<f64> {
    (0..t.len())
        .map(|j| {
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..t.len() {
                let w = kernel((t[i] - t[j]) / h);
                num += w * v[i];
                den += w;
            }
            num / den
        })
        .collect()
}

pub fn box_kernel(u: f64) -> f64 {
    if u.abs() <= 1.0 {
        0.5
    } else {
        0.0
    }
}

pub fn epanechnikov(u: f64) -> f64 {
    if u.abs() <= 1.0 {
        0.75 * (1.0 - u * u)
    } else {
        0.0
    }
}

pub fn gaussian(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// A library kernel with its independent reference implementation.
pub type KernelOracle = (plm_enet::Kernel, fn(f64) -> f64);
