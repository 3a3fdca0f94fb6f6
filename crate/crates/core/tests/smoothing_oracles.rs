mod common;

use approx::assert_abs_diff_eq;
use ndarray::{Array1, Array2};
use rand::Rng;

use plm_enet::data::Dataset;
use plm_enet::smoothing::{nw_smooth, nw_smooth_at, nw_smooth_vec, partial_out};
use plm_enet::{Error, Kernel, SmootherConfig};

fn points(seed: u64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = common::rng(seed);
    let t: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let v = t.iter().map(|x| (3.0 * x).cos() + rng.random_range(-0.2..0.2)).collect();
    (t, v)
}

#[test]
fn every_kernel_matches_double_sum() {
    let kernels: [common::KernelOracle; 3] = [
        (Kernel::Box, common::box_kernel),
        (Kernel::Epanechnikov, common::epanechnikov),
        (Kernel::Gaussian, common::gaussian),
    ];
    for seed in 0..10 {
        let (t, v) = points(seed, 150);
        for (kernel, k) in kernels {
            let cfg = SmootherConfig::fixed(kernel, 0.25).unwrap();
            let got = nw_smooth_vec(Array1::from(v.clone()).view(), Array1::from(t.clone()).view(), &cfg).unwrap();
            let want = common::naive_nw(&v, &t, 0.25, k);
            for (a, b) in got.iter().zip(&want) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn off_sample_matches_double_sum() {
    let (t, v) = points(20, 80);
    let (te, _) = points(21, 30);
    let cfg = SmootherConfig::fixed(Kernel::Epanechnikov, 0.3).unwrap();
    let values = Array2::from_shape_vec((80, 1), v.clone()).unwrap();
    let (got, fallback) = nw_smooth_at(values.view(), Array1::from(t.clone()).view(), Array1::from(te.clone()).view(), &cfg).unwrap();
    assert!(fallback.is_empty());
    for (j, &tj) in te.iter().enumerate() {
        let (mut num, mut den) = (0.0, 0.0);
        for (ti, vi) in t.iter().zip(&v) {
            let w = common::epanechnikov((ti - tj) / 0.3);
            num += w * vi;
            den += w;
        }
        assert_abs_diff_eq!(got[[j, 0]], num / den, epsilon = 1e-12);
    }
}

#[test]
fn off_sample_without_neighbours_uses_global_mean() {
    let t = Array1::from(vec![-1.0, -0.9, -0.8]);
    let values = Array2::from_shape_vec((3, 1), vec![1.0, 2.0, 6.0]).unwrap();
    let cfg = SmootherConfig::fixed(Kernel::Box, 0.05).unwrap();
    let (got, fallback) = nw_smooth_at(values.view(), t.view(), Array1::from(vec![0.9]).view(), &cfg).unwrap();
    assert_eq!(fallback, vec![0]);
    assert_abs_diff_eq!(got[[0, 0]], 3.0, epsilon = 1e-15);
}

#[test]
fn leave_one_out_matches_double_sum() {
    let (t, v) = points(30, 60);
    let mut cfg = SmootherConfig::fixed(Kernel::Gaussian, 0.2).unwrap();
    cfg.leave_one_out = true;
    let got = nw_smooth_vec(Array1::from(v.clone()).view(), Array1::from(t.clone()).view(), &cfg).unwrap();
    for j in 0..t.len() {
        let (mut num, mut den) = (0.0, 0.0);
        for i in (0..t.len()).filter(|&i| i != j) {
            let w = common::gaussian((t[i] - t[j]) / 0.2);
            num += w * v[i];
            den += w;
        }
        assert_abs_diff_eq!(got[j], num / den, epsilon = 1e-12);
    }
}

#[test]
fn isolated_point_without_self_weight_is_an_error() {
    let t = Array1::from(vec![-1.0, -0.95, 0.9]);
    let v = Array1::from(vec![1.0, 2.0, 3.0]);
    let mut cfg = SmootherConfig::fixed(Kernel::Box, 0.1).unwrap();
    cfg.leave_one_out = true;
    match nw_smooth_vec(v.view(), t.view(), &cfg) {
        Err(Error::EmptyNeighborhood { index, .. }) => assert_eq!(index, 2),
        other => panic!("expected an empty neighbourhood, got {other:?}"),
    }
}

#[test]
fn partial_residuals_add_back_to_data() {
    let mut rng = common::rng(40);
    let n = 120;
    let x = common::random_design(&mut rng, n, 3, 0.5);
    let t = Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0));
    let y = x.column(0).to_owned() + t.mapv(|s| s * s);
    let data = Dataset::new(y.clone(), t, x.clone(), common::names(3)).unwrap();
    let cfg = SmootherConfig::rule_of_thumb(Kernel::Epanechnikov, n, 1.0).unwrap();
    let pr = partial_out(&data, &cfg).unwrap();
    for i in 0..n {
        assert_abs_diff_eq!(pr.y_tilde[i] + pr.my_hat[i], y[i], epsilon = 1e-12);
        for j in 0..3 {
            assert_abs_diff_eq!(pr.x_tilde[[i, j]] + pr.mx_hat[[i, j]], x[[i, j]], epsilon = 1e-12);
        }
    }
}

#[test]
fn columns_are_smoothed_independently() {
    let mut rng = common::rng(50);
    let n = 90;
    let t = Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0));
    let v = common::random_design(&mut rng, n, 4, 0.2);
    let cfg = SmootherConfig::fixed(Kernel::Box, 0.3).unwrap();
    let joint = nw_smooth(v.view(), t.view(), &cfg).unwrap();
    for j in 0..4 {
        let single = nw_smooth_vec(v.column(j), t.view(), &cfg).unwrap();
        assert_eq!(joint.column(j), single);
    }
}
