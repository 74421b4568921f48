mod common;

use common::*;
use proptest::prelude::*;
use qdopt_core::*;
use rand::Rng;

const BETAS: [f64; 4] = [0.5, 1.0, 4.0, 8.0];

fn params(beta: f64) -> RelaxationParams {
    RelaxationParams::new(beta).unwrap()
}

/// Asymptotic Kolmogorov critical value at significance 0.01.
fn ks_critical(n: usize) -> f64 {
    let n = n as f64;
    1.6276 / (n.sqrt() + 0.12 + 0.11 / n.sqrt())
}

#[test]
fn reference_values() {
    let one = params(1.0);
    assert_eq!(spike_exp_cdf(0.4, false, one).unwrap(), 1.0);
    assert_eq!(inverse_cdf_sample(0.4, false, one).unwrap(), 0.0);
    let e = std::f64::consts::E;
    assert!((spike_exp_cdf(0.5, true, one).unwrap() - (e.sqrt() - 1.0) / (e - 1.0)).abs() < 1e-15);
    assert!((inverse_cdf_sample(0.5, true, one).unwrap() - (0.5 * (e - 1.0) + 1.0).ln()).abs() < 1e-15);
    assert_eq!(inverse_cdf_sample(0.0, true, one).unwrap(), 0.0);
    assert!((inverse_cdf_sample(1.0, true, one).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn out_of_range_inputs() {
    let p = params(2.0);
    for v in [-1e-12, 1.0 + 1e-12, f64::NAN] {
        assert_eq!(spike_exp_cdf(v, true, p).unwrap_err().kind(), ErrorKind::Input);
        assert_eq!(inverse_cdf_sample(v, true, p).unwrap_err().kind(), ErrorKind::Input);
        assert!(reparam_sample(v, 0.5, p).is_err());
        assert!(reparam_sample(0.5, v, p).is_err());
    }
    assert!(RelaxationParams::new(-1.0).is_err());
    assert!(RelaxationParams::new(f64::NAN).is_err());
}

#[test]
fn cdf_and_inverse_are_strictly_increasing() {
    for beta in BETAS {
        let p = params(beta);
        let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        let cdf: Vec<f64> = grid.iter().map(|&z| spike_exp_cdf(z, true, p).unwrap()).collect();
        let inv: Vec<f64> = grid.iter().map(|&u| inverse_cdf_sample(u, true, p).unwrap()).collect();
        assert!(cdf.windows(2).all(|w| w[1] > w[0]));
        assert!(inv.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn round_trip_on_dense_grid() {
    for beta in BETAS {
        let p = params(beta);
        for i in 1..10_000 {
            let u = i as f64 / 10_000.0;
            let back = spike_exp_cdf(inverse_cdf_sample(u, true, p).unwrap(), true, p).unwrap();
            assert!((back - u).abs() <= 1e-12, "beta {beta}, u {u}: {back}");
        }
    }
}

#[test]
fn inverse_cdf_samples_pass_ks() {
    for beta in BETAS {
        let p = params(beta);
        let mut r = rng(2024);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n)
            .map(|_| inverse_cdf_sample(r.gen::<f64>(), true, p).unwrap())
            .collect();
        xs.sort_by(f64::total_cmp);
        let mut d: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let f = ((beta * x).exp() - 1.0) / (beta.exp() - 1.0);
            d = d.max((f - i as f64 / n as f64).abs()).max(((i + 1) as f64 / n as f64 - f).abs());
        }
        assert!(d < ks_critical(n), "beta {beta}: D = {d}");
    }
}

#[test]
fn binarize_marginal_is_q() {
    let mut r = rng(77);
    let draws = 100_000;
    for q in [0.0, 0.1, 0.37, 0.5, 0.93, 1.0] {
        let ones = (0..draws).filter(|_| binarize(q, r.gen::<f64>())).count();
        let freq = ones as f64 / draws as f64;
        let se = (q * (1.0 - q) / draws as f64).sqrt();
        assert!((freq - q).abs() <= 3.0 * se + 1e-12, "q {q}: {freq}");
    }
    assert!(binarize(0.25, 0.75));
}

#[test]
fn reparam_examples() {
    let p = params(8.0);
    assert_eq!(reparam_sample(0.2, 0.3, p).unwrap(), 0.0);
    assert_eq!(reparam_sample(0.4, 0.6, p).unwrap(), 0.0);
    assert_eq!(reparam_sample(0.0, 1.0, p).unwrap(), 0.0);
    let mut r = rng(5);
    for _ in 0..1000 {
        let (rho, beta) = (r.gen::<f64>(), r.gen_range(0.1..20.0));
        let a = reparam_sample(1.0, rho, params(beta)).unwrap();
        let b = inverse_cdf_sample(rho, true, params(beta)).unwrap();
        assert!((a - b).abs() <= 1e-12);
        assert!((0.0..=1.0).contains(&a));
    }
}

#[test]
fn reparam_is_continuous_at_branch_point() {
    let delta = 1e-9;
    for beta in BETAS {
        for rho in [0.1, 0.5, 0.9] {
            let p = params(beta);
            let edge = 1.0 - rho;
            let below = reparam_sample(edge - delta, rho, p).unwrap();
            let above = reparam_sample(edge + delta, rho, p).unwrap();
            assert_eq!(below, 0.0);
            let slope = (beta.exp() - 1.0) / (beta * edge);
            assert!(above >= 0.0 && above <= 2.0 * slope * delta, "{above}");
        }
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let h = 1e-6;
    let mut r = rng(11);
    for _ in 0..1000 {
        let beta = r.gen_range(0.5..8.0);
        let rho = r.gen_range(0.02..1.0);
        let edge = 1.0 - rho;
        let q = edge + (1.0 - edge) * r.gen_range(0.05..0.999);
        let p = params(beta);
        let g = reparam_grad(q, rho, p).unwrap();
        let fd = (reparam_sample(q + h, rho, p).unwrap() - reparam_sample(q - h, rho, p).unwrap()) / (2.0 * h);
        assert!(g >= 0.0 && g.is_finite());
        assert!((g - fd).abs() <= 1e-6 * fd.abs().max(1.0), "q {q} rho {rho} beta {beta}: {g} vs {fd}");
    }
    let p = params(1.0);
    let g = reparam_grad(1.0, 1.0, p).unwrap();
    let fd = (reparam_sample(1.0, 1.0, p).unwrap() - reparam_sample(1.0 - h, 1.0, p).unwrap()) / h;
    assert!((g - fd).abs() <= 1e-5 * fd.abs().max(1.0), "{g} vs {fd}");
}

#[test]
fn gradient_undefined_off_branch() {
    let p = params(4.0);
    assert_eq!(reparam_grad(0.3, 0.7, p).unwrap_err().kind(), ErrorKind::Input);
    assert!(reparam_grad(0.1, 0.5, p).is_err());
}

proptest! {
    #[test]
    fn reparam_sample_in_unit_interval(q in 0.0f64..=1.0, rho in 0.0f64..=1.0, beta in 0.01f64..50.0) {
        let z = reparam_sample(q, rho, params(beta)).unwrap();
        prop_assert!((0.0..=1.0).contains(&z));
        if !binarize(q, rho) {
            prop_assert_eq!(z, 0.0);
        }
    }

    #[test]
    fn round_trip_any_u(u in 0.0f64..=1.0, beta in 0.01f64..30.0) {
        let p = params(beta);
        let back = spike_exp_cdf(inverse_cdf_sample(u, true, p).unwrap(), true, p).unwrap();
        prop_assert!((back - u).abs() <= 1e-12);
    }
}
