//! Spike-and-exponential relaxation of a binary variable.
//!
//! For `z = 0` the relaxed variable `ζ` is a point mass at 0. For `z = 1` it
//! has density `β·e^{βζ} / (e^β − 1)` on `(0, 1]`, whose CDF is
//! `(e^{βζ} − 1)/(e^β − 1)`. All expressions go through `exp_m1`/`ln_1p`
//! to stay accurate for small arguments.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationParams {
    beta: f64,
}

impl Default for RelaxationParams {
    fn default() -> Self {
        RelaxationParams { beta: 8.0 }
    }
}

impl RelaxationParams {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParams(format!("beta must be positive and finite, got {beta}")));
        }
        Ok(RelaxationParams { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

fn unit_interval(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} = {v} is outside [0, 1]")))
    }
}

/// CDF of `ζ` given `z`, evaluated at `zeta ∈ [0, 1]`.
pub fn spike_exp_cdf(zeta: f64, z: bool, params: RelaxationParams) -> Result<f64> {
    unit_interval("zeta", zeta)?;
    if !z {
        return Ok(1.0);
    }
    let b = params.beta;
    Ok((b * zeta).exp_m1() / b.exp_m1())
}

/// `ζ = F⁻¹(u | z)`: `log(u·(e^β − 1) + 1)/β` for `z = 1`, `0` for `z = 0`.
pub fn inverse_cdf_sample(u: f64, z: bool, params: RelaxationParams) -> Result<f64> {
    unit_interval("u", u)?;
    if !z {
        return Ok(0.0);
    }
    let b = params.beta;
    Ok((u * b.exp_m1()).ln_1p() / b)
}

/// `1` when `q ≥ 1 − rho`, else `0`.
pub fn binarize(q: f64, rho: f64) -> bool {
    q >= 1.0 - rho
}

/// Reparametrized sample of `ζ` from a Bernoulli mean `q ∈ (0, 1]` and noise
/// `rho ∈ [0, 1]`: the inverse CDF at `u = (q + rho − 1)/q` when
/// `q ≥ 1 − rho`, and `0` otherwise. The corner `q = 0, rho = 1` falls on
/// the zero branch.
pub fn reparam_sample(q: f64, rho: f64, params: RelaxationParams) -> Result<f64> {
    if !q.is_finite() || !rho.is_finite() {
        return Err(Error::InvalidInput("q and rho must be finite".into()));
    }
    unit_interval("q", q)?;
    unit_interval("rho", rho)?;
    if q == 0.0 || !binarize(q, rho) {
        return Ok(0.0);
    }
    let b = params.beta;
    let u = ((q + rho - 1.0) / q).clamp(0.0, 1.0);
    Ok((u * b.exp_m1()).ln_1p() / b)
}

/// `∂ζ/∂q` on the smooth branch `q > 1 − rho`:
/// `(e^β − 1)(1 − ρ) / (β·q²·(1 + u·(e^β − 1)))` with `u = (q + ρ − 1)/q`.
pub fn reparam_grad(q: f64, rho: f64, params: RelaxationParams) -> Result<f64> {
    if !q.is_finite() || !rho.is_finite() {
        return Err(Error::InvalidInput("q and rho must be finite".into()));
    }
    unit_interval("q", q)?;
    unit_interval("rho", rho)?;
    if q <= 1.0 - rho {
        return Err(Error::InvalidInput(format!(
            "derivative is undefined off the smooth branch (q = {q}, 1 - rho = {})",
            1.0 - rho
        )));
    }
    let b = params.beta;
    let e = b.exp_m1();
    let u = (q + rho - 1.0) / q;
    Ok(e * (1.0 - rho) / (b * q * q * (1.0 + u * e)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(beta: f64) -> RelaxationParams {
        RelaxationParams::new(beta).unwrap()
    }

    #[test]
    fn cdf_values() {
        for zeta in [0.0, 0.3, 1.0] {
            assert_eq!(spike_exp_cdf(zeta, false, p(2.0)).unwrap(), 1.0);
        }
        assert!((spike_exp_cdf(1.0, true, p(3.0)).unwrap() - 1.0).abs() < 1e-15);
        let expected = (0.5f64.exp() - 1.0) / (1f64.exp() - 1.0);
        let got = spike_exp_cdf(0.5, true, p(1.0)).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.377541).abs() < 1e-6);
        assert!(spike_exp_cdf(1.5, true, p(1.0)).is_err());
        assert!(spike_exp_cdf(-0.1, false, p(1.0)).is_err());
    }

    #[test]
    fn inverse_values() {
        assert_eq!(inverse_cdf_sample(0.7, false, p(1.0)).unwrap(), 0.0);
        assert_eq!(inverse_cdf_sample(0.0, true, p(1.0)).unwrap(), 0.0);
        assert!((inverse_cdf_sample(1.0, true, p(4.0)).unwrap() - 1.0).abs() < 1e-15);
        let got = inverse_cdf_sample(0.5, true, p(1.0)).unwrap();
        assert!((got - (0.5 * (1f64.exp() - 1.0) + 1.0).ln()).abs() < 1e-15);
        assert!((got - 0.620115).abs() < 1e-6);
        assert!(inverse_cdf_sample(1.1, true, p(1.0)).is_err());
    }

    #[test]
    fn binarize_boundaries() {
        assert!(binarize(1.0, 0.0));
        assert!(binarize(1.0, 0.7));
        assert!(!binarize(0.0, 0.5));
        assert!(binarize(0.25, 0.75));
    }

    #[test]
    fn reparam_branches() {
        assert_eq!(reparam_sample(0.2, 0.5, p(8.0)).unwrap(), 0.0);
        assert_eq!(reparam_sample(0.25, 0.75, p(8.0)).unwrap(), 0.0);
        assert_eq!(reparam_sample(0.0, 1.0, p(8.0)).unwrap(), 0.0);
        for rho in [0.0, 0.3, 0.99, 1.0] {
            let a = reparam_sample(1.0, rho, p(3.0)).unwrap();
            let b = inverse_cdf_sample(rho, true, p(3.0)).unwrap();
            assert!((a - b).abs() <= 1e-12);
        }
        assert!(reparam_sample(f64::NAN, 0.5, p(1.0)).is_err());
    }

    #[test]
    fn grad_domain() {
        assert!(reparam_grad(0.5, 0.5, p(1.0)).is_err());
        assert!(reparam_grad(0.4, 0.5, p(1.0)).is_err());
        assert!(reparam_grad(0.6, 0.5, p(1.0)).unwrap() > 0.0);
        assert_eq!(reparam_grad(1.0, 1.0, p(1.0)).unwrap(), 0.0);
    }

    #[test]
    fn beta_must_be_positive() {
        assert!(RelaxationParams::new(0.0).is_err());
        assert!(RelaxationParams::new(f64::INFINITY).is_err());
    }
}
