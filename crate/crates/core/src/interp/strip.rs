//! Polynomials mapping a disk slightly larger than the unit disk into a thin
//! neighborhood of `[0, 1]`.
//!
//! For `0 < ρ < 1` put `a = 1 − e^(−1/ρ)`, `N = ⌊(1 + 1/ρ) e^(1+1/ρ)⌋` and
//! `p(z) = (1/σ) Σ_{j=1}^{N} (a z)^j / j` with `σ = Σ_{j=1}^{N} a^j / j`,
//! a truncation of `−log(1 − az)` normalized so that `p(1) = 1`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of boundary points checked on `|z| = β_ρ`.
pub const BOUNDARY_SAMPLES: usize = 10_000;

/// Degree bound above which the coefficients are only kept in floating point.
pub const EXACT_DEGREE_LIMIT: usize = 256;

/// Slack allowed on the strip bounds for floating-point evaluation.
const STRIP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripMap {
    pub rho: f64,
    /// `N_ρ`, the degree of `p`.
    pub degree: usize,
    /// `β_ρ = (1 − e^(−1−1/ρ)) / (1 − e^(−1/ρ))`.
    pub beta: f64,
    /// `a = 1 − e^(−1/ρ)`.
    pub a: f64,
    /// `coeffs[j]` is the coefficient of `z^j`; `coeffs[0] = 0`.
    pub coeffs: Vec<f64>,
    /// Exact coefficients (for `a` taken as the exact value of its `f64`),
    /// present when `N_ρ ≤ EXACT_DEGREE_LIMIT`.
    #[serde(skip)]
    pub exact: Option<Vec<BigRational>>,
    pub validation: StripValidation,
}

/// Extremes of `p` over the sampled circle `|z| = β_ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripValidation {
    pub samples: usize,
    pub min_re: f64,
    pub max_re: f64,
    pub max_abs_im: f64,
    /// `|p(1) − 1|` from an exact sum of the stored coefficients.
    pub p_one_error: f64,
}

pub fn strip_degree(rho: f64) -> f64 {
    ((1.0 + 1.0 / rho) * (1.0 + 1.0 / rho).exp()).floor()
}

pub fn strip_beta(rho: f64) -> f64 {
    (-(1.0 + 1.0 / rho)).exp_m1() / (-1.0 / rho).exp_m1()
}

/// Builds and validates the strip map for `ρ`. Fails if any boundary sample
/// leaves `{−ρ ≤ Re ≤ 1 + 2ρ, |Im| ≤ 2ρ}` or if `p(1) ≠ 1` beyond rounding.
pub fn build_strip_map(rho: f64) -> Result<StripMap> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::param(format!("ρ must lie in (0, 1), got {rho}")));
    }
    let degree_f = strip_degree(rho);
    if degree_f > 5e7 {
        return Err(Error::budget("strip map degree", degree_f, 5e7));
    }
    let degree = degree_f as usize;
    let beta = strip_beta(rho);
    let a = -(-1.0 / rho).exp_m1();

    let (coeffs, exact) = if degree <= EXACT_DEGREE_LIMIT {
        let exact = exact_coeffs(a, degree);
        let floats = exact.iter().map(|c| c.to_f64().unwrap_or(0.0)).collect();
        (floats, Some(exact))
    } else {
        (float_coeffs(a, degree), None)
    };

    let p_one_error = match &exact {
        Some(ex) => {
            let total = ex.iter().fold(BigRational::zero(), |acc, c| acc + c);
            (total - BigRational::one()).to_f64().unwrap_or(f64::INFINITY).abs()
        }
        None => (exact_sum_f64(&coeffs) - BigRational::one())
            .to_f64()
            .unwrap_or(f64::INFINITY)
            .abs(),
    };

    let validation = validate(&coeffs, beta, p_one_error);
    let map = StripMap {
        rho,
        degree,
        beta,
        a,
        coeffs,
        exact,
        validation,
    };
    map.check()?;
    Ok(map)
}

impl StripMap {
    fn check(&self) -> Result<()> {
        let v = &self.validation;
        let rho = self.rho;
        let tol = STRIP_TOLERANCE;
        if v.min_re < -rho - tol || v.max_re > 1.0 + 2.0 * rho + tol || v.max_abs_im > 2.0 * rho + tol {
            return Err(Error::Validation(format!(
                "strip map for ρ = {rho} leaves the strip: Re ∈ [{}, {}], |Im| ≤ {}",
                v.min_re, v.max_re, v.max_abs_im
            )));
        }
        if v.p_one_error > 1e-12 {
            return Err(Error::Validation(format!("p(1) differs from 1 by {}", v.p_one_error)));
        }
        Ok(())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        crate::exact::horner_f64(self.coeffs.iter().copied(), z)
    }
}

fn exact_coeffs(a: f64, degree: usize) -> Vec<BigRational> {
    let a = BigRational::from_float(a).expect("finite a");
    let mut raw = vec![BigRational::zero(); degree + 1];
    let mut power = BigRational::one();
    let mut sigma = BigRational::zero();
    for (j, slot) in raw.iter_mut().enumerate().skip(1) {
        power *= &a;
        *slot = &power / BigRational::from_integer(BigInt::from(j));
        sigma += &*slot;
    }
    raw.into_iter().map(|c| c / &sigma).collect()
}

fn float_coeffs(a: f64, degree: usize) -> Vec<f64> {
    let mut raw = vec![0.0; degree + 1];
    let log_a = a.ln();
    for (j, slot) in raw.iter_mut().enumerate().skip(1) {
        *slot = (j as f64 * log_a).exp() / j as f64;
    }
    // Sum smallest terms first.
    let sigma: f64 = raw.iter().rev().sum();
    raw.iter().map(|c| c / sigma).collect()
}

fn exact_sum_f64(xs: &[f64]) -> BigRational {
    xs.iter()
        .map(|&x| BigRational::from_float(x).expect("finite coefficient"))
        .fold(BigRational::zero(), |acc, x| acc + x)
}

/// Samples `p` at `z_l = β e^(2πi l/M)` for `M = BOUNDARY_SAMPLES` with one
/// inverse DFT of the coefficients `c_j β^j` folded modulo `M`.
fn validate(coeffs: &[f64], beta: f64, p_one_error: f64) -> StripValidation {
    let samples = BOUNDARY_SAMPLES;
    let mut folded = vec![Complex64::zero(); samples];
    let log_beta = beta.ln();
    for (j, &c) in coeffs.iter().enumerate() {
        folded[j % samples] += c * (j as f64 * log_beta).exp();
    }
    FftPlanner::new().plan_fft_inverse(samples).process(&mut folded);
    let mut v = StripValidation {
        samples,
        min_re: f64::INFINITY,
        max_re: f64::NEG_INFINITY,
        max_abs_im: 0.0,
        p_one_error,
    };
    for z in folded {
        v.min_re = v.min_re.min(z.re);
        v.max_re = v.max_re.max(z.re);
        v.max_abs_im = v.max_abs_im.max(z.im.abs());
    }
    v
}
