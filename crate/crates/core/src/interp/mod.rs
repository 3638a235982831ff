//! Approximating `log Z` by Taylor interpolation inside a zero-free region.
//!
//! With `s = w* − 1`, the polynomial `g(z) = k^(−n) Z(G; 1 + s z)` has
//! `g(0) = 1` and `g(1) = k^(−n) Z(G; w*)`. If `Z` has no roots within
//! distance `η` of `[1, w*]`, then `g` has none within `η′ = η/s` of `[0, 1]`,
//! and composing with a strip map `p` yields `g ∘ p`, zero-free on a disk of
//! radius `β_ρ > 1`. The Taylor polynomial of `log(g ∘ p)` at `0`,
//! evaluated at `1`, then approximates `log g(1)`.

pub mod roots;
pub mod strip;

use num_complex::Complex64;
use num_traits::{FromPrimitive, Num, Zero};
use serde::{Deserialize, Serialize};

use crate::config::Budget;
use crate::error::{Error, Result};
use crate::exact::{ln_biguint, z_coeffs_subgraph};
use crate::instance::UgInstance;
use crate::LogValue;

pub use roots::{distance_to_segment, empirical_zero_free, poly_roots};
pub use strip::{build_strip_map, StripMap};

/// Taylor coefficients `f_0..=f_m` of `log(g / g_0)` at zero.
///
/// From `g' = f' g`: `f_j = (g_j − (1/j) Σ_{i=1}^{j−1} i f_i g_{j−i}) / g_0`.
/// Entry 0 is zero; add `log g_0` for `log g` itself. Exact for exact `T`.
pub fn log_taylor_from_coeffs<T>(g: &[T], m: usize) -> Result<Vec<T>>
where
    T: Num + Clone + FromPrimitive,
{
    let g0 = match g.first() {
        Some(x) if !x.is_zero() => x.clone(),
        _ => return Err(Error::param("constant term of g must be non-zero")),
    };
    let coeff = |j: usize| g.get(j).cloned().unwrap_or_else(T::zero);
    let mut f = vec![T::zero(); m + 1];
    for j in 1..=m {
        let mut acc = T::zero();
        for i in 1..j {
            let gi = coeff(j - i);
            if gi.is_zero() || f[i].is_zero() {
                continue;
            }
            acc = acc + T::from_usize(i).expect("index fits") * f[i].clone() * gi;
        }
        let jt = T::from_usize(j).expect("index fits");
        f[j] = (coeff(j) - acc / jt) / g0.clone();
    }
    Ok(f)
}

/// `log g` to order `m` in double precision, including `log g_0` (principal
/// branch) in entry 0.
pub fn log_taylor_complex(g: &[Complex64], m: usize) -> Result<Vec<Complex64>> {
    let mut f = log_taylor_from_coeffs(g, m)?;
    f[0] = g[0].ln();
    Ok(f)
}

/// `N / ((m+1) β^m (β−1))`: error of the degree-`m` Taylor polynomial of
/// `log g` at `1` when the degree-`N` polynomial `g` has no roots in `|z| < β`.
pub fn disk_truncation_bound(n: usize, beta: f64, m: usize) -> Result<f64> {
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(Error::param(format!("β must exceed 1, got {beta}")));
    }
    let log = (n as f64).ln() - ((m + 1) as f64).ln() - m as f64 * beta.ln() - (beta - 1.0).ln();
    Ok(if n == 0 { 0.0 } else { log.exp() })
}

/// Smallest `m ≥ (c′/(β−1)) log(N/α)` with `c′ = c / log(1 + c)`, which
/// guarantees Taylor error at most `α` when `1 < β ≤ 1 + c`.
pub fn choose_m_disk(n: usize, beta: f64, alpha: f64, c: f64) -> Result<usize> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::param(format!("c must be positive, got {c}")));
    }
    if !(beta > 1.0 && beta <= 1.0 + c) {
        return Err(Error::param(format!("β must satisfy 1 < β ≤ 1 + c, got β = {beta}, c = {c}")));
    }
    let n = n as f64;
    if !(alpha > 0.0 && alpha < n / std::f64::consts::E) {
        return Err(Error::param(format!("α must satisfy 0 < α < N/e = {}, got {alpha}", n / std::f64::consts::E)));
    }
    let c_prime = c / c.ln_1p();
    let raw = c_prime / (beta - 1.0) * (n / alpha).ln();
    Ok(raw.ceil() as usize)
}

/// How the zero-free radius fed to the interpolation was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroFreeCertificate {
    /// Computed from the numerically located roots of this instance.
    EmpiricalRoots,
    /// Taken from the zero-free theorem's constants.
    AssumedByTheorem,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpResult {
    pub log_xi: LogValue,
    /// Number of Taylor terms used.
    pub m: usize,
    pub alpha: f64,
    /// Zero-free radius around `[0, 1]` after rescaling, `η/(w*−1)`.
    pub eta_prime: f64,
    pub rho: f64,
    pub strip_degree: usize,
    pub strip_beta: f64,
    /// Degree bound `N = |E|` of `Z` in `w`.
    pub degree: usize,
    pub certificate: ZeroFreeCertificate,
}

/// Number of Taylor terms `⌈e^(6/η) log(N e^(6/η)/α)⌉` for a degree-`N`
/// polynomial zero-free within `η` of `[0, 1]`. Requires `0 < η < 1` and
/// `0 < α < N e^(6/η − 1)`.
pub fn strip_terms(n: usize, eta: f64, alpha: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::param(format!("rescaled zero-free radius must lie in (0, 1), got {eta}")));
    }
    let big = 6.0 / eta;
    let n = n as f64;
    let log_upper = n.ln() + big - 1.0;
    if !(alpha > 0.0) || alpha.ln() >= log_upper {
        return Err(Error::param(format!(
            "α must satisfy 0 < α < N e^(6/η − 1) (log bound {log_upper}), got {alpha}"
        )));
    }
    Ok((big.exp() * (n.ln() + big - alpha.ln())).ceil())
}

/// Approximates `log Z(G; w*)` by interpolation from the exact subgraph
/// coefficients, given that `Z` has no roots within `η` of `[1, w*]`.
pub fn approx_log_z_interp(
    inst: &UgInstance,
    w_star: f64,
    eta: f64,
    alpha: f64,
    certificate: ZeroFreeCertificate,
    budget: &Budget,
) -> Result<InterpResult> {
    if !w_star.is_finite() || !eta.is_finite() {
        return Err(Error::param("w* and η must be finite"));
    }
    let log_kn = inst.n() as f64 * (inst.k() as f64).ln();
    let s = w_star - 1.0;
    let degree = inst.edge_count();
    if degree == 0 || s == 0.0 {
        // Z is constant in z: g ≡ 1.
        return Ok(InterpResult {
            log_xi: LogValue::new(log_kn, 0.0),
            m: 1,
            alpha,
            eta_prime: f64::INFINITY,
            rho: f64::NAN,
            strip_degree: 0,
            strip_beta: f64::NAN,
            degree,
            certificate,
        });
    }
    let eta_prime = eta / s.abs();
    let terms = strip_terms(degree, eta_prime, alpha)?;
    if terms > budget.interp_terms as f64 {
        return Err(Error::budget("interpolation terms", terms, budget.interp_terms as f64));
    }
    let m = terms as usize;
    let rho = eta_prime / 8f64.sqrt();
    let strip = build_strip_map(rho)?;

    // g_j = a_j s^j / k^n, formed in log space.
    let a = z_coeffs_subgraph(inst, degree + 1, budget)?;
    let g: Vec<Complex64> = a
        .iter()
        .enumerate()
        .map(|(j, aj)| {
            if aj.is_zero() {
                Complex64::zero()
            } else {
                let mag = (ln_biguint(aj) - log_kn + j as f64 * s.abs().ln()).exp();
                Complex64::new(if s < 0.0 && j % 2 == 1 { -mag } else { mag }, 0.0)
            }
        })
        .collect();

    let h = compose_truncated(&g, &strip.coeffs, m);
    let f = log_taylor_complex(&h, m)?;
    let total: Complex64 = f.iter().rev().sum();
    Ok(InterpResult {
        log_xi: LogValue::new(log_kn + total.re, total.im),
        m,
        alpha,
        eta_prime,
        rho,
        strip_degree: strip.degree,
        strip_beta: strip.beta,
        degree,
        certificate,
    })
}

/// Coefficients of `g(p(z))` up to degree `m`, by Horner's rule in `p`.
pub fn compose_truncated(g: &[Complex64], p: &[f64], m: usize) -> Vec<Complex64> {
    let p = &p[..p.len().min(m + 1)];
    let mut h = vec![Complex64::zero(); m + 1];
    let mut len = 1;
    for (idx, &gj) in g.iter().enumerate().rev() {
        if idx + 1 < g.len() {
            // h ← h · p, truncated.
            let new_len = (len + p.len() - 1).min(m + 1);
            let mut next = vec![Complex64::zero(); new_len];
            for (i, &hi) in h[..len].iter().enumerate() {
                if hi == Complex64::zero() {
                    continue;
                }
                for (j, &pj) in p.iter().enumerate().take(new_len - i) {
                    next[i + j] += hi * pj;
                }
            }
            h[..new_len].copy_from_slice(&next);
            len = new_len;
        }
        h[0] += gj;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::z_brute;
    use crate::instance::Edge;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn log_series_examples() {
        let one_plus_z = vec![q(1, 1), q(1, 1)];
        assert_eq!(log_taylor_from_coeffs(&one_plus_z, 3).unwrap(), vec![q(0, 1), q(1, 1), q(-1, 2), q(1, 3)]);
        let square = vec![q(1, 1), q(2, 1), q(1, 1)];
        assert_eq!(log_taylor_from_coeffs(&square, 2).unwrap(), vec![q(0, 1), q(2, 1), q(-1, 1)]);
        let c = log_taylor_complex(&[Complex64::new(5.0, 0.0)], 3).unwrap();
        assert_eq!(c, vec![Complex64::new(5f64.ln(), 0.0), Complex64::zero(), Complex64::zero(), Complex64::zero()]);
        assert!(log_taylor_from_coeffs(&[q(0, 1), q(1, 1)], 2).is_err());
    }

    #[test]
    fn bounds() {
        assert!((disk_truncation_bound(10, 2.0, 3).unwrap() - 0.3125).abs() < 1e-15);
        assert!((disk_truncation_bound(1, 2.0, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!(disk_truncation_bound(1, 1.0, 0).is_err());
        assert!(disk_truncation_bound(5, 1.5, 4).unwrap() > disk_truncation_bound(5, 1.5, 5).unwrap());
        assert_eq!(choose_m_disk(100, 1.1, 0.01, 0.1).unwrap(), 97);
        let n = 100usize;
        assert!(choose_m_disk(n, 1.1, n as f64 / std::f64::consts::E, 0.1).is_err());
        assert!(choose_m_disk(n, 1.2, 0.01, 0.1).is_err());
        let c = 0.1;
        let alpha = n as f64 / std::f64::consts::E * (1.0 - 1e-12);
        assert_eq!(choose_m_disk(n, 1.0 + c, alpha, c).unwrap(), (1.0 / c.ln_1p()).ceil() as usize);
    }

    #[test]
    fn composition_matches_direct_evaluation() {
        let g = vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0), Complex64::new(-0.25, 0.1)];
        let p = vec![0.0, 0.7, 0.3];
        let h = compose_truncated(&g, &p, 10);
        let z = Complex64::new(0.3, -0.2);
        let pz = p[1] * z + p[2] * z * z;
        let direct = g[0] + g[1] * pz + g[2] * pz * pz;
        let via: Complex64 = h.iter().rev().fold(Complex64::zero(), |acc, &c| acc * z + c);
        assert!((direct - via).norm() < 1e-14);
    }

    #[test]
    fn edgeless_is_exact() {
        let inst = UgInstance::new(4, 5, vec![]).unwrap();
        let r = approx_log_z_interp(&inst, 1.5, 0.1, 0.01, ZeroFreeCertificate::EmpiricalRoots, &Budget::default()).unwrap();
        assert_eq!(r.log_xi.log_abs, 5.0 * 4f64.ln());
    }

    #[test]
    fn single_edge_pipeline() {
        let b = Budget::default();
        let inst = UgInstance::new(3, 2, vec![Edge::new(0, 1, vec![1, 0, 2])]).unwrap();
        let w_star = 1.0 + (3f64.ln() - 1.0) / 3.0;
        let eta = empirical_zero_free(&inst, w_star, &b).unwrap();
        let s = w_star - 1.0;
        let r = approx_log_z_interp(&inst, w_star, (0.9 * eta).min(0.99 * s), 0.01, ZeroFreeCertificate::EmpiricalRoots, &b).unwrap();
        let exact = z_brute(&inst, Complex64::new(w_star, 0.0), &b).unwrap().re.ln();
        assert!((r.log_xi.log_abs - exact).abs() <= 0.01, "{} vs {exact}", r.log_xi.log_abs);
        assert!(r.log_xi.phase.abs() < 1e-9);
    }

    #[test]
    fn parameter_guards() {
        let inst = UgInstance::new(3, 2, vec![Edge::new(0, 1, vec![1, 0, 2])]).unwrap();
        let b = Budget::default();
        assert!(approx_log_z_interp(&inst, 1.1, 0.2, 0.01, ZeroFreeCertificate::AssumedByTheorem, &b).is_err());
        assert!(approx_log_z_interp(&inst, 1.1, 0.05, 0.01, ZeroFreeCertificate::AssumedByTheorem, &b).is_err());
        assert!(strip_terms(10, 0.5, 0.0).is_err());
    }
}
