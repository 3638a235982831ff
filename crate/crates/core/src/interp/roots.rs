//! Polynomial roots by Aberth–Ehrlich iteration and the resulting empirical
//! zero-free radius around a real segment.

use num_complex::Complex64;
use num_traits::Zero;

use crate::config::Budget;
use crate::error::{Error, Result};
use crate::exact::{ln_biguint, z_coeffs_sat};
use crate::instance::UgInstance;

const MAX_ITERATIONS: usize = 2000;

/// All complex roots of `Σ coeffs[i] x^i`, with multiplicity.
///
/// Trailing zero coefficients are dropped; leading zeros contribute roots at
/// the origin. Coefficients are rescaled by a power of the variable first so
/// that their magnitudes are balanced.
pub fn poly_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::param("polynomial coefficients must be finite"));
    }
    let top = match coeffs.iter().rposition(|&c| c != 0.0) {
        Some(t) => t,
        None => return Err(Error::param("the zero polynomial has no isolated roots")),
    };
    let low = coeffs.iter().position(|&c| c != 0.0).expect("non-zero coefficient exists");
    let mut roots = vec![Complex64::zero(); low];
    let core: Vec<f64> = coeffs[low..=top].to_vec();
    roots.extend(aberth(&core)?);
    Ok(roots)
}

fn aberth(c: &[f64]) -> Result<Vec<Complex64>> {
    let n = c.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    // Monic, then start on a circle whose radius is the geometric mean of the
    // root moduli (|c0/cn|^(1/n)), slightly rotated off the real axis.
    let lead = c[n];
    let monic: Vec<f64> = c.iter().map(|x| x / lead).collect();
    let radius = monic[0].abs().powf(1.0 / n as f64).max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(radius, std::f64::consts::TAU * i as f64 / n as f64 + 0.4))
        .collect();
    let dmonic: Vec<f64> = (1..=n).map(|i| monic[i] * i as f64).collect();
    let eval = |p: &[f64], x: Complex64| p.iter().rev().fold(Complex64::zero(), |acc, &a| acc * x + a);

    for _ in 0..MAX_ITERATIONS {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let p = eval(&monic, z[i]);
            let dp = eval(&dmonic, z[i]);
            if p == Complex64::zero() {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1e-300));
            }
        }
        if max_step < 1e-15 {
            return Ok(z);
        }
    }
    let residual = z.iter().map(|&x| eval(&monic, x).norm()).fold(0.0, f64::max);
    if residual < 1e-9 {
        return Ok(z);
    }
    Err(Error::NoConvergence(format!(
        "Aberth iteration did not settle after {MAX_ITERATIONS} sweeps (max residual {residual:e})"
    )))
}

/// Distance from `z` to the real segment between `a` and `b`.
pub fn distance_to_segment(z: Complex64, a: f64, b: f64) -> f64 {
    let (lo, hi) = (a.min(b), a.max(b));
    let x = z.re.clamp(lo, hi);
    (z - Complex64::new(x, 0.0)).norm()
}

/// Smallest distance from any root of `Z(G; w)` (in `w`) to the segment
/// `[1, w*]`; `+∞` when `Z` is constant.
pub fn empirical_zero_free(inst: &UgInstance, w_star: f64, budget: &Budget) -> Result<f64> {
    if !w_star.is_finite() {
        return Err(Error::param("w* must be finite"));
    }
    let c = z_coeffs_sat(inst, budget)?;
    // Rescale to keep the coefficients in range: divide by the largest.
    let logs: Vec<f64> = c.iter().map(ln_biguint).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = logs.iter().map(|&l| (l - max).exp()).collect();
    if scaled.iter().rposition(|&x| x != 0.0).unwrap_or(0) == 0 {
        return Ok(f64::INFINITY);
    }
    let roots = poly_roots(&scaled)?;
    Ok(roots
        .iter()
        .map(|&r| distance_to_segment(r, 1.0, w_star))
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Edge;

    #[test]
    fn known_roots() {
        // (x − 1)(x + 2)(x − 3i)(x + 3i) = (x² + x − 2)(x² + 9)
        let roots = poly_roots(&[-18.0, 9.0, 7.0, 1.0, 1.0]).unwrap();
        for want in [Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.0), Complex64::new(0.0, 3.0), Complex64::new(0.0, -3.0)] {
            assert!(roots.iter().any(|r| (r - want).norm() < 1e-10), "{want} missing from {roots:?}");
        }
        let with_zero = poly_roots(&[0.0, 0.0, 2.0, 2.0, 0.0]).unwrap();
        assert_eq!(with_zero.len(), 3);
        assert!(with_zero.iter().filter(|r| r.norm() == 0.0).count() == 2);
        assert!(poly_roots(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn segment_distance() {
        assert_eq!(distance_to_segment(Complex64::new(-2.0, 0.0), 1.0, 1.5), 3.0);
        assert_eq!(distance_to_segment(Complex64::new(1.2, 0.5), 1.0, 1.5), 0.5);
        assert_eq!(distance_to_segment(Complex64::new(2.5, 0.0), 1.5, 1.0), 1.0);
    }

    #[test]
    fn zero_free_examples() {
        let b = Budget::default();
        let empty = UgInstance::new(3, 3, vec![]).unwrap();
        assert_eq!(empirical_zero_free(&empty, 1.03, &b).unwrap(), f64::INFINITY);
        let single = UgInstance::new(3, 2, vec![Edge::new(0, 1, vec![0, 2, 1])]).unwrap();
        let w_star = 1.0 + (3f64.ln() - 1.0) / 3.0;
        assert!((empirical_zero_free(&single, w_star, &b).unwrap() - 3.0).abs() < 1e-12);
    }
}
