//! Reference thresholds of the ferromagnetic Potts model on the infinite
//! `Δ`-regular tree.
//!
//! `w_u` is the unique `w` for which
//! `P(x) = (k−1)x^Δ + (2−w−k)x^{Δ−1} + wx − 1` has a double root in `(0, 1)`.
//! Since `P` is affine in `w`, solving `P = 0` for `w` gives
//! `w(x) = [1 − (k−1)x^Δ + (k−2)x^{Δ−1}] / (x − x^{Δ−1})`, and the double root
//! sits at the interior minimum of `w(x)`. That minimum is located on a grid,
//! refined by golden section and then polished by Newton's method on
//! `P = P′ = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible residual of `P` and `P′` at the double root.
pub const RESIDUAL_TOL: f64 = 1e-10;

const GRID: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WuSolution {
    pub w_u: f64,
    pub x_star: f64,
    pub residual_p: f64,
    pub residual_dp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub k: usize,
    pub delta: usize,
    pub w_u: f64,
    pub x_star: f64,
    pub residual_p: f64,
    pub residual_dp: f64,
    pub w_o: f64,
}

struct Poly {
    k: f64,
    d: i32,
}

impl Poly {
    fn p(&self, x: f64, w: f64) -> f64 {
        (self.k - 1.0) * x.powi(self.d) + (2.0 - w - self.k) * x.powi(self.d - 1) + w * x - 1.0
    }

    fn dp(&self, x: f64, w: f64) -> f64 {
        let d = self.d as f64;
        d * (self.k - 1.0) * x.powi(self.d - 1) + (d - 1.0) * (2.0 - w - self.k) * x.powi(self.d - 2) + w
    }

    fn ddp(&self, x: f64, w: f64) -> f64 {
        let d = self.d as f64;
        d * (d - 1.0) * (self.k - 1.0) * x.powi(self.d - 2)
            + (d - 1.0) * (d - 2.0) * (2.0 - w - self.k) * x.powi(self.d - 3)
    }

    fn w_of(&self, x: f64) -> f64 {
        (1.0 - (self.k - 1.0) * x.powi(self.d) + (self.k - 2.0) * x.powi(self.d - 1)) / (x - x.powi(self.d - 1))
    }
}

pub fn phase_w_u(k: usize, delta: usize) -> Result<WuSolution> {
    if k < 3 || delta < 3 {
        return Err(Error::param(format!("need k ≥ 3 and Δ ≥ 3, got k = {k}, Δ = {delta}")));
    }
    let poly = Poly {
        k: k as f64,
        d: delta as i32,
    };
    let limit_at_one = (delta + k - 2) as f64 / (delta - 2) as f64;

    // Grid on (0, 1) avoiding the removable singularity at x = 1.
    let xs = |i: usize| 1e-6 + (1.0 - 2e-4 - 1e-6) * i as f64 / GRID as f64;
    let (best, _) = (0..=GRID)
        .map(|i| (i, poly.w_of(xs(i))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty grid");
    if best == GRID {
        return Err(Error::NoConvergence(format!(
            "w(x) has no interior minimum for k = {k}, Δ = {delta} (limit at 1 is {limit_at_one})"
        )));
    }

    let (mut lo, mut hi) = (xs(best.saturating_sub(1)), xs(best + 1));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-12 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if poly.w_of(a) <= poly.w_of(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let mut x = 0.5 * (lo + hi);
    let mut w = poly.w_of(x);

    for _ in 0..50 {
        let (f, g) = (poly.p(x, w), poly.dp(x, w));
        if f.abs() <= 1e-15 && g.abs() <= 1e-15 {
            break;
        }
        // Jacobian of (P, P′) in (x, w).
        let (a, b) = (g, x - x.powi(poly.d - 1));
        let (c, d) = (poly.ddp(x, w), 1.0 - (poly.d - 1) as f64 * x.powi(poly.d - 2));
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (f * d - b * g) / det;
        let dw = (a * g - c * f) / det;
        x -= dx;
        w -= dw;
        if dx.abs() < 1e-16 && dw.abs() < 1e-16 {
            break;
        }
    }
    let sol = WuSolution {
        w_u: w,
        x_star: x,
        residual_p: poly.p(x, w).abs(),
        residual_dp: poly.dp(x, w).abs(),
    };
    if !(x > 0.0 && x < 1.0) || sol.residual_p > RESIDUAL_TOL || sol.residual_dp > RESIDUAL_TOL {
        return Err(Error::NoConvergence(format!(
            "double root bracket [{lo}, {hi}] polished to x = {x}, w = {w} with residuals {:e}, {:e}",
            sol.residual_p, sol.residual_dp
        )));
    }
    if w >= limit_at_one {
        return Err(Error::NoConvergence(format!(
            "interior minimum {w} is not below the limit {limit_at_one} at x = 1"
        )));
    }
    Ok(sol)
}

/// `w_o = (k−2)/((k−1)^{1−2/Δ} − 1)`.
pub fn phase_w_o(k: usize, delta: usize) -> Result<f64> {
    if k < 3 {
        return Err(Error::param(format!("k must be at least 3, got {k}")));
    }
    if delta <= 2 {
        return Err(Error::param(format!("w_o is undefined for Δ = {delta}: the denominator vanishes")));
    }
    let e = 1.0 - 2.0 / delta as f64;
    Ok((k - 2) as f64 / (e * ((k - 1) as f64).ln()).exp_m1())
}

pub fn phase_point(k: usize, delta: usize) -> Result<PhasePoint> {
    let u = phase_w_u(k, delta)?;
    Ok(PhasePoint {
        k,
        delta,
        w_u: u.w_u,
        x_star: u.x_star,
        residual_p: u.residual_p,
        residual_dp: u.residual_dp,
        w_o: phase_w_o(k, delta)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_values() {
        let u = phase_w_u(3, 3).unwrap();
        assert!((u.w_u - (1.0 + 2.0 * 2f64.sqrt())).abs() < 1e-10, "{u:?}");
        assert!((u.w_u - 3.8284271247).abs() < 1e-9);
        let wo = phase_w_o(3, 3).unwrap();
        assert!((wo - 1.0 / (2f64.powf(1.0 / 3.0) - 1.0)).abs() < 1e-12);
        assert!((wo - 3.8473221019).abs() < 1e-9);
        assert!(u.w_u < wo);
    }

    #[test]
    fn residuals_small_grid() {
        for k in 3..=10 {
            for d in 3..=8 {
                let u = phase_w_u(k, d).unwrap();
                assert!(u.residual_p <= RESIDUAL_TOL && u.residual_dp <= RESIDUAL_TOL);
                assert!(u.x_star > 0.0 && u.x_star < 1.0);
            }
        }
    }

    #[test]
    fn asymptotics() {
        let mut spread: Vec<f64> = Vec::new();
        for e in 1..=6 {
            let k = 10usize.pow(e);
            let u = phase_w_u(k, 10).unwrap();
            spread.push(u.w_u.ln() - (k as f64).ln() / 9.0);
        }
        assert!(spread.iter().all(|v| v.abs() < 3.0), "{spread:?}");
        let k = 1e9 as usize;
        let ratio = phase_w_o(k, 10).unwrap() / (k as f64).powf(0.2);
        assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
        assert!(phase_w_o(4, 2).is_err());
        assert!(phase_w_u(3, 2).is_err());
    }
}
