//! Numeric side of the zero-free region for the ferromagnetic Potts-type
//! recurrence: the constants that define the region, the ratio map `R_k`,
//! the region `K_d` it is shown to preserve, and the auxiliary bounds used
//! to establish that.
//!
//! The standard notation reuses `α`, `ε`, `δ` both for Unique Games parameters and for
//! angle and slack constants. Here the latter are `angle_alpha`, `angle_eps`
//! and `slack_delta`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod invariant;
mod pbound;
mod phase;
mod small_k;

pub use invariant::{check_forward_invariant, InvariantReport, InvariantSample};
pub use pbound::{f1_line_max, maximize_p_bound, PBoundReport, ProblemMax};
pub use phase::{phase_point, phase_w_o, phase_w_u, PhasePoint, WuSolution};
pub use small_k::{small_k_csv, solve_small_k_table, SideChecks, SmallKRow};

/// The constants `(c, angle_alpha, θ, angle_eps, η, w*)` for a given
/// `(k, Δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroFreeConstants {
    pub k: usize,
    pub delta: usize,
    /// `log k − 1`.
    pub c: f64,
    /// `log √k − 1`; negative for `k ≤ 7`.
    pub angle_alpha: f64,
    /// `1/(5Δ)`.
    pub theta: f64,
    /// `θ / (100 log k)`.
    pub angle_eps: f64,
    /// Width of the zero-free neighborhood of `[1, w*]`.
    pub eta: f64,
    /// `1 + c/Δ`.
    pub w_star: f64,
    /// Set when `angle_alpha ≤ 0`, which leaves the modulus band of `K_d`
    /// ill-ordered. Small `k` is handled by [`solve_small_k_table`].
    pub angle_alpha_flagged: bool,
}

pub fn constants(k: usize, delta: usize) -> Result<ZeroFreeConstants> {
    if k < 3 {
        return Err(Error::param(format!("k must be at least 3, got {k}")));
    }
    if delta < 3 {
        return Err(Error::param(format!("Δ must be at least 3, got {delta}")));
    }
    let log_k = (k as f64).ln();
    let d = delta as f64;
    let c = log_k - 1.0;
    let a = 0.5 * log_k - 1.0;
    let theta = 1.0 / (5.0 * d);
    let eta = (d * c / (800.0 * (d + a).powi(2)))
        .min(1.0 / (2400.0 * (d + a)))
        .min(c / (800.0 * d));
    Ok(ZeroFreeConstants {
        k,
        delta,
        c,
        angle_alpha: a,
        theta,
        angle_eps: theta / (100.0 * log_k),
        eta,
        w_star: 1.0 + c / d,
        angle_alpha_flagged: a <= 0.0,
    })
}

impl ZeroFreeConstants {
    pub fn region(&self, d: usize) -> Result<RegionK> {
        RegionK::new(self, d)
    }

    /// Bound `1 + angle_alpha/Δ` on `|R|` and `1/|R|` for ratios leaving `K_d`.
    pub fn ratio_modulus_bound(&self) -> f64 {
        1.0 + self.angle_alpha / self.delta as f64
    }
}

/// The region `K_d`: a cone around the positive real axis intersected with an
/// annulus. The cone half-angle is `dθ + (Δ−d)·angle_eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionK {
    pub theta: f64,
    pub d: usize,
    pub c: f64,
    pub angle_alpha: f64,
    pub angle_eps: f64,
    pub delta: usize,
}

impl RegionK {
    pub fn new(k: &ZeroFreeConstants, d: usize) -> Result<Self> {
        if d > k.delta {
            return Err(Error::param(format!("d = {d} exceeds Δ = {}", k.delta)));
        }
        Ok(Self {
            theta: k.theta,
            d,
            c: k.c,
            angle_alpha: k.angle_alpha,
            angle_eps: k.angle_eps,
            delta: k.delta,
        })
    }

    pub fn max_angle(&self) -> f64 {
        self.d as f64 * self.theta + (self.delta - self.d) as f64 * self.angle_eps
    }

    /// `log` of the upper modulus bound; the lower bound is its negative.
    pub fn log_modulus_bound(&self) -> f64 {
        let dl = self.delta as f64;
        let d = self.d as f64;
        (dl - d) * (self.c / dl).ln_1p() + d * (self.angle_alpha / dl).ln_1p()
    }

    pub fn modulus_bounds(&self) -> (f64, f64) {
        let l = self.log_modulus_bound();
        ((-l).exp(), l.exp())
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let m = z.norm();
        if !(m > 0.0) {
            return false;
        }
        let l = self.log_modulus_bound();
        let lm = m.ln();
        -l <= lm && lm <= l && z.arg().abs() <= self.max_angle()
    }
}

/// `R_k(z_0, z_1, …, z_{k−2}; w) = (w z_0 + Σ z_i + 1) / (z_0 + Σ z_i + w)`.
pub fn ratio_r(z0: Complex64, zs: &[Complex64], w: Complex64, k: usize) -> Result<Complex64> {
    if k < 2 || zs.len() != k - 2 {
        return Err(Error::param(format!("expected k − 2 = {} further arguments, got {}", k.saturating_sub(2), zs.len())));
    }
    let sum: Complex64 = zs.iter().sum();
    let den = z0 + sum + w;
    if den.norm() == 0.0 {
        return Err(Error::param("R_k denominator vanishes"));
    }
    Ok((w * z0 + sum + 1.0) / den)
}

/// The two-variable form `R(z_0, z; w, k) = R_k(z_0, z, …, z; w)`.
pub fn ratio_r2(z0: Complex64, z: Complex64, w: Complex64, k: usize) -> Result<Complex64> {
    if k < 2 {
        return Err(Error::param("k must be at least 2"));
    }
    let r = (k - 2) as f64;
    let den = z0 + r * z + w;
    if den.norm() == 0.0 {
        return Err(Error::param("R denominator vanishes"));
    }
    Ok((w * z0 + r * z + 1.0) / den)
}

/// Real and imaginary parts of `R(x e^{iθx}, y e^{iθy}; w, k)` multiplied
/// by the positive factor `|x e^{iθx} + (k−2) y e^{iθy} + w|²`.
pub fn ratio_parts(x: f64, y: f64, theta_x: f64, theta_y: f64, w: f64, k: usize) -> (f64, f64) {
    let r = k as f64 - 2.0;
    let re = w * x * x
        + (w + 1.0) * r * x * y * (theta_x - theta_y).cos()
        + r * r * y * y
        + (w * w + 1.0) * x * theta_x.cos()
        + (w + 1.0) * r * y * theta_y.cos()
        + w;
    let im = (w - 1.0)
        * (r * x * y * (theta_x - theta_y).sin() + (1.0 + w) * x * theta_x.sin() + r * y * theta_y.sin());
    (re, im)
}

/// Barvinok's cone lemma: if the pairwise angles between non-zero `vectors`
/// are at most `angle < 2π/3` then `|Σ u| ≥ cos(angle/2) Σ |u|`.
///
/// Returns whether the inequality holds. Fails if `angle` is out of range or
/// if the vectors are not in fact confined to such a cone.
pub fn cone_sum_check(vectors: &[Complex64], angle: f64) -> Result<bool> {
    if !(angle >= 0.0 && angle < 2.0 * std::f64::consts::FRAC_PI_3) {
        return Err(Error::param(format!("cone angle must lie in [0, 2π/3), got {angle}")));
    }
    let nonzero: Vec<Complex64> = vectors.iter().copied().filter(|u| u.norm() > 0.0).collect();
    for (i, u) in nonzero.iter().enumerate() {
        for v in &nonzero[i + 1..] {
            if angle_between(*u, *v) > angle + 1e-12 {
                return Err(Error::Precondition(format!(
                    "vectors {u} and {v} are more than {angle} apart"
                )));
            }
        }
    }
    let total: f64 = nonzero.iter().map(|u| u.norm()).sum();
    let sum: Complex64 = nonzero.iter().sum();
    Ok(sum.norm() >= (angle / 2.0).cos() * total * (1.0 - 1e-12))
}

/// For `z`, `z'` at an angle of at most `π/3`, `|z − z'| ≤ max(|z|, |z'|)`.
pub fn small_angle_diff(z: Complex64, z2: Complex64) -> Result<bool> {
    if z.norm() > 0.0 && z2.norm() > 0.0 && angle_between(z, z2) > std::f64::consts::FRAC_PI_3 + 1e-12 {
        return Err(Error::Precondition("the two numbers are more than π/3 apart".into()));
    }
    Ok((z - z2).norm() <= z.norm().max(z2.norm()) * (1.0 + 1e-12))
}

fn angle_between(u: Complex64, v: Complex64) -> f64 {
    (v / u).arg().abs()
}
