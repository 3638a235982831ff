//! Monte Carlo check that `R_k` maps `K_d`-consistent inputs into the
//! thin region `(1+a/Δ)^{−1} < |R| < 1+a/Δ`, `|arg R| < θ`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{constants, ratio_r};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantSample {
    pub w: Complex64,
    pub z0: Complex64,
    pub ratio: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub k: usize,
    pub delta: usize,
    pub d: usize,
    pub samples: usize,
    pub seed: u64,
    pub violations: usize,
    /// Smallest `log(1+a/Δ) − |log|R||` seen; positive means inside.
    pub worst_modulus_margin: f64,
    /// Smallest `θ − |arg R|` seen.
    pub worst_angle_margin: f64,
    /// The sample with the smallest combined margin.
    pub worst: Option<InvariantSample>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Draws `samples` inputs `(z_0, …, z_{k−2}, w)` and evaluates `R_k`.
///
/// The `z_i` are confined to a window of log-moduli of length at most `log U`
/// and a window of angles of width at most the cone angle of `K_d`, both
/// placed inside `K_d`, so that every `z_i` and every ratio `z_i/z_j` lies in
/// `K_d`. A quarter of the coordinates sit on each edge of the windows. The
/// activity `w` is uniform on the `η`-neighborhood of `[1, 1 + c/Δ]` swept by
/// disks centred on the segment.
///
/// Each sample draws from its own stream so the report does not depend on
/// the thread count.
pub fn check_forward_invariant(k: usize, delta: usize, d: usize, samples: usize, seed: u64) -> Result<InvariantReport> {
    let kc = constants(k, delta)?;
    if kc.angle_alpha_flagged {
        return Err(Error::Precondition(format!(
            "angle_alpha = {} is not positive for k = {k}",
            kc.angle_alpha
        )));
    }
    let region = kc.region(d)?;
    let log_bound = kc.ratio_modulus_bound().ln();
    let log_u = region.log_modulus_bound();
    let max_angle = region.max_angle();

    let outcome = par::map_range(samples, |i| -> Result<(f64, f64, InvariantSample)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let lo = rng.gen_range(-log_u..=0.0);
        let phi0 = rng.gen_range(-max_angle..=0.0);
        let draw = |rng: &mut ChaCha8Rng| {
            let pick = |rng: &mut ChaCha8Rng, width: f64| match rng.gen_range(0..4) {
                0 => 0.0,
                1 => width,
                _ => rng.gen_range(0.0..=width),
            };
            let lm = lo + pick(rng, log_u);
            let ang = phi0 + pick(rng, max_angle);
            Complex64::from_polar(lm.exp(), ang)
        };
        let z0 = draw(&mut rng);
        let zs: Vec<Complex64> = (0..k - 2).map(|_| draw(&mut rng)).collect();
        let t = rng.gen_range(1.0..=kc.w_star);
        let u: f64 = rng.gen();
        let phi = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let w = t + Complex64::from_polar(kc.eta * u.sqrt(), phi);
        let ratio = ratio_r(z0, &zs, w, k)?;
        let mod_margin = log_bound - ratio.norm().ln().abs();
        let ang_margin = kc.theta - ratio.arg().abs();
        Ok((mod_margin, ang_margin, InvariantSample { w, z0, ratio }))
    });

    let mut report = InvariantReport {
        k,
        delta,
        d,
        samples,
        seed,
        violations: 0,
        worst_modulus_margin: f64::INFINITY,
        worst_angle_margin: f64::INFINITY,
        worst: None,
    };
    let mut worst_score = f64::INFINITY;
    for r in outcome {
        let (m, a, sample) = r?;
        if !(m > 0.0 && a > 0.0) {
            report.violations += 1;
        }
        report.worst_modulus_margin = report.worst_modulus_margin.min(m);
        report.worst_angle_margin = report.worst_angle_margin.min(a);
        let score = (m / log_bound).min(a / kc.theta);
        if score < worst_score {
            worst_score = score;
            report.worst = Some(sample);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_violations_in_small_sweep() {
        for d in [0, 5, 10] {
            let r = check_forward_invariant(21, 10, d, 500, 7).unwrap();
            assert!(r.passed(), "{r:?}");
            assert!(r.worst_modulus_margin > 0.0 && r.worst_angle_margin > 0.0);
        }
    }

    #[test]
    fn deterministic_and_guarded() {
        let a = check_forward_invariant(30, 12, 3, 200, 11).unwrap();
        let b = check_forward_invariant(30, 12, 3, 200, 11).unwrap();
        assert_eq!(a, b);
        assert!(check_forward_invariant(5, 10, 0, 10, 0).is_err());
        assert!(check_forward_invariant(21, 10, 11, 10, 0).is_err());
    }
}
