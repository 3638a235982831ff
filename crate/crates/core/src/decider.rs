//! Count Unique Games decisions from an approximation of `log Z(G; w)`.
//!
//! In the yes case there are at least `(fk)^n` colorings of value at least
//! `1 − ε`, so `Z ≥ (fk)^n w^((1−ε)|E|)`. In the no case every coloring has
//! value at most `δ`, so `Z ≤ k^n w^(δ|E|)`. Given `ξ` with
//! `|log ξ − log Z| ≤ α`, the two cases confine `log ξ` to disjoint
//! intervals once `log w` exceeds the threshold below.

use serde::{Deserialize, Serialize};

use crate::config::Budget;
use crate::error::{Error, Result};
use crate::exact::{log_z_real, z_coeffs_sat};
use crate::instance::UgInstance;

/// Promise parameters: `f` scales the number of good colorings, `ε` bounds
/// their violated fraction, `δ` bounds the value in the no case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CugParams {
    pub f: f64,
    pub eps: f64,
    pub delta: f64,
    pub k: usize,
}

impl CugParams {
    pub fn new(f: f64, eps: f64, delta: f64, k: usize) -> Result<Self> {
        let p = Self { f, eps, delta, k };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f > 0.0 && self.f <= 1.0) {
            return Err(Error::param(format!("f must lie in (0, 1], got {}", self.f)));
        }
        if !(self.eps >= 0.0 && self.delta >= 0.0) {
            return Err(Error::param("ε and δ must be non-negative"));
        }
        if !(1.0 - self.eps > self.delta) {
            return Err(Error::param(format!(
                "need 1 − ε > δ, got ε = {}, δ = {}",
                self.eps, self.delta
            )));
        }
        if self.k < 2 {
            return Err(Error::param("k must be at least 2"));
        }
        if self.f * (self.k as f64) < 1.0 - 1e-12 {
            return Err(Error::param(format!("need f·k ≥ 1, got {}", self.f * self.k as f64)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    /// Consistent only with the yes case: many colorings of high value.
    ManySatisfying,
    /// Consistent only with the no case: every coloring has low value.
    AllLowValue,
    /// The two intervals overlap, so `ξ` cannot separate the cases.
    Inconclusive,
}

/// A closed interval on the extended real line; `None` ends are infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower.map_or(true, |l| x >= l) && self.upper.map_or(true, |u| x <= u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub verdict: VerdictKind,
    pub w: f64,
    pub log_xi: f64,
    pub threshold_log_w: f64,
    /// Where `log ξ` must lie in the yes case.
    pub yes_interval: Interval,
    /// Where `log ξ` must lie in the no case.
    pub no_interval: Interval,
    pub method: String,
    pub alpha: f64,
    /// True when `log ξ` fell strictly between the intervals, which only a
    /// non-promise instance can cause; the verdict then follows the nearer
    /// interval.
    pub outside_promise: bool,
}

/// `log w` must exceed `(n log(1/f) + 2α) / ((1 − ε − δ)|E|)`.
pub fn threshold_log_w(n: usize, edges: usize, params: &CugParams, alpha: f64) -> Result<f64> {
    params.validate()?;
    if edges == 0 {
        return Err(Error::param("threshold needs at least one edge"));
    }
    if !(alpha >= 0.0) {
        return Err(Error::param("α must be non-negative"));
    }
    let denom = (1.0 - params.eps - params.delta) * edges as f64;
    if !(denom > 0.0) {
        return Err(Error::param("degenerate denominator (1 − ε − δ)|E|"));
    }
    Ok((n as f64 * (1.0 / params.f).ln() + 2.0 * alpha) / denom)
}

/// Relative padding applied outward to both intervals.
const PAD: f64 = 1e-12;

fn pad(x: f64) -> f64 {
    PAD * (1.0 + x.abs())
}

pub fn decide_cug(
    inst: &UgInstance,
    params: &CugParams,
    w: f64,
    log_xi: f64,
    alpha: f64,
    method: &str,
) -> Result<Verdict> {
    params.validate()?;
    if params.k != inst.k() {
        return Err(Error::param(format!("params are for k = {}, instance has k = {}", params.k, inst.k())));
    }
    if !(w > 1.0) || !w.is_finite() {
        return Err(Error::param(format!("w must exceed 1, got {w}")));
    }
    if !log_xi.is_finite() {
        return Err(Error::param("log ξ must be finite"));
    }
    let threshold = threshold_log_w(inst.n(), inst.edge_count(), params, alpha)?;
    let n = inst.n() as f64;
    let e = inst.edge_count() as f64;
    let log_w = w.ln();
    let log_k = (params.k as f64).ln();

    let yes_lower = n * (params.f * params.k as f64).ln() + (1.0 - params.eps) * e * log_w - alpha;
    let no_upper = n * log_k + params.delta * e * log_w + alpha;
    let yes_lower = yes_lower - pad(yes_lower);
    let no_upper = no_upper + pad(no_upper);
    let yes_interval = Interval { lower: Some(yes_lower), upper: None };
    let no_interval = Interval { lower: None, upper: Some(no_upper) };

    let mut outside_promise = false;
    let verdict = if yes_lower <= no_upper {
        VerdictKind::Inconclusive
    } else if yes_interval.contains(log_xi) {
        VerdictKind::ManySatisfying
    } else if no_interval.contains(log_xi) {
        VerdictKind::AllLowValue
    } else {
        outside_promise = true;
        if log_xi >= 0.5 * (yes_lower + no_upper) {
            VerdictKind::ManySatisfying
        } else {
            VerdictKind::AllLowValue
        }
    };
    Ok(Verdict {
        verdict,
        w,
        log_xi,
        threshold_log_w: threshold,
        yes_interval,
        no_interval,
        method: method.to_string(),
        alpha,
        outside_promise,
    })
}

/// `log Z(G; w)` exactly (up to the final logarithm) from the coloring
/// histogram, for real `w > 0`.
pub fn exact_log_z(inst: &UgInstance, w: f64, budget: &Budget) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::param("w must be positive"));
    }
    Ok(log_z_real(&z_coeffs_sat(inst, budget)?, w.ln()))
}

/// Smallest `f` covered by the interpolation route: `k^(ε+δ−1/2)`.
pub fn feasible_f_interp(k: usize, eps: f64, delta: f64) -> Result<f64> {
    check_eps_delta(eps, delta)?;
    Ok((k as f64).powf(eps + delta - 0.5))
}

/// Threshold for the cluster-expansion route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterFeasibility {
    /// `k^(2ε+2δ−1)`.
    pub f: f64,
    /// Whether `log k ≥ Δ^(3/2) log Δ`.
    pub in_regime: bool,
}

pub fn feasible_f_cluster(k: usize, delta_deg: usize, eps: f64, delta: f64) -> Result<ClusterFeasibility> {
    check_eps_delta(eps, delta)?;
    Ok(ClusterFeasibility {
        f: (k as f64).powf(2.0 * eps + 2.0 * delta - 1.0),
        in_regime: cluster_regime((k as f64).ln(), delta_deg),
    })
}

/// `log k ≥ Δ^(3/2) log Δ`, for `log k` given directly.
pub fn cluster_regime(log_k: f64, delta_deg: usize) -> bool {
    let d = delta_deg as f64;
    log_k >= d.powf(1.5) * d.ln()
}

fn check_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if !(eps >= 0.0 && delta >= 0.0 && 1.0 - eps > delta) {
        return Err(Error::param(format!("need ε, δ ≥ 0 and 1 − ε > δ, got ε = {eps}, δ = {delta}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::{identity, triangle};
    use crate::instance::gen_planted;
    use num_rational::Ratio;

    #[test]
    fn threshold_examples() {
        let p = CugParams::new(1.0 / 3.0, 0.1, 0.1, 3).unwrap();
        let t = threshold_log_w(10, 15, &p, 0.0).unwrap();
        assert!((t - 10.0 * 3f64.ln() / 12.0).abs() < 1e-12);
        assert!((t - 0.91551).abs() < 1e-5);
        let one = CugParams::new(1.0, 0.1, 0.1, 3).unwrap();
        assert_eq!(threshold_log_w(10, 15, &one, 0.0).unwrap(), 0.0);
        // Δ-regular form with α = Cn and 2|E| = Δn.
        let (n, deg, c) = (12usize, 4usize, 0.3);
        let general = threshold_log_w(n, n * deg / 2, &p, c * n as f64).unwrap();
        let regular = 2.0 / (1.0 - 0.2) * ((3f64).ln() + 2.0 * c) / deg as f64;
        assert!((general - regular).abs() < 1e-12);
        assert!(threshold_log_w(10, 0, &p, 0.0).is_err());
    }

    #[test]
    fn params_contract() {
        assert!(CugParams::new(0.5, 0.6, 0.4, 3).is_err());
        assert!(CugParams::new(0.1, 0.0, 0.0, 3).is_err());
        assert!(CugParams::new(0.0, 0.0, 0.0, 3).is_err());
        assert!(CugParams::new(0.5, 0.0, 0.0, 3).is_ok());
    }

    #[test]
    fn feasibility_examples() {
        assert!((feasible_f_interp(100, 0.1, 0.1).unwrap() - 0.251189).abs() < 1e-6);
        assert!((feasible_f_interp(49, 0.0, 0.0).unwrap() - 1.0 / 7.0).abs() < 1e-12);
        let c = feasible_f_cluster(100, 16, 0.1, 0.1).unwrap();
        assert!((c.f - 0.0630957).abs() < 1e-6);
        assert!(cluster_regime(200.0, 16));
        assert!(!cluster_regime(100.0, 16));
        assert!((16f64.powf(1.5) * 16f64.ln() - 177.4457).abs() < 1e-3);
    }

    #[test]
    fn decisions() {
        let b = Budget::default();
        let planted = gen_planted(8, 3, 3, Ratio::new(0, 1), 5).unwrap();
        let inst = &planted.instance;
        let p = CugParams::new(1.0 / 3.0, 0.0, 0.0, 3).unwrap();
        let t = threshold_log_w(inst.n(), inst.edge_count(), &p, 0.0).unwrap();
        let w = (t * 1.5).exp();
        let v = decide_cug(inst, &p, w, exact_log_z(inst, w, &b).unwrap(), 0.0, "exact").unwrap();
        assert_eq!(v.verdict, VerdictKind::ManySatisfying);
        assert!(!v.outside_promise);

        let low = w.sqrt().min((t * 0.5).exp());
        let v = decide_cug(inst, &p, low, exact_log_z(inst, low, &b).unwrap(), 0.0, "exact").unwrap();
        assert_eq!(v.verdict, VerdictKind::Inconclusive);

        // k=2 frustrated triangle has value 2/3; with δ = 2/3 it is a no instance.
        let tri = triangle(2, [identity(2), identity(2), vec![1, 0]]);
        let p = CugParams::new(0.5, 0.0, 2.0 / 3.0 + 1e-9, 2).unwrap();
        let t = threshold_log_w(3, 3, &p, 0.0).unwrap();
        let w = (t * 2.0).exp();
        let v = decide_cug(&tri, &p, w, exact_log_z(&tri, w, &b).unwrap(), 0.0, "exact").unwrap();
        assert_eq!(v.verdict, VerdictKind::AllLowValue);
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["verdict"], "all_low_value");
        assert!(json["yes_interval"]["upper"].is_null());
    }
}
