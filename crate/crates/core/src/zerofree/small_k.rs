//! Improved constants for small `k`: the largest `c ≤ 4` for which some `α`
//! satisfies `c e^c/(e^c + k − 1) ≤ α ≤ log((k−2)/(c−2))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper end of the search range for `c`.
pub const C_CAP: f64 = 4.0;

const LAMBDA_GRID: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideChecks {
    /// Largest `1/(4(1−s))` over the admissible `s`, to be at most `1/c`.
    pub p3_max: f64,
    /// AM-GM bound `k/(4(k−1))` on `p5`, to be at most the `p9` value.
    pub p5_bound: f64,
    /// `1/(2 + (k−2)e^{−α})`, to be at most `1/c`.
    pub p9_max: f64,
    /// Largest `((k−2)t² + 2t)/((k−1)t + 1)²` over `t ∈ [1, e^c]`.
    pub p11_max: f64,
    /// `G(λ) = λc/(2 + (k−2)e^{−λα−(1−λ)c})` is non-decreasing on `[0, 1]`.
    pub g_increasing: bool,
    /// `G(1) ≤ 1`.
    pub g_at_one: f64,
    pub all_pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallKRow {
    pub k: usize,
    pub c_k: f64,
    pub alpha_k: f64,
    /// False when `k` lies outside the range `3..=12` covered by the published
    /// table.
    pub tabulated: bool,
    pub side_checks: SideChecks,
}

fn lower(c: f64, k: f64) -> f64 {
    // c e^c/(e^c + k − 1) written to stay finite for large c.
    c / (1.0 + (k - 1.0) * (-c).exp())
}

fn upper(c: f64, k: f64) -> f64 {
    if c <= 2.0 {
        f64::INFINITY
    } else {
        ((k - 2.0) / (c - 2.0)).ln()
    }
}

pub fn solve_small_k_table(k: usize) -> Result<SmallKRow> {
    if k < 3 {
        return Err(Error::param(format!("k must be at least 3, got {k}")));
    }
    let kf = k as f64;
    let gap = |c: f64| lower(c, kf) - upper(c, kf);
    // The lower end increases and the upper end decreases in c, so the
    // feasible set is an interval (0, c_k].
    let c_k = if gap(C_CAP) <= 0.0 {
        C_CAP
    } else {
        let (mut lo, mut hi) = (2.0, C_CAP);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if gap(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        lo
    };
    if !(lower(c_k, kf) <= upper(c_k, kf) + 1e-9) {
        return Err(Error::NoConvergence(format!("no feasible c found for k = {k}")));
    }
    let alpha_k = lower(c_k, kf);
    Ok(SmallKRow {
        k,
        c_k,
        alpha_k,
        tabulated: (3..=12).contains(&k),
        side_checks: side_checks(kf, c_k, alpha_k),
    })
}

fn side_checks(k: f64, c: f64, alpha: f64) -> SideChecks {
    let inv_c = 1.0 / c;
    let tol = 1e-9;
    // s = e^{−λα−(1−λ)c} is largest at λ = 1 since α < c.
    let s_max = (-alpha.min(c)).exp();
    let p3_max = 1.0 / (4.0 * (1.0 - s_max));
    let p5_bound = k / (4.0 * (k - 1.0));
    let p9_max = 1.0 / (2.0 + (k - 2.0) * (-alpha).exp());

    let p11 = |t: f64| ((k - 2.0) * t * t + 2.0 * t) / ((k - 1.0) * t + 1.0).powi(2);
    let t_max = c.exp();
    let p11_max = (0..=LAMBDA_GRID)
        .map(|i| p11(t_max.powf(i as f64 / LAMBDA_GRID as f64)))
        .fold(f64::NEG_INFINITY, f64::max);

    let g = |l: f64| l * c / (2.0 + (k - 2.0) * (-l * alpha - (1.0 - l) * c).exp());
    let gs: Vec<f64> = (0..=LAMBDA_GRID).map(|i| g(i as f64 / LAMBDA_GRID as f64)).collect();
    let g_increasing = gs.windows(2).all(|w| w[1] >= w[0]);
    let g_at_one = gs[LAMBDA_GRID];

    let all_pass = p3_max <= inv_c
        && p5_bound <= p9_max
        && p9_max <= inv_c + tol
        && p11_max <= inv_c
        && g_increasing
        && g_at_one <= 1.0 + tol;
    SideChecks {
        p3_max,
        p5_bound,
        p9_max,
        p11_max,
        g_increasing,
        g_at_one,
        all_pass,
    }
}

/// The table for `ks` in the published layout: a header row of `k` values, then
/// `alpha_k` and `c_k` rows, each rounded to three decimals.
pub fn small_k_csv(ks: &[usize]) -> Result<String> {
    let rows = ks.iter().map(|&k| solve_small_k_table(k)).collect::<Result<Vec<_>>>()?;
    let line = |name: &str, f: &dyn Fn(&SmallKRow) -> String| {
        let cells: Vec<String> = rows.iter().map(f).collect();
        format!("{name},{}\n", cells.join(","))
    };
    Ok([
        line("k", &|r| r.k.to_string()),
        line("alpha_k", &|r| format!("{:.3}", r.alpha_k)),
        line("c_k", &|r| format!("{:.3}", r.c_k)),
    ]
    .concat())
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALPHA: [f64; 10] = [1.767, 1.803, 1.849, 1.896, 1.944, 1.990, 2.034, 2.076, 2.116, 2.154];
    const C: [f64; 10] = [2.171, 2.330, 2.472, 2.600, 2.716, 2.820, 2.916, 3.003, 3.084, 3.160];

    #[test]
    fn reproduces_table() {
        for k in 3..=12 {
            let row = solve_small_k_table(k).unwrap();
            assert!((row.c_k - C[k - 3]).abs() <= 1e-3, "{row:?}");
            assert!((row.alpha_k - ALPHA[k - 3]).abs() <= 1e-3, "{row:?}");
            assert!(row.side_checks.all_pass, "{row:?}");
            assert!(row.tabulated);
        }
    }

    #[test]
    fn csv_layout() {
        let csv = small_k_csv(&[3, 7]).unwrap();
        assert_eq!(csv, "k,3,7\nalpha_k,1.767,1.944\nc_k,2.171,2.716\n");
    }

    #[test]
    fn extrapolation_and_errors() {
        let big = solve_small_k_table(40).unwrap();
        assert!(!big.tabulated);
        assert!(big.c_k > C[9]);
        assert!(solve_small_k_table(2).is_err());
    }
}
