//! The eighteen univariate maximizations that bound the derivative of the
//! recurrence on the boundary of the region `s ≤ x, y, y/x ≤ t`.
//!
//! The three functions
//!
//! ```text
//! f1 = r(xy + y)/(x + ry + 1)²,  f2 = (rxy + 2x)/(x + ry + 1)²,  f3 = (2x + ry)/(x + ry + 1)²
//! ```
//!
//! with `r = k − 2` are restricted to the six boundary pieces `x = s`,
//! `x = t`, `y = s`, `y = t`, `y/x = s`, `y/x = t` (in that order, `f1..f3`
//! within each), giving `p_1, …, p_18`. Since `st = 1` every piece is a
//! segment of one of `[s, 1]` or `[1, t]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack `δ` in `s = cos(δ) e k^{d/(2Δ)−1}`.
pub const SLACK_DELTA: f64 = 0.5;

const GRID: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemMax {
    /// 1-based problem index.
    pub index: usize,
    /// Maximizing value of the free coordinate.
    pub argmax: f64,
    pub max: f64,
    /// `max` plus a padding for the grid spacing.
    pub padded: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PBoundReport {
    pub k: usize,
    pub delta: usize,
    pub d: usize,
    pub s: f64,
    pub t: f64,
    /// `3 e^{−1} k^{−d/(2Δ)}`.
    pub bound: f64,
    pub problems: Vec<ProblemMax>,
    pub worst: f64,
    pub passed: bool,
}

#[derive(Clone, Copy)]
enum Piece {
    X(f64),
    Y(f64),
    Ratio(f64),
}

fn f_all(r: f64, x: f64, y: f64) -> [f64; 3] {
    let den = (x + r * y + 1.0).powi(2);
    [r * (x * y + y) / den, (r * x * y + 2.0 * x) / den, (2.0 * x + r * y) / den]
}

fn eval(piece: Piece, which: usize, r: f64, u: f64) -> f64 {
    let (x, y) = match piece {
        Piece::X(v) => (v, u),
        Piece::Y(v) => (u, v),
        Piece::Ratio(v) => (u, v * u),
    };
    f_all(r, x, y)[which]
}

/// Maximizes `g` over `[lo, hi]` on a log-spaced grid refined by golden
/// section. The padding is half a grid step times twice the steepest
/// sampled slope in `log u`.
fn maximize(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64, f64) {
    let (a, b) = (lo.ln(), hi.ln());
    if b - a <= 0.0 {
        let v = g(lo);
        return (lo, v, v);
    }
    let h = (b - a) / GRID as f64;
    let vals: Vec<f64> = (0..=GRID).map(|i| g((a + h * i as f64).exp())).collect();
    let (best, &grid_max) = vals
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty grid");
    let slope = vals.windows(2).map(|w| (w[1] - w[0]).abs() / h).fold(0.0, f64::max);

    let (mut l, mut r) = (a + h * best.saturating_sub(1) as f64, (a + h * (best + 1) as f64).min(b));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let gl = |u: f64| g(u.exp());
    let (mut c, mut d) = (r - phi * (r - l), l + phi * (r - l));
    let (mut gc, mut gd) = (gl(c), gl(d));
    for _ in 0..100 {
        if gc >= gd {
            r = d;
            d = c;
            gd = gc;
            c = r - phi * (r - l);
            gc = gl(c);
        } else {
            l = c;
            c = d;
            gc = gd;
            d = l + phi * (r - l);
            gd = gl(d);
        }
    }
    let (arg, refined) = if gc >= gd { (c, gc) } else { (d, gd) };
    let (arg, max) = if refined >= grid_max { (arg.exp(), refined) } else { ((a + h * best as f64).exp(), grid_max) };
    (arg, max, max.max(grid_max + slope * h))
}

pub fn maximize_p_bound(k: usize, delta: usize, d: usize) -> Result<PBoundReport> {
    if k < 7 {
        return Err(Error::param(format!("the eighteen-problem bound needs k ≥ 7, got {k}")));
    }
    if delta == 0 || d > delta {
        return Err(Error::param(format!("need 0 ≤ d ≤ Δ and Δ ≥ 1, got d = {d}, Δ = {delta}")));
    }
    let kf = k as f64;
    let r = kf - 2.0;
    let e = std::f64::consts::E;
    let lam = d as f64 / (2.0 * delta as f64);
    let s = SLACK_DELTA.cos() * e * kf.powf(lam - 1.0);
    let t = kf.powf(1.0 - lam) / (e * SLACK_DELTA.cos());
    let bound = 3.0 / e * kf.powf(-lam);

    let pieces = [
        (Piece::X(s), s, 1.0),
        (Piece::X(t), 1.0, t),
        (Piece::Y(s), s, 1.0),
        (Piece::Y(t), 1.0, t),
        (Piece::Ratio(s), 1.0, t),
        (Piece::Ratio(t), s, 1.0),
    ];
    let mut problems = Vec::with_capacity(18);
    for (pi, &(piece, lo, hi)) in pieces.iter().enumerate() {
        for which in 0..3 {
            let (argmax, max, padded) = maximize(|u| eval(piece, which, r, u), lo, hi);
            problems.push(ProblemMax {
                index: 3 * pi + which + 1,
                argmax,
                max,
                padded,
            });
        }
    }
    let worst = problems.iter().map(|p| p.padded).fold(f64::NEG_INFINITY, f64::max);
    Ok(PBoundReport {
        k,
        delta,
        d,
        s,
        t,
        bound,
        problems,
        worst,
        passed: worst <= bound,
    })
}

/// Maximum of `y ↦ f1(x, y)` over `y > 0` for fixed `x`, with its argmax.
/// The maximum is `1/4`, attained on the line `x + 1 = (k − 2) y`.
pub fn f1_line_max(k: usize, x: f64) -> Result<(f64, f64)> {
    if k < 3 || !(x > 0.0) {
        return Err(Error::param("need k ≥ 3 and x > 0"));
    }
    let r = k as f64 - 2.0;
    let centre = (x + 1.0) / r;
    let (arg, max, _) = maximize(|y| f_all(r, x, y)[0], centre * 1e-3, centre * 1e3);
    Ok((arg, max))
}
