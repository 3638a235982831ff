//! Exact oracles for `Z(G; w)`.
//!
//! Two independent routes: enumerating all `k^n` colorings (giving the
//! histogram `c[i]` of satisfied-edge counts, `Z = Σ c[i] w^i`), and the
//! subgraph expansion `Z = Σ_F (w−1)^|F| Π_components sat_π`, giving
//! `a[j]` with `Z = Σ a[j] (w−1)^j`. Both coefficient vectors are exact.

use std::ops::Range;

use num_bigint::{BigInt, BigUint};
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::config::Budget;
use crate::error::{Error, Result};
use crate::instance::{satisfied_histogram, UgInstance};
use crate::par;
use crate::polymer::SatScratch;

/// Complex rational numbers, for exact evaluation at rational `w`.
pub type ComplexRational = Complex<BigRational>;

/// `c[i]` = number of colorings with exactly `i` satisfied edges.
pub fn z_coeffs_sat(inst: &UgInstance, budget: &Budget) -> Result<Vec<BigUint>> {
    Ok(satisfied_histogram(inst, budget)?
        .into_iter()
        .map(BigUint::from)
        .collect())
}

/// `Z(G; w)` by summing over all colorings.
pub fn z_brute(inst: &UgInstance, w: Complex64, budget: &Budget) -> Result<Complex64> {
    let hist = satisfied_histogram(inst, budget)?;
    Ok(horner_f64(hist.iter().map(|&c| c as f64), w))
}

/// `a[j]` for `0 ≤ j < m`: the sum over `j`-edge subsets `F` of the product
/// of `sat_π` over the connected components of `(V, F)`, where isolated
/// vertices contribute `k`.
pub fn z_coeffs_subgraph(inst: &UgInstance, m: usize, budget: &Budget) -> Result<Vec<BigUint>> {
    let e = inst.edge_count();
    let top = m.min(e + 1);
    let mut needed = 0f64;
    for j in 0..top {
        needed += binomial_f64(e, j);
    }
    if needed > budget.subsets as f64 {
        return Err(Error::budget("subsets", needed, budget.subsets as f64));
    }
    let mut a = vec![BigUint::zero(); m];
    if m == 0 {
        return Ok(a);
    }
    a[0] = BigUint::from(inst.k()).pow(inst.n() as u32);
    if top <= 1 {
        return Ok(a);
    }

    // Partition subsets by their two smallest edges (or the single smallest
    // one for |F| = 1) so the work spreads evenly.
    let mut prefixes: Vec<Vec<usize>> = (0..e).map(|i| vec![i]).collect();
    if top > 2 {
        prefixes = (0..e)
            .flat_map(|i| (i + 1..e).map(move |j| vec![i, j]))
            .chain((0..e).map(|i| vec![i]))
            .collect();
    }
    let partials = par::map(&prefixes, |prefix| {
        let mut acc = SubsetSum::new(inst, top);
        if prefix.len() == 1 {
            acc.add_subset(inst, prefix);
        } else {
            acc.extend(inst, &mut prefix.clone(), prefix[1] + 1..e);
        }
        acc.finish()
    });
    for partial in partials {
        for (x, y) in a.iter_mut().zip(partial) {
            *x += y;
        }
    }
    Ok(a)
}

struct SubsetSum {
    scratch: SatScratch,
    k: u128,
    n: usize,
    top: usize,
    small: Vec<u128>,
    big: Vec<BigUint>,
    sats: Vec<usize>,
}

impl SubsetSum {
    fn new(inst: &UgInstance, top: usize) -> Self {
        Self {
            scratch: SatScratch::new(inst.n()),
            k: inst.k() as u128,
            n: inst.n(),
            top,
            small: vec![0; top],
            big: vec![BigUint::zero(); top],
            sats: Vec::new(),
        }
    }

    fn add_subset(&mut self, inst: &UgInstance, edges: &[usize]) {
        let mut sats = std::mem::take(&mut self.sats);
        sats.clear();
        let touched = self.scratch.for_each_component(inst, edges, |s| sats.push(s));
        let j = edges.len();
        if sats.contains(&0) {
            self.sats = sats;
            return;
        }
        let mut term: Option<u128> = Some(1);
        for &s in &sats {
            term = term.and_then(|t| t.checked_mul(s as u128));
        }
        let free = (self.n - touched) as u32;
        term = term.and_then(|t| self.k.checked_pow(free).and_then(|p| t.checked_mul(p)));
        match term.and_then(|t| self.small[j].checked_add(t)) {
            Some(total) => self.small[j] = total,
            None => {
                let mut big = BigUint::from(self.k as u64).pow(free);
                for &s in &sats {
                    big *= s as u64;
                }
                self.big[j] += big;
            }
        }
        self.sats = sats;
    }

    /// Adds `current` and every superset formed by appending edges from
    /// `rest` in increasing order, up to `top − 1` edges.
    fn extend(&mut self, inst: &UgInstance, current: &mut Vec<usize>, rest: Range<usize>) {
        self.add_subset(inst, current);
        if current.len() + 1 >= self.top {
            return;
        }
        for f in rest.clone() {
            current.push(f);
            self.extend(inst, current, f + 1..rest.end);
            current.pop();
        }
    }

    fn finish(self) -> Vec<BigUint> {
        self.small
            .into_iter()
            .zip(self.big)
            .map(|(s, b)| b + BigUint::from(s))
            .collect()
    }
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Z(G; w)` through the subgraph expansion over all edge subsets.
pub fn z_subgraph(inst: &UgInstance, w: Complex64, budget: &Budget) -> Result<Complex64> {
    let a = z_coeffs_subgraph(inst, inst.edge_count() + 1, budget)?;
    Ok(horner_f64(a.iter().map(biguint_to_f64), w - 1.0))
}

/// `Σ c[i] x^i` in double precision.
pub fn horner_f64(coeffs: impl DoubleEndedIterator<Item = f64>, x: Complex64) -> Complex64 {
    coeffs.rev().fold(Complex64::zero(), |acc, c| acc * x + c)
}

/// `Σ c[i] x^i` exactly, for complex rational `x`.
pub fn eval_exact(coeffs: &[BigUint], x: &ComplexRational) -> ComplexRational {
    let mut acc = ComplexRational::new(BigRational::zero(), BigRational::zero());
    for c in coeffs.iter().rev() {
        acc = acc * x.clone() + ComplexRational::new(BigRational::from_integer(BigInt::from(c.clone())), BigRational::zero());
    }
    acc
}

/// `Z(G; w)` exactly from satisfied-edge counts.
pub fn z_from_sat_exact(c: &[BigUint], w: &ComplexRational) -> ComplexRational {
    eval_exact(c, w)
}

/// `Z(G; w)` exactly from subgraph coefficients.
pub fn z_from_subgraph_exact(a: &[BigUint], w: &ComplexRational) -> ComplexRational {
    let one = ComplexRational::new(BigRational::one(), BigRational::zero());
    eval_exact(a, &(w.clone() - one))
}

/// Natural log of a big integer, finite for any size. `-inf` at zero.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return biguint_to_f64(x).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn biguint_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// `log Z(G; w)` for real `w > 0` from satisfied-edge counts, by log-sum-exp
/// so that large `w` and large counts cannot overflow.
pub fn log_z_real(c: &[BigUint], log_w: f64) -> f64 {
    let terms: Vec<f64> = c
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| ln_biguint(x) + i as f64 * log_w)
        .collect();
    log_sum_exp(&terms)
}

pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max == f64::INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Coefficients as a JSON array of decimal strings.
pub fn coeffs_to_json(c: &[BigUint]) -> String {
    let strings: Vec<String> = c.iter().map(|x| x.to_string()).collect();
    serde_json::to_string(&strings).expect("strings serialize")
}

pub fn coeffs_from_json(text: &str) -> Result<Vec<BigUint>> {
    let strings: Vec<String> =
        serde_json::from_str(text).map_err(|e| Error::param(format!("coefficient array: {e}")))?;
    strings
        .iter()
        .map(|s| {
            s.parse::<BigUint>()
                .map_err(|_| Error::param(format!("not a non-negative integer: {s:?}")))
        })
        .collect()
}

/// Re-expands `Σ a[j] (w−1)^j` in powers of `w`.
pub fn shift_to_w(a: &[BigUint]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len()];
    for (j, aj) in a.iter().enumerate() {
        let aj = BigInt::from(aj.clone());
        // (w−1)^j = Σ_i C(j,i) w^i (−1)^(j−i)
        let mut binom = BigInt::one();
        for (i, slot) in out.iter_mut().enumerate().take(j + 1) {
            let term = &aj * &binom;
            if (j - i) % 2 == 0 {
                *slot += term;
            } else {
                *slot -= term;
            }
            binom = binom * BigInt::from(j - i) / BigInt::from(i + 1);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::{identity, triangle};
    use crate::instance::{gen_random_regular, Edge};

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    fn cr(re: i64, im: i64) -> ComplexRational {
        ComplexRational::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into()))
    }

    #[test]
    fn single_edge() {
        let b = Budget::default();
        let inst = UgInstance::new(3, 2, vec![Edge::new(0, 1, vec![1, 2, 0])]).unwrap();
        assert_eq!(z_brute(&inst, Complex64::new(2.0, 0.0), &b).unwrap(), Complex64::new(12.0, 0.0));
        assert_eq!(z_coeffs_subgraph(&inst, 2, &b).unwrap(), big(&[9, 3]));
        let w = Complex64::new(0.3, -1.7);
        let z = z_subgraph(&inst, w, &b).unwrap();
        assert!((z - (w * 3.0 + 6.0)).norm() < 1e-12);
        let two = UgInstance::new(2, 2, vec![Edge::new(0, 1, vec![1, 0])]).unwrap();
        assert_eq!(z_coeffs_sat(&two, &b).unwrap(), big(&[2, 2]));
    }

    #[test]
    fn triangle_coefficients() {
        let b = Budget::default();
        let t = triangle(3, [identity(3), identity(3), identity(3)]);
        let c = z_coeffs_sat(&t, &b).unwrap();
        assert_eq!(c, big(&[6, 18, 0, 3]));
        let a = z_coeffs_subgraph(&t, 4, &b).unwrap();
        assert_eq!(a, big(&[27, 27, 9, 3]));
        assert_eq!(z_from_subgraph_exact(&a, &cr(2, 0)), cr(66, 0));
        assert_eq!(z_from_sat_exact(&c, &cr(2, 0)), cr(66, 0));
        assert_eq!(z_brute(&t, Complex64::new(2.0, 0.0), &b).unwrap().re, 66.0);
        let shifted: Vec<BigInt> = c.iter().map(|x| BigInt::from(x.clone())).collect();
        assert_eq!(shift_to_w(&a), shifted);
    }

    #[test]
    fn edgeless_and_w_one() {
        let b = Budget::default();
        let empty = UgInstance::new(3, 2, vec![]).unwrap();
        assert_eq!(z_coeffs_sat(&empty, &b).unwrap(), big(&[9]));
        assert_eq!(z_coeffs_subgraph(&empty, 3, &b).unwrap(), big(&[9, 0, 0]));
        for seed in 0..5 {
            let inst = gen_random_regular(6, 3, 3, seed).unwrap();
            let c = z_coeffs_sat(&inst, &b).unwrap();
            assert_eq!(z_from_sat_exact(&c, &cr(1, 0)), cr(729, 0));
            let a = z_coeffs_subgraph(&inst, 10, &b).unwrap();
            assert_eq!(a[0], BigUint::from(729u32));
        }
    }

    #[test]
    fn brute_and_subgraph_agree_exactly() {
        let b = Budget::default();
        for seed in 0..10 {
            let inst = gen_random_regular(6, 3, 4, seed).unwrap();
            let c = z_coeffs_sat(&inst, &b).unwrap();
            let a = z_coeffs_subgraph(&inst, inst.edge_count() + 1, &b).unwrap();
            let c_int: Vec<BigInt> = c.into_iter().map(BigInt::from).collect();
            assert_eq!(shift_to_w(&a), c_int, "seed {seed}");
        }
    }

    #[test]
    fn truncated_subgraph_coefficients_are_prefixes() {
        let b = Budget::default();
        let inst = gen_random_regular(8, 3, 3, 4).unwrap();
        let full = z_coeffs_subgraph(&inst, inst.edge_count() + 1, &b).unwrap();
        for m in 1..5 {
            assert_eq!(z_coeffs_subgraph(&inst, m, &b).unwrap(), full[..m].to_vec());
        }
        let long = z_coeffs_subgraph(&inst, inst.edge_count() + 4, &b).unwrap();
        assert_eq!(&long[..full.len()], &full[..]);
        assert!(long[full.len()..].iter().all(Zero::is_zero));
    }

    #[test]
    fn budgets() {
        let inst = gen_random_regular(8, 3, 3, 1).unwrap();
        let tight = Budget { colorings: 100, subsets: 100, ..Budget::default() };
        assert!(matches!(z_coeffs_sat(&inst, &tight), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(z_coeffs_subgraph(&inst, 13, &tight), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn logs_and_json() {
        let c = big(&[6, 18, 0, 3]);
        assert!((log_z_real(&c, 2f64.ln()) - 66f64.ln()).abs() < 1e-12);
        let huge = BigUint::from(3u32).pow(5000);
        assert!((ln_biguint(&huge) - 5000.0 * 3f64.ln()).abs() < 1e-9);
        let text = coeffs_to_json(&[huge.clone(), BigUint::from(7u32)]);
        assert!(text.starts_with("[\""));
        assert_eq!(coeffs_from_json(&text).unwrap(), vec![huge, BigUint::from(7u32)]);
        assert!(coeffs_from_json("[\"-1\"]").is_err());
    }
}
