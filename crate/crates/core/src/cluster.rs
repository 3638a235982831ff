//! Ursell functions, cluster enumeration and the truncated cluster expansion
//! of `log Ξ`, where `Ξ = k^(−n) Z(G; w)` is the polymer partition function.
//!
//! A cluster is a multiset of polymers whose incompatibility graph is
//! connected (two copies of one polymer are always incompatible). A multiset
//! with multiplicities `μ` stands for `t!/Π μ!` ordered tuples, so its
//! coefficient in `log Ξ` is `(t!/Π μ!) · φ(H)`, which equals the signed
//! count of connected spanning edge subsets of `H` divided by `Π μ!`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::config::Budget;
use crate::error::{Error, Result};
use crate::instance::UgInstance;
use crate::par;
use crate::polymer::{check_kp_conditions, enumerate_polymers, polymer_weight, polymer_weight_exact, KpReport, Polymer, KP_MIN_DELTA};
use crate::LogValue;

/// Largest graph the Ursell routine accepts regardless of budget.
pub const URSELL_HARD_MAX: usize = 16;

/// `Σ (−1)^|A|` over edge subsets `A` of `H` that connect all `t` vertices.
///
/// `adj[i]` is the neighbor bitmask of vertex `i`. Uses the subset
/// recursion `g(S) = f(S) − Σ_{min S ∈ T ⊊ S} g(T) f(S∖T)`, where `f(S)` is
/// the full signed sum over edges inside `S` (1 if `S` is independent,
/// 0 otherwise).
pub fn connected_signed_sum(adj: &[u32]) -> i64 {
    let t = adj.len();
    assert!(t >= 1 && t <= URSELL_HARD_MAX, "graph size {t} out of range");
    static CACHE: OnceLock<Mutex<HashMap<Vec<u32>, i64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(&v) = cache.lock().expect("cache lock").get(adj) {
        return v;
    }
    let full = (1u32 << t) - 1;
    let independent = |s: u32| {
        let mut rest = s;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            if adj[i] & s != 0 {
                return false;
            }
            rest &= rest - 1;
        }
        true
    };
    let mut g = vec![0i64; (full + 1) as usize];
    for s in 1..=full {
        let f_s = i64::from(independent(s));
        let low = s & s.wrapping_neg();
        let others = s ^ low;
        let mut acc = f_s;
        // Proper subsets T of S containing the lowest vertex: T = low | sub
        // for sub a proper subset of `others`.
        let mut sub = others;
        loop {
            if sub != others {
                let tset = low | sub;
                let gt = g[tset as usize];
                if gt != 0 && independent(s ^ tset) {
                    acc -= gt;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & others;
        }
        g[s as usize] = acc;
    }
    let v = g[full as usize];
    cache.lock().expect("cache lock").insert(adj.to_vec(), v);
    v
}

/// The Ursell function `φ(H) = (1/t!) Σ_{A connected spanning} (−1)^|A|`.
///
/// `edges` lists the edges of `H` on vertices `0..t`.
pub fn ursell(t: usize, edges: &[(usize, usize)], max_t: usize) -> Result<BigRational> {
    if t == 0 {
        return Err(Error::param("Ursell function needs at least one vertex"));
    }
    if t > max_t.min(URSELL_HARD_MAX) {
        return Err(Error::budget("ursell graph size", t as f64, max_t.min(URSELL_HARD_MAX) as f64));
    }
    let mut adj = vec![0u32; t];
    for &(a, b) in edges {
        if a >= t || b >= t || a == b {
            return Err(Error::param(format!("invalid edge ({a}, {b}) for {t} vertices")));
        }
        adj[a] |= 1 << b;
        adj[b] |= 1 << a;
    }
    Ok(BigRational::new(
        BigInt::from(connected_signed_sum(&adj)),
        factorial(t),
    ))
}

fn factorial(t: usize) -> BigInt {
    (1..=t).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// A cluster: polymers (indices into a polymer list) with multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Distinct polymer indices, increasing.
    pub polymers: Vec<usize>,
    pub multiplicities: Vec<usize>,
    /// `t = Σ μ`.
    pub size: usize,
    /// `‖Γ‖ = Σ μ_i ‖γ_i‖`.
    pub total_edges: usize,
    /// `φ(H)` for the incompatibility graph on the `t` copies.
    pub ursell: BigRational,
    /// Coefficient of `Π w_γ^μ` in the expansion: `(t!/Π μ!) φ(H)`.
    pub coefficient: BigRational,
}

/// Borrowed view handed to cluster visitors.
pub(crate) struct ClusterView<'a> {
    pub polymers: &'a [usize],
    pub multiplicities: &'a [usize],
    pub total_edges: usize,
    /// Connected signed sum of the incompatibility graph.
    pub signed_sum: i64,
}

impl ClusterView<'_> {
    pub fn size(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// `Π μ!`.
    pub fn multiplicity_factorial(&self) -> u64 {
        self.multiplicities
            .iter()
            .map(|&m| (1..=m as u64).product::<u64>())
            .product()
    }

    pub fn coefficient(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.signed_sum),
            BigInt::from(self.multiplicity_factorial()),
        )
    }
}

fn incompatibility_adjacency(polymers: &[Polymer]) -> Vec<Vec<usize>> {
    let n = polymers.iter().flat_map(|p| p.vertices.iter().copied()).max().map_or(0, |v| v + 1);
    let mut by_vertex: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, p) in polymers.iter().enumerate() {
        for &v in &p.vertices {
            by_vertex[v].push(i);
        }
    }
    polymers
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut nb: Vec<usize> = p
                .vertices
                .iter()
                .flat_map(|&v| by_vertex[v].iter().copied())
                .filter(|&j| j != i)
                .collect();
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect()
}

/// Visits every cluster with `‖Γ‖ < m`, partitioned by the smallest polymer
/// index it contains. Returns one accumulator per partition, in index order.
pub(crate) fn fold_clusters<A, I, V>(
    polymers: &[Polymer],
    m: usize,
    budget: &Budget,
    init: I,
    visit: V,
) -> Result<(Vec<A>, u64)>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    V: Fn(&mut A, &ClusterView<'_>) + Sync + Send,
{
    let adj = incompatibility_adjacency(polymers);
    let visited = AtomicU64::new(0);
    let max_t = budget.ursell_max_t.min(URSELL_HARD_MAX);
    let parts = par::map_range(polymers.len(), |seed| {
        let mut acc = init();
        let mut walk = Walk {
            polymers,
            adj: &adj,
            m,
            seed,
            max_t,
            closed: vec![0u32; polymers.len()],
            current: Vec::new(),
            weight: 0,
            visited: &visited,
            limit: budget.clusters,
            failure: None,
        };
        if polymers[seed].edge_count() < m {
            let ext: Vec<usize> = adj[seed].iter().copied().filter(|&q| q > seed).collect();
            walk.enter(seed);
            walk.extend(&ext, &mut |view| visit(&mut acc, view));
        }
        (acc, walk.failure)
    });
    let mut out = Vec::with_capacity(parts.len());
    for (acc, failure) in parts {
        if let Some(e) = failure {
            return Err(e);
        }
        out.push(acc);
    }
    Ok((out, visited.load(Ordering::Relaxed)))
}

struct Walk<'a> {
    polymers: &'a [Polymer],
    adj: &'a [Vec<usize>],
    m: usize,
    seed: usize,
    max_t: usize,
    closed: Vec<u32>,
    current: Vec<usize>,
    weight: usize,
    visited: &'a AtomicU64,
    limit: u64,
    failure: Option<Error>,
}

impl Walk<'_> {
    fn enter(&mut self, p: usize) {
        self.current.push(p);
        self.weight += self.polymers[p].edge_count();
        self.closed[p] += 1;
        for &q in &self.adj[p] {
            self.closed[q] += 1;
        }
    }

    fn leave(&mut self) {
        let p = self.current.pop().expect("leave without enter");
        self.weight -= self.polymers[p].edge_count();
        self.closed[p] -= 1;
        for &q in &self.adj[p] {
            self.closed[q] -= 1;
        }
    }

    /// Connected sets of distinct polymers grown from `seed`; each is
    /// expanded into all multiplicity vectors that respect `‖Γ‖ < m`.
    fn extend(&mut self, ext: &[usize], visit: &mut dyn FnMut(&ClusterView<'_>)) -> bool {
        if !self.emit_multisets(visit) {
            return false;
        }
        for (i, &q) in ext.iter().enumerate() {
            if self.weight + self.polymers[q].edge_count() >= self.m {
                continue;
            }
            let mut next: Vec<usize> = ext[i + 1..].to_vec();
            next.extend(
                self.adj[q]
                    .iter()
                    .copied()
                    .filter(|&r| r > self.seed && self.closed[r] == 0),
            );
            self.enter(q);
            let ok = self.extend(&next, visit);
            self.leave();
            if !ok {
                return false;
            }
        }
        true
    }

    fn emit_multisets(&mut self, visit: &mut dyn FnMut(&ClusterView<'_>)) -> bool {
        let mut distinct = self.current.clone();
        distinct.sort_unstable();
        let sizes: Vec<usize> = distinct.iter().map(|&p| self.polymers[p].edge_count()).collect();
        let base: usize = sizes.iter().sum();
        let mut mult = vec![1usize; distinct.len()];
        let mut total = base;
        loop {
            let t: usize = mult.iter().sum();
            if t > self.max_t {
                self.failure = Some(Error::budget("ursell graph size", t as f64, self.max_t as f64));
                return false;
            }
            if self.visited.fetch_add(1, Ordering::Relaxed) >= self.limit {
                self.failure = Some(Error::budget(
                    "clusters",
                    self.visited.load(Ordering::Relaxed) as f64,
                    self.limit as f64,
                ));
                return false;
            }
            let signed_sum = connected_signed_sum(&self.cluster_graph(&distinct, &mult));
            visit(&ClusterView {
                polymers: &distinct,
                multiplicities: &mult,
                total_edges: total,
                signed_sum,
            });
            // Next multiplicity vector in odometer order with total < m.
            let mut i = 0;
            loop {
                if i == mult.len() {
                    return true;
                }
                if total + sizes[i] < self.m {
                    mult[i] += 1;
                    total += sizes[i];
                    break;
                }
                total -= (mult[i] - 1) * sizes[i];
                mult[i] = 1;
                i += 1;
            }
        }
    }

    fn cluster_graph(&self, distinct: &[usize], mult: &[usize]) -> Vec<u32> {
        let mut owner = Vec::new();
        for (i, &m) in mult.iter().enumerate() {
            owner.extend(std::iter::repeat(i).take(m));
        }
        let t = owner.len();
        let mut adj = vec![0u32; t];
        for a in 0..t {
            for b in a + 1..t {
                let (pa, pb) = (distinct[owner[a]], distinct[owner[b]]);
                if pa == pb || self.adj[pa].binary_search(&pb).is_ok() {
                    adj[a] |= 1 << b;
                    adj[b] |= 1 << a;
                }
            }
        }
        adj
    }
}

/// Every cluster with `‖Γ‖ < m`, ordered by smallest polymer index and then
/// by discovery order.
pub fn enumerate_clusters(polymers: &[Polymer], m: usize, budget: &Budget) -> Result<Vec<Cluster>> {
    let (parts, _) = fold_clusters(polymers, m, budget, Vec::new, |out: &mut Vec<Cluster>, view| {
        let t = view.size();
        out.push(Cluster {
            polymers: view.polymers.to_vec(),
            multiplicities: view.multiplicities.to_vec(),
            size: t,
            total_edges: view.total_edges,
            ursell: BigRational::new(BigInt::from(view.signed_sum), factorial(t)),
            coefficient: view.coefficient(),
        });
    })?;
    Ok(parts.into_iter().flatten().collect())
}

/// `T_m(G; w) = Σ_{‖Γ‖ < m} φ(Γ) Π w_γ` in double precision.
pub fn truncated_cluster_expansion(inst: &UgInstance, w: Complex64, m: usize, budget: &Budget) -> Result<Complex64> {
    Ok(expansion_f64(inst, w, m, budget)?.0)
}

/// Returns `(T_m, #polymers, #clusters)`.
fn expansion_f64(inst: &UgInstance, w: Complex64, m: usize, budget: &Budget) -> Result<(Complex64, usize, u64)> {
    if m == 0 {
        return Err(Error::param("truncation depth m must be at least 1"));
    }
    let polymers: Vec<Polymer> = enumerate_polymers(inst, m, budget)?
        .into_iter()
        .filter(|p| p.sat > 0)
        .collect();
    let weights: Vec<Complex64> = polymers.iter().map(|p| polymer_weight(inst, p, w).value).collect();
    let (parts, clusters) = fold_clusters(&polymers, m, budget, Complex64::zero, |acc, view| {
        let mut prod = Complex64::new(view.signed_sum as f64 / view.multiplicity_factorial() as f64, 0.0);
        for (&p, &mu) in view.polymers.iter().zip(view.multiplicities) {
            prod *= weights[p].powu(mu as u32);
        }
        *acc += prod;
    })?;
    Ok((pairwise_sum(&parts), polymers.len(), clusters))
}

/// Deterministic pairwise summation.
fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::zero(),
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// `T_m(G; w)` exactly, at rational `w`.
pub fn truncated_cluster_expansion_exact(
    inst: &UgInstance,
    w: &BigRational,
    m: usize,
    budget: &Budget,
) -> Result<BigRational> {
    if m == 0 {
        return Err(Error::param("truncation depth m must be at least 1"));
    }
    let polymers: Vec<Polymer> = enumerate_polymers(inst, m, budget)?
        .into_iter()
        .filter(|p| p.sat > 0)
        .collect();
    let weights: Vec<BigRational> = polymers.iter().map(|p| polymer_weight_exact(inst, p, w)).collect();
    let (parts, _) = fold_clusters(&polymers, m, budget, BigRational::zero, |acc, view| {
        let mut prod = view.coefficient();
        for (&p, &mu) in view.polymers.iter().zip(view.multiplicities) {
            prod *= num_traits::pow(weights[p].clone(), mu);
        }
        *acc += prod;
    })?;
    Ok(parts.into_iter().fold(BigRational::zero(), |a, b| a + b))
}

/// Truncation depth `m = ⌈log(n/α)/3⌉`, at least 1, so that `n e^(−3m) ≤ α`.
pub fn cluster_depth(n: usize, alpha: f64) -> Result<usize> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::param(format!("α must be positive and finite, got {alpha}")));
    }
    if n == 0 {
        return Ok(1);
    }
    let raw = (n as f64 / alpha).ln() / 3.0;
    // Absorb rounding so that n = e³α lands exactly on m = 1.
    let m = (raw - 1e-9).ceil();
    Ok(m.max(1.0) as usize)
}

/// Cluster-expansion approximation of `log Z(G; w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterApprox {
    /// `T_m`, approximating `log Ξ`.
    pub t_m: Complex64,
    /// `log ξ = n log k + T_m`.
    pub log_xi: LogValue,
    pub m: usize,
    pub alpha: f64,
    /// `n e^(−3m)`.
    pub error_bound: f64,
    /// Whether `error_bound ≤ α`.
    pub bound_meets_alpha: bool,
    /// Whether the weight-bound hypotheses were checked and hold, which is
    /// what makes `error_bound` a guarantee.
    pub conditions_verified: bool,
    /// Present for real `w ≥ 1`; checked at `Δ = max(16, max degree)`.
    pub kp: Option<KpReport>,
    pub polymers: usize,
    pub clusters: u64,
}

pub fn approx_log_z_cluster(inst: &UgInstance, w: Complex64, alpha: f64, budget: &Budget) -> Result<ClusterApprox> {
    let m = cluster_depth(inst.n(), alpha)?;
    let (t_m, polymers, clusters) = expansion_f64(inst, w, m, budget)?;
    let log_k = (inst.k() as f64).ln();
    let log_xi = LogValue::from_log(t_m + inst.n() as f64 * log_k);
    let error_bound = inst.n() as f64 * (-3.0 * m as f64).exp();
    let kp = if w.im == 0.0 && w.re >= 1.0 {
        let delta = inst.max_degree().max(KP_MIN_DELTA);
        Some(check_kp_conditions(log_k, delta, w.re.ln())?)
    } else {
        None
    };
    Ok(ClusterApprox {
        t_m,
        log_xi,
        m,
        alpha,
        error_bound,
        bound_meets_alpha: error_bound <= alpha * (1.0 + 1e-12),
        conditions_verified: kp.as_ref().is_some_and(|r| r.pass),
        kp,
        polymers,
        clusters,
    })
}

/// `log Ξ = log(k^(−n) Z)` from exact subgraph coefficients, for comparisons.
pub fn log_xi_from_subgraph(inst: &UgInstance, a: &[BigUint], w: Complex64) -> Complex64 {
    let kn = BigUint::from(inst.k()).pow(inst.n() as u32);
    let scale = crate::exact::ln_biguint(&kn);
    let mut acc = Complex64::zero();
    for c in a.iter().rev() {
        let ratio = if c.is_zero() {
            0.0
        } else {
            (crate::exact::ln_biguint(c) - scale).exp()
        };
        acc = acc * (w - 1.0) + ratio;
    }
    acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use crate::exact::z_coeffs_subgraph;
    use crate::instance::tests::{identity, triangle};
    use crate::instance::{gen_random_regular, Edge};

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn ursell_small_graphs() {
        assert_eq!(ursell(1, &[], 9).unwrap(), q(1, 1));
        assert_eq!(ursell(2, &[(0, 1)], 9).unwrap(), q(-1, 2));
        assert_eq!(ursell(3, &[(0, 1), (1, 2), (0, 2)], 9).unwrap(), q(1, 3));
        assert_eq!(ursell(2, &[], 9).unwrap(), q(0, 1));
        assert!(ursell(10, &[], 9).is_err());
        assert!(ursell(0, &[], 9).is_err());
    }

    /// Direct sum over all edge subsets, for small graphs.
    fn brute_signed_sum(t: usize, edges: &[(usize, usize)]) -> i64 {
        let mut total = 0;
        for mask in 0u32..(1 << edges.len()) {
            let mut parent: Vec<usize> = (0..t).collect();
            fn find(p: &mut Vec<usize>, x: usize) -> usize {
                if p[x] != x {
                    let r = find(p, p[x]);
                    p[x] = r;
                }
                p[x]
            }
            let mut comps = t;
            for (i, &(a, b)) in edges.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra] = rb;
                        comps -= 1;
                    }
                }
            }
            if comps == 1 {
                total += if mask.count_ones() % 2 == 0 { 1 } else { -1 };
            }
        }
        total
    }

    #[test]
    fn ursell_matches_brute_force() {
        for t in 1..=6 {
            let path: Vec<(usize, usize)> = (1..t).map(|i| (i - 1, i)).collect();
            let phi = ursell(t, &path, 9).unwrap();
            let sign = if t % 2 == 1 { 1 } else { -1 };
            assert_eq!(phi, BigRational::new(sign.into(), factorial(t)));
            assert_eq!(phi, BigRational::new(brute_signed_sum(t, &path).into(), factorial(t)));

            let complete: Vec<(usize, usize)> = (0..t).flat_map(|a| (a + 1..t).map(move |b| (a, b))).collect();
            // Complete graph: (−1)^(t−1) (t−1)! / t!.
            let expected = BigRational::new((sign * (1..t as i64).product::<i64>()).into(), factorial(t));
            assert_eq!(ursell(t, &complete, 9).unwrap(), expected);
            assert_eq!(
                ursell(t, &complete, 9).unwrap(),
                BigRational::new(brute_signed_sum(t, &complete).into(), factorial(t))
            );

            let cycle: Vec<(usize, usize)> = (0..t).filter(|_| t >= 3).map(|i| (i, (i + 1) % t)).collect();
            if t >= 3 {
                assert_eq!(
                    ursell(t, &cycle, 9).unwrap(),
                    BigRational::new(brute_signed_sum(t, &cycle).into(), factorial(t))
                );
            }
        }
    }

    fn single_edge() -> UgInstance {
        UgInstance::new(3, 2, vec![Edge::new(0, 1, vec![2, 0, 1])]).unwrap()
    }

    #[test]
    fn single_edge_truncations() {
        let b = Budget::default();
        let two = BigRational::from_integer(2.into());
        assert_eq!(truncated_cluster_expansion_exact(&single_edge(), &two, 2, &b).unwrap(), q(1, 3));
        assert_eq!(truncated_cluster_expansion_exact(&single_edge(), &two, 3, &b).unwrap(), q(5, 18));
        let t3 = truncated_cluster_expansion(&single_edge(), Complex64::new(2.0, 0.0), 3, &b).unwrap();
        assert!((t3.re - 5.0 / 18.0).abs() < 1e-15 && t3.im == 0.0);
        // log(1 + x) with x = 1/3, to fourth order.
        let t5 = truncated_cluster_expansion_exact(&single_edge(), &two, 5, &b).unwrap();
        assert_eq!(t5, q(1, 3) - q(1, 18) + q(1, 81) - q(1, 324));
    }

    #[test]
    fn cluster_shapes() {
        let b = Budget::default();
        let polymers = enumerate_polymers(&single_edge(), 3, &b).unwrap();
        let cs = enumerate_clusters(&polymers, 3, &b).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[0].multiplicities, vec![1]);
        assert_eq!(cs[1].multiplicities, vec![2]);
        assert_eq!(cs[1].ursell, q(-1, 2));

        let t = triangle(3, [identity(3), identity(3), identity(3)]);
        let ps = enumerate_polymers(&t, 2, &b).unwrap();
        let cs = enumerate_clusters(&ps, 2, &b).unwrap();
        assert_eq!(cs.len(), 3);
        assert!(cs.iter().all(|c| c.size == 1 && c.total_edges == 1));

        let disjoint = UgInstance::new(2, 4, vec![Edge::new(0, 1, identity(2)), Edge::new(2, 3, identity(2))]).unwrap();
        let ps = enumerate_polymers(&disjoint, 5, &b).unwrap();
        for c in enumerate_clusters(&ps, 5, &b).unwrap() {
            assert_eq!(c.polymers.len(), 1, "cluster mixes disjoint polymers: {c:?}");
        }
    }

    #[test]
    fn w_one_gives_zero() {
        let b = Budget::default();
        let inst = gen_random_regular(8, 3, 3, 2).unwrap();
        for m in 1..5 {
            assert_eq!(truncated_cluster_expansion(&inst, Complex64::new(1.0, 0.0), m, &b).unwrap(), Complex64::zero());
        }
    }

    #[test]
    fn depth_choice() {
        assert_eq!(cluster_depth(100, 1.0).unwrap(), 2);
        let n = 20usize;
        let alpha = n as f64 / 3f64.exp();
        assert_eq!(cluster_depth(n, alpha).unwrap(), 1);
        assert!(cluster_depth(5, 0.0).is_err());
        assert_eq!(cluster_depth(1, 10.0).unwrap(), 1);
    }

    #[test]
    fn converges_to_exact_log_for_large_k() {
        let b = Budget::default();
        for seed in 0..3 {
            let inst = gen_random_regular(6, 3, 1000, seed).unwrap();
            let a = z_coeffs_subgraph(&inst, inst.edge_count() + 1, &b).unwrap();
            let w = Complex64::new(1.01, 0.0);
            let exact = log_xi_from_subgraph(&inst, &a, w);
            let mut last = f64::INFINITY;
            for m in 2..=5 {
                let t = truncated_cluster_expansion(&inst, w, m, &b).unwrap();
                let gap = (t - exact).norm();
                assert!(gap <= inst.n() as f64 * (-3.0 * m as f64).exp());
                assert!(gap <= last * 1.000001 + 1e-17, "m={m} gap={gap} last={last}");
                last = gap;
            }
        }
    }

    #[test]
    fn exact_and_float_expansions_agree() {
        let b = Budget::default();
        let inst = gen_random_regular(6, 3, 5, 9).unwrap();
        let w = BigRational::new(11.into(), 10.into());
        for m in 1..5 {
            let exact = truncated_cluster_expansion_exact(&inst, &w, m, &b).unwrap();
            let float = truncated_cluster_expansion(&inst, Complex64::new(1.1, 0.0), m, &b).unwrap();
            assert!((exact.to_f64().unwrap() - float.re).abs() < 1e-14);
        }
    }

    #[test]
    fn approx_reports_gate() {
        let b = Budget::default();
        let inst = gen_random_regular(6, 3, 4, 1).unwrap();
        let r = approx_log_z_cluster(&inst, Complex64::new(1.05, 0.0), 0.1, &b).unwrap();
        assert_eq!(r.m, cluster_depth(6, 0.1).unwrap());
        assert!(r.bound_meets_alpha);
        assert!(!r.conditions_verified);
        assert_eq!(r.kp.as_ref().unwrap().delta, 16);
        let c = approx_log_z_cluster(&inst, Complex64::new(1.0, 0.1), 0.1, &b).unwrap();
        assert!(c.kp.is_none() && !c.conditions_verified);
    }
}
