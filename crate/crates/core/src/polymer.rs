//! Polymers: connected subgraphs with at least one edge, their perfect
//! satisfaction counts and weights, and the log-space check of the
//! cluster-expansion convergence hypotheses.

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::config::Budget;
use crate::error::{Error, Result};
use crate::instance::UgInstance;
use crate::par;

/// A connected subgraph of the instance with at least one edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Polymer {
    /// Sorted vertex list, `|γ|` entries.
    pub vertices: Vec<usize>,
    /// Sorted instance edge indices, `‖γ‖` entries.
    pub edges: Vec<usize>,
    /// Number of colorings of the subgraph satisfying all of its edges.
    pub sat: usize,
}

impl Polymer {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// Reusable buffers for counting perfectly satisfying colorings of
/// edge sets, one connected component at a time.
pub(crate) struct SatScratch {
    color: Vec<usize>,
    seen: Vec<bool>,
    local_adj: Vec<Vec<(usize, usize)>>,
    touched: Vec<usize>,
    comp: Vec<usize>,
    stack: Vec<usize>,
}

const UNSET: usize = usize::MAX;

impl SatScratch {
    pub fn new(n: usize) -> Self {
        Self {
            color: vec![UNSET; n],
            seen: vec![false; n],
            local_adj: vec![Vec::new(); n],
            touched: Vec::new(),
            comp: Vec::new(),
            stack: Vec::new(),
        }
    }

    /// Loads `edges` as the current subgraph and returns the number of
    /// distinct vertices they touch.
    fn load(&mut self, inst: &UgInstance, edges: &[usize]) -> usize {
        for &v in &self.touched {
            self.local_adj[v].clear();
            self.seen[v] = false;
        }
        self.touched.clear();
        for &e in edges {
            let edge = &inst.edges()[e];
            for (a, b) in [(edge.u, edge.v), (edge.v, edge.u)] {
                if self.local_adj[a].is_empty() {
                    self.touched.push(a);
                }
                self.local_adj[a].push((b, e));
            }
        }
        self.touched.len()
    }

    /// Collects the component of `root` into `self.comp`.
    fn collect(&mut self, root: usize) {
        self.comp.clear();
        self.seen[root] = true;
        self.stack.clear();
        self.stack.push(root);
        while let Some(x) = self.stack.pop() {
            self.comp.push(x);
            for &(y, _) in &self.local_adj[x] {
                if !self.seen[y] {
                    self.seen[y] = true;
                    self.stack.push(y);
                }
            }
        }
    }

    /// Number of start colors on `self.comp[0]` whose forced propagation
    /// satisfies every edge of the collected component.
    fn count_collected(&mut self, inst: &UgInstance) -> usize {
        let root = self.comp[0];
        let mut sat = 0;
        'start: for start in 0..inst.k() {
            for &v in &self.comp {
                self.color[v] = UNSET;
            }
            self.color[root] = start;
            self.stack.clear();
            self.stack.push(root);
            while let Some(x) = self.stack.pop() {
                let cx = self.color[x];
                for &(y, e) in &self.local_adj[x] {
                    let want = inst.propagate(e, x, cx);
                    if self.color[y] == UNSET {
                        self.color[y] = want;
                        self.stack.push(y);
                    } else if self.color[y] != want {
                        continue 'start;
                    }
                }
            }
            sat += 1;
        }
        sat
    }

    /// `sat_π` of a non-empty edge set, or `None` when it is disconnected.
    pub fn count(&mut self, inst: &UgInstance, edges: &[usize]) -> Option<usize> {
        let size = self.load(inst, edges);
        let root = *self.touched.iter().min()?;
        self.collect(root);
        if self.comp.len() != size {
            return None;
        }
        Some(self.count_collected(inst))
    }

    /// Calls `f` with `sat_π` of every connected component of `edges` and
    /// returns the number of vertices the edges touch.
    pub fn for_each_component(&mut self, inst: &UgInstance, edges: &[usize], mut f: impl FnMut(usize)) -> usize {
        let size = self.load(inst, edges);
        for i in 0..size {
            let root = self.touched[i];
            if self.seen[root] {
                continue;
            }
            self.collect(root);
            f(self.count_collected(inst));
        }
        size
    }
}

/// Number of colorings of `(vertices, edges)` that satisfy every edge.
///
/// Fixes each color on the smallest vertex and follows the constraints along
/// the edges; at most one completion exists per start color, so the result
/// lies in `0..=k` for connected input.
pub fn sat_pi(inst: &UgInstance, vertices: &[usize], edges: &[usize]) -> Result<usize> {
    if let Some(&bad) = edges.iter().find(|&&e| e >= inst.edge_count()) {
        return Err(Error::Precondition(format!("edge index {bad} out of range")));
    }
    let mut vs: Vec<usize> = vertices.to_vec();
    vs.sort_unstable();
    vs.dedup();
    if let Some(&bad) = vs.iter().find(|&&v| v >= inst.n()) {
        return Err(Error::Precondition(format!("vertex {bad} out of range")));
    }
    if edges.is_empty() {
        return match vs.len() {
            1 => Ok(inst.k()),
            _ => Err(Error::Precondition("disconnected input".into())),
        };
    }
    let mut endpoints: Vec<usize> = edges
        .iter()
        .flat_map(|&e| [inst.edges()[e].u, inst.edges()[e].v])
        .collect();
    endpoints.sort_unstable();
    endpoints.dedup();
    if endpoints != vs {
        return Err(Error::Precondition(
            "vertex set does not match the edge endpoints (disconnected input)".into(),
        ));
    }
    SatScratch::new(inst.n())
        .count(inst, edges)
        .ok_or_else(|| Error::Precondition("disconnected input".into()))
}

/// All connected edge sets with `1 ≤ ‖γ‖ < m`, each exactly once, sorted by
/// `(‖γ‖, edge indices)`.
///
/// Each set is grown from its smallest edge index over the line graph,
/// adding only edges that are larger than the seed and not yet adjacent to
/// the current set, so no set is produced twice.
pub fn enumerate_polymers(inst: &UgInstance, m: usize, budget: &Budget) -> Result<Vec<Polymer>> {
    if m == 0 {
        return Err(Error::param("polymer size bound m must be at least 1"));
    }
    let max_edges = m - 1;
    if max_edges == 0 || inst.edge_count() == 0 {
        return Ok(Vec::new());
    }
    let line_adj = line_graph(inst);
    let produced = AtomicU64::new(0);
    let per_seed = par::map_range(inst.edge_count(), |seed| {
        let mut esu = Esu {
            seed,
            max_edges,
            line_adj: &line_adj,
            closed: vec![0u32; inst.edge_count()],
            current: Vec::with_capacity(max_edges),
            out: Vec::new(),
            produced: &produced,
            limit: budget.polymers,
        };
        let ext: Vec<usize> = line_adj[seed].iter().copied().filter(|&f| f > seed).collect();
        esu.enter(seed);
        let ok = esu.extend(&ext);
        (ok, esu.out)
    });

    let mut sets = Vec::new();
    for (ok, out) in per_seed {
        if !ok {
            return Err(Error::budget(
                "polymers",
                produced.load(Ordering::Relaxed) as f64,
                budget.polymers as f64,
            ));
        }
        sets.extend(out);
    }
    sets.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    let polymers = par::map(&sets, |edges| {
        let mut scratch = SatScratch::new(inst.n());
        let sat = scratch.count(inst, edges).expect("enumerated edge sets are connected");
        let mut vertices: Vec<usize> = edges
            .iter()
            .flat_map(|&e| [inst.edges()[e].u, inst.edges()[e].v])
            .collect();
        vertices.sort_unstable();
        vertices.dedup();
        Polymer {
            vertices,
            edges: edges.clone(),
            sat,
        }
    });
    Ok(polymers)
}

fn line_graph(inst: &UgInstance) -> Vec<Vec<usize>> {
    inst.edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut nb: Vec<usize> = inst
                .neighbors(e.u)
                .iter()
                .chain(inst.neighbors(e.v))
                .map(|&(_, f)| f)
                .filter(|&f| f != i)
                .collect();
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect()
}

struct Esu<'a> {
    seed: usize,
    max_edges: usize,
    line_adj: &'a [Vec<usize>],
    /// Number of current edges equal or adjacent to each edge.
    closed: Vec<u32>,
    current: Vec<usize>,
    out: Vec<Vec<usize>>,
    produced: &'a AtomicU64,
    limit: u64,
}

impl Esu<'_> {
    fn enter(&mut self, e: usize) {
        self.current.push(e);
        self.closed[e] += 1;
        for &f in &self.line_adj[e] {
            self.closed[f] += 1;
        }
    }

    fn leave(&mut self) {
        let e = self.current.pop().expect("leave without enter");
        self.closed[e] -= 1;
        for &f in &self.line_adj[e] {
            self.closed[f] -= 1;
        }
    }

    /// Returns false once the global polymer budget is exhausted.
    fn extend(&mut self, ext: &[usize]) -> bool {
        if self.produced.fetch_add(1, Ordering::Relaxed) >= self.limit {
            return false;
        }
        let mut set = self.current.clone();
        set.sort_unstable();
        self.out.push(set);
        if self.current.len() == self.max_edges {
            return true;
        }
        for (i, &w) in ext.iter().enumerate() {
            let mut next: Vec<usize> = ext[i + 1..].to_vec();
            next.extend(
                self.line_adj[w]
                    .iter()
                    .copied()
                    .filter(|&f| f > self.seed && self.closed[f] == 0),
            );
            self.enter(w);
            let ok = self.extend(&next);
            self.leave();
            if !ok {
                return false;
            }
        }
        true
    }
}

/// Two polymers are incompatible when they share a vertex.
pub fn incompatible(a: &Polymer, b: &Polymer) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.vertices.len() && j < b.vertices.len() {
        match a.vertices[i].cmp(&b.vertices[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Polymer weight `(w−1)^‖γ‖ · k^(−|γ|) · sat_π(γ)`, with its log-space form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolymerWeight {
    pub value: Complex64,
    /// `log |w_γ|`; `-inf` when the weight vanishes.
    pub log_magnitude: f64,
    /// `arg w_γ` as `‖γ‖ · arg(w−1)`; zero when the weight vanishes.
    pub phase: f64,
}

/// `log |w_γ|` from the polymer's shape alone; usable when `k` is far too
/// large to represent.
pub fn log_abs_weight(edge_count: usize, vertex_count: usize, log_sat: f64, log_k: f64, log_abs_w_minus_1: f64) -> f64 {
    if log_sat == f64::NEG_INFINITY || log_abs_w_minus_1 == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    edge_count as f64 * log_abs_w_minus_1 - vertex_count as f64 * log_k + log_sat
}

pub fn polymer_weight(inst: &UgInstance, polymer: &Polymer, w: Complex64) -> PolymerWeight {
    let u = w - 1.0;
    let log_sat = (polymer.sat as f64).ln();
    let log_magnitude = log_abs_weight(
        polymer.edge_count(),
        polymer.size(),
        log_sat,
        (inst.k() as f64).ln(),
        u.norm().ln(),
    );
    if log_magnitude == f64::NEG_INFINITY {
        return PolymerWeight {
            value: Complex64::zero(),
            log_magnitude,
            phase: 0.0,
        };
    }
    let phase = polymer.edge_count() as f64 * u.arg();
    PolymerWeight {
        value: Complex64::from_polar(log_magnitude.exp(), phase),
        log_magnitude,
        phase,
    }
}

/// Exact polymer weight at a rational `w`.
pub fn polymer_weight_exact(inst: &UgInstance, polymer: &Polymer, w: &BigRational) -> BigRational {
    let u = w - BigRational::one();
    let mut value = BigRational::from_integer(BigInt::from(polymer.sat));
    for _ in 0..polymer.edge_count() {
        value *= &u;
    }
    let k = BigInt::from(inst.k());
    value / BigRational::from_integer(num_traits::pow(k, polymer.size()))
}

/// One case of the weight-bound argument, keyed by `s = ‖γ‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseVerdict {
    pub case: u8,
    /// Inclusive range of `s` covered; `None` upper end means unbounded.
    pub s_range: (u64, Option<u64>),
    /// `s` at which the slack is smallest.
    pub worst_s: Option<u64>,
    /// Minimum over the range of `s·log C − (bound on log |w_γ|)`.
    pub slack: f64,
    pub pass: bool,
}

/// Outcome of checking the polymer weight bound `|w_γ| ≤ C^‖γ‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpReport {
    pub delta: usize,
    /// Lower bound on `‖γ‖ / |γ|` for polymers (always 1/2).
    pub b: Ratio<u64>,
    /// `C = e^(−9 − 2 log Δ)`.
    pub big_c: f64,
    pub log_c: f64,
    /// `ζ = 8 / √Δ`.
    pub zeta: f64,
    /// Smallest admissible `log k`, namely `−log C · 2Δ/ζ`.
    pub log_k_threshold: f64,
    /// Largest admissible `log w`, namely `(2 − ζ) log k / Δ`.
    pub log_w_max: f64,
    pub hypothesis_k: bool,
    pub hypothesis_w: bool,
    pub cases: Vec<CaseVerdict>,
    /// Human-readable reasons for failure, empty on pass.
    pub violations: Vec<String>,
    pub pass: bool,
}

/// Smallest maximum degree for which the weight-bound argument is carried out.
pub const KP_MIN_DELTA: usize = 16;

/// Checks, in log space, the hypotheses `k ≥ C^(−2Δ/ζ)` and
/// `1 ≤ w ≤ e^((2−ζ) log k / Δ)` and re-derives the three-case bound
/// `|w_γ| ≤ C^‖γ‖`, using the actual `w` in each chain.
pub fn check_kp_conditions(log_k: f64, delta: usize, log_w: f64) -> Result<KpReport> {
    if delta < KP_MIN_DELTA {
        return Err(Error::Precondition(format!(
            "Δ = {delta} is outside the proven regime (Δ ≥ {KP_MIN_DELTA})"
        )));
    }
    if !log_k.is_finite() || !log_w.is_finite() {
        return Err(Error::param("log k and log w must be finite"));
    }
    let d = delta as f64;
    let log_c = -9.0 - 2.0 * d.ln();
    let zeta = 8.0 / d.sqrt();
    let log_k_threshold = -log_c * 2.0 * d / zeta;
    let log_w_max = (2.0 - zeta) * log_k / d;
    let hypothesis_k = log_k >= log_k_threshold;
    let hypothesis_w = log_w >= 0.0 && log_w <= log_w_max;

    // log |w − 1| with w = e^log_w.
    let log_u = log_w.exp_m1().abs().ln();
    let bound = |s: f64, min_size: f64| log_k * (1.0 - min_size) + s * log_u;
    let slack = |s: f64, min_size: f64| {
        let b = bound(s, min_size);
        if b == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            s * log_c - b
        }
    };

    let mut cases = Vec::with_capacity(3);

    // Case 3: 1 ≤ s ≤ Δ. A single edge has two vertices; anything larger has
    // at least three. The slack is linear in s on 2..=Δ.
    {
        let mut worst = (slack(1.0, 2.0), 1u64);
        for s in [2u64, delta as u64] {
            let v = slack(s as f64, 3.0);
            if v < worst.0 {
                worst = (v, s);
            }
        }
        cases.push(CaseVerdict {
            case: 3,
            s_range: (1, Some(delta as u64)),
            worst_s: Some(worst.1),
            slack: worst.0,
            pass: worst.0 >= 0.0,
        });
    }

    // Case 2: Δ < s ≤ 2Δ/ζ, using ‖γ‖ ≤ |γ|(|γ|−1)/2 so |γ| > √(2s).
    let case2_hi = (2.0 * d / zeta).floor() as u64;
    {
        let mut worst: Option<(f64, u64)> = None;
        for s in (delta as u64 + 1)..=case2_hi {
            let v = slack(s as f64, (2.0 * s as f64).sqrt());
            if worst.map_or(true, |(w, _)| v < w) {
                worst = Some((v, s));
            }
        }
        let (slack_v, worst_s) = match worst {
            Some((v, s)) => (v, Some(s)),
            None => (f64::INFINITY, None),
        };
        cases.push(CaseVerdict {
            case: 2,
            s_range: (delta as u64 + 1, Some(case2_hi)),
            worst_s,
            slack: slack_v,
            pass: slack_v >= 0.0,
        });
    }

    // Case 1: s > 2Δ/ζ, using |γ| ≥ 2s/Δ. The slack is
    // s·(log C + 2 log k/Δ − log|w−1|) − log k, linear in s.
    {
        let s1 = case2_hi + 1;
        let slope = log_c + 2.0 * log_k / d - log_u;
        let at_start = slack(s1 as f64, 2.0 * s1 as f64 / d);
        let slack_v = if slope < 0.0 { f64::NEG_INFINITY } else { at_start };
        cases.push(CaseVerdict {
            case: 1,
            s_range: (s1, None),
            worst_s: (slope >= 0.0).then_some(s1),
            slack: slack_v,
            pass: slack_v >= 0.0,
        });
    }

    let mut violations = Vec::new();
    if !hypothesis_k {
        violations.push(format!(
            "hypothesis k ≥ C^(−2Δ/ζ) fails: log k = {log_k} < {log_k_threshold}"
        ));
    }
    if !hypothesis_w {
        violations.push(format!(
            "hypothesis 1 ≤ w ≤ e^((2−ζ)log k/Δ) fails: log w = {log_w} not in [0, {log_w_max}]"
        ));
    }
    for c in cases.iter().filter(|c| !c.pass) {
        violations.push(format!("case {} weight bound fails (slack {})", c.case, c.slack));
    }
    let pass = violations.is_empty();
    Ok(KpReport {
        delta,
        b: Ratio::new(1, 2),
        big_c: log_c.exp(),
        log_c,
        zeta,
        log_k_threshold,
        log_w_max,
        hypothesis_k,
        hypothesis_w,
        cases,
        violations,
        pass,
    })
}
