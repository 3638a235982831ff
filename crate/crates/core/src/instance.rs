//! Unique Games instances, assignments and instance generators.
//!
//! The on-disk format is a compact JSON document
//! `{"k":3,"n":2,"edges":[{"u":0,"v":1,"perm":[0,1,2]}]}`. Instances are
//! canonicalized on construction (edges sorted by `(u, v)`), so two
//! structurally equal instances serialize to identical bytes.

use std::ops::Range;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Budget;
use crate::error::{Error, Result};
use crate::par;

/// Exact value of an assignment, as a fraction of satisfied edges.
pub type Value = Ratio<u64>;

const MAX_PAIRING_RETRIES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("alphabet size must be at least 2, got {0}")]
    AlphabetTooSmall(usize),
    #[error("edge {edge}: permutation has length {got}, expected {expected}")]
    PermLength {
        edge: usize,
        expected: usize,
        got: usize,
    },
    #[error("edge {edge}: non-bijective permutation")]
    NonBijective { edge: usize },
    #[error("edge {edge}: vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { edge: usize, vertex: usize, n: usize },
    #[error("edge {edge}: self-loop at vertex {vertex}")]
    SelfLoop { edge: usize, vertex: usize },
    #[error("duplicate edge between {u} and {v}")]
    DuplicateEdge { u: usize, v: usize },
    #[error("assignment has length {got}, expected {expected}")]
    AssignmentLength { expected: usize, got: usize },
    #[error("vertex {vertex}: color {color} out of range (k = {k})")]
    ColorOutOfRange { vertex: usize, color: usize, k: usize },
    #[error("instance has no edges")]
    EmptyEdgeSet,
    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),
    #[error("generator gave up after {0} attempts")]
    RetryLimit(usize),
}

/// An oriented constraint: satisfied when `perm[color(u)] == color(v)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub perm: Vec<usize>,
}

impl Edge {
    pub fn new(u: usize, v: usize, perm: Vec<usize>) -> Self {
        Self { u, v, perm }
    }

    #[inline]
    pub fn satisfied_by(&self, colors: &[usize]) -> bool {
        self.perm[colors[self.u]] == colors[self.v]
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    k: usize,
    n: usize,
    edges: Vec<Edge>,
}

/// A validated Unique Games instance. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UgInstance {
    k: usize,
    n: usize,
    edges: Vec<Edge>,
    /// `inverses[i]` is the inverse of `edges[i].perm`.
    inverses: Vec<Vec<usize>>,
    /// `adjacency[v]` lists `(neighbor, edge index)` pairs.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl UgInstance {
    pub fn new(k: usize, n: usize, mut edges: Vec<Edge>) -> std::result::Result<Self, InstanceError> {
        if k < 2 {
            return Err(InstanceError::AlphabetTooSmall(k));
        }
        let mut seen = vec![false; k];
        for (i, e) in edges.iter().enumerate() {
            for vertex in [e.u, e.v] {
                if vertex >= n {
                    return Err(InstanceError::VertexOutOfRange { edge: i, vertex, n });
                }
            }
            if e.u == e.v {
                return Err(InstanceError::SelfLoop { edge: i, vertex: e.u });
            }
            if e.perm.len() != k {
                return Err(InstanceError::PermLength {
                    edge: i,
                    expected: k,
                    got: e.perm.len(),
                });
            }
            seen.iter_mut().for_each(|s| *s = false);
            for &c in &e.perm {
                if c >= k || seen[c] {
                    return Err(InstanceError::NonBijective { edge: i });
                }
                seen[c] = true;
            }
        }
        edges.sort_by(|a, b| (a.u, a.v).cmp(&(b.u, b.v)));
        let mut pairs: Vec<(usize, usize)> =
            edges.iter().map(|e| (e.u.min(e.v), e.u.max(e.v))).collect();
        pairs.sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0] == w[1]) {
            return Err(InstanceError::DuplicateEdge { u: w[0].0, v: w[0].1 });
        }
        let mut adjacency = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.u].push((e.v, i));
            adjacency[e.v].push((e.u, i));
        }
        let inverses = edges
            .iter()
            .map(|e| {
                let mut inv = vec![0; k];
                for (a, &b) in e.perm.iter().enumerate() {
                    inv[b] = a;
                }
                inv
            })
            .collect();
        Ok(Self {
            k,
            n,
            edges,
            inverses,
            adjacency,
        })
    }

    /// Parses and validates an instance document.
    pub fn parse(text: &str) -> std::result::Result<Self, InstanceError> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| InstanceError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::new(file.k, file.n, file.edges)
    }

    /// Canonical serialization: edges sorted by `(u, v)`, no whitespace.
    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            k: self.k,
            n: self.n,
            edges: self.edges.clone(),
        };
        serde_json::to_string(&file).expect("instance serialization cannot fail")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Color forced on the far endpoint of edge `e` when `from` has `color`.
    #[inline]
    pub fn propagate(&self, e: usize, from: usize, color: usize) -> usize {
        let edge = &self.edges[e];
        if from == edge.u {
            edge.perm[color]
        } else {
            self.inverses[e][color]
        }
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_regular(&self) -> bool {
        self.adjacency.windows(2).all(|w| w[0].len() == w[1].len())
    }

    pub fn satisfied_count(&self, colors: &[usize]) -> usize {
        self.edges.iter().filter(|e| e.satisfied_by(colors)).count()
    }

    /// Same instance with every color renamed by `relabel`: each constraint
    /// `π` becomes `relabel ∘ π ∘ relabel⁻¹`.
    pub fn conjugate(&self, relabel: &[usize]) -> std::result::Result<Self, InstanceError> {
        let mut inverse = vec![usize::MAX; self.k];
        for (a, &b) in relabel.iter().enumerate() {
            if b >= self.k || inverse[b] != usize::MAX {
                return Err(InstanceError::NonBijective { edge: usize::MAX });
            }
            inverse[b] = a;
        }
        if relabel.len() != self.k {
            return Err(InstanceError::PermLength {
                edge: usize::MAX,
                expected: self.k,
                got: relabel.len(),
            });
        }
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let perm = (0..self.k).map(|c| relabel[e.perm[inverse[c]]]).collect();
                Edge::new(e.u, e.v, perm)
            })
            .collect();
        Self::new(self.k, self.n, edges)
    }

    /// `k^n`, or `None` when it does not fit in a `u64`.
    pub fn coloring_count(&self) -> Option<u64> {
        (self.k as u64).checked_pow(u32::try_from(self.n).ok()?)
    }

    pub(crate) fn check_coloring_budget(&self, budget: &Budget) -> Result<u64> {
        match self.coloring_count() {
            Some(c) if c <= budget.colorings => Ok(c),
            _ => Err(Error::budget(
                "colorings",
                (self.k as f64).powi(self.n as i32),
                budget.colorings as f64,
            )),
        }
    }
}

impl Serialize for UgInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        InstanceFile {
            k: self.k,
            n: self.n,
            edges: self.edges.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for UgInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = InstanceFile::deserialize(d)?;
        UgInstance::new(file.k, file.n, file.edges).map_err(serde::de::Error::custom)
    }
}

/// A coloring of the vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(pub Vec<usize>);

impl Assignment {
    pub fn colors(&self) -> &[usize] {
        &self.0
    }

    pub fn validate(&self, inst: &UgInstance) -> std::result::Result<(), InstanceError> {
        if self.0.len() != inst.n() {
            return Err(InstanceError::AssignmentLength {
                expected: inst.n(),
                got: self.0.len(),
            });
        }
        if let Some((vertex, &color)) = self.0.iter().enumerate().find(|(_, &c)| c >= inst.k()) {
            return Err(InstanceError::ColorOutOfRange {
                vertex,
                color,
                k: inst.k(),
            });
        }
        Ok(())
    }
}

/// A generated instance together with the assignment it was planted around.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedInstance {
    pub instance: UgInstance,
    pub planted: Assignment,
    /// Guaranteed lower bound on the planted assignment's value.
    pub planted_value: Value,
}

/// Fraction of edges satisfied by `a`.
pub fn assignment_value(inst: &UgInstance, a: &Assignment) -> std::result::Result<Value, InstanceError> {
    a.validate(inst)?;
    if inst.edge_count() == 0 {
        return Err(InstanceError::EmptyEdgeSet);
    }
    Ok(Ratio::new(
        inst.satisfied_count(a.colors()) as u64,
        inst.edge_count() as u64,
    ))
}

/// Decodes coloring `index` in mixed radix `k` (vertex 0 least significant).
pub(crate) fn decode_coloring(mut index: u64, k: usize, colors: &mut [usize]) {
    for c in colors.iter_mut() {
        *c = (index % k as u64) as usize;
        index /= k as u64;
    }
}

/// Calls `f` on every coloring whose index lies in `range`.
pub(crate) fn for_each_coloring(inst: &UgInstance, range: Range<u64>, mut f: impl FnMut(&[usize])) {
    let k = inst.k();
    let mut colors = vec![0usize; inst.n()];
    decode_coloring(range.start, k, &mut colors);
    for _ in range {
        f(&colors);
        for c in colors.iter_mut() {
            *c += 1;
            if *c < k {
                break;
            }
            *c = 0;
        }
    }
}

/// Histogram of satisfied-edge counts over all `k^n` colorings.
pub(crate) fn satisfied_histogram(inst: &UgInstance, budget: &Budget) -> Result<Vec<u64>> {
    let total = inst.check_coloring_budget(budget)?;
    let chunks = par::chunks(total, par::default_parts(total));
    let partials = par::map(&chunks, |range| {
        let mut hist = vec![0u64; inst.edge_count() + 1];
        for_each_coloring(inst, range.clone(), |colors| {
            hist[inst.satisfied_count(colors)] += 1;
        });
        hist
    });
    let mut hist = vec![0u64; inst.edge_count() + 1];
    for p in partials {
        for (h, x) in hist.iter_mut().zip(p) {
            *h += x;
        }
    }
    Ok(hist)
}

/// Exact instance value: the best assignment value over all `k^n` colorings.
pub fn instance_value_brute(inst: &UgInstance, budget: &Budget) -> Result<Value> {
    if inst.edge_count() == 0 {
        return Err(InstanceError::EmptyEdgeSet.into());
    }
    let total = inst.check_coloring_budget(budget)?;
    let chunks = par::chunks(total, par::default_parts(total));
    let best = par::map(&chunks, |range| {
        let mut best = 0usize;
        for_each_coloring(inst, range.clone(), |colors| {
            best = best.max(inst.satisfied_count(colors));
        });
        best
    })
    .into_iter()
    .max()
    .unwrap_or(0);
    Ok(Ratio::new(best as u64, inst.edge_count() as u64))
}

fn check_regular_params(n: usize, degree: usize, k: usize) -> std::result::Result<(), InstanceError> {
    if k < 2 {
        return Err(InstanceError::AlphabetTooSmall(k));
    }
    if (n * degree) % 2 == 1 {
        return Err(InstanceError::Infeasible(format!("nΔ odd (n = {n}, Δ = {degree})")));
    }
    if degree >= n && !(n == 0 && degree == 0) {
        return Err(InstanceError::Infeasible(format!("Δ = {degree} must be below n = {n}")));
    }
    Ok(())
}

/// Simple `degree`-regular graph from the pairing model, rejecting pairings
/// with loops or repeated edges. Edges come back as `(min, max)` pairs.
fn random_regular_graph(
    n: usize,
    degree: usize,
    rng: &mut ChaCha8Rng,
) -> std::result::Result<Vec<(usize, usize)>, InstanceError> {
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(degree)).collect();
    let mut pairs = Vec::with_capacity(points.len() / 2);
    let mut seen = std::collections::HashSet::with_capacity(points.len() / 2);
    'attempt: for _ in 0..MAX_PAIRING_RETRIES {
        points.shuffle(rng);
        pairs.clear();
        seen.clear();
        for p in points.chunks_exact(2) {
            let (a, b) = (p[0].min(p[1]), p[0].max(p[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'attempt;
            }
            pairs.push((a, b));
        }
        return Ok(pairs);
    }
    Err(InstanceError::RetryLimit(MAX_PAIRING_RETRIES))
}

fn random_perm(k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..k).collect();
    perm.shuffle(rng);
    perm
}

/// Random simple `degree`-regular instance with independent uniform
/// permutations. Deterministic in `seed`.
pub fn gen_random_regular(
    n: usize,
    degree: usize,
    k: usize,
    seed: u64,
) -> std::result::Result<UgInstance, InstanceError> {
    check_regular_params(n, degree, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = random_regular_graph(n, degree, &mut rng)?;
    let edges = pairs
        .into_iter()
        .map(|(u, v)| Edge::new(u, v, random_perm(k, &mut rng)))
        .collect();
    UgInstance::new(k, n, edges)
}

/// Random regular instance with a planted assignment satisfying at least a
/// `1 − eps` fraction of the edges.
///
/// `⌈(1 − eps)|E|⌉` edges, chosen uniformly, get a uniform permutation
/// conditioned on agreeing with the planted coloring; the rest get an
/// unconditioned uniform permutation.
pub fn gen_planted(
    n: usize,
    degree: usize,
    k: usize,
    eps: Ratio<u64>,
    seed: u64,
) -> std::result::Result<PlantedInstance, InstanceError> {
    check_regular_params(n, degree, k)?;
    if eps >= Ratio::from_integer(1) {
        return Err(InstanceError::Infeasible(format!("ε = {eps} must be below 1")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = random_regular_graph(n, degree, &mut rng)?;
    let planted: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();

    let m = pairs.len() as u64;
    let keep = (Ratio::from_integer(1) - eps) * Ratio::from_integer(m);
    let keep = keep.ceil().to_integer() as usize;
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut rng);
    let mut conditioned = vec![false; pairs.len()];
    for &i in &order[..keep] {
        conditioned[i] = true;
    }

    let edges = pairs
        .iter()
        .zip(&conditioned)
        .map(|(&(u, v), &cond)| {
            let mut perm = random_perm(k, &mut rng);
            if cond {
                let j = perm.iter().position(|&c| c == planted[v]).expect("perm is a bijection");
                perm.swap(j, planted[u]);
            }
            Edge::new(u, v, perm)
        })
        .collect();
    let instance = UgInstance::new(k, n, edges)?;
    let planted_value = if m == 0 {
        Ratio::from_integer(1)
    } else {
        Ratio::new(keep as u64, m)
    };
    Ok(PlantedInstance {
        instance,
        planted: Assignment(planted),
        planted_value,
    })
}
