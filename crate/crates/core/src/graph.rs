//! Simple undirected graphs, DIMACS edge-format I/O and the generators used
//! to build experiment corpora.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::parse_rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

/// A simple undirected graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adjacency: Vec<bool>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adjacency: vec![false; n * n],
            edges: Vec::new(),
        }
    }

    /// Builds a graph from an edge list. Duplicates collapse; self-loops and
    /// out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::InvalidParams(format!("self-loop at vertex {u}")));
            }
            g.adjacency[u * n + v] = true;
            g.adjacency[v * n + u] = true;
        }
        g.rebuild_edges();
        Ok(g)
    }

    fn rebuild_edges(&mut self) {
        let n = self.n;
        self.edges = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| self.adjacency[u * n + v])
            .collect();
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u * self.n + v]
    }

    /// Vertex degree ρ(v).
    pub fn degree(&self, v: usize) -> usize {
        (0..self.n).filter(|&u| self.has_edge(v, u)).count()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&u| self.has_edge(v, u))
    }

    /// Unchecked penalty lookup used on hot paths: 1 for a non-edge (including
    /// the diagonal), 0 for an edge.
    #[inline]
    pub fn penalty(&self, u: usize, v: usize) -> u8 {
        u8::from(!self.adjacency[u * self.n + v])
    }

    /// 1 iff `{u, v}` is not an edge. Self-pairs are non-edges.
    pub fn nonedge_penalty(&self, u: usize, v: usize) -> Result<u8, GraphError> {
        for w in [u, v] {
            if w >= self.n {
                return Err(GraphError::VertexOutOfRange { vertex: w, n: self.n });
            }
        }
        Ok(self.penalty(u, v))
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for u in self.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Parses the DIMACS edge format (`c` comments, one `p edge n m` line and
/// `m` lines `e u v` with 1-based endpoints).
pub fn parse_dimacs(text: &str) -> Result<Graph, GraphError> {
    let err = |line: usize, msg: &str| GraphError::Parse {
        line,
        msg: msg.to_string(),
    };
    let mut header: Option<(usize, usize, usize)> = None;
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("c") => continue,
            Some("p") => {
                if header.is_some() {
                    return Err(err(line_no, "duplicate problem line"));
                }
                if fields.next() != Some("edge") {
                    return Err(err(line_no, "expected `p edge <n> <m>`"));
                }
                let n = parse_count(fields.next(), line_no)?;
                let m = parse_count(fields.next(), line_no)?;
                if fields.next().is_some() {
                    return Err(err(line_no, "trailing fields on problem line"));
                }
                header = Some((n, m, line_no));
            }
            Some("e") => {
                let Some((n, _, _)) = header else {
                    return Err(err(line_no, "edge line before problem line"));
                };
                let u = parse_count(fields.next(), line_no)?;
                let v = parse_count(fields.next(), line_no)?;
                if fields.next().is_some() {
                    return Err(err(line_no, "trailing fields on edge line"));
                }
                if !(1..=n).contains(&u) || !(1..=n).contains(&v) {
                    return Err(err(line_no, "vertex out of range"));
                }
                if u == v {
                    return Err(err(line_no, "self-loop"));
                }
                pairs.push((u - 1, v - 1));
            }
            Some(other) => {
                return Err(err(line_no, &format!("unknown line type `{other}`")));
            }
            None => unreachable!("blank lines are skipped"),
        }
    }
    let Some((n, m, p_line)) = header else {
        return Err(err(0, "missing problem line"));
    };
    if pairs.len() != m {
        return Err(err(
            p_line,
            &format!("header declares {m} edges but {} edge lines follow", pairs.len()),
        ));
    }
    Graph::from_edges(n, &pairs).map_err(|e| err(p_line, &e.to_string()))
}

fn parse_count(field: Option<&str>, line: usize) -> Result<usize, GraphError> {
    field
        .ok_or_else(|| GraphError::Parse {
            line,
            msg: "missing field".into(),
        })?
        .parse()
        .map_err(|_| GraphError::Parse {
            line,
            msg: "expected a non-negative integer".into(),
        })
}

/// Canonical DIMACS text: sorted 1-based edges, LF line endings.
pub fn emit_dimacs(g: &Graph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p edge {} {}", g.n(), g.edge_count());
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "e {} {}", u + 1, v + 1);
    }
    out
}

/// Edge probability in `[0, 1]`, kept as an exact rational and serialized as
/// a string such as `"1/2"` or `"0.35"`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Probability(BigRational);

impl Probability {
    pub fn new(p: BigRational) -> Result<Self, GraphError> {
        if p.is_negative() || p > BigRational::one() {
            return Err(GraphError::InvalidParams(format!("probability {p} outside [0, 1]")));
        }
        Ok(Probability(p))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    /// `ceil(p * 2^64)`: a uniform `u64` draw `r` succeeds iff `r < threshold`.
    fn threshold(&self) -> u128 {
        let scaled = self.0.clone() * BigRational::from_integer(BigInt::one() << 64u32);
        scaled.ceil().to_integer().to_u128().expect("p <= 1")
    }
}

impl FromStr for Probability {
    type Err = GraphError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let p = parse_rational(s).map_err(|e| GraphError::InvalidParams(e.to_string()))?;
        Probability::new(p)
    }
}

impl std::fmt::Display for Probability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Probability {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Probability {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Graph families available to `generate`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Cycle { n: usize },
    Complete { n: usize },
    Path { n: usize },
    Petersen,
    CompleteBipartite { a: usize, b: usize },
    Gnp { n: usize, p: Probability, seed: u64 },
    PlantedHamiltonian { n: usize, p: Probability, seed: u64 },
}

impl GeneratorSpec {
    /// Short stable name used for report file names.
    pub fn name(&self) -> String {
        match self {
            GeneratorSpec::Cycle { n } => format!("cycle{n}"),
            GeneratorSpec::Complete { n } => format!("complete{n}"),
            GeneratorSpec::Path { n } => format!("path{n}"),
            GeneratorSpec::Petersen => "petersen".into(),
            GeneratorSpec::CompleteBipartite { a, b } => format!("complete_bipartite{a}x{b}"),
            GeneratorSpec::Gnp { n, p, seed } => {
                format!("gnp{n}_p{}_s{seed}", p.to_string().replace('/', "over"))
            }
            GeneratorSpec::PlantedHamiltonian { n, p, seed } => {
                format!("planted{n}_p{}_s{seed}", p.to_string().replace('/', "over"))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub graph: Graph,
    /// The embedded cycle for `planted_hamiltonian`.
    pub planted_cycle: Option<Vec<usize>>,
}

fn require_n(n: usize, min: usize) -> Result<(), GraphError> {
    if n < min {
        return Err(GraphError::InvalidParams(format!("n = {n}, need n >= {min}")));
    }
    Ok(())
}

/// Deterministic graph generation: identical specs give identical graphs.
pub fn generate(spec: &GeneratorSpec) -> Result<Generated, GraphError> {
    let plain = |graph| Generated {
        graph,
        planted_cycle: None,
    };
    match *spec {
        GeneratorSpec::Cycle { n } => {
            require_n(n, 3)?;
            let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            Ok(plain(Graph::from_edges(n, &edges)?))
        }
        GeneratorSpec::Complete { n } => {
            require_n(n, 3)?;
            let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            Ok(plain(Graph::from_edges(n, &edges)?))
        }
        GeneratorSpec::Path { n } => {
            require_n(n, 3)?;
            let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
            Ok(plain(Graph::from_edges(n, &edges)?))
        }
        GeneratorSpec::Petersen => {
            // Outer 5-cycle 0..5, inner pentagram 5..10, spokes i -- i+5.
            let mut edges = Vec::with_capacity(15);
            for i in 0..5 {
                edges.push((i, (i + 1) % 5));
                edges.push((5 + i, 5 + (i + 2) % 5));
                edges.push((i, i + 5));
            }
            Ok(plain(Graph::from_edges(10, &edges)?))
        }
        GeneratorSpec::CompleteBipartite { a, b } => {
            if a == 0 || b == 0 {
                return Err(GraphError::InvalidParams("empty bipartition side".into()));
            }
            let edges: Vec<_> = (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v))).collect();
            Ok(plain(Graph::from_edges(a + b, &edges)?))
        }
        GeneratorSpec::Gnp { n, ref p, seed } => {
            require_n(n, 1)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let threshold = p.threshold();
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if u128::from(rng.random::<u64>()) < threshold {
                        edges.push((u, v));
                    }
                }
            }
            Ok(plain(Graph::from_edges(n, &edges)?))
        }
        GeneratorSpec::PlantedHamiltonian { n, ref p, seed } => {
            require_n(n, 3)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cycle: Vec<usize> = (0..n).collect();
            cycle.shuffle(&mut rng);
            let mut g = Graph::empty(n);
            for i in 0..n {
                let (u, v) = (cycle[i], cycle[(i + 1) % n]);
                g.adjacency[u * n + v] = true;
                g.adjacency[v * n + u] = true;
            }
            let threshold = p.threshold();
            for u in 0..n {
                for v in u + 1..n {
                    // Draw for every pair so the stream does not depend on the cycle.
                    let hit = u128::from(rng.random::<u64>()) < threshold;
                    if hit {
                        g.adjacency[u * n + v] = true;
                        g.adjacency[v * n + u] = true;
                    }
                }
            }
            g.rebuild_edges();
            Ok(Generated {
                graph: g,
                planted_cycle: Some(cycle),
            })
        }
    }
}

/// Every connected graph on `n <= 6` vertices up to isomorphism, each in the
/// canonical labelling whose upper-triangle edge mask is minimal.
pub fn all_connected_graphs(n: usize) -> Result<Vec<Graph>, GraphError> {
    if !(1..=6).contains(&n) {
        return Err(GraphError::InvalidParams(format!(
            "isomorphism-class enumeration supports 1 <= n <= 6, got {n}"
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let mut index = vec![0usize; n * n];
    for (k, &(u, v)) in pairs.iter().enumerate() {
        index[u * n + v] = k;
        index[v * n + u] = k;
    }
    let perms = permutations(n);
    // Bit k of the image mask for each (perm, source bit).
    let images: Vec<Vec<u32>> = perms
        .iter()
        .map(|perm| {
            pairs
                .iter()
                .map(|&(u, v)| 1u32 << index[perm[u] * n + perm[v]])
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    'masks: for mask in 0u32..(1u32 << pairs.len()) {
        for image in &images {
            let mut mapped = 0u32;
            let mut bits = mask;
            while bits != 0 {
                let k = bits.trailing_zeros() as usize;
                mapped |= image[k];
                bits &= bits - 1;
            }
            if mapped < mask {
                continue 'masks;
            }
        }
        let edges: Vec<_> = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let g = Graph::from_edges(n, &edges)?;
        if g.is_connected() {
            out.push(g);
        }
    }
    Ok(out)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    heap_permute(n, &mut current, &mut out);
    out
}

fn heap_permute(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(a.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, a, out);
        if k.is_multiple_of(2) {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
    }
}

/// Bernoulli helper exposed for tests of the threshold rule.
#[doc(hidden)]
pub fn probability_threshold(p: &Probability) -> u128 {
    p.threshold()
}
