//! The Lagrangian dual function with the one-position-per-vertex constraints
//! relaxed. Evaluation is a shortest path on the layered (vertex, position)
//! digraph and is exact: multipliers are rationals, scaled to a common
//! integer denominator before the search.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decider::verify_certificate;
use crate::graph::Graph;

/// Largest `n` accepted by [`brute_dual`].
pub const BRUTE_MAX_N: usize = 7;

/// Node budget of the certificate search in one dual evaluation.
pub const CERTIFICATE_SEARCH_BUDGET: u64 = 100_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DualError {
    #[error("graph has {0} vertices; the dual needs at least 3")]
    TooFewVertices(usize),
    #[error("multiplier vector has length {got}, graph has {n} vertices")]
    LengthMismatch { got: usize, n: usize },
    #[error("exhaustive enumeration refused for n = {n} (limit {max})")]
    TooLarge { n: usize, max: usize },
    #[error("assignment is not a bijection between positions and vertices")]
    NotABijection,
    #[error("malformed assignment: {0}")]
    MalformedAssignment(String),
}

/// Which inner assignments the minimization ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum StartMode {
    /// Position 0 holds vertex 0; the remaining positions avoid vertex 0.
    PaperFixed,
    /// Best over every choice of the anchored vertex, remaining positions avoid it.
    AllStarts,
    /// Every map from positions to vertices.
    Unrestricted,
}

impl StartMode {
    pub fn as_str(self) -> &'static str {
        match self {
            StartMode::PaperFixed => "paper_fixed",
            StartMode::AllStarts => "all_starts",
            StartMode::Unrestricted => "unrestricted",
        }
    }

    fn anchors(self, n: usize) -> std::ops::Range<usize> {
        match self {
            StartMode::PaperFixed => 0..1,
            StartMode::AllStarts | StartMode::Unrestricted => 0..n,
        }
    }

    fn inner_allows(self, anchor: usize, v: usize) -> bool {
        match self {
            StartMode::Unrestricted => true,
            StartMode::PaperFixed | StartMode::AllStarts => v != anchor,
        }
    }
}

impl fmt::Display for StartMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lagrange multipliers, one exact rational per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaVector(Vec<BigRational>);

impl LambdaVector {
    pub fn new(values: Vec<BigRational>) -> Self {
        LambdaVector(values)
    }

    pub fn zeros(n: usize) -> Self {
        LambdaVector(vec![BigRational::zero(); n])
    }

    pub fn values(&self) -> &[BigRational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> BigRational {
        self.0.iter().fold(BigRational::zero(), |acc, x| acc + x)
    }

    /// Integer numerators over the least common denominator.
    fn scaled(&self) -> (BigInt, Vec<BigInt>) {
        let denom = self.0.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let values = self.0.iter().map(|x| x.numer() * (&denom / x.denom())).collect();
        (denom, values)
    }
}

/// Position-to-vertex map produced by the inner minimization.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Walk {
    vertices: Vec<usize>,
    start_mode: StartMode,
}

impl Walk {
    pub fn new(vertices: Vec<usize>, start_mode: StartMode) -> Self {
        Walk { vertices, start_mode }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn start_mode(&self) -> StartMode {
        self.start_mode
    }

    pub fn multiplicities(&self, n: usize) -> Vec<usize> {
        let mut m = vec![0; n];
        for &v in &self.vertices {
            m[v] += 1;
        }
        m
    }

    /// Number of cyclic steps that are non-edges.
    pub fn penalty(&self, g: &Graph) -> u64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| u64::from(g.penalty(self.vertices[i], self.vertices[(i + 1) % n])))
            .sum()
    }

    /// Semicolon-joined vertex list, as used in traces.
    pub fn joined(&self) -> String {
        self.vertices
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// A vertex sequence already checked to be a Hamiltonian cycle of its graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct HamiltonianCycle(Vec<usize>);

impl HamiltonianCycle {
    pub fn verified(g: &Graph, cycle: &[usize]) -> Option<Self> {
        verify_certificate(g, cycle).then(|| HamiltonianCycle(cycle.to_vec()))
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualResult {
    pub value: BigRational,
    /// Lexicographically smallest minimizing walk.
    pub walk: Walk,
    /// `1 - multiplicity(v)` for each vertex.
    pub supergradient: Vec<i64>,
    /// Arc relaxations performed by the shortest-path pass.
    pub arcs_relaxed: u64,
}

impl DualResult {
    pub fn is_zero_gradient(&self) -> bool {
        self.supergradient.iter().all(|&g| g == 0)
    }
}

/// Cost-to-go table for one anchored vertex.
struct Layers<T> {
    anchor: usize,
    allowed: Vec<bool>,
    /// `to_go[i][u]`: cheapest completion from node `(u, i)`, node weight included.
    to_go: Vec<Vec<T>>,
    total: T,
}

fn shortest_paths<T>(g: &Graph, lam: &[T], unit: &T, anchor: usize, mode: StartMode, arcs: &mut u64) -> Layers<T>
where
    T: Clone + Ord + Signed,
{
    let n = g.n();
    let allowed: Vec<bool> = (0..n).map(|v| mode.inner_allows(anchor, v)).collect();
    let inner: Vec<usize> = (0..n).filter(|&v| allowed[v]).collect();
    let step = |from: usize, to: usize| -> Option<T> { (g.penalty(from, to) == 1).then(|| unit.clone()) };
    let with_step = |from: usize, to: usize, base: &T| match step(from, to) {
        Some(p) => p + base.clone(),
        None => base.clone(),
    };

    let mut to_go = vec![vec![T::zero(); n]; n];
    for &u in &inner {
        *arcs += 1;
        to_go[n - 1][u] = with_step(u, anchor, &T::zero()) - lam[u].clone();
    }
    for i in (1..n - 1).rev() {
        for &u in &inner {
            let mut best: Option<T> = None;
            for &w in &inner {
                *arcs += 1;
                let c = with_step(u, w, &to_go[i + 1][w]);
                if best.as_ref().is_none_or(|b| c < *b) {
                    best = Some(c);
                }
            }
            to_go[i][u] = best.expect("inner layer is non-empty") - lam[u].clone();
        }
    }
    let mut best: Option<T> = None;
    for &w in &inner {
        *arcs += 1;
        let c = with_step(anchor, w, &to_go[1][w]);
        if best.as_ref().is_none_or(|b| c < *b) {
            best = Some(c);
        }
    }
    let total = best.expect("inner layer is non-empty") - lam[anchor].clone();
    Layers {
        anchor,
        allowed,
        to_go,
        total,
    }
}

impl<T: Clone + Ord + Signed> Layers<T> {
    /// True if stepping `prev -> w` into position `i` stays on a minimum-cost
    /// walk, given the cost `residual` still to be paid from position `i`.
    fn tight(&self, g: &Graph, unit: &T, i: usize, prev: usize, w: usize, residual: &T) -> bool {
        let mut c = self.to_go[i][w].clone();
        if g.penalty(prev, w) == 1 {
            c = c + unit.clone();
        }
        c == *residual
    }

    /// Lexicographically smallest minimum-cost walk.
    fn trace(&self, g: &Graph, lam: &[T], unit: &T) -> Vec<usize> {
        let n = g.n();
        let mut walk = Vec::with_capacity(n);
        walk.push(self.anchor);
        let mut prev = self.anchor;
        let mut residual = self.total.clone() + lam[self.anchor].clone();
        for i in 1..n {
            let pick = (0..n)
                .filter(|&w| self.allowed[w])
                .find(|&w| self.tight(g, unit, i, prev, w, &residual))
                .expect("an optimal successor always exists");
            walk.push(pick);
            residual = self.to_go[i][pick].clone() + lam[pick].clone();
            prev = pick;
        }
        walk
    }

    /// Depth-first search over tight arcs for a minimum-cost walk that visits
    /// every vertex once, expanding at most `*budget` nodes.
    fn repeat_free(&self, g: &Graph, lam: &[T], unit: &T, budget: &mut u64) -> Option<Vec<usize>> {
        let n = g.n();
        let mut walk = vec![self.anchor];
        let mut visited = vec![false; n];
        visited[self.anchor] = true;
        let residual = self.total.clone() + lam[self.anchor].clone();
        self.extend(g, lam, unit, &mut walk, &mut visited, &residual, budget)
            .then_some(walk)
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        g: &Graph,
        lam: &[T],
        unit: &T,
        walk: &mut Vec<usize>,
        visited: &mut [bool],
        residual: &T,
        budget: &mut u64,
    ) -> bool {
        let n = g.n();
        let i = walk.len();
        if i == n {
            return true;
        }
        let prev = walk[i - 1];
        for w in 0..n {
            if visited[w] || !self.allowed[w] || !self.tight(g, unit, i, prev, w, residual) {
                continue;
            }
            if *budget == 0 {
                return false;
            }
            *budget -= 1;
            walk.push(w);
            visited[w] = true;
            let next = self.to_go[i][w].clone() + lam[w].clone();
            if self.extend(g, lam, unit, walk, visited, &next, budget) {
                return true;
            }
            visited[w] = false;
            walk.pop();
        }
        false
    }
}

fn check_input(g: &Graph, lambda: &LambdaVector) -> Result<(), DualError> {
    if g.n() < 3 {
        return Err(DualError::TooFewVertices(g.n()));
    }
    if lambda.len() != g.n() {
        return Err(DualError::LengthMismatch {
            got: lambda.len(),
            n: g.n(),
        });
    }
    Ok(())
}

struct Evaluation {
    result: DualResult,
    certificate: Option<HamiltonianCycle>,
}

fn evaluate_with<T>(
    g: &Graph,
    lambda: &LambdaVector,
    mode: StartMode,
    lam: &[T],
    unit: &T,
    want_certificate: bool,
) -> Evaluation
where
    T: Clone + Ord + Signed + IntoBig,
{
    let n = g.n();
    let mut arcs = 0u64;
    let tables: Vec<Layers<T>> = mode
        .anchors(n)
        .map(|a| shortest_paths(g, lam, unit, a, mode, &mut arcs))
        .collect();
    let best = tables
        .iter()
        .map(|t| &t.total)
        .min()
        .expect("at least one anchor")
        .clone();
    let optimal: Vec<&Layers<T>> = tables.iter().filter(|t| t.total == best).collect();
    let walk = Walk::new(optimal[0].trace(g, lam, unit), mode);

    let mult = walk.multiplicities(n);
    let supergradient = mult.iter().map(|&m| 1 - m as i64).collect();
    let lam_sum = lambda.sum();
    let (denom, _) = lambda.scaled();
    let value = BigRational::new(to_bigint(best), denom) + lam_sum;

    // A Hamiltonian cycle costs exactly 0, so it can only be optimal when the
    // minimum is 0.
    let certificate = if want_certificate && value.is_zero() {
        let mut budget = CERTIFICATE_SEARCH_BUDGET;
        optimal.iter().find_map(|t| {
            let w = t.repeat_free(g, lam, unit, &mut budget)?;
            HamiltonianCycle::verified(g, &w)
        })
    } else {
        None
    };
    Evaluation {
        result: DualResult {
            value,
            walk,
            supergradient,
            arcs_relaxed: arcs,
        },
        certificate,
    }
}

trait IntoBig {
    fn into_big(self) -> BigInt;
}

impl IntoBig for i128 {
    fn into_big(self) -> BigInt {
        BigInt::from(self)
    }
}

impl IntoBig for BigInt {
    fn into_big(self) -> BigInt {
        self
    }
}

fn to_bigint<T: IntoBig>(x: T) -> BigInt {
    x.into_big()
}

/// Magnitude bound below which every partial path cost fits in an `i128`.
fn fits_i128(n: usize, denom: &BigInt, values: &[BigInt]) -> bool {
    let worst = values.iter().map(|v| v.abs()).max().unwrap_or_default();
    let bound = (worst + denom) * BigInt::from(2 * n + 2);
    bound.bits() < 120
}

fn evaluate(
    g: &Graph,
    lambda: &LambdaVector,
    mode: StartMode,
    want_certificate: bool,
) -> Result<Evaluation, DualError> {
    check_input(g, lambda)?;
    let (denom, values) = lambda.scaled();
    if fits_i128(g.n(), &denom, &values) {
        let lam: Vec<i128> = values.iter().map(|v| i128::try_from(v).expect("checked")).collect();
        let unit = i128::try_from(&denom).expect("checked");
        Ok(evaluate_with(g, lambda, mode, &lam, &unit, want_certificate))
    } else {
        Ok(evaluate_with(g, lambda, mode, &values, &denom, want_certificate))
    }
}

/// Exact dual value `Λ(λ)` with a minimizing walk and its supergradient.
pub fn eval_dual(g: &Graph, lambda: &LambdaVector, mode: StartMode) -> Result<DualResult, DualError> {
    evaluate(g, lambda, mode, false).map(|e| e.result)
}

/// As [`eval_dual`], additionally searching the minimum-cost walks for one
/// that is a Hamiltonian cycle (at most [`CERTIFICATE_SEARCH_BUDGET`] search
/// nodes). The returned `DualResult` is the same as `eval_dual`'s.
pub fn eval_dual_with_certificate(
    g: &Graph,
    lambda: &LambdaVector,
    mode: StartMode,
) -> Result<(DualResult, Option<HamiltonianCycle>), DualError> {
    evaluate(g, lambda, mode, true).map(|e| (e.result, e.certificate))
}

/// Reference value of the dual by exhaustive enumeration of every admissible
/// inner assignment. Only for `n <= BRUTE_MAX_N`.
pub fn brute_dual(g: &Graph, lambda: &LambdaVector, mode: StartMode) -> Result<BigRational, DualError> {
    let n = g.n();
    if n > BRUTE_MAX_N {
        return Err(DualError::TooLarge { n, max: BRUTE_MAX_N });
    }
    check_input(g, lambda)?;
    let mut denom = BigInt::one();
    for x in lambda.values() {
        denom = denom.lcm(x.denom());
    }
    let scaled: Vec<i128> = lambda
        .values()
        .iter()
        .map(|x| i128::try_from(x.numer() * (&denom / x.denom())))
        .collect::<Result<_, _>>()
        .map_err(|_| DualError::MalformedAssignment("multiplier too large for enumeration".into()))?;
    let unit = i128::try_from(&denom)
        .map_err(|_| DualError::MalformedAssignment("denominator too large for enumeration".into()))?;

    let mut best: Option<i128> = None;
    let mut walk = vec![0usize; n];
    for anchor in mode.anchors(n) {
        walk[0] = anchor;
        enumerate(g, mode, &scaled, unit, &mut walk, 1, -scaled[anchor], &mut best);
    }
    let best = best.expect("n >= 3 admits at least one walk");
    Ok(BigRational::new(BigInt::from(best), denom) + lambda.sum())
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    g: &Graph,
    mode: StartMode,
    lam: &[i128],
    unit: i128,
    walk: &mut [usize],
    pos: usize,
    cost: i128,
    best: &mut Option<i128>,
) {
    let n = walk.len();
    if pos == n {
        let closing = i128::from(g.penalty(walk[n - 1], walk[0])) * unit;
        let total = cost + closing;
        if best.is_none_or(|b| total < b) {
            *best = Some(total);
        }
        return;
    }
    for v in 0..n {
        if !mode.inner_allows(walk[0], v) {
            continue;
        }
        walk[pos] = v;
        let c = cost + i128::from(g.penalty(walk[pos - 1], v)) * unit - lam[v];
        enumerate(g, mode, lam, unit, walk, pos + 1, c, best);
    }
}

/// 0/1 assignment matrix: `x[i][v] = 1` iff position `i` holds vertex `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    n: usize,
    cells: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeasibleSet {
    /// Every position holds exactly one vertex.
    D1,
    /// Every vertex sits at exactly one position.
    D2,
    /// Both.
    D,
}

impl Assignment {
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, DualError> {
        let n = rows.len();
        let mut cells = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(DualError::MalformedAssignment(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for &x in row {
                match x {
                    0 => cells.push(false),
                    1 => cells.push(true),
                    _ => return Err(DualError::MalformedAssignment(format!("entry {x} is not 0/1"))),
                }
            }
        }
        Ok(Assignment { n, cells })
    }

    pub fn from_walk(n: usize, walk: &[usize]) -> Result<Self, DualError> {
        if walk.len() != n || walk.iter().any(|&v| v >= n) {
            return Err(DualError::MalformedAssignment("walk does not match dimension".into()));
        }
        let mut cells = vec![false; n * n];
        for (i, &v) in walk.iter().enumerate() {
            cells[i * n + v] = true;
        }
        Ok(Assignment { n, cells })
    }

    pub fn get(&self, position: usize, vertex: usize) -> bool {
        self.cells[position * self.n + vertex]
    }
}

pub fn check_feasible(x: &Assignment, which: FeasibleSet) -> bool {
    let n = x.n;
    let rows = || (0..n).all(|i| (0..n).filter(|&v| x.get(i, v)).count() == 1);
    let cols = || (0..n).all(|v| (0..n).filter(|&i| x.get(i, v)).count() == 1);
    match which {
        FeasibleSet::D1 => rows(),
        FeasibleSet::D2 => cols(),
        FeasibleSet::D => rows() && cols(),
    }
}

/// Primal objective at a permutation: number of non-edge steps on the circuit.
pub fn primal_value(g: &Graph, perm: &[usize]) -> Result<u64, DualError> {
    let n = g.n();
    let x = Assignment::from_walk(n, perm).map_err(|_| DualError::NotABijection)?;
    if !check_feasible(&x, FeasibleSet::D) {
        return Err(DualError::NotABijection);
    }
    Ok((0..n).map(|i| u64::from(g.penalty(perm[i], perm[(i + 1) % n]))).sum())
}

/// The walk as a verified Hamiltonian cycle, if it is one.
pub fn decode_certificate(g: &Graph, walk: &Walk) -> Option<HamiltonianCycle> {
    HamiltonianCycle::verified(g, walk.vertices())
}
