//! Exact Hamiltonicity: Held–Karp subset DP and a budgeted backtracking
//! search. Used as the referee for solver decisions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decider::verify_certificate;
use crate::graph::Graph;

pub const HELD_KARP_MAX_N: usize = 24;
pub const COUNT_MAX_N: usize = 12;
pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("held-karp supports n <= {HELD_KARP_MAX_N}, got {0}")]
    TooLargeForHeldKarp(usize),
    #[error("cycle counting supports n <= {COUNT_MAX_N}, got {0}")]
    TooLargeForCount(usize),
    #[error("unresolved: backtracking budget of {0} nodes exhausted")]
    Unresolved(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum OracleMethod {
    Auto,
    HeldKarp,
    Backtracking,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub is_hamiltonian: bool,
    pub cycle: Option<Vec<usize>>,
    /// `held_karp` or `backtracking`; never `auto`.
    pub method: OracleMethod,
    /// States (Held–Karp) or search nodes (backtracking) expanded.
    pub work: u64,
}

pub fn is_hamiltonian_exact(g: &Graph, method: OracleMethod) -> Result<OracleResult, OracleError> {
    is_hamiltonian_with_budget(g, method, DEFAULT_NODE_BUDGET)
}

pub fn is_hamiltonian_with_budget(g: &Graph, method: OracleMethod, budget: u64) -> Result<OracleResult, OracleError> {
    let method = match method {
        OracleMethod::Auto if g.n() <= HELD_KARP_MAX_N => OracleMethod::HeldKarp,
        OracleMethod::Auto => OracleMethod::Backtracking,
        m => m,
    };
    let result = match method {
        OracleMethod::HeldKarp => held_karp(g)?,
        _ => backtracking(g, budget)?,
    };
    if let Some(c) = &result.cycle {
        assert!(verify_certificate(g, c), "oracle produced an invalid cycle");
    }
    Ok(result)
}

fn no_cycle(method: OracleMethod, work: u64) -> OracleResult {
    OracleResult {
        is_hamiltonian: false,
        cycle: None,
        method,
        work,
    }
}

fn held_karp(g: &Graph) -> Result<OracleResult, OracleError> {
    let n = g.n();
    if n > HELD_KARP_MAX_N {
        return Err(OracleError::TooLargeForHeldKarp(n));
    }
    if n < 3 {
        return Ok(no_cycle(OracleMethod::HeldKarp, 0));
    }
    // Vertex v >= 1 is bit v-1. ends[mask] has bit v-1 set iff some path
    // 0 -> ... -> v visits exactly {0} ∪ mask.
    let m = n - 1;
    let adj: Vec<u32> = (0..n)
        .map(|v| {
            (1..n)
                .filter(|&u| g.has_edge(v, u))
                .fold(0u32, |acc, u| acc | 1 << (u - 1))
        })
        .collect();
    let mut ends = vec![0u32; 1usize << m];
    let mut work = 0u64;
    for v in 1..n {
        if g.has_edge(0, v) {
            ends[1 << (v - 1)] |= 1 << (v - 1);
        }
    }
    for mask in 1usize..(1 << m) {
        let mut e = ends[mask];
        while e != 0 {
            let b = e.trailing_zeros() as usize;
            e &= e - 1;
            work += 1;
            let next = adj[b + 1] & !(mask as u32);
            let mut nx = next;
            while nx != 0 {
                let c = nx.trailing_zeros() as usize;
                nx &= nx - 1;
                ends[mask | 1 << c] |= 1 << c;
            }
        }
    }
    let full = (1usize << m) - 1;
    let Some(last) = (1..n).find(|&v| ends[full] >> (v - 1) & 1 == 1 && g.has_edge(v, 0)) else {
        return Ok(no_cycle(OracleMethod::HeldKarp, work));
    };
    let mut path = vec![last];
    let mut mask = full;
    let mut cur = last;
    while mask.count_ones() > 1 {
        let prev_mask = mask & !(1 << (cur - 1));
        let prev = (1..n)
            .find(|&u| ends[prev_mask] >> (u - 1) & 1 == 1 && g.has_edge(u, cur))
            .expect("reachable state has a predecessor");
        path.push(prev);
        mask = prev_mask;
        cur = prev;
    }
    path.push(0);
    path.reverse();
    Ok(OracleResult {
        is_hamiltonian: true,
        cycle: Some(path),
        method: OracleMethod::HeldKarp,
        work,
    })
}

fn backtracking(g: &Graph, budget: u64) -> Result<OracleResult, OracleError> {
    let n = g.n();
    if n < 3 || (0..n).any(|v| g.degree(v) < 2) {
        return Ok(no_cycle(OracleMethod::Backtracking, 0));
    }
    let mut order: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let mut nb: Vec<usize> = g.neighbors(v).collect();
            nb.sort_by_key(|&u| (g.degree(u), u));
            nb
        })
        .collect();
    // Anchor at a minimum-degree vertex: fewer branches at the root.
    let start = (0..n).min_by_key(|&v| (g.degree(v), v)).expect("n >= 3");
    order.shrink_to_fit();
    let mut search = Search {
        g,
        order: &order,
        start,
        visited: vec![false; n],
        path: vec![start],
        nodes: 0,
        budget,
    };
    search.visited[start] = true;
    let found = search.extend()?;
    let work = search.nodes;
    if found {
        Ok(OracleResult {
            is_hamiltonian: true,
            cycle: Some(search.path),
            method: OracleMethod::Backtracking,
            work,
        })
    } else {
        Ok(no_cycle(OracleMethod::Backtracking, work))
    }
}

struct Search<'a> {
    g: &'a Graph,
    order: &'a [Vec<usize>],
    start: usize,
    visited: Vec<bool>,
    path: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn extend(&mut self) -> Result<bool, OracleError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(OracleError::Unresolved(self.budget));
        }
        let n = self.g.n();
        let cur = *self.path.last().expect("path starts non-empty");
        if self.path.len() == n {
            return Ok(self.g.has_edge(cur, self.start));
        }
        for &next in &self.order[cur] {
            if self.visited[next] {
                continue;
            }
            self.visited[next] = true;
            self.path.push(next);
            if self.extend()? {
                return Ok(true);
            }
            self.path.pop();
            self.visited[next] = false;
        }
        Ok(false)
    }
}

/// Distinct Hamiltonian cycles, identifying rotations and reflections.
pub fn count_hamiltonian_cycles(g: &Graph) -> Result<u64, OracleError> {
    let n = g.n();
    if n > COUNT_MAX_N {
        return Err(OracleError::TooLargeForCount(n));
    }
    if n < 3 {
        return Ok(0);
    }
    let m = n - 1;
    let mut paths = vec![vec![0u64; n]; 1 << m];
    for v in 1..n {
        if g.has_edge(0, v) {
            paths[1 << (v - 1)][v] = 1;
        }
    }
    for mask in 1usize..(1 << m) {
        for v in 1..n {
            let c = paths[mask][v];
            if c == 0 {
                continue;
            }
            for u in 1..n {
                if mask >> (u - 1) & 1 == 0 && g.has_edge(v, u) {
                    paths[mask | 1 << (u - 1)][u] += c;
                }
            }
        }
    }
    let full = (1 << m) - 1;
    let directed: u64 = (1..n).filter(|&v| g.has_edge(v, 0)).map(|v| paths[full][v]).sum();
    Ok(directed / 2)
}
