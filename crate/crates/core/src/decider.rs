//! Turns a dual estimate (and an optional certificate) into a yes/no answer.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::dual::HamiltonianCycle;
use crate::graph::Graph;
use crate::numerics::factorial_thresholds;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Hamiltonian,
    NonHamiltonian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Certificate,
    Threshold,
    StationaryZero,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub verdict: Verdict,
    pub basis: Basis,
    /// Best dual value seen; `None` when no feasible iterate was evaluated.
    pub estimate: Option<BigRational>,
    pub threshold: BigRational,
    pub certificate: Option<HamiltonianCycle>,
}

/// Threshold rule with cutoff `τ = 2/(3·n!)`. A verified certificate wins
/// outright. An empty estimate counts as `-∞`. `stationary` marks an estimate
/// certified optimal by a zero supergradient.
///
/// Panics if `n < 3`.
pub fn decide(
    estimate: Option<&BigRational>,
    n: usize,
    certificate: Option<HamiltonianCycle>,
    stationary: bool,
) -> Decision {
    let threshold = factorial_thresholds(n).expect("decide needs n >= 3").tau;
    let (verdict, basis) = if certificate.is_some() {
        (Verdict::Hamiltonian, Basis::Certificate)
    } else {
        let above = estimate.is_some_and(|e| *e >= threshold);
        let verdict = if above {
            Verdict::NonHamiltonian
        } else {
            Verdict::Hamiltonian
        };
        let basis = if stationary && estimate.is_some_and(|e| *e == BigRational::default()) {
            Basis::StationaryZero
        } else {
            Basis::Threshold
        };
        (verdict, basis)
    };
    Decision {
        verdict,
        basis,
        estimate: estimate.cloned(),
        threshold,
        certificate,
    }
}

/// True iff `cycle` lists every vertex exactly once and consecutive vertices
/// (cyclically) are adjacent.
pub fn verify_certificate(g: &Graph, cycle: &[usize]) -> bool {
    let n = g.n();
    if n < 3 || cycle.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &v in cycle {
        if v >= n || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    (0..n).all(|i| g.has_edge(cycle[i], cycle[(i + 1) % n]))
}
