//! Exact-arithmetic implementation of a Lagrangian-dual / ellipsoid-method
//! decision procedure for the Hamiltonian circuit problem, together with an
//! exact oracle and a harness that compares the two instance by instance.

pub mod constants;
pub mod decider;
pub mod dual;
pub mod ellipsoid;
pub mod graph;
pub mod harness;
pub mod numerics;
pub mod oracle;
