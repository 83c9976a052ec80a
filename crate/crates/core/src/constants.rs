//! Closed-form instance constants: the localization simplex, the enclosing
//! and inscribed balls, the Lipschitz constant, thresholds, the iteration
//! budget and the working precision.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::numerics::{factorial, factorial_thresholds, NumericError};

/// Working precision in practical mode when none is given.
pub const DEFAULT_PRACTICAL_BITS: u32 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Mode {
    /// Precision `p = 5N` and no iteration cap.
    Faithful,
    /// Configurable precision (default 256 bits) and capped iterations.
    Practical,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Faithful => "faithful",
            Mode::Practical => "practical",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceConstants {
    pub n: usize,
    pub edges: usize,
    /// `M = (4n² − 4|E|)/n`, the bound on `Σλ`.
    pub m: BigRational,
    /// `R² = M²/n`.
    pub r_squared: BigRational,
    /// `L² = n(n+1)²`.
    pub l_squared: BigRational,
    pub epsilon: BigRational,
    pub delta: BigRational,
    pub tau: BigRational,
    /// Iteration budget `N`.
    pub iterations: u64,
    /// Fractional bits of the ellipsoid state.
    pub precision_bits: u64,
}

impl InstanceConstants {
    /// Coordinate `M/n` of the initial centre.
    pub fn lambda0_coord(&self) -> BigRational {
        &self.m / BigRational::from_integer(BigInt::from(self.n))
    }

    /// Inscribed radius `M/(n+√n)`, irrational in general, as text.
    pub fn r_form(&self) -> String {
        format!("{}/({}+sqrt({}))", self.m, self.n, self.n)
    }

    /// Lipschitz constant `(n+1)√n` as text.
    pub fn l_form(&self) -> String {
        format!("{}*sqrt({})", self.n + 1, self.n)
    }

    /// Centre of the inscribed ball, coordinate `M/(n+√n)`, as text.
    pub fn lambda_hat_form(&self) -> String {
        self.r_form()
    }
}

fn int(x: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(x.into())
}

pub fn instance_constants(g: &Graph, mode: Mode, p_override: Option<u32>) -> Result<InstanceConstants, NumericError> {
    let n = g.n();
    let t = factorial_thresholds(n)?;
    let nn = int(n as u64);
    let m = (int(4u64 * (n * n) as u64) - int(4u64 * g.edge_count() as u64)) / &nn;
    assert!(
        m > BigRational::zero(),
        "M is positive for every simple graph with n >= 3"
    );
    let r_squared = &m * &m / &nn;
    let l_squared = int((n * (n + 1) * (n + 1)) as u64);
    let iterations = iteration_budget_from(n, &m, &r_squared, &t.epsilon);
    let precision_bits = match mode {
        Mode::Faithful => 5 * iterations,
        Mode::Practical => u64::from(p_override.unwrap_or(DEFAULT_PRACTICAL_BITS)),
    };
    Ok(InstanceConstants {
        n,
        edges: g.edge_count(),
        m,
        r_squared,
        l_squared,
        epsilon: t.epsilon,
        delta: t.delta,
        tau: t.tau,
        iterations,
        precision_bits,
    })
}

/// `N = 2(n+1)²⌈ln(L·R²/(r·ε))⌉`.
pub fn iteration_budget(c: &InstanceConstants) -> u64 {
    iteration_budget_from(c.n, &c.m, &c.r_squared, &c.epsilon)
}

fn iteration_budget_from(n: usize, m: &BigRational, r_squared: &BigRational, epsilon: &BigRational) -> u64 {
    let k = ceil_ln(|bits| log_argument_bounds(n, m, r_squared, epsilon, bits));
    2 * ((n + 1) * (n + 1)) as u64 * k
}

/// Rational bounds on `L·R²/(r·ε) = (n+1)·√n·R²·(n+√n)/(M·ε)` from a
/// `bits`-bit bracket of `√n`.
fn log_argument_bounds(
    n: usize,
    m: &BigRational,
    r_squared: &BigRational,
    epsilon: &BigRational,
    bits: u32,
) -> (BigRational, BigRational) {
    let scale = BigInt::one() << bits;
    let floor = (BigInt::from(n) * &scale * &scale).sqrt();
    let exact = &floor * &floor == BigInt::from(n) * &scale * &scale;
    let lo = BigRational::new(floor.clone(), scale.clone());
    let hi = if exact {
        lo.clone()
    } else {
        BigRational::new(floor + 1, scale)
    };
    let nn = int(n as u64);
    let f = |s: &BigRational| int((n + 1) as u64) * s * r_squared * (&nn + s) / (m * epsilon);
    (f(&lo), f(&hi))
}

/// Smallest integer `k >= 0` with `e^k >= x`, where `bounds(bits)` brackets
/// `x` ever more tightly. `x` must not be a power of `e`; algebraic `x > 1`
/// never is, so refinement terminates.
fn ceil_ln(bounds: impl Fn(u32) -> (BigRational, BigRational)) -> u64 {
    let mut bits = 64u32;
    'refine: loop {
        let (x_lo, x_hi) = bounds(bits);
        let (e_lo, e_hi) = e_bounds(bits);
        let mut pow_lo = BigRational::one();
        let mut pow_hi = BigRational::one();
        for k in 0u64.. {
            if pow_lo >= x_hi {
                return k;
            }
            if pow_hi >= x_lo {
                // e^k and x not separated yet
                bits *= 2;
                continue 'refine;
            }
            pow_lo = &pow_lo * &e_lo;
            pow_hi = &pow_hi * &e_hi;
        }
    }
}

/// `e_lo <= e <= e_hi` with `e_hi - e_lo < 2^-bits`.
fn e_bounds(bits: u32) -> (BigRational, BigRational) {
    let target = BigInt::one() << bits;
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    let mut j = 0u64;
    let mut fact = BigInt::one();
    while fact <= target || j < 2 {
        j += 1;
        fact *= j;
        term /= int(j);
        sum += &term;
    }
    // Tail Σ_{i>j} 1/i! < 1/(j!·j)
    let tail = BigRational::new(BigInt::one(), fact * j);
    let hi = &sum + tail;
    (sum, hi)
}

/// The closed-form iteration bound `2(n+1)²⌈2.5 + 5·log₂n + 1.43·n·log₂n⌉`
/// quoted for `n >= 10`.
pub fn published_iteration_bound(n: usize) -> u64 {
    let nf = n as f64;
    let inner = 2.5 + 5.0 * nf.log2() + 1.43 * nf * nf.log2();
    2 * ((n + 1) * (n + 1)) as u64 * inner.ceil() as u64
}

/// `n!` as a rational, handy for comparisons against the `1/n!` bound.
pub fn inverse_factorial(n: usize) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(factorial(n)))
}
