//! Central-cut ellipsoid method maximizing the dual over the simplex
//! `S = {λ >= 0, Σλ <= M}`, with the centre and shape matrix held in
//! binary fixed point.
//!
//! Every cut `g` used here keeps the half-space `⟨g, λ − λᵏ⟩ >= 0`:
//! supergradients point uphill, the negativity cut points into `λ >= 0` and
//! the budget cut `(−1, …, −1)` points into `Σλ <= M`. The centre therefore
//! moves to `λ + Hg / ((n+1)·√⟨Hg, g⟩)`.

use std::fmt;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{instance_constants, InstanceConstants, Mode};
use crate::decider::{decide, Decision};
use crate::dual::{eval_dual_with_certificate, DualError, DualResult, HamiltonianCycle, LambdaVector, StartMode, Walk};
use crate::graph::Graph;
use crate::numerics::{round_div_even, FixedPoint, NumericError};

/// Iteration cap applied in practical mode when none is given.
pub const DEFAULT_PRACTICAL_MAX_ITERS: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Dual(#[from] DualError),
    #[error("ellipsoid collapsed at iteration {k}: <Hg, g> <= 0")]
    Collapsed { k: u64 },
    #[error("cut vector is zero")]
    ZeroCut,
    #[error("dimension {0} is too small for the ellipsoid update")]
    Dimension(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutKind {
    Gradient,
    Negativity,
    Budget,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutVector {
    pub g: Vec<i64>,
    pub kind: CutKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Separation {
    Feasible,
    Cut(CutVector),
}

/// Membership test for `S`; outside points get the separating cut.
pub fn separation_oracle(lambda: &[FixedPoint], m: &BigRational) -> Separation {
    if lambda.iter().any(FixedPoint::is_negative) {
        let g = lambda.iter().map(|x| i64::from(x.is_negative())).collect();
        return Separation::Cut(CutVector {
            g,
            kind: CutKind::Negativity,
        });
    }
    let sum = lambda.iter().fold(BigRational::zero(), |acc, x| acc + x.to_rational());
    if sum > *m {
        return Separation::Cut(CutVector {
            g: vec![-1; lambda.len()],
            kind: CutKind::Budget,
        });
    }
    Separation::Feasible
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Best {
    pub lambda: Vec<BigRational>,
    pub value: BigRational,
}

/// Centre `λᵏ`, shape matrix `Hₖ` (symmetric, stored in full) and the best
/// feasible dual value so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EllipsoidState {
    frac_bits: u32,
    lambda: Vec<BigInt>,
    shape: Vec<BigInt>,
    pub k: u64,
    pub best: Option<Best>,
}

impl EllipsoidState {
    /// Centre with all coordinates `c0` and shape `r2·I`, rounded to `p` bits.
    pub fn new(n: usize, c0: &BigRational, r2: &BigRational, frac_bits: u32) -> Self {
        let c = FixedPoint::from_rational(c0, frac_bits).mantissa().clone();
        let r = FixedPoint::from_rational(r2, frac_bits).mantissa().clone();
        let mut shape = vec![BigInt::zero(); n * n];
        for i in 0..n {
            shape[i * n + i] = r.clone();
        }
        EllipsoidState {
            frac_bits,
            lambda: vec![c; n],
            shape,
            k: 0,
            best: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn lambda(&self) -> Vec<FixedPoint> {
        self.lambda
            .iter()
            .map(|m| FixedPoint::from_mantissa(m.clone(), self.frac_bits))
            .collect()
    }

    pub fn lambda_rational(&self) -> LambdaVector {
        LambdaVector::new(self.lambda().iter().map(FixedPoint::to_rational).collect())
    }

    pub fn shape(&self, i: usize, j: usize) -> FixedPoint {
        FixedPoint::from_mantissa(self.shape[i * self.dim() + j].clone(), self.frac_bits)
    }

    /// One central-cut update keeping `⟨g, λ − λᵏ⟩ >= 0`.
    ///
    /// `d = Hg` and `q = ⟨d, g⟩` are exact for integer `g`; the centre shift
    /// `d / ((n+1)·isqrt(q))` and each new entry
    /// `n²/(n²−1)·(H_ij − 2/(n+1)·d_i d_j / q)` are rounded once.
    pub fn step(&mut self, cut: &CutVector) -> Result<(), SolverError> {
        let n = self.dim();
        if n < 2 {
            return Err(SolverError::Dimension(n));
        }
        if cut.g.iter().all(|&x| x == 0) {
            return Err(SolverError::ZeroCut);
        }
        let p = self.frac_bits;
        let d: Vec<BigInt> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| cut.g[j] != 0)
                    .map(|j| &self.shape[i * n + j] * cut.g[j])
                    .sum()
            })
            .collect();
        let q: BigInt = d.iter().zip(&cut.g).map(|(di, &gi)| di * gi).sum();
        if !q.is_positive() {
            return Err(SolverError::Collapsed { k: self.k });
        }
        let s = (q.clone() << p).sqrt();
        let n1 = BigInt::from(n + 1);
        let shift_den = &s * &n1;
        for (li, di) in self.lambda.iter_mut().zip(&d) {
            *li += round_div_even(&(di.clone() << p), &shift_den);
        }
        let n2 = BigInt::from(n * n);
        let den = (&n2 - 1) * &n1 * &q;
        let q_n1 = &q * &n1;
        for i in 0..n {
            for j in i..n {
                let num = &n2 * (&self.shape[i * n + j] * &q_n1 - ((&d[i] * &d[j]) << 1u32));
                let v = round_div_even(&num, &den);
                self.shape[j * n + i] = v.clone();
                self.shape[i * n + j] = v;
            }
        }
        self.k += 1;
        Ok(())
    }
}

/// Initial state from instance constants: centre `M/n`, shape `(M²/n)·I`.
pub fn init_state(c: &InstanceConstants) -> EllipsoidState {
    let bits = u32::try_from(c.precision_bits).expect("precision fits in u32");
    EllipsoidState::new(c.n, &c.lambda0_coord(), &c.r_squared, bits)
}

/// The same update in exact rationals, for steps where `⟨Hg, g⟩` is the
/// square of a rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactEllipsoid {
    pub center: Vec<BigRational>,
    pub shape: Vec<Vec<BigRational>>,
}

impl ExactEllipsoid {
    /// Returns `Ok(false)` (and leaves the state alone) if `⟨Hg, g⟩` is not a
    /// perfect rational square.
    pub fn step(&mut self, g: &[BigRational]) -> Result<bool, SolverError> {
        let n = self.center.len();
        if n < 2 {
            return Err(SolverError::Dimension(n));
        }
        let d: Vec<BigRational> = (0..n)
            .map(|i| (0..n).fold(BigRational::zero(), |acc, j| acc + &self.shape[i][j] * &g[j]))
            .collect();
        let q = d.iter().zip(g).fold(BigRational::zero(), |acc, (a, b)| acc + a * b);
        if !q.is_positive() {
            return Err(SolverError::Collapsed { k: 0 });
        }
        let Some(s) = rational_sqrt(&q) else {
            return Ok(false);
        };
        let nn = BigRational::from_integer(BigInt::from(n));
        let one = BigRational::one();
        let n1 = &nn + &one;
        for (ci, di) in self.center.iter_mut().zip(&d) {
            *ci += di / (&s * &n1);
        }
        let coef = &nn * &nn / (&nn * &nn - &one);
        let two = BigRational::from_integer(BigInt::from(2));
        for i in 0..n {
            for j in 0..n {
                let v = &coef * (&self.shape[i][j] - &two / &n1 * &d[i] * &d[j] / &q);
                self.shape[i][j] = v;
            }
        }
        Ok(true)
    }
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    let a = q.numer().sqrt();
    let b = q.denom().sqrt();
    (&a * &a == *q.numer() && &b * &b == *q.denom()).then(|| BigRational::new(a, b))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub mode: Mode,
    pub start_mode: StartMode,
    pub precision_bits: Option<u32>,
    pub max_iters: Option<u64>,
    pub early_exit: bool,
    /// Recorded for replay; the solver itself draws no random numbers.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: Mode::Practical,
            start_mode: StartMode::PaperFixed,
            precision_bits: None,
            max_iters: None,
            early_exit: true,
            seed: 0,
        }
    }
}

impl SolverConfig {
    /// Iterations actually allowed for a budget `n_budget`.
    pub fn iteration_limit(&self, n_budget: u64) -> u64 {
        match (self.mode, self.max_iters) {
            (_, Some(cap)) => n_budget.min(cap),
            (Mode::Faithful, None) => n_budget,
            (Mode::Practical, None) => n_budget.min(DEFAULT_PRACTICAL_MAX_ITERS),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Budget,
    EarlyCertificate,
    Collapsed,
    Stationary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceCut {
    Gradient,
    Negativity,
    Budget,
    Stationary,
}

impl TraceCut {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceCut::Gradient => "grad",
            TraceCut::Negativity => "neg",
            TraceCut::Budget => "budget",
            TraceCut::Stationary => "stationary",
        }
    }
}

impl From<CutKind> for TraceCut {
    fn from(k: CutKind) -> Self {
        match k {
            CutKind::Gradient => TraceCut::Gradient,
            CutKind::Negativity => TraceCut::Negativity,
            CutKind::Budget => TraceCut::Budget,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRow {
    pub k: u64,
    pub feasible: bool,
    pub cut: TraceCut,
    pub dual_value: Option<BigRational>,
    pub best_value: Option<BigRational>,
    pub walk: Option<Walk>,
}

impl fmt::Display for TraceRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |r: &Option<BigRational>| r.as_ref().map(ToString::to_string).unwrap_or_default();
        write!(
            f,
            "{},{},{},{},{},{}",
            self.k,
            u8::from(self.feasible),
            self.cut.as_str(),
            opt(&self.dual_value),
            opt(&self.best_value),
            self.walk.as_ref().map(Walk::joined).unwrap_or_default()
        )
    }
}

pub const TRACE_HEADER: &str = "k,feasible,cut_kind,dual_value,best_value,walk";

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// What the observer sees at iteration `k`, before the step is taken.
pub struct IterationEvent<'a> {
    pub k: u64,
    pub lambda: &'a [FixedPoint],
    pub dual: Option<&'a DualResult>,
    /// The cut about to be applied; `None` when the run stops here.
    pub cut: Option<&'a CutVector>,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub constants: InstanceConstants,
    pub best_value: Option<BigRational>,
    pub best_lambda: Option<Vec<BigRational>>,
    pub decision: Decision,
    pub certificate: Option<HamiltonianCycle>,
    pub iteration_limit: u64,
    pub iterations_run: u64,
    pub termination: Termination,
    /// Iteration at which the shape matrix lost positive definiteness.
    pub collapsed_at: Option<u64>,
    pub trace: Vec<TraceRow>,
}

pub fn run_solver(g: &Graph, cfg: &SolverConfig) -> Result<RunResult, SolverError> {
    run_solver_observed(g, cfg, |_| {})
}

/// [`run_solver`] with a callback invoked once per iteration.
pub fn run_solver_observed<F>(g: &Graph, cfg: &SolverConfig, mut observe: F) -> Result<RunResult, SolverError>
where
    F: FnMut(&IterationEvent<'_>),
{
    let constants = instance_constants(g, cfg.mode, cfg.precision_bits)?;
    let limit = cfg.iteration_limit(constants.iterations);
    let mut state = init_state(&constants);
    let mut trace = Vec::new();
    let mut certificate: Option<HamiltonianCycle> = None;
    let mut termination = Termination::Budget;
    let mut collapsed_at = None;

    while state.k < limit {
        let k = state.k;
        let lambda = state.lambda();
        let (cut, dual) = match separation_oracle(&lambda, &constants.m) {
            Separation::Cut(cut) => (Some(cut), None),
            Separation::Feasible => {
                let (res, cert) = eval_dual_with_certificate(g, &state.lambda_rational(), cfg.start_mode)?;
                if state.best.as_ref().is_none_or(|b| res.value > b.value) {
                    state.best = Some(Best {
                        lambda: lambda.iter().map(FixedPoint::to_rational).collect(),
                        value: res.value.clone(),
                    });
                }
                if certificate.is_none() {
                    certificate = cert;
                }
                let stop = if res.is_zero_gradient() {
                    Some(Termination::Stationary)
                } else if cfg.early_exit && certificate.is_some() {
                    Some(Termination::EarlyCertificate)
                } else {
                    None
                };
                let cut = stop.is_none().then(|| CutVector {
                    g: res.supergradient.clone(),
                    kind: CutKind::Gradient,
                });
                if let Some(t) = stop {
                    termination = t;
                }
                (cut, Some(res))
            }
        };
        observe(&IterationEvent {
            k,
            lambda: &lambda,
            dual: dual.as_ref(),
            cut: cut.as_ref(),
        });
        let row_cut = match (&cut, termination) {
            (Some(c), _) => c.kind.into(),
            (None, Termination::Stationary) => TraceCut::Stationary,
            (None, _) => TraceCut::Gradient,
        };
        trace.push(TraceRow {
            k,
            feasible: dual.is_some(),
            cut: row_cut,
            dual_value: dual.as_ref().map(|d| d.value.clone()),
            best_value: state.best.as_ref().map(|b| b.value.clone()),
            walk: dual.map(|d| d.walk),
        });
        let Some(cut) = cut else {
            break;
        };
        match state.step(&cut) {
            Ok(()) => {}
            Err(SolverError::Collapsed { k }) => {
                termination = Termination::Collapsed;
                collapsed_at = Some(k);
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let iterations_run = trace.len() as u64;
    let best_value = state.best.as_ref().map(|b| b.value.clone());
    let decision = decide(
        best_value.as_ref(),
        g.n(),
        certificate.clone(),
        termination == Termination::Stationary,
    );
    Ok(RunResult {
        constants,
        best_lambda: state.best.map(|b| b.lambda),
        best_value,
        decision,
        certificate,
        iteration_limit: limit,
        iterations_run,
        termination,
        collapsed_at,
        trace,
    })
}
