//! CHSH and perfect-correlation Bell functionals, their see-saw
//! maximization over observables with `‖W‖ ≤ 1`, and the source-operator
//! upper bounds on differences of product averages.
//!
//! Every maximization below rests on one fact: for Hermitian `K`, the
//! maximum of `tr[K W]` over Hermitian `W` with `‖W‖ ≤ 1` is attained at
//! `W = sign(K)`, applied on the spectrum (zero eigenvalues map to `+1`).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::random::{stream_rng, SeededRng};
use crate::source_ops::{verify_source_operator, Direction, SourceOperator};
use crate::states::{BipartiteState, Observable};
use crate::tensor::{ComplexMatrix, C64};

pub const DEFAULT_CHSH_RESTARTS: usize = 50;
pub const DEFAULT_BELL_RESTARTS: usize = 200;
/// Slack allowed when checking the source-operator bounds.
pub const BOUND_SLACK: f64 = 1e-10;
/// Eigenvalues at or above this threshold count as nonnegative for `sign`.
const SIGN_ZERO: f64 = -1e-14;
const MAX_SWEEPS: usize = 500;
const SWEEP_TOL: f64 = 1e-13;

/// `tr_B[ρ (I ⊗ B)]`, the operator `K` with `tr[ρ (A ⊗ B)] = tr[A K]`.
pub fn alice_operator(rho: &BipartiteState, b: &ComplexMatrix) -> ComplexMatrix {
    let d = rho.d();
    let r = rho.matrix();
    ComplexMatrix::from_fn(&[d], |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..d {
            for l in 0..d {
                acc += r.get(i * d + k, j * d + l) * b.get(l, k);
            }
        }
        acc
    })
    .hermitian_part()
}

/// `tr_A[ρ (A ⊗ I)]`, the operator `K` with `tr[ρ (A ⊗ B)] = tr[B K]`.
pub fn bob_operator(rho: &BipartiteState, a: &ComplexMatrix) -> ComplexMatrix {
    let d = rho.d();
    let r = rho.matrix();
    ComplexMatrix::from_fn(&[d], |k, l| {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += r.get(i * d + k, j * d + l) * a.get(j, i);
            }
        }
        acc
    })
    .hermitian_part()
}

/// Maximizer of `tr[K W]` over the unit operator-norm ball.
pub fn sign_optimum(k: &ComplexMatrix) -> Observable {
    let m = k
        .map_spectrum(|v| if v >= SIGN_ZERO { 1.0 } else { -1.0 })
        .expect("contraction operators are Hermitian");
    Observable::from_spectral(m, true)
}

/// Nearest operator (Frobenius) with spectrum in `[-1, 1]`.
fn clip_to_ball(m: &ComplexMatrix) -> ComplexMatrix {
    m.map_spectrum(|v| v.clamp(-1.0, 1.0)).expect("iterates are Hermitian")
}

fn check_dims(rho: &BipartiteState, obs: &[&Observable]) -> Result<()> {
    for w in obs {
        if w.d() != rho.d() {
            return Err(Error::DimensionMismatch {
                expected: format!("observable on C^{}", rho.d()),
                found: format!("C^{}", w.d()),
            });
        }
    }
    Ok(())
}

/// Alice's `W₁, W̃₁` and Bob's `W₂, W̃₂`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableQuad {
    pub w1: Observable,
    pub w1t: Observable,
    pub w2: Observable,
    pub w2t: Observable,
}

impl ObservableQuad {
    pub fn new(w1: Observable, w1t: Observable, w2: Observable, w2t: Observable) -> Result<Self> {
        let d = w1.d();
        if [&w1t, &w2, &w2t].iter().any(|w| w.d() != d) {
            return Err(Error::DimensionMismatch {
                expected: format!("four observables on C^{d}"),
                found: "mixed dimensions".into(),
            });
        }
        Ok(Self { w1, w1t, w2, w2t })
    }

    pub fn random(d: usize, rng: &mut SeededRng, dichotomic: bool) -> Self {
        Self {
            w1: Observable::random(d, rng, dichotomic),
            w1t: Observable::random(d, rng, dichotomic),
            w2: Observable::random(d, rng, dichotomic),
            w2t: Observable::random(d, rng, dichotomic),
        }
    }

    pub fn d(&self) -> usize {
        self.w1.d()
    }
}

/// `tr[ρ (W₁⊗W₂ + W₁⊗W̃₂ + W̃₁⊗W₂ − W̃₁⊗W̃₂)]`.
pub fn chsh_value(rho: &BipartiteState, q: &ObservableQuad) -> Result<f64> {
    check_dims(rho, &[&q.w1, &q.w1t, &q.w2, &q.w2t])?;
    Ok(chsh_unchecked(rho, q))
}

fn chsh_unchecked(rho: &BipartiteState, q: &ObservableQuad) -> f64 {
    let sum = q.w2.matrix() + q.w2t.matrix();
    let diff = q.w2.matrix() - q.w2t.matrix();
    rho.expectation(q.w1.matrix(), &sum) + rho.expectation(q.w1t.matrix(), &diff)
}

/// Outcome of a maximization over observables.
#[derive(Clone, Debug, Serialize)]
pub struct BellReport {
    /// Best value of the functional found.
    pub functional_value: f64,
    /// The bound the functional is compared against.
    pub bound: f64,
    /// `bound - functional_value`; negative means a violation was found.
    pub margin: f64,
    /// The maximizing observables, in the order documented by the producer.
    pub observables: Vec<Observable>,
    pub restarts_used: usize,
    /// Functional values after each sweep of the best restart.
    pub trajectory: Vec<f64>,
}

/// One see-saw ascent and its per-sweep values.
#[derive(Clone, Debug)]
pub struct SeesawRun {
    pub value: f64,
    pub observables: Vec<Observable>,
    pub trajectory: Vec<f64>,
}

/// See-saw ascent on the CHSH functional from a random dichotomic start.
/// Observables are returned as `[W₁, W̃₁, W₂, W̃₂]`.
pub fn chsh_seesaw(rho: &BipartiteState, rng: &mut SeededRng) -> SeesawRun {
    let d = rho.d();
    let mut q = ObservableQuad::random(d, rng, true);
    let mut trajectory = vec![chsh_unchecked(rho, &q)];
    for _ in 0..MAX_SWEEPS {
        let sum = q.w2.matrix() + q.w2t.matrix();
        let diff = q.w2.matrix() - q.w2t.matrix();
        q.w1 = sign_optimum(&alice_operator(rho, &sum));
        q.w1t = sign_optimum(&alice_operator(rho, &diff));
        let sum = q.w1.matrix() + q.w1t.matrix();
        let diff = q.w1.matrix() - q.w1t.matrix();
        q.w2 = sign_optimum(&bob_operator(rho, &sum));
        q.w2t = sign_optimum(&bob_operator(rho, &diff));
        let value = chsh_unchecked(rho, &q);
        let prev = *trajectory.last().unwrap();
        trajectory.push(value);
        if value - prev < SWEEP_TOL {
            break;
        }
    }
    SeesawRun {
        value: *trajectory.last().unwrap(),
        observables: vec![q.w1, q.w1t, q.w2, q.w2t],
        trajectory,
    }
}

/// Runs `restarts` independent ascents, restart `i` on stream `i` of `seed`,
/// and keeps the best (lowest index on ties).
fn best_of<F>(restarts: usize, seed: u64, run: F) -> (SeesawRun, usize)
where
    F: Fn(&mut SeededRng) -> SeesawRun + Sync,
{
    let restarts = restarts.max(1);
    let one = |i: usize| run(&mut stream_rng(seed, i as u64));
    #[cfg(feature = "parallel")]
    let runs: Vec<SeesawRun> = {
        use rayon::prelude::*;
        (0..restarts).into_par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<SeesawRun> = (0..restarts).map(one).collect();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one restart");
    (best, restarts)
}

/// Best CHSH value over see-saw restarts. Observables: `[W₁, W̃₁, W₂, W̃₂]`.
pub fn chsh_max(rho: &BipartiteState, restarts: usize, seed: u64) -> BellReport {
    let (best, used) = best_of(restarts, seed, |rng| chsh_seesaw(rho, rng));
    BellReport {
        functional_value: best.value,
        bound: 2.0,
        margin: 2.0 - best.value,
        observables: best.observables,
        restarts_used: used,
        trajectory: best.trajectory,
    }
}

/// Which line of the perfect-correlation inequality is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `|⟨W₁⊗W₂⟩ − ⟨W₁⊗W̃₂⟩| ≤ 1 − ⟨W₂⊗W̃₂⟩`: fixed observable on Alice,
    /// the pair on Bob.
    First,
    /// `|⟨W₁⊗W₂⟩ − ⟨W̃₁⊗W₂⟩| ≤ 1 − ⟨W₁⊗W̃₁⟩`: fixed observable on Bob, the
    /// pair on Alice.
    Second,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Variant::First),
            "second" => Ok(Variant::Second),
            other => Err(Error::Parse(format!(
                "unknown variant '{other}', expected first|second"
            ))),
        }
    }
}

/// Left and right sides of the perfect-correlation inequality.
///
/// `single` is the observable shared by both product averages on the
/// left-hand side (`W₁` for [`Variant::First`], `W₂` for
/// [`Variant::Second`]); `(a, b)` is the pair that also appears in the
/// correlation on the right-hand side, placed as `a ⊗ b`.
pub fn bell_lhs_rhs(
    rho: &BipartiteState,
    single: &Observable,
    a: &Observable,
    b: &Observable,
    variant: Variant,
) -> Result<(f64, f64)> {
    check_dims(rho, &[single, a, b])?;
    Ok(lhs_rhs_unchecked(rho, single.matrix(), a.matrix(), b.matrix(), variant))
}

fn lhs_rhs_unchecked(
    rho: &BipartiteState,
    s: &ComplexMatrix,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    variant: Variant,
) -> (f64, f64) {
    let lhs = match variant {
        Variant::First => (rho.expectation(s, a) - rho.expectation(s, b)).abs(),
        Variant::Second => (rho.expectation(a, s) - rho.expectation(b, s)).abs(),
    };
    (lhs, 1.0 - rho.expectation(a, b))
}

/// `lhs − rhs` without the absolute value; its maximum over `single`
/// equals the maximum of the absolute form.
fn signed_violation(
    rho: &BipartiteState,
    s: &ComplexMatrix,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    variant: Variant,
) -> f64 {
    let diff = a - b;
    let linear = match variant {
        Variant::First => rho.expectation(s, &diff),
        Variant::Second => rho.expectation(&diff, s),
    };
    linear + rho.expectation(a, b) - 1.0
}

/// Gradients of [`signed_violation`] with respect to `s`, `a` and `b`.
fn violation_gradients(
    rho: &BipartiteState,
    s: &ComplexMatrix,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    variant: Variant,
) -> [ComplexMatrix; 3] {
    let diff = a - b;
    let coupling_a = alice_operator(rho, b);
    let coupling_b = bob_operator(rho, a);
    match variant {
        Variant::First => {
            let from_s = bob_operator(rho, s);
            [alice_operator(rho, &diff), &from_s + &coupling_a, &coupling_b - &from_s]
        }
        Variant::Second => {
            let from_s = alice_operator(rho, s);
            [bob_operator(rho, &diff), &from_s + &coupling_a, &coupling_b - &from_s]
        }
    }
}

const PG_STEP_START: f64 = 0.5;
const PG_STEP_MIN: f64 = 1e-10;
const PG_MAX_STEPS: usize = 200;

/// Projected gradient ascent on the coupled pair `(a, b)` with `s` fixed.
fn coupled_pair_ascent(
    rho: &BipartiteState,
    s: &ComplexMatrix,
    a: &mut ComplexMatrix,
    b: &mut ComplexMatrix,
    variant: Variant,
) -> f64 {
    let mut value = signed_violation(rho, s, a, b, variant);
    let mut step = PG_STEP_START;
    let mut accepted = 0;
    while step >= PG_STEP_MIN && accepted < PG_MAX_STEPS {
        let [_, ga, gb] = violation_gradients(rho, s, a, b, variant);
        let a_new = clip_to_ball(&(&*a + &ga.scale(step)));
        let b_new = clip_to_ball(&(&*b + &gb.scale(step)));
        let v = signed_violation(rho, s, &a_new, &b_new, variant);
        if v > value {
            *a = a_new;
            *b = b_new;
            value = v;
            accepted += 1;
        } else {
            step *= 0.5;
        }
    }
    value
}

/// Alternating ascent on `lhs − rhs` from a random start. Observables are
/// returned as `[single, a, b]` (see [`bell_lhs_rhs`]).
pub fn bell_seesaw(rho: &BipartiteState, rng: &mut SeededRng, variant: Variant) -> SeesawRun {
    let d = rho.d();
    let mut s = Observable::random(d, rng, false).matrix().clone();
    let mut a = Observable::random(d, rng, false).matrix().clone();
    let mut b = Observable::random(d, rng, false).matrix().clone();
    let mut trajectory = vec![signed_violation(rho, &s, &a, &b, variant)];
    for _ in 0..MAX_SWEEPS {
        let [gs, _, _] = violation_gradients(rho, &s, &a, &b, variant);
        s = sign_optimum(&gs).matrix().clone();
        let [_, ga, _] = violation_gradients(rho, &s, &a, &b, variant);
        a = sign_optimum(&ga).matrix().clone();
        let [_, _, gb] = violation_gradients(rho, &s, &a, &b, variant);
        b = sign_optimum(&gb).matrix().clone();
        let value = coupled_pair_ascent(rho, &s, &mut a, &mut b, variant);
        let prev = *trajectory.last().unwrap();
        trajectory.push(value);
        if value - prev < SWEEP_TOL {
            break;
        }
    }
    let (lhs, rhs) = lhs_rhs_unchecked(rho, &s, &a, &b, variant);
    SeesawRun {
        value: lhs - rhs,
        observables: vec![
            Observable::from_spectral(s, true),
            Observable::from_spectral(a, false),
            Observable::from_spectral(b, false),
        ],
        trajectory,
    }
}

/// Largest `lhs − rhs` found over restarts. `functional_value` is that
/// violation, `bound` is 0 and `margin = -functional_value`.
pub fn bell_max_violation(rho: &BipartiteState, restarts: usize, seed: u64, variant: Variant) -> BellReport {
    let (best, used) = best_of(restarts, seed, |rng| bell_seesaw(rho, rng, variant));
    BellReport {
        functional_value: best.value,
        bound: 0.0,
        margin: -best.value,
        observables: best.observables,
        restarts_used: used,
        trajectory: best.trajectory,
    }
}

/// One side of the source-operator bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundSide {
    pub lhs: f64,
    pub rhs: f64,
}

impl BoundSide {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs + slack
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    /// `|⟨W₁⊗W₂⟩ − ⟨W₁⊗W̃₂⟩| ≤ ‖T‖₁ (1 − tr[σ⁽⁰⁾ (W₂⊗W̃₂)])`, for right or
    /// symmetric operators.
    pub right: Option<BoundSide>,
    /// `|⟨W₁⊗W₂⟩ − ⟨W̃₁⊗W₂⟩| ≤ ‖T‖₁ (1 − tr[σ⁽²⁾ (W₁⊗W̃₁)])`, for left or
    /// symmetric operators.
    pub left: Option<BoundSide>,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.right.iter().chain(self.left.iter()).all(|s| s.holds(BOUND_SLACK))
    }
}

/// Precomputed `‖T‖₁` and induced operators `σ = tr_j[|T|]/‖T‖₁` of a
/// verified source-operator, for evaluating the bounds on many quads.
#[derive(Clone, Debug)]
pub struct SourceBounds {
    rho: BipartiteState,
    trace_norm: f64,
    /// `tr_0[|T|]/‖T‖₁`, used by the right bound.
    sigma_first: Option<ComplexMatrix>,
    /// `tr_2[|T|]/‖T‖₁`, used by the left bound.
    sigma_last: Option<ComplexMatrix>,
}

impl SourceBounds {
    pub fn new(rho: &BipartiteState, t: &SourceOperator) -> Result<Self> {
        let check = verify_source_operator(t, rho)?;
        if !check.ok {
            return Err(Error::Precondition(format!(
                "not a source-operator for the state (max marginal residual {:e})",
                check.max_residual()
            )));
        }
        let abs = t.matrix().abs_operator()?;
        let trace_norm = abs.trace().re;
        let sigma = |slot: usize| -> Result<ComplexMatrix> { Ok(abs.partial_trace(slot)?.scale(1.0 / trace_norm)) };
        let (sigma_first, sigma_last) = match t.direction() {
            Direction::Right => (Some(sigma(0)?), None),
            Direction::Left => (None, Some(sigma(2)?)),
            Direction::Symmetric => (Some(sigma(0)?), Some(sigma(2)?)),
        };
        Ok(Self {
            rho: rho.clone(),
            trace_norm,
            sigma_first,
            sigma_last,
        })
    }

    pub fn trace_norm(&self) -> f64 {
        self.trace_norm
    }

    pub fn check(&self, q: &ObservableQuad) -> Result<BoundCheck> {
        check_dims(&self.rho, &[&q.w1, &q.w1t, &q.w2, &q.w2t])?;
        let rho = &self.rho;
        let (w1, w1t, w2, w2t) = (q.w1.matrix(), q.w1t.matrix(), q.w2.matrix(), q.w2t.matrix());
        let right = self.sigma_first.as_ref().map(|sigma| BoundSide {
            lhs: (rho.expectation(w1, w2) - rho.expectation(w1, w2t)).abs(),
            rhs: self.trace_norm * (1.0 - sigma.trace_product(&w2.tensor(w2t)).re),
        });
        let left = self.sigma_last.as_ref().map(|sigma| BoundSide {
            lhs: (rho.expectation(w1, w2) - rho.expectation(w1t, w2)).abs(),
            rhs: self.trace_norm * (1.0 - sigma.trace_product(&w1.tensor(w1t)).re),
        });
        Ok(BoundCheck { right, left })
    }
}

/// Checks the trace-norm bounds for one quad; fails if `t` is not a
/// source-operator for `rho`.
pub fn bound_check_general(rho: &BipartiteState, t: &SourceOperator, q: &ObservableQuad) -> Result<BoundCheck> {
    SourceBounds::new(rho, t)?.check(q)
}

/// `1 − tr[ρ (W ⊗ W)]` for a dichotomic `W`: zero exactly when measuring
/// `W` on both sides gives perfectly correlated outcomes.
pub fn perfect_correlation_gap(rho: &BipartiteState, w: &Observable) -> Result<f64> {
    check_dims(rho, &[w])?;
    if !w.is_dichotomic() {
        return Err(Error::InvalidObservable(
            "perfect-correlation gap needs a dichotomic observable".into(),
        ));
    }
    Ok(1.0 - rho.expectation(w.matrix(), w.matrix()))
}
