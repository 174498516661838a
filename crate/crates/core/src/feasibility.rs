//! Numerical search for density source-operators.
//!
//! The feasible set `{T ⪰ 0 : tr_j[T] = ρ for the constrained slots j}` is an
//! intersection of the PSD cone with affine subspaces. Dykstra's cyclic
//! projections converge to the nearest point of the intersection when it is
//! nonempty. Projections cannot prove emptiness, so when they stall the
//! solver looks for a CHSH value above 2, which no DSO state admits.

use serde::Serialize;

use crate::bell::{chsh_max, ObservableQuad, DEFAULT_CHSH_RESTARTS};
use crate::error::{Error, Result};
use crate::source_ops::{certify_with, Direction, SourceOperator, MARG_TOL};
use crate::states::BipartiteState;
use crate::tensor::ComplexMatrix;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 5000;
/// A CHSH value must exceed `2 + WITNESS_MARGIN` to count as a witness.
pub const WITNESS_MARGIN: f64 = 1e-6;
const POLISH_TOL: f64 = 1e-14;
const POLISH_MAX_ITER: usize = 1000;

#[derive(Clone, Debug)]
pub struct FeasibilityProblem {
    pub rho: BipartiteState,
    pub mode: Direction,
    pub max_iter: usize,
    pub tol: f64,
}

impl FeasibilityProblem {
    pub fn new(rho: BipartiteState, mode: Direction) -> Self {
        Self {
            rho,
            mode,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Precondition(format!(
                "need tol > 0 and max_iter ≥ 1 (got {} and {})",
                self.tol, self.max_iter
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibilityStatus {
    Feasible,
    InfeasibleWitnessed,
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChshWitness {
    pub value: f64,
    pub observables: ObservableQuad,
}

#[derive(Clone, Debug, Serialize)]
pub struct FeasibilityReport {
    pub status: FeasibilityStatus,
    pub witness: Option<SourceOperator>,
    pub chsh_witness: Option<ChshWitness>,
    /// Combined residual after each Dykstra cycle.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
}

/// Budget for the CHSH witness search run when projections stall.
#[derive(Clone, Copy, Debug)]
pub struct WitnessSearch {
    pub restarts: usize,
    pub seed: u64,
}

impl Default for WitnessSearch {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_CHSH_RESTARTS,
            seed: 0,
        }
    }
}

fn check_shapes(t: &ComplexMatrix, rho: &BipartiteState) -> Result<usize> {
    let d = rho.d();
    if t.dim() != d * d * d {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}×{0} operator", d * d * d),
            found: format!("{0}×{0}", t.dim()),
        });
    }
    Ok(d)
}

/// Orthogonal (Frobenius) projection onto `{T : tr_slot[T] = ρ}`:
/// `T + (1/d) · (ρ − tr_slot[T])` with an identity inserted at `slot`.
pub fn project_marginal(t: &ComplexMatrix, rho: &BipartiteState, slot: usize) -> Result<ComplexMatrix> {
    let d = check_shapes(t, rho)?;
    let t = t.clone().with_factors(&[d, d, d])?;
    let defect = rho.matrix() - &t.partial_trace(slot)?;
    let correction = defect.insert_identity(slot, d)?.scale(1.0 / d as f64);
    Ok(&t + &correction)
}

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues set to 0.
pub fn project_psd(t: &ComplexMatrix) -> Result<ComplexMatrix> {
    t.map_spectrum(|v| v.max(0.0))
}

fn initial_point(rho: &BipartiteState, mode: Direction) -> Result<ComplexMatrix> {
    let d = rho.d();
    let local_mixed = ComplexMatrix::identity(&[d]).scale(1.0 / d as f64);
    let right = rho.matrix().tensor(&local_mixed);
    let left = local_mixed.tensor(rho.matrix());
    Ok(match mode {
        Direction::Right => right,
        Direction::Left => left,
        Direction::Symmetric => (&right + &left).scale(0.5),
    })
}

/// `max(PSD violation, marginal trace-norm residuals)` of an iterate.
pub fn combined_residual(t: &ComplexMatrix, rho: &BipartiteState, mode: Direction) -> Result<f64> {
    check_shapes(t, rho)?;
    let mut worst = (-t.min_eigenvalue()?).max(0.0);
    for &slot in mode.constrained_slots() {
        let diff = &t.partial_trace(slot)? - rho.matrix();
        worst = worst.max(diff.hermitian_part().trace_norm()?);
    }
    Ok(worst)
}

/// Cyclic projections onto the affine marginal constraints only, started
/// from a PSD iterate. The constraints are linear, so this converges
/// linearly to a point satisfying all of them to roundoff; the PSD
/// violation it introduces is bounded by the distance moved.
fn polish_marginals(t: &ComplexMatrix, rho: &BipartiteState, mode: Direction) -> Result<ComplexMatrix> {
    let mut x = t.clone();
    for _ in 0..POLISH_MAX_ITER {
        for &slot in mode.constrained_slots() {
            x = project_marginal(&x, rho, slot)?;
        }
        let worst = mode
            .constrained_slots()
            .iter()
            .map(|&slot| Ok((&x.partial_trace(slot)? - rho.matrix()).frobenius_norm()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        if worst <= POLISH_TOL {
            break;
        }
    }
    Ok(x)
}

/// Runs Dykstra's projections; on stall, searches for a CHSH witness with
/// the default budget.
pub fn solve(p: &FeasibilityProblem) -> Result<FeasibilityReport> {
    solve_with(p, WitnessSearch::default())
}

pub fn solve_with(p: &FeasibilityProblem, search: WitnessSearch) -> Result<FeasibilityReport> {
    p.validate()?;
    let rho = &p.rho;
    let d = rho.d();
    let slots = p.mode.constrained_slots();

    let mut x = initial_point(rho, p.mode)?.with_factors(&[d, d, d])?;
    // Dykstra increments, one per set: the marginal sets, then the PSD cone.
    let mut increments = vec![ComplexMatrix::zeros(&[d, d, d]); slots.len() + 1];
    let mut residual_history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < p.max_iter {
        iterations += 1;
        for (k, &slot) in slots.iter().enumerate() {
            let shifted = &x + &increments[k];
            let y = project_marginal(&shifted, rho, slot)?;
            increments[k] = &shifted - &y;
            x = y;
        }
        let k = slots.len();
        let shifted = (&x + &increments[k]).hermitian_part();
        let y = project_psd(&shifted)?;
        increments[k] = &shifted - &y;
        x = y;

        let residual = combined_residual(&x, rho, p.mode)?;
        residual_history.push(residual);
        if residual <= p.tol {
            converged = true;
            break;
        }
    }

    if converged {
        let polished = polish_marginals(&x, rho, p.mode)?;
        let witness = SourceOperator::new(polished.hermitian_part(), p.mode)?;
        let cert = certify_with(&witness, rho, p.tol, MARG_TOL)?;
        if cert.is_dso() {
            return Ok(FeasibilityReport {
                status: FeasibilityStatus::Feasible,
                witness: Some(witness),
                chsh_witness: None,
                residual_history,
                iterations,
            });
        }
    }

    let report = chsh_max(rho, search.restarts, search.seed);
    let chsh_witness = if report.functional_value > 2.0 + WITNESS_MARGIN {
        let mut obs = report.observables.into_iter();
        let mut next = || obs.next().expect("four observables");
        Some(ChshWitness {
            value: report.functional_value,
            observables: ObservableQuad::new(next(), next(), next(), next())?,
        })
    } else {
        None
    };
    Ok(FeasibilityReport {
        status: if chsh_witness.is_some() {
            FeasibilityStatus::InfeasibleWitnessed
        } else {
            FeasibilityStatus::Undecided
        },
        witness: None,
        chsh_witness,
        residual_history,
        iterations,
    })
}
