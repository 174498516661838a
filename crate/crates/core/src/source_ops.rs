//! Source-operators: Hermitian unit-trace dilations of a bipartite state to
//! three copies of the local space whose designated two-slot reductions
//! reproduce the state.
//!
//! Slots are 0-based here: a right-extending operator has
//! `tr_1[T] = tr_2[T] = ρ` (the second and third factors traced), a
//! left-extending one has `tr_0[T] = tr_1[T] = ρ`, and a symmetric one
//! satisfies all three.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{
    sym_projectors, triple_projectors, BipartiteState, DiagonalMixture, SeparableMixture, PSD_TOL, TRACE_TOL,
};
use crate::tensor::{ComplexMatrix, MatrixFile};

/// Allowed trace-norm distance between a marginal and the target state.
pub const MARG_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Extension to the right: slots 1 and 2 are traced.
    Right,
    /// Extension to the left: slots 0 and 1 are traced.
    Left,
    /// All three single-slot reductions equal the state.
    Symmetric,
}

impl Direction {
    /// The slots whose partial trace must reproduce the state.
    pub fn constrained_slots(self) -> &'static [usize] {
        match self {
            Direction::Right => &[1, 2],
            Direction::Left => &[0, 1],
            Direction::Symmetric => &[0, 1, 2],
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "right" => Ok(Direction::Right),
            "left" => Ok(Direction::Left),
            "symmetric" => Ok(Direction::Symmetric),
            other => Err(Error::Parse(format!(
                "unknown direction '{other}', expected right|left|symmetric"
            ))),
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::Right => "right",
            Direction::Left => "left",
            Direction::Symmetric => "symmetric",
        })
    }
}

/// Hermitian unit-trace operator on `(C^d)^{⊗3}` with an extension direction.
/// Positivity is not required.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceOperator {
    d: usize,
    matrix: ComplexMatrix,
    direction: Direction,
}

impl SourceOperator {
    pub fn new(matrix: ComplexMatrix, direction: Direction) -> Result<Self> {
        let n = matrix.dim();
        let d = (n as f64).cbrt().round() as usize;
        if d * d * d != n || d < 2 {
            return Err(Error::DimensionMismatch {
                expected: "d³ × d³ with d ≥ 2".into(),
                found: format!("{n} × {n}"),
            });
        }
        let matrix = matrix.with_factors(&[d, d, d])?;
        matrix.ensure_hermitian()?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidSource(format!("trace {tr} differs from 1")));
        }
        Ok(Self { d, matrix, direction })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.min_eigenvalue().expect("validated Hermitian")
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -PSD_TOL
    }

    pub fn trace_norm(&self) -> f64 {
        self.matrix.trace_norm().expect("validated Hermitian")
    }

    /// Reduction `tr_slot[T]` as a two-factor operator.
    pub fn marginal(&self, slot: usize) -> Result<ComplexMatrix> {
        self.matrix.partial_trace(slot)
    }
}

#[derive(Serialize, Deserialize)]
struct SourceFile {
    #[serde(flatten)]
    matrix: MatrixFile,
    direction: Direction,
}

impl Serialize for SourceOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SourceFile {
            matrix: MatrixFile::from(&self.matrix),
            direction: self.direction,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SourceOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = SourceFile::deserialize(d)?;
        let m = ComplexMatrix::try_from(f.matrix).map_err(serde::de::Error::custom)?;
        SourceOperator::new(m, f.direction).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginalResidual {
    /// 0-based traced slot.
    pub slot: usize,
    /// `‖tr_slot[T] - ρ‖₁`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SourceCheck {
    pub ok: bool,
    pub residuals: Vec<MarginalResidual>,
}

impl SourceCheck {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

fn marginal_residuals(t: &SourceOperator, rho: &BipartiteState) -> Result<Vec<MarginalResidual>> {
    if t.d() != rho.d() {
        return Err(Error::DimensionMismatch {
            expected: format!("local dimension {}", rho.d()),
            found: format!("{}", t.d()),
        });
    }
    t.direction()
        .constrained_slots()
        .iter()
        .map(|&slot| {
            let diff = &t.marginal(slot)? - rho.matrix();
            Ok(MarginalResidual {
                slot,
                residual: diff.hermitian_part().trace_norm()?,
            })
        })
        .collect()
}

/// Checks the marginal constraints of `t`'s direction against `rho` at
/// [`MARG_TOL`].
pub fn verify_source_operator(t: &SourceOperator, rho: &BipartiteState) -> Result<SourceCheck> {
    verify_source_operator_with(t, rho, MARG_TOL)
}

pub fn verify_source_operator_with(t: &SourceOperator, rho: &BipartiteState, marg_tol: f64) -> Result<SourceCheck> {
    let residuals = marginal_residuals(t, rho)?;
    let ok = residuals.iter().all(|r| r.residual <= marg_tol);
    Ok(SourceCheck { ok, residuals })
}

/// Evidence that a source-operator is a density source-operator for a state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DsoCertificate {
    pub source: SourceOperator,
    pub min_eigenvalue: f64,
    pub marginal_residuals: Vec<f64>,
    pub psd_tol: f64,
    pub marg_tol: f64,
}

impl DsoCertificate {
    pub fn is_dso(&self) -> bool {
        self.min_eigenvalue >= -self.psd_tol && self.marginal_residuals.iter().all(|&r| r <= self.marg_tol)
    }
}

pub fn certify(t: &SourceOperator, rho: &BipartiteState) -> Result<DsoCertificate> {
    certify_with(t, rho, PSD_TOL, MARG_TOL)
}

pub fn certify_with(t: &SourceOperator, rho: &BipartiteState, psd_tol: f64, marg_tol: f64) -> Result<DsoCertificate> {
    let residuals = marginal_residuals(t, rho)?;
    Ok(DsoCertificate {
        source: t.clone(),
        min_eigenvalue: t.min_eigenvalue(),
        marginal_residuals: residuals.into_iter().map(|r| r.residual).collect(),
        psd_tol,
        marg_tol,
    })
}

/// DSO of a separable state: `Σ α_i ρ_i ⊗ ρ̃_i ⊗ ρ̃_i` to the right,
/// `Σ α_i ρ_i ⊗ ρ_i ⊗ ρ̃_i` to the left.
pub fn separable_dso(m: &SeparableMixture, direction: Direction) -> Result<SourceOperator> {
    let d = m.validate()?;
    let mut acc = ComplexMatrix::zeros(&[d, d, d]);
    for (w, (a, b)) in m.weights.iter().zip(&m.pairs) {
        let a = a.clone().with_factors(&[d])?;
        let b = b.clone().with_factors(&[d])?;
        let term = match direction {
            Direction::Right => a.tensor(&b).tensor(&b),
            Direction::Left => a.tensor(&a).tensor(&b),
            Direction::Symmetric => {
                return Err(Error::Precondition(
                    "separable_dso builds right or left extensions only".into(),
                ))
            }
        };
        acc = &acc + &term.scale(*w);
    }
    SourceOperator::new(acc, direction)
}

/// Symmetric DSO `Σ ξ_m ρ_m ⊗ ρ_m ⊗ ρ_m` of the state `Σ ξ_m ρ_m ⊗ ρ_m`.
pub fn bellclass_dso_from_diagonal_mixture(m: &DiagonalMixture) -> Result<SourceOperator> {
    let d = m.validate()?;
    let mut acc = ComplexMatrix::zeros(&[d, d, d]);
    for (w, rho) in m.weights.iter().zip(&m.locals) {
        let rho = rho.clone().with_factors(&[d])?;
        acc = &acc + &rho.tensor(&rho).tensor(&rho).scale(*w);
    }
    SourceOperator::new(acc, Direction::Symmetric)
}

/// The symmetric dilation of the Werner state for `d ≥ 3`:
/// `(1+Φ)/2 · 6Q₊/(d(d+1)(d+2)) + (1-Φ)/2 · 6Q₋/(d(d-1)(d-2))`.
pub fn werner_dso(d: usize, phi: f64) -> Result<SourceOperator> {
    if d < 3 {
        return Err(Error::Precondition(format!(
            "werner_dso needs d ≥ 3 (got {d}); the Q₋ normalization d(d-1)(d-2) vanishes at d = 2, use qubit_werner_operator"
        )));
    }
    if !(-1.0..=1.0).contains(&phi) {
        return Err(Error::PhiOutOfRange(phi));
    }
    let (q_plus, q_minus) = triple_projectors(d)?;
    let df = d as f64;
    let m = &q_plus.scale((1.0 + phi) / 2.0 * 6.0 / (df * (df + 1.0) * (df + 2.0)))
        + &q_minus.scale((1.0 - phi) / 2.0 * 6.0 / (df * (df - 1.0) * (df - 2.0)));
    SourceOperator::new(m, Direction::Symmetric)
}

/// `(1-Φ)/4 · I₈ + (2Φ-1)/4 · Q₊` on three qubits. All three reductions equal
/// the qubit Werner state for every Φ; the operator is positive only for
/// `Φ ∈ [0, 1]`.
pub fn qubit_werner_operator(phi: f64) -> Result<SourceOperator> {
    if !(-1.0..=1.0).contains(&phi) {
        return Err(Error::PhiOutOfRange(phi));
    }
    let (q_plus, _) = triple_projectors(2)?;
    let id = ComplexMatrix::identity(&[2, 2, 2]);
    let m = &id.scale((1.0 - phi) / 4.0) + &q_plus.scale((2.0 * phi - 1.0) / 4.0);
    SourceOperator::new(m, Direction::Symmetric)
}

/// `σ = tr_slot[|T|] / ‖T‖₁`.
pub fn induced_sigma(t: &SourceOperator, slot: usize) -> Result<BipartiteState> {
    let abs = t.matrix().abs_operator()?;
    let norm = abs.trace().re;
    if norm <= 0.0 {
        return Err(Error::InvalidSource("zero trace norm".into()));
    }
    BipartiteState::new(abs.partial_trace(slot)?.scale(1.0 / norm))
}

/// The `(d ± 2)/3 · P±` reductions of `Q±`, used as a closed-form reference.
pub fn triple_projector_marginals(d: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (p_plus, p_minus) = sym_projectors(d)?;
    let df = d as f64;
    Ok((p_plus.scale((df + 2.0) / 3.0), p_minus.scale((df - 2.0) / 3.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, seeded_rng};
    use crate::states::{product_state, separable_mixture_state, werner_state};

    #[test]
    fn werner_dso_d3_antisymmetric() {
        let r = werner_dso(3, -1.0).unwrap();
        assert!(r.min_eigenvalue() >= -1e-12);
        let check = verify_source_operator(&r, &werner_state(3, -1.0).unwrap()).unwrap();
        assert!(check.ok);
        assert_eq!(check.residuals.len(), 3);
        assert!(check.max_residual() <= 1e-10);
    }

    #[test]
    fn werner_dso_trace_on_grid() {
        for k in 0..=20 {
            let phi = -1.0 + 0.1 * k as f64;
            let r = werner_dso(3, phi).unwrap();
            assert!((r.matrix().trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn werner_dso_marginal_d4() {
        let r = werner_dso(4, 0.7).unwrap();
        let rho = werner_state(4, 0.7).unwrap();
        for slot in 0..3 {
            assert!(r.marginal(slot).unwrap().max_abs_diff(rho.matrix()) < 1e-10);
        }
    }

    #[test]
    fn werner_dso_rejects_qubits() {
        let err = werner_dso(2, 0.5).unwrap_err();
        assert!(err.to_string().contains("qubit_werner_operator"));
        assert!(werner_dso(3, 1.2).is_err());
    }

    #[test]
    fn qubit_operator_half() {
        let t = qubit_werner_operator(0.5).unwrap();
        assert!(t.is_psd());
        assert!(certify(&t, &werner_state(2, 0.5).unwrap()).unwrap().is_dso());
    }

    #[test]
    fn qubit_operator_marginals_phi_one() {
        let t = qubit_werner_operator(1.0).unwrap();
        let rho = werner_state(2, 1.0).unwrap();
        for slot in 0..3 {
            assert!(t.marginal(slot).unwrap().max_abs_diff(rho.matrix()) < 1e-10);
        }
    }

    #[test]
    fn qubit_operator_spectrum() {
        // Q₊ on three qubits has rank 4, so the affine form has two
        // eigenvalues with multiplicity 4 each.
        for phi in [-1.0, -0.5, 0.0, 0.3, 1.0] {
            let ev = qubit_werner_operator(phi).unwrap().matrix().eigenvalues().unwrap();
            let mut expected = vec![phi / 4.0; 4];
            expected.extend(vec![(1.0 - phi) / 4.0; 4]);
            expected.sort_by(f64::total_cmp);
            for (a, b) in ev.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-10, "phi={phi}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn separable_dso_single_pair() {
        let mut rng = seeded_rng(2);
        let a = random_density(&[2], &mut rng);
        let b = random_density(&[2], &mut rng);
        let m = SeparableMixture::new(vec![1.0], vec![(a.clone(), b.clone())]).unwrap();
        let t = separable_dso(&m, Direction::Right).unwrap();
        assert!(t.matrix().max_abs_diff(&a.tensor(&b).tensor(&b)) < 1e-15);
        assert!(separable_dso(&m, Direction::Symmetric).is_err());
    }

    #[test]
    fn separable_dso_verifies_both_directions() {
        let mut rng = seeded_rng(21);
        let pairs: Vec<_> = (0..3)
            .map(|_| (random_density(&[3], &mut rng), random_density(&[3], &mut rng)))
            .collect();
        let m = SeparableMixture::new(vec![0.2, 0.5, 0.3], pairs).unwrap();
        let rho = separable_mixture_state(&m).unwrap();
        for dir in [Direction::Right, Direction::Left] {
            let t = separable_dso(&m, dir).unwrap();
            assert!(t.min_eigenvalue() >= -1e-14);
            assert!(verify_source_operator(&t, &rho).unwrap().ok);
            assert!(certify(&t, &rho).unwrap().is_dso());
        }
    }

    #[test]
    fn rho_tensor_sigma_fails_right_check() {
        // tr_1[ρ ⊗ σ] = tr_B[ρ] ⊗ σ, which differs from ρ unless ρ is a
        // product with second factor σ.
        let mut rng = seeded_rng(4);
        let rho = werner_state(2, -0.6).unwrap();
        let sigma = random_density(&[2], &mut rng);
        let t = SourceOperator::new(rho.matrix().tensor(&sigma), Direction::Right).unwrap();
        let check = verify_source_operator(&t, &rho).unwrap();
        assert!(!check.ok);
        assert!(check.residuals[0].residual > 0.1);
        assert!(check.residuals[1].residual <= 1e-12);
    }

    #[test]
    fn diagonal_mixture_symmetric_dso() {
        let mut rng = seeded_rng(13);
        let locals = vec![random_density(&[2], &mut rng), random_density(&[2], &mut rng)];
        let m = DiagonalMixture::new(vec![0.35, 0.65], locals.clone()).unwrap();
        let t = bellclass_dso_from_diagonal_mixture(&m).unwrap();
        let rho = m.state().unwrap();
        let check = verify_source_operator(&t, &rho).unwrap();
        assert!(check.ok);
        assert_eq!(check.residuals.len(), 3);
        let single = DiagonalMixture::new(vec![1.0], vec![locals[0].clone()]).unwrap();
        let t = bellclass_dso_from_diagonal_mixture(&single).unwrap();
        let r = &locals[0];
        assert!(t.matrix().max_abs_diff(&r.tensor(r).tensor(r)) < 1e-15);
    }

    #[test]
    fn induced_sigma_cases() {
        let mut rng = seeded_rng(6);
        let a = random_density(&[2], &mut rng);
        let b = random_density(&[2], &mut rng);
        let m = SeparableMixture::new(vec![1.0], vec![(a, b)]).unwrap();
        let t = separable_dso(&m, Direction::Right).unwrap();
        let sigma = induced_sigma(&t, 0).unwrap();
        assert!(sigma.matrix().max_abs_diff(&t.marginal(0).unwrap()) < 1e-12);

        let t = qubit_werner_operator(-0.5).unwrap();
        assert!(!t.is_psd());
        assert!((t.trace_norm() - 2.0).abs() < 1e-12);
        for slot in [0, 2] {
            let sigma = induced_sigma(&t, slot).unwrap();
            assert!((sigma.matrix().trace().re - 1.0).abs() < 1e-12);
            assert!(sigma.matrix().max_abs_diff(&t.marginal(slot).unwrap()) > 0.05);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let t = werner_dso(3, 0.0).unwrap();
        let rho = product_state(
            &ComplexMatrix::identity(&[2]).scale(0.5),
            &ComplexMatrix::identity(&[2]).scale(0.5),
        )
        .unwrap();
        assert!(matches!(
            verify_source_operator(&t, &rho),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn json_carries_direction() {
        let t = qubit_werner_operator(0.25).unwrap();
        let text = serde_json::to_string(&t).unwrap();
        assert!(text.contains("\"direction\":\"symmetric\""));
        assert!(text.contains("\"factors\":[2,2,2]"));
        let back: SourceOperator = serde_json::from_str(&text).unwrap();
        assert_eq!(back, t);
    }
}
