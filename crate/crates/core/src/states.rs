//! Concrete operators on `C^d ⊗ C^d` and `C^d ⊗ C^d ⊗ C^d`: the flip, the
//! (anti)symmetric projectors, Werner states, separable mixtures and
//! norm-bounded observables.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::{random_with_spectrum, seeded_rng};
use crate::tensor::{ComplexMatrix, C64};

/// Tolerance on negative eigenvalues of a density operator.
pub const PSD_TOL: f64 = 1e-12;
/// Tolerance on `|tr ρ - 1|`.
pub const TRACE_TOL: f64 = 1e-12;
/// Slack on `‖W‖ ≤ 1` for observables.
pub const NORM_TOL: f64 = 1e-12;
/// Distance of a dichotomic eigenvalue from ±1.
pub const DICHOTOMIC_TOL: f64 = 1e-10;

fn require_dim(d: usize, min: usize) -> Result<()> {
    if d < min {
        Err(Error::DimensionTooSmall { d, min })
    } else {
        Ok(())
    }
}

fn require_phi(phi: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&phi) {
        Ok(())
    } else {
        Err(Error::PhiOutOfRange(phi))
    }
}

/// Checks Hermitian, PSD and unit trace. Returns the minimum eigenvalue.
pub fn check_density(m: &ComplexMatrix) -> Result<f64> {
    m.ensure_hermitian()?;
    let tr = m.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::NotDensity(format!("trace {tr} differs from 1")));
    }
    let min = m.min_eigenvalue()?;
    if min < -PSD_TOL {
        return Err(Error::NotDensity(format!("minimum eigenvalue {min:e}")));
    }
    Ok(min)
}

/// Density operator on `H ⊗ H`, `dim H = d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BipartiteState {
    d: usize,
    matrix: ComplexMatrix,
}

impl BipartiteState {
    /// Validates a `d² × d²` density operator. The factorization is reset to
    /// `[d, d]`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n = matrix.dim();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n || d < 2 {
            return Err(Error::DimensionMismatch {
                expected: "d² × d² with d ≥ 2".into(),
                found: format!("{n} × {n}"),
            });
        }
        let matrix = matrix.with_factors(&[d, d])?;
        check_density(&matrix)?;
        Ok(Self { d, matrix })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `tr[ρ (A ⊗ B)]`, real part (the imaginary part vanishes for Hermitian A, B).
    pub fn expectation(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        self.matrix.trace_product(&a.tensor(b)).re
    }

    /// The state with the two parties exchanged, `V ρ V`.
    pub fn swapped(&self) -> Self {
        let v = flip_operator(self.d).expect("d ≥ 2");
        Self {
            d: self.d,
            matrix: &(&v * &self.matrix) * &v,
        }
    }
}

impl<'de> Deserialize<'de> for BipartiteState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            matrix: ComplexMatrix,
        }
        let raw = Raw::deserialize(d)?;
        BipartiteState::new(raw.matrix).map_err(serde::de::Error::custom)
    }
}

/// Hermitian operator on `C^d` with operator norm at most one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observable {
    d: usize,
    matrix: ComplexMatrix,
    dichotomic: bool,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix, dichotomic: bool) -> Result<Self> {
        let d = matrix.dim();
        let matrix = matrix.with_factors(&[d])?;
        let eig = matrix.eigh()?;
        let norm = eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if norm > 1.0 + NORM_TOL {
            return Err(Error::InvalidObservable(format!("operator norm {norm} exceeds 1")));
        }
        if dichotomic {
            if let Some(v) = eig.values.iter().find(|v| (v.abs() - 1.0).abs() > DICHOTOMIC_TOL) {
                return Err(Error::InvalidObservable(format!(
                    "eigenvalue {v} is not ±1 for a dichotomic observable"
                )));
            }
        }
        Ok(Self {
            d,
            matrix: matrix.hermitian_part(),
            dichotomic,
        })
    }

    /// Wraps a matrix produced by a spectral map whose range is already in
    /// `[-1, 1]`.
    pub(crate) fn from_spectral(matrix: ComplexMatrix, dichotomic: bool) -> Self {
        let d = matrix.dim();
        Self { d, matrix, dichotomic }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_spectral(ComplexMatrix::identity(&[d]), true)
    }

    pub fn zero(d: usize) -> Self {
        Self::from_spectral(ComplexMatrix::zeros(&[d]), false)
    }

    /// Haar-random eigenbasis with eigenvalues uniform in `[-1, 1]`, or
    /// uniform signs when `dichotomic`.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R, dichotomic: bool) -> Self {
        let values: Vec<f64> = (0..d)
            .map(|_| {
                if dichotomic {
                    if rng.random_bool(0.5) {
                        1.0
                    } else {
                        -1.0
                    }
                } else {
                    rng.random_range(-1.0..=1.0)
                }
            })
            .collect();
        Self::from_spectral(random_with_spectrum(&[d], &values, rng), dichotomic)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn is_dichotomic(&self) -> bool {
        self.dichotomic
    }
}

/// Deterministic random observable for a seed.
pub fn random_observable(d: usize, seed: u64, dichotomic: bool) -> Result<Observable> {
    require_dim(d, 2)?;
    Ok(Observable::random(d, &mut seeded_rng(seed), dichotomic))
}

/// The flip `V_d (ψ₁ ⊗ ψ₂) = ψ₂ ⊗ ψ₁` as a permutation matrix.
pub fn flip_operator(d: usize) -> Result<ComplexMatrix> {
    require_dim(d, 2)?;
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    // |i j⟩ ↦ |j i⟩, i.e. entry (j*d + i, i*d + j) = 1.
    Ok(ComplexMatrix::from_fn(&[d, d], |row, col| {
        let (i, j) = (col / d, col % d);
        if row == j * d + i {
            one
        } else {
            zero
        }
    }))
}

/// `P± = (I ± V_d) / 2`.
pub fn sym_projectors(d: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let v = flip_operator(d)?;
    let id = ComplexMatrix::identity(&[d, d]);
    Ok(((&id + &v).scale(0.5), (&id - &v).scale(0.5)))
}

/// `tr P± = d(d ± 1)/2`.
pub fn sym_ranks(d: usize) -> (f64, f64) {
    let d = d as f64;
    (d * (d + 1.0) / 2.0, d * (d - 1.0) / 2.0)
}

/// Werner state as the mixture `(1+Φ)/2 · P₊/r₊ + (1-Φ)/2 · P₋/r₋`.
pub fn werner_state(d: usize, phi: f64) -> Result<BipartiteState> {
    require_dim(d, 2)?;
    require_phi(phi)?;
    let (p_plus, p_minus) = sym_projectors(d)?;
    let (r_plus, r_minus) = sym_ranks(d);
    let m = &p_plus.scale((1.0 + phi) / (2.0 * r_plus)) + &p_minus.scale((1.0 - phi) / (2.0 * r_minus));
    BipartiteState::new(m)
}

/// The same family written as `(d-Φ)/(d³-d) · I + (dΦ-1)/(d³-d) · V_d`.
pub fn werner_state_affine(d: usize, phi: f64) -> Result<ComplexMatrix> {
    require_dim(d, 2)?;
    require_phi(phi)?;
    let df = d as f64;
    let denom = df * df * df - df;
    let v = flip_operator(d)?;
    let id = ComplexMatrix::identity(&[d, d]);
    Ok(&id.scale((df - phi) / denom) + &v.scale((df * phi - 1.0) / denom))
}

/// The two-qubit singlet `werner_state(2, -1)`.
pub fn singlet() -> BipartiteState {
    werner_state(2, -1.0).expect("valid parameters")
}

/// Werner states are separable exactly for `Φ ∈ [0, 1]`.
pub fn is_separable_werner(_d: usize, phi: f64) -> bool {
    phi >= 0.0
}

/// The six permutations of three tensor factors, as products of
/// `V_d ⊗ I` and `I ⊗ V_d`, each paired with its sign (+1 even, -1 odd).
pub fn triple_permutations(d: usize) -> Result<Vec<(ComplexMatrix, f64)>> {
    let v = flip_operator(d)?;
    let id1 = ComplexMatrix::identity(&[d]);
    let v12 = v.tensor(&id1);
    let v23 = id1.tensor(&v);
    let id = ComplexMatrix::identity(&[d, d, d]);
    let v13 = &(&v23 * &v12) * &v23;
    let cyc_a = &v23 * &v12;
    let cyc_b = &v12 * &v23;
    Ok(vec![
        (id, 1.0),
        (v12, -1.0),
        (v23, -1.0),
        (v13, -1.0),
        (cyc_a, 1.0),
        (cyc_b, 1.0),
    ])
}

/// Projectors onto the totally symmetric (`Q₊`) and totally antisymmetric
/// (`Q₋`) subspaces of `(C^d)^{⊗3}`.
pub fn triple_projectors(d: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let perms = triple_permutations(d)?;
    let mut q_plus = ComplexMatrix::zeros(&[d, d, d]);
    let mut q_minus = ComplexMatrix::zeros(&[d, d, d]);
    for (p, sign) in &perms {
        q_plus = &q_plus + p;
        q_minus = &q_minus + &p.scale(*sign);
    }
    Ok((q_plus.scale(1.0 / 6.0), q_minus.scale(1.0 / 6.0)))
}

/// `tr Q± = d(d ± 1)(d ± 2)/6`.
pub fn triple_ranks(d: usize) -> (f64, f64) {
    let d = d as f64;
    (d * (d + 1.0) * (d + 2.0) / 6.0, d * (d - 1.0) * (d - 2.0) / 6.0)
}

/// `Σ α_i ρ_i ⊗ ρ̃_i` given by weights and pairs of local density operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableMixture {
    pub weights: Vec<f64>,
    pub pairs: Vec<(ComplexMatrix, ComplexMatrix)>,
}

impl SeparableMixture {
    pub fn new(weights: Vec<f64>, pairs: Vec<(ComplexMatrix, ComplexMatrix)>) -> Result<Self> {
        let m = Self { weights, pairs };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<usize> {
        validate_weights(&self.weights, self.pairs.len())?;
        let d = self
            .pairs
            .first()
            .map(|(a, _)| a.dim())
            .ok_or_else(|| Error::InvalidMixture("no terms".into()))?;
        for (a, b) in &self.pairs {
            if a.dim() != d || b.dim() != d {
                return Err(Error::InvalidMixture(format!(
                    "local dimensions {} and {} differ from {d}",
                    a.dim(),
                    b.dim()
                )));
            }
            check_density(a)?;
            check_density(b)?;
        }
        Ok(d)
    }

    pub fn d(&self) -> usize {
        self.pairs[0].0.dim()
    }
}

pub(crate) fn validate_weights(weights: &[f64], terms: usize) -> Result<()> {
    if weights.len() != terms || terms == 0 {
        return Err(Error::InvalidMixture(format!(
            "{} weights for {terms} terms",
            weights.len()
        )));
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidMixture("weights must be positive".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidMixture(format!("weights sum to {total}")));
    }
    Ok(())
}

pub fn separable_mixture_state(m: &SeparableMixture) -> Result<BipartiteState> {
    let d = m.validate()?;
    let mut acc = ComplexMatrix::zeros(&[d, d]);
    for (w, (a, b)) in m.weights.iter().zip(&m.pairs) {
        acc = &acc
            + &a.clone()
                .with_factors(&[d])?
                .tensor(&b.clone().with_factors(&[d])?)
                .scale(*w);
    }
    BipartiteState::new(acc)
}

/// `Σ ξ_m ρ_m ⊗ ρ_m`: a separable state built from equal local factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalMixture {
    pub weights: Vec<f64>,
    pub locals: Vec<ComplexMatrix>,
}

impl DiagonalMixture {
    pub fn new(weights: Vec<f64>, locals: Vec<ComplexMatrix>) -> Result<Self> {
        let m = Self { weights, locals };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<usize> {
        validate_weights(&self.weights, self.locals.len())?;
        let d = self.locals[0].dim();
        for rho in &self.locals {
            if rho.dim() != d {
                return Err(Error::InvalidMixture(format!(
                    "local dimension {} differs from {d}",
                    rho.dim()
                )));
            }
            check_density(rho)?;
        }
        Ok(d)
    }

    pub fn as_separable(&self) -> SeparableMixture {
        SeparableMixture {
            weights: self.weights.clone(),
            pairs: self.locals.iter().map(|r| (r.clone(), r.clone())).collect(),
        }
    }

    pub fn state(&self) -> Result<BipartiteState> {
        self.validate()?;
        separable_mixture_state(&self.as_separable())
    }
}

/// `ρ₁ ⊗ ρ₂` for local density operators.
pub fn product_state(rho1: &ComplexMatrix, rho2: &ComplexMatrix) -> Result<BipartiteState> {
    separable_mixture_state(&SeparableMixture::new(vec![1.0], vec![(rho1.clone(), rho2.clone())])?)
}
