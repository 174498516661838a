//! Generalized Alice/Bob joint measurements with finitely many real
//! outcomes in `[-1, 1]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::{ginibre, seeded_rng};
use crate::states::{BipartiteState, Observable, PSD_TOL};
use crate::tensor::ComplexMatrix;

/// Allowed deviation of `Σ effects` from the identity.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Operator-norm distance below which two induced observables are equal.
pub const MATCH_TOL: f64 = 1e-10;
/// Slack on the inequality checks under POVMs.
pub const POVM_CHECK_SLACK: f64 = 1e-10;

/// Positive operator-valued measure: effect `effects[i]` is tagged with
/// outcome `outcomes[i]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PovMeasure {
    d: usize,
    outcomes: Vec<f64>,
    effects: Vec<ComplexMatrix>,
}

impl PovMeasure {
    pub fn new(outcomes: Vec<f64>, effects: Vec<ComplexMatrix>) -> Result<Self> {
        if outcomes.len() != effects.len() || outcomes.is_empty() {
            return Err(Error::InvalidPovm(format!(
                "{} outcomes for {} effects",
                outcomes.len(),
                effects.len()
            )));
        }
        if let Some(l) = outcomes.iter().find(|l| !(l.abs() <= 1.0)) {
            return Err(Error::InvalidPovm(format!("outcome {l} outside [-1, 1]")));
        }
        let d = effects[0].dim();
        let mut total = ComplexMatrix::zeros(&[d]);
        let mut checked = Vec::with_capacity(effects.len());
        for e in effects {
            if e.dim() != d {
                return Err(Error::InvalidPovm("effects of different dimensions".into()));
            }
            let e = e.with_factors(&[d])?;
            let min = e.min_eigenvalue()?;
            if min < -PSD_TOL {
                return Err(Error::InvalidPovm(format!("effect with eigenvalue {min:e}")));
            }
            total = &total + &e;
            checked.push(e.hermitian_part());
        }
        let dev = total.max_abs_diff(&ComplexMatrix::identity(&[d]));
        if dev > COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!(
                "effects sum to identity only within {dev:e}"
            )));
        }
        Ok(Self {
            d,
            outcomes,
            effects: checked,
        })
    }

    /// Two-outcome measurement with outcome `+1` on `(I + W)/2` and `-1` on
    /// `(I − W)/2`; it induces `W` itself.
    pub fn binary(w: &Observable) -> Result<Self> {
        let id = ComplexMatrix::identity(&[w.d()]);
        Self::new(
            vec![1.0, -1.0],
            vec![(&id + w.matrix()).scale(0.5), (&id - w.matrix()).scale(0.5)],
        )
    }

    /// [`PovMeasure::binary`] restricted to dichotomic observables, whose
    /// effects are then projectors.
    pub fn projective(w: &Observable) -> Result<Self> {
        if !w.is_dichotomic() {
            return Err(Error::InvalidObservable(
                "projective POVM needs a dichotomic observable".into(),
            ));
        }
        Self::binary(w)
    }

    /// `k` effects `S^{-1/2} A_i S^{-1/2}` from Wishart draws `A_i` with
    /// `S = Σ A_i`; outcomes uniform in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Self {
        let raw: Vec<ComplexMatrix> = (0..k.max(1))
            .map(|_| {
                let g = ginibre(d, rng);
                ComplexMatrix::from_matrix(&g * g.adjoint())
                    .expect("square")
                    .hermitian_part()
            })
            .collect();
        let mut total = ComplexMatrix::zeros(&[d]);
        for a in &raw {
            total = &total + a;
        }
        let inv_sqrt = total
            .map_spectrum(|v| 1.0 / v.sqrt())
            .expect("sum of Wishart matrices is Hermitian");
        let effects = raw
            .iter()
            .map(|a| (&(&inv_sqrt * a) * &inv_sqrt).hermitian_part())
            .collect();
        let outcomes = (0..k.max(1)).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Self::new(outcomes, effects).expect("normalized effects form a POVM")
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }
}

impl<'de> Deserialize<'de> for PovMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            outcomes: Vec<f64>,
            effects: Vec<ComplexMatrix>,
        }
        let raw = Raw::deserialize(d)?;
        PovMeasure::new(raw.outcomes, raw.effects).map_err(serde::de::Error::custom)
    }
}

/// Deterministic random POVM for a seed.
pub fn random_povm(d: usize, k: usize, seed: u64) -> PovMeasure {
    PovMeasure::random(d, k, &mut seeded_rng(seed))
}

/// `Σ λ_i M_i`.
pub fn induced_observable(m: &PovMeasure) -> Observable {
    let mut acc = ComplexMatrix::zeros(&[m.d]);
    for (l, e) in m.outcomes.iter().zip(&m.effects) {
        acc = &acc + &e.scale(*l);
    }
    // ‖Σ λ_i M_i‖ ≤ Σ |λ_i| M_i ≤ I; roundoff can push the norm a hair above
    // one, so clip the spectrum.
    let acc = acc
        .map_spectrum(|v| v.clamp(-1.0, 1.0))
        .expect("weighted sum of Hermitian effects");
    let dichotomic =
        m.outcomes.iter().all(|l| l.abs() == 1.0) && m.effects.iter().all(|e| (&(e * e) - e).frobenius_norm() < 1e-10);
    Observable::from_spectral(acc, dichotomic)
}

/// Alice's and Bob's measurements for one pair of settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointSetting {
    pub alice: PovMeasure,
    pub bob: PovMeasure,
}

impl JointSetting {
    pub fn new(alice: PovMeasure, bob: PovMeasure) -> Result<Self> {
        if alice.d != bob.d {
            return Err(Error::DimensionMismatch {
                expected: format!("Bob on C^{}", alice.d),
                found: format!("C^{}", bob.d),
            });
        }
        Ok(Self { alice, bob })
    }

    fn check_state(&self, rho: &BipartiteState) -> Result<()> {
        if rho.d() != self.alice.d || rho.d() != self.bob.d {
            return Err(Error::DimensionMismatch {
                expected: format!("measurements on C^{}", rho.d()),
                found: format!("C^{} and C^{}", self.alice.d, self.bob.d),
            });
        }
        Ok(())
    }
}

/// `tr[ρ (M_i ⊗ N_j)]`.
pub fn joint_probability(rho: &BipartiteState, s: &JointSetting, i: usize, j: usize) -> Result<f64> {
    s.check_state(rho)?;
    let a = s.alice.effects.get(i).ok_or(Error::IndexOutOfRange {
        index: i,
        len: s.alice.len(),
    })?;
    let b = s.bob.effects.get(j).ok_or(Error::IndexOutOfRange {
        index: j,
        len: s.bob.len(),
    })?;
    Ok(rho.expectation(a, b))
}

/// Full table `p[i][j]` of joint outcome probabilities.
pub fn joint_table(rho: &BipartiteState, s: &JointSetting) -> Result<Vec<Vec<f64>>> {
    s.check_state(rho)?;
    Ok(s.alice
        .effects
        .iter()
        .map(|a| s.bob.effects.iter().map(|b| rho.expectation(a, b)).collect())
        .collect())
}

/// `⟨λ₁λ₂⟩ = Σ_{ij} λ_i λ_j p[i][j]`.
pub fn product_expectation(rho: &BipartiteState, s: &JointSetting) -> Result<f64> {
    let table = joint_table(rho, s)?;
    Ok(weighted_sum(&table, s, |x| x))
}

/// Variance of the product `λ₁λ₂` under the joint distribution.
pub fn product_variance(rho: &BipartiteState, s: &JointSetting) -> Result<f64> {
    let table = joint_table(rho, s)?;
    let mean = weighted_sum(&table, s, |x| x);
    let second = weighted_sum(&table, s, |x| x * x);
    Ok((second - mean * mean).max(0.0))
}

fn weighted_sum(table: &[Vec<f64>], s: &JointSetting, f: impl Fn(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for (row, la) in table.iter().zip(&s.alice.outcomes) {
        for (p, lb) in row.iter().zip(&s.bob.outcomes) {
            acc += f(la * lb) * p;
        }
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleSummary {
    pub n: u64,
    /// `counts[i][j]`: number of draws with Alice outcome `i`, Bob outcome `j`.
    pub counts: Vec<Vec<u64>>,
    pub empirical_expectation: f64,
}

/// Draws `n` outcome pairs by inverse CDF over the flattened joint table.
pub fn sample_outcomes(rho: &BipartiteState, s: &JointSetting, n: u64, seed: u64) -> Result<SampleSummary> {
    if n == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    let table = joint_table(rho, s)?;
    let cols = s.bob.len();
    let mut cdf = Vec::with_capacity(table.len() * cols);
    let mut acc = 0.0;
    for row in &table {
        for &p in row {
            acc += p.max(0.0);
            cdf.push(acc);
        }
    }
    let total = acc;
    let mut counts = vec![vec![0u64; cols]; table.len()];
    let mut rng = seeded_rng(seed);
    for _ in 0..n {
        let u = rng.random::<f64>() * total;
        let k = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        counts[k / cols][k % cols] += 1;
    }
    let mut sum = 0.0;
    for (row, la) in counts.iter().zip(&s.alice.outcomes) {
        for (&c, lb) in row.iter().zip(&s.bob.outcomes) {
            sum += c as f64 * la * lb;
        }
    }
    Ok(SampleSummary {
        n,
        counts,
        empirical_expectation: sum / n as f64,
    })
}

/// Whether the two measurements induce the same observable.
pub fn matched_condition_check(ma: &PovMeasure, mb: &PovMeasure) -> bool {
    if ma.d != mb.d {
        return false;
    }
    let diff = induced_observable(ma).matrix() - induced_observable(mb).matrix();
    diff.operator_norm().map(|n| n <= MATCH_TOL).unwrap_or(false)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BellPovmCheck {
    /// `|⟨λ₁λ₂⟩^(a,b₁) − ⟨λ₁λ₂⟩^(a,b₂)|`.
    pub lhs: f64,
    /// `1 − ⟨λ₁λ₂⟩^(b₁,b₂)`, Alice measuring at `b₁`.
    pub rhs: f64,
    pub ok: bool,
    /// Left side through induced observables.
    pub operator_lhs: f64,
    /// `1 − tr[ρ (W₂^(b₁) ⊗ W₂^(b₂))]`, Bob's `b₁` observable on Alice's side.
    pub operator_rhs: f64,
}

/// Perfect-correlation Bell inequality under POVMs. Alice measures `a`; Bob
/// measures `b1_bob` or `b2_bob`; for the correlation term Alice measures
/// `b1_alice`, which must induce the same observable as `b1_bob`.
pub fn bell_povm_check(
    rho: &BipartiteState,
    a: &PovMeasure,
    b1_alice: &PovMeasure,
    b1_bob: &PovMeasure,
    b2_bob: &PovMeasure,
) -> Result<BellPovmCheck> {
    if !matched_condition_check(b1_alice, b1_bob) {
        return Err(Error::Precondition(
            "Alice's and Bob's measurements at setting b1 induce different observables".into(),
        ));
    }
    let e = |x: &PovMeasure, y: &PovMeasure| -> Result<f64> {
        product_expectation(rho, &JointSetting::new(x.clone(), y.clone())?)
    };
    let lhs = (e(a, b1_bob)? - e(a, b2_bob)?).abs();
    let rhs = 1.0 - e(b1_alice, b2_bob)?;
    let wa = induced_observable(a);
    let wb1 = induced_observable(b1_bob);
    let wb2 = induced_observable(b2_bob);
    let operator_lhs = (rho.expectation(wa.matrix(), wb1.matrix()) - rho.expectation(wa.matrix(), wb2.matrix())).abs();
    let operator_rhs = 1.0 - rho.expectation(wb1.matrix(), wb2.matrix());
    Ok(BellPovmCheck {
        lhs,
        rhs,
        ok: lhs <= rhs + POVM_CHECK_SLACK,
        operator_lhs,
        operator_rhs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChshPovmCheck {
    pub value: f64,
    pub ok: bool,
}

/// `⟨a₁b₁⟩ + ⟨a₁b₂⟩ + ⟨a₂b₁⟩ − ⟨a₂b₂⟩` compared against 2.
pub fn chsh_povm_check(rho: &BipartiteState, alice: [&PovMeasure; 2], bob: [&PovMeasure; 2]) -> Result<ChshPovmCheck> {
    let e = |x: &PovMeasure, y: &PovMeasure| -> Result<f64> {
        product_expectation(rho, &JointSetting::new(x.clone(), y.clone())?)
    };
    let value = e(alice[0], bob[0])? + e(alice[0], bob[1])? + e(alice[1], bob[0])? - e(alice[1], bob[1])?;
    Ok(ChshPovmCheck {
        value,
        ok: value.abs() <= 2.0 + POVM_CHECK_SLACK,
    })
}
