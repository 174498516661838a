//! End-to-end numerical checks of the Werner dilations and of the CHSH and
//! perfect-correlation inequalities they imply. Each check returns its
//! measured worst-case figures together with a pass flag.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::bell::{
    bell_lhs_rhs, bell_max_violation, chsh_max, perfect_correlation_gap, ObservableQuad, SourceBounds, Variant,
};
use crate::error::{Error, Result};
use crate::feasibility::{solve_with, FeasibilityProblem, FeasibilityStatus, WitnessSearch};
use crate::measurement::{
    bell_povm_check, chsh_povm_check, induced_observable, product_expectation, product_variance, sample_outcomes,
    JointSetting, PovMeasure,
};
use crate::random::{random_density, random_weights, stream_rng, SeededRng};
use crate::source_ops::{
    bellclass_dso_from_diagonal_mixture, certify, qubit_werner_operator, separable_dso, triple_projector_marginals,
    verify_source_operator, werner_dso, Direction,
};
use crate::states::{
    product_state, separable_mixture_state, singlet, triple_projectors, triple_ranks, werner_state,
    werner_state_affine, BipartiteState, DiagonalMixture, Observable, SeparableMixture,
};
use crate::tensor::ComplexMatrix;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    /// Local dimension of the Werner states used by the inequality checks.
    pub d: usize,
    /// Number of equally spaced Φ values in `[-1, 1]`.
    pub grid: usize,
    pub chsh_restarts: usize,
    pub bell_restarts: usize,
    pub random_triples: usize,
    pub random_quads: usize,
    pub povm_trials: usize,
    pub sampling_trials: usize,
    pub samples: u64,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            d: 3,
            grid: 21,
            chsh_restarts: 50,
            bell_restarts: 200,
            random_triples: 10_000,
            random_quads: 1000,
            povm_trials: 1000,
            sampling_trials: 100,
            samples: 100_000,
            seed: 7,
        }
    }
}

impl SuiteConfig {
    fn validate(&self) -> Result<()> {
        if self.d < 3 {
            return Err(Error::DimensionTooSmall { d: self.d, min: 3 });
        }
        if self.grid < 2 || self.chsh_restarts == 0 || self.bell_restarts == 0 || self.samples == 0 {
            return Err(Error::Precondition(
                "grid ≥ 2, restarts ≥ 1 and samples ≥ 1 are required".into(),
            ));
        }
        Ok(())
    }

    fn phi_grid(&self) -> Vec<f64> {
        phi_grid(self.grid)
    }

    /// Independent generator for check `id`, stream `k`.
    fn rng(&self, id: u64, k: u64) -> SeededRng {
        stream_rng(self.seed, id * 1_000_000 + k)
    }

    fn sub_seed(&self, id: u64, k: u64) -> u64 {
        self.rng(id, k).random()
    }
}

/// `n` equally spaced points from −1 to 1.
pub fn phi_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
}

impl CheckOutcome {
    fn new(id: u8, name: &str) -> Self {
        Self {
            id,
            name: name.to_string(),
            passed: true,
            metrics: BTreeMap::new(),
        }
    }

    /// Records the worst observed value of a quantity that must stay ≤ `limit`.
    fn at_most(&mut self, key: &str, value: f64, limit: f64) {
        let e = self.metrics.entry(key.to_string()).or_insert(f64::NEG_INFINITY);
        *e = e.max(value);
        if !(value <= limit) {
            self.passed = false;
        }
    }

    /// Records the worst observed value of a quantity that must stay ≥ `limit`.
    fn at_least(&mut self, key: &str, value: f64, limit: f64) {
        let e = self.metrics.entry(key.to_string()).or_insert(f64::INFINITY);
        *e = e.min(value);
        if !(value >= limit) {
            self.passed = false;
        }
    }

    fn require(&mut self, key: &str, ok: bool) {
        let e = self.metrics.entry(key.to_string()).or_insert(1.0);
        if !ok {
            *e = 0.0;
            self.passed = false;
        }
    }
}

fn trace_norm_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    (a - b).hermitian_part().trace_norm()
}

/// `Q±` idempotent, orthogonal, with the expected reductions and ranks.
pub fn projector_algebra(dims: &[usize]) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new(1, "triple projector algebra");
    for &d in dims {
        let (qp, qm) = triple_projectors(d)?;
        let (mp, mm) = triple_projector_marginals(d)?;
        let (rp, rm) = triple_ranks(d);
        out.at_most("idempotence_error", trace_norm_diff(&(&qp * &qp), &qp)?, 1e-10);
        out.at_most("idempotence_error", trace_norm_diff(&(&qm * &qm), &qm)?, 1e-10);
        out.at_most(
            "orthogonality_error",
            (&qp * &qm).as_matrix().singular_values().sum(),
            1e-10,
        );
        for slot in 0..3 {
            out.at_most(
                "reduction_error",
                trace_norm_diff(&qp.partial_trace(slot)?, &mp)?,
                1e-10,
            );
            out.at_most(
                "reduction_error",
                trace_norm_diff(&qm.partial_trace(slot)?, &mm)?,
                1e-10,
            );
        }
        out.at_most("rank_error", (qp.trace().re - rp).abs(), 1e-10);
        out.at_most("rank_error", (qm.trace().re - rm).abs(), 1e-10);
    }
    Ok(out)
}

/// Projector form of the Werner state against its affine form.
pub fn werner_forms(dims: &[usize], grid: &[f64]) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new(2, "werner parametrizations agree");
    for &d in dims {
        for &phi in grid {
            let a = werner_state(d, phi)?;
            let b = werner_state_affine(d, phi)?;
            out.at_most("max_entry_deviation", a.matrix().max_abs_diff(&b), 1e-12);
        }
    }
    Ok(out)
}

/// The symmetric Werner dilation is a DSO for every Φ.
pub fn werner_dilation(dims: &[usize], grid: &[f64]) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new(3, "werner dilation is a symmetric DSO");
    for &d in dims {
        for &phi in grid {
            let rho = werner_state(d, phi)?;
            let t = werner_dso(d, phi)?;
            out.at_least("min_eigenvalue", t.min_eigenvalue(), -1e-12);
            out.at_most("trace_error", (t.matrix().trace().re - 1.0).abs(), 1e-12);
            let check = verify_source_operator(&t, &rho)?;
            out.at_most("marginal_residual", check.max_residual(), 1e-10);
        }
    }
    Ok(out)
}

/// The three-qubit operator: correct marginals for all Φ, spectrum
/// `{Φ/4 ×4, (1−Φ)/4 ×4}`, positive exactly for `Φ ≥ 0`.
pub fn qubit_boundary(grid: &[f64]) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new(4, "qubit source-operator boundary");
    let mut phis = grid.to_vec();
    phis.extend([-0.01, 0.0, 0.01]);
    for &phi in &phis {
        let rho = werner_state(2, phi)?;
        let t = qubit_werner_operator(phi)?;
        out.at_most(
            "marginal_residual",
            verify_source_operator(&t, &rho)?.max_residual(),
            1e-10,
        );
        let ev = t.matrix().eigenvalues()?;
        let mut expected = [phi / 4.0; 8];
        expected[4..].fill((1.0 - phi) / 4.0);
        expected.sort_by(f64::total_cmp);
        let err = ev.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        out.at_most("spectrum_error", err, 1e-10);
    }
    for phi in [-0.01, 0.0, 0.01] {
        let min = qubit_werner_operator(phi)?.min_eigenvalue();
        out.require("psd_iff_phi_nonnegative", (min >= -1e-12) == (phi >= 0.0));
    }
    Ok(out)
}

fn random_separable(d: usize, terms: usize, rng: &mut SeededRng) -> Result<SeparableMixture> {
    let weights = random_weights(terms, rng);
    let pairs = (0..terms)
        .map(|_| (random_density(&[d], rng), random_density(&[d], rng)))
        .collect();
    SeparableMixture::new(weights, pairs)
}

fn random_diagonal(d: usize, terms: usize, rng: &mut SeededRng) -> Result<DiagonalMixture> {
    let weights = random_weights(terms, rng);
    let locals = (0..terms).map(|_| random_density(&[d], rng)).collect();
    DiagonalMixture::new(weights, locals)
}

/// CHSH ≤ 2 on states with a verified DSO witness.
pub fn chsh_bound(cfg: &SuiteConfig) -> Result<CheckOutcome> {
    cfg.validate()?;
    let mut out = CheckOutcome::new(5, "CHSH bound for DSO states");
    let mut states = Vec::new();
    for &phi in &cfg.phi_grid() {
        let rho = werner_state(cfg.d, phi)?;
        let cert = certify(&werner_dso(cfg.d, phi)?, &rho)?;
        states.push((rho, cert.is_dso()));
    }
    let mut rng = cfg.rng(5, 0);
    let mix = random_separable(cfg.d, 3, &mut rng)?;
    let prod = random_separable(cfg.d, 1, &mut rng)?;
    for m in [mix, prod] {
        let rho = separable_mixture_state(&m)?;
        let cert = certify(&separable_dso(&m, Direction::Right)?, &rho)?;
        states.push((rho, cert.is_dso()));
    }
    for (k, (rho, witnessed)) in states.iter().enumerate() {
        out.require("dso_witness_verified", *witnessed);
        let r = chsh_max(rho, cfg.chsh_restarts, cfg.sub_seed(5, k as u64 + 1));
        out.at_most("max_chsh", r.functional_value, 2.0 + 1e-8);
    }
    Ok(out)
}

fn bell_class_states(cfg: &SuiteConfig) -> Result<Vec<BipartiteState>> {
    let mut rng = cfg.rng(6, 0);
    let mix = random_diagonal(cfg.d, 3, &mut rng)?;
    let rho_mix = mix.state()?;
    if !certify(&bellclass_dso_from_diagonal_mixture(&mix)?, &rho_mix)?.is_dso() {
        return Err(Error::Precondition("diagonal mixture dilation failed to verify".into()));
    }
    Ok(vec![
        werner_state(cfg.d, -1.0)?,
        werner_state(cfg.d, 0.5)?,
        werner_state(cfg.d + 1, -1.0)?,
        rho_mix,
    ])
}

/// Perfect-correlation inequality on Bell-class states: searched maximum
/// violation and random triples.
pub fn perfect_correlation_bound(cfg: &SuiteConfig) -> Result<CheckOutcome> {
    cfg.validate()?;
    let mut out = CheckOutcome::new(6, "perfect-correlation Bell inequality for Bell-class states");
    for (k, rho) in bell_class_states(cfg)?.iter().enumerate() {
        for (v, variant) in [Variant::First, Variant::Second].into_iter().enumerate() {
            let seed = cfg.sub_seed(6, 1 + 2 * k as u64 + v as u64);
            let r = bell_max_violation(rho, cfg.bell_restarts, seed, variant);
            out.at_most("max_violation", r.functional_value, 1e-8);
        }
        let mut rng = cfg.rng(6, 100 + k as u64);
        let mut worst = f64::NEG_INFINITY;
        for i in 0..cfg.random_triples {
            let dichotomic = i % 2 == 0;
            let (s, a, b) = (
                Observable::random(rho.d(), &mut rng, dichotomic),
                Observable::random(rho.d(), &mut rng, dichotomic),
                Observable::random(rho.d(), &mut rng, dichotomic),
            );
            let variant = if i % 4 < 2 { Variant::First } else { Variant::Second };
            let (lhs, rhs) = bell_lhs_rhs(rho, &s, &a, &b, variant)?;
            worst = worst.max(lhs - rhs);
        }
        if cfg.random_triples > 0 {
            out.at_most("random_triple_excess", worst, 1e-10);
        }
    }
    Ok(out)
}

/// Trace-norm bounds for PSD separable dilations and for the non-positive
/// qubit operator at Φ = −1/2.
pub fn source_bounds(cfg: &SuiteConfig) -> Result<CheckOutcome> {
    cfg.validate()?;
    let mut out = CheckOutcome::new(7, "source-operator bounds on product averages");
    let mut rng = cfg.rng(7, 0);
    let m = random_separable(cfg.d, 3, &mut rng)?;
    let rho_sep = separable_mixture_state(&m)?;
    let cases = [
        (rho_sep.clone(), separable_dso(&m, Direction::Right)?),
        (rho_sep, separable_dso(&m, Direction::Left)?),
        (werner_state(2, -0.5)?, qubit_werner_operator(-0.5)?),
    ];
    for (rho, t) in &cases {
        let bounds = SourceBounds::new(rho, t)?;
        let mut violations = 0.0;
        for _ in 0..cfg.random_quads {
            let dichotomic = rng.random_bool(0.5);
            let q = ObservableQuad::random(rho.d(), &mut rng, dichotomic);
            if !bounds.check(&q)?.holds() {
                violations += 1.0;
            }
        }
        out.at_most("violations", violations, 0.0);
    }
    Ok(out)
}

/// Dykstra feasibility on the singlet, a product state and the
/// antisymmetric Werner state.
pub fn feasibility_cases(cfg: &SuiteConfig) -> Result<CheckOutcome> {
    cfg.validate()?;
    let mut out = CheckOutcome::new(8, "feasibility decisions");
    let search = WitnessSearch {
        restarts: cfg.chsh_restarts,
        seed: cfg.sub_seed(8, 0),
    };
    let r = solve_with(&FeasibilityProblem::new(singlet(), Direction::Right), search)?;
    out.require(
        "singlet_infeasible_witnessed",
        r.status == FeasibilityStatus::InfeasibleWitnessed,
    );
    out.at_least(
        "singlet_chsh_witness",
        r.chsh_witness.map_or(f64::NEG_INFINITY, |w| w.value),
        2.8,
    );

    let mut rng = cfg.rng(8, 1);
    let product = product_state(&random_density(&[cfg.d], &mut rng), &random_density(&[cfg.d], &mut rng))?;
    for (key, rho, mode) in [
        ("product_feasible", product, Direction::Right),
        (
            "werner_antisymmetric_feasible",
            werner_state(cfg.d, -1.0)?,
            Direction::Symmetric,
        ),
    ] {
        let r = solve_with(&FeasibilityProblem::new(rho.clone(), mode), search)?;
        let verified = match &r.witness {
            Some(t) => verify_source_operator(t, &rho)?.ok,
            None => false,
        };
        out.require(key, r.status == FeasibilityStatus::Feasible && verified);
    }
    Ok(out)
}

/// A Bell-class state without perfect correlations: gap ≥ 1/2 for a random
/// dichotomic observable while the inequality still holds.
pub fn correlation_gap(cfg: &SuiteConfig) -> Result<CheckOutcome> {
    cfg.validate()?;
    let mut out = CheckOutcome::new(9, "Bell-class state without perfect correlations");
    let rho = werner_state(cfg.d, -1.0)?;
    let mut rng = cfg.rng(9, 0);
    let w = Observable::random(cfg.d, &mut rng, true);
    out.at_least("gap", perfect_correlation_gap(&rho, &w)?, 0.5);
    for (v, variant) in [Variant::First, Variant::Second].into_iter().enumerate() {
        let r = bell_max_violation(&rho, cfg.bell_restarts, cfg.sub_seed(9, 1 + v as u64), variant);
        out.at_most("max_violation", r.functional_value, 1e-8);
    }
    Ok(out)
}

/// POVM statistics: operator form, sampling accuracy and the inequalities
/// with matched generalized measurements.
pub fn povm_checks(cfg: &SuiteConfig) -> Result<CheckOutcome> {
    cfg.validate()?;
    let mut out = CheckOutcome::new(10, "inequalities under POVMs");
    let d = cfg.d;
    let mut rng = cfg.rng(10, 0);
    for _ in 0..100 {
        let rho = BipartiteState::new(random_density(&[d, d], &mut rng))?;
        let ka = rng.random_range(2..=4);
        let kb = rng.random_range(2..=4);
        let s = JointSetting::new(PovMeasure::random(d, ka, &mut rng), PovMeasure::random(d, kb, &mut rng))?;
        let direct = product_expectation(&rho, &s)?;
        let operator = rho.expectation(
            induced_observable(&s.alice).matrix(),
            induced_observable(&s.bob).matrix(),
        );
        out.at_most("operator_form_error", (direct - operator).abs(), 1e-12);
    }

    let mut inside = 0usize;
    for t in 0..cfg.sampling_trials {
        let rho = BipartiteState::new(random_density(&[d, d], &mut rng))?;
        let s = JointSetting::new(PovMeasure::random(d, 3, &mut rng), PovMeasure::random(d, 3, &mut rng))?;
        let exact = product_expectation(&rho, &s)?;
        let sd = (product_variance(&rho, &s)? / cfg.samples as f64).sqrt();
        let sample = sample_outcomes(&rho, &s, cfg.samples, cfg.sub_seed(10, 1 + t as u64))?;
        if (sample.empirical_expectation - exact).abs() <= 3.0 * sd {
            inside += 1;
        }
    }
    if cfg.sampling_trials > 0 {
        out.at_least(
            "fraction_within_3_sigma",
            inside as f64 / cfg.sampling_trials as f64,
            0.95,
        );
    }

    let states = bell_class_states(cfg)?;
    let mut bell_excess = f64::NEG_INFINITY;
    let mut chsh_abs = 0.0f64;
    for i in 0..cfg.povm_trials {
        let rho = &states[i % states.len()];
        let dd = rho.d();
        let k = rng.random_range(2..=4);
        let a = PovMeasure::random(dd, k, &mut rng);
        let b1 = PovMeasure::random(dd, k, &mut rng);
        // A different measurement with the same induced observable.
        let b1_twin = PovMeasure::binary(&induced_observable(&b1))?;
        let b2 = PovMeasure::random(dd, k, &mut rng);
        let (alice_b1, bob_b1) = if i % 2 == 0 { (&b1, &b1_twin) } else { (&b1_twin, &b1) };
        let r = bell_povm_check(rho, &a, alice_b1, bob_b1, &b2)?;
        bell_excess = bell_excess.max(r.lhs - r.rhs);
        let a2 = PovMeasure::random(dd, k, &mut rng);
        let c = chsh_povm_check(rho, [&a, &a2], [&b1, &b2])?;
        chsh_abs = chsh_abs.max(c.value.abs());
    }
    if cfg.povm_trials > 0 {
        out.at_most("bell_povm_excess", bell_excess, 1e-10);
        out.at_most("chsh_povm_abs", chsh_abs, 2.0 + 1e-10);
    }
    Ok(out)
}

/// Runs all checks in order.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<CheckOutcome>> {
    cfg.validate()?;
    let all_dims = [2, 3, 4, 5, 6];
    let mut dilation_dims = vec![3, 4, 5];
    if !dilation_dims.contains(&cfg.d) {
        dilation_dims.push(cfg.d);
    }
    let grid = cfg.phi_grid();
    Ok(vec![
        projector_algebra(&all_dims)?,
        werner_forms(&all_dims, &grid)?,
        werner_dilation(&dilation_dims, &grid)?,
        qubit_boundary(&grid)?,
        chsh_bound(cfg)?,
        perfect_correlation_bound(cfg)?,
        source_bounds(cfg)?,
        feasibility_cases(cfg)?,
        correlation_gap(cfg)?,
        povm_checks(cfg)?,
    ])
}
