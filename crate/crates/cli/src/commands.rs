use std::path::Path;

use anyhow::{bail, Context, Result};
use dso_core::bell::{bell_max_violation, chsh_max, BellReport};
use dso_core::catalog::{load_json, StateSpec};
use dso_core::feasibility::{solve_with, FeasibilityProblem, WitnessSearch, DEFAULT_TOL};
use dso_core::measurement::{
    joint_table, product_expectation, product_variance, sample_outcomes, JointSetting, PovMeasure,
};
use dso_core::source_ops::{
    certify_with, qubit_werner_operator, verify_source_operator_with, werner_dso, SourceOperator, MARG_TOL,
};
use dso_core::states::{is_separable_werner, werner_state, PSD_TOL};
use dso_core::theorems::{run_suite, SuiteConfig};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Command, WernerParams};
use crate::report::Outcome;

const CHSH_BOUND: f64 = 2.0;
const VIOLATION_TOL: f64 = 1e-8;

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
}

fn resolve(spec: &StateSpec) -> Result<dso_core::states::BipartiteState> {
    spec.resolve().with_context(|| format!("cannot build state '{spec}'"))
}

fn check_tol(tol: Option<f64>, default: f64) -> Result<f64> {
    let t = tol.unwrap_or(default);
    if !(t > 0.0 && t.is_finite()) {
        bail!("--tol must be a positive number, got {t}");
    }
    Ok(t)
}

fn bell_results(r: &BellReport, violated: bool) -> Value {
    let mut v = serde_json::to_value(r).expect("report serializes");
    v["violation_found"] = json!(violated);
    v
}

pub fn run(command: &Command, seed: u64, tol: Option<f64>) -> Result<Outcome> {
    match command {
        Command::Werner(WernerParams { d, phi, out }) => {
            let rho = werner_state(*d, *phi)?;
            let inputs = json!({ "d": d, "phi": phi, "out": out });
            let mut results = json!({
                "d": d,
                "phi": phi,
                "trace": rho.matrix().trace().re,
                "min_eigenvalue": rho.matrix().min_eigenvalue()?,
                "separable": is_separable_werner(*d, *phi),
            });
            match out {
                Some(path) => write_json(path, rho.matrix())?,
                None => results["matrix"] = serde_json::to_value(rho.matrix())?,
            }
            Ok(Outcome::new(inputs, results))
        }

        Command::Dso(WernerParams { d, phi, out }) => {
            let psd_tol = check_tol(tol, PSD_TOL)?;
            let (kind, t) = match d {
                0 | 1 => bail!("d must be at least 2, got {d}"),
                2 => ("qubit_operator", qubit_werner_operator(*phi)?),
                _ => ("symmetric_dilation", werner_dso(*d, *phi)?),
            };
            let rho = werner_state(*d, *phi)?;
            let cert = certify_with(&t, &rho, psd_tol, MARG_TOL)?;
            if let Some(path) = out {
                write_json(path, &t)?;
            }
            let results = json!({
                "kind": kind,
                "direction": t.direction(),
                "min_eigenvalue": cert.min_eigenvalue,
                "trace_norm": t.trace_norm(),
                "marginal_residuals": cert.marginal_residuals,
                "is_dso": cert.is_dso(),
            });
            Ok(Outcome::new(json!({ "d": d, "phi": phi, "out": out }), results)
                .tol("psd", psd_tol)
                .tol("marginal", MARG_TOL))
        }

        Command::VerifySource {
            state,
            source,
            direction,
        } => {
            let marg_tol = check_tol(tol, MARG_TOL)?;
            let rho = resolve(state)?;
            let mut t: SourceOperator = load_json(source)?;
            if let Some(dir) = direction {
                t = t.with_direction(*dir);
            }
            let check = verify_source_operator_with(&t, &rho, marg_tol)?;
            let cert = certify_with(&t, &rho, PSD_TOL, marg_tol)?;
            let results = json!({
                "direction": t.direction(),
                "ok": check.ok,
                "residuals": check.residuals,
                "min_eigenvalue": cert.min_eigenvalue,
                "trace_norm": t.trace_norm(),
                "is_dso": cert.is_dso(),
            });
            let inputs = json!({
                "state": state.to_string(),
                "source": source,
                "direction": direction,
            });
            Ok(Outcome::new(inputs, results)
                .tol("marginal", marg_tol)
                .tol("psd", PSD_TOL))
        }

        Command::Feasibility {
            state,
            mode,
            max_iter,
            restarts,
            witness_out,
        } => {
            let t = check_tol(tol, DEFAULT_TOL)?;
            if *restarts == 0 {
                bail!("--restarts must be at least 1");
            }
            let rho = resolve(state)?;
            let p = FeasibilityProblem::new(rho.clone(), *mode)
                .with_tol(t)
                .with_max_iter(*max_iter);
            let r = solve_with(
                &p,
                WitnessSearch {
                    restarts: *restarts,
                    seed,
                },
            )?;
            let certificate = match &r.witness {
                Some(w) => {
                    if let Some(path) = witness_out {
                        write_json(path, w)?;
                    }
                    let c = certify_with(w, &rho, t, MARG_TOL)?;
                    json!({
                        "min_eigenvalue": c.min_eigenvalue,
                        "marginal_residuals": c.marginal_residuals,
                    })
                }
                None => Value::Null,
            };
            let lines = r
                .chsh_witness
                .iter()
                .map(|w| format!("chsh_witness_value: {}", w.value))
                .collect();
            let results = json!({
                "status": r.status,
                "iterations": r.iterations,
                "final_residual": r.residual_history.last(),
                "residual_history": r.residual_history,
                "witness": certificate,
                "chsh_witness": r.chsh_witness,
            });
            let inputs = json!({
                "state": state.to_string(),
                "mode": mode,
                "max_iter": max_iter,
                "restarts": restarts,
                "witness_out": witness_out,
            });
            let mut out = Outcome::new(inputs, results)
                .tol("residual", t)
                .tol("marginal", MARG_TOL);
            out.lines = lines;
            Ok(out)
        }

        Command::ChshMax { state, restarts } => {
            let slack = check_tol(tol, VIOLATION_TOL)?;
            if *restarts == 0 {
                bail!("--restarts must be at least 1");
            }
            let rho = resolve(state)?;
            let r = chsh_max(&rho, *restarts, seed);
            let violated = r.functional_value > CHSH_BOUND + slack;
            let inputs = json!({ "state": state.to_string(), "restarts": restarts });
            Ok(Outcome::new(inputs, bell_results(&r, violated)).tol("violation_slack", slack))
        }

        Command::BellCheck {
            state,
            variant,
            restarts,
        } => {
            let slack = check_tol(tol, VIOLATION_TOL)?;
            if *restarts == 0 {
                bail!("--restarts must be at least 1");
            }
            let rho = resolve(state)?;
            let r = bell_max_violation(&rho, *restarts, seed, *variant);
            let violated = r.functional_value > slack;
            let inputs = json!({
                "state": state.to_string(),
                "variant": variant,
                "restarts": restarts,
            });
            Ok(Outcome::new(inputs, bell_results(&r, violated)).tol("violation_slack", slack))
        }

        Command::Simulate { state, alice, bob, n } => {
            let rho = resolve(state)?;
            let a: PovMeasure = load_json(alice)?;
            let b: PovMeasure = load_json(bob)?;
            let setting = JointSetting::new(a, b)?;
            let exact = product_expectation(&rho, &setting)?;
            let sd = (product_variance(&rho, &setting)? / *n as f64).sqrt();
            let sample = sample_outcomes(&rho, &setting, *n, seed)?;
            let z = if sd > 0.0 {
                (sample.empirical_expectation - exact) / sd
            } else {
                0.0
            };
            let results = json!({
                "probabilities": joint_table(&rho, &setting)?,
                "counts": sample.counts,
                "exact_expectation": exact,
                "empirical_expectation": sample.empirical_expectation,
                "standard_error": sd,
                "z_score": z,
            });
            let inputs = json!({
                "state": state.to_string(),
                "alice": alice,
                "bob": bob,
                "n": n,
            });
            Ok(Outcome::new(inputs, results))
        }

        Command::VerifyTheorems {
            d,
            grid,
            restarts,
            bell_restarts,
            triples,
            quads,
            povm_trials,
            sampling_trials,
            samples,
        } => {
            let cfg = SuiteConfig {
                d: *d,
                grid: *grid,
                chsh_restarts: *restarts,
                bell_restarts: *bell_restarts,
                random_triples: *triples,
                random_quads: *quads,
                povm_trials: *povm_trials,
                sampling_trials: *sampling_trials,
                samples: *samples,
                seed,
            };
            let checks = run_suite(&cfg)?;
            let all_passed = checks.iter().all(|c| c.passed);
            let lines = checks
                .iter()
                .map(|c| format!("{} [{:>2}] {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.name))
                .collect();
            let mut out = Outcome::new(
                serde_json::to_value(&cfg)?,
                json!({ "checks": checks, "all_passed": all_passed }),
            )
            .tol("psd", 1e-12)
            .tol("marginal", 1e-10)
            .tol("chsh_slack", 1e-8)
            .tol("bell_violation", 1e-8)
            .tol("random_triples", 1e-10)
            .tol("povm", 1e-10);
            out.failed = !all_passed;
            out.lines = lines;
            Ok(out)
        }
    }
}
