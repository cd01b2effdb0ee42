//! Subcommand implementations: each validates the configuration, runs its
//! pipeline stage, and persists CSV/SVG/JSON artifacts plus a checksummed
//! manifest.

use std::path::Path;

use serde_json::json;

use seirpinn::csvfmt;
use seirpinn::gpbo::BoResult;
use seirpinn::observability::{
    singular_string, buchberger, build_seir_ideal, check_observable, e_recovery_polynomial,
    normal_form, s_recovery_polynomial, vanishes_on_consistent_samples, Observability,
    DEFAULT_SPAIR_BUDGET,
};
use seirpinn::pinn::{PinnModel, TrainRecord};
use seirpinn::pipeline::{
    self, prepare_data, rmse_vs_truth, train_baseline_at, train_proposed_at, PreparedData,
};
use seirpinn::recon::{reconstruct, ReconConfig};
use seirpinn::seir::Trajectory;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest::RunWriter;
use crate::svg::{LineChart, Series};

const COLORS: [&str; 4] = ["#1f77b4", "#ff7f0e", "#d62728", "#2ca02c"];
const NAMES: [&str; 4] = ["S", "E", "I", "R"];

pub struct Ctx {
    pub quiet: bool,
}

impl Ctx {
    fn log(&self, msg: &str) {
        if !self.quiet {
            println!("{msg}");
        }
    }
}

fn checkpoint_json(cfg: &RunConfig, model: &PinnModel) -> Result<String, CliError> {
    crate::checkpoint::Checkpoint::new(cfg, model).to_json()
}

fn trajectory_chart(title: &str, traj: &Trajectory, model: &PinnModel) -> LineChart {
    let mut series = Vec::new();
    let n = 201;
    let t_end = traj.t_end();
    for k in 0..4 {
        let mut truth = Vec::with_capacity(n);
        let mut pred = Vec::with_capacity(n);
        for j in 0..n {
            let t = j as f64 * t_end / (n - 1) as f64;
            let st = traj.eval_at(t).expect("grid point inside domain");
            let vals = [st.s, st.e, st.i, st.r];
            truth.push((t, vals[k]));
            pred.push((t, model.predict(t).0[k]));
        }
        series.push(Series::line(&format!("{} (truth)", NAMES[k]), COLORS[k], truth));
        series.push(Series::dashed(&format!("{} (pinn)", NAMES[k]), COLORS[k], pred));
    }
    LineChart {
        title: title.into(),
        x_label: "t".into(),
        y_label: "population ratio".into(),
        series,
        log_y: false,
    }
}

fn bo_chart(title: &str, bo: &BoResult) -> LineChart {
    let evals: Vec<(f64, f64)> =
        bo.evaluations.iter().map(|e| ((e.iteration + 1) as f64, e.objective)).collect();
    let best: Vec<(f64, f64)> = bo
        .best_trace()
        .iter()
        .enumerate()
        .map(|(i, &v)| ((i + 1) as f64, v))
        .collect();
    LineChart {
        title: title.into(),
        x_label: "iteration".into(),
        y_label: "objective (min test error)".into(),
        series: vec![
            Series::scatter("evaluations", "#1f77b4", evals),
            Series::line("running minimum", "#d62728", best),
        ],
        log_y: true,
    }
}

fn write_training_outputs(
    w: &mut RunWriter,
    cfg: &RunConfig,
    model: &PinnModel,
    record: &TrainRecord,
    traj: &Trajectory,
    fig_name: &str,
    fig_title: &str,
) -> Result<[f64; 4], CliError> {
    w.write_file("train_record.csv", &csvfmt::train_record_csv(record))?;
    w.write_file("checkpoint.json", &checkpoint_json(cfg, model)?)?;
    w.write_file(fig_name, &trajectory_chart(fig_title, traj, model).render())?;
    let rmse = rmse_vs_truth(model, traj, 201).map_err(CliError::from)?;
    Ok(rmse)
}

pub fn cmd_simulate(cfg: &RunConfig, out: &Path, ctx: &Ctx) -> Result<(), CliError> {
    let exp = cfg.experiment()?;
    let mut w = RunWriter::new(out, "simulate", cfg)?;
    w.start_stage("simulate");
    let traj = seirpinn::seir::simulate(&exp.params_true, &exp.init, exp.t_end, exp.dt)?;
    w.start_stage("emit");
    w.write_file("trajectory.csv", &csvfmt::trajectory_csv(&traj))?;
    let max_drift = traj
        .states()
        .iter()
        .map(|s| (s.sum() - 1.0).abs())
        .fold(0.0f64, f64::max);
    w.set_results(json!({
        "rows": traj.len(),
        "max_conservation_drift": max_drift,
        "max_embedded_error": traj.max_embedded_err(),
    }));
    w.finalize()?;
    ctx.log(&format!("simulated {} grid points (conservation drift {max_drift:.2e})", 1001));
    Ok(())
}

fn emit_observations(
    w: &mut RunWriter,
    data: &PreparedData,
    pseudo_eps: Option<f64>,
    cfg: &RunConfig,
) -> Result<(), CliError> {
    match pseudo_eps {
        Some(eps) => {
            let rc = ReconConfig::new(eps, cfg.beta, cfg.gamma);
            let train = reconstruct(&data.obs_train, &rc)?;
            let test = reconstruct(&data.obs_test, &rc)?;
            w.write_file("observations_train.csv", &csvfmt::observations_csv(&train))?;
            w.write_file("observations_test.csv", &csvfmt::observations_csv(&test))?;
        }
        None => {
            w.write_file("observations_train.csv", &csvfmt::observations_csv(&data.obs_train))?;
            w.write_file("observations_test.csv", &csvfmt::observations_csv(&data.obs_test))?;
        }
    }
    Ok(())
}

/// One forward-mode training run at the configured candidate onset rate.
pub fn cmd_train_forward(cfg: &RunConfig, out: &Path, ctx: &Ctx) -> Result<(), CliError> {
    let exp = cfg.experiment()?;
    let mut w = RunWriter::new(out, "train-forward", cfg)?;
    w.start_stage("prepare");
    let data = prepare_data(&exp).map_err(CliError::from)?;
    emit_observations(&mut w, &data, Some(cfg.epsilon_candidate), cfg)?;
    w.start_stage("train");
    let (model, record) = train_proposed_at(&data, &exp, cfg.epsilon_candidate).map_err(CliError::from)?;
    w.start_stage("emit");
    let rmse = write_training_outputs(
        &mut w,
        cfg,
        &model,
        &record,
        &data.traj,
        "fig_trajectories.svg",
        "Ground truth vs forward-mode prediction",
    )?;
    w.set_results(json!({
        "epsilon_candidate": cfg.epsilon_candidate,
        "final_train_loss": record.train_loss.last(),
        "min_test_error": record.min_test_error(),
        "min_test_epoch": record.min_test_epoch.map(|e| e + 1),
        "rmse": {"S": rmse[0], "E": rmse[1], "I": rmse[2], "R": rmse[3]},
    }));
    w.finalize()?;
    ctx.log(&format!(
        "trained {} epochs at eps = {} (final loss {:.3e})",
        cfg.epochs,
        cfg.epsilon_candidate,
        record.train_loss.last().copied().unwrap_or(f64::NAN)
    ));
    Ok(())
}

/// One inverse-mode training run from the configured initial onset rate.
pub fn cmd_train_inverse(cfg: &RunConfig, out: &Path, ctx: &Ctx) -> Result<(), CliError> {
    let exp = cfg.experiment()?;
    let mut w = RunWriter::new(out, "train-inverse", cfg)?;
    w.start_stage("prepare");
    let data = prepare_data(&exp).map_err(CliError::from)?;
    emit_observations(&mut w, &data, None, cfg)?;
    w.start_stage("train");
    let (model, record) = train_baseline_at(&data, &exp, cfg.epsilon_init).map_err(CliError::from)?;
    w.start_stage("emit");
    let rmse = write_training_outputs(
        &mut w,
        cfg,
        &model,
        &record,
        &data.traj,
        "fig_trajectories.svg",
        "Ground truth vs inverse-mode prediction",
    )?;
    w.set_results(json!({
        "epsilon_init": cfg.epsilon_init,
        "epsilon_final": model.epsilon(),
        "epsilon_at_min_test": record.epsilon_at_min_test(),
        "epsilon_at_min_train": record.epsilon_at_min_train(),
        "min_test_epoch": record.min_test_epoch.map(|e| e + 1),
        "min_train_epoch": record.min_train_epoch.map(|e| e + 1),
        "rmse": {"S": rmse[0], "E": rmse[1], "I": rmse[2], "R": rmse[3]},
    }));
    w.finalize()?;
    ctx.log(&format!(
        "inverse training done: eps {} -> {:.4}",
        cfg.epsilon_init,
        model.epsilon().unwrap_or(f64::NAN)
    ));
    Ok(())
}

/// Full proposed pipeline: BO over the onset rate, then a final run at the
/// estimate.
pub fn cmd_bo_proposed(cfg: &RunConfig, out: &Path, ctx: &Ctx) -> Result<(), CliError> {
    let exp = cfg.experiment()?;
    let mut w = RunWriter::new(out, "bo-proposed", cfg)?;
    w.start_stage("prepare");
    let data = prepare_data(&exp).map_err(CliError::from)?;
    w.start_stage("bayesian-optimization");
    let mut evals = 0usize;
    let bo = seirpinn::gpbo::run_bo(
        |eps| {
            evals += 1;
            if !ctx.quiet {
                println!("  bo eval {evals}/{}: eps = {eps:.4}", exp.bo_iterations);
            }
            pipeline::proposed_objective(&data, &exp, eps).map_err(|e| e.to_string())
        },
        &exp.bo_options(),
    )
    .map_err(CliError::from)?;
    w.start_stage("final-training");
    let (model, record) = train_proposed_at(&data, &exp, bo.epsilon_hat).map_err(CliError::from)?;
    w.start_stage("emit");
    emit_observations(&mut w, &data, Some(bo.epsilon_hat), cfg)?;
    w.write_file("bo_trace.csv", &csvfmt::bo_trace_csv(&bo))?;
    w.write_file("fig_bo_trace.svg", &bo_chart("GP-BO objective (proposed)", &bo).render())?;
    let rmse = write_training_outputs(
        &mut w,
        cfg,
        &model,
        &record,
        &data.traj,
        "fig_trajectories_proposed.svg",
        "Ground truth vs proposed-method prediction",
    )?;
    let abs_err = (bo.epsilon_hat - cfg.true_epsilon).abs();
    w.set_results(json!({
        "epsilon_hat": bo.epsilon_hat,
        "abs_error": abs_err,
        "best_objective": bo.best_objective,
        "bo_evaluations": bo.evaluations.len(),
        "final_train_loss": record.train_loss.last(),
        "rmse": {"S": rmse[0], "E": rmse[1], "I": rmse[2], "R": rmse[3]},
    }));
    w.finalize()?;
    ctx.log(&format!(
        "proposed: eps_hat = {:.4} (|err| = {abs_err:.4}), objective {:.3e}",
        bo.epsilon_hat, bo.best_objective
    ));
    Ok(())
}

/// Baseline pipeline: BO selects the initial onset rate, one inverse run
/// reports the estimates at the minimum-test and minimum-train epochs.
pub fn cmd_bo_baseline(cfg: &RunConfig, out: &Path, ctx: &Ctx) -> Result<(), CliError> {
    let exp = cfg.experiment()?;
    let mut w = RunWriter::new(out, "bo-baseline", cfg)?;
    w.start_stage("prepare");
    let data = prepare_data(&exp).map_err(CliError::from)?;
    w.start_stage("bayesian-optimization");
    let mut evals = 0usize;
    let bo = seirpinn::gpbo::run_bo(
        |eps0| {
            evals += 1;
            if !ctx.quiet {
                println!("  bo eval {evals}/{}: eps0 = {eps0:.4}", exp.bo_iterations);
            }
            pipeline::baseline_objective(&data, &exp, eps0).map_err(|e| e.to_string())
        },
        &exp.bo_options(),
    )
    .map_err(CliError::from)?;
    w.start_stage("final-training");
    let (model, record) = train_baseline_at(&data, &exp, bo.epsilon_hat).map_err(CliError::from)?;
    w.start_stage("emit");
    emit_observations(&mut w, &data, None, cfg)?;
    w.write_file("bo_trace.csv", &csvfmt::bo_trace_csv(&bo))?;
    w.write_file("fig_bo_trace.svg", &bo_chart("GP-BO objective (baseline)", &bo).render())?;

    // Comparison figures at the two reported epochs, from the snapshots.
    let mut at_min_test = model.clone();
    at_min_test.set_params(record.min_test_params().expect("non-empty record"));
    let mut at_min_train = model.clone();
    at_min_train.set_params(record.min_train_params().expect("non-empty record"));
    w.write_file(
        "fig_trajectories_baseline_min_test.svg",
        &trajectory_chart("Baseline prediction at the min-test epoch", &data.traj, &at_min_test)
            .render(),
    )?;
    w.write_file(
        "fig_trajectories_baseline_min_train.svg",
        &trajectory_chart("Baseline prediction at the min-train epoch", &data.traj, &at_min_train)
            .render(),
    )?;
    let rmse = write_training_outputs(
        &mut w,
        cfg,
        &model,
        &record,
        &data.traj,
        "fig_trajectories_baseline_final.svg",
        "Baseline prediction after the full run",
    )?;
    let eps0 = bo.epsilon_hat;
    let eps1 = record.epsilon_at_min_test().expect("non-empty record");
    let eps2 = record.epsilon_at_min_train().expect("non-empty record");
    w.set_results(json!({
        "epsilon_hat_0": eps0,
        "epsilon_hat_1": eps1,
        "epsilon_hat_2": eps2,
        "min_test_epoch": record.min_test_epoch.map(|e| e + 1),
        "min_train_epoch": record.min_train_epoch.map(|e| e + 1),
        "best_objective": bo.best_objective,
        "rmse_final": {"S": rmse[0], "E": rmse[1], "I": rmse[2], "R": rmse[3]},
    }));
    w.finalize()?;
    ctx.log(&format!(
        "baseline: eps0 = {eps0:.4}, eps1 = {eps1:.4} (min test), eps2 = {eps2:.4} (min train)"
    ));
    Ok(())
}

/// Symbolic verification: compute the reduced basis, print it, and check
/// the recovery polynomials by exact sampling.
pub fn cmd_observability(cfg: &RunConfig, out: &Path, _ctx: &Ctx) -> Result<(), CliError> {
    let mut w = RunWriter::new(out, "observability", cfg)?;
    w.start_stage("groebner");
    let ideal = build_seir_ideal();
    let basis = buchberger(&ideal, DEFAULT_SPAIR_BUDGET).map_err(CliError::from)?;

    let mut printed = String::new();
    for (k, p) in basis.iter().enumerate() {
        printed.push_str(&format!("[{}] {}\n", k + 1, singular_string(p)));
    }
    // The basis print is the command's primary output.
    print!("{printed}");

    w.start_stage("checks");
    let mut failures: Vec<String> = Vec::new();
    for g in &ideal.gens {
        if !normal_form(g, &basis).is_zero() {
            failures.push(format!("generator {} does not reduce to zero", singular_string(g)));
        }
    }
    let e_poly = match check_observable(seirpinn::observability::vars::E, &basis) {
        Observability::Recoverable(p) => {
            if p.monic() != e_recovery_polynomial().monic() {
                failures.push("E-recovery polynomial differs from e*E - d1Y - g*Y".into());
            }
            Some(p)
        }
        other => {
            failures.push(format!("E not recoverable: {other:?}"));
            None
        }
    };
    let s_poly = match check_observable(seirpinn::observability::vars::S, &basis) {
        Observability::Recoverable(p) => {
            if p.monic() != s_recovery_polynomial().monic() {
                failures.push("S-recovery polynomial differs from b*e*S*Y - d2Y - (e+g)*d1Y - e*g*Y".into());
            }
            Some(p)
        }
        other => {
            failures.push(format!("S not recoverable: {other:?}"));
            None
        }
    };
    for (name, poly) in [("E", &e_poly), ("S", &s_poly)] {
        if let Some(p) = poly {
            if !vanishes_on_consistent_samples(p, 100, 424242) {
                failures.push(format!("{name}-recovery polynomial fails the 100-sample check"));
            }
        }
    }

    w.start_stage("emit");
    w.write_file("basis.txt", &printed)?;
    w.set_results(json!({
        "basis_size": basis.len(),
        "e_recovery": e_poly.as_ref().map(|p| singular_string(p)),
        "s_recovery": s_poly.as_ref().map(|p| singular_string(p)),
        "vanishing_samples": 100,
        "failures": failures,
    }));
    w.finalize()?;
    if !failures.is_empty() {
        return Err(CliError::Numeric(format!(
            "observability checks failed: {}",
            failures.join("; ")
        )));
    }
    println!("E recovery: {}", singular_string(&e_poly.expect("present when checks pass")));
    println!("S recovery: {}", singular_string(&s_poly.expect("present when checks pass")));
    println!("100-sample vanishing check passed");
    Ok(())
}
