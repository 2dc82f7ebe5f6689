//! `arqe optimize`: search for the knot set minimizing the configured cost.

use anyhow::Result;

use arqe_core::optimizer::{optimize, CostSpec};
use arqe_core::seeds::derive_seed;

use super::{SALT_OPTIMIZE_COST, SALT_OPTIMIZE_SEARCH};
use crate::config::Experiment;
use crate::output::OutputDir;

pub fn run(experiment: &Experiment, out: &OutputDir) -> Result<()> {
    let master = experiment.config.run.seed;
    let config_json = experiment.resolved_json();
    let criterion = experiment.config.run.criterion.cost_criterion();

    let template = experiment.run_config(experiment.targets[0])?;
    let spec = CostSpec::new(
        criterion,
        experiment.config.run.budget_iterations,
        experiment.optimizer_repetitions,
        template,
        derive_seed(master, SALT_OPTIMIZE_COST),
    )?;
    let n_knots = experiment.config.optimize.n_knots.unwrap_or(experiment.n_knots);
    let result = optimize(
        &spec,
        n_knots,
        experiment.config.optimize.evaluations,
        derive_seed(master, SALT_OPTIMIZE_SEARCH),
    )?;

    out.write_json("optimize_knots.json", &result.best_knots)?;
    out.write_csv(
        "optimize_history.csv",
        &config_json,
        result.seed,
        "evaluation,cost",
        result
            .history
            .iter()
            .enumerate()
            .map(|(k, cost)| format!("{k},{cost}")),
    )?;
    let document = serde_json::json!({
        "config": serde_json::from_str::<serde_json::Value>(&config_json)?,
        "master_seed": master,
        "criterion": criterion,
        "evaluations": result.evaluations,
        "baseline_cost": result.history.first(),
        "best_cost": result.best_cost,
        "best_knots": result.best_knots,
    });
    out.write_json("optimize_result.json", &document)?;

    println!(
        "optimized {n_knots}-knot set in {} evaluations: cost {} (baseline {})",
        result.evaluations,
        result.best_cost,
        result.history.first().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}
