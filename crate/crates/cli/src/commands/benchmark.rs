//! `arqe benchmark`: a campaign over many environments with per-instance
//! optimization, reproducing the appendix-table layout and the
//! uniform-vs-optimized histogram panels.

use anyhow::{bail, Context, Result};
use rand::Rng;

use arqe_core::linalg::unitary_eigensystem;
use arqe_core::operators::environment_from_genes;
use arqe_core::optimizer::{campaign, CampaignInstance, CampaignSettings, CostCriterion, CostSpec};
use arqe_core::seeds::{derive_seed, stream_rng};
use arqe_core::stats::Histogram;
use arqe_core::KnotSet;

use super::{SALT_CAMPAIGN, SALT_GENES, SALT_UNIFORM_ARM};
use crate::config::{Experiment, OperatorSpec};
use crate::output::{join_cell, OutputDir};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Arm {
    Uniform,
    Optimized,
    Both,
}

pub fn run(experiment: &Experiment, out: &OutputDir, arm: Arm) -> Result<()> {
    let master = experiment.config.run.seed;
    let config_json = experiment.resolved_json();
    let criterion = experiment.config.run.criterion.cost_criterion();

    let instances = build_instances(experiment)?;
    if instances.is_empty() {
        bail!("benchmark needs at least one instance");
    }

    if arm == Arm::Uniform {
        return uniform_arm_only(experiment, out, &instances, criterion, &config_json);
    }

    let settings = CampaignSettings {
        criterion,
        budget_iterations: experiment.config.run.budget_iterations,
        repetitions: experiment.repetitions,
        optimizer_repetitions: experiment.optimizer_repetitions,
        n_knots: experiment.config.optimize.n_knots.unwrap_or(experiment.n_knots),
        evaluation_budget: experiment.config.optimize.evaluations,
        master_seed: derive_seed(master, SALT_CAMPAIGN),
    };
    let outcome = campaign(&instances, &settings)?;

    let rows = outcome.rows.iter().map(|row| {
        let (theta, phi, lambda) = match row.genes {
            Some(g) => (g[0].to_string(), g[1].to_string(), g[2].to_string()),
            None => (String::new(), String::new(), String::new()),
        };
        match arm {
            Arm::Optimized => format!(
                "{},{theta},{phi},{lambda},{},{},{},{},{}",
                row.index,
                join_cell(&row.x_opt),
                join_cell(&row.y_opt),
                row.iterations_optimized,
                row.fidelity_optimized,
                row.final_scale_optimized,
            ),
            _ => format!(
                "{},{theta},{phi},{lambda},{},{},{},{},{},{},{},{}",
                row.index,
                join_cell(&row.x_opt),
                join_cell(&row.y_opt),
                row.iterations_uniform,
                row.iterations_optimized,
                row.fidelity_uniform,
                row.fidelity_optimized,
                row.final_scale_uniform,
                row.final_scale_optimized,
            ),
        }
    });
    let header = match arm {
        Arm::Optimized => "instance,theta,phi,lambda,x_in,y_in,n_opt,f_opt,w_opt",
        _ => "instance,theta,phi,lambda,x_in,y_in,n,n_opt,f,f_opt,w,w_opt",
    };
    out.write_csv(
        "benchmark_rows.csv",
        &config_json,
        settings.master_seed,
        header,
        rows,
    )?;

    // histogram panels share pooled axes; speed campaigns bin the mean
    // iteration count, accuracy campaigns the mean fidelity
    let metric = |uniform: bool| -> Vec<f64> {
        outcome
            .rows
            .iter()
            .map(|row| match (criterion, uniform) {
                (CostCriterion::Speed, true) => row.iterations_uniform,
                (CostCriterion::Speed, false) => row.iterations_optimized,
                (_, true) => row.fidelity_uniform,
                (_, false) => row.fidelity_optimized,
            })
            .collect()
    };
    let (uniform_hist, optimized_hist) = Histogram::pooled(&metric(true), &metric(false), 20);
    let histogram_rows = (0..uniform_hist.counts.len()).map(|k| {
        format!(
            "{},{},{},{}",
            uniform_hist.edges[k],
            uniform_hist.edges[k + 1],
            uniform_hist.counts[k],
            optimized_hist.counts[k]
        )
    });
    out.write_csv(
        "benchmark_histograms.csv",
        &config_json,
        settings.master_seed,
        "bin_lo,bin_hi,uniform_count,optimized_count",
        histogram_rows,
    )?;

    let document = serde_json::json!({
        "config": serde_json::from_str::<serde_json::Value>(&config_json)?,
        "master_seed": settings.master_seed,
        "criterion": criterion,
        "instances": outcome.rows.len(),
        "aggregate": outcome.aggregate,
    });
    out.write_json("benchmark_summary.json", &document)?;

    println!(
        "campaign over {} instances: mean iterations {:.2} -> {:.2} ({:.1}% reduction), mean fidelity {:.5} -> {:.5}",
        outcome.rows.len(),
        outcome.aggregate.mean_iterations_uniform,
        outcome.aggregate.mean_iterations_optimized,
        outcome.aggregate.iteration_reduction_percent,
        outcome.aggregate.mean_fidelity_uniform,
        outcome.aggregate.mean_fidelity_optimized,
    );
    Ok(())
}

fn uniform_arm_only(
    experiment: &Experiment,
    out: &OutputDir,
    instances: &[CampaignInstance],
    criterion: CostCriterion,
    config_json: &str,
) -> Result<()> {
    let master = derive_seed(experiment.config.run.seed, SALT_UNIFORM_ARM);
    let n_knots = experiment.config.optimize.n_knots.unwrap_or(experiment.n_knots);
    let uniform = KnotSet::uniform(n_knots);
    let mut metrics = Vec::with_capacity(instances.len());
    let mut rows = Vec::with_capacity(instances.len());
    for (index, instance) in instances.iter().enumerate() {
        let spec = CostSpec::new(
            criterion,
            experiment.config.run.budget_iterations,
            experiment.repetitions,
            instance.template.clone(),
            derive_seed(master, index as u64),
        )?;
        let summary = spec.ensemble(&uniform)?;
        let (theta, phi, lambda) = match instance.genes {
            Some(g) => (g[0].to_string(), g[1].to_string(), g[2].to_string()),
            None => (String::new(), String::new(), String::new()),
        };
        metrics.push(match criterion {
            CostCriterion::Speed => summary.mean_iterations,
            _ => summary.mean_fidelity,
        });
        rows.push(format!(
            "{index},{theta},{phi},{lambda},{},{},{}",
            summary.mean_iterations, summary.mean_fidelity, summary.mean_final_scale
        ));
    }
    out.write_csv(
        "benchmark_rows.csv",
        config_json,
        master,
        "instance,theta,phi,lambda,n,f,w",
        rows,
    )?;
    let histogram = Histogram::from_values(&metrics, 20);
    let histogram_rows = (0..histogram.counts.len()).map(|k| {
        format!(
            "{},{},{}",
            histogram.edges[k],
            histogram.edges[k + 1],
            histogram.counts[k]
        )
    });
    out.write_csv(
        "benchmark_histograms.csv",
        config_json,
        master,
        "bin_lo,bin_hi,uniform_count",
        histogram_rows,
    )?;
    println!("uniform arm over {} instances", instances.len());
    Ok(())
}

fn build_instances(experiment: &Experiment) -> Result<Vec<CampaignInstance>> {
    match &experiment.config.operator {
        OperatorSpec::Genes { .. } => {
            let triplets = match &experiment.config.benchmark.genes_file {
                Some(path) => read_genes_file(path, experiment.config.benchmark.instances)?,
                None => sample_genes(experiment),
            };
            triplets
                .into_iter()
                .map(|g| {
                    let environment = environment_from_genes(g[0], g[1], g[2]);
                    let reference = unitary_eigensystem(&environment)?;
                    let mut template = experiment.run_config(experiment.targets[0])?;
                    template.environment = environment;
                    template.reference = reference;
                    Ok(CampaignInstance {
                        genes: Some(g),
                        template,
                    })
                })
                .collect::<Result<_>>()
        }
        // fixed operators benchmark as a single-instance campaign
        _ => Ok(vec![CampaignInstance {
            genes: None,
            template: experiment.run_config(experiment.targets[0])?,
        }]),
    }
}

fn sample_genes(experiment: &Experiment) -> Vec<[f64; 3]> {
    let [lo, hi] = experiment.config.benchmark.theta_range;
    let mut rng = stream_rng(derive_seed(experiment.config.run.seed, SALT_GENES), 0);
    (0..experiment.config.benchmark.instances)
        .map(|_| {
            [
                lo + (hi - lo) * rng.random::<f64>(),
                std::f64::consts::TAU * rng.random::<f64>(),
                std::f64::consts::TAU * rng.random::<f64>(),
            ]
        })
        .collect()
}

fn read_genes_file(path: &str, limit: usize) -> Result<Vec<[f64; 3]>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read genes file {path}"))?;
    let mut triplets = Vec::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("theta") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            bail!("genes file {path}: line {} needs theta,phi,lambda", number + 1);
        }
        let mut triplet = [0.0; 3];
        for (slot, field) in triplet.iter_mut().zip(&fields) {
            *slot = field
                .parse::<f64>()
                .with_context(|| format!("genes file {path}: line {}", number + 1))?;
        }
        triplets.push(triplet);
        if triplets.len() == limit {
            break;
        }
    }
    if triplets.is_empty() {
        bail!("genes file {path} holds no gene triplets");
    }
    Ok(triplets)
}
