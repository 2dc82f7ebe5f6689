//! Optimization of the mutation distribution's knot set.
//!
//! Two cost criteria drive the search: learning speed (mean iterations to
//! convergence) and learning accuracy at a fixed iteration budget (mean
//! best-match fidelity, or the experimentally measurable proxy of the mean
//! final scale w). Costs are evaluated on seeded ensembles with common
//! random numbers, so two candidates always face the same shot noise, and
//! the knots are searched through an unconstrained gap-fraction
//! reparametrization with Nelder-Mead restarts.

pub mod nelder_mead;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cdf::{KnotSet, MIN_GAP};
use crate::engine::{run_ensemble, MonteCarloSummary, RunConfig};
use crate::error::{Error, Result};
use crate::seeds::{derive_seed, stream_rng};

use nelder_mead::{minimize, NelderMeadOptions};

/// What the optimizer minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostCriterion {
    /// Mean iterations to convergence; non-converged runs cost the cap.
    #[serde(rename = "speed")]
    Speed,
    /// Negated mean best-match fidelity after the fixed budget.
    #[serde(rename = "accuracy-fidelity")]
    AccuracyFidelity,
    /// Mean final scale w after the fixed budget (the measurable proxy for
    /// fidelity; lower is better).
    #[serde(rename = "accuracy-final-w")]
    AccuracyFinalScale,
}

impl CostCriterion {
    pub fn is_accuracy(self) -> bool {
        !matches!(self, CostCriterion::Speed)
    }
}

/// A reproducible cost function over knot sets.
#[derive(Debug, Clone)]
pub struct CostSpec {
    pub criterion: CostCriterion,
    /// Fixed iteration budget ℓ for the accuracy criteria.
    pub budget_iterations: u32,
    pub repetitions: usize,
    pub template: RunConfig,
    pub master_seed: u64,
}

impl CostSpec {
    pub fn new(
        criterion: CostCriterion,
        budget_iterations: u32,
        repetitions: usize,
        template: RunConfig,
        master_seed: u64,
    ) -> Result<Self> {
        if criterion.is_accuracy() && budget_iterations < 1 {
            return Err(Error::invalid("accuracy criteria need a budget of at least 1"));
        }
        if repetitions < 100 {
            return Err(Error::invalid(
                "at least 100 repetitions are required for a reported cost",
            ));
        }
        template.validate()?;
        Ok(CostSpec {
            criterion,
            budget_iterations,
            repetitions,
            template,
            master_seed,
        })
    }

    fn config_for(&self, knots: &KnotSet) -> RunConfig {
        let mut config = self.template.clone();
        config.knots = knots.clone();
        config.snapshot_fidelity = false;
        match self.criterion {
            CostCriterion::Speed => {
                config.stop_on_convergence = true;
            }
            CostCriterion::AccuracyFidelity | CostCriterion::AccuracyFinalScale => {
                config.stop_on_convergence = false;
                config.max_iterations = self.budget_iterations;
            }
        }
        config
    }

    /// The ensemble behind one cost evaluation.
    pub fn ensemble(&self, knots: &KnotSet) -> Result<MonteCarloSummary> {
        run_ensemble(&self.config_for(knots), self.repetitions, self.master_seed)
    }

    fn cost_of(&self, summary: &MonteCarloSummary) -> f64 {
        match self.criterion {
            CostCriterion::Speed => summary.mean_iterations,
            CostCriterion::AccuracyFidelity => -summary.mean_fidelity,
            CostCriterion::AccuracyFinalScale => summary.mean_final_scale,
        }
    }
}

/// Cost of a knot set under the spec; bit-identical across calls thanks to
/// common random numbers.
pub fn cost_eval(knots: &KnotSet, spec: &CostSpec) -> Result<f64> {
    Ok(spec.cost_of(&spec.ensemble(knots)?))
}

/// Knots to an unconstrained vector of 2n logits: x-knots as log gap
/// fractions of (-1, 0), y-knots as log gap fractions of the cumulative
/// values over (0, 0.5), both relative to the final gap. Boundary-touching
/// values are perturbed by 1e-9 before encoding.
pub fn reparam_forward(knots: &KnotSet) -> Vec<f64> {
    let n = knots.len();
    let gaps = |values: &[f64], lo: f64, hi: f64| -> Vec<f64> {
        let mut gaps = Vec::with_capacity(n + 1);
        let mut previous = lo;
        for &v in values {
            gaps.push((v - previous).max(MIN_GAP));
            previous = v;
        }
        gaps.push((hi - previous).max(MIN_GAP));
        gaps
    };
    let x_gaps = gaps(knots.xs(), -1.0, 0.0);
    let y_gaps = gaps(knots.ys(), 0.0, 0.5);
    let mut logits = Vec::with_capacity(2 * n);
    logits.extend(x_gaps[..n].iter().map(|g| (g / x_gaps[n]).ln()));
    logits.extend(y_gaps[..n].iter().map(|g| (g / y_gaps[n]).ln()));
    logits
}

/// Inverse of [`reparam_forward`]: any finite vector of even length decodes
/// to a valid knot set; n is inferred from the length.
pub fn reparam_backward(logits: &[f64]) -> Result<KnotSet> {
    if logits.is_empty() || logits.len() % 2 != 0 {
        return Err(Error::invalid(format!(
            "expected an even, nonzero number of logits, got {}",
            logits.len()
        )));
    }
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("logits must be finite"));
    }
    let n = logits.len() / 2;

    let decode = |slice: &[f64], span: f64, floor: f64| -> Vec<f64> {
        // softmax including the implicit zero logit of the final gap
        let max = slice.iter().copied().fold(0.0_f64, f64::max);
        let mut weights: Vec<f64> = slice.iter().map(|l| (l - max).exp()).collect();
        weights.push((-max).exp());
        let total: f64 = weights.iter().sum();
        let mut gaps: Vec<f64> = weights
            .iter()
            .map(|w| (w / total * span).max(floor))
            .collect();
        let rescale = span / gaps.iter().sum::<f64>();
        for g in gaps.iter_mut() {
            *g *= rescale;
        }
        let mut cumulative = 0.0;
        gaps[..n]
            .iter()
            .map(|g| {
                cumulative += g;
                cumulative
            })
            .collect()
    };

    let xs: Vec<f64> = decode(&logits[..n], 1.0, 2.0 * MIN_GAP)
        .into_iter()
        .map(|v| v - 1.0)
        .collect();
    let ys = decode(&logits[n..], 0.5, 0.0);
    KnotSet::new(xs, ys)
}

/// Outcome of one knot-set optimization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_knots: KnotSet,
    pub best_cost: f64,
    pub evaluations: usize,
    /// Cost of every evaluation in call order, across all restarts.
    pub history: Vec<f64>,
    pub seed: u64,
}

/// Nelder-Mead over the reparametrized knots: one start at the uniform
/// baseline (the zero vector) plus three seeded random restarts, sharing the
/// evaluation budget. The returned knots are never worse than the baseline
/// because the baseline is the first point evaluated.
pub fn optimize(
    spec: &CostSpec,
    n_knots: usize,
    evaluation_budget: usize,
    seed: u64,
) -> Result<OptimizationResult> {
    if n_knots < 1 {
        return Err(Error::invalid("n_knots must be at least 1"));
    }
    if evaluation_budget < 20 * n_knots {
        return Err(Error::invalid(format!(
            "evaluation budget {evaluation_budget} below the floor of {}",
            20 * n_knots
        )));
    }

    let dim = 2 * n_knots;
    let mut rng = stream_rng(seed, 0);
    let mut starts: Vec<Vec<f64>> = vec![vec![0.0; dim]];
    for _ in 0..3 {
        starts.push((0..dim).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect());
    }

    let share = evaluation_budget / starts.len();
    let mut budgets = vec![share; starts.len()];
    budgets[0] += evaluation_budget - share * starts.len();

    let mut history = Vec::with_capacity(evaluation_budget);
    let mut evaluations = 0usize;
    let mut best_cost = f64::INFINITY;
    let mut best_knots: Option<KnotSet> = None;
    let mut failure: Option<Error> = None;

    for (start, budget) in starts.iter().zip(budgets) {
        if failure.is_some() {
            break;
        }
        let outcome = minimize(
            |point: &[f64]| {
                let knots = match reparam_backward(point) {
                    Ok(k) => k,
                    Err(e) => {
                        failure = Some(e);
                        return f64::INFINITY;
                    }
                };
                match cost_eval(&knots, spec) {
                    Ok(cost) => {
                        if cost < best_cost {
                            best_cost = cost;
                            best_knots = Some(knots);
                        }
                        cost
                    }
                    Err(e) => {
                        failure = Some(e);
                        f64::INFINITY
                    }
                }
            },
            start,
            &NelderMeadOptions {
                max_evaluations: budget,
                ..Default::default()
            },
        );
        evaluations += outcome.evaluations;
        history.extend(outcome.history);
    }
    if let Some(error) = failure {
        return Err(error);
    }

    Ok(OptimizationResult {
        best_knots: best_knots.expect("at least one evaluation ran"),
        best_cost,
        evaluations,
        history,
        seed,
    })
}

/// One environment of a campaign, with its genes when it came from the
/// single-qubit gate parametrization.
#[derive(Debug, Clone)]
pub struct CampaignInstance {
    pub genes: Option<[f64; 3]>,
    pub template: RunConfig,
}

/// Campaign-wide settings independent of the instances.
#[derive(Debug, Clone)]
pub struct CampaignSettings {
    pub criterion: CostCriterion,
    pub budget_iterations: u32,
    /// Repetitions for the reported uniform/optimized comparison.
    pub repetitions: usize,
    /// Repetitions per cost evaluation inside the optimizer.
    pub optimizer_repetitions: usize,
    pub n_knots: usize,
    pub evaluation_budget: usize,
    pub master_seed: u64,
}

/// One row of the campaign table: genes, optimal knots, and the
/// uniform-vs-optimized comparison at full repetitions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignRow {
    pub index: usize,
    pub genes: Option<[f64; 3]>,
    pub x_opt: Vec<f64>,
    pub y_opt: Vec<f64>,
    pub iterations_uniform: f64,
    pub iterations_optimized: f64,
    pub fidelity_uniform: f64,
    pub fidelity_optimized: f64,
    pub final_scale_uniform: f64,
    pub final_scale_optimized: f64,
    pub cost_uniform: f64,
    pub cost_optimized: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignAggregate {
    pub mean_iterations_uniform: f64,
    pub mean_iterations_optimized: f64,
    pub iteration_reduction_percent: f64,
    pub mean_fidelity_uniform: f64,
    pub mean_fidelity_optimized: f64,
    pub mean_final_scale_uniform: f64,
    pub mean_final_scale_optimized: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignOutcome {
    pub rows: Vec<CampaignRow>,
    pub aggregate: CampaignAggregate,
    pub master_seed: u64,
}

/// Per-instance optimization plus a paired uniform/optimized evaluation.
///
/// The optimizer runs on its own seed and (usually smaller) repetition
/// count; the reported comparison re-evaluates both arms at full
/// repetitions on a separate seed shared by the two arms.
pub fn campaign(
    instances: &[CampaignInstance],
    settings: &CampaignSettings,
) -> Result<CampaignOutcome> {
    if instances.is_empty() {
        return Err(Error::invalid("campaign needs at least one instance"));
    }
    let mut rows = Vec::with_capacity(instances.len());
    for (index, instance) in instances.iter().enumerate() {
        let optimize_seed = derive_seed(settings.master_seed, 2 * index as u64);
        let report_seed = derive_seed(settings.master_seed, 2 * index as u64 + 1);

        let optimize_spec = CostSpec::new(
            settings.criterion,
            settings.budget_iterations,
            settings.optimizer_repetitions,
            instance.template.clone(),
            optimize_seed,
        )?;
        let result = optimize(
            &optimize_spec,
            settings.n_knots,
            settings.evaluation_budget,
            optimize_seed,
        )?;

        let report_spec = CostSpec::new(
            settings.criterion,
            settings.budget_iterations,
            settings.repetitions,
            instance.template.clone(),
            report_seed,
        )?;
        let uniform = KnotSet::uniform(settings.n_knots);
        let uniform_summary = report_spec.ensemble(&uniform)?;
        let optimized_summary = report_spec.ensemble(&result.best_knots)?;

        rows.push(CampaignRow {
            index,
            genes: instance.genes,
            x_opt: result.best_knots.xs().to_vec(),
            y_opt: result.best_knots.ys().to_vec(),
            iterations_uniform: uniform_summary.mean_iterations,
            iterations_optimized: optimized_summary.mean_iterations,
            fidelity_uniform: uniform_summary.mean_fidelity,
            fidelity_optimized: optimized_summary.mean_fidelity,
            final_scale_uniform: uniform_summary.mean_final_scale,
            final_scale_optimized: optimized_summary.mean_final_scale,
            cost_uniform: report_spec.cost_of(&uniform_summary),
            cost_optimized: report_spec.cost_of(&optimized_summary),
        });
    }

    let n = rows.len() as f64;
    let mean = |f: fn(&CampaignRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    let mean_iterations_uniform = mean(|r| r.iterations_uniform);
    let mean_iterations_optimized = mean(|r| r.iterations_optimized);
    let aggregate = CampaignAggregate {
        mean_iterations_uniform,
        mean_iterations_optimized,
        iteration_reduction_percent: 100.0
            * (1.0 - mean_iterations_optimized / mean_iterations_uniform),
        mean_fidelity_uniform: mean(|r| r.fidelity_uniform),
        mean_fidelity_optimized: mean(|r| r.fidelity_optimized),
        mean_final_scale_uniform: mean(|r| r.final_scale_uniform),
        mean_final_scale_optimized: mean(|r| r.final_scale_optimized),
    };
    Ok(CampaignOutcome {
        rows,
        aggregate,
        master_seed: settings.master_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdf::validate_knots;
    use crate::linalg::{unitary_eigensystem, UnitaryMatrix};
    use crate::operators::environment_from_genes;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn identity_template() -> RunConfig {
        let environment = UnitaryMatrix::identity(2).unwrap();
        let reference = unitary_eigensystem(&environment).unwrap();
        let mut config = RunConfig::new(environment, reference, KnotSet::uniform(2), 0).unwrap();
        config.rp = crate::engine::RewardPunishment::new(0.9, 1.0 / 0.9, 0.9).unwrap();
        config
    }

    fn genes_template(theta: f64, phi: f64, lambda: f64) -> RunConfig {
        let environment = environment_from_genes(theta, phi, lambda);
        let reference = unitary_eigensystem(&environment).unwrap();
        RunConfig::new(environment, reference, KnotSet::uniform(2), 0).unwrap()
    }

    #[test]
    fn reparam_roundtrip_is_tight() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let knots = crate::cdf::tests::random_knots(&mut rng, 3);
            let logits = reparam_forward(&knots);
            assert_eq!(logits.len(), 6);
            let back = reparam_backward(&logits).unwrap();
            for (a, b) in knots.xs().iter().zip(back.xs()) {
                assert!((a - b).abs() < 1e-9);
            }
            for (a, b) in knots.ys().iter().zip(back.ys()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_vector_decodes_to_uniform_baseline() {
        let knots = reparam_backward(&[0.0; 4]).unwrap();
        let uniform = KnotSet::uniform(2);
        for (a, b) in knots.xs().iter().zip(uniform.xs()) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in knots.ys().iter().zip(uniform.ys()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn random_and_extreme_vectors_decode_to_valid_knots() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10_000 {
            let n = if rng.random::<f64>() < 0.5 { 2 } else { 4 };
            let logits: Vec<f64> = (0..2 * n)
                .map(|_| (rng.random::<f64>() - 0.5) * 40.0)
                .collect();
            let knots = reparam_backward(&logits).unwrap();
            assert!(validate_knots(knots.xs(), knots.ys()).is_empty());
        }
        // boundary-touching forward encoding stays finite
        let touching = KnotSet::new(vec![-0.5, -0.25], vec![0.0, 0.5]).unwrap();
        let logits = reparam_forward(&touching);
        assert!(logits.iter().all(|l| l.is_finite()));
    }

    #[test]
    fn reparam_rejects_bad_shapes() {
        assert!(reparam_backward(&[]).is_err());
        assert!(reparam_backward(&[0.0; 3]).is_err());
        assert!(reparam_backward(&[f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn cost_eval_is_bit_stable_and_criterion_consistent() {
        let template = genes_template(2.0, 1.0, 0.5);
        let spec = CostSpec::new(CostCriterion::Speed, 0, 100, template.clone(), 11).unwrap();
        let knots = KnotSet::uniform(2);
        let a = cost_eval(&knots, &spec).unwrap();
        let b = cost_eval(&knots, &spec).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());

        let accuracy =
            CostSpec::new(CostCriterion::AccuracyFidelity, 40, 100, template, 11).unwrap();
        let cost = cost_eval(&knots, &accuracy).unwrap();
        assert!((-1.0..=0.0).contains(&cost));
    }

    #[test]
    fn identity_environment_speed_cost_is_knot_independent() {
        let spec = CostSpec::new(CostCriterion::Speed, 0, 100, identity_template(), 3).unwrap();
        let a = cost_eval(&KnotSet::uniform(2), &spec).unwrap();
        let b = cost_eval(
            &KnotSet::new(vec![-0.9, -0.8], vec![0.0, 0.01]).unwrap(),
            &spec,
        )
        .unwrap();
        assert_eq!(a, 2.0);
        assert_eq!(b, 2.0);
    }

    #[test]
    fn cost_spec_validates_inputs() {
        let template = identity_template();
        assert!(CostSpec::new(CostCriterion::Speed, 0, 99, template.clone(), 0).is_err());
        assert!(CostSpec::new(CostCriterion::AccuracyFidelity, 0, 100, template, 0).is_err());
    }

    #[test]
    fn optimize_rejects_tiny_budgets() {
        let spec = CostSpec::new(CostCriterion::Speed, 0, 100, identity_template(), 1).unwrap();
        assert!(optimize(&spec, 2, 39, 1).is_err());
        assert!(optimize(&spec, 0, 100, 1).is_err());
    }

    #[test]
    fn optimize_never_loses_to_the_uniform_baseline() {
        let template = genes_template(2.4, 0.8, 4.0);
        let spec = CostSpec::new(CostCriterion::Speed, 0, 100, template, 21).unwrap();
        let uniform_cost = cost_eval(&KnotSet::uniform(2), &spec).unwrap();
        let result = optimize(&spec, 2, 60, 5).unwrap();
        assert!(result.best_cost <= uniform_cost);
        assert!(result.evaluations <= 60);
        assert!(result
            .history
            .iter()
            .all(|&cost| cost >= result.best_cost));
        // deterministic given the seed
        let again = optimize(&spec, 2, 60, 5).unwrap();
        assert_eq!(again.best_cost.to_bits(), result.best_cost.to_bits());
        assert_eq!(again.best_knots, result.best_knots);
    }

    #[test]
    fn campaign_single_instance_table() {
        let settings = CampaignSettings {
            criterion: CostCriterion::Speed,
            budget_iterations: 0,
            repetitions: 150,
            optimizer_repetitions: 100,
            n_knots: 2,
            evaluation_budget: 48,
            master_seed: 9,
        };
        let instances = vec![CampaignInstance {
            genes: Some([2.0, 1.2, 0.3]),
            template: genes_template(2.0, 1.2, 0.3),
        }];
        let outcome = campaign(&instances, &settings).unwrap();
        assert_eq!(outcome.rows.len(), 1);
        let row = &outcome.rows[0];
        assert_eq!(row.x_opt.len(), 2);
        assert!(row.iterations_uniform > 0.0);
        assert_eq!(
            outcome.aggregate.mean_iterations_uniform,
            row.iterations_uniform
        );
        // rerun is identical
        let again = campaign(&instances, &settings).unwrap();
        assert_eq!(
            again.rows[0].cost_optimized.to_bits(),
            row.cost_optimized.to_bits()
        );
    }
}
