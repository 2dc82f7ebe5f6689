//! The measurement-feedback protocol loop.
//!
//! One iteration prepares |Ψ⟩ = G†(θ) U G(θ) |j⟩, measures it in the
//! computational basis (a single shot), treats outcome j as survival and
//! anything else as death, updates the mutation scale w multiplicatively
//! (reward r < 1 on survival, punishment p > 1 on death), and mutates the
//! genotype only on death. A run converges once w drops strictly below the
//! tolerance Δ.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cdf::{KnotSet, MonotoneCdf};
use crate::error::{Error, Result};
use crate::genotype::{gate_from_angles, protocol_state_for_gate, Genotype};
use crate::linalg::{measure_computational, EigenSystem, StateVector, UnitaryMatrix};
use crate::seeds::stream_rng;
use crate::stats::Histogram;

/// How the reward/punishment scale acts on the mutation distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingMode {
    /// Rebuild the interpolant from the knots scaled by w (the literal
    /// parameter-update rule).
    #[serde(rename = "knot-scaling")]
    KnotScaling,
    /// Sample from the unscaled interpolant and multiply ε by w.
    #[serde(rename = "epsilon-scaling")]
    EpsilonScaling,
}

/// Multiplicative scale state with its update constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardPunishment {
    /// Current scale w; starts at 1.
    pub scale: f64,
    /// Reward constant r < 1 applied on survival.
    pub reward: f64,
    /// Punishment constant p > 1 applied on death.
    pub punishment: f64,
    /// Convergence tolerance Δ; the run stops once w < Δ.
    pub tolerance: f64,
    /// Running product of every w so far: the mutation distribution at
    /// iteration k carries the knots of iteration k-1 scaled by w_k, so the
    /// effective scale is cumulative. Sustained adaptation anneals the
    /// mutations long before w itself crosses the tolerance.
    pub mutation_scale: f64,
}

impl RewardPunishment {
    pub fn new(reward: f64, punishment: f64, tolerance: f64) -> Result<Self> {
        if !(reward > 0.0 && reward < 1.0) {
            return Err(Error::OutOfDomain {
                name: "reward",
                value: reward,
                domain: "(0, 1)",
            });
        }
        if !(punishment > 1.0 && punishment.is_finite()) {
            return Err(Error::OutOfDomain {
                name: "punishment",
                value: punishment,
                domain: "(1, inf)",
            });
        }
        // one-ulp slack: p = 1/r rounds the product to either side of 1
        if reward * punishment < 1.0 - 1e-12 {
            return Err(Error::invalid(format!(
                "r·p = {} violates the convergence requirement r·p >= 1",
                reward * punishment
            )));
        }
        if !(tolerance > 0.0 && tolerance < 1.0) {
            return Err(Error::OutOfDomain {
                name: "tolerance",
                value: tolerance,
                domain: "(0, 1)",
            });
        }
        Ok(RewardPunishment {
            scale: 1.0,
            reward,
            punishment,
            tolerance,
            mutation_scale: 1.0,
        })
    }

    /// Calibrated defaults: r = 0.985 with the saturating punishment
    /// 1/0.985 and Δ = 0.9.
    pub fn defaults() -> Self {
        RewardPunishment::new(0.985, 1.0 / 0.985, 0.9).unwrap()
    }

    /// Fresh copy with w and the cumulative mutation scale reset to 1.
    pub fn reset(&self) -> Self {
        RewardPunishment {
            scale: 1.0,
            mutation_scale: 1.0,
            ..*self
        }
    }

    /// w' = r·w on survival, p·w on death; constants unchanged. The
    /// cumulative mutation scale picks up the new w.
    pub fn update(&self, alive: bool) -> Self {
        let factor = if alive { self.reward } else { self.punishment };
        let scale = self.scale * factor;
        RewardPunishment {
            scale,
            mutation_scale: self.mutation_scale * scale,
            ..*self
        }
    }

    /// Strictly w < Δ.
    pub fn converged(&self) -> bool {
        self.scale < self.tolerance
    }

    /// Number of consecutive rewards that takes w from 1 below Δ, computed
    /// with the same sequential multiplication the run loop uses.
    pub fn min_alive_iterations(&self, cap: u32) -> u32 {
        let mut state = self.reset();
        for count in 1..=cap {
            state = state.update(true);
            if state.converged() {
                return count;
            }
        }
        cap
    }
}

/// Everything one run needs; immutable while the run executes.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub environment: UnitaryMatrix,
    /// Reference eigensystem used for fidelity diagnostics only; the
    /// protocol itself never reads it.
    pub reference: EigenSystem,
    pub knots: KnotSet,
    pub rp: RewardPunishment,
    pub target: usize,
    pub max_iterations: u32,
    pub scaling: ScalingMode,
    /// Standard deviation of the Gaussian perturbation added to every angle
    /// used in gate construction (never persisted into the genotype).
    pub gate_noise_sigma: f64,
    /// false runs exactly `max_iterations` steps (fixed-budget mode).
    pub stop_on_convergence: bool,
    /// Record a per-step fidelity snapshot in traces.
    pub snapshot_fidelity: bool,
}

impl RunConfig {
    pub fn new(
        environment: UnitaryMatrix,
        reference: EigenSystem,
        knots: KnotSet,
        target: usize,
    ) -> Result<Self> {
        let config = RunConfig {
            environment,
            reference,
            knots,
            rp: RewardPunishment::defaults(),
            target,
            max_iterations: 2000,
            scaling: ScalingMode::KnotScaling,
            gate_noise_sigma: 0.0,
            stop_on_convergence: true,
            snapshot_fidelity: false,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.environment.dim() != self.reference.dim() {
            return Err(Error::DimensionMismatch {
                left: self.environment.dim(),
                right: self.reference.dim(),
            });
        }
        if self.target >= self.environment.dim() {
            return Err(Error::invalid(format!(
                "target {} out of range for dimension {}",
                self.target,
                self.environment.dim()
            )));
        }
        if self.max_iterations < 1 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if !(self.gate_noise_sigma >= 0.0 && self.gate_noise_sigma.is_finite()) {
            return Err(Error::OutOfDomain {
                name: "gate_noise_sigma",
                value: self.gate_noise_sigma,
                domain: "[0, inf)",
            });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.environment.dim()
    }
}

/// One iteration of a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub iteration: u32,
    /// Measured basis index m.
    pub outcome: usize,
    pub alive: bool,
    /// w after this iteration's update.
    pub scale: f64,
    /// Best-match (eigenindex, fidelity) of the post-step genotype, when
    /// snapshots are enabled.
    pub fidelity: Option<(usize, f64)>,
}

/// Full record of a single run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<StepRecord>,
    pub converged: bool,
    /// Iterations executed; equals the cap when the run did not converge.
    pub iterations: u32,
    pub final_scale: f64,
    pub final_genotype: Genotype,
    pub matched_index: usize,
    pub final_fidelity: f64,
}

/// Per-run scalars kept by ensembles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub iterations: u32,
    pub converged: bool,
    pub final_scale: f64,
    pub fidelity: f64,
    pub matched_index: usize,
}

/// Ensemble statistics plus the per-run values they were reduced from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub repetitions: usize,
    pub master_seed: u64,
    pub mean_iterations: f64,
    pub mean_fidelity: f64,
    pub mean_final_scale: f64,
    pub convergence_rate: f64,
    pub iteration_histogram: Histogram,
    pub fidelity_histogram: Histogram,
    /// Runs whose final state matched each reference eigenindex.
    pub assignment_counts: Vec<u64>,
    pub runs: Vec<RunSummary>,
}

/// Best-scoring reference eigenvector for the genotype's current state.
///
/// Degenerate clusters are scored by their total subspace projection weight;
/// ties break toward the lowest eigenindex.
pub fn best_match_fidelity(genotype: &Genotype, reference: &EigenSystem) -> Result<(usize, f64)> {
    best_match_for_state(&genotype.state(), reference)
}

fn best_match_for_state(state: &StateVector, reference: &EigenSystem) -> Result<(usize, f64)> {
    if state.dim() != reference.dim() {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: reference.dim(),
        });
    }
    let weights: Vec<f64> = reference
        .vectors()
        .iter()
        .map(|v| v.inner(state).map(|z| z.norm_sqr()))
        .collect::<Result<_>>()?;
    let mut best_index = 0;
    let mut best_score = f64::NEG_INFINITY;
    for cluster in reference.degenerate_clusters() {
        let score: f64 = cluster.iter().map(|&k| weights[k]).sum();
        let index = *cluster.iter().min().unwrap();
        if score > best_score || (score == best_score && index < best_index) {
            best_score = score;
            best_index = index;
        }
    }
    Ok((best_index, best_score))
}

fn sample_mutation_scale(
    config: &RunConfig,
    rp_after: &RewardPunishment,
) -> Result<(Option<MonotoneCdf>, f64)> {
    // The mutation distribution saturates at its base shape: a cumulative
    // scale above 1 cannot widen it further. Unsaturated growth would push
    // the whole CDF against the domain walls and collapse mutations onto
    // ±π, freezing the search on a tiny orbit. The positive floor guards
    // against underflow in long, deeply annealed runs.
    let effective = rp_after.scale.clamp(f64::MIN_POSITIVE, 1.0); // PROBE: base-scaling
    match config.scaling {
        ScalingMode::KnotScaling => {
            let scaled = config.knots.scale(effective)?;
            Ok((Some(MonotoneCdf::new(&scaled)), 1.0))
        }
        ScalingMode::EpsilonScaling => Ok((None, effective)),
    }
}

fn advance<R: Rng + ?Sized>(
    genotype: &Genotype,
    rp: &RewardPunishment,
    config: &RunConfig,
    iteration: u32,
    base_sampler: Option<&MonotoneCdf>,
    rng: &mut R,
) -> Result<(Genotype, RewardPunishment, StepRecord)> {
    let dim = config.dim();

    let gate = if config.gate_noise_sigma > 0.0 {
        let noisy: Vec<f64> = genotype
            .angles()
            .iter()
            .map(|a| {
                let draw: f64 = StandardNormal.sample(rng);
                a + config.gate_noise_sigma * draw
            })
            .collect();
        gate_from_angles(dim, genotype.target(), &noisy)
    } else {
        genotype.gate()
    };

    let psi = protocol_state_for_gate(&gate, genotype.target(), &config.environment)?;
    let outcome = measure_computational(&psi, rng.random::<f64>());
    let alive = outcome == genotype.target();
    let rp_after = rp.update(alive);

    let next = if alive {
        genotype.clone()
    } else {
        let (scaled_sampler, epsilon_scale) = sample_mutation_scale(config, &rp_after)?;
        match (&scaled_sampler, base_sampler) {
            (Some(sampler), _) => genotype.mutate_scaled(sampler, false, epsilon_scale, rng),
            (None, Some(base)) => genotype.mutate_scaled(base, false, epsilon_scale, rng),
            (None, None) => {
                let base = MonotoneCdf::new(&config.knots);
                genotype.mutate_scaled(&base, false, epsilon_scale, rng)
            }
        }
    };

    let fidelity = if config.snapshot_fidelity {
        Some(best_match_fidelity(&next, &config.reference)?)
    } else {
        None
    };

    Ok((
        next,
        rp_after,
        StepRecord {
            iteration,
            outcome,
            alive,
            scale: rp_after.scale,
            fidelity,
        },
    ))
}

/// One protocol iteration: prepare, measure, update the scale, mutate.
pub fn step<R: Rng + ?Sized>(
    genotype: &Genotype,
    rp: &RewardPunishment,
    config: &RunConfig,
    iteration: u32,
    rng: &mut R,
) -> Result<(Genotype, RewardPunishment, StepRecord)> {
    advance(genotype, rp, config, iteration, None, rng)
}

struct RunOutcome {
    summary: RunSummary,
    records: Vec<StepRecord>,
    final_genotype: Genotype,
}

fn run_core<R: Rng + ?Sized>(config: &RunConfig, rng: &mut R, record: bool) -> Result<RunOutcome> {
    config.validate()?;
    let mut genotype = Genotype::origin(config.dim(), config.target)?;
    let mut rp = config.rp.reset();
    let base_sampler = match config.scaling {
        ScalingMode::EpsilonScaling => Some(MonotoneCdf::new(&config.knots)),
        ScalingMode::KnotScaling => None,
    };

    let mut records = Vec::new();
    let mut converged = false;
    let mut iterations = config.max_iterations;
    for t in 1..=config.max_iterations {
        let (next, rp_after, step_record) =
            advance(&genotype, &rp, config, t, base_sampler.as_ref(), rng)?;
        genotype = next;
        rp = rp_after;
        if record {
            records.push(step_record);
        }
        if config.stop_on_convergence && rp.converged() {
            converged = true;
            iterations = t;
            break;
        }
    }
    if !config.stop_on_convergence {
        converged = rp.converged();
    }

    let (matched_index, fidelity) = best_match_fidelity(&genotype, &config.reference)?;
    Ok(RunOutcome {
        summary: RunSummary {
            iterations,
            converged,
            final_scale: rp.scale,
            fidelity,
            matched_index,
        },
        records,
        final_genotype: genotype,
    })
}

/// A single run with a full per-iteration trace.
///
/// The same seed passed here and to a one-repetition ensemble selects the
/// same random stream.
pub fn run_single(config: &RunConfig, seed: u64) -> Result<RunTrace> {
    let mut rng = stream_rng(seed, 0);
    let outcome = run_core(config, &mut rng, true)?;
    Ok(RunTrace {
        records: outcome.records,
        converged: outcome.summary.converged,
        iterations: outcome.summary.iterations,
        final_scale: outcome.summary.final_scale,
        final_genotype: outcome.final_genotype,
        matched_index: outcome.summary.matched_index,
        final_fidelity: outcome.summary.fidelity,
    })
}

/// Seeded ensemble of independent runs.
///
/// Repetition i draws from the ChaCha stream (master_seed, i); results and
/// all derived statistics are byte-identical for any worker count because
/// the reduction happens in repetition order.
pub fn run_ensemble(
    config: &RunConfig,
    repetitions: usize,
    master_seed: u64,
) -> Result<MonteCarloSummary> {
    if repetitions < 1 {
        return Err(Error::invalid("repetitions must be at least 1"));
    }
    config.validate()?;

    let runs: Vec<RunSummary> = (0..repetitions)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(master_seed, i as u64);
            run_core(config, &mut rng, false).map(|outcome| outcome.summary)
        })
        .collect::<Result<_>>()?;

    let n = repetitions as f64;
    let iteration_values: Vec<f64> = runs.iter().map(|r| r.iterations as f64).collect();
    let fidelity_values: Vec<f64> = runs.iter().map(|r| r.fidelity).collect();
    let mean_iterations = iteration_values.iter().sum::<f64>() / n;
    let mean_fidelity = fidelity_values.iter().sum::<f64>() / n;
    let mean_final_scale = runs.iter().map(|r| r.final_scale).sum::<f64>() / n;
    let convergence_rate = runs.iter().filter(|r| r.converged).count() as f64 / n;

    let mut assignment_counts = vec![0u64; config.reference.dim()];
    for run in &runs {
        assignment_counts[run.matched_index] += 1;
    }

    Ok(MonteCarloSummary {
        repetitions,
        master_seed,
        mean_iterations,
        mean_fidelity,
        mean_final_scale,
        convergence_rate,
        iteration_histogram: Histogram::from_values(&iteration_values, 20),
        fidelity_histogram: Histogram::from_values(&fidelity_values, 20),
        assignment_counts,
        runs,
    })
}
