//! Experiment configuration: TOML for hand-written files, JSON for the
//! resolved copies the commands embed in every output.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use arqe_core::engine::{RewardPunishment, RunConfig, ScalingMode};
use arqe_core::linalg::{
    environment_from_observable, hermitian_eigensystem, unitary_eigensystem, EigenSystem,
    LoadedMatrix, MatrixFile, UnitaryMatrix,
};
use arqe_core::operators;
use arqe_core::optimizer::CostCriterion;
use arqe_core::KnotSet;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OperatorSpec {
    /// a_I·I + a_x·σx + a_y·σy + a_z·σz
    PauliCombo { coefficients: [f64; 4] },
    /// The fixed 4x4 operator with spectrum (0, π/2, π, 3π/2).
    TwoQubitExample,
    /// Molecular-hydrogen coefficients (defaults to the 0.2 Å values).
    H2 {
        #[serde(default = "operators::h2_default_coefficients")]
        g: [f64; 6],
    },
    /// Explicit matrix from a JSON file ({dim, kind, re, im}).
    MatrixFile { path: String },
    /// The general single-qubit gate U(θ, φ, λ) used directly as the
    /// environment.
    Genes { genes: [f64; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EnvironmentMode {
    /// Hermitian sources exponentiate, unitary sources pass through.
    #[default]
    Auto,
    /// U = e^{-iH}; requires a Hermitian source.
    Exponentiate,
    /// Use the supplied unitary as-is; requires a unitary source.
    Direct,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    #[serde(default)]
    pub mode: EnvironmentMode,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSection {
    /// "uniform" or a path to a knots JSON file; inline xs/ys win over this.
    #[serde(default = "default_knots")]
    pub knots: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ys: Option<Vec<f64>>,
    /// Interior knot count for the uniform baseline; defaults to 2 per
    /// qubit's worth of dimension (2 for d=2, 4 for d=4).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_knots: Option<usize>,
    #[serde(default = "default_scaling")]
    pub scaling: ScalingMode,
}

fn default_knots() -> String {
    "uniform".to_string()
}

fn default_scaling() -> ScalingMode {
    ScalingMode::KnotScaling
}

impl Default for DistributionSection {
    fn default() -> Self {
        DistributionSection {
            knots: default_knots(),
            xs: None,
            ys: None,
            n_knots: None,
            scaling: default_scaling(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RpSection {
    pub reward: f64,
    /// Defaults to 1/reward when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub punishment: Option<f64>,
    pub tolerance: f64,
}

impl Default for RpSection {
    fn default() -> Self {
        let defaults = RewardPunishment::defaults();
        RpSection {
            reward: defaults.reward,
            punishment: Some(defaults.punishment),
            tolerance: defaults.tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionChoice {
    #[default]
    Speed,
    /// Alias for the measurable accuracy proxy.
    Accuracy,
    AccuracyFidelity,
    AccuracyFinalW,
}

impl CriterionChoice {
    pub fn cost_criterion(self) -> CostCriterion {
        match self {
            CriterionChoice::Speed => CostCriterion::Speed,
            CriterionChoice::Accuracy | CriterionChoice::AccuracyFinalW => {
                CostCriterion::AccuracyFinalScale
            }
            CriterionChoice::AccuracyFidelity => CostCriterion::AccuracyFidelity,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "speed" => Ok(CriterionChoice::Speed),
            "accuracy" => Ok(CriterionChoice::Accuracy),
            "accuracy-fidelity" => Ok(CriterionChoice::AccuracyFidelity),
            "accuracy-final-w" => Ok(CriterionChoice::AccuracyFinalW),
            other => bail!("unknown criterion '{other}'"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Defaults to 1000 per qubit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<usize>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: u32,
    /// Basis indices to solve for; defaults to every index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<usize>>,
    #[serde(default)]
    pub gate_noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub export_trace: bool,
    #[serde(default)]
    pub criterion: CriterionChoice,
    /// Fixed iteration budget ℓ for the accuracy criteria.
    #[serde(default = "default_budget_iterations")]
    pub budget_iterations: u32,
}

fn default_max_iterations() -> u32 {
    2000
}

fn default_budget_iterations() -> u32 {
    80
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            repetitions: None,
            max_iterations: default_max_iterations(),
            targets: None,
            gate_noise_sigma: 0.0,
            seed: 0,
            export_trace: false,
            criterion: CriterionChoice::default(),
            budget_iterations: default_budget_iterations(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_knots: Option<usize>,
    #[serde(default = "default_evaluations")]
    pub evaluations: usize,
    /// Repetitions per cost evaluation inside the optimizer; defaults to
    /// max(100, repetitions / 5).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer_repetitions: Option<usize>,
}

fn default_evaluations() -> usize {
    400
}

impl Default for OptimizeSection {
    fn default() -> Self {
        OptimizeSection {
            n_knots: None,
            evaluations: default_evaluations(),
            optimizer_repetitions: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSection {
    #[serde(default = "default_instances")]
    pub instances: usize,
    /// Optional CSV of gene triplets (theta,phi,lambda header) to reuse.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genes_file: Option<String>,
    /// Sampling range for θ when genes are drawn randomly.
    #[serde(default = "default_theta_range")]
    pub theta_range: [f64; 2],
}

fn default_instances() -> usize {
    100
}

fn default_theta_range() -> [f64; 2] {
    [0.0, std::f64::consts::TAU]
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        BenchmarkSection {
            instances: default_instances(),
            genes_file: None,
            theta_range: default_theta_range(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_output_dir")]
    pub dir: String,
}

fn default_output_dir() -> String {
    "out".to_string()
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_output_dir(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub operator: OperatorSpec,
    #[serde(default)]
    pub environment: EnvironmentSection,
    #[serde(default)]
    pub distribution: DistributionSection,
    #[serde(default)]
    pub rp: RpSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub optimize: OptimizeSection,
    #[serde(default)]
    pub benchmark: BenchmarkSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    /// Reads TOML (by default) or JSON (.json extension: the resolved
    /// machine-emitted form).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)
                .with_context(|| format!("malformed JSON config {}", path.display()))
        } else {
            toml::from_str(&text)
                .with_context(|| format!("malformed TOML config {}", path.display()))
        }
    }
}

/// The environment, reference and distribution built from a config, with
/// every default made explicit.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub environment: UnitaryMatrix,
    pub reference: EigenSystem,
    pub knots: KnotSet,
    pub rp: RewardPunishment,
    pub targets: Vec<usize>,
    pub repetitions: usize,
    pub n_knots: usize,
    pub optimizer_repetitions: usize,
}

impl Experiment {
    pub fn build(mut config: ExperimentConfig, base_dir: &Path) -> Result<Self> {
        let (environment, reference) = build_environment(&config, base_dir)?;
        let dim = environment.dim();
        let qubits = (usize::BITS - (dim - 1).leading_zeros()) as usize;

        let n_knots = config
            .distribution
            .n_knots
            .unwrap_or_else(|| 2 * qubits.max(1));
        let knots = build_knots(&config.distribution, n_knots, base_dir)?;

        let rp = RewardPunishment::new(
            config.rp.reward,
            config.rp.punishment.unwrap_or(1.0 / config.rp.reward),
            config.rp.tolerance,
        )?;

        let targets = match &config.run.targets {
            Some(list) => {
                for &t in list {
                    if t >= dim {
                        bail!("target {t} out of range for dimension {dim}");
                    }
                }
                list.clone()
            }
            None => (0..dim).collect(),
        };
        let repetitions = config.run.repetitions.unwrap_or(1000 * qubits);
        let optimizer_repetitions = config
            .optimize
            .optimizer_repetitions
            .unwrap_or_else(|| (repetitions / 5).max(100));

        // freeze the resolved values back into the config so emitted copies
        // re-run identically
        config.distribution.n_knots = Some(n_knots);
        config.rp.punishment = Some(rp.punishment);
        config.run.targets = Some(targets.clone());
        config.run.repetitions = Some(repetitions);
        config.optimize.n_knots = Some(config.optimize.n_knots.unwrap_or(n_knots));
        config.optimize.optimizer_repetitions = Some(optimizer_repetitions);

        Ok(Experiment {
            config,
            environment,
            reference,
            knots,
            rp,
            targets,
            repetitions,
            n_knots,
            optimizer_repetitions,
        })
    }

    /// Engine configuration for one target index.
    pub fn run_config(&self, target: usize) -> Result<RunConfig> {
        let mut run = RunConfig::new(
            self.environment.clone(),
            self.reference.clone(),
            self.knots.clone(),
            target,
        )?;
        run.rp = self.rp;
        run.max_iterations = self.config.run.max_iterations;
        run.scaling = self.config.distribution.scaling;
        run.gate_noise_sigma = self.config.run.gate_noise_sigma;
        Ok(run)
    }

    pub fn resolved_json(&self) -> String {
        serde_json::to_string(&self.config).expect("config serializes")
    }
}

fn build_environment(
    config: &ExperimentConfig,
    base_dir: &Path,
) -> Result<(UnitaryMatrix, EigenSystem)> {
    let mode = config.environment.mode;
    let from_hermitian = |h: arqe_core::HermitianObservable| -> Result<_> {
        if mode == EnvironmentMode::Direct {
            bail!("environment mode 'direct' needs a unitary source; this operator is Hermitian and must be exponentiated");
        }
        let reference = hermitian_eigensystem(&h)?;
        let environment = environment_from_observable(&h)?;
        Ok((environment, reference))
    };
    let from_unitary = |u: UnitaryMatrix| -> Result<_> {
        if mode == EnvironmentMode::Exponentiate {
            bail!("environment mode 'exponentiate' needs a Hermitian source; this operator is already unitary");
        }
        let reference = unitary_eigensystem(&u)?;
        Ok((u, reference))
    };

    match &config.operator {
        OperatorSpec::PauliCombo { coefficients: c } => {
            from_hermitian(operators::build_pauli_combo(c[0], c[1], c[2], c[3]))
        }
        OperatorSpec::TwoQubitExample => from_hermitian(operators::build_two_qubit_example()),
        OperatorSpec::H2 { g } => from_hermitian(operators::build_h2(*g)),
        OperatorSpec::MatrixFile { path } => {
            let full = base_dir.join(path);
            let text = std::fs::read_to_string(&full)
                .with_context(|| format!("cannot read matrix file {}", full.display()))?;
            match MatrixFile::parse(&text)? {
                LoadedMatrix::Hermitian(h) => from_hermitian(h),
                LoadedMatrix::Unitary(u) => from_unitary(u),
            }
        }
        OperatorSpec::Genes { genes } => {
            from_unitary(operators::environment_from_genes(genes[0], genes[1], genes[2]))
        }
    }
}

fn build_knots(
    section: &DistributionSection,
    n_knots: usize,
    base_dir: &Path,
) -> Result<KnotSet> {
    if let (Some(xs), Some(ys)) = (&section.xs, &section.ys) {
        return Ok(KnotSet::new(xs.clone(), ys.clone())?);
    }
    if section.xs.is_some() != section.ys.is_some() {
        bail!("inline knots need both xs and ys");
    }
    if section.knots == "uniform" {
        Ok(KnotSet::uniform(n_knots))
    } else {
        let path = base_dir.join(&section.knots);
        load_knots_file(&path)
    }
}

pub fn load_knots_file(path: &Path) -> Result<KnotSet> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read knots file {}", path.display()))?;
    let knots: KnotSet = serde_json::from_str(&text)
        .with_context(|| format!("invalid knots file {}", path.display()))?;
    Ok(knots)
}
