//! Declarative experiment plans.
//!
//! A plan pins everything a study needs: the data model, problem
//! dimensions, sweep grids, trial count and the master seed. Identical
//! plans produce bit-identical report tables. Plans can be loaded from a
//! TOML key/value file and overridden field by field from the command
//! line.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::cocoa::CocoaConfig;
use crate::datagen::DEFAULT_COVARIANCE_DECAY;
use crate::error::{Error, Result};

/// Which study the harness runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    /// Final error versus the size of the first block.
    PartitionSweep,
    /// Per-realization `‖B‖` against the empirical error.
    Spectral,
    /// Error evaluated at every iteration.
    Convergence,
    /// Error across training-noise levels.
    Noise,
    /// Error across ridge penalties with a centralized reference.
    Regularization,
    /// Convergence across subproblem parameters.
    Hyperparam,
    /// Monte Carlo check of the closed-form average error.
    McAverage,
    /// Empirical coverage of a probabilistic bound.
    BoundCoverage,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::PartitionSweep => "sweep",
            StudyKind::Spectral => "spectral",
            StudyKind::Convergence => "converge",
            StudyKind::Noise => "noise",
            StudyKind::Regularization => "regularize",
            StudyKind::Hyperparam => "hyperparam",
            StudyKind::McAverage => "mc-average",
            StudyKind::BoundCoverage => "bound-coverage",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "sweep" => StudyKind::PartitionSweep,
            "spectral" => StudyKind::Spectral,
            "converge" => StudyKind::Convergence,
            "noise" => StudyKind::Noise,
            "regularize" => StudyKind::Regularization,
            "hyperparam" => StudyKind::Hyperparam,
            "mc-average" => StudyKind::McAverage,
            "bound-coverage" => StudyKind::BoundCoverage,
            other => return Err(Error::Validation(format!("unknown study '{other}'"))),
        })
    }
}

/// Data model driving an experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum DataModel {
    IsoGaussian,
    CorrGaussian {
        decay_ratio: f64,
    },
    Bernoulli,
    /// Cosine random features of image-like source vectors. When IDX
    /// files are given and exist they feed the feature map; otherwise a
    /// synthetic source corpus is substituted and the report says so.
    RandomFeatures {
        source_dim: usize,
        bandwidth: f64,
        images: Option<PathBuf>,
        labels: Option<PathBuf>,
    },
}

impl DataModel {
    pub fn name(&self) -> &'static str {
        match self {
            DataModel::IsoGaussian => "iso",
            DataModel::CorrGaussian { .. } => "corr",
            DataModel::Bernoulli => "bernoulli",
            DataModel::RandomFeatures { .. } => "features",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "iso" => DataModel::IsoGaussian,
            "corr" => DataModel::CorrGaussian {
                decay_ratio: DEFAULT_COVARIANCE_DECAY,
            },
            "bernoulli" => DataModel::Bernoulli,
            "features" => DataModel::RandomFeatures {
                source_dim: 32,
                bandwidth: crate::datagen::DEFAULT_FEATURE_BANDWIDTH,
                images: None,
                labels: None,
            },
            other => return Err(Error::Validation(format!("unknown model '{other}'"))),
        })
    }
}

/// Which probabilistic statement a coverage check audits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    IsoGaussian,
    IsoGaussianTall,
    CorrGaussian,
    CorrGaussianTall,
    SubGaussian,
    SubGaussianTall,
    /// Singular-value fluctuation interval of a standard Gaussian matrix.
    TracyWidom,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::IsoGaussian => "iso",
            BoundKind::IsoGaussianTall => "iso-tall",
            BoundKind::CorrGaussian => "corr",
            BoundKind::CorrGaussianTall => "corr-tall",
            BoundKind::SubGaussian => "subg",
            BoundKind::SubGaussianTall => "subg-tall",
            BoundKind::TracyWidom => "tracy-widom",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "iso" => BoundKind::IsoGaussian,
            "iso-tall" => BoundKind::IsoGaussianTall,
            "corr" => BoundKind::CorrGaussian,
            "corr-tall" => BoundKind::CorrGaussianTall,
            "subg" => BoundKind::SubGaussian,
            "subg-tall" => BoundKind::SubGaussianTall,
            "tracy-widom" => BoundKind::TracyWidom,
            other => return Err(Error::Validation(format!("unknown bound '{other}'"))),
        })
    }

    pub fn all() -> [BoundKind; 7] {
        [
            BoundKind::IsoGaussian,
            BoundKind::IsoGaussianTall,
            BoundKind::CorrGaussian,
            BoundKind::CorrGaussianTall,
            BoundKind::SubGaussian,
            BoundKind::SubGaussianTall,
            BoundKind::TracyWidom,
        ]
    }
}

/// Full description of one study run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub study: StudyKind,
    pub model: DataModel,
    /// Training sample count.
    pub n: usize,
    /// Total model dimension.
    pub p: usize,
    /// Number of nodes K for sweep-style partitions.
    pub num_nodes: usize,
    /// Explicit block sizes; takes precedence over `p1_values`-derived
    /// partitions for the studies that use a single fixed partition.
    pub partition: Option<Vec<usize>>,
    /// First-block sizes swept by the partition studies.
    pub p1_values: Vec<usize>,
    pub noise_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub subproblem_grid: Vec<f64>,
    pub trials: usize,
    /// Test rows per trial; defaults to `100 n`.
    pub test_rows: Option<usize>,
    pub master_seed: u64,
    pub lambda: f64,
    pub aggregation: f64,
    /// Defaults to `K` when unset.
    pub subproblem: Option<f64>,
    pub iterations: usize,
    pub noise_variance: f64,
    pub bound: Option<BoundKind>,
    pub q: Vec<f64>,
    pub q_bar: Vec<f64>,
    pub absolute_constant: f64,
    pub subgaussian_constants: Vec<f64>,
}

impl ExperimentPlan {
    pub fn new(study: StudyKind, model: DataModel) -> Self {
        ExperimentPlan {
            study,
            model,
            n: 75,
            p: 200,
            num_nodes: 2,
            partition: None,
            p1_values: vec![25, 50, 75, 100, 125],
            noise_grid: vec![0.0, 1.0, 2.0, 4.0],
            lambda_grid: vec![0.0, 1e-3, 1e-2, 1e-1],
            subproblem_grid: vec![2.0, 4.0, 8.0],
            trials: 100,
            test_rows: None,
            master_seed: 0,
            lambda: 0.0,
            aggregation: 1.0,
            subproblem: None,
            iterations: 1000,
            noise_variance: 0.0,
            bound: None,
            q: vec![],
            q_bar: vec![],
            absolute_constant: 1.0,
            subgaussian_constants: vec![],
        }
    }

    pub fn effective_test_rows(&self) -> usize {
        self.test_rows.unwrap_or(100 * self.n)
    }

    pub fn effective_subproblem(&self) -> f64 {
        self.subproblem.unwrap_or(self.num_nodes as f64)
    }

    pub fn solver_config(&self, lambda: f64, subproblem: f64) -> CocoaConfig {
        CocoaConfig {
            lambda,
            aggregation: self.aggregation,
            subproblem,
            iterations: self.iterations,
            early_stop_tol: None,
        }
    }

    /// Block sizes for a sweep point: the first node takes `p1`, the
    /// remaining `p − p1` columns are split as evenly as possible.
    pub fn partition_for(&self, p1: usize) -> Result<Vec<usize>> {
        partition_for(self.p, self.num_nodes, p1)
    }

    /// The fixed partition of non-sweep studies.
    pub fn fixed_partition(&self) -> Result<Vec<usize>> {
        match &self.partition {
            Some(sizes) => {
                if sizes.iter().sum::<usize>() != self.p || sizes.contains(&0) {
                    return Err(Error::Validation(format!(
                        "partition {sizes:?} does not sum to p = {}",
                        self.p
                    )));
                }
                Ok(sizes.clone())
            }
            None => self.partition_for(
                *self
                    .p1_values
                    .first()
                    .ok_or_else(|| Error::Validation("no partition given".into()))?,
            ),
        }
    }

    /// Cheap structural validation, run before any compute.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Validation("trials must be >= 1".into()));
        }
        if self.n == 0 || self.p == 0 {
            return Err(Error::Validation("n and p must be >= 1".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Validation("iterations must be >= 1".into()));
        }
        if self.noise_variance < 0.0 {
            return Err(Error::Validation("noise variance must be >= 0".into()));
        }
        if self.noise_grid.iter().any(|&v| v < 0.0) {
            return Err(Error::Validation("noise grid values must be >= 0".into()));
        }
        if self.lambda < 0.0 || self.lambda_grid.iter().any(|&v| v < 0.0) {
            return Err(Error::Validation("lambda values must be >= 0".into()));
        }
        let uses_sweep = matches!(
            self.study,
            StudyKind::PartitionSweep
                | StudyKind::Spectral
                | StudyKind::Convergence
                | StudyKind::Noise
                | StudyKind::Regularization
                | StudyKind::McAverage
        );
        if uses_sweep {
            if self.num_nodes < 2 {
                return Err(Error::Validation(
                    "partition sweeps need at least two nodes".into(),
                ));
            }
            if self.p1_values.is_empty() {
                return Err(Error::Validation("no sweep values given".into()));
            }
            for &p1 in &self.p1_values {
                partition_for(self.p, self.num_nodes, p1)?;
            }
        }
        if self.study == StudyKind::Hyperparam && self.subproblem_grid.is_empty() {
            return Err(Error::Validation("no subproblem grid given".into()));
        }
        if self.study == StudyKind::BoundCoverage && self.bound.is_none() {
            return Err(Error::Validation(
                "bound coverage needs a bound kind".into(),
            ));
        }
        let config = self.solver_config(self.lambda, self.effective_subproblem());
        config
            .validate(self.num_nodes)
            .map_err(|e| Error::Validation(e.to_string()))?;
        Ok(())
    }
}

pub(crate) fn partition_for(p: usize, num_nodes: usize, p1: usize) -> Result<Vec<usize>> {
    if num_nodes == 0 {
        return Err(Error::Validation("need at least one node".into()));
    }
    if num_nodes == 1 {
        if p1 != p {
            return Err(Error::Validation(format!(
                "single-node partition needs p1 = p, got {p1} of {p}"
            )));
        }
        return Ok(vec![p]);
    }
    if p1 == 0 || p1 + (num_nodes - 1) > p {
        return Err(Error::Validation(format!(
            "p1 = {p1} leaves no room for {} further blocks of p = {p}",
            num_nodes - 1
        )));
    }
    let rest = p - p1;
    let others = num_nodes - 1;
    let base = rest / others;
    let remainder = rest % others;
    let mut sizes = vec![p1];
    for i in 0..others {
        sizes.push(base + usize::from(i < remainder));
    }
    Ok(sizes)
}

/// All-optional mirror of [`ExperimentPlan`] used for TOML configs and
/// command-line overrides.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanOverrides {
    pub study: Option<String>,
    pub model: Option<String>,
    pub decay_ratio: Option<f64>,
    pub source_dim: Option<usize>,
    pub bandwidth: Option<f64>,
    pub images: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub num_nodes: Option<usize>,
    pub partition: Option<Vec<usize>>,
    pub p1_values: Option<Vec<usize>>,
    pub noise_grid: Option<Vec<f64>>,
    pub lambda_grid: Option<Vec<f64>>,
    pub subproblem_grid: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub test_rows: Option<usize>,
    pub seed: Option<u64>,
    pub lambda: Option<f64>,
    pub aggregation: Option<f64>,
    pub subproblem: Option<f64>,
    pub iterations: Option<usize>,
    pub noise_variance: Option<f64>,
    pub bound: Option<String>,
    pub q: Option<Vec<f64>>,
    pub q_bar: Option<Vec<f64>>,
    pub absolute_constant: Option<f64>,
    pub subgaussian_constants: Option<Vec<f64>>,
}

impl PlanOverrides {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
    }

    pub fn apply_to(&self, plan: &mut ExperimentPlan) -> Result<()> {
        if let Some(study) = &self.study {
            plan.study = StudyKind::parse(study)?;
        }
        if let Some(model) = &self.model {
            plan.model = DataModel::parse(model)?;
        }
        match &mut plan.model {
            DataModel::CorrGaussian { decay_ratio } => {
                if let Some(r) = self.decay_ratio {
                    *decay_ratio = r;
                }
            }
            DataModel::RandomFeatures {
                source_dim,
                bandwidth,
                images,
                labels,
            } => {
                if let Some(d) = self.source_dim {
                    *source_dim = d;
                }
                if let Some(b) = self.bandwidth {
                    *bandwidth = b;
                }
                if self.images.is_some() {
                    *images = self.images.clone();
                }
                if self.labels.is_some() {
                    *labels = self.labels.clone();
                }
            }
            _ => {}
        }
        macro_rules! take {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = &self.$field { $target = v.clone(); })*
            };
        }
        take! {
            n => plan.n,
            p => plan.p,
            num_nodes => plan.num_nodes,
            p1_values => plan.p1_values,
            noise_grid => plan.noise_grid,
            lambda_grid => plan.lambda_grid,
            subproblem_grid => plan.subproblem_grid,
            trials => plan.trials,
            seed => plan.master_seed,
            lambda => plan.lambda,
            aggregation => plan.aggregation,
            iterations => plan.iterations,
            noise_variance => plan.noise_variance,
            absolute_constant => plan.absolute_constant,
            q => plan.q,
            q_bar => plan.q_bar,
            subgaussian_constants => plan.subgaussian_constants,
        }
        if let Some(partition) = &self.partition {
            plan.partition = Some(partition.clone());
            // an explicit partition implies the total dimension
            if self.p.is_none() {
                plan.p = partition.iter().sum();
            }
            if self.num_nodes.is_none() {
                plan.num_nodes = partition.len();
            }
        }
        if self.test_rows.is_some() {
            plan.test_rows = self.test_rows;
        }
        if self.subproblem.is_some() {
            plan.subproblem = self.subproblem;
        }
        if let Some(bound) = &self.bound {
            plan.bound = Some(BoundKind::parse(bound)?);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_for_splits_evenly() {
        assert_eq!(partition_for(200, 2, 25).unwrap(), vec![25, 175]);
        assert_eq!(partition_for(20, 3, 6).unwrap(), vec![6, 7, 7]);
        assert_eq!(partition_for(21, 3, 6).unwrap(), vec![6, 8, 7]);
        assert!(partition_for(10, 3, 9).is_err());
        assert!(partition_for(10, 2, 0).is_err());
    }

    #[test]
    fn plan_validation_catches_bad_grids() {
        let mut plan = ExperimentPlan::new(StudyKind::PartitionSweep, DataModel::IsoGaussian);
        plan.validate().unwrap();
        plan.trials = 0;
        assert!(plan.validate().is_err());
        plan.trials = 1;
        plan.p1_values = vec![300];
        assert!(plan.validate().is_err());
    }

    #[test]
    fn overrides_from_toml() {
        let text = r#"
study = "noise"
model = "corr"
decay_ratio = 0.9
n = 30
p = 60
trials = 7
seed = 11
p1_values = [10, 20]
noise_grid = [0.0, 2.0]
"#;
        let overrides: PlanOverrides = toml::from_str(text).unwrap();
        let mut plan = ExperimentPlan::new(StudyKind::PartitionSweep, DataModel::IsoGaussian);
        overrides.apply_to(&mut plan).unwrap();
        assert_eq!(plan.study, StudyKind::Noise);
        assert_eq!(plan.model, DataModel::CorrGaussian { decay_ratio: 0.9 });
        assert_eq!(plan.n, 30);
        assert_eq!(plan.p, 60);
        assert_eq!(plan.trials, 7);
        assert_eq!(plan.master_seed, 11);
        assert_eq!(plan.p1_values, vec![10, 20]);
        assert_eq!(plan.noise_grid, vec![0.0, 2.0]);
    }

    #[test]
    fn overrides_reject_unknown_keys() {
        assert!(toml::from_str::<PlanOverrides>("unknown_key = 1").is_err());
    }

    #[test]
    fn bound_kind_names_round_trip() {
        for kind in BoundKind::all() {
            assert_eq!(BoundKind::parse(kind.name()).unwrap(), kind);
        }
    }
}
