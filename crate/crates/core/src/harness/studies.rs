//! Study execution: seeded Monte Carlo loops, per-study aggregation and
//! bound-coverage audits.
//!
//! Seed discipline: stream 0 of the master seed draws the shared setup
//! (covariance, feature frequencies, the ground-truth parameter); stream
//! `t + 1` drives trial `t`. Trials run in parallel and reduce in trial
//! order, so a plan yields bit-identical tables at any thread count.

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::cocoa::{centralized_solve, iteration_matrix, run_cocoa, training_error};
use crate::datagen::{
    build_paper_covariance, load_idx, partition_columns, random_fourier_features,
    sample_feature_frequencies, sample_ground_truth, sample_regressors, IdxContent,
    PartitionSpec, RegressorModel, TrainingSet, DEFAULT_COVARIANCE_DECAY,
};
use crate::error::{Error, Result};
use crate::numkern::{pseudoinverse, spectral_norm, svd, DEFAULT_SV_CUTOFF};
use crate::theory::{
    avg_gen_error, beta_corr_gaussian, beta_corr_gaussian_tall, beta_iso_gaussian,
    beta_iso_gaussian_tall, beta_sub_gaussian, beta_sub_gaussian_tall,
    gaussian_subgaussian_constant, tracy_widom_interval, BlockSpectrum, BoundInputs,
    PartitionDims,
};
use crate::{Matrix, Vector};

use super::plan::{BoundKind, DataModel, ExperimentPlan, StudyKind};
use super::report::{ReportTable, Value};

/// Number of blocks used by the median-of-means estimator.
pub const MEDIAN_OF_MEANS_BLOCKS: usize = 50;

/// RNG for the shared per-plan setup draws.
pub fn master_rng(seed: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

/// Independent stream for one trial; schedule-independent by construction.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial + 1);
    rng
}

/// Out-of-sample error `(1/n̄) ‖A_test (x − estimate)‖²`.
pub fn empirical_mse(test_regressors: &Matrix, x: &Vector, estimate: &Vector) -> f64 {
    (test_regressors * (x - estimate)).norm_squared() / test_regressors.nrows() as f64
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

/// Median of per-block means over contiguous index blocks. Robust against
/// the heavy tails of the per-draw error near square local problems.
pub fn median_of_means(values: &[f64], blocks: usize) -> f64 {
    let blocks = blocks.clamp(1, values.len());
    let mut block_means = Vec::with_capacity(blocks);
    let base = values.len() / blocks;
    let remainder = values.len() % blocks;
    let mut start = 0;
    for b in 0..blocks {
        let len = base + usize::from(b < remainder);
        block_means.push(mean(&values[start..start + len]));
        start += len;
    }
    median(&block_means)
}

enum FeaturePool {
    SyntheticUniform { source_dim: usize },
    Images { rows: Matrix },
}

enum DataSource {
    Synthetic(RegressorModel),
    Features {
        frequencies: Matrix,
        pool: FeaturePool,
    },
}

impl DataSource {
    fn draw_rows(&self, count: usize, rng: &mut ChaCha12Rng) -> Result<Matrix> {
        match self {
            DataSource::Synthetic(model) => sample_regressors(model, count, rng),
            DataSource::Features { frequencies, pool } => {
                let source = match pool {
                    FeaturePool::SyntheticUniform { source_dim } => {
                        Matrix::from_fn(count, *source_dim, |_, _| rng.random_range(0.0..=1.0))
                    }
                    FeaturePool::Images { rows } => {
                        if rows.nrows() < count {
                            return Err(Error::InsufficientData(format!(
                                "image pool holds {} rows, {} requested per trial",
                                rows.nrows(),
                                count
                            )));
                        }
                        // uniform subsample without replacement
                        let mut indices: Vec<usize> = (0..rows.nrows()).collect();
                        for i in 0..count {
                            let j = rng.random_range(i..indices.len());
                            indices.swap(i, j);
                        }
                        let mut out = Matrix::zeros(count, rows.ncols());
                        for (dst, &src) in indices[..count].iter().enumerate() {
                            out.row_mut(dst).copy_from(&rows.row(src));
                        }
                        out
                    }
                };
                let p = frequencies.nrows();
                let mut out = Matrix::zeros(count, p);
                for i in 0..count {
                    let features =
                        random_fourier_features(&source.row(i).transpose(), frequencies)?;
                    out.row_mut(i).copy_from(&features.transpose());
                }
                Ok(out)
            }
        }
    }
}

struct StudyContext {
    source: DataSource,
    ground_truth: Vector,
    feature_source: Option<&'static str>,
}

fn build_context(plan: &ExperimentPlan) -> Result<StudyContext> {
    let mut rng0 = master_rng(plan.master_seed);
    let mut feature_source = None;
    let source = match &plan.model {
        DataModel::IsoGaussian => {
            DataSource::Synthetic(RegressorModel::IsoGaussian { dim: plan.p })
        }
        DataModel::CorrGaussian { decay_ratio } => {
            let sigma = build_paper_covariance(plan.p, *decay_ratio, &mut rng0)?;
            DataSource::Synthetic(RegressorModel::correlated(sigma)?)
        }
        DataModel::Bernoulli => DataSource::Synthetic(RegressorModel::Bernoulli { dim: plan.p }),
        DataModel::RandomFeatures {
            source_dim,
            bandwidth,
            images,
            labels,
        } => {
            let pool = match images {
                Some(path) if path.exists() => {
                    let IdxContent::Images(rows) = load_idx(path)? else {
                        return Err(Error::Format(format!(
                            "{} does not hold image data",
                            path.display()
                        )));
                    };
                    if let Some(label_path) = labels {
                        if label_path.exists() {
                            let IdxContent::Labels(l) = load_idx(label_path)? else {
                                return Err(Error::Format(format!(
                                    "{} does not hold label data",
                                    label_path.display()
                                )));
                            };
                            if l.len() != rows.nrows() {
                                return Err(Error::Format(
                                    "image and label counts disagree".into(),
                                ));
                            }
                        }
                    }
                    feature_source = Some("idx");
                    FeaturePool::Images { rows }
                }
                _ => {
                    feature_source = Some("synthetic");
                    FeaturePool::SyntheticUniform {
                        source_dim: *source_dim,
                    }
                }
            };
            let dim = match &pool {
                FeaturePool::SyntheticUniform { source_dim } => *source_dim,
                FeaturePool::Images { rows } => rows.ncols(),
            };
            let frequencies = sample_feature_frequencies(plan.p, dim, *bandwidth, &mut rng0);
            DataSource::Features { frequencies, pool }
        }
    };
    let ground_truth = sample_ground_truth(plan.p, &mut rng0);
    Ok(StudyContext {
        source,
        ground_truth,
        feature_source,
    })
}

struct TrialData {
    train: Matrix,
    test: Matrix,
    base_noise: Vector,
}

fn draw_trial(
    ctx: &StudyContext,
    n: usize,
    test_rows: usize,
    rng: &mut ChaCha12Rng,
) -> Result<TrialData> {
    let all = ctx.source.draw_rows(n + test_rows, rng)?;
    let train = all.rows(0, n).into_owned();
    let test = all.rows(n, test_rows).into_owned();
    let base_noise = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    Ok(TrialData {
        train,
        test,
        base_noise,
    })
}

/// Training set with noise scaled from the trial's base draw, so noise
/// grids stay matched within a trial.
fn training_set(trial: &TrialData, x: &Vector, noise_variance: f64) -> TrainingSet {
    let noise = &trial.base_noise * noise_variance.sqrt();
    TrainingSet {
        regressors: trial.train.clone(),
        observations: &trial.train * x + &noise,
        ground_truth: x.clone(),
        noise,
        noise_variance,
    }
}

fn parallel_trials<T: Send>(
    plan: &ExperimentPlan,
    f: impl Fn(u64, ChaCha12Rng) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..plan.trials as u64)
        .into_par_iter()
        .map(|t| f(t, trial_rng(plan.master_seed, t)))
        .collect()
}

fn base_provenance(table: &mut ReportTable, plan: &ExperimentPlan) {
    table.note("study", plan.study.name());
    table.note("model", plan.model.name());
    table.note("n", plan.n);
    table.note("p", plan.p);
    table.note("num_nodes", plan.num_nodes);
    table.note("trials", plan.trials);
    table.note("test_rows", plan.effective_test_rows());
    table.note("seed", plan.master_seed);
    table.note("lambda", plan.lambda);
    table.note("aggregation", plan.aggregation);
    table.note("subproblem", plan.effective_subproblem());
    table.note("iterations", plan.iterations);
    table.note("noise_variance", plan.noise_variance);
}

/// Runs the study described by the plan and returns its report table.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ReportTable> {
    plan.validate()?;
    let mut table = match plan.study {
        StudyKind::PartitionSweep => run_partition_sweep(plan)?,
        StudyKind::Spectral => run_spectral(plan)?,
        StudyKind::Convergence => run_convergence(plan)?,
        StudyKind::Noise => run_noise(plan)?,
        StudyKind::Regularization => run_regularization(plan)?,
        StudyKind::Hyperparam => run_hyperparam(plan)?,
        StudyKind::McAverage => return mc_average_check(plan),
        StudyKind::BoundCoverage => {
            let kind = plan
                .bound
                .ok_or_else(|| Error::Validation("bound coverage needs a bound kind".into()))?;
            return bound_coverage_check(plan, kind);
        }
    };
    base_provenance(&mut table, plan);
    Ok(table)
}

fn run_partition_sweep(plan: &ExperimentPlan) -> Result<ReportTable> {
    let ctx = build_context(plan)?;
    let analytic = matches!(plan.model, DataModel::IsoGaussian);
    let mut header = vec!["p1", "mean_mse", "median_mse", "mean_training_error"];
    if analytic {
        header.push("analytic_avg_error");
    }
    let mut table = ReportTable::new(header);
    if let Some(label) = ctx.feature_source {
        table.note("feature_source", label);
    }
    let config = plan.solver_config(plan.lambda, plan.effective_subproblem());
    for &p1 in &plan.p1_values {
        let sizes = plan.partition_for(p1)?;
        let spec = PartitionSpec::new(sizes.clone())?;
        let results = parallel_trials(plan, |_, mut rng| {
            let trial = draw_trial(&ctx, plan.n, plan.effective_test_rows(), &mut rng)?;
            let data = training_set(&trial, &ctx.ground_truth, plan.noise_variance);
            let traj = run_cocoa(&data, &spec, &config)?;
            let estimate = traj.final_estimate();
            Ok((
                empirical_mse(&trial.test, &ctx.ground_truth, estimate),
                training_error(&data.regressors, &ctx.ground_truth, estimate),
            ))
        })?;
        let mses: Vec<f64> = results.iter().map(|r| r.0).collect();
        let train_errors: Vec<f64> = results.iter().map(|r| r.1).collect();
        let mut row = vec![
            Value::Int(p1 as i64),
            Value::Float(mean(&mses)),
            Value::Float(median(&mses)),
            Value::Float(mean(&train_errors)),
        ];
        if analytic {
            let dims = PartitionDims::new(plan.n, sizes)?;
            let norms: Vec<f64> = spec
                .split_vector(&ctx.ground_truth)?
                .iter()
                .map(Vector::norm_squared)
                .collect();
            let noise_trace = plan.n as f64 * plan.noise_variance;
            row.push(Value::Float(avg_gen_error(&dims, &norms, noise_trace)?.total));
        }
        table.push_row(row);
    }
    Ok(table)
}

fn run_spectral(plan: &ExperimentPlan) -> Result<ReportTable> {
    let ctx = build_context(plan)?;
    let mut table = ReportTable::new(["p1", "trial", "b_norm", "mse"]);
    table.note("ordering", "b_norm descending, ties broken by trial index");
    let config = plan.solver_config(plan.lambda, plan.effective_subproblem());
    for &p1 in &plan.p1_values {
        let spec = PartitionSpec::new(plan.partition_for(p1)?)?;
        let mut results = parallel_trials(plan, |trial, mut rng| {
            let data_rows = draw_trial(&ctx, plan.n, plan.effective_test_rows(), &mut rng)?;
            let data = training_set(&data_rows, &ctx.ground_truth, plan.noise_variance);
            let traj = run_cocoa(&data, &spec, &config)?;
            let mse = empirical_mse(&data_rows.test, &ctx.ground_truth, traj.final_estimate());
            let op = iteration_matrix(&data.regressors, &spec)?;
            Ok((trial, spectral_norm(&op.b)?, mse))
        })?;
        results.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (trial, b_norm, mse) in results {
            table.push_row(vec![
                Value::Int(p1 as i64),
                Value::Int(trial as i64),
                Value::Float(b_norm),
                Value::Float(mse),
            ]);
        }
    }
    Ok(table)
}

fn per_iteration_mse(
    traj_estimates: &[Vector],
    test: &Matrix,
    x: &Vector,
) -> Vec<f64> {
    traj_estimates
        .iter()
        .map(|estimate| empirical_mse(test, x, estimate))
        .collect()
}

fn run_convergence(plan: &ExperimentPlan) -> Result<ReportTable> {
    let ctx = build_context(plan)?;
    let mut table = ReportTable::new(["p1", "iteration", "mean_mse"]);
    let config = plan.solver_config(plan.lambda, plan.effective_subproblem());
    for &p1 in &plan.p1_values {
        let spec = PartitionSpec::new(plan.partition_for(p1)?)?;
        let per_trial = parallel_trials(plan, |_, mut rng| {
            let trial = draw_trial(&ctx, plan.n, plan.effective_test_rows(), &mut rng)?;
            let data = training_set(&trial, &ctx.ground_truth, plan.noise_variance);
            let traj = run_cocoa(&data, &spec, &config)?;
            Ok(per_iteration_mse(&traj.estimates, &trial.test, &ctx.ground_truth))
        })?;
        for t in 0..=plan.iterations {
            let at_t: Vec<f64> = per_trial.iter().map(|curve| curve[t]).collect();
            table.push_row(vec![
                Value::Int(p1 as i64),
                Value::Int(t as i64),
                Value::Float(mean(&at_t)),
            ]);
        }
    }
    Ok(table)
}

fn run_noise(plan: &ExperimentPlan) -> Result<ReportTable> {
    let ctx = build_context(plan)?;
    let mut table = ReportTable::new(["p1", "noise_variance", "mean_mse"]);
    let config = plan.solver_config(plan.lambda, plan.effective_subproblem());
    for &p1 in &plan.p1_values {
        let spec = PartitionSpec::new(plan.partition_for(p1)?)?;
        let per_trial = parallel_trials(plan, |_, mut rng| {
            let trial = draw_trial(&ctx, plan.n, plan.effective_test_rows(), &mut rng)?;
            plan.noise_grid
                .iter()
                .map(|&variance| {
                    let data = training_set(&trial, &ctx.ground_truth, variance);
                    let traj = run_cocoa(&data, &spec, &config)?;
                    Ok(empirical_mse(
                        &trial.test,
                        &ctx.ground_truth,
                        traj.final_estimate(),
                    ))
                })
                .collect::<Result<Vec<f64>>>()
        })?;
        for (idx, &variance) in plan.noise_grid.iter().enumerate() {
            let at_level: Vec<f64> = per_trial.iter().map(|r| r[idx]).collect();
            table.push_row(vec![
                Value::Int(p1 as i64),
                Value::Float(variance),
                Value::Float(mean(&at_level)),
            ]);
        }
    }
    Ok(table)
}

fn run_regularization(plan: &ExperimentPlan) -> Result<ReportTable> {
    let ctx = build_context(plan)?;
    let mut table = ReportTable::new(["p1", "lambda", "mean_mse", "mean_centralized_mse"]);
    for &p1 in &plan.p1_values {
        let spec = PartitionSpec::new(plan.partition_for(p1)?)?;
        let per_trial = parallel_trials(plan, |_, mut rng| {
            let trial = draw_trial(&ctx, plan.n, plan.effective_test_rows(), &mut rng)?;
            let data = training_set(&trial, &ctx.ground_truth, plan.noise_variance);
            plan.lambda_grid
                .iter()
                .map(|&lambda| {
                    let config = plan.solver_config(lambda, plan.effective_subproblem());
                    let traj = run_cocoa(&data, &spec, &config)?;
                    let mse =
                        empirical_mse(&trial.test, &ctx.ground_truth, traj.final_estimate());
                    let central =
                        centralized_solve(&data.regressors, &data.observations, lambda)?;
                    let central_mse = empirical_mse(&trial.test, &ctx.ground_truth, &central);
                    Ok((mse, central_mse))
                })
                .collect::<Result<Vec<_>>>()
        })?;
        for (idx, &lambda) in plan.lambda_grid.iter().enumerate() {
            let mses: Vec<f64> = per_trial.iter().map(|r| r[idx].0).collect();
            let central: Vec<f64> = per_trial.iter().map(|r| r[idx].1).collect();
            table.push_row(vec![
                Value::Int(p1 as i64),
                Value::Float(lambda),
                Value::Float(mean(&mses)),
                Value::Float(mean(&central)),
            ]);
        }
    }
    Ok(table)
}

fn run_hyperparam(plan: &ExperimentPlan) -> Result<ReportTable> {
    let ctx = build_context(plan)?;
    let mut table = ReportTable::new(["subproblem", "iteration", "mean_mse"]);
    let p1 = *plan
        .p1_values
        .first()
        .ok_or_else(|| Error::Validation("hyperparam study needs a p1 value".into()))?;
    let spec = PartitionSpec::new(plan.partition_for(p1)?)?;
    table.note("p1", p1);
    let per_trial = parallel_trials(plan, |_, mut rng| {
        let trial = draw_trial(&ctx, plan.n, plan.effective_test_rows(), &mut rng)?;
        let data = training_set(&trial, &ctx.ground_truth, plan.noise_variance);
        plan.subproblem_grid
            .iter()
            .map(|&subproblem| {
                let config = plan.solver_config(plan.lambda, subproblem);
                let traj = run_cocoa(&data, &spec, &config)?;
                Ok(per_iteration_mse(
                    &traj.estimates,
                    &trial.test,
                    &ctx.ground_truth,
                ))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    for (idx, &subproblem) in plan.subproblem_grid.iter().enumerate() {
        for t in 0..=plan.iterations {
            let at_t: Vec<f64> = per_trial.iter().map(|r| r[idx][t]).collect();
            table.push_row(vec![
                Value::Float(subproblem),
                Value::Int(t as i64),
                Value::Float(mean(&at_t)),
            ]);
        }
    }
    Ok(table)
}

/// Monte Carlo audit of the closed-form average generalization error of
/// the first iterate, using a median-of-means estimate.
///
/// Refuses partitions with any `|p_k − n| < 10`: there the per-draw error
/// is heavy-tailed (the closed form itself diverges within one of `n`),
/// so no trial budget gives a stable estimate.
pub fn mc_average_check(plan: &ExperimentPlan) -> Result<ReportTable> {
    plan.validate()?;
    if !matches!(plan.model, DataModel::IsoGaussian) {
        return Err(Error::Validation(
            "the average-error check applies to the isotropic Gaussian model".into(),
        ));
    }
    let ctx = build_context(plan)?;
    let mut table = ReportTable::new(["p1", "mc_estimate", "analytic", "rel_error"]);
    base_provenance(&mut table, plan);
    table.note("estimator", format!("median of means, {MEDIAN_OF_MEANS_BLOCKS} blocks"));
    for &p1 in &plan.p1_values {
        let sizes = plan.partition_for(p1)?;
        if let Some(&bad) = sizes.iter().find(|&&pk| pk.abs_diff(plan.n) < 10) {
            return Err(Error::Validation(format!(
                "block size {bad} is within 10 of n = {}; the per-draw error is \
                 heavy-tailed there and the closed form diverges near square \
                 blocks, so the Monte Carlo mean would not converge",
                plan.n
            )));
        }
        let spec = PartitionSpec::new(sizes.clone())?;
        let kappas = parallel_trials(plan, |_, mut rng| {
            let trial = draw_trial(&ctx, plan.n, 0, &mut rng)?;
            let data = training_set(&trial, &ctx.ground_truth, plan.noise_variance);
            let first = first_iterate(&data, &spec)?;
            Ok((&ctx.ground_truth - first).norm_squared())
        })?;
        let mc = median_of_means(&kappas, MEDIAN_OF_MEANS_BLOCKS);
        let dims = PartitionDims::new(plan.n, sizes)?;
        let norms: Vec<f64> = spec
            .split_vector(&ctx.ground_truth)?
            .iter()
            .map(Vector::norm_squared)
            .collect();
        let analytic =
            avg_gen_error(&dims, &norms, plan.n as f64 * plan.noise_variance)?.total;
        let rel_error = if analytic > 0.0 {
            (mc - analytic).abs() / analytic
        } else {
            mc
        };
        table.push_row(vec![
            Value::Int(p1 as i64),
            Value::Float(mc),
            Value::Float(analytic),
            Value::Float(rel_error),
        ]);
    }
    Ok(table)
}

/// First iterate `x̂¹ = (1/K) Ā y` under the safe parameter choice.
fn first_iterate(data: &TrainingSet, spec: &PartitionSpec) -> Result<Vector> {
    let blocks = partition_columns(&data.regressors, spec)?;
    let k = spec.num_blocks() as f64;
    let mut estimate = Vector::zeros(data.regressors.ncols());
    let mut offset = 0;
    for block in &blocks {
        let local = pseudoinverse(block, DEFAULT_SV_CUTOFF)? * &data.observations / k;
        estimate.rows_mut(offset, block.ncols()).copy_from(&local);
        offset += block.ncols();
    }
    Ok(estimate)
}

struct BoundEvaluation {
    beta: f64,
    rho: f64,
    /// Lower interval endpoint for the singular-value kind.
    lower: Option<f64>,
    sizes: Vec<usize>,
    q: Vec<f64>,
    coverage_model: Option<RegressorModel>,
}

fn expand_per_block(list: &[f64], k: usize, what: &str, default: f64) -> Result<Vec<f64>> {
    match list.len() {
        0 => Ok(vec![default; k]),
        1 => Ok(vec![list[0]; k]),
        len if len == k => Ok(list.to_vec()),
        len => Err(Error::Validation(format!(
            "{what} list has {len} entries for {k} blocks"
        ))),
    }
}

fn block_spectra(sigma: &Matrix, sizes: &[usize]) -> Vec<BlockSpectrum> {
    let mut spectra = Vec::with_capacity(sizes.len());
    let mut offset = 0;
    for &size in sizes {
        let block = sigma.view((offset, offset), (size, size)).into_owned();
        let eigen = SymmetricEigen::new(block);
        spectra.push(BlockSpectrum {
            max: eigen.eigenvalues.max(),
            min: eigen.eigenvalues.min(),
        });
        offset += size;
    }
    spectra
}

fn evaluate_bound(plan: &ExperimentPlan, kind: BoundKind) -> Result<BoundEvaluation> {
    if kind == BoundKind::TracyWidom {
        let q = *plan
            .q
            .first()
            .ok_or_else(|| Error::Validation("the singular-value check needs a q value".into()))?;
        let interval = tracy_widom_interval(plan.n, plan.p, q);
        return Ok(BoundEvaluation {
            beta: interval.upper,
            rho: interval.probability,
            lower: Some(interval.lower),
            sizes: vec![plan.p],
            q: vec![q],
            coverage_model: None,
        });
    }

    let sizes = plan.fixed_partition()?;
    let k = sizes.len();
    let dims = PartitionDims::new(plan.n, sizes.clone())?;
    let q = expand_per_block(&plan.q, k, "q", 2.0)?;
    let q_bar = expand_per_block(&plan.q_bar, k, "q_bar", 0.0)?;

    let (result, model) = match kind {
        BoundKind::IsoGaussian => (
            beta_iso_gaussian(&dims, &q)?,
            RegressorModel::IsoGaussian { dim: plan.p },
        ),
        BoundKind::IsoGaussianTall => (
            beta_iso_gaussian_tall(&dims, &q)?,
            RegressorModel::IsoGaussian { dim: plan.p },
        ),
        BoundKind::CorrGaussian | BoundKind::CorrGaussianTall => {
            let decay = match &plan.model {
                DataModel::CorrGaussian { decay_ratio } => *decay_ratio,
                _ => DEFAULT_COVARIANCE_DECAY,
            };
            let sigma = build_paper_covariance(plan.p, decay, &mut master_rng(plan.master_seed))?;
            let inputs = BoundInputs::new(
                dims.clone(),
                q.clone(),
                q_bar,
                plan.absolute_constant,
                vec![gaussian_subgaussian_constant(); k],
                block_spectra(&sigma, &sizes),
            )?;
            let result = match kind {
                BoundKind::CorrGaussian => beta_corr_gaussian(&inputs)?,
                _ => beta_corr_gaussian_tall(&inputs)?,
            };
            (result, RegressorModel::correlated(sigma)?)
        }
        BoundKind::SubGaussian | BoundKind::SubGaussianTall => {
            let l = expand_per_block(
                &plan.subgaussian_constants,
                k,
                "subgaussian constant",
                gaussian_subgaussian_constant(),
            )?;
            let inputs = BoundInputs::new(
                dims.clone(),
                q.clone(),
                q_bar,
                plan.absolute_constant,
                l,
                vec![BlockSpectrum::isotropic(); k],
            )?;
            let result = match kind {
                BoundKind::SubGaussian => beta_sub_gaussian(&inputs)?,
                _ => beta_sub_gaussian_tall(&inputs)?,
            };
            (result, RegressorModel::Bernoulli { dim: plan.p })
        }
        BoundKind::TracyWidom => unreachable!(),
    };
    Ok(BoundEvaluation {
        beta: result.beta,
        rho: result.success_probability,
        lower: None,
        sizes,
        q,
        coverage_model: Some(model),
    })
}

/// Empirical coverage of one probabilistic bound: the fraction of data
/// draws on which the bounded quantity stays within its bound.
pub fn bound_coverage_check(plan: &ExperimentPlan, kind: BoundKind) -> Result<ReportTable> {
    if plan.trials == 0 {
        return Err(Error::Validation("trials must be >= 1".into()));
    }
    if plan.n == 0 || plan.p == 0 {
        return Err(Error::Validation("n and p must be >= 1".into()));
    }
    let eval = evaluate_bound(plan, kind)?;
    if eval.rho == 0.0 {
        return Err(Error::Validation(format!(
            "bound '{}' has success probability 0 at these parameters; the \
             coverage check would be vacuous",
            kind.name()
        )));
    }
    let vacuous = eval.beta.is_infinite() || eval.lower.is_some_and(|l| l <= 0.0);

    let covered: Vec<bool> = match kind {
        BoundKind::TracyWidom => parallel_trials(plan, |_, mut rng| {
            let m = crate::numkern::sample_standard_gaussian(plan.n, plan.p, &mut rng);
            let fact = svd(&m)?;
            let sigma_max = fact.sigma_max();
            let sigma_min = *fact.singular_values.last().expect("nonempty spectrum");
            Ok(sigma_min >= eval.lower.expect("interval kind") && sigma_max <= eval.beta)
        })?,
        _ => {
            let model = eval.coverage_model.as_ref().expect("operator kind");
            let spec = PartitionSpec::new(eval.sizes.clone())?;
            parallel_trials(plan, |_, mut rng| {
                let a = sample_regressors(model, plan.n, &mut rng)?;
                let op = iteration_matrix(&a, &spec)?;
                Ok(spectral_norm(&op.b)? <= eval.beta)
            })?
        }
    };
    let coverage = covered.iter().filter(|&&c| c).count() as f64 / plan.trials as f64;

    let mut table = ReportTable::new([
        "bound_name",
        "beta",
        "rho",
        "empirical_coverage",
        "trials",
        "vacuous",
    ]);
    base_provenance(&mut table, plan);
    table.note("partition", join_list(&eval.sizes));
    table.note("q", join_floats(&eval.q));
    if let Some(lower) = eval.lower {
        table.note("interval_lower", super::report::format_float(lower));
    }
    table.push_row(vec![
        Value::Text(kind.name().into()),
        Value::Float(eval.beta),
        Value::Float(eval.rho),
        Value::Float(coverage),
        Value::Int(plan.trials as i64),
        Value::Int(i64::from(vacuous)),
    ]);
    Ok(table)
}

/// Pure bound calculator: evaluates the requested bounds at the plan's
/// parameters without drawing any data. With `lenient` set, kinds whose
/// preconditions fail are skipped and noted instead of failing the call.
pub fn bound_report(
    plan: &ExperimentPlan,
    kinds: &[BoundKind],
    lenient: bool,
) -> Result<ReportTable> {
    let mut table = ReportTable::new([
        "bound_name",
        "K",
        "n",
        "p_list",
        "q_list",
        "C",
        "beta",
        "rho",
    ]);
    base_provenance(&mut table, plan);
    for &kind in kinds {
        let eval = match evaluate_bound(plan, kind) {
            Ok(eval) => eval,
            Err(e) if lenient => {
                table.note(format!("skipped_{}", kind.name()), e.to_string());
                continue;
            }
            Err(e) => return Err(e),
        };
        table.push_row(vec![
            Value::Text(kind.name().into()),
            Value::Int(eval.sizes.len() as i64),
            Value::Int(plan.n as i64),
            Value::Text(join_list(&eval.sizes)),
            Value::Text(join_floats(&eval.q)),
            Value::Float(plan.absolute_constant),
            Value::Float(eval.beta),
            Value::Float(eval.rho),
        ]);
    }
    Ok(table)
}

fn join_list(values: &[usize]) -> String {
    values
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| super::report::format_float(*v))
        .collect::<Vec<_>>()
        .join(";")
}
