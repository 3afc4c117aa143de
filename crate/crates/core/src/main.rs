//! Command line front end for the distributed least-squares toolkit.
//!
//! Exit codes: 0 on success, 2 on validation/usage errors, 3 on I/O
//! failures. Report tables go to `--out` as CSV, or to stdout when no
//! path is given; plan provenance is echoed to stderr as `# key = value`
//! lines so stdout stays machine-readable.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use distls::cocoa::{solve_system, CocoaConfig};
use distls::datagen::{
    build_paper_covariance, sample_ground_truth, synthesize, PartitionSpec, RegressorModel,
};
use distls::harness::{
    bound_coverage_check, bound_report, emit_csv, master_rng, mc_average_check, read_matrix_csv,
    run_experiment, trial_rng, write_matrix_csv, write_trajectory_csv, BoundKind, DataModel,
    ExperimentPlan, PlanOverrides, ReportTable, StudyKind,
};
use distls::{Error, Matrix, Result, Vector};

#[derive(Parser)]
#[command(
    name = "distls",
    version,
    about = "Feature-partitioned distributed least squares: solver, error bounds, Monte Carlo studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and store it as CSV matrices
    GenData(GenDataArgs),
    /// Run the solver on a stored dataset and export the trajectory
    Solve(SolveArgs),
    /// Final error versus the size of the first block
    Sweep(StudyArgs),
    /// Per-realization operator norm against the empirical error
    Spectral(StudyArgs),
    /// Error evaluated at every iteration
    Converge(StudyArgs),
    /// Error across training-noise levels
    Noise(StudyArgs),
    /// Error across ridge penalties with a centralized reference
    Regularize(StudyArgs),
    /// Convergence across subproblem parameters
    Hyperparam(StudyArgs),
    /// Monte Carlo check of the closed-form average error
    McAverage(StudyArgs),
    /// Empirical coverage of a probabilistic bound
    BoundCoverage(StudyArgs),
    /// Evaluate bounds at given parameters without sampling
    Bounds(StudyArgs),
}

#[derive(Args, Debug, Default)]
struct StudyArgs {
    /// TOML plan file; explicit flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed of the deterministic RNG tree
    #[arg(long)]
    seed: Option<u64>,
    /// Number of Monte Carlo trials
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Data model: iso | corr | bernoulli | features
    #[arg(long)]
    model: Option<String>,
    /// Training sample count
    #[arg(long)]
    n: Option<usize>,
    /// Total model dimension
    #[arg(long)]
    p: Option<usize>,
    /// Number of nodes K
    #[arg(long)]
    num_nodes: Option<usize>,
    /// First-block sizes to sweep, comma separated
    #[arg(long, value_delimiter = ',')]
    p1: Option<Vec<usize>>,
    /// Explicit block sizes, comma separated
    #[arg(long, value_delimiter = ',')]
    partition: Option<Vec<usize>>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    aggregation: Option<f64>,
    #[arg(long)]
    subproblem: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    noise_variance: Option<f64>,
    /// Test rows per trial (default 100 n)
    #[arg(long)]
    test_rows: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    noise_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    lambda_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    subproblem_grid: Option<Vec<f64>>,
    /// Eigenvalue decay ratio of the correlated covariance
    #[arg(long)]
    decay_ratio: Option<f64>,
    /// Source dimension of the synthetic feature corpus
    #[arg(long)]
    source_dim: Option<usize>,
    /// Frequency bandwidth of the random feature map
    #[arg(long)]
    bandwidth: Option<f64>,
    /// IDX image file feeding the feature map
    #[arg(long)]
    images: Option<PathBuf>,
    /// IDX label file paired with --images
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Bound kind: iso | iso-tall | corr | corr-tall | subg | subg-tall |
    /// tracy-widom (or `all` for the bounds calculator)
    #[arg(long)]
    bound: Option<String>,
    /// Tall-branch tail parameters, comma separated (one per block or one
    /// shared value)
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<f64>>,
    /// Broad-branch tail parameters
    #[arg(long, value_delimiter = ',')]
    q_bar: Option<Vec<f64>>,
    /// Absolute constant of the concentration bounds
    #[arg(long)]
    absolute_constant: Option<f64>,
    /// Per-block sub-gaussian norm factors
    #[arg(long, value_delimiter = ',')]
    subgaussian_constants: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct GenDataArgs {
    /// Data model: iso | corr | bernoulli
    #[arg(long, default_value = "iso")]
    model: String,
    #[arg(long, default_value_t = 75)]
    n: usize,
    #[arg(long, default_value_t = 200)]
    p: usize,
    #[arg(long, default_value_t = 0.0)]
    noise_variance: f64,
    #[arg(long)]
    decay_ratio: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Path prefix of the emitted CSV files
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Path prefix written by gen-data
    #[arg(long)]
    data: PathBuf,
    /// Solver config file (keys: lambda, aggregation, subproblem,
    /// iterations, seed, partition)
    #[arg(long)]
    config: PathBuf,
    /// Trajectory CSV path (default <data>.trajectory.csv)
    #[arg(long)]
    out: Option<PathBuf>,
}

/// On-disk solver configuration.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverFileConfig {
    #[serde(default)]
    lambda: f64,
    #[serde(default = "default_aggregation")]
    aggregation: f64,
    subproblem: Option<f64>,
    #[serde(default = "default_iterations")]
    iterations: usize,
    #[serde(default)]
    seed: u64,
    partition: Vec<usize>,
}

fn default_aggregation() -> f64 {
    1.0
}

fn default_iterations() -> usize {
    1000
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Io { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData(args) => gen_data(args),
        Command::Solve(args) => solve(args),
        Command::Sweep(args) => study(StudyKind::PartitionSweep, args),
        Command::Spectral(args) => study(StudyKind::Spectral, args),
        Command::Converge(args) => study(StudyKind::Convergence, args),
        Command::Noise(args) => study(StudyKind::Noise, args),
        Command::Regularize(args) => study(StudyKind::Regularization, args),
        Command::Hyperparam(args) => study(StudyKind::Hyperparam, args),
        Command::McAverage(args) => study(StudyKind::McAverage, args),
        Command::BoundCoverage(args) => study(StudyKind::BoundCoverage, args),
        Command::Bounds(args) => bounds(args),
    }
}

/// Subcommand-specific defaults, applied before config file and flags.
fn default_plan(study: StudyKind) -> ExperimentPlan {
    let mut plan = ExperimentPlan::new(study, DataModel::IsoGaussian);
    match study {
        StudyKind::Convergence => plan.iterations = 30,
        StudyKind::Hyperparam => {
            plan.iterations = 50;
            plan.p1_values = vec![25];
        }
        StudyKind::Regularization => plan.noise_variance = 1.0,
        StudyKind::McAverage => plan.trials = 5000,
        StudyKind::BoundCoverage => {
            plan.trials = 2000;
            plan.q = vec![2.0];
        }
        _ => {}
    }
    plan
}

fn build_plan(study: StudyKind, args: &StudyArgs) -> Result<ExperimentPlan> {
    let mut plan = default_plan(study);
    if let Some(config) = &args.config {
        let overrides = PlanOverrides::from_file(config)?;
        overrides.apply_to(&mut plan)?;
        if plan.study != study {
            return Err(Error::Validation(format!(
                "config study '{}' conflicts with the '{}' subcommand",
                plan.study.name(),
                study.name()
            )));
        }
    }
    let flag_overrides = PlanOverrides {
        study: None,
        model: args.model.clone(),
        decay_ratio: args.decay_ratio,
        source_dim: args.source_dim,
        bandwidth: args.bandwidth,
        images: args.images.clone(),
        labels: args.labels.clone(),
        n: args.n,
        p: args.p,
        num_nodes: args.num_nodes,
        partition: args.partition.clone(),
        p1_values: args.p1.clone(),
        noise_grid: args.noise_grid.clone(),
        lambda_grid: args.lambda_grid.clone(),
        subproblem_grid: args.subproblem_grid.clone(),
        trials: args.trials,
        test_rows: args.test_rows,
        seed: args.seed,
        lambda: args.lambda,
        aggregation: args.aggregation,
        subproblem: args.subproblem,
        iterations: args.iterations,
        noise_variance: args.noise_variance,
        bound: match &args.bound {
            Some(b) if b != "all" => Some(b.clone()),
            _ => None,
        },
        q: args.q.clone(),
        q_bar: args.q_bar.clone(),
        absolute_constant: args.absolute_constant,
        subgaussian_constants: args.subgaussian_constants.clone(),
    };
    flag_overrides.apply_to(&mut plan)?;
    if let Some(warning) = plan
        .solver_config(plan.lambda, plan.effective_subproblem())
        .validate(plan.num_nodes)
        .map_err(|e| Error::Validation(e.to_string()))?
    {
        eprintln!("warning: {warning}");
    }
    Ok(plan)
}

fn study(kind: StudyKind, args: StudyArgs) -> Result<()> {
    let plan = build_plan(kind, &args)?;
    let table = match kind {
        StudyKind::McAverage => mc_average_check(&plan)?,
        StudyKind::BoundCoverage => {
            let bound = plan
                .bound
                .ok_or_else(|| Error::Validation("bound coverage needs --bound".into()))?;
            bound_coverage_check(&plan, bound)?
        }
        _ => run_experiment(&plan)?,
    };
    deliver(&table, args.out.as_deref())
}

fn bounds(args: StudyArgs) -> Result<()> {
    let plan = build_plan(StudyKind::BoundCoverage, &args)?;
    let (kinds, lenient): (Vec<BoundKind>, bool) = match args.bound.as_deref() {
        None | Some("all") => (BoundKind::all().to_vec(), true),
        Some(name) => (vec![BoundKind::parse(name)?], false),
    };
    let table = bound_report(&plan, &kinds, lenient)?;
    deliver(&table, args.out.as_deref())
}

fn deliver(table: &ReportTable, out: Option<&Path>) -> Result<()> {
    for (key, value) in &table.provenance {
        eprintln!("# {key} = {value}");
    }
    match out {
        Some(path) => emit_csv(table, path),
        None => {
            print!("{}", table.to_csv());
            Ok(())
        }
    }
}

fn gen_data(args: GenDataArgs) -> Result<()> {
    let mut rng0 = master_rng(args.seed);
    let model = match args.model.as_str() {
        "iso" => RegressorModel::IsoGaussian { dim: args.p },
        "corr" => {
            let decay = args
                .decay_ratio
                .unwrap_or(distls::datagen::DEFAULT_COVARIANCE_DECAY);
            RegressorModel::correlated(build_paper_covariance(args.p, decay, &mut rng0)?)?
        }
        "bernoulli" => RegressorModel::Bernoulli { dim: args.p },
        other => {
            return Err(Error::Validation(format!(
                "gen-data supports iso | corr | bernoulli, got '{other}'"
            )))
        }
    };
    let ground_truth = sample_ground_truth(args.p, &mut rng0);
    let mut trial = trial_rng(args.seed, 0);
    let set = synthesize(&model, &ground_truth, args.n, args.noise_variance, &mut trial)?;

    write_matrix_csv(&set.regressors, &suffixed(&args.out, "regressors"))?;
    write_matrix_csv(&as_column(&set.observations), &suffixed(&args.out, "observations"))?;
    write_matrix_csv(&as_column(&set.ground_truth), &suffixed(&args.out, "ground_truth"))?;
    write_matrix_csv(&as_column(&set.noise), &suffixed(&args.out, "noise"))?;
    eprintln!(
        "# wrote {}.{{regressors,observations,ground_truth,noise}}.csv",
        args.out.display()
    );
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let text =
        std::fs::read_to_string(&args.config).map_err(|e| Error::io(&args.config, e))?;
    let file: SolverFileConfig = toml::from_str(&text)
        .map_err(|e| Error::Validation(format!("{}: {e}", args.config.display())))?;

    let regressors = read_matrix_csv(&suffixed(&args.data, "regressors"))?;
    let observations = column_vector(read_matrix_csv(&suffixed(&args.data, "observations"))?)?;

    let spec = PartitionSpec::new(file.partition.clone())?;
    if spec.total() != regressors.ncols() {
        return Err(Error::Validation(format!(
            "partition sums to {} but the dataset has {} columns",
            spec.total(),
            regressors.ncols()
        )));
    }
    let config = CocoaConfig {
        lambda: file.lambda,
        aggregation: file.aggregation,
        subproblem: file.subproblem.unwrap_or(spec.num_blocks() as f64),
        iterations: file.iterations,
        early_stop_tol: None,
    };
    if let Some(warning) = config.validate(spec.num_blocks())? {
        eprintln!("warning: {warning}");
    }
    let trajectory = solve_system(&regressors, &observations, &spec, &config)?;
    let out = args
        .out
        .unwrap_or_else(|| suffixed(&args.data, "trajectory"));
    write_trajectory_csv(&trajectory, &out)?;
    eprintln!(
        "# seed = {} | rounds = {} | wrote {}",
        file.seed,
        trajectory.estimates.len() - 1,
        out.display()
    );
    Ok(())
}

fn suffixed(prefix: &Path, part: &str) -> PathBuf {
    let mut name = prefix.file_name().unwrap_or_default().to_os_string();
    name.push(format!(".{part}.csv"));
    prefix.with_file_name(name)
}

fn as_column(v: &Vector) -> Matrix {
    Matrix::from_column_slice(v.len(), 1, v.as_slice())
}

fn column_vector(m: Matrix) -> Result<Vector> {
    if m.ncols() != 1 {
        return Err(Error::Format(format!(
            "expected a single-column matrix, found {} columns",
            m.ncols()
        )));
    }
    Ok(Vector::from_column_slice(m.as_slice()))
}
