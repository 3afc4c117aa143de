//! Feature-partitioned CoCoA solver for regularized least squares.
//!
//! The model `min_x (1/2)‖y − A x‖² + (λ/2)‖x‖²` is solved by `K` nodes,
//! each owning a column block `A_k` and the matching slice `x̂_k` of the
//! estimate. Every round the coordinator broadcasts the mean share
//! `v̄ = (1/K) Σ v_k`, each node solves a local quadratic subproblem via a
//! pseudoinverse, and the updated shares are averaged at the barrier.
//!
//! With `λ = 0` and `σ̄ = γ̄ K` the rounds reduce to the affine recursion
//! `x̂^{t+1} = B x̂^t + (1/K) Ā y` with `B = I − (1/K) Ā A`, where `Ā`
//! stacks the per-block pseudoinverses. [`iteration_matrix`] materializes
//! that operator so trajectories and error vectors can be cross-checked in
//! closed form.

use rayon::prelude::*;

use crate::datagen::{partition_columns, PartitionSpec, TrainingSet};
use crate::error::{Error, Result};
use crate::numkern::{ensure_finite_vec, pseudoinverse, DEFAULT_SV_CUTOFF};
use crate::{Matrix, Vector};

/// Smoothness constant of the quadratic loss term.
pub const SMOOTHNESS: f64 = 1.0;

/// Solver hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CocoaConfig {
    /// Ridge penalty λ ≥ 0.
    pub lambda: f64,
    /// Aggregation parameter γ̄ ∈ (0, 1].
    pub aggregation: f64,
    /// Subproblem parameter σ̄ > 0.
    pub subproblem: f64,
    /// Number of rounds T.
    pub iterations: usize,
    /// Stop once `‖Δx‖` drops below this threshold. Off by default so
    /// trajectories stay comparable across runs with a fixed T.
    pub early_stop_tol: Option<f64>,
}

impl CocoaConfig {
    /// The safe default choice `γ̄ = 1`, `σ̄ = K`.
    pub fn safe_defaults(num_nodes: usize, lambda: f64, iterations: usize) -> Self {
        CocoaConfig {
            lambda,
            aggregation: 1.0,
            subproblem: num_nodes as f64,
            iterations,
            early_stop_tol: None,
        }
    }

    /// Checks hard invariants; returns a warning when `σ̄ < γ̄ K`, which is
    /// outside the recommended convergence regime.
    pub fn validate(&self, num_nodes: usize) -> Result<Option<String>> {
        if self.aggregation.is_nan() || self.aggregation <= 0.0 || self.aggregation > 1.0 {
            return Err(Error::InvalidInput(format!(
                "aggregation must lie in (0, 1], got {}",
                self.aggregation
            )));
        }
        if self.subproblem.is_nan() || self.subproblem <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "subproblem parameter must be positive, got {}",
                self.subproblem
            )));
        }
        if self.lambda < 0.0 {
            return Err(Error::InvalidInput(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        let recommended = self.aggregation * num_nodes as f64;
        if self.subproblem < recommended {
            return Ok(Some(format!(
                "subproblem parameter {} is below the recommended aggregation*K = {}",
                self.subproblem, recommended
            )));
        }
        Ok(None)
    }
}

/// Per-node state: the local estimate slice and the share of the fit.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub node_id: usize,
    /// `x̂_k`, length `p_k`.
    pub local_estimate: Vector,
    /// `v_k`, length `n`.
    pub local_share: Vector,
}

impl NodeState {
    pub fn zeros(node_id: usize, block_size: usize, samples: usize) -> Self {
        NodeState {
            node_id,
            local_estimate: Vector::zeros(block_size),
            local_share: Vector::zeros(samples),
        }
    }
}

/// Coordinator-side state between barriers.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinatorState {
    /// `v̄`, the arithmetic mean of all node shares.
    pub mean_share: Vector,
    pub iteration: usize,
}

/// The closed-form iteration operator of the solver.
#[derive(Debug, Clone)]
pub struct IterationOperator {
    /// `B = I − (1/K) Ā A`, `p × p`.
    pub b: Matrix,
    /// `Ā`, the vertical stack of the block pseudoinverses `A_k⁺`, `p × n`.
    pub abar: Matrix,
    pub num_nodes: usize,
}

/// Recorded solver run: `estimates[t]` is the concatenated estimate `x̂^t`,
/// starting from `x̂^0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrajectory {
    pub estimates: Vec<Vector>,
    pub config: CocoaConfig,
    pub partition: PartitionSpec,
}

impl SolveTrajectory {
    pub fn final_estimate(&self) -> &Vector {
        self.estimates.last().expect("trajectory holds x̂^0")
    }
}

fn local_gain(a_k: &Matrix, config: &CocoaConfig) -> Result<Matrix> {
    let p_k = a_k.ncols();
    let mut gram = a_k.transpose() * a_k * config.subproblem;
    for j in 0..p_k {
        gram[(j, j)] += config.lambda;
    }
    pseudoinverse(&gram, DEFAULT_SV_CUTOFF)
}

fn local_update_with_gain(
    node: &NodeState,
    mean_share: &Vector,
    y: &Vector,
    a_k: &Matrix,
    gain: &Matrix,
    config: &CocoaConfig,
    num_nodes: usize,
) -> NodeState {
    let residual = y - mean_share;
    let objective_gradient = &node.local_estimate * config.lambda - a_k.transpose() * residual;
    let delta = -(gain * objective_gradient);
    let local_estimate = &node.local_estimate + &delta * config.aggregation;
    let local_share =
        mean_share + a_k * delta * (config.aggregation * num_nodes as f64);
    NodeState {
        node_id: node.node_id,
        local_estimate,
        local_share,
    }
}

/// One local round at node `k`: forms `c_k = λ x̂_k − A_kᵀ(y − v̄)`, solves
/// the local subproblem `Δx_k = −(σ̄ A_kᵀA_k + λ I)⁺ c_k`, then applies
/// `x̂_k ← x̂_k + γ̄ Δx_k` and `v_k ← v̄ + γ̄ K A_k Δx_k`.
pub fn local_update(
    node: &NodeState,
    mean_share: &Vector,
    y: &Vector,
    a_k: &Matrix,
    config: &CocoaConfig,
    num_nodes: usize,
) -> Result<NodeState> {
    if node.local_estimate.len() != a_k.ncols()
        || node.local_share.len() != a_k.nrows()
        || mean_share.len() != a_k.nrows()
        || y.len() != a_k.nrows()
    {
        return Err(Error::InvalidInput(
            "node state, shares and data block have inconsistent dimensions".into(),
        ));
    }
    ensure_finite_vec(mean_share, "mean share")?;
    ensure_finite_vec(y, "observations")?;
    let gain = local_gain(a_k, config)?;
    Ok(local_update_with_gain(
        node, mean_share, y, a_k, &gain, config, num_nodes,
    ))
}

/// Arithmetic mean of the node shares.
pub fn aggregate(shares: &[Vector]) -> Result<Vector> {
    let first = shares
        .first()
        .ok_or_else(|| Error::InvalidInput("cannot aggregate an empty share list".into()))?;
    if shares.iter().any(|s| s.len() != first.len()) {
        return Err(Error::InvalidInput("shares have unequal lengths".into()));
    }
    let mut sum = Vector::zeros(first.len());
    for s in shares {
        sum += s;
    }
    Ok(sum / shares.len() as f64)
}

/// Runs T rounds of the coordinator/worker loop on a training set,
/// recording `x̂^0 … x̂^T`.
pub fn run_cocoa(
    data: &TrainingSet,
    spec: &PartitionSpec,
    config: &CocoaConfig,
) -> Result<SolveTrajectory> {
    solve_system(&data.regressors, &data.observations, spec, config)
}

/// Runs the coordinator/worker loop on a raw `(A, y)` pair.
///
/// Node updates within a round are independent pure functions of the
/// broadcast share, so they run in parallel; the recorded trajectory is
/// identical regardless of scheduling because shares are reduced in node
/// order at the barrier.
pub fn solve_system(
    regressors: &Matrix,
    observations: &Vector,
    spec: &PartitionSpec,
    config: &CocoaConfig,
) -> Result<SolveTrajectory> {
    config.validate(spec.num_blocks())?;
    let blocks = partition_columns(regressors, spec)?;
    let n = regressors.nrows();
    let p = regressors.ncols();
    if observations.len() != n {
        return Err(Error::InvalidInput(
            "observation length does not match regressor rows".into(),
        ));
    }
    let gains = blocks
        .iter()
        .map(|a_k| local_gain(a_k, config))
        .collect::<Result<Vec<_>>>()?;
    let num_nodes = spec.num_blocks();
    let round_flops: usize = blocks.iter().map(|b| b.ncols() * (n + b.ncols())).sum();
    let parallel_rounds = num_nodes > 1 && round_flops >= 1 << 18;
    let mut nodes: Vec<NodeState> = blocks
        .iter()
        .enumerate()
        .map(|(k, a_k)| NodeState::zeros(k, a_k.ncols(), n))
        .collect();

    let concat = |nodes: &[NodeState]| {
        let mut x = Vector::zeros(p);
        let mut offset = 0;
        for node in nodes {
            x.rows_mut(offset, node.local_estimate.len())
                .copy_from(&node.local_estimate);
            offset += node.local_estimate.len();
        }
        x
    };

    let mut estimates = Vec::with_capacity(config.iterations + 1);
    estimates.push(concat(&nodes));
    for t in 0..config.iterations {
        let coordinator = CoordinatorState {
            mean_share: aggregate(
                &nodes.iter().map(|s| s.local_share.clone()).collect::<Vec<_>>(),
            )?,
            iteration: t,
        };
        let round = |(node, (a_k, gain)): (&NodeState, (&Matrix, &Matrix))| {
            local_update_with_gain(
                node,
                &coordinator.mean_share,
                observations,
                a_k,
                gain,
                config,
                num_nodes,
            )
        };
        // fork the node updates only when a round carries real work; both
        // paths reduce in node order and give identical bits
        let updated: Vec<NodeState> = if parallel_rounds {
            nodes
                .par_iter()
                .zip(blocks.par_iter().zip(gains.par_iter()))
                .map(round)
                .collect()
        } else {
            nodes.iter().zip(blocks.iter().zip(gains.iter())).map(round).collect()
        };
        let step: f64 = updated
            .iter()
            .zip(&nodes)
            .map(|(new, old)| (&new.local_estimate - &old.local_estimate).norm_squared())
            .sum::<f64>()
            .sqrt();
        nodes = updated;
        estimates.push(concat(&nodes));
        if let Some(tol) = config.early_stop_tol {
            // the recorded step is γ̄‖Δx‖, so compare against γ̄·tol
            if step < tol * config.aggregation {
                break;
            }
        }
    }
    Ok(SolveTrajectory {
        estimates,
        config: config.clone(),
        partition: spec.clone(),
    })
}

/// Builds `Ā` (stacked block pseudoinverses) and `B = I − (1/K) Ā A`.
pub fn iteration_matrix(a: &Matrix, spec: &PartitionSpec) -> Result<IterationOperator> {
    let blocks = partition_columns(a, spec)?;
    let p = a.ncols();
    let n = a.nrows();
    let mut abar = Matrix::zeros(p, n);
    let mut offset = 0;
    for a_k in &blocks {
        let pinv = pseudoinverse(a_k, DEFAULT_SV_CUTOFF)?;
        abar.rows_mut(offset, a_k.ncols()).copy_from(&pinv);
        offset += a_k.ncols();
    }
    let num_nodes = spec.num_blocks();
    let b = Matrix::identity(p, p) - &abar * a / num_nodes as f64;
    Ok(IterationOperator { b, abar, num_nodes })
}

/// One step of the affine recursion `x ↦ B x + (1/K) Ā y`.
pub fn step_recursion(current: &Vector, op: &IterationOperator, y: &Vector) -> Result<Vector> {
    if current.len() != op.b.ncols() || y.len() != op.abar.ncols() {
        return Err(Error::InvalidInput(
            "recursion state or observations have the wrong length".into(),
        ));
    }
    Ok(&op.b * current + &op.abar * y / op.num_nodes as f64)
}

/// Error vector after `t` rounds: `x̃^t = B^t x − R_t w` with
/// `R_t = (1/K) Σ_{i=0}^{t−1} B^i Ā`.
pub fn error_decomposition(
    op: &IterationOperator,
    t: usize,
    x: &Vector,
    w: &Vector,
) -> Result<Vector> {
    if x.len() != op.b.ncols() || w.len() != op.abar.ncols() {
        return Err(Error::InvalidInput(
            "parameter or noise vector has the wrong length".into(),
        ));
    }
    let mut signal = x.clone();
    for _ in 0..t {
        signal = &op.b * signal;
    }
    let mut noise_term = Vector::zeros(x.len());
    let mut term = &op.abar * w / op.num_nodes as f64;
    for _ in 0..t {
        noise_term += &term;
        term = &op.b * term;
    }
    Ok(signal - noise_term)
}

/// Centralized reference solution `(AᵀA + λ I)⁺ Aᵀ y`.
pub fn centralized_solve(a: &Matrix, y: &Vector, lambda: f64) -> Result<Vector> {
    if y.len() != a.nrows() {
        return Err(Error::InvalidInput(
            "observation length does not match regressor rows".into(),
        ));
    }
    if lambda < 0.0 {
        return Err(Error::InvalidInput("lambda must be >= 0".into()));
    }
    let p = a.ncols();
    let mut gram = a.transpose() * a;
    for j in 0..p {
        gram[(j, j)] += lambda;
    }
    Ok(pseudoinverse(&gram, DEFAULT_SV_CUTOFF)? * a.transpose() * y)
}

/// In-sample error `(1/n) ‖A (x − estimate)‖²`.
pub fn training_error(a: &Matrix, x: &Vector, estimate: &Vector) -> f64 {
    (a * (x - estimate)).norm_squared() / a.nrows() as f64
}

/// Whether `‖B² − B‖_F ≤ tol · max(1, ‖B‖_F)`.
pub fn is_projection(b: &Matrix, tol: f64) -> Result<bool> {
    if b.nrows() != b.ncols() {
        return Err(Error::InvalidInput("projection test needs a square matrix".into()));
    }
    let residual = (b * b - b).norm();
    Ok(residual <= tol * b.norm().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{sample_ground_truth, synthesize, RegressorModel};
    use crate::numkern::sample_standard_gaussian;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    fn iso_set(n: usize, p: usize, noise: f64, seed: u64) -> TrainingSet {
        let model = RegressorModel::IsoGaussian { dim: p };
        let mut r = rng(seed);
        let x = sample_ground_truth(p, &mut r);
        synthesize(&model, &x, n, noise, &mut r).unwrap()
    }

    /// Brute-force minimizer of the local subproblem objective
    /// `Δᵀ(σ̄/2 A_kᵀA_k + λ/2 I)Δ + c_kᵀΔ` through its dense normal
    /// equations, kept independent of the solver's pseudoinverse path.
    fn brute_force_local_delta(
        a_k: &Matrix,
        c_k: &Vector,
        lambda: f64,
        subproblem: f64,
    ) -> Vector {
        let p_k = a_k.ncols();
        let mut h = a_k.transpose() * a_k * subproblem;
        for j in 0..p_k {
            h[(j, j)] += lambda;
        }
        h.lu().solve(&(-c_k)).expect("positive definite for lambda > 0")
    }

    #[test]
    fn local_update_fixed_point_at_zero() {
        let a_k = sample_standard_gaussian(4, 3, &mut rng(0));
        let node = NodeState::zeros(0, 3, 4);
        let config = CocoaConfig::safe_defaults(2, 0.0, 1);
        let out = local_update(&node, &Vector::zeros(4), &Vector::zeros(4), &a_k, &config, 2)
            .unwrap();
        assert_eq!(out.local_estimate, Vector::zeros(3));
        assert_eq!(out.local_share, Vector::zeros(4));
    }

    #[test]
    fn single_node_first_step_is_min_norm_solution() {
        let mut r = rng(1);
        let a = sample_standard_gaussian(3, 5, &mut r);
        let y = Vector::from_fn(3, |_, _| r.random_range(-1.0..=1.0));
        let node = NodeState::zeros(0, 5, 3);
        let config = CocoaConfig {
            lambda: 0.0,
            aggregation: 1.0,
            subproblem: 1.0,
            iterations: 1,
            early_stop_tol: None,
        };
        let out = local_update(&node, &Vector::zeros(3), &y, &a, &config, 1).unwrap();
        let min_norm = pseudoinverse(&a, DEFAULT_SV_CUTOFF).unwrap() * &y;
        assert!((out.local_estimate - min_norm).norm() < 1e-10);
    }

    #[test]
    fn local_update_matches_brute_force_quadratic_minimizer() {
        let mut r = rng(2);
        let a_k = sample_standard_gaussian(6, 4, &mut r);
        let y = Vector::from_fn(6, |_, _| r.random_range(-1.0..=1.0));
        let mean_share = Vector::from_fn(6, |_, _| r.random_range(-1.0..=1.0));
        let estimate = Vector::from_fn(4, |_, _| r.random_range(-1.0..=1.0));
        let config = CocoaConfig {
            lambda: 0.7,
            aggregation: 0.9,
            subproblem: 2.0,
            iterations: 1,
            early_stop_tol: None,
        };
        let node = NodeState {
            node_id: 0,
            local_estimate: estimate.clone(),
            local_share: Vector::zeros(6),
        };
        let out = local_update(&node, &mean_share, &y, &a_k, &config, 2).unwrap();

        let c_k = &estimate * config.lambda - a_k.transpose() * (&y - &mean_share);
        let delta = brute_force_local_delta(&a_k, &c_k, config.lambda, config.subproblem);
        let expected = &estimate + &delta * config.aggregation;
        assert!((out.local_estimate - expected).norm() < 1e-8);
        let expected_share = &mean_share + &a_k * delta * (config.aggregation * 2.0);
        assert!((out.local_share - expected_share).norm() < 1e-8);
    }

    #[test]
    fn aggregate_basics() {
        let u = Vector::from_vec(vec![1.0, -2.0]);
        assert_eq!(aggregate(&[u.clone(), u.clone()]).unwrap(), u);
        assert_eq!(
            aggregate(&[Vector::zeros(2), &u * 2.0]).unwrap(),
            u.clone()
        );
        // linearity
        let v = Vector::from_vec(vec![0.5, 3.0]);
        let lhs = aggregate(&[&u + &v, &u + &v]).unwrap();
        let rhs = aggregate(&[u.clone(), u.clone()]).unwrap() + aggregate(&[v.clone(), v]).unwrap();
        assert!((lhs - rhs).norm() < 1e-15);
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn broad_blocks_converge_in_one_round() {
        // all p_k >= n: the iterates freeze after the first round
        let data = iso_set(4, 11, 0.0, 3);
        let spec = PartitionSpec::new(vec![5, 6]).unwrap();
        let config = CocoaConfig::safe_defaults(2, 0.0, 6);
        let traj = run_cocoa(&data, &spec, &config).unwrap();
        for t in 2..=6 {
            assert!((&traj.estimates[t] - &traj.estimates[1]).norm() < 1e-10);
        }
    }

    #[test]
    fn trajectory_matches_affine_recursion() {
        let data = iso_set(6, 10, 0.0, 4);
        let spec = PartitionSpec::new(vec![4, 6]).unwrap();
        let config = CocoaConfig::safe_defaults(2, 0.0, 30);
        let traj = run_cocoa(&data, &spec, &config).unwrap();
        let op = iteration_matrix(&data.regressors, &spec).unwrap();
        let mut state = Vector::zeros(10);
        for t in 1..=30 {
            state = step_recursion(&state, &op, &data.observations).unwrap();
            assert!(
                (&traj.estimates[t] - &state).norm() < 1e-9,
                "deviation at t={t}"
            );
        }
    }

    #[test]
    fn converges_to_centralized_ridge_solution() {
        let data = iso_set(8, 6, 0.3, 5);
        let spec = PartitionSpec::new(vec![3, 3]).unwrap();
        let config = CocoaConfig::safe_defaults(2, 0.1, 4000);
        let traj = run_cocoa(&data, &spec, &config).unwrap();
        let central = centralized_solve(&data.regressors, &data.observations, 0.1).unwrap();
        let rel = (traj.final_estimate() - &central).norm() / central.norm();
        assert!(rel < 1e-6, "relative gap {rel}");
    }

    #[test]
    fn ridge_solution_is_round_map_fixed_point() {
        let data = iso_set(9, 7, 0.2, 6);
        let spec = PartitionSpec::new(vec![4, 3]).unwrap();
        let lambda = 0.5;
        let central = centralized_solve(&data.regressors, &data.observations, lambda).unwrap();
        let blocks = partition_columns(&data.regressors, &spec).unwrap();
        let config = CocoaConfig::safe_defaults(2, lambda, 1);
        // seed the nodes with the centralized solution and shares whose
        // mean is the full fit A x̂_C
        let slices = spec.split_vector(&central).unwrap();
        let fit = &data.regressors * &central;
        let nodes: Vec<NodeState> = slices
            .iter()
            .enumerate()
            .map(|(k, x_k)| NodeState {
                node_id: k,
                local_estimate: x_k.clone(),
                local_share: fit.clone(),
            })
            .collect();
        // with v_k chosen so that v̄ = A x̂, one more round must not move x̂
        let mean =
            aggregate(&nodes.iter().map(|s| s.local_share.clone()).collect::<Vec<_>>()).unwrap();
        assert!((&mean - &data.regressors * &central).norm() < 1e-8);
        for (node, a_k) in nodes.iter().zip(&blocks) {
            let next =
                local_update(node, &mean, &data.observations, a_k, &config, 2).unwrap();
            assert!(
                (next.local_estimate - &node.local_estimate).norm() < 1e-8,
                "ridge solution moved under one round"
            );
        }
    }

    #[test]
    fn trajectories_depend_only_on_step_ratio_when_unregularized() {
        let data = iso_set(7, 9, 0.0, 7);
        let spec = PartitionSpec::new(vec![4, 5]).unwrap();
        let a = CocoaConfig {
            lambda: 0.0,
            aggregation: 1.0,
            subproblem: 2.0,
            iterations: 40,
            early_stop_tol: None,
        };
        let b = CocoaConfig {
            lambda: 0.0,
            aggregation: 0.5,
            subproblem: 1.0,
            iterations: 40,
            early_stop_tol: None,
        };
        // same γ̄/σ̄ ratio must produce the same iterates
        let ta = run_cocoa(&data, &spec, &a).unwrap();
        let tb = run_cocoa(&data, &spec, &b).unwrap();
        for t in 0..=40 {
            assert!(
                (&ta.estimates[t] - &tb.estimates[t]).norm() < 1e-9,
                "trajectories diverge at t={t}"
            );
        }
    }

    #[test]
    fn schedule_independence_across_thread_counts() {
        // large enough that the rounds take the forking path
        let data = iso_set(200, 600, 0.4, 8);
        let spec = PartitionSpec::new(vec![300, 300]).unwrap();
        let config = CocoaConfig::safe_defaults(2, 0.05, 10);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_cocoa(&data, &spec, &config))
            .unwrap();
        let parallel = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_cocoa(&data, &spec, &config))
            .unwrap();
        assert_eq!(single.estimates, parallel.estimates);

        // sequential-path dims must agree with the forking path too
        let small = iso_set(10, 12, 0.4, 9);
        let small_spec = PartitionSpec::new(vec![3, 4, 5]).unwrap();
        let small_config = CocoaConfig::safe_defaults(3, 0.05, 25);
        let a = run_cocoa(&small, &small_spec, &small_config).unwrap();
        let b = run_cocoa(&small, &small_spec, &small_config).unwrap();
        assert_eq!(a.estimates, b.estimates);
    }

    #[test]
    fn iteration_matrix_single_identity_block() {
        let spec = PartitionSpec::new(vec![4]).unwrap();
        let op = iteration_matrix(&Matrix::identity(4, 4), &spec).unwrap();
        assert!((op.abar.clone() - Matrix::identity(4, 4)).norm() < 1e-12);
        assert!(op.b.norm() < 1e-12);
    }

    #[test]
    fn iteration_matrix_blocks_are_pseudoinverses() {
        let mut r = rng(9);
        let a = sample_standard_gaussian(5, 9, &mut r);
        let spec = PartitionSpec::new(vec![4, 5]).unwrap();
        let op = iteration_matrix(&a, &spec).unwrap();
        let blocks = partition_columns(&a, &spec).unwrap();
        let mut offset = 0;
        for a_k in &blocks {
            let block = op.abar.rows(offset, a_k.ncols()).into_owned();
            let mpm = a_k * &block * a_k;
            let pmp = &block * a_k * &block;
            let mp = a_k * &block;
            let pm = &block * a_k;
            assert!((mpm - a_k).norm() < 1e-8);
            assert!((pmp - &block).norm() < 1e-8);
            assert!((&mp - mp.transpose()).norm() < 1e-8);
            assert!((&pm - pm.transpose()).norm() < 1e-8);
            offset += a_k.ncols();
        }
    }

    #[test]
    fn broad_blocks_make_b_a_projection_and_a_abar_scaled_identity() {
        let mut r = rng(10);
        let a = sample_standard_gaussian(4, 9, &mut r);
        let spec = PartitionSpec::new(vec![4, 5]).unwrap();
        let op = iteration_matrix(&a, &spec).unwrap();
        assert!(is_projection(&op.b, 1e-8).unwrap());
        let prod = &a * &op.abar;
        assert!((prod - Matrix::identity(4, 4) * 2.0).norm() < 1e-8);
    }

    #[test]
    fn step_recursion_edge_cases() {
        let mut r = rng(11);
        let a = sample_standard_gaussian(3, 6, &mut r);
        let spec = PartitionSpec::new(vec![3, 3]).unwrap();
        let op = iteration_matrix(&a, &spec).unwrap();
        let y = Vector::from_fn(3, |_, _| r.random_range(-1.0..=1.0));
        let from_zero = step_recursion(&Vector::zeros(6), &op, &y).unwrap();
        assert!((from_zero - &op.abar * &y / 2.0).norm() < 1e-12);

        let trivial = IterationOperator {
            b: Matrix::zeros(6, 6),
            abar: op.abar.clone(),
            num_nodes: 1,
        };
        let any = Vector::from_fn(6, |_, _| r.random_range(-1.0..=1.0));
        let out = step_recursion(&any, &trivial, &y).unwrap();
        assert!((out - &op.abar * &y).norm() < 1e-12);
    }

    #[test]
    fn error_decomposition_edge_cases_and_solver_cross_check() {
        let data = iso_set(6, 8, 0.5, 12);
        let spec = PartitionSpec::new(vec![4, 4]).unwrap();
        let op = iteration_matrix(&data.regressors, &spec).unwrap();
        let x = &data.ground_truth;
        let w = &data.noise;

        assert_eq!(error_decomposition(&op, 0, x, w).unwrap(), x.clone());

        let noise_free = error_decomposition(&op, 1, x, &Vector::zeros(6)).unwrap();
        assert!((noise_free - &op.b * x).norm() < 1e-12);

        let config = CocoaConfig::safe_defaults(2, 0.0, 20);
        let traj = run_cocoa(&data, &spec, &config).unwrap();
        for t in [1, 5, 20] {
            let tilde = error_decomposition(&op, t, x, w).unwrap();
            assert!(
                ((x - &traj.estimates[t]) - tilde).norm() < 1e-8,
                "mismatch at t={t}"
            );
        }
    }

    #[test]
    fn centralized_solve_square_and_broad() {
        let mut r = rng(13);
        let a = sample_standard_gaussian(5, 5, &mut r);
        let y = Vector::from_fn(5, |_, _| r.random_range(-1.0..=1.0));
        let direct = a.clone().lu().solve(&y).unwrap();
        let ours = centralized_solve(&a, &y, 0.0).unwrap();
        assert!((ours - direct).norm() < 1e-8);

        let broad = sample_standard_gaussian(4, 9, &mut r);
        let yb = Vector::from_fn(4, |_, _| r.random_range(-1.0..=1.0));
        let xb = centralized_solve(&broad, &yb, 0.0).unwrap();
        assert!((&broad * &xb - &yb).norm() < 1e-8);
        // min-norm: estimate orthogonal to null(A), i.e. x ∈ range(Aᵀ)
        let back = pseudoinverse(&broad, DEFAULT_SV_CUTOFF).unwrap() * &broad * &xb;
        assert!((back - &xb).norm() < 1e-8);
    }

    #[test]
    fn centralized_solve_huge_lambda_shrinks() {
        let mut r = rng(14);
        let a = sample_standard_gaussian(6, 4, &mut r);
        let y = Vector::from_fn(6, |_, _| r.random_range(-1.0..=1.0));
        let lambda = 1e6 * (a.transpose() * &a).norm();
        let x = centralized_solve(&a, &y, lambda).unwrap();
        let bound = 2.0 * (a.transpose() * &y).norm() / lambda;
        assert!(x.norm() <= bound);
    }

    #[test]
    fn training_error_basics() {
        let mut r = rng(15);
        let a = sample_standard_gaussian(5, 3, &mut r);
        let x = sample_ground_truth(3, &mut r);
        assert_eq!(training_error(&a, &x, &x), 0.0);
        let est = &x * 0.5;
        let direct = (&a * (&x - &est)).norm_squared() / 5.0;
        assert_relative_eq!(training_error(&a, &x, &est), direct);
    }

    #[test]
    fn projection_test_cases() {
        assert!(is_projection(&Matrix::zeros(3, 3), 1e-10).unwrap());
        assert!(is_projection(&Matrix::identity(3, 3), 1e-10).unwrap());
        assert!(!is_projection(&(Matrix::identity(3, 3) * 2.0), 1e-10).unwrap());
        assert!(is_projection(&Matrix::zeros(2, 3), 1e-10).is_err());
    }

    #[test]
    fn validate_warns_below_recommended_subproblem() {
        let config = CocoaConfig {
            lambda: 0.0,
            aggregation: 1.0,
            subproblem: 1.5,
            iterations: 1,
            early_stop_tol: None,
        };
        assert!(config.validate(2).unwrap().is_some());
        assert!(CocoaConfig::safe_defaults(2, 0.0, 1).validate(2).unwrap().is_none());
        let bad = CocoaConfig {
            aggregation: 1.5,
            ..CocoaConfig::safe_defaults(2, 0.0, 1)
        };
        assert!(bad.validate(2).is_err());
    }

    #[test]
    fn early_stop_truncates_trajectory() {
        let data = iso_set(4, 10, 0.0, 16);
        let spec = PartitionSpec::new(vec![5, 5]).unwrap();
        let mut config = CocoaConfig::safe_defaults(2, 0.0, 500);
        config.early_stop_tol = Some(1e-14);
        let traj = run_cocoa(&data, &spec, &config).unwrap();
        // broad blocks converge after one round, so the early stop fires
        assert!(traj.estimates.len() < 501);
    }
}
