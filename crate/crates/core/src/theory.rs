//! Analytical quantities: generalization error, high-probability bounds on
//! the iteration-operator norm `‖B‖`, singular-value concentration
//! intervals, and the exact average generalization error of the first
//! solver iterate.
//!
//! All bounds come as a [`BoundResult`] pair `(β, ρ)`: the bound value and
//! a lower bound on the probability (over the training-data draw) that it
//! holds. Degenerate configurations yield `β = +∞` or `ρ = 0` instead of
//! errors so that sweeps over partitionings stay total.

use rand::Rng;

use crate::datagen::RegressorModel;
use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Sample count and per-node block sizes of a partitioned problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionDims {
    n: usize,
    sizes: Vec<usize>,
}

impl PartitionDims {
    pub fn new(n: usize, sizes: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("sample count must be >= 1".into()));
        }
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidInput("block sizes must be positive".into()));
        }
        Ok(PartitionDims { n, sizes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_nodes(&self) -> usize {
        self.sizes.len()
    }

    /// `min(p_k, n)`.
    pub fn r_min(&self, k: usize) -> usize {
        self.sizes[k].min(self.n)
    }

    /// `max(p_k, n)`.
    pub fn r_max(&self, k: usize) -> usize {
        self.sizes[k].max(self.n)
    }

    /// Whether block `k` is strictly broad (`p_k > n`).
    pub fn is_broad(&self, k: usize) -> bool {
        self.sizes[k] > self.n
    }

    /// Whether every block is tall or square (`n >= p_k`).
    pub fn all_tall(&self) -> bool {
        self.sizes.iter().all(|&p| p <= self.n)
    }
}

/// A bound value together with its success probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    /// Bound on `‖B‖`; `+∞` when a clamp makes the bound vacuous.
    pub beta: f64,
    /// Lower bound on the probability that `‖B‖ ≤ beta`, clamped to [0, 1].
    pub success_probability: f64,
}

/// Extreme singular values of one covariance block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSpectrum {
    pub max: f64,
    pub min: f64,
}

impl BlockSpectrum {
    /// The isotropic block, `σ_max = σ_min = 1`.
    pub fn isotropic() -> Self {
        BlockSpectrum { max: 1.0, min: 1.0 }
    }
}

/// Form of the sub-gaussian tail width `ℓ(q)`.
///
/// The default scales the deviation term by `n σ_max(Σ)`, which is the
/// form the tall-branch concentration argument actually produces; the
/// unscaled variant is kept for comparison with the bare deviation
/// expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailScaling {
    #[default]
    CovarianceScaled,
    Unscaled,
}

/// Inputs shared by the covariance-aware bounds.
#[derive(Debug, Clone)]
pub struct BoundInputs {
    pub dims: PartitionDims,
    /// Per-block tall-branch tail parameters `q_k ≥ 0`.
    pub q: Vec<f64>,
    /// Per-block broad-branch tail parameters `q̄_k ≥ 0`.
    pub q_bar: Vec<f64>,
    /// The absolute constant of the concentration inequality.
    pub absolute_constant: f64,
    /// Per-block sub-gaussian norm factors `L_k ≥ 1`.
    pub subgaussian_constants: Vec<f64>,
    /// Per-block extreme singular values of the covariance blocks.
    pub block_spectra: Vec<BlockSpectrum>,
    pub tail_scaling: TailScaling,
}

impl BoundInputs {
    pub fn new(
        dims: PartitionDims,
        q: Vec<f64>,
        q_bar: Vec<f64>,
        absolute_constant: f64,
        subgaussian_constants: Vec<f64>,
        block_spectra: Vec<BlockSpectrum>,
    ) -> Result<Self> {
        let inputs = BoundInputs {
            dims,
            q,
            q_bar,
            absolute_constant,
            subgaussian_constants,
            block_spectra,
            tail_scaling: TailScaling::default(),
        };
        inputs.validate()?;
        Ok(inputs)
    }

    /// Identity-covariance inputs with the Gaussian sub-gaussian constant.
    pub fn isotropic(dims: PartitionDims, q: Vec<f64>, q_bar: Vec<f64>, c: f64) -> Result<Self> {
        let k = dims.num_nodes();
        BoundInputs::new(
            dims,
            q,
            q_bar,
            c,
            vec![gaussian_subgaussian_constant(); k],
            vec![BlockSpectrum::isotropic(); k],
        )
    }

    fn validate(&self) -> Result<()> {
        let k = self.dims.num_nodes();
        if self.q.len() != k
            || self.q_bar.len() != k
            || self.subgaussian_constants.len() != k
            || self.block_spectra.len() != k
        {
            return Err(Error::InvalidInput(
                "per-block parameter lists must all have length K".into(),
            ));
        }
        if self.q.iter().chain(&self.q_bar).any(|&v| v < 0.0) {
            return Err(Error::InvalidInput("tail parameters must be >= 0".into()));
        }
        if self.absolute_constant.is_nan() || self.absolute_constant <= 0.0 {
            return Err(Error::InvalidInput("absolute constant must be positive".into()));
        }
        if self.subgaussian_constants.iter().any(|&l| l < 1.0) {
            return Err(Error::InvalidInput("sub-gaussian constants must be >= 1".into()));
        }
        if self
            .block_spectra
            .iter()
            .any(|s| s.max.is_nan() || s.min.is_nan() || s.max <= 0.0 || s.min <= 0.0 || s.min > s.max)
        {
            return Err(Error::InvalidInput(
                "block spectra must satisfy 0 < min <= max".into(),
            ));
        }
        Ok(())
    }
}

/// Sub-gaussian norm factor of the Gaussian distribution, `√(8/3)`.
pub fn gaussian_subgaussian_constant() -> f64 {
    (8.0_f64 / 3.0).sqrt()
}

fn clamp_probability(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// `(x − x̂)ᵀ Σ (x − x̂)` for a symmetric PSD covariance.
pub fn generalization_error(x: &Vector, estimate: &Vector, covariance: &Matrix) -> Result<f64> {
    if x.len() != estimate.len() || covariance.nrows() != x.len() || covariance.ncols() != x.len()
    {
        return Err(Error::InvalidInput(
            "estimate and covariance must match the parameter dimension".into(),
        ));
    }
    let scale = covariance.amax().max(1.0);
    if (covariance - covariance.transpose()).amax() > 1e-10 * scale {
        return Err(Error::InvalidInput("covariance must be symmetric".into()));
    }
    let diff = x - estimate;
    Ok((diff.transpose() * covariance * &diff)[(0, 0)])
}

/// Expected squared prediction error on noisy test labels:
/// generalization error plus the irreducible test-noise variance.
pub fn prediction_error(kappa: f64, test_noise_variance: f64) -> f64 {
    kappa + test_noise_variance
}

/// Concentration interval for the extreme singular values of an `n × p`
/// standard Gaussian matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularInterval {
    /// Lower bound on `σ_min`; nonpositive values make the interval
    /// uninformative.
    pub lower: f64,
    /// Upper bound on `σ_max`.
    pub upper: f64,
    /// Probability that both inequalities hold, clamped to [0, 1].
    pub probability: f64,
}

impl SingularInterval {
    pub fn is_informative(&self) -> bool {
        self.lower > 0.0 && self.probability > 0.0
    }
}

/// Tracy-Widom-style fluctuation interval
/// `√r_max − √r_min − q ≤ σ_min ≤ σ_max ≤ √r_max + √r_min + q`
/// with probability at least `(1 − 2e^{−q²/2})₊`.
pub fn tracy_widom_interval(n: usize, p: usize, q: f64) -> SingularInterval {
    let r_min = (n.min(p) as f64).sqrt();
    let r_max = (n.max(p) as f64).sqrt();
    SingularInterval {
        lower: r_max - r_min - q,
        upper: r_max + r_min + q,
        probability: clamp_probability(1.0 - 2.0 * (-q * q / 2.0).exp()),
    }
}

fn iso_probability(q: &[f64]) -> f64 {
    q.iter()
        .map(|&qk| (1.0 - 2.0 * (-qk * qk / 2.0).exp()).max(0.0))
        .product::<f64>()
        .clamp(0.0, 1.0)
}

/// Cross term `(√r_max,k + √r_min,k + q_k)² / (√r_max,i − √r_min,i − q_i)²`,
/// `+∞` once the denominator gap closes.
fn iso_gamma(dims: &PartitionDims, q: &[f64], k: usize, i: usize) -> f64 {
    let numer_base = (dims.r_max(k) as f64).sqrt() + (dims.r_min(k) as f64).sqrt() + q[k];
    let denom_base = (dims.r_max(i) as f64).sqrt() - (dims.r_min(i) as f64).sqrt() - q[i];
    if denom_base <= 0.0 {
        f64::INFINITY
    } else {
        (numer_base / denom_base).powi(2)
    }
}

fn iso_cross_sum(dims: &PartitionDims, q: &[f64]) -> f64 {
    let k_nodes = dims.num_nodes();
    let mut sum = 0.0;
    for k in 0..k_nodes {
        for i in 0..k_nodes {
            if i != k {
                sum += iso_gamma(dims, q, k, i);
            }
        }
    }
    sum
}

fn check_block_params(dims: &PartitionDims, q: &[f64], what: &str) -> Result<()> {
    if q.len() != dims.num_nodes() {
        return Err(Error::InvalidInput(format!(
            "{what} list must have one entry per block"
        )));
    }
    if q.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidInput(format!("{what} values must be >= 0")));
    }
    Ok(())
}

/// Spectral-norm bound on `B` for i.i.d. standard Gaussian entries:
/// `β = 1 + (1/K) √(K + ΣΣ γ̄_{k,i})` with success probability
/// `Π (1 − 2e^{−q_k²/2})₊`.
pub fn beta_iso_gaussian(dims: &PartitionDims, q: &[f64]) -> Result<BoundResult> {
    check_block_params(dims, q, "q")?;
    let k = dims.num_nodes() as f64;
    let cross = iso_cross_sum(dims, q);
    Ok(BoundResult {
        beta: 1.0 + (k + cross).sqrt() / k,
        success_probability: iso_probability(q),
    })
}

/// Alternative bound for the all-tall case (`n ≥ p_k` for every block):
/// `β = √((K−1)²/K + (1/K²) ΣΣ γ̄_{k,i})` at the same probability.
pub fn beta_iso_gaussian_tall(dims: &PartitionDims, q: &[f64]) -> Result<BoundResult> {
    check_block_params(dims, q, "q")?;
    if !dims.all_tall() {
        return Err(Error::InvalidInput(
            "the tall-case bound requires n >= p_k for every block".into(),
        ));
    }
    let k = dims.num_nodes() as f64;
    let cross = iso_cross_sum(dims, q);
    Ok(BoundResult {
        beta: ((k - 1.0) * (k - 1.0) / k + cross / (k * k)).sqrt(),
        success_probability: iso_probability(q),
    })
}

/// Tail width `ℓ_k(q_k)` of the squared-singular-value concentration.
fn ell_term(
    n: usize,
    p_k: usize,
    q_k: f64,
    sigma_max: f64,
    l_k: f64,
    c: f64,
    scaling: TailScaling,
) -> f64 {
    let ratio = (p_k as f64 + q_k) / n as f64;
    let base = c * l_k * l_k * (ratio.sqrt() + ratio);
    match scaling {
        TailScaling::CovarianceScaled => base * n as f64 * sigma_max,
        TailScaling::Unscaled => base,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum BroadBranch {
    /// `η = σ_min (√p − √n − q̄)₊²`, failure mass `2e^{−q̄²/2}` per block.
    GaussianSharp,
    /// `η = σ_min (√p − C L² (√n + q̄))₊²`, failure mass `2e^{−q̄²}`.
    SubGaussian,
}

/// Shared evaluation of the covariance-aware mixed tall/broad bound.
#[allow(clippy::needless_range_loop)]
fn beta_mixed(inputs: &BoundInputs, l: &[f64], branch: BroadBranch) -> BoundResult {
    let dims = &inputs.dims;
    let k_nodes = dims.num_nodes();
    let n = dims.n() as f64;
    let c = inputs.absolute_constant;

    let ell: Vec<f64> = (0..k_nodes)
        .map(|k| {
            ell_term(
                dims.n(),
                dims.sizes()[k],
                inputs.q[k],
                inputs.block_spectra[k].max,
                l[k],
                c,
                inputs.tail_scaling,
            )
        })
        .collect();
    let numer: Vec<f64> = (0..k_nodes)
        .map(|k| n * inputs.block_spectra[k].max + ell[k])
        .collect();
    let eta: Vec<f64> = (0..k_nodes)
        .map(|k| {
            let spectrum = inputs.block_spectra[k];
            if dims.is_broad(k) {
                let p_sqrt = (dims.sizes()[k] as f64).sqrt();
                let gap = match branch {
                    BroadBranch::GaussianSharp => p_sqrt - n.sqrt() - inputs.q_bar[k],
                    BroadBranch::SubGaussian => {
                        p_sqrt - c * l[k] * l[k] * (n.sqrt() + inputs.q_bar[k])
                    }
                };
                spectrum.min * gap.max(0.0).powi(2)
            } else {
                (n * spectrum.min - ell[k]).max(0.0)
            }
        })
        .collect();

    let mut cross = 0.0;
    for k in 0..k_nodes {
        for i in 0..k_nodes {
            if i != k {
                // numer is strictly positive, so a zero clamp turns the
                // term (and the bound) into +∞.
                cross += numer[k] / eta[i];
            }
        }
    }
    let k = k_nodes as f64;
    let beta = 1.0 + (k + cross).sqrt() / k;

    let mut failure = 0.0;
    for i in 0..k_nodes {
        failure += 2.0 * (-inputs.q[i]).exp();
    }
    for i in 0..k_nodes {
        if dims.is_broad(i) {
            let qb = inputs.q_bar[i];
            failure += match branch {
                BroadBranch::GaussianSharp => 2.0 * (-qb * qb / 2.0).exp(),
                BroadBranch::SubGaussian => 2.0 * (-qb * qb).exp(),
            };
        }
    }
    BoundResult {
        beta,
        success_probability: clamp_probability(1.0 - failure),
    }
}

/// Cross-term sum of the all-tall covariance-aware bound:
/// `ΣΣ_{i≠k} (n σ_max(Σ_k) + ℓ_k) / (n σ_min(Σ_i) − ℓ_i)₊`.
#[allow(clippy::needless_range_loop)]
fn corr_gamma_cross_sum(inputs: &BoundInputs, l: &[f64]) -> f64 {
    let dims = &inputs.dims;
    let k_nodes = dims.num_nodes();
    let n = dims.n() as f64;
    let ell: Vec<f64> = (0..k_nodes)
        .map(|k| {
            ell_term(
                dims.n(),
                dims.sizes()[k],
                inputs.q[k],
                inputs.block_spectra[k].max,
                l[k],
                inputs.absolute_constant,
                inputs.tail_scaling,
            )
        })
        .collect();
    let mut sum = 0.0;
    for k in 0..k_nodes {
        let numer = n * inputs.block_spectra[k].max + ell[k];
        for i in 0..k_nodes {
            if i != k {
                let denom = (n * inputs.block_spectra[i].min - ell[i]).max(0.0);
                sum += numer / denom;
            }
        }
    }
    sum
}

fn tall_probability(q: &[f64]) -> f64 {
    clamp_probability(1.0 - q.iter().map(|&qk| 2.0 * (-qk).exp()).sum::<f64>())
}

/// Bound on `‖B‖` for rows i.i.d. Gaussian with a general covariance.
///
/// Tall blocks use the squared-singular-value concentration with the
/// Gaussian norm factor `√(8/3)`; broad blocks use the sharp Gaussian
/// lower bound `σ_min ≥ √σ_min(Σ) (√p − √n − q̄)`.
pub fn beta_corr_gaussian(inputs: &BoundInputs) -> Result<BoundResult> {
    inputs.validate()?;
    let l = vec![gaussian_subgaussian_constant(); inputs.dims.num_nodes()];
    Ok(beta_mixed(inputs, &l, BroadBranch::GaussianSharp))
}

/// All-tall variant of [`beta_corr_gaussian`] in the alternative form
/// `β = √((K−1)²/K + (1/K²) ΣΣ γ̄_{k,i})`, probability `(1 − 2Σe^{−q_k})₊`.
pub fn beta_corr_gaussian_tall(inputs: &BoundInputs) -> Result<BoundResult> {
    inputs.validate()?;
    if !inputs.dims.all_tall() {
        return Err(Error::InvalidInput(
            "the tall-case bound requires n >= p_k for every block".into(),
        ));
    }
    let k = inputs.dims.num_nodes() as f64;
    let l = vec![gaussian_subgaussian_constant(); inputs.dims.num_nodes()];
    let cross = corr_gamma_cross_sum(inputs, &l);
    Ok(BoundResult {
        beta: ((k - 1.0) * (k - 1.0) / k + cross / (k * k)).sqrt(),
        success_probability: tall_probability(&inputs.q),
    })
}

/// Bound on `‖B‖` for blocks generated as `Z_k Λ_k^{1/2} U_kᵀ` with i.i.d.
/// sub-gaussian entries in `Z_k`. Setting every `L_k = √(8/3)` reproduces
/// [`beta_corr_gaussian`] exactly on all-tall partitions.
pub fn beta_sub_gaussian(inputs: &BoundInputs) -> Result<BoundResult> {
    inputs.validate()?;
    Ok(beta_mixed(
        inputs,
        &inputs.subgaussian_constants,
        BroadBranch::SubGaussian,
    ))
}

/// All-tall sub-gaussian bound
/// `β = 1 + (1/K)√(K + ΣΣ γ̄_{k,i})`, probability `(1 − 2Σe^{−q_k})₊`.
pub fn beta_sub_gaussian_tall(inputs: &BoundInputs) -> Result<BoundResult> {
    inputs.validate()?;
    if !inputs.dims.all_tall() {
        return Err(Error::InvalidInput(
            "the tall-case bound requires n >= p_k for every block".into(),
        ));
    }
    let k = inputs.dims.num_nodes() as f64;
    let cross = corr_gamma_cross_sum(inputs, &inputs.subgaussian_constants);
    Ok(BoundResult {
        beta: 1.0 + (k + cross).sqrt() / k,
        success_probability: tall_probability(&inputs.q),
    })
}

/// Two-sided concentration interval for the squared extreme singular
/// values of a matrix with i.i.d. sub-gaussian rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquaredSingularInterval {
    /// Tail width `ℓ(q)`.
    pub ell: f64,
    /// Lower bound on `σ_min²`; may be negative (then vacuous).
    pub lower: f64,
    /// Upper bound on `σ_max²`.
    pub upper: f64,
    pub probability: f64,
}

/// `n σ_min(Σ) − ℓ(q) ≤ σ_min²(M) ≤ σ_max²(M) ≤ n σ_max(Σ) + ℓ(q)` with
/// probability at least `(1 − 2e^{−q})₊`, where
/// `ℓ(q) = C L² (√((p+q)/n) + (p+q)/n) n σ_max(Σ)`.
pub fn subgaussian_tail(
    n: usize,
    p: usize,
    spectrum_max: f64,
    spectrum_min: f64,
    subgaussian_constant: f64,
    absolute_constant: f64,
    q: f64,
) -> SquaredSingularInterval {
    let ell = ell_term(
        n,
        p,
        q,
        spectrum_max,
        subgaussian_constant,
        absolute_constant,
        TailScaling::CovarianceScaled,
    );
    SquaredSingularInterval {
        ell,
        lower: n as f64 * spectrum_min - ell,
        upper: n as f64 * spectrum_max + ell,
        probability: clamp_probability(1.0 - 2.0 * (-q).exp()),
    }
}

/// Which lower bound a broad block uses for its minimum singular value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BroadBoundKind {
    /// Generic sub-gaussian entries: `σ_min² ≥ σ_min(Σ) (√p − C L²(√n + q̄))₊²`
    /// at probability `(1 − 2e^{−q̄²})₊`.
    SubGaussian,
    /// Gaussian rows: `σ_min² ≥ σ_min(Σ) (√p − √n − q̄)₊²` at probability
    /// `(1 − 2e^{−q̄²/2})₊`.
    Gaussian,
}

/// Lower bound on `σ_min²` of a broad (`n < p`) matrix, with probability.
pub fn broad_min_singular_bound(
    n: usize,
    p: usize,
    spectrum_min: f64,
    subgaussian_constant: f64,
    absolute_constant: f64,
    q_bar: f64,
    kind: BroadBoundKind,
) -> Result<(f64, f64)> {
    if n >= p {
        return Err(Error::InvalidInput(
            "the broad-case bound requires n < p".into(),
        ));
    }
    if q_bar < 0.0 {
        return Err(Error::InvalidInput("tail parameter must be >= 0".into()));
    }
    let p_sqrt = (p as f64).sqrt();
    let n_sqrt = (n as f64).sqrt();
    let (gap, probability) = match kind {
        BroadBoundKind::SubGaussian => (
            p_sqrt - absolute_constant * subgaussian_constant.powi(2) * (n_sqrt + q_bar),
            clamp_probability(1.0 - 2.0 * (-q_bar * q_bar).exp()),
        ),
        BroadBoundKind::Gaussian => (
            p_sqrt - n_sqrt - q_bar,
            clamp_probability(1.0 - 2.0 * (-q_bar * q_bar / 2.0).exp()),
        ),
    };
    Ok((spectrum_min * gap.max(0.0).powi(2), probability))
}

/// Terms of the exact average generalization error of the first iterate
/// under isotropic Gaussian regressors.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageErrorTerms {
    pub alphas: Vec<f64>,
    /// `γ_k = r_min,k / (r_max,k − r_min,k − 1)`, `+∞` when `p_k` is within
    /// one of `n`.
    pub gammas: Vec<f64>,
    pub total: f64,
}

/// Average generalization error
/// `E[κ(x̂¹)] = Σ_k (‖x_k‖² α_k + tr(Σ_w)/(n K²) · γ_k)`. When every
/// block is broad the same value holds for every iteration `t ≥ 1`.
///
/// The noise term follows from `E[ĀᵀĀ] = (1/n) Σ_k γ_k I`; for i.i.d.
/// noise of variance `σ_w²` it reduces to `(σ_w²/K²) Σ_k γ_k`.
pub fn avg_gen_error(
    dims: &PartitionDims,
    block_norms_squared: &[f64],
    noise_trace: f64,
) -> Result<AverageErrorTerms> {
    let k_nodes = dims.num_nodes();
    if block_norms_squared.len() != k_nodes {
        return Err(Error::InvalidInput(
            "block norm list must have one entry per block".into(),
        ));
    }
    if block_norms_squared.iter().any(|&v| v < 0.0) || noise_trace < 0.0 {
        return Err(Error::InvalidInput(
            "block norms and noise trace must be >= 0".into(),
        ));
    }
    let n = dims.n();
    let gammas: Vec<f64> = (0..k_nodes)
        .map(|k| {
            let p_k = dims.sizes()[k];
            if p_k + 1 >= n && p_k <= n + 1 {
                f64::INFINITY
            } else {
                dims.r_min(k) as f64 / (dims.r_max(k) as f64 - dims.r_min(k) as f64 - 1.0)
            }
        })
        .collect();
    let k_sq = (k_nodes * k_nodes) as f64;
    let alphas: Vec<f64> = (0..k_nodes)
        .map(|k| {
            let ratio = dims.r_min(k) as f64 / dims.sizes()[k] as f64;
            let cross: f64 = (0..k_nodes).filter(|&i| i != k).map(|i| gammas[i]).sum();
            (k_sq + (1.0 - 2.0 * k_nodes as f64) * ratio + cross) / k_sq
        })
        .collect();
    let mut total = 0.0;
    for k in 0..k_nodes {
        // guard the 0 · ∞ products so vanishing coefficients contribute 0
        if block_norms_squared[k] > 0.0 {
            total += block_norms_squared[k] * alphas[k];
        }
        if noise_trace > 0.0 {
            total += noise_trace / (n as f64 * k_sq) * gammas[k];
        }
    }
    Ok(AverageErrorTerms {
        alphas,
        gammas,
        total,
    })
}

/// Distribution-free right-hand side of the `‖Ā A‖²` bound:
/// `K + ΣΣ_{i≠k} σ_max²(A_k) / σ_min+²(A_i)`.
#[allow(clippy::needless_range_loop)]
pub fn abar_a_bound_rhs(
    block_max_singulars: &[f64],
    block_min_nonzero_singulars: &[f64],
) -> Result<f64> {
    let k_nodes = block_max_singulars.len();
    if k_nodes == 0 || block_min_nonzero_singulars.len() != k_nodes {
        return Err(Error::InvalidInput(
            "singular value lists must be nonempty and of equal length".into(),
        ));
    }
    if block_min_nonzero_singulars.iter().any(|&s| s.is_nan() || s <= 0.0) {
        return Err(Error::InvalidInput(
            "minimum nonzero singular values must be positive".into(),
        ));
    }
    let mut sum = k_nodes as f64;
    for k in 0..k_nodes {
        for i in 0..k_nodes {
            if i != k {
                sum += (block_max_singulars[k] / block_min_nonzero_singulars[i]).powi(2);
            }
        }
    }
    Ok(sum)
}

/// Generalization-error bound from a `‖B‖` bound:
/// `‖Σ‖ · β^{2t} · ‖x‖²`; `+∞` propagates (except `β^0 = 1`).
pub fn gen_err_bound_from_beta(
    beta: f64,
    t: usize,
    x_norm_squared: f64,
    cov_spectral_norm: f64,
) -> f64 {
    cov_spectral_norm * beta.powi(2 * t as i32) * x_norm_squared
}

/// Empirically fits the smallest per-direction sub-gaussian norm factor
/// `L` with `‖hᵀa‖_ψ2 ≤ L √(hᵀΣh)` over randomly sampled unit directions.
///
/// The per-direction ψ₂ norm is estimated by bisecting the smallest `L`
/// with sample mean of `exp(z²/L²)` at most 2. Intended as a calibration
/// aid for models without a known factor; the result is floored at 1.
pub fn estimate_subgaussian_constant(
    model: &RegressorModel,
    directions: usize,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    let covariance = model.covariance().ok_or_else(|| {
        Error::InvalidInput("sub-gaussian estimation needs a model with known covariance".into())
    })?;
    if directions == 0 || samples < 16 {
        return Err(Error::InvalidInput(
            "need at least one direction and 16 samples".into(),
        ));
    }
    let rows = crate::datagen::sample_regressors(model, samples, rng)?;
    let p = model.dim();
    let mut worst: f64 = 1.0;
    for _ in 0..directions {
        let mut h = Vector::from_fn(p, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let norm = h.norm();
        if norm == 0.0 {
            continue;
        }
        h /= norm;
        let z = &rows * &h;
        let denom = (h.transpose() * &covariance * &h)[(0, 0)].sqrt();
        if denom <= 0.0 {
            continue;
        }
        let psi = bisect_psi2(z.as_slice());
        worst = worst.max(psi / denom);
    }
    Ok(worst)
}

fn bisect_psi2(z: &[f64]) -> f64 {
    let max_abs = z.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    if max_abs == 0.0 {
        return 0.0;
    }
    let mean_exp = |l: f64| {
        z.iter()
            .map(|&v| ((v * v) / (l * l)).min(700.0).exp())
            .sum::<f64>()
            / z.len() as f64
    };
    let mut lo = max_abs * 1e-3;
    let mut hi = max_abs * 20.0;
    if mean_exp(hi) > 2.0 {
        return hi;
    }
    if mean_exp(lo) <= 2.0 {
        return lo;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mean_exp(mid) > 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}
