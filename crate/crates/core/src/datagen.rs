//! Seeded data synthesis and ingestion.
//!
//! Training sets follow the linear model `y = A x + w` where the rows of
//! `A` are i.i.d. draws from one of three synthetic regressor families
//! (isotropic Gaussian, correlated Gaussian, Bernoulli on {-1, +1}) or an
//! empirical feature matrix. Image data enters through the big-endian IDX
//! format and a random Fourier feature map.

use std::path::Path;

use nalgebra::SymmetricEigen;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numkern::{ensure_finite, ensure_finite_vec, sample_standard_gaussian};
use crate::{Matrix, Vector};

/// Default standard deviation of the random-feature frequency draws.
pub const DEFAULT_FEATURE_BANDWIDTH: f64 = 0.2;

/// Default eigenvalue decay ratio of the correlated-Gaussian covariance.
pub const DEFAULT_COVARIANCE_DECAY: f64 = 0.9631;

const SPD_TOL: f64 = 1e-10;

/// Distribution of the regressor rows.
#[derive(Debug, Clone)]
pub enum RegressorModel {
    /// Rows i.i.d. standard normal in `dim` dimensions.
    IsoGaussian { dim: usize },
    /// Rows i.i.d. zero-mean Gaussian with the given covariance.
    CorrGaussian { covariance: Matrix },
    /// Entries i.i.d. -1 or +1 with probability 1/2 each.
    Bernoulli { dim: usize },
    /// Rows served verbatim from a fixed feature matrix.
    Empirical { rows: Matrix },
}

impl RegressorModel {
    /// Correlated Gaussian model; the covariance must be symmetric positive
    /// definite within 1e-10.
    pub fn correlated(covariance: Matrix) -> Result<Self> {
        validate_spd(&covariance)?;
        Ok(RegressorModel::CorrGaussian { covariance })
    }

    /// Empirical model serving the given rows.
    pub fn empirical(rows: Matrix) -> Result<Self> {
        ensure_finite(&rows, "empirical rows")?;
        Ok(RegressorModel::Empirical { rows })
    }

    /// Number of features per regressor.
    pub fn dim(&self) -> usize {
        match self {
            RegressorModel::IsoGaussian { dim } | RegressorModel::Bernoulli { dim } => *dim,
            RegressorModel::CorrGaussian { covariance } => covariance.ncols(),
            RegressorModel::Empirical { rows } => rows.ncols(),
        }
    }

    /// Population covariance of the rows, when known in closed form.
    pub fn covariance(&self) -> Option<Matrix> {
        match self {
            RegressorModel::IsoGaussian { dim } | RegressorModel::Bernoulli { dim } => {
                Some(Matrix::identity(*dim, *dim))
            }
            RegressorModel::CorrGaussian { covariance } => Some(covariance.clone()),
            RegressorModel::Empirical { .. } => None,
        }
    }
}

fn validate_spd(covariance: &Matrix) -> Result<()> {
    ensure_finite(covariance, "covariance")?;
    if covariance.nrows() != covariance.ncols() {
        return Err(Error::InvalidInput("covariance must be square".into()));
    }
    let scale = covariance.amax().max(1.0);
    let asym = (covariance - covariance.transpose()).amax();
    if asym > SPD_TOL * scale {
        return Err(Error::InvalidInput(format!(
            "covariance asymmetry {asym:.3e} exceeds tolerance"
        )));
    }
    let eigen = SymmetricEigen::new(covariance.clone());
    let min = eigen.eigenvalues.min();
    if min < -SPD_TOL * scale {
        return Err(Error::InvalidInput(format!(
            "covariance has eigenvalue {min:.3e} below zero"
        )));
    }
    Ok(())
}

/// Symmetric square root of a symmetric PSD matrix; tiny negative
/// eigenvalues from rounding are clamped to zero.
pub(crate) fn spd_sqrt(covariance: &Matrix) -> Result<Matrix> {
    validate_spd(covariance)?;
    let eigen = SymmetricEigen::new(covariance.clone());
    let p = covariance.ncols();
    let mut scaled = eigen.eigenvectors.clone();
    for j in 0..p {
        scaled.column_mut(j).scale_mut(eigen.eigenvalues[j].max(0.0).sqrt());
    }
    Ok(&scaled * eigen.eigenvectors.transpose())
}

/// Column split `{p_1, ..., p_K}` of the model over `K` nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSpec {
    sizes: Vec<usize>,
}

impl PartitionSpec {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidPartition("partition must have K >= 1 blocks".into()));
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidPartition("block sizes must be positive".into()));
        }
        Ok(PartitionSpec { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Column offset of each block.
    pub fn offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.sizes.len());
        let mut acc = 0;
        for &s in &self.sizes {
            offsets.push(acc);
            acc += s;
        }
        offsets
    }

    /// Splits a vector of length `total()` into per-block chunks.
    pub fn split_vector(&self, v: &Vector) -> Result<Vec<Vector>> {
        if v.len() != self.total() {
            return Err(Error::InvalidPartition(format!(
                "vector length {} does not match partition total {}",
                v.len(),
                self.total()
            )));
        }
        Ok(self
            .offsets()
            .iter()
            .zip(&self.sizes)
            .map(|(&off, &len)| v.rows(off, len).into_owned())
            .collect())
    }
}

/// A synthesized supervised dataset together with its generating pieces.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    /// `n × p` regressor matrix.
    pub regressors: Matrix,
    /// `y = A x + w`.
    pub observations: Vector,
    pub ground_truth: Vector,
    pub noise: Vector,
    pub noise_variance: f64,
}

impl TrainingSet {
    /// Entrywise residual of the defining identity `y = A x + w`.
    pub fn consistency_residual(&self) -> f64 {
        let recon = &self.regressors * &self.ground_truth + &self.noise;
        (recon - &self.observations).amax()
    }
}

/// Covariance `Σ = U diag(μ) Uᵀ` with Haar-random `U` and geometrically
/// decaying eigenvalues normalized so that `trace(Σ) = p`.
pub fn build_paper_covariance(p: usize, decay_ratio: f64, rng: &mut impl Rng) -> Result<Matrix> {
    if p == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    if decay_ratio.is_nan() || decay_ratio <= 0.0 || decay_ratio > 1.0 {
        return Err(Error::InvalidInput(format!(
            "decay ratio must lie in (0, 1], got {decay_ratio}"
        )));
    }
    let mut raw = Vec::with_capacity(p);
    let mut value = 1.0;
    for _ in 0..p {
        raw.push(value);
        value *= decay_ratio;
    }
    let sum: f64 = raw.iter().sum();
    let scale = p as f64 / sum;
    let u = crate::numkern::sample_haar_orthogonal(p, rng);
    let mut scaled = u.clone();
    for (j, &value) in raw.iter().enumerate() {
        scaled.column_mut(j).scale_mut(value * scale);
    }
    Ok(&scaled * u.transpose())
}

/// Draws `n` i.i.d. regressor rows from the model.
pub fn sample_regressors(model: &RegressorModel, n: usize, rng: &mut impl Rng) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidInput("row count must be >= 1".into()));
    }
    match model {
        RegressorModel::IsoGaussian { dim } => Ok(sample_standard_gaussian(n, *dim, rng)),
        RegressorModel::CorrGaussian { covariance } => {
            let sqrt = spd_sqrt(covariance)?;
            let z = sample_standard_gaussian(n, covariance.ncols(), rng);
            Ok(z * sqrt)
        }
        RegressorModel::Bernoulli { dim } => Ok(Matrix::from_fn(n, *dim, |_, _| {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        })),
        RegressorModel::Empirical { rows } => {
            if rows.nrows() < n {
                return Err(Error::InsufficientData(format!(
                    "empirical model holds {} rows, {} requested",
                    rows.nrows(),
                    n
                )));
            }
            Ok(rows.rows(0, n).into_owned())
        }
    }
}

/// Unit-norm parameter vector with i.i.d. uniform [-1, 1] entries.
pub fn sample_ground_truth(p: usize, rng: &mut impl Rng) -> Vector {
    assert!(p >= 1, "dimension must be >= 1");
    loop {
        let x = Vector::from_fn(p, |_, _| rng.random_range(-1.0..=1.0));
        let norm = x.norm();
        if norm > 0.0 {
            return x / norm;
        }
    }
}

/// Assembles a training set: regressors from the model, Gaussian noise at
/// the given variance, observations `y = A x + w`.
pub fn synthesize(
    model: &RegressorModel,
    ground_truth: &Vector,
    n: usize,
    noise_variance: f64,
    rng: &mut impl Rng,
) -> Result<TrainingSet> {
    if ground_truth.len() != model.dim() {
        return Err(Error::InvalidInput(format!(
            "ground truth length {} does not match model dimension {}",
            ground_truth.len(),
            model.dim()
        )));
    }
    if noise_variance < 0.0 {
        return Err(Error::InvalidInput("noise variance must be >= 0".into()));
    }
    ensure_finite_vec(ground_truth, "ground truth")?;
    let regressors = sample_regressors(model, n, rng)?;
    let sd = noise_variance.sqrt();
    let noise = Vector::from_fn(n, |_, _| sd * rng.sample::<f64, _>(StandardNormal));
    let observations = &regressors * ground_truth + &noise;
    Ok(TrainingSet {
        regressors,
        observations,
        ground_truth: ground_truth.clone(),
        noise,
        noise_variance,
    })
}

/// Splits `A` column-wise into the blocks given by the partition.
pub fn partition_columns(a: &Matrix, spec: &PartitionSpec) -> Result<Vec<Matrix>> {
    if spec.total() != a.ncols() {
        return Err(Error::InvalidPartition(format!(
            "partition sums to {} but matrix has {} columns",
            spec.total(),
            a.ncols()
        )));
    }
    Ok(spec
        .offsets()
        .iter()
        .zip(spec.sizes())
        .map(|(&off, &len)| a.columns(off, len).into_owned())
        .collect())
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Payload of one IDX file.
#[derive(Debug, Clone)]
pub enum IdxContent {
    /// One row per image, pixels flattened row-major and scaled to [0, 1].
    Images(Matrix),
    /// Class labels 0-9.
    Labels(Vec<u8>),
}

/// Reads an IDX file (big-endian magic, dimension sizes, byte payload).
pub fn load_idx(path: &Path) -> Result<IdxContent> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_idx(&bytes)
}

/// Parses IDX bytes; images get magic 0x00000803, labels 0x00000801.
pub fn parse_idx(bytes: &[u8]) -> Result<IdxContent> {
    let magic = read_be_u32(bytes, 0)?;
    match magic {
        IDX_IMAGES_MAGIC => {
            let count = read_be_u32(bytes, 4)? as usize;
            let rows = read_be_u32(bytes, 8)? as usize;
            let cols = read_be_u32(bytes, 12)? as usize;
            let pixels = rows * cols;
            let payload = bytes
                .get(16..)
                .filter(|p| p.len() == count * pixels)
                .ok_or_else(|| {
                    Error::Format(format!(
                        "image payload truncated: expected {} bytes",
                        count * pixels
                    ))
                })?;
            let data = Matrix::from_fn(count, pixels, |i, j| {
                f64::from(payload[i * pixels + j]) / 255.0
            });
            Ok(IdxContent::Images(data))
        }
        IDX_LABELS_MAGIC => {
            let count = read_be_u32(bytes, 4)? as usize;
            let payload = bytes
                .get(8..)
                .filter(|p| p.len() == count)
                .ok_or_else(|| {
                    Error::Format(format!("label payload truncated: expected {count} bytes"))
                })?;
            if let Some(bad) = payload.iter().find(|&&l| l > 9) {
                return Err(Error::Format(format!("label {bad} outside 0-9")));
            }
            Ok(IdxContent::Labels(payload.to_vec()))
        }
        other => Err(Error::Format(format!("unrecognized IDX magic {other:#010x}"))),
    }
}

fn read_be_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format("header truncated".into()))
}

/// Random Fourier feature map `a_j = cos(zᵀ ω_j)`.
///
/// Row `j` of `frequencies` is the frequency vector of output feature `j`.
pub fn random_fourier_features(z: &Vector, frequencies: &Matrix) -> Result<Vector> {
    if frequencies.ncols() != z.len() {
        return Err(Error::InvalidInput(format!(
            "frequency matrix has {} columns but input has length {}",
            frequencies.ncols(),
            z.len()
        )));
    }
    ensure_finite_vec(z, "feature input")?;
    Ok((frequencies * z).map(f64::cos))
}

/// Frequency matrix for `p` features of `source_dim`-dimensional inputs,
/// entries i.i.d. N(0, bandwidth²).
pub fn sample_feature_frequencies(
    p: usize,
    source_dim: usize,
    bandwidth: f64,
    rng: &mut impl Rng,
) -> Matrix {
    Matrix::from_fn(p, source_dim, |_, _| {
        bandwidth * rng.sample::<f64, _>(StandardNormal)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    #[test]
    fn paper_covariance_dimension_one_is_unit() {
        let cov = build_paper_covariance(1, 0.9631, &mut rng(0)).unwrap();
        assert_relative_eq!(cov[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn paper_covariance_trace_normalized() {
        let cov = build_paper_covariance(200, 0.9631, &mut rng(1)).unwrap();
        assert!((cov.trace() - 200.0).abs() < 1e-8);
    }

    #[test]
    fn paper_covariance_geometric_eigenvalues() {
        let cov = build_paper_covariance(3, 0.5, &mut rng(2)).unwrap();
        let mut eigs: Vec<f64> = SymmetricEigen::new(cov).eigenvalues.iter().copied().collect();
        eigs.sort_by(|a, b| b.total_cmp(a));
        // proportional to (1, 0.5, 0.25) scaled to sum 3
        let scale = 3.0 / 1.75;
        for (eig, raw) in eigs.iter().zip([1.0, 0.5, 0.25]) {
            assert_relative_eq!(*eig, raw * scale, epsilon = 1e-10);
        }
    }

    #[test]
    fn bernoulli_entries_are_signs() {
        let model = RegressorModel::Bernoulli { dim: 7 };
        let a = sample_regressors(&model, 11, &mut rng(3)).unwrap();
        assert!(a.iter().all(|&x| x == 1.0 || x == -1.0));
    }

    #[test]
    fn empirical_returns_rows_unchanged() {
        let rows = sample_standard_gaussian(4, 3, &mut rng(4));
        let model = RegressorModel::empirical(rows.clone()).unwrap();
        let out = sample_regressors(&model, 4, &mut rng(5)).unwrap();
        assert_eq!(out, rows);
    }

    #[test]
    fn empirical_rejects_oversampling() {
        let model = RegressorModel::empirical(Matrix::zeros(2, 3)).unwrap();
        assert!(matches!(
            sample_regressors(&model, 3, &mut rng(6)),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn iso_gaussian_sample_covariance_near_identity() {
        let model = RegressorModel::IsoGaussian { dim: 5 };
        let a = sample_regressors(&model, 10_000, &mut rng(7)).unwrap();
        let cov = a.transpose() * &a / 10_000.0;
        let err = (cov - Matrix::identity(5, 5)).amax();
        assert!(err < 0.1, "entrywise deviation {err}");
    }

    #[test]
    fn corr_gaussian_sample_covariance_converges() {
        let sigma = build_paper_covariance(4, 0.5, &mut rng(8)).unwrap();
        let model = RegressorModel::correlated(sigma.clone()).unwrap();
        let a = sample_regressors(&model, 100_000, &mut rng(9)).unwrap();
        let cov = a.transpose() * &a / 100_000.0;
        let err = (cov - &sigma).amax();
        assert!(err < 0.05, "entrywise deviation {err}");
    }

    #[test]
    fn correlated_rejects_asymmetric_covariance() {
        let mut cov = Matrix::identity(3, 3);
        cov[(0, 1)] = 0.5;
        assert!(matches!(
            RegressorModel::correlated(cov),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn ground_truth_unit_norm_and_deterministic() {
        let x = sample_ground_truth(12, &mut rng(10));
        assert!((x.norm() - 1.0).abs() < 1e-12);
        let y = sample_ground_truth(12, &mut rng(10));
        assert_eq!(x, y);
        let scalar = sample_ground_truth(1, &mut rng(11));
        assert!((scalar[0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn synthesize_noise_free_is_exact() {
        let model = RegressorModel::IsoGaussian { dim: 6 };
        let x = sample_ground_truth(6, &mut rng(12));
        let set = synthesize(&model, &x, 9, 0.0, &mut rng(13)).unwrap();
        assert_eq!(set.observations, &set.regressors * &set.ground_truth);
        assert_eq!(set.consistency_residual(), 0.0);
    }

    #[test]
    fn synthesize_zero_truth_gives_pure_noise() {
        let model = RegressorModel::IsoGaussian { dim: 4 };
        let x = Vector::zeros(4);
        let set = synthesize(&model, &x, 50, 1.0, &mut rng(14)).unwrap();
        assert_eq!(set.observations, set.noise);
    }

    #[test]
    fn synthesize_noise_variance_calibrated() {
        let model = RegressorModel::IsoGaussian { dim: 3 };
        let x = sample_ground_truth(3, &mut rng(15));
        let set = synthesize(&model, &x, 10_000, 4.0, &mut rng(16)).unwrap();
        let var = set.noise.iter().map(|w| w * w).sum::<f64>() / 10_000.0;
        assert!((3.8..=4.2).contains(&var), "sample variance {var}");
    }

    #[test]
    fn synthesize_rejects_dimension_mismatch() {
        let model = RegressorModel::IsoGaussian { dim: 4 };
        let x = Vector::zeros(3);
        assert!(matches!(
            synthesize(&model, &x, 5, 0.0, &mut rng(17)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn partition_single_block_is_whole_matrix() {
        let a = sample_standard_gaussian(3, 5, &mut rng(18));
        let spec = PartitionSpec::new(vec![5]).unwrap();
        let blocks = partition_columns(&a, &spec).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0], a);
    }

    #[test]
    fn partition_preserves_column_order() {
        let a = Matrix::from_row_slice(2, 4, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let spec = PartitionSpec::new(vec![2, 2]).unwrap();
        let blocks = partition_columns(&a, &spec).unwrap();
        assert_eq!(blocks[0], Matrix::from_row_slice(2, 2, &[1.0, 2.0, 5.0, 6.0]));
        assert_eq!(blocks[1], Matrix::from_row_slice(2, 2, &[3.0, 4.0, 7.0, 8.0]));
        // concatenation reproduces A
        let mut recon = Matrix::zeros(2, 4);
        recon.columns_mut(0, 2).copy_from(&blocks[0]);
        recon.columns_mut(2, 2).copy_from(&blocks[1]);
        assert_eq!(recon, a);
    }

    #[test]
    fn partition_rejects_size_mismatch() {
        let a = Matrix::zeros(2, 5);
        let spec = PartitionSpec::new(vec![1, 2, 3]).unwrap();
        assert!(matches!(
            partition_columns(&a, &spec),
            Err(Error::InvalidPartition(_))
        ));
    }

    fn idx_image_fixture() -> Vec<u8> {
        // two 2x2 images
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&0x0000_0803u32.to_be_bytes());
        bytes.extend_from_slice(&2u32.to_be_bytes());
        bytes.extend_from_slice(&2u32.to_be_bytes());
        bytes.extend_from_slice(&2u32.to_be_bytes());
        bytes.extend_from_slice(&[0, 51, 102, 153, 204, 255, 0, 128]);
        bytes
    }

    #[test]
    fn idx_images_decode_and_scale() {
        let content = parse_idx(&idx_image_fixture()).unwrap();
        let IdxContent::Images(images) = content else {
            panic!("expected images");
        };
        assert_eq!(images.nrows(), 2);
        assert_eq!(images.ncols(), 4);
        assert_relative_eq!(images[(0, 0)], 0.0);
        assert_relative_eq!(images[(0, 1)], 51.0 / 255.0);
        assert_relative_eq!(images[(1, 1)], 1.0);
        assert_relative_eq!(images[(1, 3)], 128.0 / 255.0);
    }

    #[test]
    fn idx_labels_decode() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&0x0000_0801u32.to_be_bytes());
        bytes.extend_from_slice(&3u32.to_be_bytes());
        bytes.extend_from_slice(&[7, 0, 9]);
        let IdxContent::Labels(labels) = parse_idx(&bytes).unwrap() else {
            panic!("expected labels");
        };
        assert_eq!(labels, vec![7, 0, 9]);
    }

    #[test]
    fn idx_rejects_bad_magic_and_truncation() {
        let mut bytes = idx_image_fixture();
        bytes[3] = 0x99;
        assert!(matches!(parse_idx(&bytes), Err(Error::Format(_))));

        let mut truncated = idx_image_fixture();
        truncated.pop();
        assert!(matches!(parse_idx(&truncated), Err(Error::Format(_))));
    }

    #[test]
    fn fourier_features_zero_frequencies_give_ones() {
        let z = Vector::from_vec(vec![0.3, -0.7]);
        let freqs = Matrix::zeros(4, 2);
        let a = random_fourier_features(&z, &freqs).unwrap();
        assert!(a.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn fourier_features_bounded_and_cos_pi() {
        let mut r = rng(19);
        let z = Vector::from_fn(5, |_, _| r.random_range(-2.0..=2.0));
        let freqs = sample_feature_frequencies(30, 5, 0.2, &mut r);
        let a = random_fourier_features(&z, &freqs).unwrap();
        assert!(a.iter().all(|&v| (-1.0..=1.0).contains(&v)));

        // z = e1, ω1 = π e1 → first feature cos(π) = −1
        let z = Vector::from_vec(vec![1.0, 0.0]);
        let mut freqs = Matrix::zeros(3, 2);
        freqs[(0, 0)] = std::f64::consts::PI;
        let a = random_fourier_features(&z, &freqs).unwrap();
        assert_relative_eq!(a[0], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn fourier_features_reject_dimension_mismatch() {
        let z = Vector::zeros(3);
        let freqs = Matrix::zeros(4, 2);
        assert!(matches!(
            random_fourier_features(&z, &freqs),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn datasets_are_seed_deterministic() {
        let sigma = build_paper_covariance(6, 0.8, &mut rng(20)).unwrap();
        let model = RegressorModel::correlated(sigma).unwrap();
        let x = sample_ground_truth(6, &mut rng(21));
        let a = synthesize(&model, &x, 15, 0.5, &mut rng(22)).unwrap();
        let b = synthesize(&model, &x, 15, 0.5, &mut rng(22)).unwrap();
        assert_eq!(a.regressors, b.regressors);
        assert_eq!(a.observations, b.observations);
        assert_eq!(a.noise, b.noise);
        assert!(a.consistency_residual() < 1e-12);
    }
}
