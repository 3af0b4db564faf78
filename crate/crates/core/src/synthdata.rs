//! Seeded sampling of inlier/outlier mixtures around a random subspace.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{GmsError, Result};
use crate::numerics::{self, PointSet, Subspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Gaussian inliers in `L*`, outliers uniform on the unit cube.
    HaystackUniform,
    /// Inliers `N(0, σ₁²P/d)`, outliers `N(0, σ₀²I/D)`.
    NeedleHaystack,
    /// Needle-haystack inliers with outliers `N(0, Σ₀/D)`.
    AsymmetricOutliers,
}

impl FromStr for Model {
    type Err = GmsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haystack_uniform" | "haystack" => Ok(Model::HaystackUniform),
            "needle_haystack" | "needle" => Ok(Model::NeedleHaystack),
            "asymmetric_outliers" | "asymmetric" => Ok(Model::AsymmetricOutliers),
            other => Err(GmsError::InvalidArgument(format!("unknown model '{other}'"))),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::HaystackUniform => "haystack_uniform",
            Model::NeedleHaystack => "needle_haystack",
            Model::AsymmetricOutliers => "asymmetric_outliers",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub model: Model,
    pub n1: usize,
    pub n0: usize,
    pub dim: usize,
    pub d: usize,
    pub eta: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    /// Outlier covariance for [`Model::AsymmetricOutliers`].
    pub sigma0_matrix: Option<DMatrix<f64>>,
    pub seed: u64,
}

impl SyntheticConfig {
    pub fn new(model: Model, n1: usize, n0: usize, dim: usize, d: usize) -> Self {
        Self {
            model,
            n1,
            n0,
            dim,
            d,
            eta: 0.0,
            sigma0: 1.0,
            sigma1: 1.0,
            sigma0_matrix: None,
            seed: 0,
        }
    }

    pub fn haystack(n1: usize, n0: usize, dim: usize, d: usize) -> Self {
        Self::new(Model::HaystackUniform, n1, n0, dim, d)
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.d >= self.dim {
            return Err(GmsError::InvalidArgument(format!(
                "need 1 <= d < D, got d={} D={}",
                self.d, self.dim
            )));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(GmsError::InvalidArgument(format!("eta must be >= 0, got {}", self.eta)));
        }
        if !(self.sigma0 > 0.0 && self.sigma1 > 0.0) {
            return Err(GmsError::InvalidArgument("scales must be positive".into()));
        }
        if self.model == Model::AsymmetricOutliers {
            match &self.sigma0_matrix {
                None => {
                    return Err(GmsError::InvalidArgument(
                        "asymmetric_outliers needs an outlier covariance".into(),
                    ))
                }
                Some(s) if s.nrows() != self.dim || s.ncols() != self.dim => {
                    return Err(GmsError::Dimension(format!(
                        "outlier covariance is {}x{}, expected {}x{}",
                        s.nrows(),
                        s.ncols(),
                        self.dim,
                        self.dim
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// The same experiment with the seed of trial `trial` under `self.seed`.
    pub fn for_trial(&self, trial: u64) -> Self {
        Self {
            seed: substream_seed(self.seed, trial),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Inlier,
    Outlier,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    /// Inliers first, then outliers.
    pub points: PointSet,
    pub labels: Vec<Label>,
    pub l_star: Subspace,
    /// Inliers before noise is added (outliers unchanged).
    pub noiseless_points: PointSet,
}

impl SyntheticSample {
    pub fn inliers(&self) -> PointSet {
        self.points.select(&self.indices(Label::Inlier))
    }

    pub fn outliers(&self) -> PointSet {
        self.points.select(&self.indices(Label::Outlier))
    }

    fn indices(&self, label: Label) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == label)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Seed of trial `trial` derived from `master` by a SplitMix64 finalizer, so
/// that trials can be generated in any order or in parallel.
pub fn substream_seed(master: u64, trial: u64) -> u64 {
    let mut z = master ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// A uniformly random `d`-dimensional subspace of `ℝᴰ`.
pub fn random_subspace<R: Rng + ?Sized>(rng: &mut R, dim: usize, d: usize) -> Subspace {
    let g = gaussian_matrix(rng, dim, d);
    let q = g.qr().q();
    Subspace::new(q).expect("QR factor is orthonormal")
}

/// A Haar-distributed orthogonal matrix.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    let g = gaussian_matrix(rng, dim, dim);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            let mut c = q.column_mut(j);
            c.neg_mut();
        }
    }
    q
}

pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticSample> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let (dim, d) = (cfg.dim, cfg.d);
    let l_star = random_subspace(&mut rng, dim, d);

    let coords = gaussian_matrix(&mut rng, cfg.n1, d);
    let inlier_scale = match cfg.model {
        Model::HaystackUniform => cfg.sigma1,
        Model::NeedleHaystack | Model::AsymmetricOutliers => cfg.sigma1 / (d as f64).sqrt(),
    };
    let clean = coords * l_star.basis().transpose() * inlier_scale;
    let mut noisy = clean.clone();
    if cfg.eta > 0.0 {
        noisy += gaussian_matrix(&mut rng, cfg.n1, dim) * cfg.eta;
    }

    let outliers = match cfg.model {
        Model::HaystackUniform => {
            DMatrix::from_fn(cfg.n0, dim, |_, _| rng.random::<f64>()) * cfg.sigma0
        }
        Model::NeedleHaystack => {
            gaussian_matrix(&mut rng, cfg.n0, dim) * (cfg.sigma0 / (dim as f64).sqrt())
        }
        Model::AsymmetricOutliers => {
            let sigma = cfg.sigma0_matrix.as_ref().expect("validated");
            if numerics::asymmetry(sigma) > numerics::SYMMETRY_TOL * sigma.amax().max(1.0) {
                return Err(GmsError::NotSymmetric(numerics::asymmetry(sigma)));
            }
            let chol = Cholesky::new(numerics::symmetrize(sigma)).ok_or_else(|| {
                GmsError::InvalidArgument("outlier covariance is not positive definite".into())
            })?;
            gaussian_matrix(&mut rng, cfg.n0, dim) * chol.l().transpose() / (dim as f64).sqrt()
        }
    };

    let labels = std::iter::repeat_n(Label::Inlier, cfg.n1)
        .chain(std::iter::repeat_n(Label::Outlier, cfg.n0))
        .collect();
    let points = PointSet::new(stack(&noisy, &outliers))?;
    let noiseless_points = PointSet::new(stack(&clean, &outliers))?;
    Ok(SyntheticSample {
        points,
        labels,
        l_star,
        noiseless_points,
    })
}

fn stack(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    m.rows_mut(0, top.nrows()).copy_from(top);
    m.rows_mut(top.nrows(), bottom.nrows()).copy_from(bottom);
    m
}

/// Inlier-to-outlier ratio `N₁/N₀`.
pub fn snr(cfg: &SyntheticConfig) -> Result<f64> {
    if cfg.n0 == 0 {
        return Err(GmsError::InvalidArgument("snr is undefined without outliers".into()));
    }
    Ok(cfg.n1 as f64 / cfg.n0 as f64)
}

/// Ratio `N₁/N₀` above which the needle-haystack model recovers `L*` with
/// high probability: `4 (σ₀/σ₁) d / √((D−d) D)`.
pub fn needle_haystack_threshold(dim: usize, d: usize, sigma0: f64, sigma1: f64) -> f64 {
    4.0 * (sigma0 / sigma1) * d as f64 / (((dim - d) * dim) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_seed_is_reproducible() {
        let cfg = SyntheticConfig::haystack(20, 20, 6, 2).with_eta(0.1).with_seed(9);
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = generate(&cfg.clone().with_seed(10)).unwrap();
        assert_ne!(generate(&cfg).unwrap().points, other.points);
    }

    #[test]
    fn trial_substreams_differ() {
        let cfg = SyntheticConfig::haystack(5, 5, 4, 1).with_seed(3);
        let a = generate(&cfg.for_trial(0)).unwrap();
        let b = generate(&cfg.for_trial(1)).unwrap();
        assert_ne!(a.points, b.points);
        assert_eq!(cfg.for_trial(1).seed, substream_seed(3, 1));
    }

    #[test]
    fn labels_and_layout() {
        let cfg = SyntheticConfig::haystack(7, 3, 5, 2);
        let s = generate(&cfg).unwrap();
        assert_eq!(s.points.len(), 10);
        assert_eq!(s.labels.iter().filter(|l| **l == Label::Inlier).count(), 7);
        assert!(s.labels[..7].iter().all(|l| *l == Label::Inlier));
        assert_eq!(s.inliers().len(), 7);
        assert_eq!(s.outliers().len(), 3);
    }

    #[test]
    fn noiseless_inliers_lie_in_subspace() {
        for model in [Model::HaystackUniform, Model::NeedleHaystack] {
            let mut cfg = SyntheticConfig::new(model, 30, 10, 8, 3).with_eta(0.5);
            cfg.seed = 4;
            let s = generate(&cfg).unwrap();
            let p = s.l_star.projector();
            for i in 0..30 {
                let x = s.noiseless_points.point(i);
                let off = &x - &p * &x;
                assert!(off.norm() < 1e-12);
            }
            // noise moves inliers off the subspace, outliers stay put
            assert!((s.points.point(0) - s.noiseless_points.point(0)).norm() > 0.0);
            assert_eq!(s.points.point(35), s.noiseless_points.point(35));
        }
    }

    #[test]
    fn uniform_outliers_stay_in_cube() {
        let s = generate(&SyntheticConfig::haystack(0, 200, 4, 1)).unwrap();
        assert!(s.points.matrix().iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn asymmetric_needs_covariance() {
        let mut cfg = SyntheticConfig::new(Model::AsymmetricOutliers, 5, 5, 3, 1);
        assert!(generate(&cfg).is_err());
        cfg.sigma0_matrix = Some(DMatrix::from_diagonal_element(3, 3, 2.0));
        assert!(generate(&cfg).is_ok());
        cfg.sigma0_matrix = Some(DMatrix::from_diagonal_element(3, 3, -1.0));
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn invalid_dimensions() {
        assert!(generate(&SyntheticConfig::haystack(5, 5, 3, 3)).is_err());
        assert!(generate(&SyntheticConfig::haystack(5, 5, 3, 0)).is_err());
        assert!(generate(&SyntheticConfig::haystack(5, 5, 3, 1).with_eta(-1.0)).is_err());
    }

    #[test]
    fn snr_examples() {
        assert_eq!(snr(&SyntheticConfig::haystack(10, 10, 3, 1)).unwrap(), 1.0);
        assert_eq!(snr(&SyntheticConfig::haystack(100, 20, 3, 1)).unwrap(), 5.0);
        assert!(snr(&SyntheticConfig::haystack(100, 0, 3, 1)).is_err());
    }

    #[test]
    fn threshold_value() {
        let t = needle_haystack_threshold(100, 10, 1.0, 1.0);
        assert!((t - 40.0 / 9000f64.sqrt()).abs() < 1e-15);
        assert!((t - 0.421637).abs() < 1e-6);
    }

    #[test]
    fn model_names_round_trip() {
        for m in [Model::HaystackUniform, Model::NeedleHaystack, Model::AsymmetricOutliers] {
            assert_eq!(m.to_string().parse::<Model>().unwrap(), m);
        }
        assert!("cube".parse::<Model>().is_err());
    }

    #[test]
    fn rotation_is_orthogonal() {
        let mut rng = rng_from_seed(1);
        let r = random_rotation(&mut rng, 5);
        assert!((r.transpose() * &r - DMatrix::<f64>::identity(5, 5)).amax() < 1e-14);
    }
}
