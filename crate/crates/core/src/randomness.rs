//! Seeded Gaussian sampling.
//!
//! Every stream is a ChaCha12 generator keyed from a 64-bit seed, and normal
//! deviates come from the Box–Muller transform. Substreams are keyed by
//! hashing `(seed, label)`, so a derived stream never depends on how much of
//! its parent has been consumed.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::linalg::{psd_factor, Matrix, Vector};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive_seed(seed: u64, label: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(label ^ 0xD1B5_4A32_D192_ED03))
}

/// A deterministic stream of uniform and normal deviates.
pub struct RngStream {
    seed: u64,
    core: ChaCha12Rng,
    spare: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed;
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        Self { seed, core: ChaCha12Rng::from_seed(key), spare: None }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent substream determined by `(self.seed(), label)` alone.
    pub fn derive(&self, label: u64) -> RngStream {
        RngStream::new(derive_seed(self.seed, label))
    }

    /// Uniform deviate in `(0, 1]` with 53 bits of resolution.
    pub fn next_uniform(&mut self) -> f64 {
        ((self.core.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// `n` independent N(0, 1) draws.
    pub fn standard_normal(&mut self, n: usize) -> Vector {
        assert!(n >= 1, "standard_normal needs n >= 1");
        Vector::from_fn(n, |_| self.next_standard_normal())
    }
}

impl std::fmt::Debug for RngStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RngStream").field("seed", &self.seed).finish_non_exhaustive()
    }
}

/// Free-function form of [`RngStream::standard_normal`].
pub fn standard_normal(rng: &mut RngStream, n: usize) -> Vector {
    rng.standard_normal(n)
}

/// Free-function form of [`RngStream::derive`].
pub fn derive_stream(base: &RngStream, label: u64) -> RngStream {
    base.derive(label)
}

/// Mean and covariance of a multivariate normal.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSpec {
    mean: Vector,
    covariance: Matrix,
}

impl GaussianSpec {
    pub fn new(mean: Vector, covariance: Matrix) -> Result<Self> {
        let n = mean.dim();
        if covariance.shape() != (n, n) {
            return Err(Error::dims(
                "gaussian spec",
                format!("mean dim {n} with {}x{} covariance", covariance.rows(), covariance.cols()),
            ));
        }
        if !covariance.is_symmetric(1e-10 * (1.0 + covariance.max_abs())) {
            return Err(Error::InvalidInput("gaussian covariance is not symmetric".into()));
        }
        Ok(Self { mean, covariance })
    }

    /// Zero-mean spec with the given covariance.
    pub fn centered(covariance: Matrix) -> Result<Self> {
        Self::new(Vector::zeros(covariance.rows()), covariance)
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    pub fn sampler(&self) -> Result<GaussianSampler> {
        Ok(GaussianSampler { mean: self.mean.clone(), factor: psd_factor(&self.covariance)? })
    }
}

/// A [`GaussianSpec`] with its covariance factor precomputed.
#[derive(Clone, Debug)]
pub struct GaussianSampler {
    mean: Vector,
    factor: Matrix,
}

impl GaussianSampler {
    pub fn dim(&self) -> usize {
        self.mean.dim()
    }

    pub fn factor(&self) -> &Matrix {
        &self.factor
    }

    /// `mean + L z` with `z` standard normal.
    pub fn sample(&self, rng: &mut RngStream) -> Vector {
        let z = rng.standard_normal(self.dim());
        let lz = self.factor.mul_vec(&z).expect("factor matches mean dimension");
        self.mean.add(&lz).expect("factor matches mean dimension")
    }
}

pub fn sample_gaussian(rng: &mut RngStream, spec: &GaussianSpec) -> Result<Vector> {
    Ok(spec.sampler()?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let a = RngStream::new(42).standard_normal(16);
        let b = RngStream::new(42).standard_normal(16);
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_seeds_differ() {
        let a = RngStream::new(1).standard_normal(4);
        let b = RngStream::new(2).standard_normal(4);
        assert_ne!(a, b);
    }

    #[test]
    fn derived_streams() {
        let base = RngStream::new(7);
        let a = base.derive(0).standard_normal(8);
        assert_eq!(a, base.derive(0).standard_normal(8));
        assert_ne!(a, base.derive(1).standard_normal(8));
        assert_ne!(a, RngStream::new(7).standard_normal(8));
    }

    #[test]
    fn derivation_ignores_parent_consumption() {
        let mut base = RngStream::new(9);
        let before = base.derive(3).standard_normal(4);
        base.standard_normal(100);
        assert_eq!(before, base.derive(3).standard_normal(4));
    }

    #[test]
    fn uniform_range() {
        let mut rng = RngStream::new(3);
        for _ in 0..10_000 {
            let u = rng.next_uniform();
            assert!(u > 0.0 && u <= 1.0);
        }
    }

    #[test]
    fn zero_covariance_returns_mean() {
        let mean = Vector::from_slice(&[1.0, -2.0, 0.5]).unwrap();
        let spec = GaussianSpec::new(mean.clone(), Matrix::zeros(3, 3)).unwrap();
        let mut rng = RngStream::new(5);
        for _ in 0..10 {
            assert_eq!(sample_gaussian(&mut rng, &spec).unwrap(), mean);
        }
    }

    #[test]
    fn spec_validation() {
        let mean = Vector::zeros(2);
        assert!(GaussianSpec::new(mean.clone(), Matrix::identity(3)).is_err());
        let asym = Matrix::from_rows(&[&[1.0, 0.5], &[0.0, 1.0]]).unwrap();
        assert!(GaussianSpec::new(mean.clone(), asym).is_err());
        let indefinite = GaussianSpec::new(mean, Matrix::diag(&[1.0, -1.0])).unwrap();
        assert!(indefinite.sampler().is_err());
    }
}
