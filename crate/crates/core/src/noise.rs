//! Gaussian noise-field increments with prescribed spatial covariance.
//!
//! On a periodic grid the covariance matrix `C_ij = D(x_i − x_j)` is
//! circulant, so it is diagonalized by the DFT: `C = F⁻¹ diag(F_k) F` where
//! `F_k` is the forward transform of the kernel row. A field with covariance
//! `C·dt` is `√dt · F⁻¹ diag(√F_k) F ξ` for a vector `ξ` of independent
//! standard normals. Because `F_k` is real and even in `k`, the result is
//! real up to rounding; the imaginary residue is reported for diagnostics.
//!
//! Transform convention: unnormalized forward, 1/N inverse.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{forward_real, FftPair};
use crate::grid::GridSpec;
use crate::kernel::NoiseKernel;

/// Relative tolerance for negative Fourier coefficients, in units of D(0).
pub const PSD_TOLERANCE: f64 = 1e-12;

/// Square roots of the circulant eigenvalues of a sampled kernel.
#[derive(Clone)]
pub struct SpectralFactor {
    grid: GridSpec,
    sqrt_eigen: Vec<f64>,
    eigen: Vec<f64>,
    fft: FftPair,
}

impl std::fmt::Debug for SpectralFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralFactor")
            .field("grid", &self.grid)
            .field("sqrt_eigen", &self.sqrt_eigen)
            .finish_non_exhaustive()
    }
}

/// Builds the spectral square root of the kernel's circulant covariance.
///
/// Coefficients in `[−1e-12·D(0), 0)` are clipped to zero; anything more
/// negative means the kernel is not an admissible covariance on this grid.
pub fn spectral_factor(kernel: &NoiseKernel, grid: &GridSpec) -> Result<SpectralFactor> {
    if let Some(r_c) = kernel.correlation_length() {
        if grid.length() < 10.0 * r_c {
            log::warn!(
                "grid length {:e} m is shorter than 10 r_C = {:e} m; periodic images will be felt",
                grid.length(),
                10.0 * r_c
            );
        }
    }
    let n = grid.n_points();
    let row = kernel.periodic_row(n, grid.dx());
    let eigen: Vec<f64> = forward_real(&row).into_iter().map(|z| z.re).collect();
    let tolerance = PSD_TOLERANCE * kernel.value_at_zero();
    let mut sqrt_eigen = Vec::with_capacity(n);
    for (index, &value) in eigen.iter().enumerate() {
        if value < -tolerance {
            return Err(Error::NotPositiveSemidefinite {
                label: kernel.label().to_owned(),
                index,
                value,
                tolerance,
            });
        }
        sqrt_eigen.push(value.max(0.0).sqrt());
    }
    Ok(SpectralFactor {
        grid: *grid,
        sqrt_eigen,
        eigen,
        fft: FftPair::new(n),
    })
}

impl SpectralFactor {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `s_k = √max(0, F_k)`.
    pub fn values(&self) -> &[f64] {
        &self.sqrt_eigen
    }

    /// Raw (unclipped) real parts of the kernel-row transform `F_k`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen
    }

    /// Covariance row rebuilt from `s_k²` by inverse transform.
    pub fn covariance_row(&self) -> Vec<f64> {
        let mut buf: Vec<Complex64> = self
            .sqrt_eigen
            .iter()
            .map(|s| Complex64::new(s * s, 0.0))
            .collect();
        let mut scratch = vec![Complex64::default(); self.fft.scratch_len()];
        self.fft.inverse(&mut buf, &mut scratch);
        buf.into_iter().map(|z| z.re).collect()
    }

    pub(crate) fn scratch_len(&self) -> usize {
        self.fft.scratch_len()
    }

    /// Draws one increment into `out`, returning the relative imaginary
    /// residue `‖Im‖/‖Re‖` left by the spectral method.
    pub(crate) fn sample_into(
        &self,
        dt: f64,
        stream: &mut NoiseStream,
        out: &mut [f64],
        buf: &mut [Complex64],
        scratch: &mut [Complex64],
    ) -> f64 {
        for z in buf.iter_mut() {
            *z = Complex64::new(stream.normal(), 0.0);
        }
        if dt == 0.0 {
            out.fill(0.0);
            return 0.0;
        }
        self.fft.forward(buf, scratch);
        let sdt = dt.sqrt();
        for (z, s) in buf.iter_mut().zip(&self.sqrt_eigen) {
            *z *= s * sdt;
        }
        self.fft.inverse(buf, scratch);
        let mut re2 = 0.0;
        let mut im2 = 0.0;
        for (o, z) in out.iter_mut().zip(buf.iter()) {
            *o = z.re;
            re2 += z.re * z.re;
            im2 += z.im * z.im;
        }
        if re2 > 0.0 {
            (im2 / re2).sqrt()
        } else {
            0.0
        }
    }
}

/// Identifies one reproducible random stream: the master seed keys the
/// generator and the trajectory index selects a disjoint ChaCha stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamId {
    pub master_seed: u64,
    pub trajectory: u64,
}

/// Private RNG state for a single trajectory. No state is shared between
/// streams, so trajectories can be sampled on any thread in any order.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    id: StreamId,
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(id: StreamId) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(id.master_seed);
        rng.set_stream(id.trajectory);
        NoiseStream { id, rng }
    }

    pub fn id(&self) -> StreamId {
        self.id
    }

    #[inline]
    pub(crate) fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

/// One realization of the noise increment dW over a step `dt`.
///
/// Components have units of kg⁻¹ so that `m·dW` is dimensionless; their
/// covariance is `D(x_i − x_j)·dt` with D in s⁻¹·kg⁻².
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseField {
    pub increments: Vec<f64>,
    pub dt: f64,
    pub stream: StreamId,
    /// `‖Im‖/‖Re‖` of the spectral synthesis before the real part was taken.
    pub imaginary_residue: f64,
}

/// Samples `dW` for one step from the given stream. Always consumes `n`
/// standard normals, including for `dt = 0`.
pub fn sample_increment(
    factor: &SpectralFactor,
    dt: f64,
    stream: &mut NoiseStream,
) -> Result<NoiseField> {
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::invalid("dt", format!("must be non-negative, got {dt}")));
    }
    let n = factor.grid.n_points();
    let mut increments = vec![0.0; n];
    let mut buf = vec![Complex64::default(); n];
    let mut scratch = vec![Complex64::default(); factor.scratch_len()];
    let imaginary_residue = factor.sample_into(dt, stream, &mut increments, &mut buf, &mut scratch);
    Ok(NoiseField {
        increments,
        dt,
        stream: stream.id(),
        imaginary_residue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{csl_kernel, dp_kernel};
    use crate::physics::{CslParams, DpParams};
    use nalgebra::{DMatrix, SymmetricEigen};

    fn circulant(row: &[f64]) -> DMatrix<f64> {
        let n = row.len();
        DMatrix::from_fn(n, n, |i, j| row[(j + n - i) % n])
    }

    #[test]
    fn constant_kernel_has_single_mode() {
        let grid = GridSpec::new(16, 0.1).unwrap();
        let c = 2.5;
        let f = spectral_factor(&NoiseKernel::constant(c).unwrap(), &grid).unwrap();
        assert!((f.values()[0] - (c * 16.0).sqrt()).abs() < 1e-12);
        assert!(f.values()[1..].iter().all(|&s| s < 1e-7));
    }

    #[test]
    fn spectrum_matches_direct_eigendecomposition() {
        // white-noise limit r_C << dx, and a smooth case
        for (r_c, dx) in [(1e-9, 1e-7), (1e-7, 2.5e-8)] {
            let grid = GridSpec::new(16, dx).unwrap();
            let k = csl_kernel(&CslParams::new(1.0, r_c).unwrap()).unwrap();
            let f = spectral_factor(&k, &grid).unwrap();
            let eig = SymmetricEigen::new(circulant(&k.periodic_row(16, dx)));
            let mut direct: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            let mut spectral: Vec<f64> = f.values().iter().map(|s| s * s).collect();
            direct.sort_by(f64::total_cmp);
            spectral.sort_by(f64::total_cmp);
            for (a, b) in direct.iter().zip(&spectral) {
                assert!((a - b).abs() < 1e-10 * k.value_at_zero(), "{a} vs {b}");
            }
            if r_c < dx {
                let max = spectral.last().unwrap();
                let min = spectral.first().unwrap();
                assert!((max - min) / max < 1e-10, "spectrum not flat");
            }
        }
    }

    #[test]
    fn covariance_round_trip() {
        for (n, dx) in [(8, 0.3), (16, 0.125), (64, 0.25), (256, 0.05)] {
            let grid = GridSpec::new(n, dx).unwrap();
            let k = csl_kernel(&CslParams::new(1.0, 1.0).unwrap()).unwrap();
            let f = spectral_factor(&k, &grid).unwrap();
            let row = k.periodic_row(n, dx);
            for (a, b) in f.covariance_row().iter().zip(&row) {
                assert!((a - b).abs() <= 1e-10 * row[0]);
            }
        }
    }

    #[test]
    fn dp_admissible_only_on_coarse_grids() {
        let k = dp_kernel(&DpParams::new(1e-15).unwrap()).unwrap();
        assert!(spectral_factor(&k, &GridSpec::new(32, 2e-15).unwrap()).is_ok());
        let err = spectral_factor(&k, &GridSpec::new(32, 2.5e-16).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NotPositiveSemidefinite { .. }));
    }

    #[test]
    fn zero_step_gives_zero_field() {
        let grid = GridSpec::new(16, 1.0).unwrap();
        let k = csl_kernel(&CslParams::new(1.0, 1.0).unwrap()).unwrap();
        let f = spectral_factor(&k, &grid).unwrap();
        let mut s = NoiseStream::new(StreamId {
            master_seed: 1,
            trajectory: 0,
        });
        let field = sample_increment(&f, 0.0, &mut s).unwrap();
        assert!(field.increments.iter().all(|&x| x == 0.0));
        assert!(sample_increment(&f, -1.0, &mut s).is_err());
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let grid = GridSpec::new(32, 1.0).unwrap();
        let k = csl_kernel(&CslParams::new(1.0, 1.0).unwrap()).unwrap();
        let f = spectral_factor(&k, &grid).unwrap();
        let id = StreamId {
            master_seed: 42,
            trajectory: 7,
        };
        let a = sample_increment(&f, 0.1, &mut NoiseStream::new(id)).unwrap();
        let b = sample_increment(&f, 0.1, &mut NoiseStream::new(id)).unwrap();
        assert_eq!(a, b);
        let other = StreamId {
            trajectory: 8,
            ..id
        };
        let c = sample_increment(&f, 0.1, &mut NoiseStream::new(other)).unwrap();
        assert_ne!(a.increments, c.increments);
        assert!(a.imaginary_residue < 1e-12);
    }

    #[test]
    fn lag_zero_variance_within_three_standard_errors() {
        let grid = GridSpec::new(16, 0.5).unwrap();
        let k = csl_kernel(&CslParams::new(1.0, 1.0).unwrap()).unwrap();
        let f = spectral_factor(&k, &grid).unwrap();
        let dt = 0.01;
        let target = k.periodic_row(16, 0.5)[0] * dt;
        let mut s = NoiseStream::new(StreamId {
            master_seed: 3,
            trajectory: 0,
        });
        let draws = 100_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..draws {
            let x = sample_increment(&f, dt, &mut s).unwrap().increments[5];
            sum += x * x;
            sum2 += x.powi(4);
        }
        let mean = sum / draws as f64;
        let se = ((sum2 / draws as f64 - mean * mean) / draws as f64).sqrt();
        assert!((mean - target).abs() < 3.0 * se, "{mean} vs {target} (se {se})");
    }

    #[test]
    fn independent_streams_are_uncorrelated() {
        let grid = GridSpec::new(8, 1.0).unwrap();
        let f = spectral_factor(&NoiseKernel::constant(1.0).unwrap(), &grid).unwrap();
        let mut a = NoiseStream::new(StreamId {
            master_seed: 9,
            trajectory: 0,
        });
        let mut b = NoiseStream::new(StreamId {
            master_seed: 9,
            trajectory: 1,
        });
        let draws = 50_000;
        let mut cross = 0.0;
        for _ in 0..draws {
            let x = sample_increment(&f, 1.0, &mut a).unwrap().increments[0];
            let y = sample_increment(&f, 1.0, &mut b).unwrap().increments[0];
            cross += x * y;
        }
        // unit variances, so the standard error of the mean product is 1/√N
        assert!((cross / draws as f64).abs() < 4.0 / (draws as f64).sqrt());
    }
}
