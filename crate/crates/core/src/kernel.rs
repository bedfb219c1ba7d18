//! Spatial noise-correlation kernels D(u).
//!
//! Kernels are the one-dimensional restrictions of the isotropic 3-D
//! correlation functions and carry units of s⁻¹·kg⁻². Alongside the
//! evaluator each kernel records its value and second derivative at the
//! origin, which feed the decoherence and heating rates.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::physics::{CslParams, DpParams, PhysicalConstants};
use crate::special::erf_ratio;

type KernelFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    /// amplitude · exp(−u²/(4 r_C²))
    Gaussian { amplitude: f64, r_c: f64 },
    /// (G/ħ)·erf(|u|/(2R₀))/|u|
    RegularizedNewtonian { g_over_hbar: f64, r0: f64 },
    Constant(f64),
    Custom(KernelFn),
}

#[derive(Clone)]
pub struct NoiseKernel {
    shape: Shape,
    value_at_zero: f64,
    curvature_at_zero: Option<f64>,
    label: String,
}

impl fmt::Debug for NoiseKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NoiseKernel")
            .field("label", &self.label)
            .field("value_at_zero", &self.value_at_zero)
            .field("curvature_at_zero", &self.curvature_at_zero)
            .finish_non_exhaustive()
    }
}

impl NoiseKernel {
    /// CSL Gaussian correlation (λ/m0²)·exp(−u²/(4 r_C²)).
    pub fn csl(p: &CslParams, consts: &PhysicalConstants) -> Result<Self> {
        p.validate()?;
        let amplitude = p.lambda / (consts.m0 * consts.m0);
        Ok(NoiseKernel {
            shape: Shape::Gaussian {
                amplitude,
                r_c: p.r_c,
            },
            value_at_zero: amplitude,
            curvature_at_zero: Some(-amplitude / (2.0 * p.r_c * p.r_c)),
            label: "CSL".to_owned(),
        })
    }

    /// Diósi–Penrose Newtonian correlation smeared by normalized Gaussians of
    /// width R₀ on both mass-density arguments.
    pub fn dp(p: &DpParams, consts: &PhysicalConstants) -> Result<Self> {
        p.validate()?;
        let g_over_hbar = consts.g / consts.hbar;
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let value_at_zero = g_over_hbar / (sqrt_pi * p.r0);
        // erf(z)/z = (2/√π)(1 − z²/3 + …) with z = u/(2R₀)
        let curvature = -g_over_hbar / (6.0 * sqrt_pi * p.r0.powi(3));
        Ok(NoiseKernel {
            shape: Shape::RegularizedNewtonian {
                g_over_hbar,
                r0: p.r0,
            },
            value_at_zero,
            curvature_at_zero: Some(curvature),
            label: "DP".to_owned(),
        })
    }

    /// Spatially uniform correlation. `zero()` switches the collapse off.
    pub fn constant(value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::invalid(
                "kernel value",
                format!("must be finite and non-negative, got {value}"),
            ));
        }
        Ok(NoiseKernel {
            shape: Shape::Constant(value),
            value_at_zero: value,
            curvature_at_zero: Some(0.0),
            label: if value == 0.0 { "zero" } else { "constant" }.to_owned(),
        })
    }

    pub fn zero() -> Self {
        Self::constant(0.0).expect("zero is a valid constant")
    }

    /// Wraps an arbitrary even function. No curvature metadata is attached,
    /// so heating rates are unavailable for such kernels.
    pub fn custom<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let value_at_zero = f(0.0);
        NoiseKernel {
            shape: Shape::Custom(Arc::new(f)),
            value_at_zero,
            curvature_at_zero: None,
            label: label.into(),
        }
    }

    pub fn evaluate(&self, u: f64) -> f64 {
        let u = u.abs();
        match &self.shape {
            Shape::Gaussian { amplitude, r_c } => {
                let s = u / (2.0 * r_c);
                amplitude * (-s * s).exp()
            }
            Shape::RegularizedNewtonian { g_over_hbar, r0 } => {
                let sqrt_pi = std::f64::consts::PI.sqrt();
                g_over_hbar * erf_ratio(u / (2.0 * r0)) / (sqrt_pi * r0)
            }
            Shape::Constant(c) => *c,
            Shape::Custom(f) => f(u),
        }
    }

    pub fn value_at_zero(&self) -> f64 {
        self.value_at_zero
    }

    pub fn curvature_at_zero(&self) -> Option<f64> {
        self.curvature_at_zero
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// CSL correlation length, if this is a Gaussian kernel.
    pub fn correlation_length(&self) -> Option<f64> {
        match self.shape {
            Shape::Gaussian { r_c, .. } => Some(r_c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.shape, Shape::Constant(c) if c == 0.0)
    }

    /// Kernel row on a periodic ring of `n` sites with spacing `dx`:
    /// `row[j]` is the correlation between sites separated by `j` steps.
    ///
    /// Gaussian tails are summed over periodic images so the circulant
    /// matrix is positive semidefinite for any ring. Other kernels use the
    /// minimum-image distance.
    pub fn periodic_row(&self, n: usize, dx: f64) -> Vec<f64> {
        let length = n as f64 * dx;
        match self.shape {
            Shape::Gaussian { r_c, .. } => {
                // images beyond exp(−41.5) ≈ 1e-18 are dropped
                let reach = (4.0 * r_c * r_c * 41.5).sqrt();
                let images = (reach / length).ceil() as i64 + 1;
                (0..n)
                    .map(|j| {
                        let u = j as f64 * dx;
                        // sum smallest terms first
                        let mut acc = 0.0;
                        for k in (1..=images).rev() {
                            let k = k as f64 * length;
                            acc += self.evaluate(u + k) + self.evaluate(u - k);
                        }
                        acc + self.evaluate(u)
                    })
                    .collect()
            }
            _ => (0..n)
                .map(|j| self.evaluate(j.min(n - j) as f64 * dx))
                .collect(),
        }
    }
}

/// CSL kernel with CODATA 2018 constants.
pub fn csl_kernel(p: &CslParams) -> Result<NoiseKernel> {
    NoiseKernel::csl(p, &PhysicalConstants::CODATA_2018)
}

/// Regularized DP kernel with CODATA 2018 constants.
pub fn dp_kernel(p: &DpParams) -> Result<NoiseKernel> {
    NoiseKernel::dp(p, &PhysicalConstants::CODATA_2018)
}
