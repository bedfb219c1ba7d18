//! Deterministic density-matrix evolution equal to the ensemble average of
//! the collapse equation, plus closed-form rates derived from it.
//!
//! # Derivation
//!
//! For `ρ = E[|ψ⟩⟨ψ|]`, Itô's rule gives
//! `dρ = E[d|ψ⟩⟨ψ| + |ψ⟩d⟨ψ| + d|ψ⟩d⟨ψ|]`. The noise terms average out, the
//! ⟨M̂⟩-dependent pieces of the drift cancel against the same pieces of the
//! Itô correction, and what remains is linear in ρ:
//!
//! ```text
//! dρ/dt = −(i/ħ)[H, ρ] − ½ ∫∫ dx dy D(x − y) [M̂(x), [M̂(y), ρ]]
//! ```
//!
//! On the grid `M̂(x_i) = μ_i/dx·P_i` and `∫dx → Σ_i dx`, so
//! `[P_i, [P_j, ρ]]_ab = (δ_ia − δ_ib)(δ_ja − δ_jb) ρ_ab` and the double sum
//! collapses to entrywise damping
//!
//! ```text
//! dρ_ab/dt |collapse = −½ (μ_a² D_aa + μ_b² D_bb − 2 μ_a μ_b D_ab) ρ_ab,
//! ```
//!
//! which for a point particle is `−m² (D(0) − D(x_a − x_b)) ρ_ab`. Hence the
//! decoherence rate `Γ(d) = m² (D(0) − D(d))`.
//!
//! For the kinetic energy, write `ρ(x, y)` in the continuum and take
//! `⟨p²⟩ = ħ² ∫ ∂_x ∂_y ρ(x, y)|_{y=x} dx`. Acting on the damping with
//! `f(u) = D(0) − D(u)` (`f(0) = f′(0) = 0`) leaves only
//! `∂_x ∂_y f(x − y) = D″(x − y)`, so `d⟨p²⟩/dt = −ħ² m² D″(0)` and
//! `d⟨p²/2m⟩/dt = −ħ² m D″(0)/2`. For CSL, `D″(0) = −λ/(2 m0² r_C²)`, giving
//! `ħ² λ m / (4 m0² r_C²)` per spatial dimension.
//!
//! The integrator here is classical RK4 with a finite-difference Hamiltonian
//! and shares no stepping code with the trajectory engine.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernel::NoiseKernel;
use crate::physics::PhysicalConstants;
use crate::state::{Hamiltonian, MassDensityOperator, WaveState};

/// Dense oracle grids are capped at this size.
pub const MAX_ORACLE_POINTS: usize = 64;

pub type ComplexMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    matrix: ComplexMatrix,
    time: f64,
}

impl DensityState {
    /// Validated constructor: square, Hermitian within 1e-10, unit trace
    /// within 1e-8, eigenvalues ≥ −1e-8.
    pub fn new(matrix: ComplexMatrix, time: f64) -> Result<Self> {
        let s = DensityState { matrix, time };
        s.check()?;
        Ok(s)
    }

    pub fn from_pure(state: &WaveState) -> Self {
        let psi = nalgebra::DVector::from_column_slice(state.amplitudes());
        DensityState {
            matrix: &psi * psi.adjoint(),
            time: state.time(),
        }
    }

    pub(crate) fn from_parts(matrix: ComplexMatrix, time: f64) -> Self {
        DensityState { matrix, time }
    }

    pub fn check(&self) -> Result<()> {
        let (r, c) = self.matrix.shape();
        if r != c {
            return Err(Error::DimensionMismatch { expected: r, found: c });
        }
        let herm = self.hermitian_residue();
        if herm > 1e-10 {
            return Err(Error::invalid("density matrix", format!("anti-Hermitian residue {herm:e}")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-8 {
            return Err(Error::invalid("density matrix", format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue();
        if min < -1e-8 {
            return Err(Error::invalid("density matrix", format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// max |ρ − ρ†|.
    pub fn hermitian_residue(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()).scale(0.5);
        let mut ev: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// ½‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &DensityState) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let diff = &self.matrix - &other.matrix;
        let herm = (&diff + diff.adjoint()).scale(0.5);
        Ok(0.5 * SymmetricEigen::new(herm).eigenvalues.iter().map(|e| e.abs()).sum::<f64>())
    }

    pub fn coherence(&self, a: usize, b: usize) -> Complex64 {
        self.matrix[(a, b)]
    }

    /// ⟨p̂²⟩ with p̂² = −ħ²Δ (periodic three-point stencil).
    pub fn mean_p2(&self, grid: &GridSpec, hbar: f64) -> f64 {
        let n = self.dim();
        let m = &self.matrix;
        let mut acc = 0.0;
        for i in 0..n {
            let j = (i + 1) % n;
            acc += 2.0 * m[(i, i)].re - m[(i, j)].re - m[(j, i)].re;
        }
        hbar * hbar * acc / (grid.dx() * grid.dx())
    }
}

/// Master-equation generator for a fixed Hamiltonian, mass density and
/// kernel. The damping matrix is tabulated once.
#[derive(Debug, Clone)]
pub struct MasterEquation {
    grid: GridSpec,
    hbar: f64,
    kinetic_coefficient: f64,
    potential: Vec<f64>,
    damping: DMatrix<f64>,
}

impl MasterEquation {
    pub fn new(h: &Hamiltonian, mop: &MassDensityOperator, kernel: &NoiseKernel) -> Result<Self> {
        let grid = *h.grid();
        let n = grid.n_points();
        if n > MAX_ORACLE_POINTS {
            return Err(Error::invalid(
                "n_points",
                format!("oracle grids are limited to {MAX_ORACLE_POINTS} points, got {n}"),
            ));
        }
        if mop.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: mop.len(),
            });
        }
        let row = kernel.periodic_row(n, grid.dx());
        let mu = mop.site_mass();
        let damping = DMatrix::from_fn(n, n, |a, b| {
            let d_ab = row[grid.site_separation(a, b)];
            0.5 * (mu[a] * mu[a] * row[0] + mu[b] * mu[b] * row[0] - 2.0 * mu[a] * mu[b] * d_ab)
        });
        Ok(MasterEquation {
            grid,
            hbar: h.hbar(),
            kinetic_coefficient: h.kinetic_coefficient(),
            potential: h.potential().to_vec(),
            damping,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Entrywise damping rates Γ_ab, s⁻¹.
    pub fn damping(&self) -> &DMatrix<f64> {
        &self.damping
    }

    pub fn rhs(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.grid.n_points();
        if rho.nrows() != n || rho.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rho.nrows(),
            });
        }
        let c = self.kinetic_coefficient / (self.grid.dx() * self.grid.dx());
        let minus_i_over_hbar = Complex64::new(0.0, -1.0 / self.hbar);
        let out = ComplexMatrix::from_fn(n, n, |a, b| {
            let up = (a + 1) % n;
            let dn = (a + n - 1) % n;
            let right = (b + 1) % n;
            let left = (b + n - 1) % n;
            let r = rho[(a, b)];
            // (Hρ)_ab − (ρH)_ab with H = −c·(shift⁺ + shift⁻ − 2) + V
            let h_rho = -(rho[(up, b)] + rho[(dn, b)] - r * 2.0) * c + r * self.potential[a];
            let rho_h = -(rho[(a, right)] + rho[(a, left)] - r * 2.0) * c + r * self.potential[b];
            minus_i_over_hbar * (h_rho - rho_h) - r * self.damping[(a, b)]
        });
        Ok(out)
    }

    pub fn rk4_step(&self, rho: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
        let k1 = self.rhs(rho)?;
        let k2 = self.rhs(&(rho + &k1 * Complex64::from(0.5 * dt)))?;
        let k3 = self.rhs(&(rho + &k2 * Complex64::from(0.5 * dt)))?;
        let k4 = self.rhs(&(rho + &k3 * Complex64::from(dt)))?;
        let incr = (k1 + (k2 + k3) * Complex64::from(2.0) + k4) * Complex64::from(dt / 6.0);
        Ok(rho + incr)
    }

    /// Step bound: keeps ‖dρ/dt‖·dt below 1e-3 and the fastest generator
    /// frequency times dt below 1.
    pub fn suggested_step(&self, rho: &ComplexMatrix) -> Result<f64> {
        let rate = self.rhs(rho)?.norm();
        let dx2 = self.grid.dx() * self.grid.dx();
        let (vmin, vmax) = self
            .potential
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let omega = (8.0 * self.kinetic_coefficient / dx2 + (vmax - vmin)) / self.hbar;
        let gamma = self.damping.iter().copied().fold(0.0, f64::max);
        let mut dt = f64::INFINITY;
        if rate > 0.0 {
            dt = dt.min(1e-3 / rate);
        }
        if omega + gamma > 0.0 {
            dt = dt.min(1.0 / (omega + gamma));
        }
        Ok(dt)
    }

    /// Integrates to `t_final` in `n_steps` equal RK4 steps.
    pub fn evolve(&self, rho: &DensityState, t_final: f64, n_steps: usize) -> Result<DensityState> {
        let n_steps = n_steps.max(1);
        let dt = (t_final - rho.time) / n_steps as f64;
        let mut m = rho.matrix.clone();
        for _ in 0..n_steps {
            m = self.rk4_step(&m, dt)?;
        }
        Ok(DensityState::from_parts(m, t_final))
    }

    /// Integrates to `t_final` with the step from [`Self::suggested_step`].
    pub fn evolve_auto(&self, rho: &DensityState, t_final: f64) -> Result<DensityState> {
        let span = t_final - rho.time;
        if span <= 0.0 {
            return Ok(rho.clone());
        }
        let dt = self.suggested_step(&rho.matrix)?;
        let steps = (span / dt).ceil().max(1.0) as usize;
        self.evolve(rho, t_final, steps)
    }

    /// Exact solution for H = 0: ρ_ab(t) = ρ_ab(0)·exp(−Γ_ab t).
    pub fn exact_dephasing(&self, rho: &DensityState, t_final: f64) -> Result<DensityState> {
        if self.kinetic_coefficient != 0.0 || self.potential.iter().any(|&v| v != 0.0) {
            return Err(Error::invalid("hamiltonian", "exact dephasing requires H = 0"));
        }
        let t = t_final - rho.time;
        let m = ComplexMatrix::from_fn(rho.dim(), rho.dim(), |a, b| {
            rho.matrix[(a, b)] * (-self.damping[(a, b)] * t).exp()
        });
        Ok(DensityState::from_parts(m, t_final))
    }
}

/// dρ/dt of the averaged collapse dynamics.
pub fn master_rhs(
    rho: &DensityState,
    h: &Hamiltonian,
    mop: &MassDensityOperator,
    kernel: &NoiseKernel,
) -> Result<ComplexMatrix> {
    MasterEquation::new(h, mop, kernel)?.rhs(&rho.matrix)
}

/// Γ(d) = m²·(D(0) − D(d)), s⁻¹.
pub fn decoherence_rate(kernel: &NoiseKernel, mass: f64, separation: f64) -> f64 {
    mass * mass * (kernel.value_at_zero() - kernel.evaluate(separation))
}

/// d⟨p̂²/2m⟩/dt = −ħ²·m·D″(0)/2 along one axis, W.
pub fn heating_rate_1d(kernel: &NoiseKernel, mass: f64) -> Result<f64> {
    heating_rate_1d_with(kernel, mass, &PhysicalConstants::CODATA_2018)
}

pub fn heating_rate_1d_with(kernel: &NoiseKernel, mass: f64, consts: &PhysicalConstants) -> Result<f64> {
    let curvature = kernel
        .curvature_at_zero()
        .ok_or_else(|| Error::KernelNotSmooth(kernel.label().to_owned()))?;
    Ok(-consts.hbar * consts.hbar * mass * curvature / 2.0)
}
