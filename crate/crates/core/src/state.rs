//! Single-particle states and operators on a periodic grid.

use num_complex::Complex64;

use crate::error::{require_positive, Error, Result};
use crate::grid::GridSpec;
use crate::physics::PhysicalConstants;

/// Normalized amplitude vector in the position basis at time `time` (s).
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    amplitudes: Vec<Complex64>,
    time: f64,
}

impl WaveState {
    /// Normalizes `amplitudes`; fails on a zero or non-finite vector.
    pub fn new(mut amplitudes: Vec<Complex64>, time: f64) -> Result<Self> {
        let norm = l2_norm(&amplitudes);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::invalid("amplitudes", "state vector has zero or non-finite norm"));
        }
        for a in amplitudes.iter_mut() {
            *a /= norm;
        }
        Ok(WaveState { amplitudes, time })
    }

    /// Particle localized on site `i`.
    pub fn delta(grid: &GridSpec, i: usize) -> Result<Self> {
        check_site(grid, i)?;
        let mut a = vec![Complex64::default(); grid.n_points()];
        a[i] = Complex64::new(1.0, 0.0);
        Self::new(a, 0.0)
    }

    /// Equal-weight superposition of sites `a` and `b`.
    pub fn two_point(grid: &GridSpec, a: usize, b: usize) -> Result<Self> {
        check_site(grid, a)?;
        check_site(grid, b)?;
        if a == b {
            return Err(Error::invalid("sites", "two-point superposition needs distinct sites"));
        }
        let mut amp = vec![Complex64::default(); grid.n_points()];
        amp[a] = Complex64::new(1.0, 0.0);
        amp[b] = Complex64::new(1.0, 0.0);
        Self::new(amp, 0.0)
    }

    /// Gaussian packet `exp(−(x−x₀)²/(4σ²) + i k₀ x)`, so that σ is the
    /// position standard deviation.
    pub fn gaussian(grid: &GridSpec, center: f64, width: f64, k0: f64) -> Result<Self> {
        require_positive("width", width)?;
        let amp = (0..grid.n_points())
            .map(|i| {
                let x = grid.position(i);
                let s = (x - center) / (2.0 * width);
                Complex64::from_polar((-s * s).exp(), k0 * x)
            })
            .collect();
        Self::new(amp, 0.0)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amplitudes)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Density-matrix element ψ_a ψ_b*.
    pub fn coherence(&self, a: usize, b: usize) -> Complex64 {
        self.amplitudes[a] * self.amplitudes[b].conj()
    }

    pub(crate) fn from_parts(amplitudes: Vec<Complex64>, time: f64) -> Self {
        WaveState { amplitudes, time }
    }
}

pub(crate) fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn check_site(grid: &GridSpec, i: usize) -> Result<()> {
    if i < grid.n_points() {
        Ok(())
    } else {
        Err(Error::invalid(
            "site",
            format!("index {i} outside grid of {} points", grid.n_points()),
        ))
    }
}

/// Position-diagonal mass density: `M̂(x_i) = site_mass[i]/dx · |x_i⟩⟨x_i|`.
///
/// For a point particle of mass m every site carries weight m. The physical
/// smearing of the mass distribution lives entirely in the noise kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct MassDensityOperator {
    site_mass: Vec<f64>,
    dx: f64,
}

impl MassDensityOperator {
    pub fn point_particle(grid: &GridSpec, mass: f64) -> Result<Self> {
        require_positive("mass", mass)?;
        Ok(MassDensityOperator {
            site_mass: vec![mass; grid.n_points()],
            dx: grid.dx(),
        })
    }

    pub fn from_site_masses(grid: &GridSpec, site_mass: Vec<f64>) -> Result<Self> {
        if site_mass.len() != grid.n_points() {
            return Err(Error::DimensionMismatch {
                expected: grid.n_points(),
                found: site_mass.len(),
            });
        }
        if site_mass.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::invalid("site_mass", "entries must be finite and non-negative"));
        }
        Ok(MassDensityOperator {
            site_mass,
            dx: grid.dx(),
        })
    }

    /// Mass attached to each site, kg.
    pub fn site_mass(&self) -> &[f64] {
        &self.site_mass
    }

    /// Diagonal of M̂(x_i) on its own site, kg·m⁻¹.
    pub fn density(&self, i: usize) -> f64 {
        self.site_mass[i] / self.dx
    }

    /// Largest site weight; the particle mass for a point particle.
    pub fn particle_mass(&self) -> f64 {
        self.site_mass.iter().copied().fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.site_mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.site_mass.is_empty()
    }
}

/// `H = −ħ²/(2m)·Δ + V` with Δ the periodic three-point Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    grid: GridSpec,
    hbar: f64,
    /// ħ²/(2m), or 0 when there is no kinetic term.
    kinetic_coefficient: f64,
    potential: Vec<f64>,
}

impl Hamiltonian {
    /// H = 0.
    pub fn zero(grid: &GridSpec, consts: &PhysicalConstants) -> Self {
        Hamiltonian {
            grid: *grid,
            hbar: consts.hbar,
            kinetic_coefficient: 0.0,
            potential: vec![0.0; grid.n_points()],
        }
    }

    /// Free particle H = p̂²/2m.
    pub fn free(grid: &GridSpec, mass: f64, consts: &PhysicalConstants) -> Result<Self> {
        require_positive("mass", mass)?;
        Ok(Hamiltonian {
            grid: *grid,
            hbar: consts.hbar,
            kinetic_coefficient: consts.hbar * consts.hbar / (2.0 * mass),
            potential: vec![0.0; grid.n_points()],
        })
    }

    /// Replaces the potential (J per site).
    pub fn with_potential(mut self, potential: Vec<f64>) -> Result<Self> {
        if potential.len() != self.grid.n_points() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.n_points(),
                found: potential.len(),
            });
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("potential", "entries must be finite"));
        }
        self.potential = potential;
        Ok(self)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn kinetic_coefficient(&self) -> f64 {
        self.kinetic_coefficient
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn has_kinetic(&self) -> bool {
        self.kinetic_coefficient > 0.0
    }

    pub fn has_potential(&self) -> bool {
        self.potential.iter().any(|&v| v != 0.0)
    }

    pub fn is_zero(&self) -> bool {
        !self.has_kinetic() && !self.has_potential()
    }

    /// Kinetic energy of DFT mode `k`: (ħ²/2m)·(4/dx²)·sin²(πk/n).
    pub fn kinetic_eigenvalue(&self, k: usize) -> f64 {
        let n = self.grid.n_points() as f64;
        let dx = self.grid.dx();
        let s = (std::f64::consts::PI * k as f64 / n).sin();
        self.kinetic_coefficient * 4.0 * s * s / (dx * dx)
    }

    /// Largest stable explicit kinetic step, dx²·m/ħ. `None` without a
    /// kinetic term.
    pub fn stability_limit(&self) -> Option<f64> {
        self.has_kinetic()
            .then(|| self.grid.dx().powi(2) * self.hbar / (2.0 * self.kinetic_coefficient))
    }
}

/// Expectation values of a pure state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub time: f64,
    pub mean_x: f64,
    pub mean_x2: f64,
    /// ⟨p̂²⟩ with p̂² = −ħ²Δ on the grid, kg²·m²·s⁻².
    pub mean_p2: f64,
    /// ⟨p̂²/2m + V⟩, J.
    pub energy: f64,
    /// ψ_a ψ_b* for the configured site pair.
    pub coherence: Complex64,
}

/// Measures a state. Positions use the centred (non-wrapped) coordinate.
pub fn observe(
    state: &WaveState,
    grid: &GridSpec,
    mass: f64,
    potential: &[f64],
    hbar: f64,
    pair: (usize, usize),
) -> Observables {
    let psi = state.amplitudes();
    let n = psi.len();
    let dx = grid.dx();
    let mut mean_x = 0.0;
    let mut mean_x2 = 0.0;
    let mut lap = 0.0;
    let mut pot = 0.0;
    for i in 0..n {
        let p = psi[i].norm_sqr();
        let x = grid.position(i);
        mean_x += p * x;
        mean_x2 += p * x * x;
        pot += p * potential[i];
        let left = psi[(i + n - 1) % n];
        let right = psi[(i + 1) % n];
        lap += (psi[i].conj() * (psi[i] * 2.0 - left - right)).re;
    }
    let mean_p2 = hbar * hbar * lap / (dx * dx);
    Observables {
        time: state.time(),
        mean_x,
        mean_x2,
        mean_p2,
        energy: mean_p2 / (2.0 * mass) + pot,
        coherence: state.coherence(pair.0, pair.1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: PhysicalConstants = PhysicalConstants::CODATA_2018;

    #[test]
    fn constructors_normalize() {
        let g = GridSpec::new(16, 1e-8).unwrap();
        let s = WaveState::two_point(&g, 3, 9).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert!((s.coherence(3, 9).re - 0.5).abs() < 1e-15);
        assert!(WaveState::two_point(&g, 3, 3).is_err());
        assert!(WaveState::delta(&g, 16).is_err());
        assert!(WaveState::new(vec![Complex64::default(); 4], 0.0).is_err());
        let gs = WaveState::gaussian(&g, 0.0, 2e-8, 0.0).unwrap();
        assert!((gs.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_moments() {
        let g = GridSpec::new(256, 1.0).unwrap();
        let sigma = 10.0;
        let s = WaveState::gaussian(&g, 3.0, sigma, 0.0).unwrap();
        let o = observe(&s, &g, 1.0, &vec![0.0; 256], 1.0, (0, 1));
        assert!((o.mean_x - 3.0).abs() < 1e-10);
        assert!((o.mean_x2 - 9.0 - sigma * sigma).abs() < 1e-8);
        // continuum ⟨p²⟩ = ħ²/(4σ²); stencil error O(dx²/σ²)
        assert!((o.mean_p2 / (0.25 / (sigma * sigma)) - 1.0).abs() < 2e-3);
    }

    #[test]
    fn hamiltonian_spectrum_and_limit() {
        let g = GridSpec::new(16, 1e-8).unwrap();
        let m = 1e-25;
        let h = Hamiltonian::free(&g, m, &C).unwrap();
        assert_eq!(h.kinetic_eigenvalue(0), 0.0);
        let top = h.kinetic_eigenvalue(8);
        assert!((top - 2.0 * C.hbar * C.hbar / (m * 1e-16)).abs() / top < 1e-14);
        let limit = h.stability_limit().unwrap();
        assert!((limit - 1e-16 * m / C.hbar).abs() / limit < 1e-14);
        assert!(Hamiltonian::zero(&g, &C).stability_limit().is_none());
        assert!(h.clone().with_potential(vec![0.0; 3]).is_err());
    }

    #[test]
    fn mass_density() {
        let g = GridSpec::new(8, 0.5).unwrap();
        let mop = MassDensityOperator::point_particle(&g, 2.0).unwrap();
        assert_eq!(mop.density(3), 4.0);
        assert_eq!(mop.particle_mass(), 2.0);
        assert!(MassDensityOperator::from_site_masses(&g, vec![1.0; 7]).is_err());
        assert!(MassDensityOperator::from_site_masses(&g, vec![-1.0; 8]).is_err());
    }
}
