//! Stochastic collapse trajectories for a single particle on a ring.
//!
//! With the position-diagonal mass density `M̂(x_i) = μ_i/dx·P_i`, the grid
//! version of the collapse equation (Itô form) reads, per site `a`,
//!
//! ```text
//! dψ_a = −(i/ħ)(Hψ)_a dt
//!        + (μ_a dW_a − ⟨μ dW⟩) ψ_a
//!        − ½ (μ_a² D₀ − 2 μ_a (D w)_a + w·D w) ψ_a dt
//! ```
//!
//! where `p_i = |ψ_i|²`, `w_i = μ_i p_i`, `⟨μ dW⟩ = Σ_i w_i dW_i`, `D` is the
//! circulant kernel matrix on the ring and `dW` has covariance `D·dt`.
//!
//! One step applies the two collapse terms as an Euler–Maruyama update,
//! then the exact unitary propagator of `H` (Strang-split when a potential
//! is present), then renormalizes. The norm change before renormalization
//! is kept as a diagnostic: the linear noise term contributes exactly zero
//! to it, so with the nonlinear feedback in place the drift is O(dt).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{forward_real, FftPair};
use crate::grid::GridSpec;
use crate::kernel::NoiseKernel;
use crate::noise::{spectral_factor, NoiseField, NoiseStream, SpectralFactor, StreamId};
use crate::state::{l2_norm, observe, Hamiltonian, MassDensityOperator, Observables, WaveState};

/// Pre-renormalization norms outside this band abort the trajectory.
pub const NORM_BAND: (f64, f64) = (0.5, 2.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Full collapse equation, Euler–Maruyama with renormalization.
    #[default]
    EulerMaruyamaRenormalized,
    /// Drops the ⟨M̂⟩ feedback and the damping term, keeping only the bare
    /// multiplicative noise. Not norm-preserving; a diagnostic control.
    LinearNoiseOnly,
}

/// Everything a trajectory needs that does not change between steps.
#[derive(Debug, Clone)]
pub struct CollapseSystem {
    hamiltonian: Hamiltonian,
    mop: MassDensityOperator,
    kernel: NoiseKernel,
    factor: SpectralFactor,
    kernel_at_zero: f64,
    kernel_spectrum: Vec<f64>,
    fft: FftPair,
}

impl CollapseSystem {
    pub fn new(hamiltonian: Hamiltonian, mop: MassDensityOperator, kernel: NoiseKernel) -> Result<Self> {
        let grid = *hamiltonian.grid();
        let n = grid.n_points();
        if mop.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: mop.len(),
            });
        }
        let factor = spectral_factor(&kernel, &grid)?;
        let row = kernel.periodic_row(n, grid.dx());
        let kernel_spectrum = forward_real(&row).into_iter().map(|z| z.re).collect();
        Ok(CollapseSystem {
            hamiltonian,
            mop,
            kernel,
            factor,
            kernel_at_zero: row[0],
            kernel_spectrum,
            fft: FftPair::new(n),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.hamiltonian.grid()
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn mass_density(&self) -> &MassDensityOperator {
        &self.mop
    }

    pub fn kernel(&self) -> &NoiseKernel {
        &self.kernel
    }

    pub fn spectral_factor(&self) -> &SpectralFactor {
        &self.factor
    }

    pub fn particle_mass(&self) -> f64 {
        self.mop.particle_mass()
    }

    pub fn observe(&self, state: &WaveState, pair: (usize, usize)) -> Observables {
        observe(
            state,
            self.grid(),
            self.particle_mass(),
            self.hamiltonian.potential(),
            self.hamiltonian.hbar(),
            pair,
        )
    }

    /// Unitary propagator factors for a fixed step.
    pub fn propagator(&self, dt: f64) -> Propagator {
        let h = &self.hamiltonian;
        let hbar = h.hbar();
        let n = self.grid().n_points();
        let kinetic = h
            .has_kinetic()
            .then(|| (0..n).map(|k| Complex64::from_polar(1.0, -h.kinetic_eigenvalue(k) * dt / hbar)).collect());
        // half step when sandwiching a kinetic step, full step otherwise
        let frac = if kinetic.is_some() { 0.5 } else { 1.0 };
        let potential = h
            .has_potential()
            .then(|| h.potential().iter().map(|v| Complex64::from_polar(1.0, -v * dt * frac / hbar)).collect());
        Propagator {
            dt,
            kinetic,
            potential,
        }
    }

    pub fn workspace(&self) -> Workspace {
        let n = self.grid().n_points();
        Workspace {
            noise: vec![0.0; n],
            buf: vec![Complex64::default(); n],
            scratch: vec![Complex64::default(); self.fft.scratch_len().max(self.factor.scratch_len())],
            weights: vec![0.0; n],
        }
    }

    /// Advances `psi` by one step in place and returns the pre-renormalization
    /// norm drift `‖ψ'‖ − 1`.
    pub fn advance(
        &self,
        psi: &mut [Complex64],
        noise: &[f64],
        prop: &Propagator,
        scheme: Scheme,
        ws: &mut Workspace,
    ) -> Result<f64> {
        let n = psi.len();
        if n != self.grid().n_points() || noise.len() != n {
            return Err(Error::DimensionMismatch {
                expected: self.grid().n_points(),
                found: if noise.len() != n { noise.len() } else { n },
            });
        }
        let mu = self.mop.site_mass();
        let dt = prop.dt;
        match scheme {
            Scheme::EulerMaruyamaRenormalized => {
                let mut mean_noise = 0.0;
                for i in 0..n {
                    let w = mu[i] * psi[i].norm_sqr();
                    ws.weights[i] = w;
                    mean_noise += w * noise[i];
                }
                self.convolve_weights(ws);
                // ws.buf now holds D·w in its real parts
                let mut w_dw = 0.0;
                for i in 0..n {
                    w_dw += ws.weights[i] * ws.buf[i].re;
                }
                let d0 = self.kernel_at_zero;
                for i in 0..n {
                    let damping = mu[i] * mu[i] * d0 - 2.0 * mu[i] * ws.buf[i].re + w_dw;
                    let factor = 1.0 + (mu[i] * noise[i] - mean_noise) - 0.5 * dt * damping;
                    psi[i] *= factor;
                }
            }
            Scheme::LinearNoiseOnly => {
                for i in 0..n {
                    psi[i] *= 1.0 + mu[i] * noise[i];
                }
            }
        }
        self.apply_unitary(psi, prop, ws);
        let norm = l2_norm(psi);
        if !(norm >= NORM_BAND.0 && norm <= NORM_BAND.1) {
            return Err(Error::NumericalBlowup { step: 0, norm });
        }
        for z in psi.iter_mut() {
            *z /= norm;
        }
        Ok(norm - 1.0)
    }

    fn convolve_weights(&self, ws: &mut Workspace) {
        for (z, &w) in ws.buf.iter_mut().zip(&ws.weights) {
            *z = Complex64::new(w, 0.0);
        }
        self.fft.forward(&mut ws.buf, &mut ws.scratch);
        for (z, &f) in ws.buf.iter_mut().zip(&self.kernel_spectrum) {
            *z *= f;
        }
        self.fft.inverse(&mut ws.buf, &mut ws.scratch);
    }

    fn apply_unitary(&self, psi: &mut [Complex64], prop: &Propagator, ws: &mut Workspace) {
        if let Some(v) = &prop.potential {
            for (z, ph) in psi.iter_mut().zip(v) {
                *z *= ph;
            }
        }
        if let Some(k) = &prop.kinetic {
            self.fft.forward(psi, &mut ws.scratch);
            for (z, ph) in psi.iter_mut().zip(k) {
                *z *= ph;
            }
            self.fft.inverse(psi, &mut ws.scratch);
            if let Some(v) = &prop.potential {
                for (z, ph) in psi.iter_mut().zip(v) {
                    *z *= ph;
                }
            }
        }
    }
}

/// Precomputed phase factors of `exp(−iH dt/ħ)`.
#[derive(Debug, Clone)]
pub struct Propagator {
    dt: f64,
    kinetic: Option<Vec<Complex64>>,
    potential: Option<Vec<Complex64>>,
}

impl Propagator {
    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// Scratch buffers reused across steps of one trajectory.
#[derive(Debug, Clone)]
pub struct Workspace {
    noise: Vec<f64>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
    weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    /// `‖ψ'‖ − 1` before renormalization.
    pub norm_drift: f64,
    pub imaginary_residue: f64,
}

/// One step of the collapse equation. `noise` must have been sampled for
/// this grid and for the same `dt`.
pub fn step(
    state: &WaveState,
    system: &CollapseSystem,
    noise: &NoiseField,
    dt: f64,
    scheme: Scheme,
) -> Result<(WaveState, StepDiagnostics)> {
    if noise.dt != dt {
        return Err(Error::invalid(
            "dt",
            format!("noise was sampled for dt = {:e}, step requested {dt:e}", noise.dt),
        ));
    }
    let prop = system.propagator(dt);
    let mut ws = system.workspace();
    let mut psi = state.amplitudes().to_vec();
    let norm_drift = system.advance(&mut psi, &noise.increments, &prop, scheme, &mut ws)?;
    Ok((
        WaveState::from_parts(psi, state.time() + dt),
        StepDiagnostics {
            norm_drift,
            imaginary_residue: noise.imaginary_residue,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    /// Time step, s.
    pub dt: f64,
    pub n_steps: usize,
    pub master_seed: u64,
    pub n_trajectories: usize,
    #[serde(default)]
    pub scheme: Scheme,
    /// Observables are recorded every `stride` steps and at the last step.
    pub stride: usize,
    /// Site pair whose coherence ψ_a ψ_b* is tracked.
    pub coherence_pair: (usize, usize),
}

impl TrajectoryConfig {
    /// Default step `0.1·dx²·m/ħ` for systems with a kinetic term.
    pub fn default_dt(system: &CollapseSystem) -> Option<f64> {
        system.hamiltonian().stability_limit().map(|limit| 0.1 * limit)
    }

    pub fn validate(&self, system: &CollapseSystem) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if let Some(limit) = system.hamiltonian().stability_limit() {
            if self.dt >= limit {
                return Err(Error::invalid(
                    "dt",
                    format!("{:e} s exceeds the kinetic stability bound dx^2 m/hbar = {limit:e} s", self.dt),
                ));
            }
        }
        if self.n_trajectories == 0 {
            return Err(Error::invalid("n_trajectories", "must be at least 1"));
        }
        if self.stride == 0 {
            return Err(Error::invalid("stride", "must be at least 1"));
        }
        let n = system.grid().n_points();
        if self.coherence_pair.0 >= n || self.coherence_pair.1 >= n {
            return Err(Error::invalid(
                "coherence_pair",
                format!("sites must lie below {n}, got {:?}", self.coherence_pair),
            ));
        }
        Ok(())
    }

    /// Number of recorded samples, including t = 0.
    pub fn sample_count(&self) -> usize {
        sample_steps(self.n_steps, self.stride).count()
    }
}

pub(crate) fn sample_steps(n_steps: usize, stride: usize) -> impl Iterator<Item = usize> {
    let last = (n_steps % stride != 0).then_some(n_steps);
    (0..=n_steps).step_by(stride).chain(last)
}

/// Running norm-drift statistics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DriftStats {
    pub steps: u64,
    pub sum_abs: f64,
    pub sum: f64,
    pub max_abs: f64,
}

impl DriftStats {
    pub fn record(&mut self, drift: f64) {
        self.steps += 1;
        self.sum_abs += drift.abs();
        self.sum += drift;
        self.max_abs = self.max_abs.max(drift.abs());
    }

    pub fn merge(&mut self, other: &DriftStats) {
        self.steps += other.steps;
        self.sum_abs += other.sum_abs;
        self.sum += other.sum;
        self.max_abs = self.max_abs.max(other.max_abs);
    }

    pub fn mean_abs(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.sum_abs / self.steps as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub index: u64,
    pub samples: Vec<Observables>,
    pub final_state: WaveState,
    pub drift: DriftStats,
}

/// Integrates one trajectory. The noise stream is fixed by
/// `(config.master_seed, trajectory_index)`, so the result is reproducible
/// regardless of which thread runs it.
pub fn evolve(
    initial: &WaveState,
    system: &CollapseSystem,
    config: &TrajectoryConfig,
    trajectory_index: u64,
) -> Result<TrajectoryRecord> {
    config.validate(system)?;
    let n = system.grid().n_points();
    if initial.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: initial.len(),
        });
    }
    let mut stream = NoiseStream::new(StreamId {
        master_seed: config.master_seed,
        trajectory: trajectory_index,
    });
    let prop = system.propagator(config.dt);
    let mut ws = system.workspace();
    let mut noise_buf = std::mem::take(&mut ws.noise);
    let mut psi = initial.amplitudes().to_vec();
    let t0 = initial.time();
    let mut samples = Vec::with_capacity(config.sample_count());
    let mut drift = DriftStats::default();
    let pair = config.coherence_pair;
    let stride = config.stride;

    samples.push(system.observe(initial, pair));
    for k in 1..=config.n_steps {
        system
            .factor
            .sample_into(config.dt, &mut stream, &mut noise_buf, &mut ws.buf, &mut ws.scratch);
        let d = system
            .advance(&mut psi, &noise_buf, &prop, config.scheme, &mut ws)
            .map_err(|e| match e {
                Error::NumericalBlowup { norm, .. } => Error::NumericalBlowup { step: k, norm },
                other => other,
            })?;
        drift.record(d);
        if k % stride == 0 || k == config.n_steps {
            let state = WaveState::from_parts(psi.clone(), t0 + k as f64 * config.dt);
            samples.push(system.observe(&state, pair));
        }
    }
    let final_state = WaveState::from_parts(psi, t0 + config.n_steps as f64 * config.dt);
    Ok(TrajectoryRecord {
        index: trajectory_index,
        samples,
        final_state,
        drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::csl_kernel;
    use crate::noise::sample_increment;
    use crate::physics::{CslParams, PhysicalConstants};

    const C: PhysicalConstants = PhysicalConstants::CODATA_2018;

    fn zero_h_system(n: usize, dx: f64, mass: f64, kernel: NoiseKernel) -> CollapseSystem {
        let grid = GridSpec::new(n, dx).unwrap();
        CollapseSystem::new(
            Hamiltonian::zero(&grid, &C),
            MassDensityOperator::point_particle(&grid, mass).unwrap(),
            kernel,
        )
        .unwrap()
    }

    fn config(dt: f64, n_steps: usize) -> TrajectoryConfig {
        TrajectoryConfig {
            dt,
            n_steps,
            master_seed: 11,
            n_trajectories: 1,
            scheme: Scheme::EulerMaruyamaRenormalized,
            stride: 1,
            coherence_pair: (0, 1),
        }
    }

    #[test]
    fn delta_state_is_a_fixed_point() {
        let m = C.m0;
        let kernel = csl_kernel(&CslParams::new(1.0, 1e-7).unwrap()).unwrap();
        let sys = zero_h_system(16, 5e-8, m, kernel);
        let grid = *sys.grid();
        let psi = WaveState::delta(&grid, 5).unwrap();
        let mut s = NoiseStream::new(StreamId {
            master_seed: 1,
            trajectory: 0,
        });
        let mut state = psi.clone();
        for _ in 0..100 {
            let noise = sample_increment(sys.spectral_factor(), 1e-3, &mut s).unwrap();
            let (next, diag) = step(&state, &sys, &noise, 1e-3, Scheme::EulerMaruyamaRenormalized).unwrap();
            assert!(diag.norm_drift.abs() < 1e-12);
            state = next;
        }
        for (a, b) in state.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_steps_returns_initial_state() {
        let sys = zero_h_system(16, 1e-8, C.m0, NoiseKernel::zero());
        let psi = WaveState::two_point(sys.grid(), 0, 1).unwrap();
        let rec = evolve(&psi, &sys, &config(1e-3, 0), 0).unwrap();
        assert_eq!(rec.final_state, psi);
        assert_eq!(rec.samples.len(), 1);
    }

    #[test]
    fn trajectories_are_reproducible() {
        let kernel = csl_kernel(&CslParams::new(1e3, 1e-7).unwrap()).unwrap();
        let sys = zero_h_system(16, 5e-8, C.m0, kernel);
        let psi = WaveState::two_point(sys.grid(), 2, 6).unwrap();
        let cfg = config(1e-5, 200);
        let a = evolve(&psi, &sys, &cfg, 3).unwrap();
        let b = evolve(&psi, &sys, &cfg, 3).unwrap();
        assert_eq!(a, b);
        let c = evolve(&psi, &sys, &cfg, 4).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn grw_nucleon_coherence_is_untouched() {
        let kernel = csl_kernel(&CslParams::new(1e-16, 1e-7).unwrap()).unwrap();
        let sys = zero_h_system(16, 2.5e-8, C.m0, kernel);
        // eight sites apart: d = 2e-7 m = 2 r_C
        let psi = WaveState::two_point(sys.grid(), 4, 12).unwrap();
        let mut cfg = config(0.01, 100);
        cfg.coherence_pair = (4, 12);
        let rec = evolve(&psi, &sys, &cfg, 0).unwrap();
        let last = rec.samples.last().unwrap();
        assert!((last.time - 1.0).abs() < 1e-12);
        assert!(2.0 * last.coherence.norm() >= 1.0 - 1e-10);
    }

    #[test]
    fn blowup_reports_step() {
        // absurd rate so that a single step leaves the norm band
        let kernel = csl_kernel(&CslParams::new(1e30, 1e-7).unwrap()).unwrap();
        let sys = zero_h_system(16, 2.5e-8, C.m0, kernel);
        let psi = WaveState::two_point(sys.grid(), 4, 12).unwrap();
        let err = evolve(&psi, &sys, &config(1.0, 5), 0).unwrap_err();
        assert!(matches!(err, Error::NumericalBlowup { step: 1, .. }), "{err}");
    }

    #[test]
    fn config_validation() {
        let grid = GridSpec::new(16, 1e-8).unwrap();
        let sys = CollapseSystem::new(
            Hamiltonian::free(&grid, C.m0, &C).unwrap(),
            MassDensityOperator::point_particle(&grid, C.m0).unwrap(),
            NoiseKernel::zero(),
        )
        .unwrap();
        let limit = sys.hamiltonian().stability_limit().unwrap();
        assert!(config(limit * 1.01, 1).validate(&sys).is_err());
        assert!(config(limit * 0.5, 1).validate(&sys).is_ok());
        let mut c = config(limit * 0.5, 1);
        c.n_trajectories = 0;
        assert!(c.validate(&sys).is_err());
        let mut c = config(limit * 0.5, 1);
        c.coherence_pair = (0, 16);
        assert!(c.validate(&sys).is_err());
        assert!((TrajectoryConfig::default_dt(&sys).unwrap() - 0.1 * limit).abs() < 1e-30);
    }

    #[test]
    fn sample_schedule() {
        assert_eq!(sample_steps(10, 5).collect::<Vec<_>>(), vec![0, 5, 10]);
        assert_eq!(sample_steps(7, 3).collect::<Vec<_>>(), vec![0, 3, 6, 7]);
        assert_eq!(sample_steps(0, 3).collect::<Vec<_>>(), vec![0]);
    }
}
