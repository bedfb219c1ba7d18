//! Parallel trajectory ensembles with a schedule-independent reduction.
//!
//! Trajectories are grouped into fixed chunks of [`CHUNK`] consecutive
//! indices. Each chunk is accumulated sequentially on whichever thread picks
//! it up, and chunk results are merged left to right in index order, so the
//! floating-point result is bit-identical for any thread count.

use std::ops::Range;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::master::DensityState;
use crate::sde::{evolve, CollapseSystem, DriftStats, TrajectoryConfig, TrajectoryRecord};
use crate::state::WaveState;

pub const CHUNK: u64 = 16;

/// Sum and sum of squares of a real sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, o: &Moments) {
        self.count += o.count;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexMoments {
    pub count: u64,
    pub sum: Complex64,
    pub sum_abs_sq: f64,
}

impl ComplexMoments {
    pub fn push(&mut self, z: Complex64) {
        self.count += 1;
        self.sum += z;
        self.sum_abs_sq += z.norm_sqr();
    }

    pub fn merge(&mut self, o: &ComplexMoments) {
        self.count += o.count;
        self.sum += o.sum;
        self.sum_abs_sq += o.sum_abs_sq;
    }

    pub fn mean(&self) -> Complex64 {
        self.sum / self.count as f64
    }

    /// Standard error of the complex mean, E|z − E z|² / N.
    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let var = ((self.sum_abs_sq - self.sum.norm_sqr() / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Ensemble statistics at one recorded time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub time: f64,
    pub x: Moments,
    pub x2: Moments,
    pub p2: Moments,
    pub energy: Moments,
    pub coherence: ComplexMoments,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub n_trajectories: u64,
    pub series: Vec<SeriesPoint>,
    /// Σ |ψ⟩⟨ψ| over trajectories at the final time.
    pub density_sum: DMatrix<Complex64>,
    pub final_time: f64,
    pub drift: DriftStats,
}

impl EnsembleStats {
    fn from_record(rec: &TrajectoryRecord) -> Self {
        let mut s = EnsembleStats {
            n_trajectories: 0,
            series: rec
                .samples
                .iter()
                .map(|o| SeriesPoint {
                    time: o.time,
                    ..Default::default()
                })
                .collect(),
            density_sum: DMatrix::zeros(rec.final_state.len(), rec.final_state.len()),
            final_time: rec.final_state.time(),
            drift: DriftStats::default(),
        };
        s.add(rec);
        s
    }

    fn add(&mut self, rec: &TrajectoryRecord) {
        self.n_trajectories += 1;
        for (pt, o) in self.series.iter_mut().zip(&rec.samples) {
            pt.x.push(o.mean_x);
            pt.x2.push(o.mean_x2);
            pt.p2.push(o.mean_p2);
            pt.energy.push(o.energy);
            pt.coherence.push(o.coherence);
        }
        let psi = rec.final_state.amplitudes();
        let n = psi.len();
        for j in 0..n {
            let cj = psi[j].conj();
            for i in 0..n {
                self.density_sum[(i, j)] += psi[i] * cj;
            }
        }
        self.drift.merge(&rec.drift);
    }

    /// Associative merge; `other` must come from the same configuration.
    pub fn merge(&mut self, other: &EnsembleStats) -> Result<()> {
        if self.series.len() != other.series.len() {
            return Err(Error::DimensionMismatch {
                expected: self.series.len(),
                found: other.series.len(),
            });
        }
        if self.density_sum.shape() != other.density_sum.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.density_sum.nrows(),
                found: other.density_sum.nrows(),
            });
        }
        self.n_trajectories += other.n_trajectories;
        for (a, b) in self.series.iter_mut().zip(&other.series) {
            a.x.merge(&b.x);
            a.x2.merge(&b.x2);
            a.p2.merge(&b.p2);
            a.energy.merge(&b.energy);
            a.coherence.merge(&b.coherence);
        }
        self.density_sum += &other.density_sum;
        self.drift.merge(&other.drift);
        Ok(())
    }

    /// Ensemble-mean density matrix at the final time.
    pub fn mean_density_matrix(&self) -> DensityState {
        DensityState::from_parts(
            self.density_sum.map(|z| z / self.n_trajectories as f64),
            self.final_time,
        )
    }

    pub fn times(&self) -> Vec<f64> {
        self.series.iter().map(|p| p.time).collect()
    }
}

/// Runs trajectories `0..config.n_trajectories`.
pub fn run_ensemble(
    initial: &WaveState,
    system: &CollapseSystem,
    config: &TrajectoryConfig,
) -> Result<EnsembleStats> {
    run_ensemble_range(initial, system, config, 0..config.n_trajectories as u64)
}

/// Runs the trajectories with indices in `range`. Disjoint ranges can be
/// merged afterwards with [`EnsembleStats::merge`].
pub fn run_ensemble_range(
    initial: &WaveState,
    system: &CollapseSystem,
    config: &TrajectoryConfig,
    range: Range<u64>,
) -> Result<EnsembleStats> {
    config.validate(system)?;
    if range.is_empty() {
        return Err(Error::invalid("n_trajectories", "ensemble range is empty"));
    }
    let starts: Vec<u64> = range.clone().step_by(CHUNK as usize).collect();
    let partials: Vec<(Option<EnsembleStats>, Vec<(usize, Error)>)> = starts
        .par_iter()
        .map(|&start| {
            let end = (start + CHUNK).min(range.end);
            let mut acc: Option<EnsembleStats> = None;
            let mut failures = Vec::new();
            for index in start..end {
                match evolve(initial, system, config, index) {
                    Ok(rec) => match acc.as_mut() {
                        Some(a) => a.add(&rec),
                        None => acc = Some(EnsembleStats::from_record(&rec)),
                    },
                    Err(e) => failures.push((index as usize, e)),
                }
            }
            (acc, failures)
        })
        .collect();

    let mut total: Option<EnsembleStats> = None;
    let mut failures = Vec::new();
    for (acc, errs) in partials {
        failures.extend(errs);
        if let Some(a) = acc {
            match total.as_mut() {
                Some(t) => t.merge(&a)?,
                None => total = Some(a),
            }
        }
    }
    if !failures.is_empty() {
        return Err(Error::TrajectoryFailures(failures));
    }
    total.ok_or_else(|| Error::invalid("n_trajectories", "no trajectories completed"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::kernel::{csl_kernel, NoiseKernel};
    use crate::physics::{CslParams, PhysicalConstants};
    use crate::sde::Scheme;
    use crate::state::{Hamiltonian, MassDensityOperator};

    const C: PhysicalConstants = PhysicalConstants::CODATA_2018;

    fn system(kernel: NoiseKernel, free: bool) -> CollapseSystem {
        let grid = GridSpec::new(16, 2.5e-8).unwrap();
        let m = 1e-24;
        let h = if free {
            Hamiltonian::free(&grid, m, &C).unwrap()
        } else {
            Hamiltonian::zero(&grid, &C)
        };
        CollapseSystem::new(h, MassDensityOperator::point_particle(&grid, m).unwrap(), kernel).unwrap()
    }

    fn cfg(n_trajectories: usize, dt: f64, n_steps: usize) -> TrajectoryConfig {
        TrajectoryConfig {
            dt,
            n_steps,
            master_seed: 5,
            n_trajectories,
            scheme: Scheme::EulerMaruyamaRenormalized,
            stride: 10,
            coherence_pair: (4, 12),
        }
    }

    #[test]
    fn single_trajectory_gives_pure_projector() {
        let k = csl_kernel(&CslParams::new(1e-10, 1e-7).unwrap()).unwrap();
        let sys = system(k, false);
        let psi = WaveState::two_point(sys.grid(), 4, 12).unwrap();
        let c = cfg(1, 1e-3, 50);
        let stats = run_ensemble(&psi, &sys, &c).unwrap();
        let rec = evolve(&psi, &sys, &c, 0).unwrap();
        let expected = DensityState::from_pure(&rec.final_state);
        let got = stats.mean_density_matrix();
        assert!(got.trace_distance(&expected).unwrap() < 1e-14);
        assert!((got.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduction_is_schedule_independent() {
        let k = csl_kernel(&CslParams::new(1e-10, 1e-7).unwrap()).unwrap();
        let sys = system(k, false);
        let psi = WaveState::two_point(sys.grid(), 4, 12).unwrap();
        let c = cfg(50, 1e-3, 40);
        let a = run_ensemble(&psi, &sys, &c).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_ensemble(&psi, &sys, &c).unwrap());
        assert_eq!(a, b);
        // splitting at a chunk boundary and merging reproduces the whole
        let mut left = run_ensemble_range(&psi, &sys, &c, 0..48).unwrap();
        let right = run_ensemble_range(&psi, &sys, &c, 48..50).unwrap();
        left.merge(&right).unwrap();
        assert_eq!(left, a);
        a.mean_density_matrix().check().unwrap();
    }

    #[test]
    fn unitary_ensemble_conserves_energy() {
        let sys = system(NoiseKernel::zero(), true);
        let dt = 0.1 * sys.hamiltonian().stability_limit().unwrap();
        let psi = WaveState::gaussian(sys.grid(), 0.0, 5e-8, 2e6).unwrap();
        let stats = run_ensemble(&psi, &sys, &cfg(4, dt, 2000)).unwrap();
        let e0 = stats.series[0].energy.mean();
        for pt in &stats.series {
            assert!(((pt.energy.mean() - e0) / e0).abs() < 1e-10);
        }
    }

    #[test]
    fn failures_are_aggregated() {
        let k = csl_kernel(&CslParams::new(1e30, 1e-7).unwrap()).unwrap();
        let sys = system(k, false);
        let psi = WaveState::two_point(sys.grid(), 4, 12).unwrap();
        match run_ensemble(&psi, &sys, &cfg(20, 1e-3, 5)) {
            Err(Error::TrajectoryFailures(f)) => {
                assert_eq!(f.len(), 20);
                assert_eq!(f[0].0, 0);
                assert_eq!(f[19].0, 19);
            }
            other => panic!("expected failures, got {other:?}"),
        }
    }

    #[test]
    fn moments() {
        let mut m = Moments::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.push(x);
        }
        assert_eq!(m.mean(), 2.5);
        assert!((m.variance() - 5.0 / 3.0).abs() < 1e-15);
    }
}
