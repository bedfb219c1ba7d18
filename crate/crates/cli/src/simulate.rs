use std::path::PathBuf;

use collapse_core::export::{write_observables_csv, EnsembleDocument};
use collapse_core::sde::Scheme;
use collapse_core::{
    evolve, run_ensemble, CollapseSystem, DensityState, EnsembleStats, GridSpec, Hamiltonian, MassDensityOperator,
    MasterEquation, ModelParams, NoiseKernel, Observables, PhysicalConstants, TrajectoryConfig, WaveState,
};
use serde::Serialize;
use serde_json::Value;

use crate::args::{HamiltonianKind, InitialKind, SimulateArgs};
use crate::config::{resolve_mass, resolve_model, resolve_out_dir, FileConfig, ResolvedModel, SCHEMA_VERSION};
use crate::error::{CliError, CliResult};
use crate::provenance::OutputSet;

const DEFAULT_POINTS: usize = 32;
const DEFAULT_STEPS_NO_KINETIC: usize = 100;
const DEFAULT_TRAJECTORIES: usize = 100;
const MAX_STEPS: usize = 100_000_000;
const MAX_ORACLE_RK4_STEPS: usize = 1_000_000;

/// Everything that determines the output bytes; this is what gets hashed.
#[derive(Debug, Serialize)]
pub struct SimulateConfig {
    pub schema_version: u32,
    pub command: &'static str,
    #[serde(flatten)]
    pub model: ResolvedModel,
    pub mass_kg: f64,
    pub time_s: f64,
    pub steps: usize,
    pub dt_s: f64,
    pub grid_points: usize,
    pub dx_m: f64,
    pub hamiltonian: HamiltonianKind,
    pub initial: InitialKind,
    pub separation_m: f64,
    pub width_m: Option<f64>,
    pub coherence_pair: (usize, usize),
    pub trajectories: usize,
    pub seed: u64,
    pub stride: usize,
}

fn default_dx(model: &ResolvedModel) -> f64 {
    match *model {
        ResolvedModel::Csl { rc_m, .. } => rc_m / 2.0,
        // the regularized Newtonian row is only positive semidefinite for dx ≳ 2 R₀
        ResolvedModel::Dp { r0_m, .. } => 2.5 * r0_m,
    }
}

fn kernel_for(model: &ResolvedModel) -> CliResult<NoiseKernel> {
    let c = PhysicalConstants::CODATA_2018;
    Ok(match model.params() {
        ModelParams::Csl(p) => NoiseKernel::csl(&p, &c)?,
        ModelParams::Dp(p) => NoiseKernel::dp(&p, &c)?,
    })
}

struct Plan {
    config: SimulateConfig,
    system: CollapseSystem,
    initial: WaveState,
    trajectory: TrajectoryConfig,
    out_dir: PathBuf,
}

fn plan(args: &SimulateArgs) -> CliResult<Plan> {
    let file = FileConfig::load(args.config.as_deref())?;
    let model = resolve_model(&args.model, &file)?;
    let mass = resolve_mass(&args.mass, &file)?;
    let out_dir = resolve_out_dir(&args.out_dir, &file)?;
    let consts = PhysicalConstants::CODATA_2018;

    let time_s = args
        .time_s
        .or(file.time_s)
        .ok_or_else(|| CliError::config("--time-s is required"))?;
    if !(time_s.is_finite() && time_s > 0.0) {
        return Err(CliError::config(format!("--time-s must be positive, got {time_s}")));
    }
    let grid_points = args.grid_points.or(file.grid_points).unwrap_or(DEFAULT_POINTS);
    let dx_m = args.dx_m.or(file.dx_m).unwrap_or_else(|| default_dx(&model));
    let grid = GridSpec::new(grid_points, dx_m)?;
    let hamiltonian = args.hamiltonian.or(file.hamiltonian).unwrap_or(HamiltonianKind::Zero);
    let initial_kind = args.initial.or(file.initial).unwrap_or(InitialKind::TwoPoint);
    let separation_m = args.separation_m.or(file.separation_m).unwrap_or(4.0 * dx_m);

    let h = match hamiltonian {
        HamiltonianKind::Zero => Hamiltonian::zero(&grid, &consts),
        HamiltonianKind::Free => Hamiltonian::free(&grid, mass, &consts)?,
    };
    let mop = MassDensityOperator::point_particle(&grid, mass)?;
    let system = CollapseSystem::new(h, mop, kernel_for(&model)?)?;

    let sep_sites = (separation_m / dx_m).round();
    if !(sep_sites >= 1.0 && sep_sites < grid_points as f64) {
        return Err(CliError::config(format!(
            "--separation-m {separation_m:e} m must span between 1 and {} grid spacings of {dx_m:e} m",
            grid_points - 1
        )));
    }
    let sep_sites = sep_sites as usize;
    let a = grid_points / 2 - sep_sites / 2;
    let pair = (a, a + sep_sites);
    let (initial, width_m) = match initial_kind {
        InitialKind::TwoPoint => (WaveState::two_point(&grid, pair.0, pair.1)?, None),
        InitialKind::Gaussian => {
            let w = args.width_m.or(file.width_m).unwrap_or(2.0 * dx_m);
            (WaveState::gaussian(&grid, 0.0, w, 0.0)?, Some(w))
        }
    };

    let steps = match args.steps.or(file.steps) {
        Some(s) => s,
        None => match TrajectoryConfig::default_dt(&system) {
            None => DEFAULT_STEPS_NO_KINETIC,
            Some(dt) => {
                let s = (time_s / dt).ceil();
                if s > MAX_STEPS as f64 {
                    return Err(CliError::config(format!(
                        "--time-s {time_s} s needs {s:e} steps at the kinetic step bound; shorten the run or coarsen --dx-m"
                    )));
                }
                s as usize
            }
        },
    };
    if steps == 0 {
        return Err(CliError::config("--steps must be at least 1"));
    }
    let dt_s = time_s / steps as f64;
    let trajectories = args.trajectories.or(file.trajectories).unwrap_or(DEFAULT_TRAJECTORIES);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let stride = args.stride.or(file.stride).unwrap_or((steps / 100).max(1));
    let trajectory = TrajectoryConfig {
        dt: dt_s,
        n_steps: steps,
        master_seed: seed,
        n_trajectories: trajectories,
        scheme: Scheme::EulerMaruyamaRenormalized,
        stride,
        coherence_pair: pair,
    };
    trajectory.validate(&system)?;

    Ok(Plan {
        config: SimulateConfig {
            schema_version: SCHEMA_VERSION,
            command: "simulate",
            model,
            mass_kg: mass,
            time_s,
            steps,
            dt_s,
            grid_points,
            dx_m,
            hamiltonian,
            initial: initial_kind,
            separation_m: sep_sites as f64 * dx_m,
            width_m,
            coherence_pair: pair,
            trajectories,
            seed,
            stride,
        },
        system,
        initial,
        trajectory,
        out_dir,
    })
}

/// Coherence reported relative to its initial magnitude.
fn normalized(mut samples: Vec<Observables>, reference: f64) -> Vec<Observables> {
    if reference > 0.0 {
        for o in &mut samples {
            o.coherence /= reference;
        }
    }
    samples
}

fn ensemble_rows(stats: &EnsembleStats) -> Vec<Observables> {
    stats
        .series
        .iter()
        .map(|p| Observables {
            time: p.time,
            mean_x: p.x.mean(),
            mean_x2: p.x2.mean(),
            mean_p2: p.p2.mean(),
            energy: p.energy.mean(),
            coherence: p.coherence.mean(),
        })
        .collect()
}

fn density_observables(rho: &DensityState, grid: &GridSpec, mass: f64, pair: (usize, usize)) -> Observables {
    let hbar = PhysicalConstants::CODATA_2018.hbar;
    let (mut mean_x, mut mean_x2) = (0.0, 0.0);
    for i in 0..grid.n_points() {
        let p = rho.matrix()[(i, i)].re;
        let x = grid.position(i);
        mean_x += p * x;
        mean_x2 += p * x * x;
    }
    let mean_p2 = rho.mean_p2(grid, hbar);
    Observables {
        time: rho.time(),
        mean_x,
        mean_x2,
        mean_p2,
        energy: mean_p2 / (2.0 * mass),
        coherence: rho.coherence(pair.0, pair.1),
    }
}

/// Master-equation observables at the ensemble sample times, or `None`
/// when the grid or the required step count is too large for the oracle.
fn oracle_series(plan: &Plan, times: &[f64]) -> CliResult<Option<(Vec<Observables>, DensityState)>> {
    let sys = &plan.system;
    let grid = *sys.grid();
    if grid.n_points() > collapse_core::master::MAX_ORACLE_POINTS {
        log::warn!("grid has more than {} points; skipping the master-equation oracle", collapse_core::master::MAX_ORACLE_POINTS);
        return Ok(None);
    }
    let master = MasterEquation::new(sys.hamiltonian(), sys.mass_density(), sys.kernel())?;
    let mut rho = DensityState::from_pure(&plan.initial);
    let exact = sys.hamiltonian().is_zero();
    if !exact {
        let dt = master.suggested_step(rho.matrix())?;
        if plan.config.time_s / dt > MAX_ORACLE_RK4_STEPS as f64 {
            log::warn!("master-equation oracle would need more than {MAX_ORACLE_RK4_STEPS} RK4 steps; skipping it");
            return Ok(None);
        }
    }
    let rho0 = rho.clone();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        rho = if exact {
            master.exact_dephasing(&rho0, t)?
        } else {
            master.evolve_auto(&rho, t)?
        };
        out.push(density_observables(&rho, &grid, sys.particle_mass(), plan.config.coherence_pair));
    }
    Ok(Some((out, rho)))
}

fn csv_bytes(rows: &[Observables], comment: String) -> Vec<u8> {
    let mut buf = Vec::new();
    write_observables_csv(&mut buf, rows, &[comment]).expect("writing to memory cannot fail");
    buf
}

pub fn run(args: &SimulateArgs) -> CliResult<PathBuf> {
    let plan = plan(args)?;
    let config_value = serde_json::to_value(&plan.config).expect("config serializes");
    let mut out = OutputSet::new(plan.out_dir.clone(), "simulate", config_value);
    let pair = plan.config.coherence_pair;
    let c0 = plan.initial.coherence(pair.0, pair.1).norm();

    log::info!(
        "simulating {} trajectories x {} steps (dt = {:e} s)",
        plan.config.trajectories,
        plan.config.steps,
        plan.config.dt_s
    );
    let single = evolve(&plan.initial, &plan.system, &plan.trajectory, 0)?;
    out.write("trajectory.csv", &csv_bytes(&normalized(single.samples, c0), out.hash_comment()))?;

    let stats = run_ensemble(&plan.initial, &plan.system, &plan.trajectory)?;
    out.write(
        "ensemble.csv",
        &csv_bytes(&normalized(ensemble_rows(&stats), c0), out.hash_comment()),
    )?;

    let mut doc = serde_json::to_value(EnsembleDocument::from_stats(&stats)).expect("stats serialize");
    let oracle = oracle_series(&plan, &stats.times())?;
    if let Some((rows, rho_final)) = &oracle {
        out.write("oracle.csv", &csv_bytes(&normalized(rows.clone(), c0), out.hash_comment()))?;
        let td = stats.mean_density_matrix().trace_distance(rho_final)?;
        doc["oracle_trace_distance"] = Value::from(td);
    }
    doc["coherence_reference"] = Value::from(c0);
    doc["config_sha256"] = Value::from(out.hash());
    out.write_json("stats.json", &doc)?;
    out.finish()?;
    Ok(plan.out_dir)
}
