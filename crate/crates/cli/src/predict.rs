use collapse_core::{contrast_reduction, heating_power, HeatingSetup, InterferometricSetup};
use serde_json::{json, Value};

use crate::args::{ContrastArgs, HeatingArgs};
use crate::config::{resolve_mass, resolve_model, FileConfig};
use crate::error::{CliError, CliResult};

fn required(v: Option<f64>, flag: &str) -> CliResult<f64> {
    v.ok_or_else(|| CliError::config(format!("{flag} is required")))
}

pub fn contrast(args: &ContrastArgs) -> CliResult<Value> {
    let file = FileConfig::load(args.config.as_deref())?;
    let model = resolve_model(&args.model, &file)?;
    let p = model.csl()?;
    let mass = resolve_mass(&args.mass, &file)?;
    let setup = InterferometricSetup {
        mass,
        flight_time: required(args.time_s.or(file.time_s), "--time-s")?,
        separation: required(args.separation_m.or(file.separation_m), "--separation-m")?,
    };
    let value = contrast_reduction(&p, &setup)?;
    Ok(json!({
        "value": value,
        "units": "dimensionless",
        "inputs": {
            "model": model,
            "mass_kg": mass,
            "time_s": setup.flight_time,
            "separation_m": setup.separation,
        },
    }))
}

pub fn heating(args: &HeatingArgs) -> CliResult<Value> {
    let file = FileConfig::load(args.config.as_deref())?;
    let model = resolve_model(&args.model, &file)?;
    let p = model.csl()?;
    let mass = resolve_mass(&args.mass, &file)?;
    let value = heating_power(&p, &HeatingSetup { mass })?;
    Ok(json!({
        "value": value,
        "units": "W",
        "inputs": {
            "model": model,
            "mass_kg": mass,
        },
    }))
}
