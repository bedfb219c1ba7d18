use std::path::PathBuf;

use collapse_core::exclusion::{combine_on, dp_exclude_from_heating, exclude, log_grid, Measurement, DEFAULT_R0_RANGE, DEFAULT_RC_RANGE};
use collapse_core::export::{csv_field, format_value, write_region_csv};
use collapse_core::plot::exclusion_plot;
use collapse_core::{parse_records, presets, Error};
use serde_json::json;

use crate::args::ExcludeArgs;
use crate::config::{resolve_out_dir, sha256_hex, FileConfig, SCHEMA_VERSION};
use crate::error::{CliError, CliResult};
use crate::provenance::OutputSet;

pub fn run(args: &ExcludeArgs) -> CliResult<PathBuf> {
    let file = FileConfig::load(args.config.as_deref())?;
    let records_path = args
        .records
        .clone()
        .or_else(|| file.path(&file.records))
        .ok_or_else(|| CliError::config("--records is required"))?;
    let out_dir = resolve_out_dir(&args.out_dir, &file)?;
    let text = std::fs::read_to_string(&records_path).map_err(|e| CliError::io(&records_path, e))?;
    let records = parse_records(&text).map_err(|e| match e {
        Error::InvalidRecord { path, message } => CliError::config(format!(
            "{}: {}: {message}",
            records_path.display(),
            if path.is_empty() { "/" } else { path.as_str() }
        )),
        other => other.into(),
    })?;

    let (lo, hi, n) = DEFAULT_RC_RANGE;
    let rc_min = args.rc_min_m.or(file.rc_min_m).unwrap_or(lo);
    let rc_max = args.rc_max_m.or(file.rc_max_m).unwrap_or(hi);
    let rc_points = args.rc_points.or(file.rc_points).unwrap_or(n);
    let grid = log_grid(rc_min, rc_max, rc_points)?;

    let config = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "exclude",
        "records_sha256": sha256_hex(text.as_bytes()),
        "rc_min_m": rc_min,
        "rc_max_m": rc_max,
        "rc_points": rc_points,
    });
    let mut out = OutputSet::new(out_dir.clone(), "exclude", config);

    let regions = records
        .iter()
        .map(|r| exclude(r, &grid))
        .collect::<Result<Vec<_>, _>>()?;
    let set = combine_on(grid, regions)?;

    let mut csv = Vec::new();
    write_region_csv(&mut csv, &set, &[out.hash_comment()]).map_err(|e| CliError::io(&out_dir, e))?;
    out.write("exclusion.csv", &csv)?;

    let svg = exclusion_plot(&set, &presets(), vec![out.hash_comment()]).render();
    out.write("exclusion.svg", svg.as_bytes())?;

    let (r0_lo, r0_hi, r0_n) = DEFAULT_R0_RANGE;
    let r0_grid = log_grid(r0_lo, r0_hi, r0_n)?;
    let mut dp = format!("# {}\nsource,r0_star_m,saturated\n", out.hash_comment());
    for rec in records
        .iter()
        .filter(|r| matches!(r.measurement, Measurement::HeatingBound { .. }))
    {
        let (r0, saturated) = match dp_exclude_from_heating(rec, &r0_grid) {
            Ok(ex) => (format_value(ex.r0_star), ex.saturated.to_string()),
            Err(Error::NoExclusion { .. }) => ("none".to_owned(), "false".to_owned()),
            Err(e) => return Err(e.into()),
        };
        dp.push_str(&format!("{},{r0},{saturated}\n", csv_field(&rec.label)));
    }
    out.write("dp_bounds.csv", dp.as_bytes())?;
    out.finish()?;
    Ok(out_dir)
}
