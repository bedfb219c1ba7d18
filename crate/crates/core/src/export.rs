//! CSV and JSON serialization of observables, ensembles and exclusion regions.

use std::io::{self, Write};

use serde::Serialize;

use crate::ensemble::EnsembleStats;
use crate::exclusion::RegionSet;
use crate::state::Observables;

pub const ENSEMBLE_SCHEMA_VERSION: u32 = 1;

pub const OBSERVABLE_COLUMNS: [&str; 6] = ["time", "mean_x", "mean_x2", "mean_p2", "energy", "coherence"];
pub const REGION_COLUMNS: [&str; 3] = ["rC", "lambda_star", "source"];

/// Shortest round-trip scientific notation; `+∞` is written as `inf`.
pub fn format_value(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_owned()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_owned()
    } else {
        format!("{v:e}")
    }
}

fn write_preamble<W: Write>(w: &mut W, comments: &[String]) -> io::Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    Ok(())
}

fn write_row<W: Write>(w: &mut W, values: &[f64]) -> io::Result<()> {
    let row: Vec<String> = values.iter().map(|&v| format_value(v)).collect();
    writeln!(w, "{}", row.join(","))
}

/// One row per sample of a single trajectory.
pub fn write_observables_csv<W: Write>(w: &mut W, samples: &[Observables], comments: &[String]) -> io::Result<()> {
    write_preamble(w, comments)?;
    writeln!(w, "{}", OBSERVABLE_COLUMNS.join(","))?;
    for o in samples {
        write_row(
            w,
            &[o.time, o.mean_x, o.mean_x2, o.mean_p2, o.energy, o.coherence.norm()],
        )?;
    }
    Ok(())
}

/// Ensemble means in the trajectory schema; `coherence` is |E[ψ_a ψ_b*]|.
pub fn write_ensemble_csv<W: Write>(w: &mut W, stats: &EnsembleStats, comments: &[String]) -> io::Result<()> {
    write_preamble(w, comments)?;
    writeln!(w, "{}", OBSERVABLE_COLUMNS.join(","))?;
    for p in &stats.series {
        write_row(
            w,
            &[
                p.time,
                p.x.mean(),
                p.x2.mean(),
                p.p2.mean(),
                p.energy.mean(),
                p.coherence.mean().norm(),
            ],
        )?;
    }
    Ok(())
}

/// Combined boundary; unbound grid points carry source `none`.
pub fn write_region_csv<W: Write>(w: &mut W, set: &RegionSet, comments: &[String]) -> io::Result<()> {
    write_preamble(w, comments)?;
    writeln!(w, "{}", REGION_COLUMNS.join(","))?;
    for (i, (&r, &b)) in set.rc_samples.iter().zip(&set.combined_boundary).enumerate() {
        let source = set.binding_source(i).unwrap_or("none");
        writeln!(w, "{},{},{}", format_value(r), format_value(b), csv_field(source))?;
    }
    Ok(())
}

/// Quotes a CSV field when it contains a delimiter, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesRow {
    pub time: f64,
    pub mean_x: f64,
    pub mean_x_se: f64,
    pub mean_x2: f64,
    pub mean_p2: f64,
    pub mean_p2_se: f64,
    pub energy: f64,
    pub coherence_re: f64,
    pub coherence_im: f64,
    pub coherence_abs: f64,
    pub coherence_se: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DriftSummary {
    pub steps: u64,
    pub mean_abs: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleDocument {
    pub schema_version: u32,
    pub n_trajectories: u64,
    pub final_time: f64,
    pub final_purity: f64,
    pub norm_drift: DriftSummary,
    pub series: Vec<SeriesRow>,
}

impl EnsembleDocument {
    pub fn from_stats(stats: &EnsembleStats) -> Self {
        EnsembleDocument {
            schema_version: ENSEMBLE_SCHEMA_VERSION,
            n_trajectories: stats.n_trajectories,
            final_time: stats.final_time,
            final_purity: stats.mean_density_matrix().purity(),
            norm_drift: DriftSummary {
                steps: stats.drift.steps,
                mean_abs: stats.drift.mean_abs(),
                max_abs: stats.drift.max_abs,
            },
            series: stats
                .series
                .iter()
                .map(|p| {
                    let c = p.coherence.mean();
                    SeriesRow {
                        time: p.time,
                        mean_x: p.x.mean(),
                        mean_x_se: p.x.std_error(),
                        mean_x2: p.x2.mean(),
                        mean_p2: p.p2.mean(),
                        mean_p2_se: p.p2.std_error(),
                        energy: p.energy.mean(),
                        coherence_re: c.re,
                        coherence_im: c.im,
                        coherence_abs: c.norm(),
                        coherence_se: p.coherence.std_error(),
                    }
                })
                .collect(),
        }
    }
}
