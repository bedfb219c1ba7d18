//! Experimental bounds mapped into excluded regions of parameter space.
//!
//! A CSL region is a boundary curve λ*(r_C) sampled on a log-spaced grid;
//! every λ strictly above the curve is excluded. `+∞` marks grid points
//! where a record excludes nothing. DP bounds are intervals `(0, R₀*)`.

use serde_json::{Map, Value};

use crate::error::{require_positive, Error, Result};
use crate::kernel::NoiseKernel;
use crate::master::heating_rate_1d_with;
use crate::physics::{CslParams, DpParams, PhysicalConstants};
use crate::predictions::contrast_bracket;

/// Default CSL grid: 200 log-spaced r_C values over [1e-9, 1e-3] m.
pub const DEFAULT_RC_RANGE: (f64, f64, usize) = (1e-9, 1e-3, 200);
/// Default DP search range for R₀, m.
pub const DEFAULT_R0_RANGE: (f64, f64, usize) = (1e-18, 1e-3, 200);

const DP_BISECTION_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Measurement {
    /// Surviving fringe visibility after a free flight.
    InterferometricContrast {
        flight_time: f64,
        separation: f64,
        contrast_floor: f64,
    },
    /// Upper limit on anomalous heating power; `+∞` bounds nothing.
    HeatingBound { power_ceiling: f64 },
}

impl Measurement {
    pub fn kind(&self) -> &'static str {
        match self {
            Measurement::InterferometricContrast { .. } => "interferometric-contrast",
            Measurement::HeatingBound { .. } => "heating-bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub label: String,
    /// kg
    pub mass: f64,
    pub measurement: Measurement,
}

impl ExperimentRecord {
    pub fn heating(label: impl Into<String>, mass: f64, power_ceiling: f64) -> Result<Self> {
        let r = ExperimentRecord {
            label: label.into(),
            mass,
            measurement: Measurement::HeatingBound { power_ceiling },
        };
        r.validate()?;
        Ok(r)
    }

    pub fn contrast(
        label: impl Into<String>,
        mass: f64,
        flight_time: f64,
        separation: f64,
        contrast_floor: f64,
    ) -> Result<Self> {
        let r = ExperimentRecord {
            label: label.into(),
            mass,
            measurement: Measurement::InterferometricContrast {
                flight_time,
                separation,
                contrast_floor,
            },
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("mass", self.mass)?;
        match self.measurement {
            Measurement::InterferometricContrast {
                flight_time,
                separation,
                contrast_floor,
            } => {
                require_positive("flight_time", flight_time)?;
                require_positive("separation", separation)?;
                if !(contrast_floor > 0.0 && contrast_floor < 1.0) {
                    return Err(Error::invalid(
                        "contrast_floor",
                        format!("must lie in (0, 1), got {contrast_floor}"),
                    ));
                }
            }
            Measurement::HeatingBound { power_ceiling } => {
                if !(power_ceiling > 0.0) {
                    return Err(Error::invalid(
                        "power_ceiling",
                        format!("must be positive, got {power_ceiling}"),
                    ));
                }
            }
        }
        Ok(())
    }

    fn wrong_kind(&self, expected: &'static str) -> Error {
        Error::WrongRecordKind {
            label: self.label.clone(),
            expected,
            found: self.measurement.kind(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionRegion {
    pub rc_samples: Vec<f64>,
    /// λ*(r_C), s⁻¹; λ above the boundary is excluded.
    pub lambda_boundary: Vec<f64>,
    pub source: String,
}

/// `n` log-spaced points from `min` to `max`, endpoints exact.
pub fn log_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    require_positive("grid min", min)?;
    require_positive("grid max", max)?;
    if !(max > min) || n < 2 {
        return Err(Error::invalid("grid", "need max > min and at least two points"));
    }
    let (a, b) = (min.log10(), max.log10());
    let mut g: Vec<f64> = (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect();
    g[0] = min;
    g[n - 1] = max;
    Ok(g)
}

pub fn default_rc_grid() -> Vec<f64> {
    let (lo, hi, n) = DEFAULT_RC_RANGE;
    log_grid(lo, hi, n).expect("default grid is valid")
}

fn check_rc_grid(rc_grid: &[f64]) -> Result<()> {
    if rc_grid.is_empty() {
        return Err(Error::invalid("rc_grid", "must not be empty"));
    }
    if rc_grid.iter().any(|r| !(r.is_finite() && *r > 0.0)) || rc_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("rc_grid", "must be positive and strictly increasing"));
    }
    Ok(())
}

/// λ*(r_C) = (4/3)·P·m0²·r_C² / (ħ²·m).
pub fn exclude_from_heating(rec: &ExperimentRecord, rc_grid: &[f64]) -> Result<ExclusionRegion> {
    exclude_from_heating_with(rec, rc_grid, &PhysicalConstants::CODATA_2018)
}

pub fn exclude_from_heating_with(
    rec: &ExperimentRecord,
    rc_grid: &[f64],
    consts: &PhysicalConstants,
) -> Result<ExclusionRegion> {
    let Measurement::HeatingBound { power_ceiling } = rec.measurement else {
        return Err(rec.wrong_kind("heating-bound"));
    };
    rec.validate()?;
    check_rc_grid(rc_grid)?;
    let scale = 4.0 / 3.0 * power_ceiling * consts.m0 * consts.m0 / (consts.hbar * consts.hbar * rec.mass);
    Ok(ExclusionRegion {
        rc_samples: rc_grid.to_vec(),
        lambda_boundary: rc_grid.iter().map(|r| scale * r * r).collect(),
        source: rec.label.clone(),
    })
}

/// λ*(r_C) = −ln(floor) / [(m/m0)²·t·(1 − (√π/2) erf(u)/u)], u = x/(2 r_C).
pub fn exclude_from_contrast(rec: &ExperimentRecord, rc_grid: &[f64]) -> Result<ExclusionRegion> {
    exclude_from_contrast_with(rec, rc_grid, &PhysicalConstants::CODATA_2018)
}

pub fn exclude_from_contrast_with(
    rec: &ExperimentRecord,
    rc_grid: &[f64],
    consts: &PhysicalConstants,
) -> Result<ExclusionRegion> {
    let Measurement::InterferometricContrast {
        flight_time,
        separation,
        contrast_floor,
    } = rec.measurement
    else {
        return Err(rec.wrong_kind("interferometric-contrast"));
    };
    rec.validate()?;
    check_rc_grid(rc_grid)?;
    let ratio = rec.mass / consts.m0;
    let budget = -contrast_floor.ln();
    let lambda_boundary = rc_grid
        .iter()
        .map(|&r_c| {
            let denom = ratio * ratio * flight_time * contrast_bracket(separation, r_c);
            if denom > 0.0 {
                budget / denom
            } else {
                f64::INFINITY
            }
        })
        .collect();
    Ok(ExclusionRegion {
        rc_samples: rc_grid.to_vec(),
        lambda_boundary,
        source: rec.label.clone(),
    })
}

/// Dispatches on the record kind.
pub fn exclude(rec: &ExperimentRecord, rc_grid: &[f64]) -> Result<ExclusionRegion> {
    match rec.measurement {
        Measurement::HeatingBound { .. } => exclude_from_heating(rec, rc_grid),
        Measurement::InterferometricContrast { .. } => exclude_from_contrast(rec, rc_grid),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSet {
    pub rc_samples: Vec<f64>,
    pub regions: Vec<ExclusionRegion>,
    /// Pointwise minimum of the member boundaries (`+∞` where none bind).
    pub combined_boundary: Vec<f64>,
    /// Index into `regions` of the binding record per grid point.
    pub binding: Vec<Option<usize>>,
}

impl RegionSet {
    pub fn empty(rc_grid: Vec<f64>) -> Self {
        let n = rc_grid.len();
        RegionSet {
            rc_samples: rc_grid,
            regions: Vec::new(),
            combined_boundary: vec![f64::INFINITY; n],
            binding: vec![None; n],
        }
    }

    pub fn binding_source(&self, i: usize) -> Option<&str> {
        self.binding[i].map(|k| self.regions[k].source.as_str())
    }

    pub fn combined_region(&self, source: impl Into<String>) -> ExclusionRegion {
        ExclusionRegion {
            rc_samples: self.rc_samples.clone(),
            lambda_boundary: self.combined_boundary.clone(),
            source: source.into(),
        }
    }

    /// Folds another region in; ties keep the earlier binding record.
    pub fn add(&mut self, region: ExclusionRegion) -> Result<()> {
        if region.rc_samples != self.rc_samples || region.lambda_boundary.len() != self.rc_samples.len() {
            return Err(Error::GridMismatch);
        }
        let k = self.regions.len();
        for (i, &b) in region.lambda_boundary.iter().enumerate() {
            if b < self.combined_boundary[i] {
                self.combined_boundary[i] = b;
                self.binding[i] = Some(k);
            }
        }
        self.regions.push(region);
        Ok(())
    }
}

/// Combines regions sharing one grid. An empty list gives an empty set on
/// an empty grid.
pub fn combine(regions: Vec<ExclusionRegion>) -> Result<RegionSet> {
    let grid = regions.first().map(|r| r.rc_samples.clone()).unwrap_or_default();
    combine_on(grid, regions)
}

pub fn combine_on(rc_grid: Vec<f64>, regions: Vec<ExclusionRegion>) -> Result<RegionSet> {
    let mut set = RegionSet::empty(rc_grid);
    for r in regions {
        set.add(r)?;
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub excluded: bool,
    /// Interpolated combined boundary at the queried r_C.
    pub boundary: f64,
    pub source: Option<String>,
}

/// Strict test λ > λ*(r_C), with λ* interpolated linearly in
/// (log r_C, log λ*) between samples.
pub fn is_excluded(point: &CslParams, set: &RegionSet) -> Result<Verdict> {
    point.validate()?;
    if set.regions.is_empty() {
        return Ok(Verdict {
            excluded: false,
            boundary: f64::INFINITY,
            source: None,
        });
    }
    let g = &set.rc_samples;
    let (min, max) = (g[0], g[g.len() - 1]);
    let r = point.r_c;
    if r < min || r > max {
        return Err(Error::OutOfGridRange { value: r, min, max });
    }
    // first sample ≥ r
    let hi = g.partition_point(|&x| x < r);
    let (boundary, idx) = if g[hi] == r {
        (set.combined_boundary[hi], hi)
    } else {
        let lo = hi - 1;
        let (b0, b1) = (set.combined_boundary[lo], set.combined_boundary[hi]);
        let t = (r.ln() - g[lo].ln()) / (g[hi].ln() - g[lo].ln());
        let b = if b0.is_finite() && b1.is_finite() {
            (b0.ln() + t * (b1.ln() - b0.ln())).exp()
        } else {
            f64::INFINITY
        };
        (b, if t < 0.5 { lo } else { hi })
    };
    let excluded = point.lambda > boundary;
    Ok(Verdict {
        excluded,
        boundary,
        source: set.binding_source(idx).map(str::to_owned),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpExclusion {
    /// Every R₀ below this value is excluded, m.
    pub r0_star: f64,
    /// True when the bound excludes the whole searched range, so `r0_star`
    /// is only the top of the range.
    pub saturated: bool,
    pub source: String,
}

/// Predicted 3-D DP heating power, `3 × heating_rate_1d(dp_kernel(R₀), m)`.
pub fn dp_heating_power(r0: f64, mass: f64, consts: &PhysicalConstants) -> Result<f64> {
    let k = NoiseKernel::dp(&DpParams::new(r0)?, consts)?;
    Ok(3.0 * heating_rate_1d_with(&k, mass, consts)?)
}

/// Excluded interval `(0, R₀*)` for a heating bound; the predicted power
/// falls monotonically with R₀, so R₀* is found by bisection in log R₀.
pub fn dp_exclude_from_heating(rec: &ExperimentRecord, r0_grid: &[f64]) -> Result<DpExclusion> {
    dp_exclude_from_heating_with(rec, r0_grid, &PhysicalConstants::CODATA_2018)
}

pub fn dp_exclude_from_heating_with(
    rec: &ExperimentRecord,
    r0_grid: &[f64],
    consts: &PhysicalConstants,
) -> Result<DpExclusion> {
    let Measurement::HeatingBound { power_ceiling } = rec.measurement else {
        return Err(rec.wrong_kind("heating-bound"));
    };
    rec.validate()?;
    check_rc_grid(r0_grid)?;
    let (mut lo, mut hi) = (r0_grid[0], r0_grid[r0_grid.len() - 1]);
    let power = |r0: f64| dp_heating_power(r0, rec.mass, consts);
    if power(lo)? <= power_ceiling {
        return Err(Error::NoExclusion {
            label: rec.label.clone(),
        });
    }
    if power(hi)? > power_ceiling {
        return Ok(DpExclusion {
            r0_star: hi,
            saturated: true,
            source: rec.label.clone(),
        });
    }
    for _ in 0..200 {
        if hi / lo - 1.0 < DP_BISECTION_RTOL {
            break;
        }
        let mid = (lo * hi).sqrt();
        if power(mid)? > power_ceiling {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DpExclusion {
        r0_star: (lo * hi).sqrt(),
        saturated: false,
        source: rec.label.clone(),
    })
}

/// Parses a JSON array of experiment records. Errors carry a JSON-pointer
/// path to the offending value.
pub fn parse_records(text: &str) -> Result<Vec<ExperimentRecord>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::InvalidRecord {
        path: String::new(),
        message: format!("malformed JSON: {e}"),
    })?;
    let Value::Array(items) = value else {
        return Err(Error::InvalidRecord {
            path: String::new(),
            message: "expected a JSON array of records".to_owned(),
        });
    };
    items
        .iter()
        .enumerate()
        .map(|(i, item)| parse_record(item, &format!("/{i}")))
        .collect()
}

fn bad(path: &str, field: &str, message: impl Into<String>) -> Error {
    Error::InvalidRecord {
        path: if field.is_empty() {
            path.to_owned()
        } else {
            format!("{path}/{field}")
        },
        message: message.into(),
    }
}

fn parse_record(item: &Value, path: &str) -> Result<ExperimentRecord> {
    let Value::Object(obj) = item else {
        return Err(bad(path, "", "expected an object"));
    };
    let kind = match obj.get("kind") {
        Some(Value::String(s)) => s.as_str(),
        Some(_) => return Err(bad(path, "kind", "expected a string")),
        None => return Err(bad(path, "kind", "missing required field")),
    };
    let allowed: &[&str] = match kind {
        "heating-bound" => &["kind", "label", "mass_kg", "power_ceiling_w"],
        "interferometric-contrast" => &[
            "kind",
            "label",
            "mass_kg",
            "flight_time_s",
            "separation_m",
            "contrast_floor",
        ],
        other => {
            return Err(bad(
                path,
                "kind",
                format!("unknown kind `{other}` (expected heating-bound or interferometric-contrast)"),
            ))
        }
    };
    if let Some(extra) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(bad(path, extra, format!("unexpected field for a {kind} record")));
    }
    let label = match obj.get("label") {
        Some(Value::String(s)) if !s.is_empty() => s.clone(),
        Some(_) => return Err(bad(path, "label", "expected a non-empty string")),
        None => return Err(bad(path, "label", "missing required field")),
    };
    let mass = positive(obj, path, "mass_kg", false)?;
    let record = if kind == "heating-bound" {
        ExperimentRecord {
            label,
            mass,
            measurement: Measurement::HeatingBound {
                power_ceiling: positive(obj, path, "power_ceiling_w", true)?,
            },
        }
    } else {
        let contrast_floor = number(obj, path, "contrast_floor", false)?;
        if !(contrast_floor > 0.0 && contrast_floor < 1.0) {
            return Err(bad(path, "contrast_floor", format!("must lie in (0, 1), got {contrast_floor}")));
        }
        ExperimentRecord {
            label,
            mass,
            measurement: Measurement::InterferometricContrast {
                flight_time: positive(obj, path, "flight_time_s", false)?,
                separation: positive(obj, path, "separation_m", false)?,
                contrast_floor,
            },
        }
    };
    Ok(record)
}

fn number(obj: &Map<String, Value>, path: &str, field: &str, allow_inf: bool) -> Result<f64> {
    match obj.get(field) {
        Some(Value::Number(n)) => n.as_f64().ok_or_else(|| bad(path, field, "not representable as f64")),
        Some(Value::String(s)) if allow_inf && s == "inf" => Ok(f64::INFINITY),
        Some(_) if allow_inf => Err(bad(path, field, "expected a number or \"inf\"")),
        Some(_) => Err(bad(path, field, "expected a number")),
        None => Err(bad(path, field, "missing required field")),
    }
}

fn positive(obj: &Map<String, Value>, path: &str, field: &str, allow_inf: bool) -> Result<f64> {
    let v = number(obj, path, field, allow_inf)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(bad(path, field, format!("must be positive, got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictions::{contrast_reduction, heating_power, HeatingSetup, InterferometricSetup};

    const M0: f64 = PhysicalConstants::CODATA_2018.m0;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn synthetic_contrast() -> ExperimentRecord {
        ExperimentRecord::contrast("synthetic-interferometer", 1e5 * M0, 1e-2, 1e-6, 0.9).unwrap()
    }

    #[test]
    fn heating_boundary_values() {
        let rec = ExperimentRecord::heating("synthetic-heating", 1.0, 1e-20).unwrap();
        let region = exclude_from_heating(&rec, &[1e-7, 1e-6]).unwrap();
        // 40-digit arithmetic
        assert!(rel(region.lambda_boundary[0], 3.354_146_171_008_778_5e-20) < 1e-13);
        assert!(rel(region.lambda_boundary[1], 100.0 * region.lambda_boundary[0]) < 1e-14);
        let p = CslParams::new(region.lambda_boundary[0], 1e-7).unwrap();
        assert!(rel(heating_power(&p, &HeatingSetup { mass: 1.0 }).unwrap(), 1e-20) < 1e-12);
        let open = ExperimentRecord::heating("open", 1.0, f64::INFINITY).unwrap();
        let region = exclude_from_heating(&open, &default_rc_grid()).unwrap();
        assert!(region.lambda_boundary.iter().all(|b| b.is_infinite()));
    }

    #[test]
    fn contrast_boundary_values() {
        let rec = synthetic_contrast();
        let region = exclude_from_contrast(&rec, &[1e-7]).unwrap();
        // 40-digit arithmetic
        assert!(rel(region.lambda_boundary[0], 1.280_582_493_838_546e-9) < 1e-12);
        let set = combine(vec![region]).unwrap();
        let v = is_excluded(&CslParams::new(1e-16, 1e-7).unwrap(), &set).unwrap();
        assert!(!v.excluded);
        assert_eq!(v.source.as_deref(), Some("synthetic-interferometer"));
    }

    #[test]
    fn contrast_round_trip_on_default_grid() {
        let rec = synthetic_contrast();
        let region = exclude_from_contrast(&rec, &default_rc_grid()).unwrap();
        for (&r_c, &lam) in region.rc_samples.iter().zip(&region.lambda_boundary) {
            let c = contrast_reduction(
                &CslParams::new(lam, r_c).unwrap(),
                &InterferometricSetup {
                    mass: rec.mass,
                    flight_time: 1e-2,
                    separation: 1e-6,
                },
            )
            .unwrap();
            assert!(rel(c, 0.9) < 1e-10);
        }
    }

    #[test]
    fn contrast_floor_towards_zero_loosens() {
        let grid = [1e-7];
        let mut prev = 0.0;
        for floor in [0.9, 0.5, 1e-3, 1e-100, f64::MIN_POSITIVE] {
            let rec = ExperimentRecord::contrast("r", 1e5 * M0, 1e-2, 1e-6, floor).unwrap();
            let b = exclude_from_contrast(&rec, &grid).unwrap().lambda_boundary[0];
            assert!(b > prev);
            prev = b;
        }
        assert!(prev > 500.0 * 1.28e-9);
    }

    #[test]
    fn wrong_kind() {
        let rec = synthetic_contrast();
        assert!(matches!(
            exclude_from_heating(&rec, &[1e-7]),
            Err(Error::WrongRecordKind { .. })
        ));
        let heat = ExperimentRecord::heating("h", 1.0, 1e-20).unwrap();
        assert!(matches!(
            exclude_from_contrast(&heat, &[1e-7]),
            Err(Error::WrongRecordKind { .. })
        ));
        assert!(dp_exclude_from_heating(&rec, &[1e-15, 1e-10]).is_err());
    }

    #[test]
    fn combine_identity_and_crossing() {
        let grid = log_grid(1e-9, 1e-3, 61).unwrap();
        // a: λ = 1e-6 (r/1e-6)²; b: λ = 1e-6 constant; they cross at r = 1e-6
        let a = ExclusionRegion {
            rc_samples: grid.clone(),
            lambda_boundary: grid.iter().map(|r| 1e-6 * (r / 1e-6).powi(2)).collect(),
            source: "a".into(),
        };
        let b = ExclusionRegion {
            rc_samples: grid.clone(),
            lambda_boundary: vec![1e-6 * 1.0001; grid.len()],
            source: "b".into(),
        };
        let inf = ExclusionRegion {
            rc_samples: grid.clone(),
            lambda_boundary: vec![f64::INFINITY; grid.len()],
            source: "inf".into(),
        };
        let single = combine(vec![a.clone()]).unwrap();
        assert_eq!(single.combined_boundary, a.lambda_boundary);
        let with_inf = combine(vec![a.clone(), inf]).unwrap();
        assert_eq!(with_inf.combined_boundary, a.lambda_boundary);
        assert!(with_inf.binding.iter().all(|b| *b == Some(0)));

        let set = combine(vec![a, b]).unwrap();
        for (i, &r) in grid.iter().enumerate() {
            let expected = if r <= 1e-6 * 1.0001f64.sqrt() { "a" } else { "b" };
            assert_eq!(set.binding_source(i), Some(expected), "at r = {r:e}");
        }
        assert!(set
            .regions
            .iter()
            .all(|reg| reg.lambda_boundary.iter().zip(&set.combined_boundary).all(|(m, c)| c <= m)));
    }

    #[test]
    fn combine_rejects_grid_mismatch() {
        let r1 = ExclusionRegion {
            rc_samples: vec![1.0, 2.0],
            lambda_boundary: vec![1.0, 1.0],
            source: "x".into(),
        };
        let r2 = ExclusionRegion {
            rc_samples: vec![1.0, 3.0],
            ..r1.clone()
        };
        assert_eq!(combine(vec![r1, r2]), Err(Error::GridMismatch));
    }

    #[test]
    fn exclusion_is_strict_and_range_checked() {
        let grid = vec![1e-8, 1e-7, 1e-6];
        let region = ExclusionRegion {
            rc_samples: grid.clone(),
            lambda_boundary: vec![1e-10, 1e-9, 1e-8],
            source: "s".into(),
        };
        let set = combine(vec![region]).unwrap();
        let on = CslParams::new(1e-9, 1e-7).unwrap();
        assert!(!is_excluded(&on, &set).unwrap().excluded);
        let above = CslParams::new(1.0001e-9, 1e-7).unwrap();
        assert!(is_excluded(&above, &set).unwrap().excluded);
        // log-log interpolation of a power law is exact
        let mid = CslParams::new(1.0, 10f64.powf(-7.5)).unwrap();
        let v = is_excluded(&mid, &set).unwrap();
        assert!(rel(v.boundary, 10f64.powf(-9.5)) < 1e-12);
        let outside = CslParams::new(1.0, 1e-3).unwrap();
        assert!(matches!(is_excluded(&outside, &set), Err(Error::OutOfGridRange { .. })));
        let empty = RegionSet::empty(grid);
        assert!(!is_excluded(&on, &empty).unwrap().excluded);
        assert!(!is_excluded(&on, &combine(vec![]).unwrap()).unwrap().excluded);
    }

    #[test]
    fn dp_bisection() {
        let grid = log_grid(1e-18, 1e-3, 50).unwrap();
        let rec = ExperimentRecord::heating("dp", 1e-3, 1e-25).unwrap();
        let ex = dp_exclude_from_heating(&rec, &grid).unwrap();
        assert!(!ex.saturated);
        let c = PhysicalConstants::CODATA_2018;
        let p = dp_heating_power(ex.r0_star, 1e-3, &c).unwrap();
        assert!(rel(p, 1e-25) < 1e-3);
        // closed form of the same curvature rate: P = ħ G m / (4 √π R₀³)
        let closed = (c.hbar * c.g * 1e-3 / (4.0 * std::f64::consts::PI.sqrt() * 1e-25)).cbrt();
        assert!(rel(ex.r0_star, closed) < 1e-9);

        let open = ExperimentRecord::heating("open", 1e-3, f64::INFINITY).unwrap();
        assert!(matches!(
            dp_exclude_from_heating(&open, &grid),
            Err(Error::NoExclusion { .. })
        ));
        let mut prev = f64::INFINITY;
        for ceiling in [1e-30, 1e-28, 1e-25, 1e-20] {
            let rec = ExperimentRecord::heating("dp", 1e-3, ceiling).unwrap();
            let r = dp_exclude_from_heating(&rec, &grid).unwrap().r0_star;
            assert!(r <= prev);
            prev = r;
        }
    }

    #[test]
    fn record_parsing() {
        let text = r#"[
            {"kind": "heating-bound", "label": "h", "mass_kg": 1.0, "power_ceiling_w": 1e-20},
            {"kind": "interferometric-contrast", "label": "c", "mass_kg": 1.6e-22,
             "flight_time_s": 0.01, "separation_m": 1e-6, "contrast_floor": 0.9},
            {"kind": "heating-bound", "label": "open", "mass_kg": 1.0, "power_ceiling_w": "inf"}
        ]"#;
        let recs = parse_records(text).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[1].measurement.kind(), "interferometric-contrast");
        assert_eq!(
            recs[2].measurement,
            Measurement::HeatingBound {
                power_ceiling: f64::INFINITY
            }
        );
        assert!(parse_records("[]").unwrap().is_empty());
    }

    #[test]
    fn record_errors_name_the_field() {
        let cases = [
            (r#"[{"kind":"heating-bound","label":"h","mass_kg":-1,"power_ceiling_w":1}]"#, "/0/mass_kg"),
            (r#"[{"kind":"heating-bound","label":"h","mass_kg":1}]"#, "/0/power_ceiling_w"),
            (r#"[{"kind":"x","label":"h"}]"#, "/0/kind"),
            (
                r#"[{"kind":"heating-bound","label":"h","mass_kg":1,"power_ceiling_w":1},
                   {"kind":"interferometric-contrast","label":"c","mass_kg":1,"flight_time_s":1,"separation_m":1,"contrast_floor":1.5}]"#,
                "/1/contrast_floor",
            ),
            (r#"[{"kind":"heating-bound","label":"h","mass_kg":1,"power_ceiling_w":1,"extra":2}]"#, "/0/extra"),
            (r#"{"kind":"heating-bound"}"#, ""),
        ];
        for (text, path) in cases {
            match parse_records(text) {
                Err(Error::InvalidRecord { path: p, .. }) => assert_eq!(p, path, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        match parse_records("[{\"kind\": ") {
            Err(Error::InvalidRecord { message, .. }) => assert!(message.contains("line 1")),
            other => panic!("{other:?}"),
        }
    }
}
