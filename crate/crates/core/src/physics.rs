//! Physical constants, model parameter points and the named presets.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Unified atomic mass unit (CODATA 2018), kg.
pub const AMU_KG: f64 = 1.660_539_066_60e-27;

/// The three constants entering the collapse kernels and predictions.
///
/// `m0` is the reference nucleon mass. The default is the CODATA 2018 proton
/// mass; a neutron-mass override shifts every rate by about 0.1 %.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Newtonian gravitational constant, m³·kg⁻¹·s⁻².
    pub g: f64,
    /// Reference nucleon mass, kg.
    pub m0: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        hbar: 1.054_571_817e-34,
        g: 6.674_30e-11,
        m0: 1.672_621_923_69e-27,
    };

    pub fn new(hbar: f64, g: f64, m0: f64) -> Result<Self> {
        let c = PhysicalConstants { hbar, g, m0 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("hbar", self.hbar)?;
        require_positive("G", self.g)?;
        require_positive("m0", self.m0)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

/// CSL parameter point: collapse rate (s⁻¹) and correlation length (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CslParams {
    pub lambda: f64,
    pub r_c: f64,
}

impl CslParams {
    pub fn new(lambda: f64, r_c: f64) -> Result<Self> {
        let p = CslParams { lambda, r_c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("lambda", self.lambda)?;
        require_positive("r_c", self.r_c)
    }
}

/// Diósi–Penrose regularization length R₀ (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpParams {
    pub r0: f64,
}

impl DpParams {
    pub fn new(r0: f64) -> Result<Self> {
        let p = DpParams { r0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("r0", self.r0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelParams {
    Csl(CslParams),
    Dp(DpParams),
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Csl(p) => p.validate(),
            ModelParams::Dp(p) => p.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPreset {
    pub name: &'static str,
    pub params: ModelParams,
    pub provenance: &'static str,
    /// Quoted uncertainty on λ in decades (Adler points carry ±2).
    pub lambda_uncertainty_decades: Option<f64>,
}

pub const PRESET_NAMES: [&str; 4] = ["GRW", "Adler-A", "Adler-B", "DP-Diosi"];

pub fn presets() -> [ParameterPreset; 4] {
    [
        ParameterPreset {
            name: "GRW",
            params: ModelParams::Csl(CslParams {
                lambda: 1e-16,
                r_c: 1e-7,
            }),
            provenance: "Ghirardi, Rimini and Weber, Phys. Rev. D 34, 470 (1986)",
            lambda_uncertainty_decades: None,
        },
        ParameterPreset {
            name: "Adler-A",
            params: ModelParams::Csl(CslParams {
                lambda: 4e-8,
                r_c: 1e-7,
            }),
            provenance: "Adler, J. Phys. A 40, 2935 (2007); lambda = 4e-8 s^-1 within +/-2 decades",
            lambda_uncertainty_decades: Some(2.0),
        },
        ParameterPreset {
            name: "Adler-B",
            params: ModelParams::Csl(CslParams {
                lambda: 1e-6,
                r_c: 1e-6,
            }),
            provenance: "Adler, J. Phys. A 40, 2935 (2007); lambda = 1e-6 s^-1 within +/-2 decades",
            lambda_uncertainty_decades: Some(2.0),
        },
        ParameterPreset {
            name: "DP-Diosi",
            params: ModelParams::Dp(DpParams { r0: 1e-15 }),
            provenance: "Diosi, Phys. Lett. A 120, 377 (1987); R0 at the proton radius",
            lambda_uncertainty_decades: None,
        },
    ]
}

/// Looks up a preset by its exact label.
pub fn preset(name: &str) -> Result<ParameterPreset> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownPreset(name.to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_by_label() {
        assert_eq!(
            preset("GRW").unwrap().params,
            ModelParams::Csl(CslParams {
                lambda: 1e-16,
                r_c: 1e-7
            })
        );
        assert_eq!(
            preset("Adler-B").unwrap().params,
            ModelParams::Csl(CslParams {
                lambda: 1e-6,
                r_c: 1e-6
            })
        );
        assert_eq!(
            preset("Adler-A").unwrap().params,
            ModelParams::Csl(CslParams {
                lambda: 4e-8,
                r_c: 1e-7
            })
        );
        assert_eq!(
            preset("DP-Diosi").unwrap().params,
            ModelParams::Dp(DpParams { r0: 1e-15 })
        );
        for name in PRESET_NAMES {
            assert_eq!(preset(name).unwrap().name, name);
        }
    }

    #[test]
    fn unknown_preset() {
        assert_eq!(preset("grw"), Err(Error::UnknownPreset("grw".into())));
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(CslParams::new(0.0, 1e-7).is_err());
        assert!(CslParams::new(1e-16, -1.0).is_err());
        assert!(CslParams::new(f64::NAN, 1e-7).is_err());
        assert!(DpParams::new(0.0).is_err());
        assert!(PhysicalConstants::new(1.0, 1.0, 0.0).is_err());
        PhysicalConstants::CODATA_2018.validate().unwrap();
    }
}
