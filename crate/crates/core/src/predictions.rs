//! Closed-form CSL predictions: interference-contrast reduction and bulk
//! heating power.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Result};
use crate::physics::{CslParams, PhysicalConstants};
use crate::special::erf_ratio_complement;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferometricSetup {
    /// kg
    pub mass: f64,
    /// s
    pub flight_time: f64,
    /// Superposition separation x, m.
    pub separation: f64,
}

impl InterferometricSetup {
    /// A zero separation is allowed and yields no reduction.
    pub fn validate(&self) -> Result<()> {
        require_positive("mass", self.mass)?;
        require_positive("flight_time", self.flight_time)?;
        if !(self.separation.is_finite() && self.separation >= 0.0) {
            return Err(crate::Error::invalid("separation", "must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatingSetup {
    /// kg
    pub mass: f64,
}

/// `1 − (√π/2)·erf(u)/u` at `u = x/(2 r_C)`.
pub fn contrast_bracket(separation: f64, r_c: f64) -> f64 {
    erf_ratio_complement(separation / (2.0 * r_c))
}

/// Multiplicative reduction of the fringe visibility,
/// `exp[−λ (m/m0)² t (1 − (√π/2) erf(u)/u)]`.
pub fn contrast_reduction(p: &CslParams, s: &InterferometricSetup) -> Result<f64> {
    contrast_reduction_with(p, s, &PhysicalConstants::CODATA_2018)
}

pub fn contrast_reduction_with(
    p: &CslParams,
    s: &InterferometricSetup,
    consts: &PhysicalConstants,
) -> Result<f64> {
    p.validate()?;
    s.validate()?;
    let ratio = s.mass / consts.m0;
    let exponent = p.lambda * ratio * ratio * s.flight_time * contrast_bracket(s.separation, p.r_c);
    Ok((-exponent).exp())
}

/// `P = (3/4)·ħ²·λ·m / (m0²·r_C²)`, W.
pub fn heating_power(p: &CslParams, s: &HeatingSetup) -> Result<f64> {
    heating_power_with(p, s, &PhysicalConstants::CODATA_2018)
}

pub fn heating_power_with(p: &CslParams, s: &HeatingSetup, consts: &PhysicalConstants) -> Result<f64> {
    p.validate()?;
    require_positive("mass", s.mass)?;
    Ok(0.75 * consts.hbar * consts.hbar * p.lambda * s.mass / (consts.m0 * consts.m0 * p.r_c * p.r_c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::csl_kernel;
    use crate::master::heating_rate_1d;
    use proptest::prelude::*;

    const M0: f64 = PhysicalConstants::CODATA_2018.m0;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn grw() -> CslParams {
        CslParams::new(1e-16, 1e-7).unwrap()
    }

    #[test]
    fn zero_separation_is_exactly_one() {
        let s = InterferometricSetup {
            mass: 1e9 * M0,
            flight_time: 1.0,
            separation: 0.0,
        };
        assert_eq!(contrast_reduction(&grw(), &s).unwrap(), 1.0);
    }

    #[test]
    fn large_separation_asymptote() {
        let p = CslParams::new(1e-8, 1e-7).unwrap();
        let s = InterferometricSetup {
            mass: 1e4 * M0,
            flight_time: 0.5,
            separation: 1e6,
        };
        let asym = (-p.lambda * 1e8 * 0.5f64).exp();
        assert!(rel(contrast_reduction(&p, &s).unwrap(), asym) < 1e-12);
    }

    #[test]
    fn grw_molecule_example() {
        let s = InterferometricSetup {
            mass: 1e5 * M0,
            flight_time: 1e-2,
            separation: 1e-6,
        };
        // 40-digit evaluation: 1 − 8.227546115250951e-9
        let got = contrast_reduction(&grw(), &s).unwrap();
        assert!(rel(1.0 - got, 8.227_546_115_250_951e-9) < 1e-7);
    }

    #[test]
    fn grw_heating_power() {
        let p = heating_power(&grw(), &HeatingSetup { mass: M0 }).unwrap();
        assert!(rel(p, 4.986_729_374_369_959e-44) < 1e-13);
    }

    #[test]
    fn heating_scaling() {
        let base = heating_power(&grw(), &HeatingSetup { mass: M0 }).unwrap();
        let double_m = heating_power(&grw(), &HeatingSetup { mass: 2.0 * M0 }).unwrap();
        let double_rc = heating_power(&CslParams::new(1e-16, 2e-7).unwrap(), &HeatingSetup { mass: M0 }).unwrap();
        assert!(rel(double_m, 2.0 * base) < 1e-15);
        assert!(rel(double_rc, 0.25 * base) < 1e-15);
    }

    #[test]
    fn branch_continuity() {
        let p = CslParams::new(1.0, 1.0).unwrap();
        let at = |u: f64| {
            contrast_reduction(
                &p,
                &InterferometricSetup {
                    mass: 1e2 * M0,
                    flight_time: 3.0,
                    separation: 2.0 * u,
                },
            )
            .unwrap()
        };
        for u0 in [1e-4, crate::special::SERIES_THRESHOLD] {
            let (lo, hi) = (at(u0 * (1.0 - 1e-14)), at(u0 * (1.0 + 1e-14)));
            assert!(rel(lo, hi) < 1e-11);
        }
    }

    #[test]
    fn rejects_invalid_inputs() {
        let s = InterferometricSetup {
            mass: M0,
            flight_time: 1.0,
            separation: 1e-6,
        };
        assert!(contrast_reduction(&CslParams { lambda: 0.0, r_c: 1e-7 }, &s).is_err());
        assert!(contrast_reduction(&grw(), &InterferometricSetup { mass: -1.0, ..s }).is_err());
        assert!(heating_power(&grw(), &HeatingSetup { mass: 0.0 }).is_err());
    }

    proptest! {
        #[test]
        fn three_dimensional_power_is_three_axes(
            log_lambda in -20.0f64..0.0,
            log_rc in -9.0f64..-3.0,
            log_m in -27.0f64..3.0,
        ) {
            let p = CslParams::new(10f64.powf(log_lambda), 10f64.powf(log_rc)).unwrap();
            let m = 10f64.powf(log_m);
            let p3 = heating_power(&p, &HeatingSetup { mass: m }).unwrap();
            let p1 = heating_rate_1d(&csl_kernel(&p).unwrap(), m).unwrap();
            prop_assert!(rel(p3, 3.0 * p1) < 1e-12);
        }

        #[test]
        fn contrast_bounded_and_monotone(
            log_lambda in -20.0f64..-4.0,
            log_rc in -9.0f64..-4.0,
            log_m in -26.0f64..-18.0,
            log_t in -3.0f64..1.0,
            log_x in -10.0f64..-3.0,
        ) {
            let p = CslParams::new(10f64.powf(log_lambda), 10f64.powf(log_rc)).unwrap();
            let s = InterferometricSetup {
                mass: 10f64.powf(log_m),
                flight_time: 10f64.powf(log_t),
                separation: 10f64.powf(log_x),
            };
            let base = contrast_reduction(&p, &s).unwrap();
            prop_assert!((0.0..=1.0).contains(&base));
            let f = 1.5;
            let bigger = [
                contrast_reduction(&p, &InterferometricSetup { separation: s.separation * f, ..s }).unwrap(),
                contrast_reduction(&p, &InterferometricSetup { flight_time: s.flight_time * f, ..s }).unwrap(),
                contrast_reduction(&p, &InterferometricSetup { mass: s.mass * f, ..s }).unwrap(),
                contrast_reduction(&CslParams { lambda: p.lambda * f, ..p }, &s).unwrap(),
            ];
            for v in bigger {
                prop_assert!(v <= base);
            }
        }
    }
}
