//! The smeared-Gaussian ratio `(√π/2)·erf(z)/z` and its complement.
//!
//! Both the interference-contrast bracket and the regularized Newtonian
//! kernel reduce to this function. Near zero the direct form loses digits
//! (`erf(z)/z` is 0/0 at the origin and `1 - ratio` cancels), so small
//! arguments use the Maclaurin series
//! `ratio(z) = Σ (-1)^n z^{2n} / (n! (2n+1))`.

/// Arguments below this use the series.
pub const SERIES_THRESHOLD: f64 = 1e-2;

// (-1)^n / (n! (2n+1)) for n = 1..=6
const SERIES: [f64; 6] = [
    -1.0 / 3.0,
    1.0 / 10.0,
    -1.0 / 42.0,
    1.0 / 216.0,
    -1.0 / 1320.0,
    1.0 / 9360.0,
];

/// `(√π/2)·erf(z)/z`, with the removable singularity at 0 filled in as 1.
pub fn erf_ratio(z: f64) -> f64 {
    let z = z.abs();
    if z < SERIES_THRESHOLD {
        1.0 - bracket_series(z)
    } else {
        0.5 * std::f64::consts::PI.sqrt() * libm::erf(z) / z
    }
}

/// `1 - (√π/2)·erf(z)/z`, accurate to relative precision for small `z`.
pub fn erf_ratio_complement(z: f64) -> f64 {
    let z = z.abs();
    if z < SERIES_THRESHOLD {
        bracket_series(z)
    } else {
        1.0 - 0.5 * std::f64::consts::PI.sqrt() * libm::erf(z) / z
    }
}

fn bracket_series(z: f64) -> f64 {
    let z2 = z * z;
    // Horner over the tail, highest order first.
    let mut acc = 0.0;
    for c in SERIES.iter().rev() {
        acc = acc * z2 + c;
    }
    -acc * z2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_exact() {
        assert_eq!(erf_ratio(0.0), 1.0);
        assert_eq!(erf_ratio_complement(0.0), 0.0);
    }

    #[test]
    fn branches_agree_at_threshold() {
        for k in [-1.0, 1.0] {
            let z = SERIES_THRESHOLD * (1.0 + k * 1e-9);
            let direct = 1.0 - 0.5 * std::f64::consts::PI.sqrt() * libm::erf(z) / z;
            let series = bracket_series(z);
            assert!((direct - series).abs() / series < 1e-11, "{direct} vs {series}");
        }
    }

    #[test]
    fn known_value_at_five() {
        // 1 - (√π/2) erf(5)/5 evaluated with 40-digit arithmetic
        let expected = 0.822_754_614_909_720_9;
        assert!((erf_ratio_complement(5.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn small_argument_leading_order() {
        let z = 1e-6;
        let b = erf_ratio_complement(z);
        assert!((b / (z * z / 3.0) - 1.0).abs() < 1e-11);
    }
}
