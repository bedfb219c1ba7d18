use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Periodic 1-D grid of `n_points` sites spaced `dx` apart.
///
/// Site `i` sits at `(i − n/2)·dx`, so the ring is centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct GridSpec {
    n_points: usize,
    dx: f64,
}

#[derive(Deserialize)]
struct RawGrid {
    n_points: usize,
    dx: f64,
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        GridSpec::new(raw.n_points, raw.dx)
    }
}

impl GridSpec {
    pub fn new(n_points: usize, dx: f64) -> Result<Self> {
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(Error::invalid(
                "n_points",
                format!("must be a power of two and at least 8, got {n_points}"),
            ));
        }
        require_positive("dx", dx)?;
        Ok(GridSpec { n_points, dx })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.n_points as f64 * self.dx
    }

    pub fn position(&self, i: usize) -> f64 {
        (i as f64 - (self.n_points / 2) as f64) * self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.position(i)).collect()
    }

    /// Minimum-image separation between sites, in sites.
    pub fn site_separation(&self, i: usize, j: usize) -> usize {
        let d = i.abs_diff(j) % self.n_points;
        d.min(self.n_points - d)
    }

    /// Nearest site to a position, wrapped onto the ring.
    pub fn nearest_site(&self, x: f64) -> usize {
        let n = self.n_points as i64;
        let k = (x / self.dx).round() as i64 + n / 2;
        k.rem_euclid(n) as usize
    }

    /// Angular wavenumber of DFT bin `k`, folded to (−π/dx, π/dx].
    pub fn wavenumber(&self, k: usize) -> f64 {
        let n = self.n_points as i64;
        let k = k as i64;
        let folded = if k > n / 2 { k - n } else { k };
        2.0 * std::f64::consts::PI * folded as f64 / self.length()
    }
}
