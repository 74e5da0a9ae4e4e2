//! Normal distribution primitives and the continuous (Stern) cover model.
//!
//! Internally every quantity is a margin: bet-team points minus opponent
//! points. Spread-convention inputs are negated exactly once, in
//! [`SpreadPoints::expected_margin`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Final margin from the bet team's point of view; positive means it won.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MarginPoints(pub f64);

/// A spread quoted the sportsbook way: `-7` means favored by seven.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpreadPoints(pub f64);

impl SpreadPoints {
    pub fn value(self) -> f64 {
        self.0
    }

    /// The margin a spread implies: a `-7` favorite is expected to win by 7.
    pub fn expected_margin(self) -> MarginPoints {
        MarginPoints(-self.0)
    }

    pub fn magnitude(self) -> f64 {
        self.0.abs()
    }
}

impl MarginPoints {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Interval endpoint; the open ends are explicit rather than sentinel floats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    NegInfinity,
    At(f64),
    PosInfinity,
}

impl Bound {
    fn standardize(self, mean: f64, sd: f64) -> f64 {
        match self {
            Bound::NegInfinity => f64::NEG_INFINITY,
            Bound::At(x) => (x - mean) / sd,
            Bound::PosInfinity => f64::INFINITY,
        }
    }
}

/// `P(Z > z)` for a standard normal, accurate in the far tail.
pub fn std_normal_upper_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Standard normal CDF. Backed by `erfc`, whose relative error is a few ulp,
/// so the absolute error is far below 1e-8 everywhere.
pub fn std_normal_cdf(z: f64) -> f64 {
    std_normal_upper_tail(-z)
}

fn check_sd(sd: f64) -> Result<()> {
    if sd.is_finite() && sd > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveSd(sd))
    }
}

/// Mass of `N(0, 1)` between two standardized points.
///
/// Each branch differences tails on the side away from the mean so small
/// bins in the tails keep their precision. Mirrored inputs give bitwise
/// identical results, which the matrix symmetry relies on.
fn standard_mass(lo: f64, hi: f64) -> f64 {
    if lo >= 0.0 {
        std_normal_upper_tail(lo) - std_normal_upper_tail(hi)
    } else if hi <= 0.0 {
        std_normal_upper_tail(-hi) - std_normal_upper_tail(-lo)
    } else {
        1.0 - (std_normal_upper_tail(-lo) + std_normal_upper_tail(hi))
    }
}

/// Probability that `N(mean, sd)` falls in `(lo, hi)`.
pub fn interval_prob(lo: Bound, hi: Bound, mean: f64, sd: f64) -> Result<f64> {
    check_sd(sd)?;
    let (a, b) = (lo.standardize(mean, sd), hi.standardize(mean, sd));
    if a.is_nan() || b.is_nan() || a > b {
        return Err(Error::InvalidInterval);
    }
    Ok(standard_mass(a, b).max(0.0))
}

/// Unit-width bin centered on `margin`, i.e. `(margin - 0.5, margin + 0.5)`.
pub(crate) fn unit_bin_prob(margin: f64, mean: f64, sd: f64) -> f64 {
    standard_mass((margin - 0.5 - mean) / sd, (margin + 0.5 - mean) / sd).max(0.0)
}

/// Stern's normal model: the chance the bet team beats `line` when the
/// margin is normal around the projection.
pub fn stern_cover_probability(projection: SpreadPoints, line: SpreadPoints, sd: f64) -> Result<f64> {
    check_sd(sd)?;
    Ok(std_normal_cdf((line.value() - projection.value()) / sd))
}

/// Zero-mean normal mass at absolute differential `d`, combining the bins
/// at `+d` and `-d`. The `d = 0` bin is counted once.
pub fn absolute_bin_prob(d: u32, sd: f64) -> Result<f64> {
    check_sd(sd)?;
    let d = f64::from(d);
    if d == 0.0 {
        return Ok(unit_bin_prob(0.0, 0.0, sd));
    }
    Ok(2.0 * unit_bin_prob(d, 0.0, sd))
}
