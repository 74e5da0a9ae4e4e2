//! Historical game ingestion and the tables derived from it: empirical
//! differential frequencies, spread-band statistics, and the multipliers
//! that reshape a normal toward observed key numbers.

mod fit;
mod games;
mod tables;

pub use fit::{fit_loss, fit_sigma, sigma_grid, FitReport, LossKind};
pub use games::{
    binned_cover_rate, ingest_games, spread_band_stats, BandStats, BinnedRate, GameRecord, SpreadBand, GAMES_HEADER,
};
pub use tables::{
    derive_weights, empirical_differential_table, DifferentialTable, WeightTable, DEFAULT_REF_SIGMA,
    SHIPPED_FREQUENCIES, SHIPPED_SOURCE,
};

use crate::error::{Error, Result};

/// Season-level expected wins, `n_games * pf^r / (pf^r + pa^r)`.
/// The usual football exponent is 2.37.
pub fn pythagorean_wins(points_for: f64, points_against: f64, exponent: f64, n_games: f64) -> Result<f64> {
    if !(points_for >= 0.0 && points_against >= 0.0) || !points_for.is_finite() || !points_against.is_finite() {
        return Err(Error::Domain("points must be finite and non-negative".into()));
    }
    if points_for == 0.0 && points_against == 0.0 {
        return Err(Error::Domain("points for and against cannot both be zero".into()));
    }
    if !(exponent > 0.0 && exponent.is_finite()) || !(n_games > 0.0 && n_games.is_finite()) {
        return Err(Error::Domain("exponent and game count must be positive".into()));
    }
    let f = points_for.powf(exponent);
    let a = points_against.powf(exponent);
    Ok(n_games * f / (f + a))
}
