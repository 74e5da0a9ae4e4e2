use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::tables::DifferentialTable;
use crate::error::{Error, Result};
use crate::gaussian::absolute_bin_prob;

const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// Sum of squared errors.
    #[default]
    Sse,
    /// Sum of absolute errors.
    Sae,
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sse" => Ok(LossKind::Sse),
            "sae" => Ok(LossKind::Sae),
            other => Err(Error::Domain(format!("unknown loss {other:?}, expected sse or sae"))),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Sse => "sse",
            LossKind::Sae => "sae",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub best_sigma: f64,
    pub loss_at_best: f64,
    /// `(sigma, loss)` for every grid point, ascending in sigma.
    pub grid: Vec<(f64, f64)>,
    pub loss_kind: LossKind,
}

/// Sigma grid `lo, lo + step, ...` up to and including `hi`.
pub fn sigma_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
        return Err(Error::Domain(format!(
            "sigma grid needs 0 < min <= max, got [{lo}, {hi}]"
        )));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Domain(format!("grid step must be positive, got {step}")));
    }
    let span = (hi - lo) / step;
    if span + 1.0 > MAX_GRID_POINTS as f64 {
        return Err(Error::Domain(format!(
            "sigma grid would exceed {MAX_GRID_POINTS} points"
        )));
    }
    let n = (span + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

/// Mismatch between the table and the zero-mean normal with this sigma,
/// over tabled differentials `d >= 1`.
pub fn fit_loss(table: &DifferentialTable, sigma: f64, kind: LossKind) -> Result<f64> {
    let mut loss = 0.0;
    let mut any = false;
    for (d, f) in table.entries().filter(|(d, _)| *d >= 1) {
        any = true;
        let r = f - absolute_bin_prob(d, sigma)?;
        loss += match kind {
            LossKind::Sse => r * r,
            LossKind::Sae => r.abs(),
        };
    }
    if !any {
        return Err(Error::Empty("table has no differentials >= 1 to fit"));
    }
    Ok(loss)
}

/// Grid search for the reference sigma. Ties go to the smaller sigma.
pub fn fit_sigma(table: &DifferentialTable, lo: f64, hi: f64, step: f64, kind: LossKind) -> Result<FitReport> {
    let grid = sigma_grid(lo, hi, step)?
        .into_iter()
        .map(|s| fit_loss(table, s, kind).map(|l| (s, l)))
        .collect::<Result<Vec<_>>>()?;
    let (best_sigma, loss_at_best) = best_point(&grid);
    Ok(FitReport {
        best_sigma,
        loss_at_best,
        grid,
        loss_kind: kind,
    })
}

/// First point with the minimum loss; the grid is ascending so ties
/// resolve to the smaller sigma.
fn best_point(grid: &[(f64, f64)]) -> (f64, f64) {
    grid.iter()
        .copied()
        .reduce(|best, cand| if cand.1 < best.1 { cand } else { best })
        .expect("grid has at least one point")
}
