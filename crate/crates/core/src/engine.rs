//! Key-number weighted margin matrix and the cover/push/edge queries on it.
//!
//! Each column is the conditional distribution of the final margin given a
//! projected margin `mu`. A raw cell is the normal mass of the unit bin
//! around margin `s` (mean `mu`, sd `cell_sd`) scaled by the multiplier for
//! `|s|`; each column is then divided by its own total. Fractional
//! projections blend the two neighbouring columns linearly.
//!
//! Rows and columns are both in margin convention: positive means the bet
//! team wins. Spread inputs are converted with
//! [`SpreadPoints::expected_margin`] before they reach the matrix.

use std::collections::BTreeMap;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gaussian::{unit_bin_prob, SpreadPoints};
use crate::historical::WeightTable;
use crate::odds::{ev_per_unit, Odds, Probability};

pub const DEFAULT_CELL_SD: f64 = 15.0;
pub const ROW_HALFWIDTH: i32 = 60;
pub const COL_HALFWIDTH: i32 = 39;

const COLUMN_SUM_TOLERANCE: f64 = 1e-9;

/// Column-stochastic margin matrix, stored one column per projected margin.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMatrix {
    cell_sd: f64,
    row_halfwidth: i32,
    col_halfwidth: i32,
    columns: Vec<Vec<f64>>,
    weight_table_id: String,
}

/// Outcome probabilities for one side of a spread bet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Outcome {
    pub cover: Probability,
    pub push: Probability,
    pub lose: Probability,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeQuote {
    pub cover: Probability,
    pub push: Probability,
    pub lose: Probability,
    pub break_even: Probability,
    /// `cover - break_even`; push mass never counts toward cover.
    pub edge: f64,
    pub ev_per_unit: f64,
}

impl EdgeMatrix {
    /// Full-size matrix: margins -60..=60, projections -39..=39.
    pub fn build(weights: &WeightTable, cell_sd: f64) -> Result<Self> {
        Self::build_with_shape(weights, cell_sd, ROW_HALFWIDTH, COL_HALFWIDTH)
    }

    pub fn build_with_shape(
        weights: &WeightTable,
        cell_sd: f64,
        row_halfwidth: i32,
        col_halfwidth: i32,
    ) -> Result<Self> {
        if !(cell_sd.is_finite() && cell_sd > 0.0) {
            return Err(Error::NonPositiveSd(cell_sd));
        }
        if row_halfwidth < 1 || col_halfwidth < 1 {
            return Err(Error::Domain("matrix halfwidths must be at least 1".into()));
        }
        let row_weights: Vec<f64> = (-row_halfwidth..=row_halfwidth)
            .map(|s| weights.weight(s.unsigned_abs()))
            .collect();
        let columns = (-col_halfwidth..=col_halfwidth)
            .map(|mu| {
                let mut raw: Vec<f64> = (-row_halfwidth..=row_halfwidth)
                    .zip(&row_weights)
                    .map(|(s, w)| unit_bin_prob(f64::from(s), f64::from(mu), cell_sd) * w)
                    .collect();
                let total = mirrored_sum(&raw);
                if total.is_nan() || total <= 0.0 {
                    return Err(Error::DegenerateColumn(mu));
                }
                raw.iter_mut().for_each(|c| *c /= total);
                Ok(raw)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EdgeMatrix {
            cell_sd,
            row_halfwidth,
            col_halfwidth,
            columns,
            weight_table_id: weights.version(),
        })
    }

    pub fn cell_sd(&self) -> f64 {
        self.cell_sd
    }

    pub fn row_halfwidth(&self) -> i32 {
        self.row_halfwidth
    }

    pub fn col_halfwidth(&self) -> i32 {
        self.col_halfwidth
    }

    pub fn weight_table_id(&self) -> &str {
        &self.weight_table_id
    }

    /// Row labels, lowest margin first.
    pub fn margins(&self) -> impl Iterator<Item = i32> + Clone {
        -self.row_halfwidth..=self.row_halfwidth
    }

    pub fn cell(&self, margin: i32, mu: i32) -> Result<f64> {
        let col = self.column_distribution(mu)?;
        self.row_index(margin)
            .map(|i| col[i])
            .ok_or_else(|| Error::Domain(format!("margin {margin} is outside the matrix")))
    }

    fn row_index(&self, margin: i32) -> Option<usize> {
        (margin.abs() <= self.row_halfwidth).then(|| (margin + self.row_halfwidth) as usize)
    }

    fn check_mu(&self, mu: f64) -> Result<()> {
        if mu.is_finite() && mu.abs() <= f64::from(self.col_halfwidth) {
            Ok(())
        } else {
            Err(Error::OutOfModel(-mu, self.col_halfwidth))
        }
    }

    /// The stored conditional distribution for an integer projected margin.
    pub fn column_distribution(&self, mu: i32) -> Result<&[f64]> {
        self.check_mu(f64::from(mu))?;
        Ok(&self.columns[(mu + self.col_halfwidth) as usize])
    }

    /// `(1 - f) * column(n) + f * column(n + 1)` for `mu = n + f`.
    pub fn interpolated_distribution(&self, mu: f64) -> Result<Vec<f64>> {
        self.check_mu(mu)?;
        let n = mu.floor();
        let f = mu - n;
        let lower = self.column_distribution(n as i32)?;
        if f == 0.0 {
            return Ok(lower.to_vec());
        }
        let upper = self.column_distribution(n as i32 + 1)?;
        Ok(lower.iter().zip(upper).map(|(a, b)| (1.0 - f) * a + f * b).collect())
    }

    /// Cover, push and loss for a bet at `line` given projected margin `mu`.
    ///
    /// The bet covers when the margin is strictly above `-line`; landing
    /// exactly on an integer line is a push.
    pub fn cover_push_probabilities(&self, mu: f64, line: SpreadPoints) -> Result<Outcome> {
        let dist = self.interpolated_distribution(mu)?;
        self.outcome(&dist, line)
    }

    fn outcome(&self, dist: &[f64], line: SpreadPoints) -> Result<Outcome> {
        if !(line.value().is_finite() && line.magnitude() <= f64::from(self.row_halfwidth)) {
            return Err(Error::LineOutOfRange(line.value(), self.row_halfwidth));
        }
        let threshold = line.expected_margin().value();
        let (mut cover, mut push, mut lose) = (0.0, 0.0, 0.0);
        for (s, p) in self.margins().zip(dist) {
            let s = f64::from(s);
            if s > threshold {
                cover += p;
            } else if s == threshold {
                push += p;
            } else {
                lose += p;
            }
        }
        Ok(Outcome {
            cover: Probability::saturating(cover),
            push: Probability::saturating(push),
            lose: Probability::saturating(lose),
        })
    }

    /// Full quote for backing the team whose projected spread is `projection`
    /// at sportsbook `line` and price `odds`.
    pub fn edge_quote(&self, projection: SpreadPoints, line: SpreadPoints, odds: &Odds) -> Result<EdgeQuote> {
        if !(projection.value().is_finite() && projection.magnitude() <= f64::from(self.col_halfwidth)) {
            return Err(Error::OutOfModel(projection.value(), self.col_halfwidth));
        }
        let outcome = self.cover_push_probabilities(projection.expected_margin().value(), line)?;
        let break_even = odds.break_even();
        Ok(EdgeQuote {
            cover: outcome.cover,
            push: outcome.push,
            lose: outcome.lose,
            break_even,
            edge: outcome.cover.value() - break_even.value(),
            ev_per_unit: ev_per_unit(outcome.cover, outcome.push, odds)?,
        })
    }

    /// Expected final margin under the interpolated distribution.
    pub fn conditional_mean(&self, mu: f64) -> Result<f64> {
        let dist = self.interpolated_distribution(mu)?;
        Ok(self.margins().zip(&dist).map(|(s, p)| f64::from(s) * p).sum())
    }
}

/// Sum taken symmetrically from both ends, so a reversed slice sums to the
/// bitwise-identical total.
fn mirrored_sum(values: &[f64]) -> f64 {
    let n = values.len();
    let mut total = 0.0;
    for i in 0..n / 2 {
        total += values[i] + values[n - 1 - i];
    }
    if n % 2 == 1 {
        total += values[n / 2];
    }
    total
}

impl Serialize for EdgeMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Columns<'a>(&'a EdgeMatrix);

        impl Serialize for Columns<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
                let m = self.0;
                let mut map = serializer.serialize_map(Some(m.columns.len()))?;
                for (mu, col) in (-m.col_halfwidth..=m.col_halfwidth).zip(&m.columns) {
                    map.serialize_entry(&mu.to_string(), col)?;
                }
                map.end()
            }
        }

        let mut map = serializer.serialize_map(Some(5))?;
        map.serialize_entry("cell_sd", &self.cell_sd)?;
        map.serialize_entry("col_range", &[-self.col_halfwidth, self.col_halfwidth])?;
        map.serialize_entry("row_range", &[-self.row_halfwidth, self.row_halfwidth])?;
        map.serialize_entry("weight_table_id", &self.weight_table_id)?;
        map.serialize_entry("columns", &Columns(self))?;
        map.end()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixJson {
    cell_sd: f64,
    col_range: [i32; 2],
    row_range: [i32; 2],
    #[serde(default)]
    weight_table_id: String,
    columns: BTreeMap<String, Vec<f64>>,
}

impl TryFrom<MatrixJson> for EdgeMatrix {
    type Error = Error;

    fn try_from(raw: MatrixJson) -> Result<Self> {
        let bad = |msg: String| Error::Table(msg);
        if !(raw.cell_sd.is_finite() && raw.cell_sd > 0.0) {
            return Err(Error::NonPositiveSd(raw.cell_sd));
        }
        let [c_lo, col_halfwidth] = raw.col_range;
        let [r_lo, row_halfwidth] = raw.row_range;
        if c_lo != -col_halfwidth || col_halfwidth < 1 || r_lo != -row_halfwidth || row_halfwidth < 1 {
            return Err(bad(
                "row_range and col_range must be symmetric [-n, n] with n >= 1".into()
            ));
        }
        let expected = (-col_halfwidth..=col_halfwidth).count();
        if raw.columns.len() != expected {
            return Err(bad(format!("expected {expected} columns, found {}", raw.columns.len())));
        }
        let mut columns = Vec::with_capacity(expected);
        for mu in -col_halfwidth..=col_halfwidth {
            let col = raw
                .columns
                .get(&mu.to_string())
                .ok_or_else(|| bad(format!("missing column {mu}")))?;
            if col.len() != (2 * row_halfwidth + 1) as usize {
                return Err(bad(format!(
                    "column {mu} has {} cells, expected {}",
                    col.len(),
                    2 * row_halfwidth + 1
                )));
            }
            if col.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
                return Err(bad(format!("column {mu} has a negative or non-finite cell")));
            }
            let sum: f64 = col.iter().sum();
            if (sum - 1.0).abs() > COLUMN_SUM_TOLERANCE {
                return Err(bad(format!("column {mu} sums to {sum}")));
            }
            columns.push(col.clone());
        }
        Ok(EdgeMatrix {
            cell_sd: raw.cell_sd,
            row_halfwidth,
            col_halfwidth,
            columns,
            weight_table_id: raw.weight_table_id,
        })
    }
}

impl<'de> Deserialize<'de> for EdgeMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        EdgeMatrix::try_from(raw).map_err(serde::de::Error::custom)
    }
}
