use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::games::GameRecord;
use crate::error::{Error, Result};
use crate::gaussian::absolute_bin_prob;

/// Historical college football share of games ending at each absolute
/// differential 0..=15, 1980-2014. Only these rows were published, so the
/// values sum to well under one.
pub const SHIPPED_FREQUENCIES: [(u32, f64); 16] = [
    (0, 0.0),
    (1, 0.034),
    (2, 0.027),
    (3, 0.096),
    (4, 0.039),
    (5, 0.026),
    (6, 0.029),
    (7, 0.073),
    (8, 0.024),
    (9, 0.012),
    (10, 0.043),
    (11, 0.023),
    (12, 0.018),
    (13, 0.018),
    (14, 0.043),
    (15, 0.011),
];

pub const SHIPPED_SOURCE: &str = "cfb-1980-2014-partial";

/// Reference sd the shipped multipliers are derived against.
pub const DEFAULT_REF_SIGMA: f64 = 22.0;

const SUM_TOLERANCE: f64 = 1e-9;

/// Relative frequency of each absolute final-score differential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DifferentialTableJson", into = "DifferentialTableJson")]
pub struct DifferentialTable {
    freq: BTreeMap<u32, f64>,
    n_games: Option<u64>,
    source: String,
    /// Set when only part of the support is tabled; the sum-to-one check
    /// is then relaxed to sum <= 1.
    partial: bool,
}

impl DifferentialTable {
    pub fn new(
        freq: BTreeMap<u32, f64>,
        n_games: Option<u64>,
        source: impl Into<String>,
        partial: bool,
    ) -> Result<Self> {
        if freq.is_empty() {
            return Err(Error::Empty("differential table has no rows"));
        }
        for (d, f) in &freq {
            if !(f.is_finite() && *f >= 0.0) {
                return Err(Error::Table(format!("frequency at {d} must be non-negative, got {f}")));
            }
        }
        let sum: f64 = freq.values().sum();
        if partial {
            if sum > 1.0 + SUM_TOLERANCE {
                return Err(Error::Table(format!("partial table frequencies sum to {sum} > 1")));
            }
        } else if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Table(format!("frequencies sum to {sum}, expected 1")));
        }
        Ok(DifferentialTable {
            freq,
            n_games,
            source: source.into(),
            partial,
        })
    }

    /// The published partial table, stored exactly as printed.
    pub fn shipped() -> Self {
        DifferentialTable {
            freq: SHIPPED_FREQUENCIES.into_iter().collect(),
            n_games: None,
            source: SHIPPED_SOURCE.to_string(),
            partial: true,
        }
    }

    pub fn freq(&self, d: u32) -> f64 {
        self.freq.get(&d).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.freq.iter().map(|(d, f)| (*d, *f))
    }

    pub fn max_differential(&self) -> u32 {
        self.freq.keys().next_back().copied().unwrap_or(0)
    }

    pub fn n_games(&self) -> Option<u64> {
        self.n_games
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn is_partial(&self) -> bool {
        self.partial
    }
}

/// Counts absolute differentials over `games`.
pub fn empirical_differential_table(games: &[GameRecord], source: impl Into<String>) -> Result<DifferentialTable> {
    if games.is_empty() {
        return Err(Error::Empty("no games to tabulate"));
    }
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for g in games {
        *counts.entry(g.abs_differential()).or_default() += 1;
    }
    let n = games.len() as f64;
    let freq = counts.into_iter().map(|(d, c)| (d, c as f64 / n)).collect();
    DifferentialTable::new(freq, Some(games.len() as u64), source, false)
}

/// Per-differential multipliers applied to normal bin probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightTableJson", into = "WeightTableJson")]
pub struct WeightTable {
    sigma_ref: f64,
    weights: BTreeMap<u32, f64>,
    default_weight: f64,
}

impl WeightTable {
    pub fn new(sigma_ref: f64, weights: BTreeMap<u32, f64>, default_weight: f64) -> Result<Self> {
        if !(sigma_ref.is_finite() && sigma_ref > 0.0) {
            return Err(Error::NonPositiveSd(sigma_ref));
        }
        if !(default_weight.is_finite() && default_weight >= 0.0) {
            return Err(Error::Table(format!(
                "default weight must be non-negative, got {default_weight}"
            )));
        }
        for (d, w) in &weights {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::Table(format!("weight at {d} must be non-negative, got {w}")));
            }
        }
        Ok(WeightTable {
            sigma_ref,
            weights,
            default_weight,
        })
    }

    /// Every differential weighted 1: the matrix reduces to a plain discretized normal.
    pub fn unit(sigma_ref: f64) -> Result<Self> {
        WeightTable::new(sigma_ref, BTreeMap::new(), 1.0)
    }

    /// Multipliers derived from the shipped table at sd 22.
    pub fn shipped() -> Self {
        derive_weights(&DifferentialTable::shipped(), DEFAULT_REF_SIGMA)
            .expect("shipped table and reference sd are valid")
    }

    pub fn weight(&self, d: u32) -> f64 {
        self.weights.get(&d).copied().unwrap_or(self.default_weight)
    }

    pub fn sigma_ref(&self) -> f64 {
        self.sigma_ref
    }

    pub fn default_weight(&self) -> f64 {
        self.default_weight
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.weights.iter().map(|(d, w)| (*d, *w))
    }

    pub fn with_default_weight(mut self, default_weight: f64) -> Result<Self> {
        self.default_weight = default_weight;
        WeightTable::new(self.sigma_ref, self.weights, self.default_weight)
    }

    /// Short content hash; identifies which multipliers built a matrix.
    pub fn version(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("weight tables always serialize");
        let digest = Sha256::digest(&canonical);
        hex::encode(&digest[..6])
    }
}

/// `weight(d) = freq(d) / absolute_bin_prob(d, sigma)` over `0..=max_d`.
/// Differentials missing from the table inside that range get weight 0.
pub fn derive_weights(table: &DifferentialTable, sigma: f64) -> Result<WeightTable> {
    let mut weights = BTreeMap::new();
    for d in 0..=table.max_differential() {
        weights.insert(d, table.freq(d) / absolute_bin_prob(d, sigma)?);
    }
    WeightTable::new(sigma, weights, 1.0)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DifferentialTableJson {
    n_games: Option<u64>,
    freq: BTreeMap<DiffKey, f64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    source: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    partial: bool,
}

impl TryFrom<DifferentialTableJson> for DifferentialTable {
    type Error = Error;

    fn try_from(raw: DifferentialTableJson) -> Result<Self> {
        let freq = raw.freq.into_iter().map(|(k, v)| (k.0, v)).collect();
        DifferentialTable::new(freq, raw.n_games, raw.source, raw.partial)
    }
}

impl From<DifferentialTable> for DifferentialTableJson {
    fn from(t: DifferentialTable) -> Self {
        DifferentialTableJson {
            n_games: t.n_games,
            freq: t.freq.into_iter().map(|(d, f)| (DiffKey(d), f)).collect(),
            source: t.source,
            partial: t.partial,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightTableJson {
    sigma_ref: f64,
    default_weight: f64,
    weights: BTreeMap<DiffKey, f64>,
}

impl TryFrom<WeightTableJson> for WeightTable {
    type Error = Error;

    fn try_from(raw: WeightTableJson) -> Result<Self> {
        let weights = raw.weights.into_iter().map(|(k, v)| (k.0, v)).collect();
        WeightTable::new(raw.sigma_ref, weights, raw.default_weight)
    }
}

impl From<WeightTable> for WeightTableJson {
    fn from(t: WeightTable) -> Self {
        WeightTableJson {
            sigma_ref: t.sigma_ref,
            default_weight: t.default_weight,
            weights: t.weights.into_iter().map(|(d, w)| (DiffKey(d), w)).collect(),
        }
    }
}

/// JSON object key holding a differential as plain decimal digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct DiffKey(u32);

impl Serialize for DiffKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for DiffKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        let canonical = raw == "0" || (!raw.starts_with('0') && raw.bytes().all(|b| b.is_ascii_digit()));
        match raw.parse::<u32>() {
            Ok(v) if canonical => Ok(DiffKey(v)),
            _ => Err(serde::de::Error::custom(format!(
                "key {raw:?} is not a decimal differential"
            ))),
        }
    }
}
