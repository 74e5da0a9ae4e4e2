use std::io::Read;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{MarginPoints, SpreadPoints};

pub const GAMES_HEADER: [&str; 7] = [
    "season",
    "date",
    "home_team",
    "away_team",
    "home_score",
    "away_score",
    "closing_spread_home",
];

/// One historical game with its closing line.
#[derive(Debug, Clone, PartialEq)]
pub struct GameRecord {
    pub season: i32,
    pub date: NaiveDate,
    pub home_team: String,
    pub away_team: String,
    pub home_score: u32,
    pub away_score: u32,
    /// Negative when the home team is favored.
    pub closing_spread_home: SpreadPoints,
}

impl GameRecord {
    pub fn home_margin(&self) -> i64 {
        i64::from(self.home_score) - i64::from(self.away_score)
    }

    pub fn abs_differential(&self) -> u32 {
        self.home_score.abs_diff(self.away_score)
    }

    /// Margin from the favorite's side, or `None` for a pick'em.
    pub fn favorite_margin(&self) -> Option<i64> {
        let spread = self.closing_spread_home.value();
        if spread < 0.0 {
            Some(self.home_margin())
        } else if spread > 0.0 {
            Some(-self.home_margin())
        } else {
            None
        }
    }
}

/// Reads the games CSV. The header must match [`GAMES_HEADER`] exactly.
///
/// Row numbers in errors are file line numbers, so the header is row 1.
pub fn ingest_games<R: Read>(input: R) -> Result<Vec<GameRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let header = reader.headers().map_err(|e| csv_error(1, "header", e))?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::Empty("games file has no header row"));
    }
    for (i, expected) in GAMES_HEADER.iter().enumerate() {
        match header.get(i) {
            Some(found) if found == *expected => {}
            Some(found) => {
                return Err(Error::Csv {
                    row: 1,
                    column: (*expected).to_string(),
                    message: format!("expected column {expected:?} at position {}, found {found:?}", i + 1),
                })
            }
            None => {
                return Err(Error::Csv {
                    row: 1,
                    column: (*expected).to_string(),
                    message: "missing column".to_string(),
                })
            }
        }
    }
    if header.len() > GAMES_HEADER.len() {
        return Err(Error::Csv {
            row: 1,
            column: header[GAMES_HEADER.len()].to_string(),
            message: "unexpected extra column".to_string(),
        });
    }

    let mut games = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line());
            csv_error(row, "record", e)
        })?;
        let row = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        games.push(GameRecord {
            season: parse_field(row, 0, field(0))?,
            date: NaiveDate::parse_from_str(field(1), "%Y-%m-%d").map_err(|e| Error::Csv {
                row,
                column: GAMES_HEADER[1].to_string(),
                message: format!("invalid date {:?}: {e}", field(1)),
            })?,
            home_team: team(row, 2, field(2))?,
            away_team: team(row, 3, field(3))?,
            home_score: parse_field(row, 4, field(4))?,
            away_score: parse_field(row, 5, field(5))?,
            closing_spread_home: SpreadPoints(spread(row, field(6))?),
        });
    }
    if games.is_empty() {
        return Err(Error::Empty("games file has no data rows"));
    }
    Ok(games)
}

fn csv_error(row: u64, column: &str, e: csv::Error) -> Error {
    Error::Csv {
        row,
        column: column.to_string(),
        message: e.to_string(),
    }
}

fn parse_field<T: std::str::FromStr>(row: u64, col: usize, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse().map_err(|e: T::Err| Error::Csv {
        row,
        column: GAMES_HEADER[col].to_string(),
        message: format!("invalid value {raw:?}: {e}"),
    })
}

fn team(row: u64, col: usize, raw: &str) -> Result<String> {
    if raw.is_empty() {
        return Err(Error::Csv {
            row,
            column: GAMES_HEADER[col].to_string(),
            message: "team name is empty".to_string(),
        });
    }
    Ok(raw.to_string())
}

fn spread(row: u64, raw: &str) -> Result<f64> {
    let value: f64 = parse_field(row, 6, raw)?;
    if !value.is_finite() {
        return Err(Error::Csv {
            row,
            column: GAMES_HEADER[6].to_string(),
            message: format!("spread {raw:?} is not finite"),
        });
    }
    Ok(value)
}

/// Closed band of favorite spread magnitudes, e.g. `[6, 7]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadBand {
    lo: f64,
    hi: f64,
}

impl SpreadBand {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo > hi {
            return Err(Error::Domain(format!(
                "spread band [{lo}, {hi}] must satisfy 0 <= lo <= hi"
            )));
        }
        Ok(SpreadBand { lo, hi })
    }

    pub fn contains(&self, spread: SpreadPoints) -> bool {
        let m = spread.magnitude();
        self.lo <= m && m <= self.hi
    }

    /// Favorite margins of the non-pick'em games inside the band.
    fn favorite_margins<'a>(&'a self, games: &'a [GameRecord]) -> impl Iterator<Item = i64> + 'a {
        games
            .iter()
            .filter(|g| self.contains(g.closing_spread_home))
            .filter_map(GameRecord::favorite_margin)
    }
}

/// Summary of favorite margins within a spread band. Statistics that need
/// more games than the band holds are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandStats {
    pub count: usize,
    pub mean_margin: Option<f64>,
    pub sd_margin: Option<f64>,
    pub exceedance_rate: Option<f64>,
}

/// Margin statistics for favorites in `band`.
///
/// `exceedance_rate` is the share of games whose margin lies strictly
/// outside `mean ± k_sd * sd_ref`; `sd_ref` is supplied by the caller
/// (typically the conditional sd of 15) rather than taken from the band.
pub fn spread_band_stats(games: &[GameRecord], band: SpreadBand, k_sd: f64, sd_ref: f64) -> Result<BandStats> {
    if !(k_sd.is_finite() && k_sd >= 0.0) {
        return Err(Error::Domain(format!("k_sd must be non-negative, got {k_sd}")));
    }
    if !(sd_ref.is_finite() && sd_ref > 0.0) {
        return Err(Error::NonPositiveSd(sd_ref));
    }
    let margins: Vec<f64> = band.favorite_margins(games).map(|m| m as f64).collect();
    let count = margins.len();
    if count == 0 {
        return Ok(BandStats {
            count,
            mean_margin: None,
            sd_margin: None,
            exceedance_rate: None,
        });
    }
    let n = count as f64;
    let mean = margins.iter().sum::<f64>() / n;
    let sd = (count > 1).then(|| {
        let ss: f64 = margins.iter().map(|m| (m - mean).powi(2)).sum();
        (ss / (n - 1.0)).sqrt()
    });
    let reach = k_sd * sd_ref;
    let beyond = margins.iter().filter(|m| (*m - mean).abs() > reach).count();
    Ok(BandStats {
        count,
        mean_margin: Some(mean),
        sd_margin: sd,
        exceedance_rate: Some(beyond as f64 / n),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedRate {
    pub n: usize,
    pub rate: Option<f64>,
}

/// Share of favorites in `band` that won by more than `threshold`.
pub fn binned_cover_rate(games: &[GameRecord], band: SpreadBand, threshold: MarginPoints) -> BinnedRate {
    let (mut n, mut covered) = (0usize, 0usize);
    for margin in band.favorite_margins(games) {
        n += 1;
        if margin as f64 > threshold.value() {
            covered += 1;
        }
    }
    BinnedRate {
        n,
        rate: (n > 0).then(|| covered as f64 / n as f64),
    }
}
