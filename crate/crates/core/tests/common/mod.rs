//! Reference computations that share no code path with the library:
//! normal masses by Simpson quadrature, matrices rebuilt cell by cell,
//! and filter-and-count recounts of game statistics.

#![allow(dead_code)]

use chrono::NaiveDate;
use rand::rngs::StdRng;
use rand::Rng;
use spread_edge::{GameRecord, SpreadPoints};

fn density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Mass of N(mean, sd) on [lo, hi] by composite Simpson.
pub fn simpson_mass(lo: f64, hi: f64, mean: f64, sd: f64) -> f64 {
    let (a, b) = ((lo - mean) / sd, (hi - mean) / sd);
    let n = 64;
    let h = (b - a) / n as f64;
    let mut acc = density(a) + density(b);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * density(a + i as f64 * h);
    }
    acc * h / 3.0
}

pub fn abs_bin(d: u32, sd: f64) -> f64 {
    let d = d as f64;
    if d == 0.0 {
        simpson_mass(-0.5, 0.5, 0.0, sd)
    } else {
        simpson_mass(d - 0.5, d + 0.5, 0.0, sd) + simpson_mass(-d - 0.5, -d + 0.5, 0.0, sd)
    }
}

/// Multipliers recomputed as frequency over normal mass, unit beyond the table.
pub fn weights(freq: &[(u32, f64)], sigma: f64) -> impl Fn(u32) -> f64 + '_ {
    let max = freq.iter().map(|(d, _)| *d).max().unwrap_or(0);
    move |d| {
        if d > max {
            1.0
        } else {
            let f = freq.iter().find(|(k, _)| *k == d).map_or(0.0, |(_, f)| *f);
            f / abs_bin(d, sigma)
        }
    }
}

/// One column of the margin matrix for margins -60..=60.
pub fn column(mu: i32, weight: &dyn Fn(u32) -> f64, sd: f64) -> Vec<f64> {
    let raw: Vec<f64> = (-60..=60)
        .map(|s: i32| simpson_mass(s as f64 - 0.5, s as f64 + 0.5, mu as f64, sd) * weight(s.unsigned_abs()))
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|c| c / total).collect()
}

/// Cover probability: sum past the threshold in each neighbouring column,
/// then blend the two sums linearly.
pub fn cover(mu: f64, line: f64, weight: &dyn Fn(u32) -> f64, sd: f64) -> f64 {
    let threshold = -line;
    let past = |col: &[f64]| -> f64 {
        (-60..=60)
            .zip(col)
            .filter(|(s, _)| *s as f64 > threshold)
            .map(|(_, p)| p)
            .sum()
    };
    let n = mu.floor() as i32;
    let f = mu - n as f64;
    let lower = past(&column(n, weight, sd));
    if f == 0.0 {
        return lower;
    }
    (1.0 - f) * lower + f * past(&column(n + 1, weight, sd))
}

pub fn game(spread: f64, home: u32, away: u32) -> GameRecord {
    GameRecord {
        season: 2021,
        date: NaiveDate::from_ymd_opt(2021, 9, 4).unwrap(),
        home_team: "Home".into(),
        away_team: "Away".into(),
        home_score: home,
        away_score: away,
        closing_spread_home: SpreadPoints(spread),
    }
}

/// Random season: half-point spreads, scores loosely tied to the spread.
pub fn random_games(rng: &mut StdRng, n: usize) -> Vec<GameRecord> {
    (0..n)
        .map(|_| {
            let spread = rng.random_range(-60i32..=60) as f64 / 2.0;
            let base = rng.random_range(0u32..40);
            let swing = rng.random_range(-35i32..=35) - spread.round() as i32;
            let home = (base as i32 + swing.max(0)) as u32;
            let away = (base as i32 - swing.min(0)) as u32;
            game(spread, home, away)
        })
        .collect()
}

pub fn favorite_margin(g: &GameRecord) -> Option<f64> {
    let m = g.home_score as f64 - g.away_score as f64;
    let s = g.closing_spread_home.0;
    if s < 0.0 {
        Some(m)
    } else if s > 0.0 {
        Some(-m)
    } else {
        None
    }
}

pub fn band_margins(games: &[GameRecord], lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for g in games {
        let mag = g.closing_spread_home.0.abs();
        if mag >= lo && mag <= hi {
            if let Some(m) = favorite_margin(g) {
                out.push(m);
            }
        }
    }
    out
}

pub fn recount_cover(games: &[GameRecord], lo: f64, hi: f64, threshold: f64) -> (usize, Option<f64>) {
    let margins = band_margins(games, lo, hi);
    let hits = margins.iter().filter(|m| **m > threshold).count();
    let n = margins.len();
    (n, if n == 0 { None } else { Some(hits as f64 / n as f64) })
}

/// (count, mean, sample sd, exceedance) by direct two-pass arithmetic.
pub fn recount_band(
    games: &[GameRecord],
    lo: f64,
    hi: f64,
    k: f64,
    sd_ref: f64,
) -> (usize, Option<f64>, Option<f64>, Option<f64>) {
    let m = band_margins(games, lo, hi);
    let n = m.len();
    if n == 0 {
        return (0, None, None, None);
    }
    let mean = m.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        Some((m.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0)).sqrt())
    } else {
        None
    };
    let out = m.iter().filter(|x| (**x - mean).abs() > k * sd_ref).count();
    (n, Some(mean), sd, Some(out as f64 / n as f64))
}

pub fn sse(freq: &[(u32, f64)], sigma: f64) -> f64 {
    freq.iter()
        .filter(|(d, _)| *d >= 1)
        .map(|(d, f)| (f - abs_bin(*d, sigma)).powi(2))
        .sum()
}

pub fn sae(freq: &[(u32, f64)], sigma: f64) -> f64 {
    freq.iter()
        .filter(|(d, _)| *d >= 1)
        .map(|(d, f)| (f - abs_bin(*d, sigma)).abs())
        .sum()
}
