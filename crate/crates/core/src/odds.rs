//! Odds formats, break-even percentages, edge and expected value.
//!
//! Everything here works in probability units in `[0, 1]`; percent strings
//! are a presentation concern left to callers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::InvalidProbability(value))
        }
    }

    /// Clamps tiny floating point excursions (e.g. `1 + 1e-16`) back into range.
    pub(crate) fn saturating(value: f64) -> Self {
        Probability(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OddsFormat {
    American,
    Decimal,
}

impl FromStr for OddsFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "american" => Ok(OddsFormat::American),
            "decimal" => Ok(OddsFormat::Decimal),
            other => Err(Error::Domain(format!(
                "unknown odds format {other:?}, expected \"american\" or \"decimal\""
            ))),
        }
    }
}

impl fmt::Display for OddsFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OddsFormat::American => "american",
            OddsFormat::Decimal => "decimal",
        })
    }
}

/// A validated price. American prices may be fractional (`-105.5`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Odds {
    format: OddsFormat,
    value: f64,
}

impl Odds {
    pub fn american(value: f64) -> Result<Self> {
        if value.is_finite() && value.abs() >= 100.0 {
            Ok(Odds {
                format: OddsFormat::American,
                value,
            })
        } else {
            Err(Error::InvalidAmericanOdds(value))
        }
    }

    pub fn decimal(value: f64) -> Result<Self> {
        if value.is_finite() && value > 1.0 {
            Ok(Odds {
                format: OddsFormat::Decimal,
                value,
            })
        } else {
            Err(Error::InvalidDecimalOdds(value))
        }
    }

    pub fn new(format: OddsFormat, value: f64) -> Result<Self> {
        match format {
            OddsFormat::American => Odds::american(value),
            OddsFormat::Decimal => Odds::decimal(value),
        }
    }

    pub fn format(&self) -> OddsFormat {
        self.format
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Total return per unit staked, stake included.
    pub fn decimal_multiplier(&self) -> f64 {
        match self.format {
            OddsFormat::Decimal => self.value,
            OddsFormat::American if self.value > 0.0 => 1.0 + self.value / 100.0,
            OddsFormat::American => 1.0 + 100.0 / -self.value,
        }
    }

    /// Win rate at which the bet is long-run neutral.
    ///
    /// American prices use `|min(100, odds)| / (100 + |odds|)`, which gives
    /// `120 / 220` for -120 and `100 / 210` for +110.
    pub fn break_even(&self) -> Probability {
        let p = match self.format {
            OddsFormat::American => self.value.min(100.0).abs() / (100.0 + self.value.abs()),
            OddsFormat::Decimal => 1.0 / self.value,
        };
        Probability(p)
    }

    pub fn convert(&self, target: OddsFormat) -> Odds {
        if target == self.format {
            return *self;
        }
        match target {
            OddsFormat::Decimal => Odds {
                format: OddsFormat::Decimal,
                value: self.decimal_multiplier(),
            },
            OddsFormat::American => {
                let profit = self.value - 1.0;
                let value = if self.value >= 2.0 {
                    profit * 100.0
                } else {
                    -100.0 / profit
                };
                Odds {
                    format: OddsFormat::American,
                    value,
                }
            }
        }
    }
}

impl fmt::Display for Odds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.format {
            OddsFormat::American => write!(f, "{:+}", self.value),
            OddsFormat::Decimal => write!(f, "{}", self.value),
        }
    }
}

/// Cover probability minus break-even probability. Negative means no bet.
pub fn edge(cover: Probability, odds: &Odds) -> f64 {
    cover.value() - odds.break_even().value()
}

/// Expected profit per unit staked when pushes refund the stake.
pub fn ev_per_unit(p_win: Probability, p_push: Probability, odds: &Odds) -> Result<f64> {
    let total = p_win.value() + p_push.value();
    if total > 1.0 + 1e-12 {
        return Err(Error::ProbabilitySumExceedsOne(total));
    }
    let p_lose = (1.0 - total).max(0.0);
    Ok(p_win.value() * (odds.decimal_multiplier() - 1.0) - p_lose)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn am(v: f64) -> Odds {
        Odds::american(v).unwrap()
    }

    fn p(v: f64) -> Probability {
        Probability::new(v).unwrap()
    }

    #[test]
    fn break_even_examples() {
        assert_eq!(format!("{:.4}", am(-120.0).break_even().value()), "0.5455");
        assert_eq!(format!("{:.4}", am(110.0).break_even().value()), "0.4762");
        assert_eq!(format!("{:.4}", am(-110.0).break_even().value()), "0.5238");
        assert_eq!(Odds::decimal(2.0).unwrap().break_even().value(), 0.5);
        assert_eq!(am(100.0).break_even().value(), 0.5);
        assert_eq!(am(-100.0).break_even().value(), 0.5);
    }

    #[test]
    fn rejects_invalid_prices() {
        for v in [-99.99, 0.0, 50.0, 99.0, f64::NAN, f64::INFINITY] {
            assert!(Odds::american(v).is_err(), "{v}");
        }
        for v in [1.0, 0.5, -2.0, f64::NAN] {
            assert!(Odds::decimal(v).is_err(), "{v}");
        }
        assert!(Odds::american(-105.5).is_ok());
    }

    #[test]
    fn conversion_examples() {
        let d = am(150.0).convert(OddsFormat::Decimal);
        assert_eq!(d.format(), OddsFormat::Decimal);
        assert!((d.value() - 2.5).abs() < 1e-12);
        assert_eq!(
            format!("{:.4}", am(-110.0).convert(OddsFormat::Decimal).value()),
            "1.9091"
        );
        let back = Odds::decimal(2.5).unwrap().convert(OddsFormat::American);
        assert!((back.value() - 150.0).abs() < 1e-9);
        assert_eq!(am(-110.0).convert(OddsFormat::American), am(-110.0));
        let short = Odds::decimal(1.5).unwrap().convert(OddsFormat::American);
        assert!((short.value() + 200.0).abs() < 1e-9);
    }

    #[test]
    fn edge_examples() {
        assert!((edge(p(0.532), &am(-110.0)) - 0.008).abs() < 5e-4);
        assert!((edge(p(0.531), &am(-110.0)) - 0.007).abs() < 5e-4);
        let o = am(-135.0);
        assert_eq!(edge(o.break_even(), &o), 0.0);
    }

    #[test]
    fn ev_examples() {
        let o = am(-110.0);
        assert!(ev_per_unit(o.break_even(), Probability::ZERO, &o).unwrap().abs() < 1e-12);
        let d = Odds::decimal(3.2).unwrap();
        assert!((ev_per_unit(Probability::ONE, Probability::ZERO, &d).unwrap() - 2.2).abs() < 1e-12);
        let ev = ev_per_unit(p(0.532), Probability::ZERO, &o).unwrap();
        assert_eq!(format!("{ev:.4}"), "0.0156");
        // Push mass is refunded, so it only reduces the losing share.
        let with_push = ev_per_unit(p(0.45), p(0.1), &o).unwrap();
        assert!((with_push - (0.45 * (100.0 / 110.0) - 0.45)).abs() < 1e-12);
    }

    #[test]
    fn ev_rejects_overfull_probabilities() {
        assert!(matches!(
            ev_per_unit(p(0.7), p(0.4), &am(-110.0)),
            Err(Error::ProbabilitySumExceedsOne(_))
        ));
    }

    #[test]
    fn probability_bounds() {
        assert!(Probability::new(-0.01).is_err());
        assert!(Probability::new(1.01).is_err());
        assert!(Probability::new(f64::NAN).is_err());
    }

    #[test]
    fn format_parsing() {
        assert_eq!("American".parse::<OddsFormat>().unwrap(), OddsFormat::American);
        assert_eq!("decimal".parse::<OddsFormat>().unwrap(), OddsFormat::Decimal);
        assert!("fractional".parse::<OddsFormat>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn mirrored_prices_carry_no_juice(x in 100.0f64..10_000.0) {
                let sum = am(-x).break_even().value() + am(x).break_even().value();
                prop_assert!((sum - 1.0).abs() < 1e-12);
            }

            #[test]
            fn juice_exists_when_both_sides_lay_the_price(x in 100.0f64..10_000.0) {
                let sum = 2.0 * am(-x).break_even().value();
                if x > 100.0 {
                    prop_assert!(sum > 1.0);
                } else {
                    prop_assert_eq!(sum, 1.0);
                }
            }

            #[test]
            fn american_round_trip(v in prop_oneof![-10_000i32..=-100, 100i32..=10_000]) {
                let o = am(v as f64);
                let back = o.convert(OddsFormat::Decimal).convert(OddsFormat::American);
                prop_assert!((back.value() - v as f64).abs() < 1e-9);
            }

            #[test]
            fn break_even_survives_conversion(v in prop_oneof![-10_000.0f64..=-100.0, 100.0f64..=10_000.0]) {
                let o = am(v);
                let d = o.convert(OddsFormat::Decimal);
                prop_assert!((o.break_even().value() - d.break_even().value()).abs() < 1e-12);
                let a = d.convert(OddsFormat::American);
                prop_assert!((o.break_even().value() - a.break_even().value()).abs() < 1e-12);
            }

            #[test]
            fn ev_is_zero_at_break_even(v in prop_oneof![-5_000.0f64..=-100.0, 100.0f64..=5_000.0]) {
                let o = am(v);
                let ev = ev_per_unit(o.break_even(), Probability::ZERO, &o).unwrap();
                prop_assert!(ev.abs() < 1e-12);
            }
        }
    }
}
