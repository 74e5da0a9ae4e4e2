//! Cover probabilities and betting edges for point-spread wagers.
//!
//! A projected spread is turned into a distribution over final margins by
//! discretizing a normal curve and reweighting each margin with multipliers
//! derived from historical college football differentials, so common
//! margins such as 3 and 7 carry the mass they do in real games. The
//! resulting [`EdgeMatrix`] answers cover, push and edge queries for any
//! sportsbook line and price.
//!
//! ```
//! use spread_edge::{EdgeMatrix, Odds, SpreadPoints, WeightTable, DEFAULT_CELL_SD};
//!
//! let matrix = EdgeMatrix::build(&WeightTable::shipped(), DEFAULT_CELL_SD).unwrap();
//! let quote = matrix
//!     .edge_quote(SpreadPoints(-2.9), SpreadPoints(-2.5), &Odds::american(-110.0).unwrap())
//!     .unwrap();
//! assert!(quote.edge > 0.0);
//! ```

pub mod engine;
pub mod error;
pub mod gaussian;
pub mod historical;
pub mod odds;

pub use engine::{EdgeMatrix, EdgeQuote, Outcome, COL_HALFWIDTH, DEFAULT_CELL_SD, ROW_HALFWIDTH};
pub use error::{Error, Result};
pub use gaussian::{
    absolute_bin_prob, interval_prob, std_normal_cdf, stern_cover_probability, Bound, MarginPoints, SpreadPoints,
};
pub use historical::{DifferentialTable, GameRecord, WeightTable, DEFAULT_REF_SIGMA};
pub use odds::{edge, ev_per_unit, Odds, OddsFormat, Probability};
