//! Rating tables mapping traditional statistics onto a 1-5 scale.
//!
//! Each table is a list of `(lower_bound, rating)` bands sorted by lower
//! bound; a value takes the rating of the last band whose lower bound it
//! reaches. Printed ranges that share an endpoint ("80.00 - 100.00: 4" and
//! ">= 100.00: 5") therefore resolve to the higher band. Values below the
//! first printed band (zero centuries, zero innings, ...) rate 1.

use serde::{Deserialize, Serialize};

use super::FeaturizeError;

/// Traditional batting and bowling statistics that carry a rating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Attribute {
    Innings,
    BattingAverage,
    BattingStrikeRate,
    Centuries,
    Fifties,
    Zeros,
    HighestScore,
    Overs,
    BowlingAverage,
    BowlingStrikeRate,
    FiveWicketHauls,
}

impl Attribute {
    pub const ALL: [Attribute; 11] = [
        Attribute::Innings,
        Attribute::BattingAverage,
        Attribute::BattingStrikeRate,
        Attribute::Centuries,
        Attribute::Fifties,
        Attribute::Zeros,
        Attribute::HighestScore,
        Attribute::Overs,
        Attribute::BowlingAverage,
        Attribute::BowlingStrikeRate,
        Attribute::FiveWicketHauls,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// The derived attribute a rating feeds; it selects the statistic's
/// aggregation window and, for some statistics, a different table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DerivedKind {
    Consistency,
    Form,
    Opposition,
    Venue,
}

impl DerivedKind {
    pub const ALL: [DerivedKind; 4] =
        [DerivedKind::Consistency, DerivedKind::Form, DerivedKind::Opposition, DerivedKind::Venue];

    pub fn name(self) -> &'static str {
        match self {
            DerivedKind::Consistency => "consistency",
            DerivedKind::Form => "form",
            DerivedKind::Opposition => "opposition",
            DerivedKind::Venue => "venue",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rating(u8);

impl Rating {
    pub fn new(value: u8) -> Option<Rating> {
        (1..=5).contains(&value).then_some(Rating(value))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

type Table = &'static [(f64, u8)];

const INNINGS_CONSISTENCY: Table = &[(1.0, 1), (50.0, 2), (100.0, 3), (125.0, 4), (150.0, 5)];
const INNINGS_FORM: Table = &[(1.0, 1), (5.0, 2), (10.0, 3), (12.0, 4), (15.0, 5)];
const INNINGS_OPPOSITION: Table = &[(1.0, 1), (3.0, 2), (5.0, 3), (7.0, 4), (10.0, 5)];
const INNINGS_VENUE: Table = &[(1.0, 1), (2.0, 2), (3.0, 3), (4.0, 4), (5.0, 5)];

const BATTING_AVERAGE: Table = &[(0.0, 1), (10.0, 2), (20.0, 3), (30.0, 4), (40.0, 5)];
const BATTING_STRIKE_RATE: Table = &[(0.0, 1), (50.0, 2), (60.0, 3), (80.0, 4), (100.0, 5)];

const CENTURIES_CONSISTENCY: Table = &[(1.0, 1), (5.0, 2), (10.0, 3), (15.0, 4), (20.0, 5)];
const CENTURIES_FORM: Table = &[(1.0, 1), (2.0, 2), (3.0, 3), (4.0, 4), (5.0, 5)];
const CENTURIES_OPPOSITION: Table = &[(1.0, 3), (2.0, 4), (3.0, 5)];
const CENTURIES_VENUE: Table = &[(1.0, 4), (2.0, 5)];

const FIFTIES_CONSISTENCY: Table = &[(1.0, 1), (10.0, 2), (20.0, 3), (30.0, 4), (40.0, 5)];
const FIFTIES_FORM_OPPOSITION: Table = &[(1.0, 1), (3.0, 2), (5.0, 3), (7.0, 4), (10.0, 5)];
const FIFTIES_VENUE: Table = &[(1.0, 4), (2.0, 5)];

const ZEROS_CONSISTENCY: Table = &[(1.0, 1), (5.0, 2), (10.0, 3), (15.0, 4), (20.0, 5)];
const ZEROS_FORM_OPPOSITION: Table = &[(1.0, 1), (2.0, 2), (3.0, 3), (4.0, 4), (5.0, 5)];

const HIGHEST_SCORE_VENUE: Table = &[(1.0, 1), (25.0, 2), (50.0, 3), (100.0, 4), (150.0, 5)];

const OVERS_CONSISTENCY: Table = &[(1.0, 1), (100.0, 2), (250.0, 3), (500.0, 4), (1000.0, 5)];
const OVERS_FORM_OPPOSITION: Table = &[(1.0, 1), (10.0, 2), (25.0, 3), (50.0, 4), (100.0, 5)];
const OVERS_VENUE: Table = &[(1.0, 1), (10.0, 2), (20.0, 3), (30.0, 4), (40.0, 5)];

// Lower is better for both bowling ratios.
const BOWLING_AVERAGE: Table = &[(0.0, 5), (25.0, 4), (30.0, 3), (35.0, 2), (50.0, 1)];
const BOWLING_STRIKE_RATE: Table = &[(0.0, 5), (30.0, 4), (40.0, 3), (50.0, 2), (60.0, 1)];

const HAULS_CONSISTENCY: Table = &[(1.0, 3), (3.0, 4), (5.0, 5)];
const HAULS_OTHER: Table = &[(1.0, 4), (3.0, 5)];

fn table(attribute: Attribute, kind: DerivedKind) -> Option<Table> {
    use Attribute as A;
    use DerivedKind as K;
    Some(match (attribute, kind) {
        (A::Innings, K::Consistency) => INNINGS_CONSISTENCY,
        (A::Innings, K::Form) => INNINGS_FORM,
        (A::Innings, K::Opposition) => INNINGS_OPPOSITION,
        (A::Innings, K::Venue) => INNINGS_VENUE,
        (A::BattingAverage, _) => BATTING_AVERAGE,
        (A::BattingStrikeRate, _) => BATTING_STRIKE_RATE,
        (A::Centuries, K::Consistency) => CENTURIES_CONSISTENCY,
        (A::Centuries, K::Form) => CENTURIES_FORM,
        (A::Centuries, K::Opposition) => CENTURIES_OPPOSITION,
        (A::Centuries, K::Venue) => CENTURIES_VENUE,
        (A::Fifties, K::Consistency) => FIFTIES_CONSISTENCY,
        (A::Fifties, K::Form | K::Opposition) => FIFTIES_FORM_OPPOSITION,
        (A::Fifties, K::Venue) => FIFTIES_VENUE,
        (A::Zeros, K::Consistency) => ZEROS_CONSISTENCY,
        (A::Zeros, K::Form | K::Opposition) => ZEROS_FORM_OPPOSITION,
        (A::Zeros, K::Venue) => return None,
        (A::HighestScore, K::Venue) => HIGHEST_SCORE_VENUE,
        (A::HighestScore, _) => return None,
        (A::Overs, K::Consistency) => OVERS_CONSISTENCY,
        (A::Overs, K::Form | K::Opposition) => OVERS_FORM_OPPOSITION,
        (A::Overs, K::Venue) => OVERS_VENUE,
        (A::BowlingAverage, _) => BOWLING_AVERAGE,
        (A::BowlingStrikeRate, _) => BOWLING_STRIKE_RATE,
        (A::FiveWicketHauls, K::Consistency) => HAULS_CONSISTENCY,
        (A::FiveWicketHauls, _) => HAULS_OTHER,
    })
}

/// Rates `value` for `attribute` under the table used by `kind`.
///
/// `None` (an undefined average, an empty window) and NaN rate as missing.
pub fn rate(attribute: Attribute, value: Option<f64>, kind: DerivedKind) -> Result<Option<Rating>, FeaturizeError> {
    let bands = table(attribute, kind).ok_or(FeaturizeError::UnknownAttribute { attribute, kind })?;
    let Some(v) = value.filter(|v| !v.is_nan()) else {
        return Ok(None);
    };
    let rating = bands.iter().take_while(|(lo, _)| v >= *lo).last().map_or(1, |&(_, r)| r);
    Ok(Some(Rating(rating)))
}

/// Ratings for every attribute, each possibly missing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RatedStats {
    ratings: [Option<Rating>; 11],
}

impl RatedStats {
    pub fn get(&self, attribute: Attribute) -> Option<Rating> {
        self.ratings[attribute.index()]
    }

    pub fn set(&mut self, attribute: Attribute, rating: Option<Rating>) {
        self.ratings[attribute.index()] = rating;
    }

    pub fn with(mut self, attribute: Attribute, rating: u8) -> Self {
        self.set(attribute, Rating::new(rating));
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Attribute as A;
    use DerivedKind as K;

    fn r(a: Attribute, v: f64, k: DerivedKind) -> u8 {
        rate(a, Some(v), k).unwrap().unwrap().get()
    }

    #[test]
    fn examples() {
        assert_eq!(r(A::BattingAverage, 35.5, K::Form), 4);
        assert_eq!(r(A::Innings, 100.0, K::Consistency), 3);
        assert_eq!(r(A::BowlingStrikeRate, 29.99, K::Venue), 5);
        assert_eq!(r(A::Centuries, 2.0, K::Opposition), 4);
    }

    #[test]
    fn overlapping_edges_resolve_upward() {
        assert_eq!(r(A::BattingStrikeRate, 100.0, K::Consistency), 5);
        assert_eq!(r(A::HighestScore, 150.0, K::Venue), 5);
        assert_eq!(r(A::Overs, 1000.0, K::Consistency), 5);
        assert_eq!(r(A::Overs, 100.0, K::Form), 5);
    }

    #[test]
    fn below_first_band_rates_one() {
        assert_eq!(r(A::Centuries, 0.0, K::Opposition), 1);
        assert_eq!(r(A::Innings, 0.0, K::Venue), 1);
        assert_eq!(r(A::FiveWicketHauls, 0.0, K::Consistency), 1);
    }

    #[test]
    fn missing_and_unknown() {
        assert_eq!(rate(A::BattingAverage, None, K::Form).unwrap(), None);
        assert_eq!(rate(A::BattingAverage, Some(f64::NAN), K::Form).unwrap(), None);
        assert!(matches!(rate(A::HighestScore, Some(10.0), K::Form), Err(FeaturizeError::UnknownAttribute { .. })));
        assert!(rate(A::Zeros, Some(1.0), K::Venue).is_err());
    }

    #[test]
    fn bowling_ratios_decrease() {
        let mut last = 6;
        for v in [0.0, 10.0, 24.99, 25.0, 29.99, 30.0, 35.0, 49.99, 50.0, 80.0] {
            let now = r(A::BowlingAverage, v, K::Consistency);
            assert!(now <= last);
            last = now;
        }
    }
}
