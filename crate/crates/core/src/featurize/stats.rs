use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use super::rating::{rate, Attribute, DerivedKind, RatedStats};
use crate::ingest::{BattingInnings, BowlingInnings};

/// Which of a player's prior innings an aggregate covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Window {
    Career,
    /// Innings dated in `[as_of - 365 days, as_of)`.
    Form12m,
    VsOpposition(String),
    AtVenue(String),
}

impl Window {
    pub fn kind(&self) -> DerivedKind {
        match self {
            Window::Career => DerivedKind::Consistency,
            Window::Form12m => DerivedKind::Form,
            Window::VsOpposition(_) => DerivedKind::Opposition,
            Window::AtVenue(_) => DerivedKind::Venue,
        }
    }

    fn admits(&self, date: NaiveDate, opposition: &str, ground: &str, as_of: NaiveDate) -> bool {
        match self {
            Window::Career => true,
            Window::Form12m => as_of.checked_sub_days(Days::new(365)).is_none_or(|from| date >= from),
            Window::VsOpposition(team) => opposition == team,
            Window::AtVenue(venue) => ground == venue,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraditionalBattingStats {
    pub innings: u32,
    pub runs: u64,
    pub balls: u64,
    pub dismissals: u32,
    /// Runs per dismissal; `None` without a dismissal.
    pub average: Option<f64>,
    /// Runs per 100 balls; `None` without a ball faced.
    pub strike_rate: Option<f64>,
    pub centuries: u32,
    pub fifties: u32,
    pub zeros: u32,
    /// `None` for an empty window.
    pub highest_score: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraditionalBowlingStats {
    pub innings: u32,
    pub balls: u64,
    pub runs_conceded: u64,
    pub wickets: u32,
    /// Completed overs as balls / 6.
    pub overs: f64,
    /// Runs conceded per wicket; `None` without a wicket.
    pub bowling_average: Option<f64>,
    /// Balls per wicket; `None` without a wicket.
    pub bowling_strike_rate: Option<f64>,
    /// Innings with more than four wickets.
    pub ff: u32,
}

/// Innings strictly before `as_of`. `history` must be date-sorted.
fn before<T>(history: &[T], as_of: NaiveDate, date: impl Fn(&T) -> NaiveDate) -> &[T] {
    &history[..history.partition_point(|r| date(r) < as_of)]
}

pub fn aggregate_batting(history: &[BattingInnings], as_of: NaiveDate, window: &Window) -> TraditionalBattingStats {
    let mut s = TraditionalBattingStats::default();
    for inn in before(history, as_of, |r| r.match_date) {
        if !window.admits(inn.match_date, &inn.opposition, &inn.ground, as_of) {
            continue;
        }
        s.innings += 1;
        s.runs += u64::from(inn.runs);
        s.balls += u64::from(inn.balls_faced);
        if inn.dismissed {
            s.dismissals += 1;
        }
        match inn.runs {
            100.. => s.centuries += 1,
            50..=99 => s.fifties += 1,
            0 if inn.dismissed => s.zeros += 1,
            _ => {}
        }
        s.highest_score = Some(s.highest_score.map_or(inn.runs, |h| h.max(inn.runs)));
    }
    s.average = (s.dismissals > 0).then(|| s.runs as f64 / f64::from(s.dismissals));
    s.strike_rate = (s.balls > 0).then(|| 100.0 * s.runs as f64 / s.balls as f64);
    s
}

pub fn aggregate_bowling(history: &[BowlingInnings], as_of: NaiveDate, window: &Window) -> TraditionalBowlingStats {
    let mut s = TraditionalBowlingStats::default();
    for inn in before(history, as_of, |r| r.match_date) {
        if !window.admits(inn.match_date, &inn.opposition, &inn.ground, as_of) {
            continue;
        }
        s.innings += 1;
        s.balls += u64::from(inn.balls_bowled);
        s.runs_conceded += u64::from(inn.runs_conceded);
        s.wickets += u32::from(inn.wickets);
        if inn.wickets > 4 {
            s.ff += 1;
        }
    }
    s.overs = s.balls as f64 / 6.0;
    s.bowling_average = (s.wickets > 0).then(|| s.runs_conceded as f64 / f64::from(s.wickets));
    s.bowling_strike_rate = (s.wickets > 0).then(|| s.balls as f64 / f64::from(s.wickets));
    s
}

/// Rates the statistics a batting formula of `kind` consumes. An empty
/// window leaves every rating missing.
pub fn rate_batting(stats: &TraditionalBattingStats, kind: DerivedKind) -> RatedStats {
    let mut rated = RatedStats::default();
    if stats.innings == 0 {
        return rated;
    }
    let mut put = |attribute, value: Option<f64>| {
        if let Ok(r) = rate(attribute, value, kind) {
            rated.set(attribute, r);
        }
    };
    put(Attribute::Innings, Some(f64::from(stats.innings)));
    put(Attribute::BattingAverage, stats.average);
    put(Attribute::BattingStrikeRate, stats.strike_rate);
    put(Attribute::Centuries, Some(f64::from(stats.centuries)));
    put(Attribute::Fifties, Some(f64::from(stats.fifties)));
    put(Attribute::Zeros, Some(f64::from(stats.zeros)));
    put(Attribute::HighestScore, stats.highest_score.map(f64::from));
    rated
}

pub fn rate_bowling(stats: &TraditionalBowlingStats, kind: DerivedKind) -> RatedStats {
    let mut rated = RatedStats::default();
    if stats.innings == 0 {
        return rated;
    }
    let mut put = |attribute, value: Option<f64>| {
        if let Ok(r) = rate(attribute, value, kind) {
            rated.set(attribute, r);
        }
    };
    put(Attribute::Innings, Some(f64::from(stats.innings)));
    put(Attribute::Overs, Some(stats.overs));
    put(Attribute::BowlingAverage, stats.bowling_average);
    put(Attribute::BowlingStrikeRate, stats.bowling_strike_rate);
    put(Attribute::FiveWicketHauls, Some(f64::from(stats.ff)));
    rated
}
