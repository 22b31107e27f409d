//! Innings logs: domain records, CSV ingestion and synthetic fixtures.

mod csv_io;
pub mod fixture;
mod roster;

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use csv_io::{
    parse_batting_csv, parse_bowling_csv, read_batting, read_bowling, write_batting, write_bowling, BATTING_HEADER,
    BOWLING_HEADER,
};
pub use fixture::{generate_fixture, Fixture, FixtureProfile};
pub use roster::{parse_rosters_csv, read_rosters, write_rosters, Roster, RosterEntry, Rosters, ROSTER_HEADER};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema mismatch: expected header `{expected}`, found `{found}`")]
    SchemaMismatch { expected: String, found: String },
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: player {player_id} dated {date} after a row dated {previous}")]
    OrderViolation { line: u64, player_id: String, date: NaiveDate, previous: NaiveDate },
    #[error("invalid roster: {0}")]
    InvalidRoster(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Error)]
#[error("unknown {kind} token `{token}`")]
pub struct TokenError {
    pub kind: &'static str,
    pub token: String,
}

/// Enumerations that travel as fixed string tokens in files and over HTTP.
pub trait Token: Sized + Copy + 'static {
    const KIND: &'static str;
    const ALL: &'static [Self];
    fn token(self) -> &'static str;

    fn from_token(s: &str) -> Result<Self, TokenError> {
        Self::ALL
            .iter()
            .copied()
            .find(|v| v.token() == s)
            .ok_or_else(|| TokenError { kind: Self::KIND, token: s.to_string() })
    }

    fn all_tokens() -> Vec<String> {
        Self::ALL.iter().map(|v| v.token().to_string()).collect()
    }
}

macro_rules! token_enum {
    ($(#[$meta:meta])* $name:ident, $kind:literal, { $($variant:ident => $tok:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name { $($variant),+ }

        impl Token for $name {
            const KIND: &'static str = $kind;
            const ALL: &'static [Self] = &[$($name::$variant),+];
            fn token(self) -> &'static str {
                match self { $($name::$variant => $tok),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.token())
            }
        }

        impl FromStr for $name {
            type Err = TokenError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                <Self as Token>::from_token(s)
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.token())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                <Self as Token>::from_token(&s).map_err(serde::de::Error::custom)
            }
        }
    };
}

token_enum!(MatchType, "match type", {
    Normal => "Normal",
    QuarterFinal => "QuarterFinal",
    SemiFinal => "SemiFinal",
    Final => "Final",
});

token_enum!(MatchTime, "match time", {
    Day => "Day",
    DayNight => "DayNight",
});

token_enum!(
    /// Two-team, three/four-team and five-team tournaments.
    Tournament, "tournament", {
    TT => "TT",
    TFT => "TFT",
    FT => "FT",
});

token_enum!(VenueRelation, "venue relation", {
    Home => "Home",
    Away => "Away",
    Neutral => "Neutral",
});

token_enum!(Hand, "hand", {
    Left => "Left",
    Right => "Right",
});

token_enum!(
    /// Playing role. OBT, TOB and MOB are opening, top-order and
    /// middle-order batsmen.
    Role, "role", {
    OBT => "OBT",
    TOB => "TOB",
    MOB => "MOB",
    Batsman => "Batsman",
    Allrounder => "Allrounder",
    BattingAllrounder => "BattingAllrounder",
    BowlingAllrounder => "BowlingAllrounder",
    Bowler => "Bowler",
});

impl Role {
    pub fn bats(self) -> bool {
        self != Role::Bowler
    }

    pub fn bowls(self) -> bool {
        matches!(self, Role::Allrounder | Role::BattingAllrounder | Role::BowlingAllrounder | Role::Bowler)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BattingInnings {
    pub player_id: String,
    pub player_name: String,
    pub match_date: NaiveDate,
    /// Position among the player's innings on `match_date`, in file order.
    pub seq: u32,
    pub opposition: String,
    pub ground: String,
    pub host_country: String,
    pub runs: u32,
    pub balls_faced: u32,
    pub dismissed: bool,
    pub position: u8,
    pub innings_no: u8,
    pub match_type: MatchType,
    pub match_time: MatchTime,
    pub tournament: Tournament,
    pub toss_won: bool,
    pub venue_relation: VenueRelation,
    pub captain: bool,
    pub wicketkeeper: bool,
    pub batting_hand: Hand,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowlingInnings {
    pub player_id: String,
    pub player_name: String,
    pub match_date: NaiveDate,
    pub seq: u32,
    pub opposition: String,
    pub ground: String,
    pub host_country: String,
    pub balls_bowled: u32,
    pub runs_conceded: u32,
    pub wickets: u8,
    pub innings_no: u8,
    pub match_type: MatchType,
    pub match_time: MatchTime,
    pub tournament: Tournament,
    pub toss_won: bool,
    pub venue_relation: VenueRelation,
    pub bowling_hand: Hand,
}

impl BowlingInnings {
    pub fn overs(&self) -> Overs {
        Overs::from_balls(self.balls_bowled)
    }
}

/// Balls bowled, shown in cricket notation (`9.3` is nine overs and three
/// balls) only when formatted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Overs(u32);

impl Overs {
    pub fn from_balls(balls: u32) -> Self {
        Overs(balls)
    }

    pub fn balls(self) -> u32 {
        self.0
    }

    /// Completed overs as a real number (balls / 6).
    pub fn as_fraction(self) -> f64 {
        self.0 as f64 / 6.0
    }
}

impl fmt::Display for Overs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.0 / 6, self.0 % 6)
    }
}

impl FromStr for Overs {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (whole, part) = match s.split_once('.') {
            Some((w, p)) => (w, p),
            None => (s, "0"),
        };
        let whole: u32 = whole.parse().map_err(|_| format!("bad overs `{s}`"))?;
        let part: u32 = part.parse().map_err(|_| format!("bad overs `{s}`"))?;
        if part > 5 {
            return Err(format!("bad overs `{s}`: at most 5 balls past a completed over"));
        }
        Ok(Overs(whole * 6 + part))
    }
}
