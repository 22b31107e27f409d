use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::csv_io::{open, records};
use super::{Hand, IngestError, Role};

pub const ROSTER_HEADER: &str = "team,as_of,player_id,player_name,role,batting_hand,bowling_hand,captain,wicketkeeper";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub player_id: String,
    pub player_name: String,
    pub role: Role,
    pub batting_hand: Hand,
    pub bowling_hand: Hand,
    pub captain: bool,
    pub wicketkeeper: bool,
}

/// A team's squad as of a date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Roster {
    pub team: String,
    pub as_of: NaiveDate,
    pub players: Vec<RosterEntry>,
}

impl Roster {
    pub fn new(team: String, as_of: NaiveDate, players: Vec<RosterEntry>) -> Result<Self, IngestError> {
        if players.is_empty() {
            return Err(IngestError::InvalidRoster(format!("{team} ({as_of}) has no players")));
        }
        let mut seen = HashSet::new();
        for p in &players {
            if !seen.insert(p.player_id.as_str()) {
                return Err(IngestError::InvalidRoster(format!("{team} ({as_of}) lists {} twice", p.player_id)));
            }
        }
        Ok(Roster { team, as_of, players })
    }

    pub fn entry(&self, player_id: &str) -> Option<&RosterEntry> {
        self.players.iter().find(|p| p.player_id == player_id)
    }
}

/// All rosters, grouped by team and ordered by date.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Rosters {
    by_team: BTreeMap<String, Vec<Roster>>,
}

impl Rosters {
    pub fn new(rosters: Vec<Roster>) -> Self {
        let mut by_team: BTreeMap<String, Vec<Roster>> = BTreeMap::new();
        for r in rosters {
            by_team.entry(r.team.clone()).or_default().push(r);
        }
        for list in by_team.values_mut() {
            list.sort_by_key(|r| r.as_of);
        }
        Rosters { by_team }
    }

    pub fn is_empty(&self) -> bool {
        self.by_team.is_empty()
    }

    pub fn teams(&self) -> impl Iterator<Item = &str> {
        self.by_team.keys().map(String::as_str)
    }

    pub fn all(&self) -> impl Iterator<Item = &Roster> {
        self.by_team.values().flatten()
    }

    /// The latest roster dated on or before `date`, or the team's earliest
    /// roster when every one postdates it.
    pub fn for_team(&self, team: &str, date: NaiveDate) -> Option<&Roster> {
        let list = self.by_team.get(team)?;
        list.iter().rev().find(|r| r.as_of <= date).or_else(|| list.first())
    }

    /// The team whose applicable roster lists `player_id` on `date`.
    pub fn team_of(&self, player_id: &str, date: NaiveDate) -> Option<(&str, &RosterEntry)> {
        self.by_team.keys().find_map(|team| {
            let roster = self.for_team(team, date)?;
            roster.entry(player_id).map(|e| (team.as_str(), e))
        })
    }

    pub fn into_vec(self) -> Vec<Roster> {
        self.by_team.into_values().flatten().collect()
    }
}

pub fn parse_rosters_csv(path: impl AsRef<Path>) -> Result<Rosters, IngestError> {
    read_rosters(open(path.as_ref())?)
}

pub fn read_rosters<R: Read>(reader: R) -> Result<Rosters, IngestError> {
    let names: Vec<&str> = ROSTER_HEADER.split(',').collect();
    let mut groups: BTreeMap<(String, NaiveDate), Vec<RosterEntry>> = BTreeMap::new();
    records(reader, ROSTER_HEADER, &names, |f| {
        let key = (f.string(0)?, f.date(1)?);
        groups.entry(key).or_default().push(RosterEntry {
            player_id: f.string(2)?,
            player_name: f.string(3)?,
            role: f.parse(4)?,
            batting_hand: f.parse(5)?,
            bowling_hand: f.parse(6)?,
            captain: f.flag(7)?,
            wicketkeeper: f.flag(8)?,
        });
        Ok(())
    })?;
    let rosters = groups
        .into_iter()
        .map(|((team, as_of), players)| Roster::new(team, as_of, players))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Rosters::new(rosters))
}

pub fn write_rosters<W: Write>(writer: W, rosters: &[Roster]) -> Result<(), IngestError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(ROSTER_HEADER.split(','))?;
    let flag = |b: bool| if b { "1" } else { "0" };
    for r in rosters {
        for p in &r.players {
            w.write_record([
                r.team.as_str(),
                &r.as_of.to_string(),
                &p.player_id,
                &p.player_name,
                p.role.to_string().as_str(),
                &p.batting_hand.to_string(),
                &p.bowling_hand.to_string(),
                flag(p.captain),
                flag(p.wicketkeeper),
            ])?;
        }
    }
    w.flush().map_err(|source| IngestError::Io { path: "<writer>".into(), source })?;
    Ok(())
}
