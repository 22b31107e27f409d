use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;

use super::{BattingInnings, BowlingInnings, IngestError};

pub const BATTING_HEADER: &str = "player_id,player_name,match_date,opposition,ground,host_country,runs,balls_faced,dismissed,position,innings_no,match_type,match_time,tournament,toss_won,venue_relation,captain,wicketkeeper,batting_hand,role";

pub const BOWLING_HEADER: &str = "player_id,player_name,match_date,opposition,ground,host_country,balls_bowled,runs_conceded,wickets,innings_no,match_type,match_time,tournament,toss_won,venue_relation,bowling_hand";

pub(crate) fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Io { path: path.display().to_string(), source })
}

pub fn parse_batting_csv(path: impl AsRef<Path>) -> Result<Vec<BattingInnings>, IngestError> {
    read_batting(open(path.as_ref())?)
}

pub fn parse_bowling_csv(path: impl AsRef<Path>) -> Result<Vec<BowlingInnings>, IngestError> {
    read_bowling(open(path.as_ref())?)
}

/// Field accessor over one CSV record that reports failures with the
/// record's line number.
pub(crate) struct Fields<'a> {
    record: &'a csv::StringRecord,
    names: &'a [&'a str],
    pub(crate) line: u64,
}

impl<'a> Fields<'a> {
    fn raw(&self, idx: usize) -> &'a str {
        self.record.get(idx).unwrap_or("").trim()
    }

    pub(crate) fn string(&self, idx: usize) -> Result<String, IngestError> {
        let v = self.raw(idx);
        if v.is_empty() {
            return Err(self.bad(idx, "empty value"));
        }
        Ok(v.to_string())
    }

    pub(crate) fn parse<T: FromStr>(&self, idx: usize) -> Result<T, IngestError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(idx).parse::<T>().map_err(|e| self.bad(idx, &e.to_string()))
    }

    pub(crate) fn date(&self, idx: usize) -> Result<NaiveDate, IngestError> {
        NaiveDate::parse_from_str(self.raw(idx), "%Y-%m-%d")
            .map_err(|e| self.bad(idx, &format!("not an ISO-8601 date ({e})")))
    }

    pub(crate) fn flag(&self, idx: usize) -> Result<bool, IngestError> {
        match self.raw(idx) {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(self.bad(idx, &format!("expected 0 or 1, got `{other}`"))),
        }
    }

    pub(crate) fn bounded<T>(&self, idx: usize, lo: T, hi: T) -> Result<T, IngestError>
    where
        T: FromStr + PartialOrd + std::fmt::Display + Copy,
        T::Err: std::fmt::Display,
    {
        let v: T = self.parse(idx)?;
        if v < lo || v > hi {
            return Err(self.bad(idx, &format!("{v} outside {lo}..={hi}")));
        }
        Ok(v)
    }

    pub(crate) fn bad(&self, idx: usize, why: &str) -> IngestError {
        IngestError::MalformedRow {
            line: self.line,
            reason: format!("{}: {why}", self.names.get(idx).copied().unwrap_or("?")),
        }
    }
}

pub(crate) fn records<R: Read>(
    reader: R,
    header: &str,
    names: &[&str],
    mut each: impl FnMut(Fields<'_>) -> Result<(), IngestError>,
) -> Result<(), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let found = rdr.headers()?.iter().map(str::trim).collect::<Vec<_>>().join(",");
    if found != header {
        return Err(IngestError::SchemaMismatch { expected: header.to_string(), found });
    }
    let mut record = csv::StringRecord::new();
    loop {
        if !rdr.read_record(&mut record)? {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != names.len() {
            return Err(IngestError::MalformedRow {
                line,
                reason: format!("expected {} fields, found {}", names.len(), record.len()),
            });
        }
        each(Fields { record: &record, names, line })?;
    }
    Ok(())
}

/// Assigns per-date sequence numbers and checks that every player's rows
/// appear in date order.
struct Ordering {
    last: HashMap<String, (NaiveDate, u32)>,
}

impl Ordering {
    fn new() -> Self {
        Ordering { last: HashMap::new() }
    }

    fn admit(&mut self, player_id: &str, date: NaiveDate, line: u64) -> Result<u32, IngestError> {
        match self.last.get_mut(player_id) {
            Some((prev, seq)) => {
                if date < *prev {
                    return Err(IngestError::OrderViolation {
                        line,
                        player_id: player_id.to_string(),
                        date,
                        previous: *prev,
                    });
                }
                *seq = if date == *prev { *seq + 1 } else { 0 };
                *prev = date;
                Ok(*seq)
            }
            None => {
                self.last.insert(player_id.to_string(), (date, 0));
                Ok(0)
            }
        }
    }
}

pub fn read_batting<R: Read>(reader: R) -> Result<Vec<BattingInnings>, IngestError> {
    let names: Vec<&str> = BATTING_HEADER.split(',').collect();
    let mut out = Vec::new();
    let mut order = Ordering::new();
    records(reader, BATTING_HEADER, &names, |f| {
        let player_id = f.string(0)?;
        let match_date = f.date(2)?;
        let row = BattingInnings {
            player_name: f.string(1)?,
            opposition: f.string(3)?,
            ground: f.string(4)?,
            host_country: f.string(5)?,
            runs: f.parse(6)?,
            balls_faced: f.parse(7)?,
            dismissed: f.flag(8)?,
            position: f.bounded(9, 1u8, 11)?,
            innings_no: f.bounded(10, 1u8, 2)?,
            match_type: f.parse(11)?,
            match_time: f.parse(12)?,
            tournament: f.parse(13)?,
            toss_won: f.flag(14)?,
            venue_relation: f.parse(15)?,
            captain: f.flag(16)?,
            wicketkeeper: f.flag(17)?,
            batting_hand: f.parse(18)?,
            role: f.parse(19)?,
            seq: order.admit(&player_id, match_date, f.line)?,
            player_id,
            match_date,
        };
        out.push(row);
        Ok(())
    })?;
    Ok(out)
}

pub fn read_bowling<R: Read>(reader: R) -> Result<Vec<BowlingInnings>, IngestError> {
    let names: Vec<&str> = BOWLING_HEADER.split(',').collect();
    let mut out = Vec::new();
    let mut order = Ordering::new();
    records(reader, BOWLING_HEADER, &names, |f| {
        let player_id = f.string(0)?;
        let match_date = f.date(2)?;
        let row = BowlingInnings {
            player_name: f.string(1)?,
            opposition: f.string(3)?,
            ground: f.string(4)?,
            host_country: f.string(5)?,
            balls_bowled: f.parse(6)?,
            runs_conceded: f.parse(7)?,
            wickets: f.bounded(8, 0u8, 10)?,
            innings_no: f.bounded(9, 1u8, 2)?,
            match_type: f.parse(10)?,
            match_time: f.parse(11)?,
            tournament: f.parse(12)?,
            toss_won: f.flag(13)?,
            venue_relation: f.parse(14)?,
            bowling_hand: f.parse(15)?,
            seq: order.admit(&player_id, match_date, f.line)?,
            player_id,
            match_date,
        };
        out.push(row);
        Ok(())
    })?;
    Ok(out)
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_batting<W: Write>(writer: W, rows: &[BattingInnings]) -> Result<(), IngestError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(BATTING_HEADER.split(','))?;
    for r in rows {
        w.write_record([
            r.player_id.as_str(),
            &r.player_name,
            &r.match_date.to_string(),
            &r.opposition,
            &r.ground,
            &r.host_country,
            &r.runs.to_string(),
            &r.balls_faced.to_string(),
            flag(r.dismissed),
            &r.position.to_string(),
            &r.innings_no.to_string(),
            &r.match_type.to_string(),
            &r.match_time.to_string(),
            &r.tournament.to_string(),
            flag(r.toss_won),
            &r.venue_relation.to_string(),
            flag(r.captain),
            flag(r.wicketkeeper),
            &r.batting_hand.to_string(),
            &r.role.to_string(),
        ])?;
    }
    w.flush().map_err(|source| IngestError::Io { path: "<writer>".into(), source })?;
    Ok(())
}

pub fn write_bowling<W: Write>(writer: W, rows: &[BowlingInnings]) -> Result<(), IngestError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(BOWLING_HEADER.split(','))?;
    for r in rows {
        w.write_record([
            r.player_id.as_str(),
            &r.player_name,
            &r.match_date.to_string(),
            &r.opposition,
            &r.ground,
            &r.host_country,
            &r.balls_bowled.to_string(),
            &r.runs_conceded.to_string(),
            &r.wickets.to_string(),
            &r.innings_no.to_string(),
            &r.match_type.to_string(),
            &r.match_time.to_string(),
            &r.tournament.to_string(),
            flag(r.toss_won),
            &r.venue_relation.to_string(),
            &r.bowling_hand.to_string(),
        ])?;
    }
    w.flush().map_err(|source| IngestError::Io { path: "<writer>".into(), source })?;
    Ok(())
}
