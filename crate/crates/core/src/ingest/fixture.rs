//! Synthetic innings logs with known structure, for tests and demos.
//!
//! * `Separable`: every player is either a "star" (always 100+ runs at a
//!   strike rate of 120) or a "tail" (1-19 runs at a strike rate of 40).
//!   The two groups' rated statistics never overlap, so each derived
//!   attribute has a threshold (Consistency between 2.39 and 3.24) that
//!   separates run class 5 from class 1.
//! * `Nonlinear`: a batsman scores 50-74 runs exactly when one of
//!   "won the toss" and "day-night match" holds, 0-24 otherwise. Both
//!   inputs are fair coins, so neither carries information on its own.
//!   Bowlers take 2-3 wickets under the same rule, 0-1 otherwise.
//! * `Realistic`: skewed run and wicket distributions modulated by player
//!   skill, form, home advantage and opposition/ground affinities; run
//!   class 1 dominates.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};

use super::{
    write_batting, write_bowling, write_rosters, BattingInnings, BowlingInnings, Hand, IngestError, MatchTime,
    MatchType, Role, Roster, RosterEntry, Token, Tournament, VenueRelation,
};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureProfile {
    Separable,
    Nonlinear,
    Realistic,
}

impl std::str::FromStr for FixtureProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "separable" => Ok(FixtureProfile::Separable),
            "nonlinear" => Ok(FixtureProfile::Nonlinear),
            "realistic" => Ok(FixtureProfile::Realistic),
            _ => Err(format!("unknown fixture profile `{s}` (separable|nonlinear|realistic)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub batting: Vec<BattingInnings>,
    pub bowling: Vec<BowlingInnings>,
    pub rosters: Vec<Roster>,
}

impl Fixture {
    /// Writes `batting.csv`, `bowling.csv` and `rosters.csv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), IngestError> {
        let io_err = |path: &Path| {
            let path = path.display().to_string();
            move |source| IngestError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let create = |name: &str| {
            let p = dir.join(name);
            File::create(&p).map(BufWriter::new).map_err(io_err(&p))
        };
        write_batting(create("batting.csv")?, &self.batting)?;
        write_bowling(create("bowling.csv")?, &self.bowling)?;
        write_rosters(create("rosters.csv")?, &self.rosters)?;
        Ok(())
    }

    pub fn innings_count(&self) -> usize {
        self.batting.len() + self.bowling.len()
    }
}

const NATIONS: [(&str, [&str; 3]); 10] = [
    ("India", ["Eden Gardens", "Wankhede Stadium", "Chinnaswamy Stadium"]),
    ("Pakistan", ["Gaddafi Stadium", "National Stadium", "Rawalpindi Stadium"]),
    ("Australia", ["MCG", "SCG", "Adelaide Oval"]),
    ("England", ["Lord's", "The Oval", "Edgbaston"]),
    ("Sri Lanka", ["R Premadasa Stadium", "Pallekele", "Galle"]),
    ("New Zealand", ["Eden Park", "Basin Reserve", "Hagley Oval"]),
    ("South Africa", ["Wanderers", "Newlands", "Kingsmead"]),
    ("West Indies", ["Kensington Oval", "Queen's Park Oval", "Sabina Park"]),
    ("Bangladesh", ["Shere Bangla", "Chittagong", "Fatullah"]),
    ("Zimbabwe", ["Harare Sports Club", "Queens Sports Club", "Bulawayo Athletic"]),
];

/// Roles by squad slot; slots 6..=10 bowl.
const SLOT_ROLES: [Role; 11] = [
    Role::OBT,
    Role::OBT,
    Role::TOB,
    Role::TOB,
    Role::MOB,
    Role::MOB,
    Role::BattingAllrounder,
    Role::Allrounder,
    Role::BowlingAllrounder,
    Role::Bowler,
    Role::Bowler,
];

struct Player {
    id: String,
    name: String,
    team: usize,
    slot: usize,
    role: Role,
    batting_hand: Hand,
    bowling_hand: Hand,
    captain: bool,
    wicketkeeper: bool,
    bat_mean: f64,
    strike_rate: f64,
    dismissal_p: f64,
    wicket_rate: f64,
    economy: f64,
    opposition_affinity: Vec<f64>,
    ground_affinity: Vec<f64>,
    form: f64,
}

impl Player {
    fn bowls(&self) -> bool {
        self.slot % 11 >= 6
    }

    fn star(&self) -> bool {
        self.slot % 11 < 5
    }
}

struct MatchInfo {
    teams: [usize; 2],
    host: usize,
    ground: usize,
    match_type: MatchType,
    match_time: MatchTime,
    tournament: Tournament,
    toss_winner: usize,
    bats_first: usize,
}

fn lognormal(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    Normal::new(0.0, sigma).expect("finite sigma").sample(rng).exp()
}

fn make_players(rng: &mut ChaCha8Rng, n_players: usize, n_teams: usize) -> Vec<Player> {
    let n_grounds = NATIONS.len() * 3;
    (0..n_players)
        .map(|i| {
            let team = i % n_teams;
            let slot = i / n_teams;
            let role = SLOT_ROLES[slot % 11];
            let base_mean = match slot % 11 {
                0..=3 => 30.0,
                4..=5 => 24.0,
                6..=7 => 18.0,
                8 => 12.0,
                _ => 7.0,
            };
            Player {
                id: format!("P{:04}", i + 1),
                name: format!("{} {:02}", NATIONS[team].0, slot + 1),
                team,
                slot,
                role,
                batting_hand: if rng.gen_bool(0.3) { Hand::Left } else { Hand::Right },
                bowling_hand: if rng.gen_bool(0.25) { Hand::Left } else { Hand::Right },
                captain: slot == 2,
                wicketkeeper: slot == 5,
                bat_mean: base_mean * lognormal(rng, 0.3),
                strike_rate: (if slot % 11 < 8 { 78.0 } else { 58.0 } + 12.0 * lognormal(rng, 0.5) - 12.0)
                    .clamp(35.0, 140.0),
                dismissal_p: if slot % 11 < 8 { 0.88 } else { 0.7 },
                wicket_rate: 1.1 * lognormal(rng, 0.35),
                economy: (5.0 * lognormal(rng, 0.12)).clamp(3.5, 7.5),
                opposition_affinity: (0..NATIONS.len()).map(|_| lognormal(rng, 0.25)).collect(),
                ground_affinity: (0..n_grounds).map(|_| lognormal(rng, 0.25)).collect(),
                form: 0.0,
            }
        })
        .collect()
}

fn make_match(rng: &mut ChaCha8Rng, n_teams: usize) -> MatchInfo {
    let a = rng.gen_range(0..n_teams);
    let mut b = rng.gen_range(0..n_teams - 1);
    if b >= a {
        b += 1;
    }
    let roll: f64 = rng.gen();
    let host = if roll < 0.45 {
        a
    } else if roll < 0.9 {
        b
    } else {
        let mut h = rng.gen_range(0..NATIONS.len() - 2);
        for t in [a.min(b), a.max(b)] {
            if h >= t {
                h += 1;
            }
        }
        h
    };
    let roll: f64 = rng.gen();
    let match_type = match roll {
        r if r < 0.82 => MatchType::Normal,
        r if r < 0.88 => MatchType::QuarterFinal,
        r if r < 0.94 => MatchType::SemiFinal,
        _ => MatchType::Final,
    };
    MatchInfo {
        teams: [a, b],
        host,
        ground: host * 3 + rng.gen_range(0..3),
        match_type,
        match_time: *MatchTime::ALL.choose(rng).expect("non-empty"),
        tournament: *Tournament::ALL.choose(rng).expect("non-empty"),
        toss_winner: if rng.gen_bool(0.5) { a } else { b },
        bats_first: if rng.gen_bool(0.5) { a } else { b },
    }
}

fn relation(m: &MatchInfo, team: usize) -> VenueRelation {
    if m.host == team {
        VenueRelation::Home
    } else if m.teams.contains(&m.host) {
        VenueRelation::Away
    } else {
        VenueRelation::Neutral
    }
}

/// Realistic-profile run/wicket multiplier from context and affinities.
fn context_multiplier(p: &Player, m: &MatchInfo, opp: usize) -> f64 {
    let venue = match relation(m, p.team) {
        VenueRelation::Home => 1.15,
        VenueRelation::Away => 0.9,
        VenueRelation::Neutral => 1.0,
    };
    let stage = match m.match_type {
        MatchType::Normal => 1.0,
        _ => 0.9,
    };
    venue * stage * p.opposition_affinity[opp] * p.ground_affinity[m.ground] * p.form.exp()
}

/// Generates a deterministic fixture. Needs at least 22 players (two full
/// XIs) and 10 matches.
pub fn generate_fixture(
    seed: u64,
    n_players: usize,
    n_matches: usize,
    profile: FixtureProfile,
) -> Result<Fixture, IngestError> {
    if n_players < 22 || n_matches < 10 {
        return Err(IngestError::InvalidRoster(format!(
            "fixture needs >= 22 players and >= 10 matches, got {n_players} and {n_matches}"
        )));
    }
    let n_teams = (n_players / 11).min(NATIONS.len());
    let mut setup = seeded(seed, 0);
    let mut players = make_players(&mut setup, n_players, n_teams);
    let start = NaiveDate::from_ymd_opt(2005, 1, 1).expect("valid date");

    let rosters = (0..n_teams)
        .map(|t| {
            let entries = players
                .iter()
                .filter(|p| p.team == t)
                .map(|p| RosterEntry {
                    player_id: p.id.clone(),
                    player_name: p.name.clone(),
                    role: p.role,
                    batting_hand: p.batting_hand,
                    bowling_hand: p.bowling_hand,
                    captain: p.captain,
                    wicketkeeper: p.wicketkeeper,
                })
                .collect();
            Roster::new(NATIONS[t].0.to_string(), start, entries)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rng = seeded(seed, 1);
    let mut batting = Vec::new();
    let mut bowling = Vec::new();
    let mut date = start;
    let form_step = Normal::new(0.0, 0.08).expect("finite");

    for _ in 0..n_matches {
        date = date + Days::new(rng.gen_range(3..=9));
        let m = make_match(&mut rng, n_teams);
        for side in 0..2 {
            let team = m.teams[side];
            let opp = m.teams[1 - side];
            let mut squad: Vec<usize> = (0..players.len()).filter(|&i| players[i].team == team).collect();
            if squad.len() > 11 {
                squad.shuffle(&mut rng);
                squad.truncate(11);
                squad.sort_unstable();
            }
            let innings_no = if m.bats_first == team { 1 } else { 2 };
            let toss_won = m.toss_winner == team;
            let xor = toss_won != (m.match_time == MatchTime::DayNight);
            let ground = NATIONS[m.ground / 3].1[m.ground % 3].to_string();
            let host_country = NATIONS[m.host].0.to_string();
            let opposition = NATIONS[opp].0.to_string();
            for (pos, &pi) in squad.iter().enumerate() {
                let p = &mut players[pi];
                p.form = 0.9 * p.form + form_step.sample(&mut rng);
                let (runs, balls, dismissed) = match profile {
                    FixtureProfile::Separable => {
                        if p.star() {
                            let runs = rng.gen_range(100..=140u32);
                            (runs, (runs as f64 / 1.2).round() as u32, true)
                        } else {
                            let runs = rng.gen_range(1..=19u32);
                            (runs, (runs as f64 * 2.5).ceil() as u32, true)
                        }
                    }
                    FixtureProfile::Nonlinear => {
                        let runs = if xor { rng.gen_range(50..=74u32) } else { rng.gen_range(0..=24u32) };
                        let sr = rng.gen_range(60.0..100.0);
                        (runs, ((runs as f64) * 100.0 / sr).round().max(1.0) as u32, rng.gen_bool(0.85))
                    }
                    FixtureProfile::Realistic => {
                        let mean = p.bat_mean * context_multiplier(p, &m, opp);
                        let runs = Exp::new(1.0 / mean).expect("positive").sample(&mut rng).floor().min(220.0) as u32;
                        let sr = p.strike_rate * rng.gen_range(0.8..1.2);
                        let balls = if runs == 0 {
                            rng.gen_range(1..=8)
                        } else {
                            ((runs as f64) * 100.0 / sr).round().max(1.0) as u32
                        };
                        (runs, balls, rng.gen_bool(p.dismissal_p))
                    }
                };
                batting.push(BattingInnings {
                    player_id: p.id.clone(),
                    player_name: p.name.clone(),
                    match_date: date,
                    seq: 0,
                    opposition: opposition.clone(),
                    ground: ground.clone(),
                    host_country: host_country.clone(),
                    runs,
                    balls_faced: balls,
                    dismissed,
                    position: (pos + 1) as u8,
                    innings_no,
                    match_type: m.match_type,
                    match_time: m.match_time,
                    tournament: m.tournament,
                    toss_won,
                    venue_relation: relation(&m, team),
                    captain: p.captain,
                    wicketkeeper: p.wicketkeeper,
                    batting_hand: p.batting_hand,
                    role: p.role,
                });
            }
            for &pi in squad.iter().filter(|&&i| players[i].bowls()) {
                let p = &players[pi];
                let (balls, runs_conceded, wickets) = match profile {
                    FixtureProfile::Separable => {
                        if p.slot % 11 <= 7 {
                            (60, 30, 5)
                        } else {
                            (60, 50, 1)
                        }
                    }
                    FixtureProfile::Nonlinear => {
                        let wickets = if xor { rng.gen_range(2..=3u8) } else { rng.gen_range(0..=1u8) };
                        (60, rng.gen_range(30..=60u32), wickets)
                    }
                    FixtureProfile::Realistic => {
                        let balls = rng.gen_range(6..=10u32) * 6 - rng.gen_range(0..=1u32) * rng.gen_range(1..=5u32);
                        let lambda = p.wicket_rate * context_multiplier(p, &m, opp) * balls as f64 / 60.0;
                        let wickets =
                            Poisson::new(lambda.max(1e-6)).expect("positive").sample(&mut rng).min(10.0) as u8;
                        let runs = (balls as f64 / 6.0 * p.economy * rng.gen_range(0.7..1.3)).round() as u32;
                        (balls, runs, wickets)
                    }
                };
                // Bowlers bowl in the innings the opposition bats.
                let bowl_innings = if m.bats_first == team { 2 } else { 1 };
                bowling.push(BowlingInnings {
                    player_id: p.id.clone(),
                    player_name: p.name.clone(),
                    match_date: date,
                    seq: 0,
                    opposition: opposition.clone(),
                    ground: ground.clone(),
                    host_country: host_country.clone(),
                    balls_bowled: balls,
                    runs_conceded,
                    wickets,
                    innings_no: bowl_innings,
                    match_type: m.match_type,
                    match_time: m.match_time,
                    tournament: m.tournament,
                    toss_won,
                    venue_relation: relation(&m, team),
                    bowling_hand: p.bowling_hand,
                });
            }
        }
    }
    Ok(Fixture { batting, bowling, rosters })
}
