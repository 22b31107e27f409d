use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::context::opposition_strength;
use super::derived::DerivedAttributes;
use super::labels::{encode_runs_label, encode_wickets_label, pressure};
use super::rating::DerivedKind;
use super::stats::{aggregate_batting, aggregate_bowling, rate_batting, rate_bowling, Window};
use super::weights::{Facet, WeightVectors};
use super::{FeaturizeError, Target};
use crate::dataset::{Dataset, DatasetError, Feature, Origin, Provenance, Sample, Schema};
use crate::ingest::{
    BattingInnings, BowlingInnings, Hand, MatchTime, MatchType, Role, Rosters, Token, Tournament, VenueRelation,
};

/// Innings logs grouped by player, each list ordered by (date, sequence).
#[derive(Debug, Clone, Default)]
pub struct Histories {
    batting: BTreeMap<String, Vec<BattingInnings>>,
    bowling: BTreeMap<String, Vec<BowlingInnings>>,
}

impl Histories {
    pub fn new(batting: Vec<BattingInnings>, bowling: Vec<BowlingInnings>) -> Self {
        let mut h = Histories::default();
        for inn in batting {
            h.batting.entry(inn.player_id.clone()).or_default().push(inn);
        }
        for inn in bowling {
            h.bowling.entry(inn.player_id.clone()).or_default().push(inn);
        }
        for list in h.batting.values_mut() {
            list.sort_by_key(|r| (r.match_date, r.seq));
        }
        for list in h.bowling.values_mut() {
            list.sort_by_key(|r| (r.match_date, r.seq));
        }
        h
    }

    pub fn batting(&self, player_id: &str) -> &[BattingInnings] {
        self.batting.get(player_id).map_or(&[], Vec::as_slice)
    }

    pub fn bowling(&self, player_id: &str) -> &[BowlingInnings] {
        self.bowling.get(player_id).map_or(&[], Vec::as_slice)
    }

    pub fn knows(&self, player_id: &str) -> bool {
        self.batting.contains_key(player_id) || self.bowling.contains_key(player_id)
    }

    pub fn player_name(&self, player_id: &str) -> Option<&str> {
        self.batting(player_id)
            .last()
            .map(|r| r.player_name.as_str())
            .or_else(|| self.bowling(player_id).last().map(|r| r.player_name.as_str()))
    }

    /// Every innings dated strictly before `date`.
    pub fn truncated(&self, date: NaiveDate) -> Histories {
        Histories::new(
            self.batting.values().flatten().filter(|r| r.match_date < date).cloned().collect(),
            self.bowling.values().flatten().filter(|r| r.match_date < date).cloned().collect(),
        )
    }

    pub fn innings_count(&self) -> usize {
        self.batting.values().map(Vec::len).sum::<usize>() + self.bowling.values().map(Vec::len).sum::<usize>()
    }
}

/// The four derived batting attributes as of `as_of`. Windows that need an
/// opposition or ground stay missing when none is given.
pub fn batting_derived(
    history: &[BattingInnings],
    as_of: NaiveDate,
    opposition: Option<&str>,
    ground: Option<&str>,
    weights: &WeightVectors,
) -> DerivedAttributes {
    derived(Facet::Batting, opposition, ground, weights, |window| {
        rate_batting(&aggregate_batting(history, as_of, window), window.kind())
    })
}

pub fn bowling_derived(
    history: &[BowlingInnings],
    as_of: NaiveDate,
    opposition: Option<&str>,
    ground: Option<&str>,
    weights: &WeightVectors,
) -> DerivedAttributes {
    derived(Facet::Bowling, opposition, ground, weights, |window| {
        rate_bowling(&aggregate_bowling(history, as_of, window), window.kind())
    })
}

fn derived(
    facet: Facet,
    opposition: Option<&str>,
    ground: Option<&str>,
    weights: &WeightVectors,
    rated: impl Fn(&Window) -> super::RatedStats,
) -> DerivedAttributes {
    let mut out = DerivedAttributes::default();
    let windows = [
        Some(Window::Career),
        Some(Window::Form12m),
        opposition.map(|o| Window::VsOpposition(o.to_string())),
        ground.map(|g| Window::AtVenue(g.to_string())),
    ];
    for (kind, window) in DerivedKind::ALL.into_iter().zip(windows) {
        if let Some(window) = window {
            out.set(kind, weights.get(facet, kind).apply(&rated(&window)));
        }
    }
    out
}

/// The match a row describes, seen from the player's side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchContext {
    pub match_date: NaiveDate,
    pub opposition: String,
    pub ground: String,
    pub host_country: String,
    pub match_type: MatchType,
    pub match_time: MatchTime,
    pub tournament: Tournament,
    pub toss_won: bool,
    pub venue_relation: VenueRelation,
    pub innings_no: u8,
    /// Batting position; only batting rows use it.
    pub position: Option<u8>,
}

/// Player attributes that enter the feature row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerProfile {
    pub player_id: String,
    pub player_name: String,
    pub team: Option<String>,
    pub role: Option<Role>,
    pub batting_hand: Option<Hand>,
    pub bowling_hand: Option<Hand>,
    pub captain: bool,
    pub wicketkeeper: bool,
}

const DERIVED_NAMES: [&str; 4] = ["consistency", "form", "opposition", "venue"];

fn flag_tokens() -> Vec<String> {
    vec!["0".into(), "1".into()]
}

fn tokens<T: Token>() -> Vec<String> {
    T::all_tokens()
}

/// Batting schema: four derived attributes and sixteen context attributes.
/// Opposition, host and ground tokens are the open sets seen in the data.
pub fn batting_schema(oppositions: Vec<String>, hosts: Vec<String>, grounds: Vec<String>) -> Schema {
    let mut f: Vec<Feature> = DERIVED_NAMES.iter().map(|n| Feature::numeric(n)).collect();
    f.extend([
        Feature::categorical("batting_hand", tokens::<Hand>()),
        Feature::numeric("batting_position"),
        Feature::categorical("match_type", tokens::<MatchType>()),
        Feature::categorical("match_time", tokens::<MatchTime>()),
        Feature::numeric("opposition_strength"),
        Feature::categorical("venue_relation", tokens::<VenueRelation>()),
        Feature::categorical("opposition_team", oppositions),
        Feature::categorical("role", tokens::<Role>()),
        Feature::categorical("captain", flag_tokens()),
        Feature::categorical("wicketkeeper", flag_tokens()),
        Feature::categorical("innings_no", vec!["1".into(), "2".into()]),
        Feature::categorical("tournament", tokens::<Tournament>()),
        Feature::categorical("toss_won", flag_tokens()),
        Feature::numeric("pressure"),
        Feature::categorical("host", hosts),
        Feature::categorical("ground", grounds),
    ]);
    Schema::new(f, Target::Runs.n_classes()).expect("fixed feature names are unique")
}

/// Bowling schema: four derived attributes and six context attributes.
pub fn bowling_schema(oppositions: Vec<String>) -> Schema {
    let mut f: Vec<Feature> = DERIVED_NAMES.iter().map(|n| Feature::numeric(n)).collect();
    f.extend([
        Feature::categorical("bowling_hand", tokens::<Hand>()),
        Feature::categorical("match_type", tokens::<MatchType>()),
        Feature::categorical("match_time", tokens::<MatchTime>()),
        Feature::numeric("opposition_strength"),
        Feature::categorical("venue_relation", tokens::<VenueRelation>()),
        Feature::categorical("opposition_team", oppositions),
    ]);
    Schema::new(f, Target::Wickets.n_classes()).expect("fixed feature names are unique")
}

struct RowInputs<'a> {
    derived: &'a DerivedAttributes,
    ctx: &'a MatchContext,
    profile: &'a PlayerProfile,
    strength: Option<f64>,
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn num(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// Encodes a row against `schema` by feature name, so that training and
/// inference share one code path.
fn encode(schema: &Schema, r: &RowInputs<'_>) -> Result<Vec<f64>, FeaturizeError> {
    let ctx = r.ctx;
    let cat = |i: usize, tok: Option<&str>| schema.encode_token(i, tok.unwrap_or(""));
    schema
        .features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            Ok(match f.name.as_str() {
                "consistency" => num(r.derived.consistency),
                "form" => num(r.derived.form),
                "opposition" => num(r.derived.opposition),
                "venue" => num(r.derived.venue),
                "batting_hand" => cat(i, r.profile.batting_hand.map(Hand::token)),
                "bowling_hand" => cat(i, r.profile.bowling_hand.map(Hand::token)),
                "batting_position" => num(ctx.position.map(f64::from)),
                "match_type" => cat(i, Some(ctx.match_type.token())),
                "match_time" => cat(i, Some(ctx.match_time.token())),
                "opposition_strength" => num(r.strength),
                "venue_relation" => cat(i, Some(ctx.venue_relation.token())),
                "opposition_team" => cat(i, Some(&ctx.opposition)),
                "role" => cat(i, r.profile.role.map(Role::token)),
                "captain" => cat(i, Some(flag(r.profile.captain))),
                "wicketkeeper" => cat(i, Some(flag(r.profile.wicketkeeper))),
                "innings_no" => cat(i, Some(&ctx.innings_no.to_string())),
                "tournament" => cat(i, Some(ctx.tournament.token())),
                "toss_won" => cat(i, Some(flag(ctx.toss_won))),
                "pressure" => {
                    let own = r.profile.team.as_deref().unwrap_or("");
                    f64::from(pressure(ctx.match_type, own, &ctx.opposition))
                }
                "host" => cat(i, Some(&ctx.host_country)),
                "ground" => cat(i, Some(&ctx.ground)),
                other => return Err(DatasetError::Schema(format!("no encoder for feature `{other}`")).into()),
            })
        })
        .collect()
}

type StrengthKey = (String, NaiveDate);

fn strengths(
    keys: BTreeSet<StrengthKey>,
    histories: &Histories,
    rosters: &Rosters,
    facet: Facet,
    weights: &WeightVectors,
) -> Result<HashMap<StrengthKey, Option<f64>>, FeaturizeError> {
    keys.into_par_iter()
        .map(|(team, date)| {
            let v = match rosters.for_team(&team, date) {
                Some(roster) => opposition_strength(roster, histories, date, facet, weights)?,
                None => None,
            };
            Ok(((team, date), v))
        })
        .collect()
}

/// One sample per innings of the target's facet, ordered by
/// (match date, player id, same-day sequence).
///
/// Every feature of a row depends only on innings dated strictly before
/// the row's match date. Missing values stay NaN for [`super::impute`].
pub fn build_dataset(
    histories: &Histories,
    rosters: &Rosters,
    target: Target,
    weights: &WeightVectors,
) -> Result<Dataset, FeaturizeError> {
    let mut oppositions: BTreeSet<String> = rosters.teams().map(str::to_string).collect();
    let mut hosts = BTreeSet::new();
    let mut grounds = BTreeSet::new();
    let mut keys = BTreeSet::new();
    let mut visit = |opp: &str, host: &str, ground: &str, date: NaiveDate| {
        oppositions.insert(opp.to_string());
        hosts.insert(host.to_string());
        grounds.insert(ground.to_string());
        keys.insert((opp.to_string(), date));
    };
    match target {
        Target::Runs => histories
            .batting
            .values()
            .flatten()
            .for_each(|r| visit(&r.opposition, &r.host_country, &r.ground, r.match_date)),
        Target::Wickets => histories
            .bowling
            .values()
            .flatten()
            .for_each(|r| visit(&r.opposition, &r.host_country, &r.ground, r.match_date)),
    }
    let schema = match target {
        Target::Runs => batting_schema(
            oppositions.into_iter().collect(),
            hosts.into_iter().collect(),
            grounds.into_iter().collect(),
        ),
        Target::Wickets => bowling_schema(oppositions.into_iter().collect()),
    };
    // A batsman is measured against the opposing bowlers and vice versa.
    let strength_facet = match target {
        Target::Runs => Facet::Bowling,
        Target::Wickets => Facet::Batting,
    };
    let strength = strengths(keys, histories, rosters, strength_facet, weights)?;

    let players: Vec<&String> = match target {
        Target::Runs => histories.batting.keys().collect(),
        Target::Wickets => histories.bowling.keys().collect(),
    };
    let per_player: Vec<Vec<(u32, Sample)>> = players
        .par_iter()
        .map(|id| match target {
            Target::Runs => histories
                .batting(id)
                .iter()
                .map(|inn| {
                    let derived = batting_derived(
                        histories.batting(id),
                        inn.match_date,
                        Some(&inn.opposition),
                        Some(&inn.ground),
                        weights,
                    );
                    let ctx = batting_context(inn);
                    let profile = PlayerProfile {
                        player_id: inn.player_id.clone(),
                        player_name: inn.player_name.clone(),
                        team: rosters.team_of(id, inn.match_date).map(|(t, _)| t.to_string()),
                        role: Some(inn.role),
                        batting_hand: Some(inn.batting_hand),
                        bowling_hand: None,
                        captain: inn.captain,
                        wicketkeeper: inn.wicketkeeper,
                    };
                    let s = strength[&(inn.opposition.clone(), inn.match_date)];
                    let values =
                        encode(&schema, &RowInputs { derived: &derived, ctx: &ctx, profile: &profile, strength: s })?;
                    Ok((inn.seq, sample(values, encode_runs_label(inn.runs), id, inn.match_date)))
                })
                .collect::<Result<Vec<_>, FeaturizeError>>(),
            Target::Wickets => histories
                .bowling(id)
                .iter()
                .map(|inn| {
                    let derived = bowling_derived(
                        histories.bowling(id),
                        inn.match_date,
                        Some(&inn.opposition),
                        Some(&inn.ground),
                        weights,
                    );
                    let ctx = bowling_context(inn);
                    let profile = PlayerProfile {
                        player_id: inn.player_id.clone(),
                        player_name: inn.player_name.clone(),
                        team: rosters.team_of(id, inn.match_date).map(|(t, _)| t.to_string()),
                        role: None,
                        batting_hand: None,
                        bowling_hand: Some(inn.bowling_hand),
                        captain: false,
                        wicketkeeper: false,
                    };
                    let s = strength[&(inn.opposition.clone(), inn.match_date)];
                    let values =
                        encode(&schema, &RowInputs { derived: &derived, ctx: &ctx, profile: &profile, strength: s })?;
                    Ok((inn.seq, sample(values, encode_wickets_label(u32::from(inn.wickets)), id, inn.match_date)))
                })
                .collect::<Result<Vec<_>, FeaturizeError>>(),
        })
        .collect::<Result<_, _>>()?;

    let mut rows: Vec<(u32, Sample)> = per_player.into_iter().flatten().collect();
    rows.sort_by(|(sa, a), (sb, b)| {
        (a.provenance.match_date, &a.provenance.player_id, sa).cmp(&(
            b.provenance.match_date,
            &b.provenance.player_id,
            sb,
        ))
    });
    Ok(Dataset::new(schema, rows.into_iter().map(|(_, s)| s).collect()))
}

fn sample(values: Vec<f64>, label: u8, player_id: &str, date: NaiveDate) -> Sample {
    Sample {
        values,
        label,
        provenance: Provenance { player_id: player_id.to_string(), match_date: date },
        origin: Origin::Original,
    }
}

fn batting_context(inn: &BattingInnings) -> MatchContext {
    MatchContext {
        match_date: inn.match_date,
        opposition: inn.opposition.clone(),
        ground: inn.ground.clone(),
        host_country: inn.host_country.clone(),
        match_type: inn.match_type,
        match_time: inn.match_time,
        tournament: inn.tournament,
        toss_won: inn.toss_won,
        venue_relation: inn.venue_relation,
        innings_no: inn.innings_no,
        position: Some(inn.position),
    }
}

fn bowling_context(inn: &BowlingInnings) -> MatchContext {
    MatchContext {
        match_date: inn.match_date,
        opposition: inn.opposition.clone(),
        ground: inn.ground.clone(),
        host_country: inn.host_country.clone(),
        match_type: inn.match_type,
        match_time: inn.match_time,
        tournament: inn.tournament,
        toss_won: inn.toss_won,
        venue_relation: inn.venue_relation,
        innings_no: inn.innings_no,
        position: None,
    }
}

/// An unlabelled feature row for a player in a future match.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InferenceRow {
    pub profile: PlayerProfile,
    /// Encoded against the model schema; NaN where a value is missing.
    pub values: Vec<f64>,
    pub derived: DerivedAttributes,
    pub opposition_strength: Option<f64>,
    /// The player has no prior innings on the target's facet.
    pub cold_start: bool,
}

/// Builds the feature row for `player_id` under `ctx`, from innings
/// strictly before the match date. Roster entries (as of the match date)
/// supply role, hands and flags; without one, the player's latest innings
/// do. When `ctx.position` is absent the latest batting position is used.
pub fn inference_row(
    histories: &Histories,
    rosters: &Rosters,
    schema: &Schema,
    target: Target,
    player_id: &str,
    ctx: &MatchContext,
    weights: &WeightVectors,
) -> Result<InferenceRow, FeaturizeError> {
    let date = ctx.match_date;
    let bat = histories.batting(player_id);
    let bowl = histories.bowling(player_id);
    let last_bat = bat.iter().rev().find(|r| r.match_date < date).or(bat.last());
    let last_bowl = bowl.iter().rev().find(|r| r.match_date < date).or(bowl.last());
    let profile = match rosters.team_of(player_id, date) {
        Some((team, e)) => PlayerProfile {
            player_id: player_id.to_string(),
            player_name: e.player_name.clone(),
            team: Some(team.to_string()),
            role: Some(e.role),
            batting_hand: Some(e.batting_hand),
            bowling_hand: Some(e.bowling_hand),
            captain: e.captain,
            wicketkeeper: e.wicketkeeper,
        },
        None if histories.knows(player_id) => PlayerProfile {
            player_id: player_id.to_string(),
            player_name: histories.player_name(player_id).unwrap_or(player_id).to_string(),
            team: None,
            role: last_bat.map(|r| r.role),
            batting_hand: last_bat.map(|r| r.batting_hand),
            bowling_hand: last_bowl.map(|r| r.bowling_hand),
            captain: last_bat.is_some_and(|r| r.captain),
            wicketkeeper: last_bat.is_some_and(|r| r.wicketkeeper),
        },
        None => return Err(FeaturizeError::UnknownPlayer(player_id.to_string())),
    };
    let (derived, strength_facet) = match target {
        Target::Runs => (batting_derived(bat, date, Some(&ctx.opposition), Some(&ctx.ground), weights), Facet::Bowling),
        Target::Wickets => {
            (bowling_derived(bowl, date, Some(&ctx.opposition), Some(&ctx.ground), weights), Facet::Batting)
        }
    };
    let strength = match rosters.for_team(&ctx.opposition, date) {
        Some(roster) => opposition_strength(roster, histories, date, strength_facet, weights)?,
        None => None,
    };
    let mut ctx = ctx.clone();
    if ctx.position.is_none() {
        ctx.position = bat.iter().rev().find(|r| r.match_date < date).map(|r| r.position);
    }
    let values = encode(schema, &RowInputs { derived: &derived, ctx: &ctx, profile: &profile, strength })?;
    Ok(InferenceRow {
        profile,
        values,
        derived,
        opposition_strength: strength,
        cold_start: derived.consistency.is_none(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{generate_fixture, FixtureProfile};

    fn fixture() -> (Histories, Rosters) {
        let f = generate_fixture(3, 44, 40, FixtureProfile::Realistic).unwrap();
        (Histories::new(f.batting, f.bowling), Rosters::new(f.rosters))
    }

    #[test]
    fn batting_rows_have_twenty_features() {
        let (h, r) = fixture();
        let d = build_dataset(&h, &r, Target::Runs, &WeightVectors::paper_default()).unwrap();
        assert_eq!(d.schema.len(), 20);
        assert_eq!(d.n_classes(), 5);
        assert_eq!(d.len(), h.batting.values().map(Vec::len).sum::<usize>());
        assert!(d.samples.windows(2).all(|w| {
            (w[0].provenance.match_date, &w[0].provenance.player_id)
                <= (w[1].provenance.match_date, &w[1].provenance.player_id)
        }));
    }

    #[test]
    fn bowling_rows_have_ten_features() {
        let (h, r) = fixture();
        let d = build_dataset(&h, &r, Target::Wickets, &WeightVectors::paper_default()).unwrap();
        assert_eq!(d.schema.len(), 10);
        assert_eq!(d.n_classes(), 3);
        assert!(d.samples.iter().all(|s| (1..=3).contains(&s.label)));
    }

    #[test]
    fn first_match_has_no_derived_values() {
        let (h, r) = fixture();
        let d = build_dataset(&h, &r, Target::Runs, &WeightVectors::paper_default()).unwrap();
        let first = &d.samples[0];
        assert!(first.values[..4].iter().all(|v| v.is_nan()));
        assert!(first.values[4..].iter().enumerate().all(|(i, v)| !v.is_nan() || i + 4 == 8));
    }

    #[test]
    fn unknown_player_is_an_error() {
        let (h, r) = fixture();
        let d = build_dataset(&h, &r, Target::Runs, &WeightVectors::paper_default()).unwrap();
        let ctx = batting_context(&h.batting("P0001")[0]);
        let err = inference_row(&h, &r, &d.schema, Target::Runs, "nobody", &ctx, &WeightVectors::paper_default());
        assert!(matches!(err, Err(FeaturizeError::UnknownPlayer(_))));
    }

    #[test]
    fn inference_row_matches_training_row() {
        let (h, r) = fixture();
        let w = WeightVectors::paper_default();
        let d = build_dataset(&h, &r, Target::Runs, &w).unwrap();
        let inn = h.batting("P0003")[5].clone();
        let row = d
            .samples
            .iter()
            .find(|s| s.provenance.player_id == "P0003" && s.provenance.match_date == inn.match_date)
            .unwrap();
        let got = inference_row(&h, &r, &d.schema, Target::Runs, "P0003", &batting_context(&inn), &w).unwrap();
        for (a, b) in got.values.iter().zip(&row.values) {
            assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        }
        assert!(!got.cold_start);
    }
}
