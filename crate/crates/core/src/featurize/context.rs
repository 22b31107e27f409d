use chrono::NaiveDate;

use super::build::{batting_derived, bowling_derived, Histories};
use super::weights::{Facet, WeightVectors};
use super::FeaturizeError;
use crate::ingest::Roster;

/// Mean career Consistency, as of `as_of`, of the roster's players on
/// `facet`: its batsmen (everyone but specialist bowlers) for
/// [`Facet::Batting`], its bowlers and allrounders for [`Facet::Bowling`].
///
/// Players without history contribute the mean of the others, which leaves
/// the mean unchanged. `Ok(None)` means nobody has history; the caller
/// treats it as a missing value.
pub fn opposition_strength(
    roster: &Roster,
    histories: &Histories,
    as_of: NaiveDate,
    facet: Facet,
    weights: &WeightVectors,
) -> Result<Option<f64>, FeaturizeError> {
    let members: Vec<&str> = roster
        .players
        .iter()
        .filter(|p| match facet {
            Facet::Batting => p.role.bats(),
            Facet::Bowling => p.role.bowls(),
        })
        .map(|p| p.player_id.as_str())
        .collect();
    if members.is_empty() {
        return Err(FeaturizeError::EmptyRoster { team: roster.team.clone(), facet: facet.name() });
    }
    let defined: Vec<f64> = members
        .iter()
        .filter_map(|id| match facet {
            Facet::Batting => batting_derived(histories.batting(id), as_of, None, None, weights).consistency,
            Facet::Bowling => bowling_derived(histories.bowling(id), as_of, None, None, weights).consistency,
        })
        .collect();
    if defined.is_empty() {
        return Ok(None);
    }
    Ok(Some(defined.iter().sum::<f64>() / defined.len() as f64))
}
