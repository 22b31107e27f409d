use crate::ingest::MatchType;

/// Run class: 0-24 -> 1, 25-49 -> 2, 50-74 -> 3, 75-99 -> 4, 100+ -> 5.
pub fn encode_runs_label(runs: u32) -> u8 {
    match runs {
        0..=24 => 1,
        25..=49 => 2,
        50..=74 => 3,
        75..=99 => 4,
        _ => 5,
    }
}

/// Wicket class: 0-1 -> 1, 2-3 -> 2, 4+ -> 3.
pub fn encode_wickets_label(wickets: u32) -> u8 {
    match wickets {
        0..=1 => 1,
        2..=3 => 2,
        _ => 3,
    }
}

/// Human-readable range for a class, e.g. "50-74" or "100+".
pub fn band_label(target: super::Target, class: u8) -> &'static str {
    match (target, class) {
        (super::Target::Runs, 1) => "0-24",
        (super::Target::Runs, 2) => "25-49",
        (super::Target::Runs, 3) => "50-74",
        (super::Target::Runs, 4) => "75-99",
        (super::Target::Runs, _) => "100+",
        (super::Target::Wickets, 1) => "0-1",
        (super::Target::Wickets, 2) => "2-3",
        (super::Target::Wickets, _) => "4+",
    }
}

const RIVALRIES: [(&str, &str); 2] = [("India", "Pakistan"), ("Australia", "England")];

/// Match pressure, 1 to 6: the stage's base value plus one for the two
/// designated rivalries.
pub fn pressure(match_type: MatchType, team_a: &str, team_b: &str) -> u8 {
    let base = match match_type {
        MatchType::Normal => 1,
        MatchType::QuarterFinal => 3,
        MatchType::SemiFinal => 4,
        MatchType::Final => 5,
    };
    let rivalry = RIVALRIES.iter().any(|&(x, y)| (team_a == x && team_b == y) || (team_a == y && team_b == x));
    base + u8::from(rivalry)
}
