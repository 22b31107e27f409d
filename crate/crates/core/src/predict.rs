//! Per-player predictions for a future match, shared by the CLI and the
//! HTTP service.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::featurize::{
    aggregate_batting, aggregate_bowling, band_label, inference_row, FeaturizeError, Histories, MatchContext, Target,
    TraditionalBattingStats, TraditionalBowlingStats, WeightVectors, Window,
};
use crate::ingest::{Hand, MatchTime, MatchType, Role, Rosters, Tournament, VenueRelation};
use crate::learners::{LearnerError, LearnerKind, TrainedModel};

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("no {0} model is loaded")]
    ModelNotLoaded(Target),
    #[error("unknown player `{0}`")]
    UnknownPlayer(String),
    #[error("unknown team `{0}`")]
    UnknownTeam(String),
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error(transparent)]
    Featurize(FeaturizeError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
}

impl From<FeaturizeError> for PredictError {
    fn from(e: FeaturizeError) -> Self {
        match e {
            FeaturizeError::UnknownPlayer(p) => PredictError::UnknownPlayer(p),
            other => PredictError::Featurize(other),
        }
    }
}

/// The match a prediction is for, from the player's side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchContextInput {
    pub opposition: String,
    pub ground: String,
    pub host: String,
    pub date: NaiveDate,
    pub match_type: MatchType,
    pub match_time: MatchTime,
    pub tournament: Tournament,
    pub toss_won: bool,
    pub venue_relation: VenueRelation,
    pub innings_no: u8,
    /// Batting position; the latest one on record when absent.
    #[serde(default)]
    pub position: Option<u8>,
}

impl MatchContextInput {
    pub fn validate(&self) -> Result<(), PredictError> {
        if self.opposition.trim().is_empty() || self.ground.trim().is_empty() || self.host.trim().is_empty() {
            return Err(PredictError::Invalid("opposition, ground and host must be non-empty".to_string()));
        }
        if !(1..=2).contains(&self.innings_no) {
            return Err(PredictError::Invalid(format!("innings_no must be 1 or 2, got {}", self.innings_no)));
        }
        if let Some(p) = self.position {
            if !(1..=11).contains(&p) {
                return Err(PredictError::Invalid(format!("position must lie in 1..=11, got {p}")));
            }
        }
        Ok(())
    }

    fn to_context(&self) -> MatchContext {
        MatchContext {
            match_date: self.date,
            opposition: self.opposition.clone(),
            ground: self.ground.clone(),
            host_country: self.host.clone(),
            match_type: self.match_type,
            match_time: self.match_time,
            tournament: self.tournament,
            toss_won: self.toss_won,
            venue_relation: self.venue_relation,
            innings_no: self.innings_no,
            position: self.position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRequest {
    pub player_id: String,
    pub target: Target,
    pub context: MatchContextInput,
}

/// Derived attribute values as fed to the model, after imputation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedValues {
    pub consistency: f64,
    pub form: f64,
    pub opposition: f64,
    pub venue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionResponse {
    pub player_id: String,
    pub player_name: String,
    pub target: Target,
    pub learner: LearnerKind,
    /// 1-based class.
    pub predicted_class: u8,
    pub band: String,
    pub probabilities: Vec<f64>,
    pub derived: DerivedValues,
    /// Features that were missing and filled with training means.
    pub imputed: Vec<String>,
    /// No prior innings on the target's facet.
    pub cold_start: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquadPlayer {
    pub player_id: String,
    pub player_name: String,
    pub role: Role,
    pub batting_hand: Hand,
    pub bowling_hand: Hand,
    pub captain: bool,
    pub wicketkeeper: bool,
    pub batting: TraditionalBattingStats,
    pub bowling: TraditionalBowlingStats,
}

/// Histories, rosters, weights and up to one model per target. Models are
/// attached before serving; prediction only borrows.
#[derive(Debug, Clone)]
pub struct Predictor {
    histories: Histories,
    rosters: Rosters,
    weights: WeightVectors,
    runs: Option<TrainedModel>,
    wickets: Option<TrainedModel>,
}

impl Predictor {
    pub fn new(histories: Histories, rosters: Rosters, weights: WeightVectors) -> Self {
        Predictor { histories, rosters, weights, runs: None, wickets: None }
    }

    /// Adds a model, which must record its target.
    pub fn with_model(mut self, model: TrainedModel) -> Result<Self, PredictError> {
        self.add_model(model)?;
        Ok(self)
    }

    /// Adds a model, replacing any earlier one for the same target.
    pub fn add_model(&mut self, model: TrainedModel) -> Result<(), PredictError> {
        let target =
            model.target.ok_or_else(|| PredictError::Invalid("model does not record its target".to_string()))?;
        if model.n_classes() != target.n_classes() {
            return Err(PredictError::Invalid(format!(
                "{target} model has {} classes, expected {}",
                model.n_classes(),
                target.n_classes()
            )));
        }
        match target {
            Target::Runs => self.runs = Some(model),
            Target::Wickets => self.wickets = Some(model),
        }
        Ok(())
    }

    pub fn model(&self, target: Target) -> Option<&TrainedModel> {
        match target {
            Target::Runs => self.runs.as_ref(),
            Target::Wickets => self.wickets.as_ref(),
        }
    }

    pub fn histories(&self) -> &Histories {
        &self.histories
    }

    pub fn teams(&self) -> Vec<String> {
        self.rosters.teams().map(str::to_string).collect()
    }

    pub fn has_rosters(&self) -> bool {
        !self.rosters.is_empty()
    }

    /// The team's latest roster, sorted by role then name, with career
    /// statistics over every recorded innings.
    pub fn squad(&self, team: &str) -> Result<Vec<SquadPlayer>, PredictError> {
        let roster =
            self.rosters.for_team(team, NaiveDate::MAX).ok_or_else(|| PredictError::UnknownTeam(team.to_string()))?;
        let mut out: Vec<SquadPlayer> = roster
            .players
            .iter()
            .map(|e| SquadPlayer {
                player_id: e.player_id.clone(),
                player_name: e.player_name.clone(),
                role: e.role,
                batting_hand: e.batting_hand,
                bowling_hand: e.bowling_hand,
                captain: e.captain,
                wicketkeeper: e.wicketkeeper,
                batting: aggregate_batting(self.histories.batting(&e.player_id), NaiveDate::MAX, &Window::Career),
                bowling: aggregate_bowling(self.histories.bowling(&e.player_id), NaiveDate::MAX, &Window::Career),
            })
            .collect();
        out.sort_by(|a, b| (a.role, &a.player_name, &a.player_id).cmp(&(b.role, &b.player_name, &b.player_id)));
        Ok(out)
    }

    pub fn predict(&self, request: &PredictionRequest) -> Result<PredictionResponse, PredictError> {
        request.context.validate()?;
        let model = self.model(request.target).ok_or(PredictError::ModelNotLoaded(request.target))?;
        let row = inference_row(
            &self.histories,
            &self.rosters,
            &model.schema,
            request.target,
            &request.player_id,
            &request.context.to_context(),
            &self.weights,
        )?;
        let mut values = row.values;
        let mut imputed = Vec::new();
        for (j, v) in values.iter_mut().enumerate() {
            if v.is_nan() {
                *v = model.impute.as_ref().and_then(|s| s.global_means[j]).unwrap_or(0.0);
                imputed.push(model.schema.features[j].name.clone());
            }
        }
        let derived_value = |name: &str| model.schema.index_of(name).map_or(f64::NAN, |j| values[j]);
        let derived = DerivedValues {
            consistency: derived_value("consistency"),
            form: derived_value("form"),
            opposition: derived_value("opposition"),
            venue: derived_value("venue"),
        };
        let prediction = model.predict(&values)?;
        Ok(PredictionResponse {
            player_id: request.player_id.clone(),
            player_name: row.profile.player_name,
            target: request.target,
            learner: model.kind(),
            predicted_class: prediction.class,
            band: band_label(request.target, prediction.class).to_string(),
            probabilities: prediction.probabilities,
            derived,
            imputed,
            cold_start: row.cold_start,
        })
    }
}
