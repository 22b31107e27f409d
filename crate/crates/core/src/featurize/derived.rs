use serde::{Deserialize, Serialize};

use super::rating::{DerivedKind, RatedStats};
use super::weights::{Facet, WeightVectors};

/// The four derived attributes; `None` marks a missing value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DerivedAttributes {
    pub consistency: Option<f64>,
    pub form: Option<f64>,
    pub opposition: Option<f64>,
    pub venue: Option<f64>,
}

impl DerivedAttributes {
    pub fn get(&self, kind: DerivedKind) -> Option<f64> {
        match kind {
            DerivedKind::Consistency => self.consistency,
            DerivedKind::Form => self.form,
            DerivedKind::Opposition => self.opposition,
            DerivedKind::Venue => self.venue,
        }
    }

    pub fn set(&mut self, kind: DerivedKind, value: Option<f64>) {
        match kind {
            DerivedKind::Consistency => self.consistency = value,
            DerivedKind::Form => self.form = value,
            DerivedKind::Opposition => self.opposition = value,
            DerivedKind::Venue => self.venue = value,
        }
    }
}

pub fn derived_batting(rated: &RatedStats, kind: DerivedKind, weights: &WeightVectors) -> Option<f64> {
    weights.get(Facet::Batting, kind).apply(rated)
}

pub fn derived_bowling(rated: &RatedStats, kind: DerivedKind, weights: &WeightVectors) -> Option<f64> {
    weights.get(Facet::Bowling, kind).apply(rated)
}
