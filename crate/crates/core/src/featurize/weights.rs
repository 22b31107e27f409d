use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::rating::{Attribute, DerivedKind, RatedStats};
use super::FeaturizeError;

const DEFAULT_CONFIG: &str = include_str!("../../config/weights.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Facet {
    Batting,
    Bowling,
}

impl Facet {
    pub fn name(self) -> &'static str {
        match self {
            Facet::Batting => "batting",
            Facet::Bowling => "bowling",
        }
    }

    /// Config key and attribute for each term, in formula order.
    fn terms(self, kind: DerivedKind) -> &'static [(&'static str, Attribute)] {
        match (self, kind) {
            (Facet::Batting, DerivedKind::Venue) => &[
                ("average", Attribute::BattingAverage),
                ("innings", Attribute::Innings),
                ("strike_rate", Attribute::BattingStrikeRate),
                ("centuries", Attribute::Centuries),
                ("fifties", Attribute::Fifties),
                ("highest_score", Attribute::HighestScore),
            ],
            (Facet::Batting, _) => &[
                ("average", Attribute::BattingAverage),
                ("innings", Attribute::Innings),
                ("strike_rate", Attribute::BattingStrikeRate),
                ("centuries", Attribute::Centuries),
                ("fifties", Attribute::Fifties),
                ("zeros", Attribute::Zeros),
            ],
            (Facet::Bowling, _) => &[
                ("overs", Attribute::Overs),
                ("innings", Attribute::Innings),
                ("strike_rate", Attribute::BowlingStrikeRate),
                ("average", Attribute::BowlingAverage),
                ("five_wicket_hauls", Attribute::FiveWicketHauls),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTerm {
    pub name: String,
    pub attribute: Attribute,
    /// Magnitude; the direction lives in `sign`.
    pub weight: f64,
    pub sign: Sign,
}

impl WeightTerm {
    pub fn signed(&self) -> f64 {
        match self.sign {
            Sign::Plus => self.weight,
            Sign::Minus => -self.weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub facet: Facet,
    pub kind: DerivedKind,
    pub terms: Vec<WeightTerm>,
}

impl WeightVector {
    pub fn label(&self) -> String {
        format!("{}.{}", self.facet.name(), self.kind.name())
    }

    /// Signed weighted sum of the ratings; `None` if any input is missing.
    pub fn apply(&self, rated: &RatedStats) -> Option<f64> {
        self.terms.iter().try_fold(0.0, |acc, t| rated.get(t.attribute).map(|r| acc + t.signed() * f64::from(r.get())))
    }
}

/// The eight weight vectors, one per facet and derived attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVectors {
    vectors: Vec<WeightVector>,
}

impl WeightVectors {
    /// The bundled constants.
    pub fn paper_default() -> Self {
        Self::from_toml_str(DEFAULT_CONFIG).expect("bundled weight config is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FeaturizeError> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| FeaturizeError::Weights(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, FeaturizeError> {
        type Raw = BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>>;
        let raw: Raw = toml::from_str(text).map_err(|e| FeaturizeError::Weights(e.to_string()))?;
        let mut vectors = Vec::with_capacity(8);
        for facet in [Facet::Batting, Facet::Bowling] {
            for kind in DerivedKind::ALL {
                let label = format!("{}.{}", facet.name(), kind.name());
                let table = raw
                    .get(facet.name())
                    .and_then(|f| f.get(kind.name()))
                    .ok_or_else(|| FeaturizeError::Weights(format!("missing table [{label}]")))?;
                let expected = facet.terms(kind);
                let found: Vec<&str> = table.keys().map(String::as_str).collect();
                let mut wanted: Vec<&str> = expected.iter().map(|(k, _)| *k).collect();
                wanted.sort_unstable();
                if found != wanted {
                    return Err(FeaturizeError::Weights(format!(
                        "[{label}] must name exactly {wanted:?}, found {found:?}"
                    )));
                }
                let terms = expected
                    .iter()
                    .map(|&(name, attribute)| {
                        let w = table[name];
                        if !w.is_finite() {
                            return Err(FeaturizeError::Weights(format!("[{label}] {name} is not finite")));
                        }
                        Ok(WeightTerm {
                            name: name.to_string(),
                            attribute,
                            weight: w.abs(),
                            sign: if w < 0.0 { Sign::Minus } else { Sign::Plus },
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                vectors.push(WeightVector { facet, kind, terms });
            }
        }
        Ok(WeightVectors { vectors })
    }

    pub fn get(&self, facet: Facet, kind: DerivedKind) -> &WeightVector {
        self.vectors
            .iter()
            .find(|v| v.facet == facet && v.kind == kind)
            .expect("all eight vectors are present after loading")
    }

    pub fn iter(&self) -> impl Iterator<Item = &WeightVector> {
        self.vectors.iter()
    }
}

impl Default for WeightVectors {
    fn default() -> Self {
        Self::paper_default()
    }
}
