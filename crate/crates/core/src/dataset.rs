//! Model-ready tabular data.
//!
//! Every sample stores its feature values as `f64`: numeric features
//! directly (NaN marks a missing value) and categorical features as the
//! index of their token in the schema. An index equal to the token count
//! stands for a token the schema has never seen.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("schema: {0}")]
    Schema(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    Numeric,
    Categorical { tokens: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub kind: FeatureKind,
}

impl Feature {
    pub fn numeric(name: &str) -> Self {
        Feature { name: name.to_string(), kind: FeatureKind::Numeric }
    }

    pub fn categorical(name: &str, tokens: Vec<String>) -> Self {
        Feature { name: name.to_string(), kind: FeatureKind::Categorical { tokens } }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, FeatureKind::Numeric)
    }

    pub fn tokens(&self) -> &[String] {
        match &self.kind {
            FeatureKind::Numeric => &[],
            FeatureKind::Categorical { tokens } => tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub features: Vec<Feature>,
    pub n_classes: usize,
}

impl Schema {
    pub fn new(features: Vec<Feature>, n_classes: usize) -> Result<Self, DatasetError> {
        if n_classes < 2 {
            return Err(DatasetError::Schema(format!("need at least 2 classes, got {n_classes}")));
        }
        let mut seen = std::collections::HashSet::new();
        for f in &features {
            if !seen.insert(f.name.as_str()) {
                return Err(DatasetError::Schema(format!("duplicate feature `{}`", f.name)));
            }
        }
        Ok(Schema { features, n_classes })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// Index of `token` for categorical feature `feature`; unseen tokens map
    /// to the token count.
    pub fn encode_token(&self, feature: usize, token: &str) -> f64 {
        let tokens = self.features[feature].tokens();
        tokens.iter().position(|t| t == token).unwrap_or(tokens.len()) as f64
    }

    pub fn decode_token(&self, feature: usize, value: f64) -> Option<&str> {
        self.features[feature].tokens().get(value as usize).map(String::as_str)
    }

    /// Stable digest of names, kinds, tokens and class count.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.header_line().as_bytes());
        let digest = h.finalize();
        digest.iter().take(16).map(|b| format!("{b:02x}")).collect()
    }

    fn header_line(&self) -> String {
        let feats: Vec<String> = self
            .features
            .iter()
            .map(|f| match &f.kind {
                FeatureKind::Numeric => format!("{}:numeric", f.name),
                FeatureKind::Categorical { tokens } => format!("{}:categorical[{}]", f.name, tokens.join("|")),
            })
            .collect();
        format!("# crickpred-dataset v1; classes={}; features={}", self.n_classes, feats.join(","))
    }

    fn parse_header_line(line: &str) -> Result<Self, DatasetError> {
        let bad = |reason: &str| DatasetError::Malformed { line: 1, reason: reason.to_string() };
        let rest = line.strip_prefix("# crickpred-dataset v1; classes=").ok_or_else(|| bad("missing schema line"))?;
        let (classes, feats) = rest.split_once("; features=").ok_or_else(|| bad("missing feature list"))?;
        let n_classes: usize = classes.parse().map_err(|_| bad("bad class count"))?;
        let mut features = Vec::new();
        // Token lists may not contain ',' so splitting on it is safe.
        for spec in feats.split(',').filter(|s| !s.is_empty()) {
            let (name, kind) = spec.split_once(':').ok_or_else(|| bad("feature without kind"))?;
            let kind = if kind == "numeric" {
                FeatureKind::Numeric
            } else if let Some(tokens) = kind.strip_prefix("categorical[").and_then(|k| k.strip_suffix(']')) {
                let tokens = if tokens.is_empty() { vec![] } else { tokens.split('|').map(str::to_string).collect() };
                FeatureKind::Categorical { tokens }
            } else {
                return Err(bad(&format!("unknown kind `{kind}`")));
            };
            features.push(Feature { name: name.to_string(), kind });
        }
        Schema::new(features, n_classes)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub player_id: String,
    pub match_date: NaiveDate,
}

/// Where a sample came from. Synthetic samples record the two original
/// samples (indices into the dataset they were generated from) and the
/// interpolation factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Origin {
    Original,
    Synthetic { source: usize, neighbor: usize, gap: f64 },
}

impl Origin {
    pub fn is_synthetic(&self) -> bool {
        matches!(self, Origin::Synthetic { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub values: Vec<f64>,
    /// 1-based class.
    pub label: u8,
    pub provenance: Provenance,
    pub origin: Origin,
}

impl Sample {
    pub fn class_index(&self) -> usize {
        usize::from(self.label) - 1
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(|v| v.is_nan())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema: Schema,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(schema: Schema, samples: Vec<Sample>) -> Self {
        Dataset { schema, samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.schema.n_classes
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.schema.n_classes];
        for s in &self.samples {
            counts[s.class_index()] += 1;
        }
        counts
    }

    pub fn missing_count(&self) -> usize {
        self.samples.iter().map(|s| s.values.iter().filter(|v| v.is_nan()).count()).sum()
    }

    /// A dataset with the same schema holding the given samples.
    pub fn with_samples(&self, samples: Vec<Sample>) -> Dataset {
        Dataset { schema: self.schema.clone(), samples }
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        self.with_samples(indices.iter().map(|&i| self.samples[i].clone()).collect())
    }

    /// Writes the schema line, a column header and one line per sample.
    /// Floats use the shortest representation that parses back exactly.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), DatasetError> {
        writeln!(w, "{}", self.schema.header_line())?;
        let names: Vec<&str> = self.schema.features.iter().map(|f| f.name.as_str()).collect();
        writeln!(w, "player_id,match_date,synthetic,{},label", names.join(","))?;
        for s in &self.samples {
            let mut line =
                format!("{},{},{}", s.provenance.player_id, s.provenance.match_date, u8::from(s.origin.is_synthetic()));
            for (i, v) in s.values.iter().enumerate() {
                line.push(',');
                if v.is_nan() {
                    continue;
                }
                match &self.schema.features[i].kind {
                    FeatureKind::Numeric => line.push_str(&v.to_string()),
                    FeatureKind::Categorical { tokens } => {
                        line.push_str(tokens.get(*v as usize).map_or("?", String::as_str))
                    }
                }
            }
            line.push_str(&format!(",{}\n", s.label));
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    /// Reads what [`Dataset::write_csv`] produces. Synthetic provenance
    /// (source/neighbor/gap) is not part of the file; such rows come back as
    /// `Synthetic` with zeroed references.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Dataset, DatasetError> {
        let mut lines = r.lines();
        let first = lines.next().ok_or(DatasetError::Malformed { line: 1, reason: "empty file".into() })??;
        let schema = Schema::parse_header_line(&first)?;
        let header = lines.next().ok_or(DatasetError::Malformed { line: 2, reason: "missing header".into() })??;
        let expected = 4 + schema.len();
        if header.split(',').count() != expected {
            return Err(DatasetError::Malformed { line: 2, reason: "header does not match schema".into() });
        }
        let token_maps: Vec<BTreeMap<&str, usize>> = schema
            .features
            .iter()
            .map(|f| f.tokens().iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect())
            .collect();
        let mut samples = Vec::new();
        for (n, line) in lines.enumerate() {
            let line_no = n + 3;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let bad = |reason: String| DatasetError::Malformed { line: line_no, reason };
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != expected {
                return Err(bad(format!("expected {expected} fields, found {}", cells.len())));
            }
            let match_date: NaiveDate = cells[1].parse().map_err(|_| bad(format!("bad date `{}`", cells[1])))?;
            let origin = match cells[2] {
                "0" => Origin::Original,
                "1" => Origin::Synthetic { source: 0, neighbor: 0, gap: 0.0 },
                other => return Err(bad(format!("bad synthetic flag `{other}`"))),
            };
            let mut values = Vec::with_capacity(schema.len());
            for (i, cell) in cells[3..3 + schema.len()].iter().enumerate() {
                if cell.is_empty() {
                    values.push(f64::NAN);
                    continue;
                }
                let v = match schema.features[i].kind {
                    FeatureKind::Numeric => cell.parse::<f64>().map_err(|_| bad(format!("bad number `{cell}`")))?,
                    FeatureKind::Categorical { .. } => {
                        *token_maps[i].get(cell).ok_or_else(|| bad(format!("unknown token `{cell}`")))? as f64
                    }
                };
                values.push(v);
            }
            let label: u8 = cells[expected - 1].parse().map_err(|_| bad("bad label".into()))?;
            if label == 0 || usize::from(label) > schema.n_classes {
                return Err(bad(format!("label {label} outside 1..={}", schema.n_classes)));
            }
            samples.push(Sample {
                values,
                label,
                provenance: Provenance { player_id: cells[0].to_string(), match_date },
                origin,
            });
        }
        Ok(Dataset { schema, samples })
    }
}


#[cfg(test)]
mod tests {
    use super::testutil::dataset;
    use super::*;

    fn sample() -> Dataset {
        dataset(
            vec![Feature::numeric("x"), Feature::categorical("hand", vec!["Left".into(), "Right".into()])],
            3,
            vec![(vec![0.1, 0.0], 1), (vec![f64::NAN, 1.0], 3), (vec![1.0 / 3.0, 1.0], 2)],
        )
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let d = sample();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.schema, d.schema);
        for (a, b) in back.samples.iter().zip(&d.samples) {
            assert_eq!(a.label, b.label);
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
            }
        }
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# crickpred-dataset v1; classes=3; features=x:numeric,hand:categorical[Left|Right]"));
    }

    #[test]
    fn rejects_bad_rows() {
        let d = sample();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replace(",Right,", ",Middle,");
        assert!(matches!(Dataset::read_csv(text.as_bytes()), Err(DatasetError::Malformed { .. })));
    }

    #[test]
    fn schema_rules() {
        assert!(Schema::new(vec![Feature::numeric("a")], 1).is_err());
        assert!(Schema::new(vec![Feature::numeric("a"), Feature::numeric("a")], 2).is_err());
        let s = sample().schema;
        assert_eq!(s.encode_token(1, "Right"), 1.0);
        assert_eq!(s.encode_token(1, "Both"), 2.0);
        assert_eq!(s.fingerprint(), sample().schema.fingerprint());
        let mut other = s.clone();
        other.n_classes = 4;
        assert_ne!(other.fingerprint(), s.fingerprint());
    }
}
