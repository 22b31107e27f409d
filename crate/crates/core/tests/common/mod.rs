#![allow(dead_code)]

use chrono::NaiveDate;
use crickpred::dataset::{Dataset, Feature, Origin, Provenance, Sample, Schema};
use crickpred::featurize::{build_dataset, Histories, Target, WeightVectors};
use crickpred::ingest::{generate_fixture, Fixture, FixtureProfile, Rosters};

/// A dataset from raw rows, one day and a rotating player per row.
pub fn dataset(features: Vec<Feature>, n_classes: usize, rows: Vec<(Vec<f64>, u8)>) -> Dataset {
    let schema = Schema::new(features, n_classes).unwrap();
    let base = NaiveDate::from_ymd_opt(2010, 1, 1).unwrap();
    let samples = rows
        .into_iter()
        .enumerate()
        .map(|(i, (values, label))| Sample {
            values,
            label,
            provenance: Provenance { player_id: format!("p{}", i % 7), match_date: base + chrono::Days::new(i as u64) },
            origin: Origin::Original,
        })
        .collect();
    Dataset::new(schema, samples)
}

pub fn histories(f: &Fixture) -> (Histories, Rosters) {
    (Histories::new(f.batting.clone(), f.bowling.clone()), Rosters::new(f.rosters.clone()))
}

pub fn fixture_dataset(profile: FixtureProfile, seed: u64, players: usize, matches: usize, target: Target) -> Dataset {
    let f = generate_fixture(seed, players, matches, profile).unwrap();
    let (h, r) = histories(&f);
    build_dataset(&h, &r, target, &WeightVectors::paper_default()).unwrap()
}

/// Bitwise equality, so NaN equals NaN.
pub fn same_values(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// A fixture with one model per target, trained quickly.
pub fn trained_predictor(seed: u64) -> (Fixture, crickpred::predict::Predictor) {
    use crickpred::evaluate::{run_cell, SplitSpec, SplitStrategy};
    use crickpred::featurize::StatisticsSource;
    use crickpred::learners::{LearnerKind, LearnerSpec};

    let f = generate_fixture(seed, 22, 30, FixtureProfile::Realistic).unwrap();
    let (h, r) = histories(&f);
    let w = WeightVectors::paper_default();
    let mut p = crickpred::predict::Predictor::new(h.clone(), r.clone(), w.clone());
    for (target, kind) in [(Target::Runs, LearnerKind::Tree), (Target::Wickets, LearnerKind::NaiveBayes)] {
        let d = build_dataset(&h, &r, target, &w).unwrap();
        let spec = SplitSpec { train_fraction: 0.8, strategy: SplitStrategy::StratifiedRandom { seed } };
        let (_, model) =
            run_cell(&d, &LearnerSpec::default_for(kind, seed), &spec, None, StatisticsSource::Global, Some(target))
                .unwrap();
        p.add_model(model).unwrap();
    }
    (f, p)
}
