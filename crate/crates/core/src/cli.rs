//! Command-line interface. Exit codes: 0 success, 1 usage error, 2 data
//! error, 3 internal error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::http::HeaderValue;
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::ahp::{format_audit, validate_paper_weights, weights_from_matrix, PairwiseMatrix};
use crate::dataset::{Dataset, DatasetError};
use crate::evaluate::{
    format_csv, format_text, format_timings, split_label, EvalError, ExperimentConfig, SplitStrategy,
};
use crate::featurize::{
    build_dataset, FeaturizeError, Histories, ImputeStats, StatisticsSource, Target, WeightVectors,
};
use crate::ingest::{
    generate_fixture, parse_batting_csv, parse_bowling_csv, parse_rosters_csv, FixtureProfile, IngestError, MatchTime,
    MatchType, Rosters, Tournament, VenueRelation,
};
use crate::learners::{LearnerError, LearnerKind, LearnerSpec, TrainedModel};
use crate::predict::{MatchContextInput, PredictError, PredictionRequest, Predictor};
use crate::resample::{balance_all, SmoteConfig, SmoteError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

macro_rules! data_error {
    ($($t:ty),+) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        })+
    };
}

data_error!(IngestError, DatasetError, FeaturizeError, SmoteError);

impl From<LearnerError> for CliError {
    fn from(e: LearnerError) -> Self {
        match e {
            LearnerError::Io { .. } | LearnerError::Version { .. } | LearnerError::Deserialize(_) => {
                CliError::Data(e.to_string())
            }
            LearnerError::SchemaMismatch(_) | LearnerError::MissingValues { .. } | LearnerError::EmptyDataset => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Learner(l) => l.into(),
            EvalError::ShapeMismatch(_) => CliError::Internal(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<PredictError> for CliError {
    fn from(e: PredictError) -> Self {
        match e {
            PredictError::Learner(l) => l.into(),
            PredictError::Invalid(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "crickpred", version, about = "Cricket player performance prediction")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic innings fixture (batting.csv, bowling.csv, rosters.csv).
    Fixture(FixtureArgs),
    /// Featurize innings logs into a dataset CSV.
    Build(BuildArgs),
    /// Run the learner x split evaluation grid.
    Experiment(ExperimentArgs),
    /// Train one model on a whole dataset.
    Train(TrainArgs),
    /// Predict a player's class for a match.
    Predict(PredictArgs),
    /// Priority weights and consistency ratio of a pairwise comparison matrix.
    Ahp(AhpArgs),
    /// Run the HTTP prediction service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrainImpute {
    /// Class means of the training fold.
    Class,
    /// Global means of the training fold.
    Global,
}

impl From<TrainImpute> for StatisticsSource {
    fn from(t: TrainImpute) -> Self {
        match t {
            TrainImpute::Class => StatisticsSource::TrainingFold,
            TrainImpute::Global => StatisticsSource::Global,
        }
    }
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    #[arg(long, default_value = "realistic")]
    pub profile: FixtureProfile,
    #[arg(long, default_value_t = 44)]
    pub players: usize,
    #[arg(long, default_value_t = 150)]
    pub matches: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct WeightsArg {
    /// Weight-vector TOML; the built-in constants when absent.
    #[arg(long = "weights", env = "CRICKPRED_CONFIG")]
    pub path: Option<PathBuf>,
}

impl WeightsArg {
    fn load(&self) -> Result<WeightVectors, CliError> {
        match &self.path {
            Some(p) => Ok(WeightVectors::load(p)?),
            None => Ok(WeightVectors::paper_default()),
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArg {
    /// Directory holding batting.csv, bowling.csv and optionally rosters.csv.
    #[arg(long)]
    pub input: PathBuf,
}

impl InputArg {
    fn load(&self) -> Result<(Histories, Rosters), CliError> {
        if !self.input.is_dir() {
            return Err(CliError::Data(format!("{}: not a directory", self.input.display())));
        }
        let batting = parse_batting_csv(self.input.join("batting.csv"))?;
        let bowling = parse_bowling_csv(self.input.join("bowling.csv"))?;
        let roster_path = self.input.join("rosters.csv");
        let rosters = if roster_path.exists() { parse_rosters_csv(roster_path)? } else { Rosters::default() };
        Ok((Histories::new(batting, bowling), rosters))
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub input: InputArg,
    #[arg(long, default_value = "runs")]
    pub target: Target,
    /// Output dataset CSV.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub weights: WeightsArg,
}

#[derive(Debug, Args)]
pub struct SmoteArgs {
    #[arg(long, default_value_t = 5)]
    pub smote_k: usize,
    /// Defaults to --seed.
    #[arg(long)]
    pub smote_seed: Option<u64>,
    #[arg(long)]
    pub no_smote: bool,
}

impl SmoteArgs {
    fn config(&self, seed: u64) -> Result<Option<SmoteConfig>, CliError> {
        if self.no_smote {
            return Ok(None);
        }
        if self.smote_k == 0 {
            return Err(CliError::Usage("--smote-k must be at least 1".to_string()));
        }
        Ok(Some(SmoteConfig { k: self.smote_k, seed: self.smote_seed.unwrap_or(seed) }))
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Defaults to the class count: 5 classes are runs, 3 are wickets.
    #[arg(long)]
    pub target: Option<Target>,
    #[arg(long, value_delimiter = ',', default_value = "nb,tree,rf,svm")]
    pub learners: Vec<LearnerKind>,
    #[arg(long, value_delimiter = ',', default_value = "0.6,0.7,0.8,0.9")]
    pub splits: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub smote: SmoteArgs,
    /// Split by match date instead of stratified at random.
    #[arg(long)]
    pub chronological: bool,
    #[arg(long, value_enum, default_value = "class")]
    pub train_impute: TrainImpute,
    /// Directory for report.txt, report.csv, report.json and timings.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Which report to print.
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Also write every trained model into the output directory.
    #[arg(long)]
    pub save_models: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub target: Option<Target>,
    #[arg(long, default_value = "rf")]
    pub learner: LearnerKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub smote: SmoteArgs,
    #[arg(long, value_enum, default_value = "class")]
    pub train_impute: TrainImpute,
    /// Output model JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ContextArgs {
    #[arg(long)]
    pub opposition: String,
    #[arg(long)]
    pub ground: String,
    #[arg(long)]
    pub host: String,
    #[arg(long)]
    pub date: NaiveDate,
    #[arg(long, default_value = "Normal")]
    pub match_type: MatchType,
    #[arg(long, default_value = "Day")]
    pub match_time: MatchTime,
    #[arg(long, default_value = "TT")]
    pub tournament: Tournament,
    #[arg(long)]
    pub toss_won: bool,
    #[arg(long, default_value = "Home")]
    pub venue_relation: VenueRelation,
    #[arg(long, default_value_t = 1)]
    pub innings_no: u8,
    #[arg(long)]
    pub position: Option<u8>,
}

impl ContextArgs {
    fn to_input(&self) -> MatchContextInput {
        MatchContextInput {
            opposition: self.opposition.clone(),
            ground: self.ground.clone(),
            host: self.host.clone(),
            date: self.date,
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

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub input: InputArg,
    #[arg(long)]
    pub player: String,
    #[command(flatten)]
    pub context: ContextArgs,
    #[command(flatten)]
    pub weights: WeightsArg,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct AhpArgs {
    /// Text file with n lines of n entries; "1/3" style fractions allowed.
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub input: InputArg,
    #[arg(long)]
    pub runs_model: Option<PathBuf>,
    #[arg(long)]
    pub wickets_model: Option<PathBuf>,
    #[arg(long, default_value_t = crate::serve::DEFAULT_PORT)]
    pub port: u16,
    /// Allowed cross-origin caller; any origin when absent.
    #[arg(long)]
    pub cors_origin: Option<String>,
    #[command(flatten)]
    pub weights: WeightsArg,
}

/// Parses arguments, runs the subcommand and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".to_string()));
        }
        // Fails only if a pool already exists, as when called repeatedly in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match cli.command {
        Command::Fixture(a) => cmd_fixture(&a, out),
        Command::Build(a) => cmd_build(&a, out),
        Command::Experiment(a) => cmd_experiment(&a, out),
        Command::Train(a) => cmd_train(&a, out),
        Command::Predict(a) => cmd_predict(&a, out),
        Command::Ahp(a) => cmd_ahp(&a, out),
        Command::Serve(a) => cmd_serve(&a),
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Internal(format!("stdout: {e}")))
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))
}

pub fn cmd_fixture(a: &FixtureArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let fixture =
        generate_fixture(a.seed, a.players, a.matches, a.profile).map_err(|e| CliError::Usage(e.to_string()))?;
    fixture.write_dir(&a.out)?;
    write_out(
        out,
        &format!(
            "wrote {} batting and {} bowling innings, {} rosters to {}\n",
            fixture.batting.len(),
            fixture.bowling.len(),
            fixture.rosters.len(),
            a.out.display()
        ),
    )
}

pub fn cmd_build(a: &BuildArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let weights = a.weights.load()?;
    let (histories, rosters) = a.input.load()?;
    let dataset = build_dataset(&histories, &rosters, a.target, &weights)?;
    let file = File::create(&a.out).map_err(io_error(&a.out))?;
    dataset.write_csv(BufWriter::new(file))?;
    let mut text = format!(
        "{} rows, {} features, {} missing values -> {}\nclass counts:",
        dataset.len(),
        dataset.schema.len(),
        dataset.missing_count(),
        a.out.display()
    );
    for (c, n) in dataset.class_counts().iter().enumerate() {
        text.push_str(&format!(" {}={n}", c + 1));
    }
    text.push_str("\n\n");
    text.push_str(&format_audit(&validate_paper_weights(&weights)));
    write_out(out, &text)
}

fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    let file = File::open(path).map_err(io_error(path))?;
    Ok(Dataset::read_csv(BufReader::new(file))?)
}

fn resolve_target(explicit: Option<Target>, dataset: &Dataset) -> Result<Target, CliError> {
    let n = dataset.n_classes();
    let target = match explicit {
        Some(t) => t,
        None if n == Target::Runs.n_classes() => Target::Runs,
        None if n == Target::Wickets.n_classes() => Target::Wickets,
        None => return Err(CliError::Usage(format!("cannot infer target from {n} classes; pass --target"))),
    };
    if target.n_classes() != n {
        return Err(CliError::Data(format!("{target} needs {} classes, dataset has {n}", target.n_classes())));
    }
    Ok(target)
}

pub fn cmd_experiment(a: &ExperimentArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.learners.is_empty() || a.splits.is_empty() {
        return Err(CliError::Usage("--learners and --splits must be non-empty".to_string()));
    }
    if let Some(f) = a.splits.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
        return Err(CliError::Usage(format!("split {f} must lie strictly between 0 and 1")));
    }
    let dataset = read_dataset(&a.dataset)?;
    let target = resolve_target(a.target, &dataset)?;
    let mut learners: Vec<LearnerKind> = Vec::new();
    for &k in &a.learners {
        if !learners.contains(&k) {
            learners.push(k);
        }
    }
    let config = ExperimentConfig {
        learners: learners.iter().map(|&k| LearnerSpec::default_for(k, a.seed)).collect(),
        train_fractions: a.splits.clone(),
        strategy: if a.chronological {
            SplitStrategy::Chronological
        } else {
            SplitStrategy::StratifiedRandom { seed: a.seed }
        },
        smote: a.smote.config(a.seed)?,
        train_impute: a.train_impute.into(),
        target: Some(target),
        keep_models: a.save_models,
    };
    let result = crate::evaluate::run_experiment(&dataset, &config)?;
    fs::create_dir_all(&a.out).map_err(io_error(&a.out))?;
    let text = format_text(&result.report);
    let csv = format_csv(&result.report);
    let json = to_json(&result.report)?;
    for (name, body) in [
        ("report.txt", &text),
        ("report.csv", &csv),
        ("report.json", &json),
        ("timings.csv", &format_timings(&result.timings)),
    ] {
        let path = a.out.join(name);
        fs::write(&path, body).map_err(io_error(&path))?;
    }
    for (row, model) in result.report.rows.iter().zip(&result.models) {
        let name = format!("model-{}-{}.json", row.learner, split_label(row.train_fraction).replace('/', "-"));
        model.save(a.out.join(name))?;
    }
    write_out(
        out,
        match a.format {
            Format::Text => &text,
            Format::Csv => &csv,
            Format::Json => &json,
        },
    )
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let dataset = read_dataset(&a.dataset)?;
    let target = resolve_target(a.target, &dataset)?;
    let stats = ImputeStats::fit(&dataset);
    let mut train = stats.apply(&dataset, a.train_impute.into());
    if let Some(cfg) = a.smote.config(a.seed)? {
        train = balance_all(&train, &cfg)?;
    }
    let mut model = LearnerSpec::default_for(a.learner, a.seed).train(&train)?;
    model.target = Some(target);
    model.impute = Some(stats);
    model.save(&a.out)?;
    let mut text = format!("trained {} on {} rows -> {}\n", a.learner.display_name(), train.len(), a.out.display());
    for w in &model.warnings {
        text.push_str(&format!("warning: {w}\n"));
    }
    write_out(out, &text)
}

pub fn cmd_predict(a: &PredictArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = TrainedModel::load(&a.model)?;
    let target = model.target.ok_or_else(|| CliError::Data("model does not record its target".to_string()))?;
    let (histories, rosters) = a.input.load()?;
    let predictor = Predictor::new(histories, rosters, a.weights.load()?).with_model(model)?;
    let response =
        predictor.predict(&PredictionRequest { player_id: a.player.clone(), target, context: a.context.to_input() })?;
    let text = match a.format {
        Format::Json => to_json(&response)? + "\n",
        Format::Text | Format::Csv => {
            let probs: Vec<String> = response.probabilities.iter().map(|p| format!("{p:.4}")).collect();
            let mut s = format!(
                "{} ({}): {} class {} ({})\nprobabilities: [{}]\n",
                response.player_name,
                response.player_id,
                target,
                response.predicted_class,
                response.band,
                probs.join(", ")
            );
            let d = &response.derived;
            s.push_str(&format!(
                "consistency {:.4}  form {:.4}  opposition {:.4}  venue {:.4}\n",
                d.consistency, d.form, d.opposition, d.venue
            ));
            if !response.imputed.is_empty() {
                s.push_str(&format!("imputed: {}\n", response.imputed.join(", ")));
            }
            if response.cold_start {
                s.push_str("cold start: no prior innings, prediction rests on imputed means\n");
            }
            s
        }
    };
    write_out(out, &text)
}

pub fn cmd_ahp(a: &AhpArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.matrix).map_err(io_error(&a.matrix))?;
    let matrix = PairwiseMatrix::parse(&text).map_err(CliError::Data)?;
    let pv = weights_from_matrix(&matrix).map_err(|e| CliError::Data(e.to_string()))?;
    let body = match a.format {
        Format::Json => to_json(&pv)? + "\n",
        Format::Csv => {
            let mut s = String::from("index,weight\n");
            for (i, w) in pv.weights.iter().enumerate() {
                s.push_str(&format!("{},{w}\n", i + 1));
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for (i, w) in pv.weights.iter().enumerate() {
                s.push_str(&format!("w{} = {w:.6}\n", i + 1));
            }
            s.push_str(&format!(
                "lambda_max = {:.6}\nCI = {:.6}\nCR = {:.6}\n",
                pv.lambda_max, pv.consistency_index, pv.consistency_ratio
            ));
            s
        }
    };
    write_out(out, &body)
}

pub fn cmd_serve(a: &ServeArgs) -> Result<(), CliError> {
    let (histories, rosters) = a.input.load()?;
    let mut predictor = Predictor::new(histories, rosters, a.weights.load()?);
    for path in [&a.runs_model, &a.wickets_model].into_iter().flatten() {
        predictor = predictor.with_model(TrainedModel::load(path)?)?;
    }
    let cors = a
        .cors_origin
        .as_deref()
        .map(HeaderValue::from_str)
        .transpose()
        .map_err(|e| CliError::Usage(format!("--cors-origin: {e}")))?;
    let addr = SocketAddr::from(([0, 0, 0, 0], a.port));
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Internal(e.to_string()))?;
    runtime
        .block_on(crate::serve::serve(Arc::new(predictor), addr, cors))
        .map_err(|e| CliError::Data(format!("{addr}: {e}")))
}
