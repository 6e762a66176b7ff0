//! One function per subcommand. Each returns the files it wrote plus any
//! warnings and text meant for stdout, leaving printing to the caller.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempvec::corpus::{load_interactions, preprocess as run_preprocess, PreprocessConfig};
use tempvec::recsys::{evaluate as run_evaluate, ItemIndex};
use tempvec::temporal::{timelines, user_profile, UserTemporalProfile};
use tempvec::trainer::{fit, read_model, write_context, write_model, EmbeddingModel, Vocabulary};
use tempvec::weighting::{cont_components, unified_weight};

use crate::artifacts::{content_hash, write_text, Part, Splits, SUMMARY_FILE};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::grid::{self, GridSpec};

const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub stdout: String,
}

/// The config minus settings that cannot change an artifact's content.
fn fingerprint(cfg: &RunConfig) -> String {
    RunConfig {
        output_dir: PathBuf::new(),
        grid: GridSpec::default(),
        ..cfg.clone()
    }
    .to_toml()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

pub fn preprocess(cfg: &RunConfig) -> Result<Outcome> {
    let path = cfg
        .data
        .path
        .as_ref()
        .ok_or_else(|| CliError::config("data.path is required for preprocess"))?;
    let file = File::open(path)
        .map_err(|e| CliError::new("io", format!("cannot open {}: {e}", path.display())))?;
    let (raw, report) = load_interactions(BufReader::new(file), &cfg.data.format)?;
    let pc = PreprocessConfig {
        rating_range: cfg.rating_range(),
        ..cfg.preprocess.clone()
    };
    let split = run_preprocess(&raw, &pc)?;
    let (train_end, val_end) = split.boundaries;
    let splits = Splits::from(split);

    let mut summary = cfg.echo();
    writeln!(summary, "input_rows = {}", report.rows).unwrap();
    writeln!(summary, "skipped_rows = {}", report.skipped).unwrap();
    writeln!(summary, "train_end = {train_end}").unwrap();
    writeln!(summary, "validation_end = {val_end}").unwrap();
    for (name, part) in [
        ("all", Part::All),
        ("train", Part::Train),
        ("validation", Part::Validation),
        ("test", Part::Test),
    ] {
        writeln!(summary, "\n[{name}]\n{}", splits.part(part).summary()).unwrap();
    }

    let mut outputs = splits.write(&cfg.output_dir)?;
    outputs.push(write_text(&cfg.output_dir, SUMMARY_FILE, &summary)?);
    let mut warnings = Vec::new();
    if report.skipped > 0 {
        warnings.push(format!(
            "skipped {} malformed rows of {}",
            report.skipped, report.rows
        ));
    }
    Ok(Outcome {
        stdout: format!(
            "train = {}\nvalidation = {}\ntest = {}\n",
            splits.train.len(),
            splits.validation.len(),
            splits.test.len()
        ),
        outputs,
        warnings,
    })
}

/// Trains on `part` (train, or train and validation merged) and writes
/// `model-<hash>.txt`, its context sidecar and `train-<hash>.log`.
pub fn train(cfg: &RunConfig, part: Part) -> Result<Outcome> {
    if !matches!(part, Part::Train | Part::TrainVal) {
        return Err(CliError::config("train reads `train` or `train-val`"));
    }
    let data = Splits::load(&cfg.output_dir)?.part(part);
    let out = fit(&data, &cfg.temporal, &cfg.weight, &cfg.train)?;
    let hash = content_hash(&[fingerprint(cfg).as_bytes(), part.as_str().as_bytes()]);

    let mut model_text = Vec::new();
    write_model(&out.model, &mut model_text)?;
    let mut context_text = Vec::new();
    write_context(&out.model, &mut context_text)?;
    let mut log = cfg.echo();
    writeln!(log, "# data = {}", part.as_str()).unwrap();
    log.push_str("epoch\tpairs\tmean_loss\tlearning_rate\n");
    for e in &out.log {
        writeln!(
            log,
            "{}\t{}\t{}\t{}",
            e.epoch, e.pairs, e.mean_loss, e.learning_rate
        )
        .unwrap();
    }

    let dir = &cfg.output_dir;
    let model_path = write_text(
        dir,
        &format!("model-{hash}.txt"),
        &String::from_utf8_lossy(&model_text),
    )?;
    let outputs = vec![
        model_path.clone(),
        write_text(
            dir,
            &format!("model-{hash}.context.txt"),
            &String::from_utf8_lossy(&context_text),
        )?,
        write_text(dir, &format!("train-{hash}.log"), &log)?,
    ];
    let last = out.log.last().expect("at least one epoch");
    Ok(Outcome {
        stdout: format!(
            "model = {}\nfinal_mean_loss = {}\n",
            model_path.display(),
            last.mean_loss
        ),
        outputs,
        warnings: Vec::new(),
    })
}

fn load_model(path: &Path) -> Result<(EmbeddingModel, Vec<u8>)> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::new("io", format!("cannot read model {}: {e}", path.display())))?;
    Ok((read_model(bytes.as_slice())?, bytes))
}

#[derive(Serialize)]
struct MetricsDocument<'a> {
    model: String,
    split: &'a str,
    seed: u64,
    negative_ratio: usize,
    users_evaluated: usize,
    rmse: f64,
    cutoffs: Vec<usize>,
    ndcg: Vec<f64>,
    hit_rate: Vec<f64>,
}

/// Scores a model on `part`. Validation uses the train split as user
/// histories; test uses train and validation merged.
pub fn evaluate(cfg: &RunConfig, model_path: &Path, part: Part) -> Result<Outcome> {
    let (history, targets) = match part {
        Part::Validation => (Part::Train, Part::Validation),
        Part::Test => (Part::TrainVal, Part::Test),
        _ => return Err(CliError::config("evaluate scores `validation` or `test`")),
    };
    let (model, bytes) = load_model(model_path)?;
    let splits = Splits::load(&cfg.output_dir)?;
    let report = run_evaluate(
        &model,
        &splits.part(history),
        &splits.part(targets),
        &cfg.eval,
    )
    .map_err(|e| match e {
        tempvec::Error::UnknownItem(item) => CliError::new(
            "vocabulary-mismatch",
            format!(
                "{} item `{item}` is not in the model vocabulary",
                part.as_str()
            ),
        ),
        other => other.into(),
    })?;

    let doc = MetricsDocument {
        model: model_path
            .file_name()
            .map_or_else(String::new, |n| n.to_string_lossy().into_owned()),
        split: part.as_str(),
        seed: cfg.eval.seed,
        negative_ratio: cfg.eval.negative_ratio,
        users_evaluated: report.users_evaluated,
        rmse: report.rmse,
        cutoffs: report.ndcg_at.keys().copied().collect(),
        ndcg: report.ndcg_at.values().copied().collect(),
        hit_rate: report.hitrate_at.values().copied().collect(),
    };
    let body = toml::to_string(&doc).expect("metrics serialize");
    let hash = content_hash(&[
        fingerprint(cfg).as_bytes(),
        &bytes,
        part.as_str().as_bytes(),
    ]);
    let path = write_text(
        &cfg.output_dir,
        &format!("metrics-{hash}.toml"),
        &(cfg.echo() + &body),
    )?;

    let mut stdout = format!(
        "users_evaluated = {}\nrmse = {}\n",
        report.users_evaluated, report.rmse
    );
    for (n, v) in &report.ndcg_at {
        writeln!(
            stdout,
            "ndcg@{n} = {v}\thitrate@{n} = {}",
            report.hitrate_at[n]
        )
        .unwrap();
    }
    Ok(Outcome {
        outputs: vec![path],
        warnings: Vec::new(),
        stdout,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Subject {
    /// A user from the preprocessed data; history = train and validation.
    User(String),
    /// A file with one item id per line.
    HistoryFile(PathBuf),
}

/// Top-`k` list as `user_id, rank, item_id, score` rows, written to
/// `output` or returned as stdout.
pub fn recommend(
    cfg: &RunConfig,
    model_path: &Path,
    subject: &Subject,
    k: usize,
    output: Option<&Path>,
) -> Result<Outcome> {
    if k == 0 {
        return Err(CliError::config("k must be >= 1"));
    }
    let (model, _) = load_model(model_path)?;
    let (label, raw): (String, Vec<String>) = match subject {
        Subject::User(user) => {
            let d = Splits::load(&cfg.output_dir)?.part(Part::TrainVal);
            let items: Vec<String> = d
                .iter()
                .filter(|i| &i.user_id == user)
                .map(|i| i.item_id.clone())
                .collect();
            if items.is_empty() {
                return Err(CliError::new(
                    "unknown-user",
                    format!("user `{user}` has no history"),
                ));
            }
            (user.clone(), items)
        }
        Subject::HistoryFile(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::new("io", format!("cannot read history {}: {e}", path.display()))
            })?;
            let items = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(String::from)
                .collect();
            ("history".to_string(), items)
        }
    };

    let mut warnings = Vec::new();
    let mut history = Vec::new();
    for item in &raw {
        match model.vocab.index(item) {
            Some(i) => history.push(i),
            None => warnings.push(format!(
                "skipping item `{item}`: not in the model vocabulary"
            )),
        }
    }
    if history.is_empty() {
        return Err(CliError::new(
            "empty-history",
            "no history item is in the model vocabulary",
        ));
    }
    let index = ItemIndex::new(&model);
    let u = index.user_vector(&label, &history)?;
    let consumed: HashSet<usize> = history.iter().copied().collect();
    let ranked = index.top_k(&u, &consumed, k);
    if ranked.items.is_empty() {
        warnings.push("candidate pool is empty: the history covers the whole vocabulary".into());
    }

    let mut table = String::from("user_id\trank\titem_id\tscore\n");
    for (r, (item, score)) in ranked.items.iter().enumerate() {
        writeln!(table, "{label}\t{}\t{item}\t{score}", r + 1).unwrap();
    }
    match output {
        Some(path) => {
            std::fs::write(path, &table)?;
            Ok(Outcome {
                outputs: vec![path.to_path_buf()],
                warnings,
                stdout: String::new(),
            })
        }
        None => Ok(Outcome {
            outputs: Vec::new(),
            warnings,
            stdout: table,
        }),
    }
}

/// Writes `grid-<hash>.tsv` and `best-<hash>.toml`, a standalone config for
/// the winning point.
pub fn grid_search(cfg: &RunConfig, jobs: usize) -> Result<Outcome> {
    let splits = Splits::load(&cfg.output_dir)?;
    let result = grid::run(cfg, &splits, jobs)?;
    let hash = content_hash(&[RunConfig {
        output_dir: PathBuf::new(),
        ..cfg.clone()
    }
    .to_toml()
    .as_bytes()]);
    let best = result.best_point().apply(cfg);
    let score = result.score(result.best).expect("best point succeeded");
    let best_text = format!(
        "# selected by validation {} = {score} at grid point {}\n{}",
        result.metric,
        result.best,
        best.to_toml()
    );
    let dir = &cfg.output_dir;
    let outputs = vec![
        write_text(dir, &format!("grid-{hash}.tsv"), &result.table())?,
        write_text(dir, &format!("best-{hash}.toml"), &best_text)?,
    ];
    let warnings = result
        .rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| {
            r.outcome
                .as_ref()
                .err()
                .map(|e| format!("grid point {i} failed: {e}"))
        })
        .collect();
    Ok(Outcome {
        stdout: format!(
            "points = {}\nbest_point = {}\n{} = {score}\n",
            result.rows.len(),
            result.best,
            result.metric
        ),
        outputs,
        warnings,
    })
}

fn profiles(cfg: &RunConfig, part: Part) -> Result<Vec<UserTemporalProfile>> {
    let d = Splits::load(&cfg.output_dir)?.part(part);
    let vocab = Vocabulary::build(&d)?;
    let temporal = cfg.weight.profile_config(&cfg.temporal);
    timelines(&d, |i| vocab.index(i))
        .iter()
        .map(|tl| user_profile(tl, &temporal).map_err(CliError::from))
        .collect()
}

/// Aggregates over a set of profiles.
#[derive(Clone, Debug, PartialEq)]
pub struct StatsSummary {
    pub users: usize,
    pub degenerate_users: usize,
    pub interactions: usize,
    /// Pooled mean of every consecutive gap of every user.
    pub mean_gap_seconds: f64,
    pub mean_sessions: f64,
}

impl StatsSummary {
    pub fn of(profiles: &[UserTemporalProfile]) -> Self {
        let gaps: Vec<f64> = profiles
            .iter()
            .flat_map(|p| p.timestamps.windows(2).map(|w| (w[1] - w[0]) as f64))
            .collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        StatsSummary {
            users: profiles.len(),
            degenerate_users: profiles.iter().filter(|p| p.degenerate).count(),
            interactions: profiles.iter().map(|p| p.len()).sum(),
            mean_gap_seconds: mean(&gaps),
            mean_sessions: mean(
                &profiles
                    .iter()
                    .map(|p| p.session_count() as f64)
                    .collect::<Vec<_>>(),
            ),
        }
    }

    pub fn mean_gap_days(&self) -> f64 {
        self.mean_gap_seconds / SECONDS_PER_DAY
    }
}

impl std::fmt::Display for StatsSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "users = {}", self.users)?;
        writeln!(f, "degenerate_users = {}", self.degenerate_users)?;
        writeln!(f, "interactions = {}", self.interactions)?;
        writeln!(f, "mean_gap_seconds = {}", self.mean_gap_seconds)?;
        writeln!(f, "mean_gap_days = {}", self.mean_gap_days())?;
        writeln!(f, "mean_sessions = {}", self.mean_sessions)
    }
}

/// Per-user temporal statistics as a table, one row per user.
pub fn stats_table(profiles: &[UserTemporalProfile]) -> String {
    let mut s = String::from("user_id\tevents\tvalid_intervals\tq1\tq3\ttau\tmu\tsigma\tclip_bound\tsessions\tdegenerate\n");
    for p in profiles {
        writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            p.user_id,
            p.len(),
            p.valid_intervals.len(),
            fmt_opt(p.q1),
            fmt_opt(p.q3),
            p.tau,
            fmt_opt(p.mu),
            fmt_opt(p.sigma),
            p.clip_bound,
            p.session_count(),
            p.degenerate
        )
        .unwrap();
    }
    s
}

pub fn stats(cfg: &RunConfig, part: Part) -> Result<Outcome> {
    let profiles = profiles(cfg, part)?;
    let summary = StatsSummary::of(&profiles).to_string();
    let name = part.as_str();
    let outputs = vec![
        write_text(
            &cfg.output_dir,
            &format!("stats-{name}.tsv"),
            &stats_table(&profiles),
        )?,
        write_text(
            &cfg.output_dir,
            &format!("stats-{name}-summary.txt"),
            &(cfg.echo() + &summary),
        )?,
    ];
    Ok(Outcome {
        outputs,
        warnings: Vec::new(),
        stdout: summary,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Anchor {
    First,
    Middle,
    Last,
    Position(usize),
}

impl Anchor {
    pub fn resolve(&self, len: usize) -> Option<usize> {
        match *self {
            _ if len == 0 => None,
            Anchor::First => Some(0),
            Anchor::Middle => Some((len - 1) / 2),
            Anchor::Last => Some(len - 1),
            Anchor::Position(p) => (p < len).then_some(p),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Anchor::First => "first".into(),
            Anchor::Middle => "middle".into(),
            Anchor::Last => "last".into(),
            Anchor::Position(p) => p.to_string(),
        }
    }

    pub const DEFAULT: [Anchor; 3] = [Anchor::First, Anchor::Middle, Anchor::Last];
}

impl std::str::FromStr for Anchor {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Anchor::First),
            "middle" => Ok(Anchor::Middle),
            "last" => Ok(Anchor::Last),
            other => other.parse().map(Anchor::Position).map_err(|_| {
                CliError::config(format!(
                    "anchor must be first, middle, last or an event index, got `{other}`"
                ))
            }),
        }
    }
}

/// Local, global and unified weight of every event against each anchor.
/// Distances are elapsed time in days; the local weight is empty for
/// degenerate users, whose unified weight is the global one.
pub fn curve_table(
    profile: &UserTemporalProfile,
    anchors: &[Anchor],
    cfg: &RunConfig,
) -> Result<String> {
    let mut s = String::from(
        "anchor\tanchor_index\tevent_index\tdistance_days\tw_local\tw_global\tw_unified\n",
    );
    for a in anchors {
        let i = a.resolve(profile.len()).ok_or_else(|| {
            CliError::config(format!(
                "anchor {} is outside a timeline of {} events",
                a.label(),
                profile.len()
            ))
        })?;
        for j in 0..profile.len() {
            let (local, global) = cont_components(profile, i, j, &cfg.weight, cfg.temporal.epsilon);
            let unified = local.map_or(global, |l| unified_weight(l, global));
            let days =
                (profile.timestamps[j] - profile.timestamps[i]).abs() as f64 / SECONDS_PER_DAY;
            writeln!(
                s,
                "{}\t{i}\t{j}\t{days}\t{}\t{global}\t{unified}",
                a.label(),
                fmt_opt(local)
            )
            .unwrap();
        }
    }
    Ok(s)
}

pub fn export_curves(
    cfg: &RunConfig,
    user: &str,
    anchors: &[Anchor],
    part: Part,
) -> Result<Outcome> {
    let profiles = profiles(cfg, part)?;
    let profile = profiles.iter().find(|p| p.user_id == user).ok_or_else(|| {
        CliError::new(
            "unknown-user",
            format!("user `{user}` not found in {}", part.as_str()),
        )
    })?;
    let anchors = if anchors.is_empty() {
        &Anchor::DEFAULT[..]
    } else {
        anchors
    };
    let table = curve_table(profile, anchors, cfg)?;
    let safe: String = user
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect();
    let path = write_text(&cfg.output_dir, &format!("curves-{safe}.tsv"), &table)?;
    Ok(Outcome {
        outputs: vec![path],
        warnings: Vec::new(),
        stdout: String::new(),
    })
}
