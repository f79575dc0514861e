//! Curriculum schedules, convergence ratios of training logs, and
//! difficulty-transfer scores.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hlm::{CellKey, EvalLevel, PerformanceCube};
use crate::splitkit::{DifficultySplit, Level};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleOrder {
    EasyToHard,
    HardToEasy,
    Random,
}

impl ScheduleOrder {
    pub fn as_str(self) -> &'static str {
        match self {
            ScheduleOrder::EasyToHard => "easy_to_hard",
            ScheduleOrder::HardToEasy => "hard_to_easy",
            ScheduleOrder::Random => "random",
        }
    }
}

impl fmt::Display for ScheduleOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScheduleOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "easy_to_hard" => Ok(ScheduleOrder::EasyToHard),
            "hard_to_easy" => Ok(ScheduleOrder::HardToEasy),
            "random" => Ok(ScheduleOrder::Random),
            other => Err(Error::invalid(format!("unknown schedule order {other:?}"))),
        }
    }
}

/// Order in which training documents are presented.
///
/// `phase_boundaries` are the indices where the second and third blocks
/// start. For a random schedule they keep the block sizes of the easy-first
/// layout but carry no difficulty meaning.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub order: ScheduleOrder,
    pub seed: Option<u64>,
    pub sequence: Vec<String>,
    pub phase_boundaries: [usize; 2],
}

/// Builds a schedule from a split. `seed` is only used by `Random`.
///
/// Random schedules are a Fisher-Yates shuffle of the easy-first sequence
/// driven by ChaCha8 seeded through `SeedableRng::seed_from_u64`, with
/// rejection sampling for unbiased bounded draws. The output depends only on
/// the split and the seed, not on the platform's word size.
pub fn make_schedule(split: &DifficultySplit, order: ScheduleOrder, seed: u64) -> Schedule {
    let (e, m) = (split.easy.len(), split.medium.len());
    let easy_first: Vec<String> = split
        .easy
        .iter()
        .chain(&split.medium)
        .chain(&split.hard)
        .cloned()
        .collect();
    match order {
        ScheduleOrder::EasyToHard => Schedule {
            order,
            seed: None,
            sequence: easy_first,
            phase_boundaries: [e, e + m],
        },
        ScheduleOrder::HardToEasy => Schedule {
            order,
            seed: None,
            sequence: split
                .hard
                .iter()
                .chain(&split.medium)
                .chain(&split.easy)
                .cloned()
                .collect(),
            phase_boundaries: [split.hard.len(), split.hard.len() + m],
        },
        ScheduleOrder::Random => {
            let mut sequence = easy_first;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in (1..sequence.len()).rev() {
                let j = bounded(&mut rng, i as u64 + 1) as usize;
                sequence.swap(i, j);
            }
            Schedule {
                order,
                seed: Some(seed),
                sequence,
                phase_boundaries: [e, e + m],
            }
        }
    }
}

/// Uniform draw from `0..bound`.
fn bounded(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let x = rng.next_u64();
        if x >= threshold {
            return x % bound;
        }
    }
}

/// Dev-set metric recorded during one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub steps: Vec<(u64, f64)>,
    pub higher_is_better: bool,
}

impl TrainingLog {
    pub fn new(steps: Vec<(u64, f64)>, higher_is_better: bool) -> Result<Self> {
        let log = TrainingLog {
            steps,
            higher_is_better,
        };
        log.validate()?;
        Ok(log)
    }

    /// At least two entries, steps positive and strictly increasing, values finite.
    pub fn validate(&self) -> Result<()> {
        if self.steps.len() < 2 {
            return Err(Error::invalid("a training log needs at least 2 entries"));
        }
        if self.steps[0].0 == 0 {
            return Err(Error::invalid("steps must start at 1 or later"));
        }
        for w in self.steps.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::invalid(format!(
                    "step {} does not increase after {}",
                    w[1].0, w[0].0
                )));
            }
        }
        if let Some((step, v)) = self.steps.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid(format!("metric {v} at step {step} is not finite")));
        }
        Ok(())
    }

    pub fn best(&self) -> f64 {
        let values = self.steps.iter().map(|&(_, v)| v);
        if self.higher_is_better {
            values.fold(f64::NEG_INFINITY, f64::max)
        } else {
            values.fold(f64::INFINITY, f64::min)
        }
    }

    pub fn last_step(&self) -> u64 {
        self.steps.last().map_or(0, |&(s, _)| s)
    }

    /// Trailing moving average over `window` entries.
    pub fn smoothed(&self, window: usize) -> TrainingLog {
        let window = window.max(1);
        let steps = self
            .steps
            .iter()
            .enumerate()
            .map(|(i, &(step, _))| {
                let lo = (i + 1).saturating_sub(window);
                let slice = &self.steps[lo..=i];
                (step, slice.iter().map(|&(_, v)| v).sum::<f64>() / slice.len() as f64)
            })
            .collect();
        TrainingLog {
            steps,
            higher_is_better: self.higher_is_better,
        }
    }
}

/// Reads a `step,value` CSV with a header row.
pub fn read_log_csv<R: std::io::Read>(reader: R, source_name: &str, higher_is_better: bool) -> Result<TrainingLog> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(source_name, 1, e.to_string()))?
        .clone();
    if header.iter().ne(["step", "value"]) {
        return Err(Error::parse(source_name, 1, "header must be step,value"));
    }
    let mut steps = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            Error::parse(
                source_name,
                e.position().map_or(0, |p| p.line() as usize),
                e.to_string(),
            )
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let step = record[0].parse::<u64>().map_err(|_| {
            Error::parse(
                source_name,
                line,
                format!("step {:?} is not a positive integer", &record[0]),
            )
        })?;
        let value = record[1]
            .parse::<f64>()
            .map_err(|_| Error::parse(source_name, line, format!("value {:?} is not a number", &record[1])))?;
        steps.push((step, value));
    }
    TrainingLog::new(steps, higher_is_better).map_err(|e| Error::invalid(format!("{source_name}: {e}")))
}

pub fn load_log(path: &Path, higher_is_better: bool) -> Result<TrainingLog> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_log_csv(
        std::io::BufReader::new(file),
        &path.display().to_string(),
        higher_is_better,
    )
}

/// First step whose metric is within `epsilon_rel · |best|` of the best value.
pub fn convergence_step(log: &TrainingLog, epsilon_rel: f64) -> Result<u64> {
    log.validate()?;
    if !(epsilon_rel > 0.0 && epsilon_rel < 1.0) {
        return Err(Error::invalid(format!(
            "epsilon_rel must be in (0, 1), got {epsilon_rel}"
        )));
    }
    let best = log.best();
    let tolerance = epsilon_rel * best.abs();
    let converged = |v: f64| {
        if log.higher_is_better {
            v >= best - tolerance
        } else {
            v <= best + tolerance
        }
    };
    Ok(log
        .steps
        .iter()
        .find(|&&(_, v)| converged(v))
        .map(|&(s, _)| s)
        .expect("the best entry always qualifies"))
}

/// Convergent step divided by the last step; in (0, 1], lower is faster.
pub fn convergence_ratio(log: &TrainingLog, epsilon_rel: f64) -> Result<f64> {
    let step = convergence_step(log, epsilon_rel)?;
    Ok(step as f64 / log.last_step() as f64)
}

/// One run listed in a run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub name: String,
    /// Path to a `step,value` CSV, relative to the manifest file.
    pub log: String,
    pub higher_is_better: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<ScheduleOrder>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub runs: Vec<RunEntry>,
}

pub fn load_manifest(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| Error::parse(&path.display().to_string(), e.line(), e.to_string()))?;
    if manifest.runs.is_empty() {
        return Err(Error::invalid("run manifest lists no runs"));
    }
    Ok(manifest)
}

/// Transfer scores: rows are train levels, columns are eval levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub scores: [[f64; 3]; 3],
    /// Groups (task/criterion/model) that contributed, with their ranks.
    pub groups: Vec<GroupRanks>,
    /// Groups left out because some value was missing.
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRanks {
    pub group: String,
    /// `ranks[train][eval]`, 3 for the best train level of a column.
    pub ranks: [[f64; 3]; 3],
}

impl TransferMatrix {
    pub fn get(&self, train: Level, eval: Level) -> f64 {
        self.scores[train.index()][eval.index()]
    }

    pub fn column_sums(&self) -> [f64; 3] {
        let mut sums = [0.0; 3];
        for row in &self.scores {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }
}

/// Rank positions 1..=3 with ties sharing the average rank; larger is better.
pub fn rank_three(values: [f64; 3], higher_is_better: bool) -> [f64; 3] {
    let oriented = values.map(|v| if higher_is_better { v } else { -v });
    let mut ranks = [0.0; 3];
    for i in 0..3 {
        let mut r = 1.0;
        for j in 0..3 {
            if i == j {
                continue;
            }
            if oriented[j] < oriented[i] {
                r += 1.0;
            } else if oriented[j] == oriented[i] {
                r += 0.5;
            }
        }
        ranks[i] = r;
    }
    ranks
}

/// Averages 3/2/1 ranks of train levels within each eval-level column over
/// every complete group of the cube accepted by `filter`.
pub fn transfer_scores_where<F>(cube: &PerformanceCube, filter: F) -> Result<TransferMatrix>
where
    F: Fn(&CellKey) -> bool,
{
    let mut groups = Vec::new();
    let mut skipped = Vec::new();
    for (key, cell) in cube.cells().filter(|(k, _)| filter(k)) {
        let mut values = [[0.0; 3]; 3];
        let mut complete = true;
        for train in Level::ALL {
            for eval in Level::ALL {
                match cell.get(train, EvalLevel::from(eval)) {
                    Some(v) => values[train.index()][eval.index()] = v,
                    None => complete = false,
                }
            }
        }
        if !complete {
            skipped.push(key.to_string());
            continue;
        }
        let mut ranks = [[0.0; 3]; 3];
        for eval in 0..3 {
            let column = [values[0][eval], values[1][eval], values[2][eval]];
            let r = rank_three(column, cell.higher_is_better);
            for train in 0..3 {
                ranks[train][eval] = r[train];
            }
        }
        groups.push(GroupRanks {
            group: key.to_string(),
            ranks,
        });
    }
    if groups.is_empty() {
        return Err(Error::invalid("no complete groups with per-level evaluations"));
    }
    if !skipped.is_empty() {
        log::warn!("skipping incomplete transfer groups: {}", skipped.join(", "));
    }
    let mut scores = [[0.0; 3]; 3];
    for g in &groups {
        for (row, rank_row) in scores.iter_mut().zip(&g.ranks) {
            for (s, r) in row.iter_mut().zip(rank_row) {
                *s += r;
            }
        }
    }
    let n = groups.len() as f64;
    for row in &mut scores {
        for s in row.iter_mut() {
            *s /= n;
        }
    }
    Ok(TransferMatrix {
        scores,
        groups,
        skipped,
    })
}

pub fn transfer_scores(cube: &PerformanceCube) -> Result<TransferMatrix> {
    transfer_scores_where(cube, |_| true)
}

/// One matrix per model.
pub fn transfer_scores_by_model(cube: &PerformanceCube) -> Result<BTreeMap<String, TransferMatrix>> {
    let mut models: Vec<&str> = cube.cells().map(|(k, _)| k.model.as_str()).collect();
    models.dedup();
    models.sort_unstable();
    models.dedup();
    let mut out = BTreeMap::new();
    for model in models {
        if let Ok(m) = transfer_scores_where(cube, |k| k.model == model) {
            out.insert(model.to_string(), m);
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("no complete groups with per-level evaluations"));
    }
    Ok(out)
}
