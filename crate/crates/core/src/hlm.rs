//! Human Learning Matching index.
//!
//! A model trained separately on easy, medium and hard data yields a
//! performance triplet per (task, criterion, model) cell. The ordering of the
//! triplet gives a logical score in {±0.75, ±0.375, 0}; its spread adds a
//! sigmoid-squashed bonus of at most 0.25 in the same direction. The index
//! along an axis (model, task or criterion) is the mean cell value over every
//! cell sharing that key.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::splitkit::Level;

/// Largest `f64` strictly below 1.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceTriplet {
    pub easy: f64,
    pub medium: f64,
    pub hard: f64,
    pub higher_is_better: bool,
}

impl PerformanceTriplet {
    pub fn new(easy: f64, medium: f64, hard: f64, higher_is_better: bool) -> Self {
        PerformanceTriplet {
            easy,
            medium,
            hard,
            higher_is_better,
        }
    }

    fn oriented(&self) -> (f64, f64, f64) {
        if self.higher_is_better {
            (self.easy, self.medium, self.hard)
        } else {
            (-self.easy, -self.medium, -self.hard)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StdDivisor {
    /// Divide by 3.
    #[default]
    Population,
    /// Divide by 2.
    Sample,
}

impl FromStr for StdDivisor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "population" => Ok(StdDivisor::Population),
            "sample" => Ok(StdDivisor::Sample),
            other => Err(Error::invalid(format!(
                "std divisor must be population or sample, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HlmConfig {
    pub std_divisor: StdDivisor,
}

/// Ordering score of a triplet after orienting it so that higher is better.
///
/// Cases are tried in this order and the first match wins:
/// e≥m≥h → 0.75, e≥h≥m → 0.375, m≥h≥e → 0, m≥e≥h → 0, h≥e≥m → −0.375,
/// h≥m≥e → −0.75. A three-way tie scores 0.
pub fn logical_score(t: &PerformanceTriplet) -> f64 {
    let (e, m, h) = t.oriented();
    if e == m && m == h {
        0.0
    } else if e >= m && m >= h {
        0.75
    } else if e >= h && h >= m {
        0.375
    } else if (m >= h && h >= e) || (m >= e && e >= h) {
        0.0
    } else if h >= e && e >= m {
        -0.375
    } else {
        -0.75
    }
}

/// Standard deviation of the raw (un-oriented) triplet values.
pub fn triplet_std(t: &PerformanceTriplet, divisor: StdDivisor) -> f64 {
    let values = [t.easy, t.medium, t.hard];
    let mean = values.iter().sum::<f64>() / 3.0;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let n = match divisor {
        StdDivisor::Population => 3.0,
        StdDivisor::Sample => 2.0,
    };
    (ss / n).sqrt()
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Rounds a value whose exact magnitude is below 1 toward zero if floating
/// point pushed it onto ±1.
fn into_open_unit(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        BELOW_ONE.copysign(x)
    } else {
        x
    }
}

/// Components of one cell's contribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellTerms {
    pub s: f64,
    pub std: f64,
    pub sigmoid: f64,
    pub value: f64,
}

pub fn cell_terms(t: &PerformanceTriplet, cfg: &HlmConfig) -> CellTerms {
    let s = logical_score(t);
    let std = triplet_std(t, cfg.std_divisor);
    let f = sigmoid(std);
    let sign = if s > 0.0 {
        1.0
    } else if s < 0.0 {
        -1.0
    } else {
        0.0
    };
    let value = if sign == 0.0 {
        0.0
    } else {
        into_open_unit(s + 0.25 * sign * f)
    };
    CellTerms {
        s,
        std,
        sigmoid: f,
        value,
    }
}

/// `s + 0.25·sgn(s)·sigmoid(std)`, always strictly inside (−1, 1).
pub fn cell_value(t: &PerformanceTriplet, cfg: &HlmConfig) -> f64 {
    cell_terms(t, cfg).value
}

/// Evaluation split a performance number was measured on. `Full` is the
/// whole test set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalLevel {
    Easy,
    Medium,
    Hard,
    Full,
}

impl EvalLevel {
    pub fn as_level(self) -> Option<Level> {
        match self {
            EvalLevel::Easy => Some(Level::Easy),
            EvalLevel::Medium => Some(Level::Medium),
            EvalLevel::Hard => Some(Level::Hard),
            EvalLevel::Full => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EvalLevel::Easy => "easy",
            EvalLevel::Medium => "medium",
            EvalLevel::Hard => "hard",
            EvalLevel::Full => "full",
        }
    }
}

impl From<Level> for EvalLevel {
    fn from(level: Level) -> Self {
        match level {
            Level::Easy => EvalLevel::Easy,
            Level::Medium => EvalLevel::Medium,
            Level::Hard => EvalLevel::Hard,
        }
    }
}

impl FromStr for EvalLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "full" {
            Ok(EvalLevel::Full)
        } else {
            s.parse::<Level>().map(EvalLevel::from)
        }
    }
}

/// One line of the performance CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceRow {
    pub task: String,
    pub criterion: String,
    pub model: String,
    pub train_level: Level,
    pub eval_level: EvalLevel,
    pub metric: String,
    pub value: f64,
    pub higher_is_better: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub task: String,
    pub criterion: String,
    pub model: String,
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.task, self.criterion, self.model)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeCell {
    pub metric: String,
    pub higher_is_better: bool,
    pub values: BTreeMap<(Level, EvalLevel), f64>,
}

impl CubeCell {
    pub fn get(&self, train: Level, eval: EvalLevel) -> Option<f64> {
        self.values.get(&(train, eval)).copied()
    }
}

/// Performance numbers indexed by (task, criterion, model, train level,
/// eval level). Cells may be sparse.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PerformanceCube {
    cells: BTreeMap<CellKey, CubeCell>,
}

pub const CUBE_HEADER: [&str; 8] = [
    "task",
    "criterion",
    "model",
    "train_level",
    "eval_level",
    "metric",
    "value",
    "higher_is_better",
];

impl PerformanceCube {
    pub fn from_rows(rows: impl IntoIterator<Item = PerformanceRow>) -> Result<Self> {
        let mut cube = PerformanceCube::default();
        for (i, row) in rows.into_iter().enumerate() {
            cube.insert(row)
                .map_err(|e| Error::invalid(format!("row {}: {e}", i + 1)))?;
        }
        Ok(cube)
    }

    pub fn insert(&mut self, row: PerformanceRow) -> Result<()> {
        if row.task.is_empty() || row.criterion.is_empty() || row.model.is_empty() {
            return Err(Error::invalid("task, criterion and model must be non-empty"));
        }
        if !row.value.is_finite() {
            return Err(Error::invalid(format!("value {} is not finite", row.value)));
        }
        let key = CellKey {
            task: row.task,
            criterion: row.criterion,
            model: row.model,
        };
        let cell = self.cells.entry(key.clone()).or_insert_with(|| CubeCell {
            metric: row.metric.clone(),
            higher_is_better: row.higher_is_better,
            values: BTreeMap::new(),
        });
        if cell.higher_is_better != row.higher_is_better || cell.metric != row.metric {
            return Err(Error::invalid(format!(
                "{key}: metric or direction differs from earlier rows"
            )));
        }
        if cell
            .values
            .insert((row.train_level, row.eval_level), row.value)
            .is_some()
        {
            return Err(Error::invalid(format!(
                "{key}: duplicate entry for train={} eval={}",
                row.train_level,
                row.eval_level.as_str()
            )));
        }
        Ok(())
    }

    pub fn cells(&self) -> impl Iterator<Item = (&CellKey, &CubeCell)> {
        self.cells.iter()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Full-test-set performance of the three train levels, if all present.
    pub fn triplet(&self, key: &CellKey) -> Option<PerformanceTriplet> {
        let cell = self.cells.get(key)?;
        Some(PerformanceTriplet {
            easy: cell.get(Level::Easy, EvalLevel::Full)?,
            medium: cell.get(Level::Medium, EvalLevel::Full)?,
            hard: cell.get(Level::Hard, EvalLevel::Full)?,
            higher_is_better: cell.higher_is_better,
        })
    }

    pub fn rows(&self) -> Vec<PerformanceRow> {
        let mut rows = Vec::new();
        for (key, cell) in &self.cells {
            for (&(train_level, eval_level), &value) in &cell.values {
                rows.push(PerformanceRow {
                    task: key.task.clone(),
                    criterion: key.criterion.clone(),
                    model: key.model.clone(),
                    train_level,
                    eval_level,
                    metric: cell.metric.clone(),
                    value,
                    higher_is_better: cell.higher_is_better,
                });
            }
        }
        rows
    }
}

/// Reads the performance CSV. The header row must list exactly
/// [`CUBE_HEADER`]. Errors name the 1-based file line.
pub fn read_cube_csv<R: std::io::Read>(reader: R, source_name: &str) -> Result<PerformanceCube> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(source_name, 1, e.to_string()))?
        .clone();
    if header.iter().ne(CUBE_HEADER) {
        return Err(Error::parse(
            source_name,
            1,
            format!("header must be {}", CUBE_HEADER.join(",")),
        ));
    }
    let mut cube = PerformanceCube::default();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(source_name, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let bad = |msg: String| Error::parse(source_name, line, msg);
        let field = |i: usize| record.get(i).unwrap_or("");
        let row = PerformanceRow {
            task: field(0).to_string(),
            criterion: field(1).to_string(),
            model: field(2).to_string(),
            train_level: field(3).parse().map_err(|e: Error| bad(e.to_string()))?,
            eval_level: field(4).parse().map_err(|e: Error| bad(e.to_string()))?,
            metric: field(5).to_string(),
            value: field(6)
                .parse()
                .map_err(|_| bad(format!("value {:?} is not a number", field(6))))?,
            higher_is_better: parse_bool(field(7))
                .ok_or_else(|| bad(format!("higher_is_better {:?} is not a boolean", field(7))))?,
        };
        cube.insert(row).map_err(|e| bad(e.to_string()))?;
    }
    Ok(cube)
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

pub fn load_cube(path: &Path) -> Result<PerformanceCube> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_cube_csv(std::io::BufReader::new(file), &path.display().to_string())
}

pub fn write_cube_csv<W: std::io::Write>(writer: W, cube: &PerformanceCube) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| Error::invalid(e.to_string());
    w.write_record(CUBE_HEADER).map_err(err)?;
    for row in cube.rows() {
        w.write_record([
            row.task.as_str(),
            row.criterion.as_str(),
            row.model.as_str(),
            row.train_level.as_str(),
            row.eval_level.as_str(),
            row.metric.as_str(),
            &row.value.to_string(),
            if row.higher_is_better { "true" } else { "false" },
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::invalid(e.to_string()))
}

/// Which sub-index to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Model,
    Task,
    Criterion,
}

impl Axis {
    fn key_of(self, key: &CellKey) -> &str {
        match self {
            Axis::Model => &key.model,
            Axis::Task => &key.task,
            Axis::Criterion => &key.criterion,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Model => "model",
            Axis::Task => "task",
            Axis::Criterion => "criterion",
        }
    }
}

fn mean_open(values: &[f64]) -> f64 {
    into_open_unit(values.iter().sum::<f64>() / values.len() as f64)
}

/// Mean cell value over the complete cells whose `axis` coordinate is `key`.
/// Cells lacking any of the three full-test-set values are skipped.
pub fn index(cube: &PerformanceCube, axis: Axis, key: &str, cfg: &HlmConfig) -> Result<f64> {
    let values: Vec<f64> = cube
        .cells
        .keys()
        .filter(|k| axis.key_of(k) == key)
        .filter_map(|k| cube.triplet(k))
        .map(|t| cell_value(&t, cfg))
        .collect();
    if values.is_empty() {
        return Err(Error::MissingKey {
            axis: axis.as_str().to_string(),
            key: key.to_string(),
        });
    }
    Ok(mean_open(&values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub task: String,
    pub criterion: String,
    pub model: String,
    pub triplet: PerformanceTriplet,
    #[serde(flatten)]
    pub terms: CellTerms,
}

/// All three sub-indices plus the per-cell breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HlmReport {
    pub std_divisor: StdDivisor,
    pub models: BTreeMap<String, f64>,
    pub tasks: BTreeMap<String, f64>,
    pub criteria: BTreeMap<String, f64>,
    pub cells: Vec<CellReport>,
    /// Cells left out because a train level was missing.
    pub skipped: Vec<String>,
}

pub fn hlm_report(cube: &PerformanceCube, cfg: &HlmConfig) -> Result<HlmReport> {
    let mut cells = Vec::new();
    let mut skipped = Vec::new();
    for key in cube.cells.keys() {
        match cube.triplet(key) {
            Some(triplet) => cells.push(CellReport {
                task: key.task.clone(),
                criterion: key.criterion.clone(),
                model: key.model.clone(),
                triplet,
                terms: cell_terms(&triplet, cfg),
            }),
            None => skipped.push(key.to_string()),
        }
    }
    if cells.is_empty() {
        return Err(Error::invalid("performance cube has no complete cells"));
    }
    if !skipped.is_empty() {
        log::warn!("skipping incomplete cells: {}", skipped.join(", "));
    }
    let by = |axis: Axis| -> BTreeMap<String, f64> {
        let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for c in &cells {
            let name = match axis {
                Axis::Model => &c.model,
                Axis::Task => &c.task,
                Axis::Criterion => &c.criterion,
            };
            groups.entry(name.clone()).or_default().push(c.terms.value);
        }
        groups.into_iter().map(|(k, v)| (k, mean_open(&v))).collect()
    };
    Ok(HlmReport {
        std_divisor: cfg.std_divisor,
        models: by(Axis::Model),
        tasks: by(Axis::Task),
        criteria: by(Axis::Criterion),
        cells,
        skipped,
    })
}

impl HlmReport {
    pub fn cell(&self, task: &str, criterion: &str, model: &str) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.task == task && c.criterion == criterion && c.model == model)
    }

    /// Distinct task names, sorted.
    pub fn task_names(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        self.cells
            .iter()
            .filter(|c| seen.insert(c.task.clone()))
            .map(|c| c.task.clone())
            .collect()
    }

    /// Heatmap matrix: one row per (model, criterion), one column per task.
    pub fn heatmap_csv(&self) -> String {
        let tasks = self.task_names();
        let mut rows: BTreeSet<(String, String)> = BTreeSet::new();
        for c in &self.cells {
            rows.insert((c.model.clone(), c.criterion.clone()));
        }
        let mut out = String::from("model,criterion");
        for t in &tasks {
            out.push(',');
            out.push_str(t);
        }
        out.push('\n');
        for (model, criterion) in rows {
            out.push_str(&format!("{model},{criterion}"));
            for t in &tasks {
                out.push(',');
                if let Some(c) = self.cell(t, &criterion, &model) {
                    out.push_str(&format!("{:.6}", c.terms.value));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let indices = self
            .models
            .values()
            .chain(self.tasks.values())
            .chain(self.criteria.values());
        for v in indices.chain(self.cells.iter().map(|c| &c.terms.value)) {
            if v.is_nan() || v.abs() >= 1.0 {
                return Err(Error::invalid(format!("index value {v} outside (-1, 1)")));
            }
        }
        for c in &self.cells {
            if ![0.0, 0.375, 0.75].contains(&c.terms.s.abs()) {
                return Err(Error::invalid(format!(
                    "logical score {} is not an allowed value",
                    c.terms.s
                )));
            }
        }
        Ok(())
    }
}
