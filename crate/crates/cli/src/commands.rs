use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use clap::Args;
use serde::{Deserialize, Serialize};

use hlmkit::experiment::{
    convergence_step, load_log, load_manifest, make_schedule, transfer_scores, transfer_scores_by_model, ScheduleOrder,
};
use hlmkit::formats::{load_corpus, load_neural_scores, load_scores};
use hlmkit::hlm::{hlm_report, load_cube, HlmConfig, HlmReport, StdDivisor};
use hlmkit::splitkit::{score_corpus, tertile_split, Criterion, DifficultySplit, ScoringContext};
use hlmkit::surprisal::{import_surprisals, read_surprisals, token_surprisals, train_lm, NgramModel};
use hlmkit::svg::{curves_svg, heatmap_svg, Curve};
use hlmkit::uid::Aggregation;
use hlmkit::{Error, LogBase, Schedule, TrainingLog, UidSlConfig, UidVarConfig};

use crate::output::{read_json, write_bytes, write_json, write_jsonl};
use crate::{Ctx, OutArg};

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Error::Validation(msg.into()).into()
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Corpus JSONL with `id` and `text` fields.
    #[arg(long)]
    corpus: PathBuf,
    /// flesch, uid_sl, uid_var or neural.
    #[arg(long)]
    criterion: Criterion,
    /// Trained n-gram model (JSON) used for surprisal-based criteria.
    #[arg(long)]
    lm: Option<PathBuf>,
    /// Precomputed surprisal JSONL; used instead of `--lm` where present.
    #[arg(long)]
    surprisals: Option<PathBuf>,
    /// Neural difficulty score JSONL.
    #[arg(long)]
    neural: Option<PathBuf>,
    /// Super-linearity exponent for uid_sl [default: 1.25].
    #[arg(long)]
    k: Option<f64>,
    /// Mean surprisal subtracted by uid_var [default: 3.8845].
    #[arg(long)]
    mu_lang: Option<f64>,
    /// Surprisal log base, 2 or e [default: 2].
    #[arg(long)]
    base: Option<LogBase>,
    /// concatenate or sentence_mean [default: concatenate].
    #[arg(long, value_parser = parse_aggregation)]
    aggregation: Option<Aggregation>,
    #[command(flatten)]
    out: OutArg,
}

fn parse_aggregation(s: &str) -> Result<Aggregation, String> {
    match s {
        "concatenate" => Ok(Aggregation::Concatenate),
        "sentence_mean" => Ok(Aggregation::SentenceMean),
        other => Err(format!("expected concatenate or sentence_mean, got {other:?}")),
    }
}

pub fn score(ctx: &Ctx, a: ScoreArgs) -> anyhow::Result<()> {
    let uid = &ctx.file.uid;
    let corpus = load_corpus(&a.corpus)?;
    let lm = a.lm.as_deref().map(NgramModel::load).transpose()?;
    let surprisals: Option<HashMap<_, _>> = match &a.surprisals {
        Some(p) => Some(
            import_surprisals(p)?
                .into_iter()
                .map(|s| (s.doc_id.clone(), s))
                .collect(),
        ),
        None => None,
    };
    let neural: Option<HashMap<_, _>> = match &a.neural {
        Some(p) => Some(load_neural_scores(p)?.into_iter().map(|s| (s.id.clone(), s)).collect()),
        None => None,
    };
    let scoring = ScoringContext {
        flesch: ctx.file.flesch.unwrap_or_default(),
        uid_sl: UidSlConfig::new(a.k.or(uid.k).unwrap_or(UidSlConfig::default().k))?,
        uid_var: UidVarConfig::new(a.mu_lang.or(uid.mu_lang).unwrap_or(UidVarConfig::default().mu_lang))?,
        base: a.base.or(uid.base).unwrap_or_default(),
        aggregation: a.aggregation.or(uid.aggregation).unwrap_or_default(),
        lm: lm.as_ref(),
        surprisals: surprisals.as_ref(),
        neural: neural.as_ref(),
    };
    let scores = score_corpus(&corpus, a.criterion, &scoring)?;
    write_jsonl(&a.out.out, &scores)?;
    if ctx.validate {
        let back = load_scores(&a.out.out)?;
        if back.len() != corpus.len() {
            return Err(invalid(format!(
                "{} score lines for {} documents",
                back.len(),
                corpus.len()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Scored corpus JSONL written by `score`.
    #[arg(long)]
    scores: PathBuf,
    #[command(flatten)]
    out: OutArg,
}

pub fn split(ctx: &Ctx, a: SplitArgs) -> anyhow::Result<()> {
    let scores = load_scores(&a.scores)?;
    let split = tertile_split(&scores)?;
    write_json(&a.out.out, &split)?;
    if ctx.validate {
        let back: DifficultySplit = read_json(&a.out.out)?;
        back.validate()?;
        if back.len() != scores.len() {
            return Err(invalid("split does not cover every scored document"));
        }
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct LmTrainArgs {
    /// Corpus JSONL.
    #[arg(long)]
    corpus: PathBuf,
    /// N-gram order, 1 to 3 [default: 3].
    #[arg(long)]
    order: Option<usize>,
    /// Absolute discount in (0, 1) [default: 0.75].
    #[arg(long)]
    discount: Option<f64>,
    #[command(flatten)]
    out: OutArg,
}

pub fn lm_train(ctx: &Ctx, a: LmTrainArgs) -> anyhow::Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let order = a.order.or(ctx.file.lm.order).unwrap_or(3);
    let discount = a.discount.or(ctx.file.lm.discount).unwrap_or(0.75);
    let model = train_lm(&corpus, order, discount)?;
    log::info!("vocabulary of {} types", model.vocabulary().len());
    write_bytes(&a.out.out, model.to_json().as_bytes())?;
    if ctx.validate {
        let back = NgramModel::load(&a.out.out)?;
        for context in model.contexts() {
            let total: f64 = back.vocabulary().iter().map(|w| back.prob(&context, w)).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(invalid(format!("distribution after {context:?} sums to {total}")));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct SurprisalArgs {
    /// Corpus JSONL.
    #[arg(long)]
    corpus: PathBuf,
    /// Trained n-gram model (JSON).
    #[arg(long)]
    lm: PathBuf,
    /// 2 or e [default: 2].
    #[arg(long)]
    base: Option<LogBase>,
    #[command(flatten)]
    out: OutArg,
}

pub fn surprisal(ctx: &Ctx, a: SurprisalArgs) -> anyhow::Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let model = NgramModel::load(&a.lm)?;
    let base = a.base.or(ctx.file.uid.base).unwrap_or_default();
    let seqs = corpus
        .iter()
        .map(|d| token_surprisals(&model, d, base))
        .collect::<hlmkit::Result<Vec<_>>>()?;
    write_jsonl(&a.out.out, &seqs)?;
    if ctx.validate {
        let file = std::fs::File::open(&a.out.out).map_err(|e| Error::io(&a.out.out, e))?;
        read_surprisals(std::io::BufReader::new(file), &a.out.out.display().to_string())?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct HlmArgs {
    /// Performance table CSV.
    #[arg(long)]
    cube: PathBuf,
    /// population or sample [default: population].
    #[arg(long)]
    std_divisor: Option<StdDivisor>,
    /// Directory receiving hlm_report.json, hlm_heatmap.csv and hlm_heatmap.svg.
    #[arg(long)]
    out_dir: PathBuf,
}

fn hlm_config(ctx: &Ctx, flag: Option<StdDivisor>) -> HlmConfig {
    HlmConfig {
        std_divisor: flag.or(ctx.file.hlm.std_divisor).unwrap_or_default(),
    }
}

pub fn hlm(ctx: &Ctx, a: HlmArgs) -> anyhow::Result<()> {
    let cube = load_cube(&a.cube)?;
    let report = hlm_report(&cube, &hlm_config(ctx, a.std_divisor))?;
    let json = a.out_dir.join("hlm_report.json");
    write_json(&json, &report)?;
    write_bytes(&a.out_dir.join("hlm_heatmap.csv"), report.heatmap_csv().as_bytes())?;
    write_bytes(&a.out_dir.join("hlm_heatmap.svg"), heatmap_svg(&report).as_bytes())?;
    if ctx.validate {
        let back: HlmReport = read_json(&json)?;
        back.validate()?;
    }
    for (name, v) in &report.models {
        println!("model\t{name}\t{v:.6}");
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    /// Split JSON written by `split`.
    #[arg(long)]
    split: PathBuf,
    /// easy_to_hard, hard_to_easy or random [default: easy_to_hard].
    #[arg(long)]
    order: Option<ScheduleOrder>,
    /// Seed for the random order [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutArg,
}

pub fn schedule(ctx: &Ctx, a: ScheduleArgs) -> anyhow::Result<()> {
    let split: DifficultySplit = read_json(&a.split)?;
    split.validate()?;
    let order = a.order.or(ctx.file.schedule.order).unwrap_or(ScheduleOrder::EasyToHard);
    let seed = a.seed.or(ctx.file.schedule.seed).unwrap_or(0);
    let sched = make_schedule(&split, order, seed);
    write_json(&a.out.out, &sched)?;
    if ctx.validate {
        let back: Schedule = read_json(&a.out.out)?;
        let mut got = back.sequence.clone();
        let mut want: Vec<&String> = split.easy.iter().chain(&split.medium).chain(&split.hard).collect();
        got.sort();
        want.sort();
        if got.iter().ne(want) {
            return Err(invalid("schedule is not a permutation of the split"));
        }
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    /// Run manifest JSON listing `step,value` logs.
    #[arg(long)]
    manifest: PathBuf,
    /// Relative distance to the best value counted as converged [default: 0.001].
    #[arg(long)]
    epsilon: Option<f64>,
    /// Moving-average window applied before measuring [default: 1, no smoothing].
    #[arg(long)]
    smooth: Option<usize>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Serialize, Deserialize)]
struct ConvergenceRow {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<ScheduleOrder>,
    higher_is_better: bool,
    best: f64,
    convergence_step: u64,
    last_step: u64,
    ratio: f64,
}

struct LoadedRun {
    name: String,
    order: Option<ScheduleOrder>,
    log: TrainingLog,
}

fn load_runs(manifest: &Path, smooth: usize) -> anyhow::Result<Vec<LoadedRun>> {
    let m = load_manifest(manifest)?;
    let dir = manifest.parent().unwrap_or(Path::new("."));
    m.runs
        .into_iter()
        .map(|r| {
            let log = load_log(&dir.join(&r.log), r.higher_is_better).with_context(|| format!("run {:?}", r.name))?;
            Ok(LoadedRun {
                name: r.name,
                order: r.order,
                log: if smooth > 1 { log.smoothed(smooth) } else { log },
            })
        })
        .collect()
}

fn convergence_rows(runs: &[LoadedRun], eps: f64) -> hlmkit::Result<Vec<ConvergenceRow>> {
    runs.iter()
        .map(|r| {
            let step = convergence_step(&r.log, eps)?;
            Ok(ConvergenceRow {
                name: r.name.clone(),
                order: r.order,
                higher_is_better: r.log.higher_is_better,
                best: r.log.best(),
                convergence_step: step,
                last_step: r.log.last_step(),
                ratio: step as f64 / r.log.last_step() as f64,
            })
        })
        .collect()
}

pub fn converge(ctx: &Ctx, a: ConvergeArgs) -> anyhow::Result<()> {
    let eps = a.epsilon.or(ctx.file.converge.epsilon_rel).unwrap_or(0.001);
    let smooth = a.smooth.or(ctx.file.converge.smooth).unwrap_or(1);
    let runs = load_runs(&a.manifest, smooth)?;
    let rows = convergence_rows(&runs, eps)?;
    write_json(&a.out.out, &rows)?;
    if ctx.validate {
        let back: Vec<ConvergenceRow> = read_json(&a.out.out)?;
        if let Some(bad) = back.iter().find(|r| !(r.ratio > 0.0 && r.ratio <= 1.0)) {
            return Err(invalid(format!(
                "run {:?} has ratio {} outside (0, 1]",
                bad.name, bad.ratio
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    /// Performance table CSV with per-level evaluation rows.
    #[arg(long)]
    cube: PathBuf,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Serialize, Deserialize)]
struct TransferOutput {
    /// `scores[train][eval]` pooled over every complete group.
    scores: [[f64; 3]; 3],
    column_sums: [f64; 3],
    by_model: BTreeMap<String, [[f64; 3]; 3]>,
    groups: Vec<String>,
    skipped: Vec<String>,
}

pub fn transfer(ctx: &Ctx, a: TransferArgs) -> anyhow::Result<()> {
    let cube = load_cube(&a.cube)?;
    let all = transfer_scores(&cube)?;
    let by_model = transfer_scores_by_model(&cube)?;
    let out = TransferOutput {
        scores: all.scores,
        column_sums: all.column_sums(),
        by_model: by_model.into_iter().map(|(k, m)| (k, m.scores)).collect(),
        groups: all.groups.iter().map(|g| g.group.clone()).collect(),
        skipped: all.skipped.clone(),
    };
    write_json(&a.out.out, &out)?;
    if ctx.validate {
        let back: TransferOutput = read_json(&a.out.out)?;
        let matrices = std::iter::once(&back.scores).chain(back.by_model.values());
        for m in matrices {
            for eval in 0..3 {
                let sum: f64 = m.iter().map(|row| row[eval]).sum();
                if (sum - 6.0).abs() > 1e-9 {
                    return Err(invalid(format!("transfer column {eval} sums to {sum}")));
                }
            }
        }
    }
    for (row, name) in out.scores.iter().zip(["easy", "medium", "hard"]) {
        println!("{name}\t{:.3}\t{:.3}\t{:.3}", row[0], row[1], row[2]);
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Performance table CSV for the HLM heatmap.
    #[arg(long)]
    cube: Option<PathBuf>,
    /// Run manifest for learning curves.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Title of the learning-curve chart.
    #[arg(long, default_value = "Learning curves")]
    title: String,
    #[arg(long)]
    std_divisor: Option<StdDivisor>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    smooth: Option<usize>,
    /// Directory receiving report.md and the SVG files.
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn report(ctx: &Ctx, a: ReportArgs) -> anyhow::Result<()> {
    if a.cube.is_none() && a.manifest.is_none() {
        return Err(invalid("report needs --cube, --manifest or both"));
    }
    let mut md = String::from("# hlmkit report\n");
    if let Some(path) = &a.cube {
        let report = hlm_report(&load_cube(path)?, &hlm_config(ctx, a.std_divisor))?;
        write_bytes(&a.out_dir.join("hlm_heatmap.svg"), heatmap_svg(&report).as_bytes())?;
        md.push_str("\n## HLM indices\n\n![heatmap](hlm_heatmap.svg)\n");
        for (title, map) in [
            ("Model", &report.models),
            ("Task", &report.tasks),
            ("Criterion", &report.criteria),
        ] {
            let _ = write!(md, "\n| {title} | index |\n|---|---|\n");
            for (name, v) in map {
                let _ = writeln!(md, "| {name} | {v:.4} |");
            }
        }
        if !report.skipped.is_empty() {
            let _ = writeln!(md, "\nSkipped (incomplete): {}", report.skipped.join(", "));
        }
    }
    if let Some(path) = &a.manifest {
        let eps = a.epsilon.or(ctx.file.converge.epsilon_rel).unwrap_or(0.001);
        let runs = load_runs(path, a.smooth.or(ctx.file.converge.smooth).unwrap_or(1))?;
        let rows = convergence_rows(&runs, eps)?;
        let curves: Vec<Curve<'_>> = runs
            .iter()
            .zip(&rows)
            .map(|(r, row)| Curve {
                name: &r.name,
                log: &r.log,
                convergence_step: Some(row.convergence_step),
            })
            .collect();
        write_bytes(&a.out_dir.join("curves.svg"), curves_svg(&a.title, &curves).as_bytes())?;
        let _ = write!(
            md,
            "\n## Convergence (epsilon {eps})\n\n![curves](curves.svg)\n\n| run | best | step | last | ratio |\n|---|---|---|---|---|\n"
        );
        for r in &rows {
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {:.4} |",
                r.name, r.best, r.convergence_step, r.last_step, r.ratio
            );
        }
    }
    write_bytes(&a.out_dir.join("report.md"), md.as_bytes())?;
    Ok(())
}
