//! Browser bindings. Each export returns a JSON (or SVG) string; errors come
//! back as a thrown JS string carrying the library error message.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use hlmkit::hlm::{cell_terms, hlm_report, read_cube_csv, CellTerms, HlmConfig, StdDivisor};
use hlmkit::splitkit::{score_corpus, tertile_split, Criterion, Level, ScoringContext};
use hlmkit::svg::heatmap_svg;
use hlmkit::{train_lm, Document, PerformanceTriplet, UidSlConfig, UidVarConfig};

const PUBLISHED: &str = include_str!("../../core/fixtures/published_performance.csv");

#[derive(Serialize)]
struct DocRow {
    id: String,
    text: String,
    flesch: f64,
    uid_sl: f64,
    uid_var: f64,
    level: Option<Level>,
}

#[derive(Serialize)]
struct Analysis {
    split_by: Criterion,
    vocabulary: usize,
    docs: Vec<DocRow>,
}

#[derive(Serialize)]
struct Heatmap {
    svg: String,
    models: std::collections::BTreeMap<String, f64>,
    tasks: std::collections::BTreeMap<String, f64>,
    criteria: std::collections::BTreeMap<String, f64>,
}

fn divisor(sample_std: bool) -> HlmConfig {
    HlmConfig {
        std_divisor: if sample_std {
            StdDivisor::Sample
        } else {
            StdDivisor::Population
        },
    }
}

/// One document per non-blank line. Trains an n-gram model on the lines
/// themselves, scores every line under all three text criteria, and splits
/// by `split_by` when there are at least three lines.
pub fn analyze(text: &str, order: usize, k: f64, mu_lang: f64, split_by: &str) -> hlmkit::Result<String> {
    let docs = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| Document::new(format!("line {}", i + 1), l.trim()))
        .collect::<hlmkit::Result<Vec<_>>>()?;
    if docs.is_empty() {
        return Err(hlmkit::Error::EmptyCorpus);
    }
    let split_by: Criterion = split_by.parse()?;
    let lm = train_lm(&docs, order, 0.75)?;
    let ctx = ScoringContext {
        uid_sl: UidSlConfig::new(k)?,
        uid_var: UidVarConfig::new(mu_lang)?,
        lm: Some(&lm),
        ..Default::default()
    };
    let flesch = score_corpus(&docs, Criterion::Flesch, &ctx)?;
    let uid_sl = score_corpus(&docs, Criterion::UidSl, &ctx)?;
    let uid_var = score_corpus(&docs, Criterion::UidVar, &ctx)?;
    let chosen = match split_by {
        Criterion::Flesch => &flesch,
        Criterion::UidSl => &uid_sl,
        Criterion::UidVar => &uid_var,
        Criterion::Neural => return Err(hlmkit::Error::Validation("the demo has no neural scores".into())),
    };
    let split = if docs.len() >= 3 {
        Some(tertile_split(chosen)?)
    } else {
        None
    };
    let rows = docs
        .into_iter()
        .enumerate()
        .map(|(i, d)| DocRow {
            level: split
                .as_ref()
                .and_then(|s| Level::ALL.into_iter().find(|&l| s.level(l).contains(&d.id))),
            id: d.id,
            text: d.text,
            flesch: flesch[i].value,
            uid_sl: uid_sl[i].value,
            uid_var: uid_var[i].value,
        })
        .collect();
    let out = Analysis {
        split_by,
        vocabulary: lm.vocabulary().len(),
        docs: rows,
    };
    Ok(serde_json::to_string(&out).expect("serialisable"))
}

pub fn cell(easy: f64, medium: f64, hard: f64, higher_is_better: bool, sample_std: bool) -> hlmkit::Result<CellTerms> {
    if ![easy, medium, hard].iter().all(|v| v.is_finite()) {
        return Err(hlmkit::Error::Validation("performance values must be finite".into()));
    }
    let t = PerformanceTriplet::new(easy, medium, hard, higher_is_better);
    Ok(cell_terms(&t, &divisor(sample_std)))
}

pub fn published_table(sample_std: bool) -> hlmkit::Result<String> {
    let cube = read_cube_csv(PUBLISHED.as_bytes(), "published_performance.csv")?;
    let report = hlm_report(&cube, &divisor(sample_std))?;
    let out = Heatmap {
        svg: heatmap_svg(&report),
        models: report.models,
        tasks: report.tasks,
        criteria: report.criteria,
    };
    Ok(serde_json::to_string(&out).expect("serialisable"))
}

fn js_err(e: hlmkit::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[wasm_bindgen]
pub fn analyze_corpus(text: &str, order: usize, k: f64, mu_lang: f64, split_by: &str) -> Result<String, JsValue> {
    analyze(text, order, k, mu_lang, split_by).map_err(js_err)
}

#[wasm_bindgen]
pub fn hlm_cell(
    easy: f64,
    medium: f64,
    hard: f64,
    higher_is_better: bool,
    sample_std: bool,
) -> Result<String, JsValue> {
    cell(easy, medium, hard, higher_is_better, sample_std)
        .map(|t| serde_json::to_string(&t).expect("serialisable"))
        .map_err(js_err)
}

#[wasm_bindgen]
pub fn published_heatmap(sample_std: bool) -> Result<String, JsValue> {
    published_table(sample_std).map_err(js_err)
}
