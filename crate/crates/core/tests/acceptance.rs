//! Acceptance suite. One test per criterion; each prints a PASS/FAIL line
//! (run with `--nocapture` to see them).

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use hlmkit::experiment::{convergence_ratio, convergence_step, transfer_scores, TrainingLog};
use hlmkit::hlm::{
    cell_value, hlm_report, load_cube, logical_score, EvalLevel, HlmConfig, PerformanceCube, PerformanceRow,
    PerformanceTriplet,
};
use hlmkit::splitkit::{tertile_sizes, tertile_split, Criterion, DifficultyScore, Level};
use hlmkit::surprisal::train_lm;
use hlmkit::textstat::{flesch_score, Document, FleschConfig, TextStats};
use hlmkit::uid::{uid_superlinear, uid_variance, UidSlConfig, UidVarConfig};

use common::{fixture, score_by_permutation, NaiveKneserNey};

fn report(id: &str, name: &str, ok: bool, detail: impl AsRef<str>) {
    println!(
        "[{}] {id} {name}: {}",
        if ok { "PASS" } else { "FAIL" },
        detail.as_ref()
    );
    assert!(ok, "{id} {name} failed: {}", detail.as_ref());
}

fn published_cube() -> PerformanceCube {
    load_cube(&fixture("published_performance.csv")).expect("published performance fixture loads")
}

fn published_triplets(cube: &PerformanceCube) -> Vec<(String, String, String, PerformanceTriplet)> {
    cube.cells()
        .filter_map(|(k, _)| {
            cube.triplet(k)
                .map(|t| (k.task.clone(), k.criterion.clone(), k.model.clone(), t))
        })
        .collect()
}

#[test]
fn criterion_01_published_logical_scores() {
    let start = Instant::now();
    let cube = published_cube();
    let triplets = published_triplets(&cube);
    let mut mismatches = Vec::new();
    for (task, crit, model, t) in &triplets {
        assert!(
            t.easy != t.medium && t.medium != t.hard && t.easy != t.hard,
            "tie in {task}/{crit}/{model}"
        );
        let expected = score_by_permutation(t.easy, t.medium, t.hard, t.higher_is_better);
        if logical_score(t) != expected {
            mismatches.push(format!("{task}/{crit}/{model}"));
        }
    }
    let get = |task: &str, crit: &str, model: &str| {
        let (_, _, _, t) = triplets
            .iter()
            .find(|(a, b, c, _)| a == task && b == crit && c == model)
            .unwrap();
        logical_score(t)
    };
    let anchors = [
        get("SST2", "Flesch", "BERT") == 0.0,
        get("ROC", "UID-SL", "LSTM") == 0.375,
        get("WT2", "Flesch", "BERT") == -0.75,
    ];
    let elapsed = start.elapsed();
    let ok =
        triplets.len() == 72 && mismatches.is_empty() && anchors.iter().all(|&a| a) && elapsed < Duration::from_secs(1);
    report(
        "#1",
        "logical scores on the published performance table",
        ok,
        format!(
            "{} triplets, {} mismatches {:?}, anchors {:?}, {:?}",
            triplets.len(),
            mismatches.len(),
            mismatches,
            anchors,
            elapsed
        ),
    );
}

#[test]
fn criterion_02_wt2_heatmap_cells() {
    let start = Instant::now();
    let report_ = hlm_report(&published_cube(), &HlmConfig::default()).unwrap();
    let mut details = Vec::new();
    let mut ok = true;
    for crit in ["UID-SL", "UID-Var", "Neural"] {
        for model in ["BERT", "LSTM"] {
            let v = report_.cell("WT2", crit, model).unwrap().terms.value;
            ok &= v >= 0.99;
            details.push(format!("{crit}/{model}={v:.6}"));
        }
    }
    let flesch = report_.cell("WT2", "Flesch", "BERT").unwrap().terms.value;
    ok &= flesch <= -0.99;
    details.push(format!("Flesch/BERT={flesch:.6}"));
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(1);
    report(
        "#2",
        "WT2 heatmap cells",
        ok,
        format!("{} ({elapsed:?})", details.join(", ")),
    );
}

fn random_value(rng: &mut StdRng) -> f64 {
    match rng.gen_range(0..5) {
        0 => rng.gen_range(0.0..1.0),
        1 => rng.gen_range(40.0..100.0),
        2 => rng.gen_range(50.0..800.0),
        3 => f64::from(rng.gen_range(0..3)),
        _ => rng.gen_range(-1e4..1e4),
    }
}

#[test]
fn criterion_03_hlm_bounds() {
    let mut rng = StdRng::seed_from_u64(3);
    let cfg = HlmConfig::default();
    let mut violations = 0;
    for _ in 0..10_000 {
        let t = PerformanceTriplet::new(
            random_value(&mut rng),
            random_value(&mut rng),
            random_value(&mut rng),
            rng.gen(),
        );
        let s = logical_score(&t);
        let v = cell_value(&t, &cfg);
        let sign = |x: f64| {
            if x > 0.0 {
                1
            } else if x < 0.0 {
                -1
            } else {
                0
            }
        };
        let inside = v > -1.0 && v < 1.0;
        let same_sign = sign(v) == sign(s);
        let zero_gate = (s == 0.0) == (v == 0.0);
        if !(inside && same_sign && zero_gate) {
            violations += 1;
        }
    }
    report(
        "#3",
        "HLM cell bounds",
        violations == 0,
        format!("10000 triplets, {violations} violations"),
    );
}

#[test]
fn criterion_04_flesch_exactness() {
    let cfg = FleschConfig::default();
    let cases = [((1, 1, 1), 121.22), ((1, 3, 3), 119.19), ((2, 20, 30), 69.785)];
    let mut worst: f64 = 0.0;
    for ((s, w, l), expected) in cases {
        let got = flesch_score(&TextStats::new(s, w, l), &cfg).unwrap();
        worst = worst.max((got - expected).abs());
    }
    report("#4", "Flesch hand cases", worst <= 1e-6, format!("max error {worst:e}"));
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn criterion_05_uid_oracles() {
    let mut rng = StdRng::seed_from_u64(5);
    let sl = UidSlConfig::default();
    let var = UidVarConfig::default();
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=32);
        let seq: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..20.0)).collect();
        let mut direct_sl = 0.0;
        let mut direct_var = 0.0;
        for &s in &seq {
            direct_sl += s.powf(1.25);
            direct_var += (s - 3.8845) * (s - 3.8845);
        }
        direct_sl /= n as f64;
        direct_var /= n as f64;
        if !close(uid_superlinear(&seq, &sl).unwrap(), direct_sl, 1e-12)
            || !close(uid_variance(&seq, &var).unwrap(), direct_var, 1e-12)
        {
            mismatches += 1;
        }
    }

    // For k > 1, the uniform sequence minimises UID-SL among all sequences
    // with the same length and sum.
    let grid: Vec<f64> = (0..=8).map(|i| f64::from(i) * 0.5).collect();
    let mut minimality_failures = 0;
    let mut checked = 0;
    for k in [1.25, 2.0] {
        let cfg = UidSlConfig::new(k).unwrap();
        for n in 1..=4usize {
            let total = grid.len().pow(n as u32);
            for code in 0..total {
                let mut c = code;
                let seq: Vec<f64> = (0..n)
                    .map(|_| {
                        let v = grid[c % grid.len()];
                        c /= grid.len();
                        v
                    })
                    .collect();
                let sum: f64 = seq.iter().sum();
                let uniform = vec![sum / n as f64; n];
                checked += 1;
                if uid_superlinear(&seq, &cfg).unwrap() < uid_superlinear(&uniform, &cfg).unwrap() - 1e-12 {
                    minimality_failures += 1;
                }
            }
        }
    }
    report(
        "#5",
        "UID oracle equivalence and minimality",
        mismatches == 0 && minimality_failures == 0,
        format!("1000 sequences, {mismatches} mismatches; {checked} grid sequences, {minimality_failures} minimality failures"),
    );
}

#[test]
fn criterion_06_lm_normalisation_and_oracle() {
    let mut rng = StdRng::seed_from_u64(6);
    let letters = ["a", "b", "c", "d", "e", "f", "g"];
    let mut worst_sum: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    let mut distributions = 0;
    for trial in 0..150 {
        let vocab_size = rng.gen_range(1..=letters.len());
        let mut budget = rng.gen_range(1..=20usize);
        let mut texts = Vec::new();
        while budget > 0 {
            let len = rng.gen_range(1..=budget.min(6));
            budget -= len;
            let words: Vec<&str> = (0..len).map(|_| letters[rng.gen_range(0..vocab_size)]).collect();
            texts.push(words.join(" "));
        }
        let order = rng.gen_range(1..=3);
        let discount = rng.gen_range(0.05..0.95);
        let docs: Vec<Document> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Document::new(format!("t{trial}d{i}"), t.clone()).unwrap())
            .collect();
        let model = train_lm(&docs, order, discount).unwrap();
        let oracle = NaiveKneserNey::new(&texts, order, discount);
        assert!(model.vocabulary().len() <= 10);

        let mut contexts: Vec<Vec<String>> = model
            .contexts()
            .into_iter()
            .map(|c| c.into_iter().map(str::to_string).collect())
            .collect();
        contexts.push(vec!["zzz".into(), "a".into()]);
        contexts.push(vec!["<s>".into()]);
        for ctx in &contexts {
            let ctx: Vec<&str> = ctx.iter().map(String::as_str).collect();
            let mut sum = 0.0;
            for w in model.vocabulary() {
                let p = model.prob(&ctx, w);
                sum += p;
                worst_oracle = worst_oracle.max((p - oracle.prob(&ctx, w)).abs());
            }
            worst_sum = worst_sum.max((sum - 1.0).abs());
            distributions += 1;
        }
    }
    report(
        "#6",
        "LM normalisation and Kneser-Ney oracle",
        worst_sum <= 1e-9 && worst_oracle <= 1e-9,
        format!("{distributions} distributions, max |sum-1| {worst_sum:e}, max oracle diff {worst_oracle:e}"),
    );
}

#[test]
fn criterion_07_split_properties() {
    let mut rng = StdRng::seed_from_u64(7);
    let mut failures = Vec::new();
    for trial in 0..500 {
        let n = if trial < 20 { 3 + trial } else { rng.gen_range(3..=1000) };
        let higher_is_harder = rng.gen();
        let coarse = rng.gen_bool(0.3);
        let scores: Vec<DifficultyScore> = (0..n)
            .map(|i| DifficultyScore {
                doc_id: format!("doc{i:04}"),
                criterion: if higher_is_harder {
                    Criterion::UidSl
                } else {
                    Criterion::Flesch
                },
                value: if coarse {
                    f64::from(rng.gen_range(0..5))
                } else {
                    rng.gen_range(-50.0..150.0)
                },
                higher_is_harder,
            })
            .collect();
        let split = tertile_split(&scores).unwrap();
        let hardness: BTreeMap<&str, f64> = scores.iter().map(|s| (s.doc_id.as_str(), s.hardness())).collect();

        let mut all: Vec<&String> = split.easy.iter().chain(&split.medium).chain(&split.hard).collect();
        all.sort();
        all.dedup();
        let partition = all.len() == n && split.len() == n;

        let sizes = [split.easy.len(), split.medium.len(), split.hard.len()];
        let near_equal =
            sizes == tertile_sizes(n) && sizes[0] >= sizes[1] && sizes[1] >= sizes[2] && sizes[2] + 1 >= sizes[0];

        let max_of = |ids: &[String]| {
            ids.iter()
                .map(|i| hardness[i.as_str()])
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let min_of = |ids: &[String]| ids.iter().map(|i| hardness[i.as_str()]).fold(f64::INFINITY, f64::min);
        let ordered = max_of(&split.easy) <= min_of(&split.medium)
            && max_of(&split.medium) <= min_of(&split.hard)
            && max_of(&split.easy) <= min_of(&split.hard);

        let again = tertile_split(&scores).unwrap();
        let deterministic = serde_json::to_vec(&split).unwrap() == serde_json::to_vec(&again).unwrap();

        if !(partition && near_equal && ordered && deterministic) {
            failures.push(format!(
                "n={n}: partition={partition} sizes={near_equal} ordered={ordered} det={deterministic}"
            ));
        }
    }
    report(
        "#7",
        "tertile split properties",
        failures.is_empty(),
        format!("500 corpora, failures: {failures:?}"),
    );
}

fn synthetic_cube(rng: &mut StdRng, groups: usize, tie_prob: f64) -> PerformanceCube {
    let mut rows = Vec::new();
    for g in 0..groups {
        let higher_is_better = rng.gen();
        for train in Level::ALL {
            for eval in Level::ALL {
                let value = if rng.gen_bool(tie_prob) {
                    50.0
                } else {
                    rng.gen_range(0.0..100.0)
                };
                rows.push(PerformanceRow {
                    task: format!("task{g}"),
                    criterion: "uid_sl".into(),
                    model: "m".into(),
                    train_level: train,
                    eval_level: EvalLevel::from(eval),
                    metric: "metric".into(),
                    value,
                    higher_is_better,
                });
            }
        }
    }
    PerformanceCube::from_rows(rows).unwrap()
}

#[test]
fn criterion_08a_transfer_column_sums() {
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for trial in 0..300 {
        let cube = synthetic_cube(&mut rng, 1 + trial % 12, if trial % 2 == 0 { 0.0 } else { 0.5 });
        let m = transfer_scores(&cube).unwrap();
        for s in m.column_sums() {
            worst = worst.max((s - 6.0).abs());
        }
    }
    // Two-way tie for best in a single group: 2.5, 2.5, 1.
    let mut rows = Vec::new();
    for train in Level::ALL {
        for eval in Level::ALL {
            rows.push(PerformanceRow {
                task: "t".into(),
                criterion: "c".into(),
                model: "m".into(),
                train_level: train,
                eval_level: EvalLevel::from(eval),
                metric: "acc".into(),
                value: if train == Level::Hard { 0.1 } else { 0.9 },
                higher_is_better: true,
            });
        }
    }
    let tie = transfer_scores(&PerformanceCube::from_rows(rows).unwrap()).unwrap();
    let tie_ok =
        tie.scores[0][0] == 2.5 && tie.scores[1][0] == 2.5 && tie.scores[2][0] == 1.0 && tie.column_sums() == [6.0; 3];
    report(
        "#8a",
        "transfer column sums on synthetic cubes",
        worst <= 1e-9 && tie_ok,
        format!("300 cubes, max |sum-6| {worst:e}, tie case {:?}", tie.scores),
    );
}

#[test]
fn criterion_08b_published_transfer_column_sums() {
    let text = std::fs::read_to_string(fixture("published_transfer.csv")).unwrap();
    let mut sums: BTreeMap<(String, usize), f64> = BTreeMap::new();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        for col in 0..3 {
            *sums.entry((fields[0].to_string(), col)).or_insert(0.0) += fields[2 + col].parse::<f64>().unwrap();
        }
    }
    let off: Vec<String> = sums
        .iter()
        .filter(|(_, s)| (*s - 6.0).abs() > 0.01 + 1e-9)
        .map(|((model, col), s)| format!("{model} {} column sums to {s:.2}", ["easy", "medium", "hard"][*col]))
        .collect();
    report(
        "#8b",
        "published transfer columns sum to 6.0 +/- 0.01",
        off.is_empty(),
        format!("{} columns checked; off: {off:?}", sums.len()),
    );
}

#[test]
fn criterion_09_convergence() {
    let log = TrainingLog::new(vec![(1, 0.5), (2, 0.9), (3, 0.9), (4, 0.9)], true).unwrap();
    let flat = TrainingLog::new(vec![(1, 0.8), (2, 0.8)], true).unwrap();
    let ppl = TrainingLog::new(vec![(1, 300.0), (2, 200.0), (3, 199.9)], false).unwrap();
    let cases = [
        convergence_ratio(&log, 0.001).unwrap() == 0.5,
        convergence_ratio(&flat, 0.001).unwrap() == 0.5,
        // 200.0 <= 199.9 * 1.001, so step 2 already counts as converged.
        convergence_ratio(&ppl, 0.001).unwrap() == 2.0 / 3.0,
        convergence_ratio(&ppl, 0.0001).unwrap() == 1.0,
    ];

    let mut rng = StdRng::seed_from_u64(9);
    let mut violations = 0;
    let mut checked = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..40);
        let higher_is_better = rng.gen();
        let mut step = 0u64;
        let steps: Vec<(u64, f64)> = (0..n)
            .map(|_| {
                step += rng.gen_range(1..50);
                (
                    step,
                    if rng.gen_bool(0.2) {
                        10.0
                    } else {
                        rng.gen_range(0.0..20.0)
                    },
                )
            })
            .collect();
        let full = TrainingLog::new(steps.clone(), higher_is_better).unwrap();
        let eps = rng.gen_range(1e-4..0.2);
        let ratio = convergence_ratio(&full, eps).unwrap();
        if !(ratio > 0.0 && ratio <= 1.0) {
            violations += 1;
        }
        let best = full.best();
        let first_best = steps.iter().position(|&(_, v)| v == best).unwrap();
        for cut in first_best.max(1)..n {
            let truncated = TrainingLog::new(steps[..=cut].to_vec(), higher_is_better).unwrap();
            checked += 1;
            if convergence_ratio(&truncated, eps).unwrap() < ratio
                || convergence_step(&truncated, eps).unwrap() != convergence_step(&full, eps).unwrap()
            {
                violations += 1;
            }
        }
    }
    report(
        "#9",
        "convergence ratio cases and monotonicity",
        cases.iter().all(|&c| c) && violations == 0,
        format!("cases {cases:?}; 1000 logs, {checked} truncations, {violations} violations"),
    );
}

#[test]
fn criterion_10_model_results_are_ingested_not_reproduced() {
    let cube = published_cube();
    let rows = cube.rows();
    let full_only = rows.iter().all(|r| r.eval_level == EvalLevel::Full);
    let ok = rows.len() == 216 && cube.len() == 72 && full_only;
    report(
        "#10",
        "model results enter as an ingested fixture (no model training here)",
        ok,
        format!(
            "{} rows / {} cells loaded from fixtures/published_performance.csv",
            rows.len(),
            cube.len()
        ),
    );
}
