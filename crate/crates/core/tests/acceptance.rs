//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test --test acceptance`.

mod common;

use std::collections::HashSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use namegender::boosted_trees::{gbt_fit, GbtParams, TreeNode};
use namegender::char_lstm::{adam_step, AdamState, TENSOR_NAMES};
use namegender::classifier::Classifier;
use namegender::cli::{cmd_gen, cmd_gridsearch, RunConfig};
use namegender::corpus::{generate_synthetic, Gender, GeneratorConfig, SyntheticGenerator};
use namegender::eval_explain::{incremental_trace, run_experiment, EvalReport, ExperimentOutcome};
use namegender::features::{chi2_scores, FeatureMatrix, PaddedSequence};
use namegender::linear_models::nb_fit;
use namegender::pipeline::{fit_pipeline, FeatureSpec, Method, Variant};
use namegender::seed;
use rand::Rng;
use tempfile::TempDir;

const GRAD_DELTA: f64 = 1e-5;
const GRAD_MAX_REL_ERR: f64 = 1e-4;
const GRAD_TIME: Duration = Duration::from_secs(10);

const CHI2_FIXTURES: usize = 50;
const CHI2_REL_TOL: f64 = 1e-12;
const CHI2_TIME: Duration = Duration::from_secs(1);

const NB_FIXTURES: usize = 50;
const NB_TOL: f64 = 1e-12;
const NB_TIME: Duration = Duration::from_secs(1);

const STUMP_FIXTURES: usize = 50;
const STUMP_SAMPLES: usize = 20;
const STUMP_TIME: Duration = Duration::from_secs(5);

const ADAM_TOL: f64 = 1e-12;

const CONFUSION_MATRICES: usize = 1000;
const F1_TOL: f64 = 1e-12;

const E2E_SIZE: usize = 4000;
const E2E_MALE_FRACTION: f64 = 0.6656;
const E2E_SEED: u64 = 42;
const E2E_MIN_ACCURACY: f64 = 0.95;
const E2E_TIME: Duration = Duration::from_secs(600);

const MEMO_SIZE: usize = 200;
const MEMO_MIN_TRAIN_ACC: f64 = 0.99;
const MEMO_MAX_EPOCHS: usize = 20;
const MEMO_DIM: usize = 32;
const MEMO_TIME: Duration = Duration::from_secs(60);

const TRACE_NAMES: usize = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Suite {
    failures: usize,
}

impl Suite {
    fn check(&mut self, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let mut o = f();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > limit {
                o.pass = false;
                o.detail += &format!("; exceeded {limit:?}");
            }
        }
        println!(
            "{} {name}: {} [{:.2}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
        if !o.pass {
            self.failures += 1;
        }
    }
}

fn padded(seq: &[usize]) -> PaddedSequence {
    let pads = seq.iter().take_while(|&&i| i == 0).count();
    PaddedSequence {
        indices: seq.to_vec(),
        true_length: seq.len() - pads,
    }
}

fn gradient_oracle() -> Outcome {
    let (net, seqs, targets) = gradient_fixture();
    let padded_seqs: Vec<PaddedSequence> = seqs.iter().map(|s| padded(s)).collect();
    let refs: Vec<&PaddedSequence> = padded_seqs.iter().collect();
    let analytic = net.backward(&net.forward_batch(&refs).unwrap(), &targets).unwrap();
    let numeric = finite_difference_grads(&net, &seqs, &targets, GRAD_DELTA);
    let mut worst = (0.0, "");
    for ((a, n), name) in analytic.tensors().iter().zip(numeric.tensors()).zip(TENSOR_NAMES) {
        let err = relative_error(&a.values, &n.values);
        if err > worst.0 {
            worst = (err, name);
        }
    }
    let pad_grad_nonzero = analytic.embedding.values[..net.embed_dim].iter().any(|v| *v != 0.0);
    outcome(
        worst.0 < GRAD_MAX_REL_ERR && pad_grad_nonzero,
        format!(
            "max per-tensor relative error {:.2e} ({}) < {GRAD_MAX_REL_ERR:e}; pad-row gradient nonzero: {pad_grad_nonzero}",
            worst.0, worst.1
        ),
    )
}

fn chi2_oracle_check() -> Outcome {
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    for _ in 0..CHI2_FIXTURES {
        let n = r.random_range(2..=8);
        let f = r.random_range(1..=6);
        let x = random_counts(&mut r, n, f, 4);
        let y = random_labels(&mut r, n);
        for (a, b) in chi2_scores(&x, &y).unwrap().iter().zip(chi2_oracle(&x, &y)) {
            let err = if b == 0.0 { a.abs() } else { (a - b).abs() / b.abs() };
            worst = worst.max(err);
        }
    }
    outcome(
        worst <= CHI2_REL_TOL,
        format!("{CHI2_FIXTURES} fixtures, max relative error {worst:.2e}"),
    )
}

fn nb_oracle_check() -> Outcome {
    let mut r = rng(102);
    let mut worst: f64 = 0.0;
    for _ in 0..NB_FIXTURES {
        let n = r.random_range(2..=8);
        let f = r.random_range(1..=5);
        let x = random_counts(&mut r, n, f, 3);
        let y = random_labels(&mut r, n);
        let model = nb_fit(&x, &y, 1.0).unwrap();
        for i in 0..n {
            let p = model.predict_proba(x.row(i)).unwrap();
            worst = worst.max((p - nb_oracle(&x, &y, 1.0, x.row(i))).abs());
        }
    }
    outcome(
        worst <= NB_TOL,
        format!("{NB_FIXTURES} fixtures, max absolute posterior error {worst:.2e}"),
    )
}

fn gbt_stump_check() -> Outcome {
    let mut r = rng(103);
    let params = GbtParams {
        rounds: 1,
        max_depth: 1,
        ..GbtParams::default()
    };
    let (mut agree, mut with_split) = (0, 0);
    let mut gamma_splits = 0;
    for _ in 0..STUMP_FIXTURES {
        let rows: Vec<Vec<f64>> = (0..STUMP_SAMPLES)
            .map(|_| (0..4).map(|_| r.random_range(-2..=3) as f64).collect())
            .collect();
        let x = FeatureMatrix::from_unnamed_rows(rows).unwrap();
        let y = random_labels(&mut r, STUMP_SAMPLES);
        let model = gbt_fit(&x, &y, &params).unwrap();
        let got = match &model.trees[0] {
            TreeNode::Split {
                feature, threshold, ..
            } => Some((*feature, *threshold)),
            TreeNode::Leaf { .. } => None,
        };
        let oracle = stump_oracle(&x, &y, params.lambda, params.gamma, params.min_child_weight);
        with_split += usize::from(oracle.is_some());
        agree += usize::from(got == oracle.map(|s| (s.feature, s.threshold)));
        let heavy = GbtParams {
            gamma: 1000.0,
            ..params
        };
        gamma_splits += gbt_fit(&x, &y, &heavy).unwrap().split_count();
    }
    outcome(
        agree == STUMP_FIXTURES && gamma_splits == 0,
        format!(
            "{agree}/{STUMP_FIXTURES} splits match exhaustive search ({with_split} non-trivial); gamma=1000 splits: {gamma_splits}"
        ),
    )
}

fn adam_check() -> Outcome {
    let g = [0.3, -1.2, 0.05];
    let expected = adam_hand_trajectory(0.7, g);
    let mut x = [0.7];
    let mut state = AdamState::new(&[1]);
    let mut worst: f64 = 0.0;
    for (gt, want) in g.iter().zip(expected) {
        adam_step(&mut [&mut x[..]], &[&[*gt][..]], &mut state).unwrap();
        worst = worst.max((x[0] - want).abs());
    }
    outcome(worst <= ADAM_TOL, format!("3-step max deviation {worst:.2e}"))
}

fn f1_identities() -> Outcome {
    let mut r = rng(104);
    let mut bad = 0;
    for _ in 0..CONFUSION_MATRICES {
        let [tp, fp, tn, fn_] = [0; 4].map(|_: usize| r.random_range(0..200usize));
        if tp + fp + tn + fn_ == 0 {
            continue;
        }
        let rep = EvalReport::from_counts(tp, fp, tn, fn_);
        let total = (tp + fp + tn + fn_) as f64;
        let mut ok = rep.total() == tp + fp + tn + fn_;
        ok &= (rep.accuracy - (tp + tn) as f64 / total).abs() <= F1_TOL;
        let p = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let rc = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
        ok &= (rep.precision - p).abs() <= F1_TOL && (rep.recall - rc).abs() <= F1_TOL;
        let f1 = if p + rc > 0.0 { 2.0 * p * rc / (p + rc) } else { 0.0 };
        ok &= (rep.f1 - f1).abs() <= F1_TOL;
        bad += usize::from(!ok);
    }
    outcome(bad == 0, format!("{CONFUSION_MATRICES} confusion matrices, {bad} violations"))
}

fn e2e_config() -> RunConfig {
    RunConfig {
        seed: E2E_SEED,
        variant: Variant::Full,
        method: Method::Lstm,
        features: FeatureSpec::Chars,
        embed: 64,
        hidden: 64,
        epochs: 20,
        batch: 32,
        ..RunConfig::default()
    }
}

fn end_to_end(slot: &mut Option<ExperimentOutcome>) -> Outcome {
    let corpus = generate_synthetic(E2E_SIZE, E2E_MALE_FRACTION, E2E_SEED).unwrap();
    let lstm = run_experiment(&corpus, &e2e_config()).unwrap();
    let nb_config = RunConfig {
        method: Method::Nb,
        features: FeatureSpec::Basic,
        ..e2e_config()
    };
    let nb = run_experiment(&corpus, &nb_config).unwrap();
    let (a, b) = (lstm.row.report.accuracy, nb.row.report.accuracy);
    let same_split = lstm.test.names() == nb.test.names();
    let detail = format!(
        "char-LSTM test accuracy {a:.4} (f1 {:.4}) vs basic NB {b:.4}; need >= {E2E_MIN_ACCURACY} and > NB; {} test names",
        lstm.row.report.f1,
        lstm.test.len()
    );
    *slot = Some(lstm);
    outcome(a >= E2E_MIN_ACCURACY && a > b && same_split, detail)
}

fn memorization() -> Outcome {
    let corpus = generate_synthetic(MEMO_SIZE, E2E_MALE_FRACTION, 7).unwrap();
    let cfg = RunConfig {
        embed: MEMO_DIM,
        hidden: MEMO_DIM,
        epochs: MEMO_MAX_EPOCHS,
        ..e2e_config()
    };
    let fit = fit_pipeline(&corpus, &cfg, None).unwrap();
    let epochs = fit.lstm_report.unwrap().epochs;
    let first = epochs.iter().find(|e| e.train_acc >= MEMO_MIN_TRAIN_ACC);
    outcome(
        first.is_some(),
        match first {
            Some(e) => format!("train accuracy {:.4} at epoch {} of {MEMO_MAX_EPOCHS}", e.train_acc, e.epoch),
            None => format!(
                "d=h={MEMO_DIM}: best train accuracy {:.4} < {MEMO_MIN_TRAIN_ACC} within {MEMO_MAX_EPOCHS} epochs (final loss {:.4})",
                epochs.iter().map(|e| e.train_acc).fold(0.0, f64::max),
                epochs.last().map_or(f64::NAN, |e| e.train_loss)
            ),
        },
    )
}

fn terminal_traces(e2e: Option<&ExperimentOutcome>) -> Outcome {
    let Some(e2e) = e2e else {
        return outcome(false, "end-to-end model unavailable".into());
    };
    let (net, indexer) = e2e.fit.pipeline.char_lstm().unwrap();
    let seen: HashSet<&str> = e2e.train.names().into_iter().collect();
    let generator = SyntheticGenerator::new(GeneratorConfig::default()).unwrap();
    let mut r = seed::rng(4343);
    let (mut checked, mut correct) = (0, 0);
    let mut misses = Vec::new();
    while checked < TRACE_NAMES {
        let gender = if checked % 2 == 0 { Gender::Male } else { Gender::Female };
        let name = generator.terminal_name(gender, &mut r);
        if seen.contains(name.as_str()) {
            continue;
        }
        let trace = incremental_trace(net, indexer, &name, "e2e").unwrap();
        let p = trace.final_p_male();
        if (p > 0.5) == gender.is_male() && p != 0.5 {
            correct += 1;
        } else {
            misses.push(format!("{name}={p:.3}"));
        }
        checked += 1;
    }
    outcome(
        correct == TRACE_NAMES,
        format!("{correct}/{TRACE_NAMES} held-out putra/putri names on the right side of 0.5 {misses:?}"),
    )
}

fn csv_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

fn grid_shapes() -> Outcome {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("grid.csv");
    cmd_gen(120, E2E_MALE_FRACTION, 3, &data).unwrap();
    let base = RunConfig {
        seed: 1,
        ..RunConfig::default()
    };
    let mut counts = Vec::new();
    for (label, cfg) in [
        (
            "logreg",
            RunConfig {
                method: Method::Logreg,
                features: FeatureSpec::Basic,
                ..base.clone()
            },
        ),
        (
            "gbt",
            RunConfig {
                method: Method::Gbt,
                features: FeatureSpec::Basic,
                gbt: GbtParams {
                    rounds: 5,
                    ..GbtParams::default()
                },
                ..base.clone()
            },
        ),
        (
            "lstm",
            RunConfig {
                epochs: 1,
                ..base.clone()
            },
        ),
    ] {
        let out = dir.path().join(format!("{label}.csv"));
        let summary = cmd_gridsearch(&data, &cfg, &out).unwrap();
        counts.push((label, summary.candidates, csv_rows(&out)));
    }
    let expected = [10, 200, 9];
    let ok = counts
        .iter()
        .zip(expected)
        .all(|(&(_, n, rows), want)| n == want && rows == want);
    outcome(ok, format!("candidates {counts:?}, expected logreg 10, gbt 200, lstm 9"))
}

fn reproducibility() -> Outcome {
    let dir = TempDir::new().unwrap();
    let bin = env!("CARGO_BIN_EXE_namegender");
    let run_pair = |tag: &str, args: &dyn Fn(&Path) -> Vec<String>| -> Result<Vec<(String, Vec<u8>)>, String> {
        let mut outputs = Vec::new();
        for side in ["a", "b"] {
            let root = dir.path().join(format!("{tag}-{side}"));
            std::fs::create_dir_all(&root).unwrap();
            let status = Command::new(bin).args(args(&root)).output().unwrap();
            if !status.status.success() {
                return Err(format!("{tag}: {}", String::from_utf8_lossy(&status.stderr)));
            }
            let mut files: Vec<_> = walk(&root);
            files.sort();
            outputs.push(
                files
                    .into_iter()
                    .map(|p| (p.strip_prefix(&root).unwrap().display().to_string(), std::fs::read(&p).unwrap()))
                    .collect::<Vec<_>>(),
            );
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{tag}: outputs differ"));
        }
        Ok(outputs.swap_remove(0))
    };
    fn walk(root: &Path) -> Vec<std::path::PathBuf> {
        let mut out = Vec::new();
        for e in std::fs::read_dir(root).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                out.extend(walk(&p));
            } else {
                out.push(p);
            }
        }
        out
    }
    let data = dir.path().join("data.csv");
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let mut checked = Vec::new();
    let mut problems = Vec::new();
    let mut record = |tag: &str, r: Result<Vec<(String, Vec<u8>)>, String>| match r {
        Ok(files) => checked.push(format!("{tag}({})", files.len())),
        Err(e) => problems.push(e),
    };

    record(
        "gen",
        run_pair("gen", &|root| {
            ["gen", "--n", "240", "--seed", "11", "--out", &s(&root.join("d.csv"))].map(String::from).to_vec()
        }),
    );
    cmd_gen(240, E2E_MALE_FRACTION, 11, &data).unwrap();
    let d = s(&data);
    let models = dir.path().join("models");
    for (method, features) in [("nb", "basic"), ("logreg", "ngram:2"), ("gbt", "ngram:3"), ("lstm", "chars")] {
        let tag = format!("train-{method}");
        let mut extra = vec!["--embed", "8", "--hidden", "8", "--epochs", "2"];
        if method != "lstm" {
            extra.clear();
        }
        let result = run_pair(&tag, &|root| {
            let mut a: Vec<String> = ["train", "--data", &d, "--method", method, "--features", features, "--seed", "5"]
                .map(String::from)
                .to_vec();
            a.extend(extra.iter().map(|x| x.to_string()));
            a.extend(["--out".to_string(), s(&root.join("out"))]);
            a
        });
        if let Ok(files) = &result {
            let target = models.join(method);
            std::fs::create_dir_all(&target).unwrap();
            for (name, bytes) in files {
                std::fs::write(target.join(Path::new(name).file_name().unwrap()), bytes).unwrap();
            }
        }
        record(&tag, result);
    }
    record(
        "gridsearch",
        run_pair("gridsearch", &|root| {
            ["gridsearch", "--data", &d, "--method", "logreg", "--features", "basic", "--seed", "5", "--out", &s(&root.join("g.csv"))]
                .map(String::from)
                .to_vec()
        }),
    );
    let nb_model = s(&models.join("nb/model.json"));
    let lstm_model = s(&models.join("lstm/model.json"));
    let gbt_model = s(&models.join("gbt/model.json"));
    record(
        "eval",
        run_pair("eval", &|root| {
            ["eval", "--model", &nb_model, "--data", &d, "--out", &s(&root.join("r.csv"))].map(String::from).to_vec()
        }),
    );
    record(
        "explain",
        run_pair("explain", &|root| {
            ["explain", "--model", &lstm_model, "budi putra", "--out", &s(&root.join("t.csv"))].map(String::from).to_vec()
        }),
    );
    record(
        "dump-trees",
        run_pair("dump-trees", &|root| {
            ["dump-trees", "--model", &gbt_model, "--out", &s(&root.join("trees.txt"))].map(String::from).to_vec()
        }),
    );
    record(
        "experiment",
        run_pair("experiment", &|root| {
            ["experiment", "--data", &d, "--seed", "5", "--no-lstm", "--out", &s(&root.join("table.csv"))]
                .map(String::from)
                .to_vec()
        }),
    );
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            format!("byte-identical reruns: {}", checked.join(" "))
        } else {
            problems.join("; ")
        },
    )
}

fn main() {
    let mut suite = Suite { failures: 0 };
    suite.check("gradient oracle (finite differences)", Some(GRAD_TIME), gradient_oracle);
    suite.check("chi2 oracle", Some(CHI2_TIME), chi2_oracle_check);
    suite.check("naive bayes oracle", Some(NB_TIME), nb_oracle_check);
    suite.check("gbt stump oracle", Some(STUMP_TIME), gbt_stump_check);
    suite.check("adam trajectory", None, adam_check);
    suite.check("f1/accuracy identities", None, f1_identities);
    let mut e2e = None;
    suite.check("end-to-end synthetic benchmark", Some(E2E_TIME), || end_to_end(&mut e2e));
    suite.check("memorization", Some(MEMO_TIME), memorization);
    suite.check("putra/putri incremental traces", None, || terminal_traces(e2e.as_ref()));
    suite.check("grid shapes", None, grid_shapes);
    suite.check("reproducibility", None, reproducibility);
    if suite.failures > 0 {
        println!("{} acceptance criteria failed", suite.failures);
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
