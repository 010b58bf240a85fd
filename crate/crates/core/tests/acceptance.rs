//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any blocking criterion fails.
//!
//! `STANCECAST_ACCEPTANCE=1,3` restricts the run to the listed criteria.
//! Criterion 9 runs only when `STANCECAST_REDDIT_CONFIG` names a pipeline
//! config for the real forum dump.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stancecast::corpus::{generate_synthetic_corpus, SynthConfig, ThreadForest};
use stancecast::features::{FeatureConfig, FeatureExtractor, FeatureSet, FeatureVector};
use stancecast::learning::{
    audit_fold, evaluate, fit, nested_cv, ClassifierSpec, CvConfig, Dataset, Family,
    Hyperparams, Instance, Matrix,
};
use stancecast::pipeline::{load_report, run_stage, PipelineConfig, Stage};
use stancecast::stance::{
    train_nb, train_transfer_model, HashtagLexicon, LabelerConfig, Stance,
};
use stancecast::Error;

use common::{naive_features, naive_leaves, random_toy};

type Check = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn c1_structural_identities() -> Check {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut vectors = 0;
    for _ in 0..1000 {
        let toy = random_toy(&mut rng, 200);
        let forest = ThreadForest::build(toy.entries.clone());
        let leaves = naive_leaves(&toy.entries);
        for root in forest.roots() {
            let d = forest.extract_diffusions(root).map_err(|e| e.to_string())?;
            ensure(d.len() == leaves[root], || {
                format!("thread {root}: {} diffusions, {} leaves", d.len(), leaves[root])
            })?;
        }
        let ex = FeatureExtractor::new(&forest, &toy.partition, &toy.stances, FeatureConfig::default())
            .map_err(|e| e.to_string())?;
        let naive = naive_features(&toy);
        for ((user, t), row) in &naive {
            let f1 = ex.fs1(user, *t).map_err(|e| e.to_string())?;
            let f2 = ex.fs2(user, *t).map_err(|e| e.to_string())?;
            let f3 = ex.fs3(user, *t).map_err(|e| e.to_string())?;
            let (f1, f2, f3) = (f1.numeric(), f2.numeric(), f3.numeric());
            ensure(row.n_t as f64 == f1[0] + f1[1], || format!("N_t != ID_t + CS_t for {user}@{t}"))?;
            ensure(f1[1] == f2[0] + f2[1] + f2[2], || format!("CS_t split broken for {user}@{t}"))?;
            let tuples = [&f1[2..7], &f2[3..8], &f2[8..13], &f2[13..18], &f3[0..5], &f3[5..10], &f3[10..15]];
            for q in tuples {
                ensure(q.windows(2).all(|w| w[0] <= w[1]), || format!("decreasing quantiles {q:?}"))?;
            }
            vectors += 1;
        }
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:.1?}"))?;
    Ok(format!("1000 forests, {vectors} user-periods, 0 violations in {elapsed:.1?}"))
}

fn c2_feature_counts() -> Check {
    let expected = [
        (FeatureSet::Fs0, 101),
        (FeatureSet::Fs1, 8),
        (FeatureSet::Fs2, 19),
        (FeatureSet::Fs3, 16),
        (FeatureSet::Fs4, 41),
        (FeatureSet::Fs5, 141),
    ];
    let corpus = generate_synthetic_corpus(
        &SynthConfig {
            users: 40,
            periods: 2,
            threads_per_period: 8,
            tweet_users: 0,
            ..SynthConfig::default()
        },
        2,
    )
    .map_err(|e| e.to_string())?;
    let forest = ThreadForest::build(corpus.entries.clone());
    let ex = FeatureExtractor::new(&forest, &corpus.partition, &corpus.ground_truth, FeatureConfig::default())
        .map_err(|e| e.to_string())?;
    let mut got = Vec::new();
    for (set, n) in expected {
        let symbolic = set.symbolic_count(100);
        ensure(symbolic == n, || format!("{set}: {symbolic} features, expected {n}"))?;
        let m = ex.extract(set).map_err(|e| e.to_string())?;
        ensure(m.dimension() == n + 2 && m.columns.len() == n + 2, || {
            format!("{set}: extracted width {} does not match {n} features plus one-hot", m.dimension())
        })?;
        got.push(format!("{set}={symbolic}"));
    }
    Ok(got.join(" "))
}

fn brute_force_pro(docs: &[Vec<String>], labels: &[Stance], alpha: f64, query: &[String]) -> f64 {
    let mut vocab: Vec<&String> = docs.iter().flatten().collect();
    vocab.sort();
    vocab.dedup();
    let mut joint = [0.0f64; 2];
    for (k, class) in [Stance::Against, Stance::Pro].into_iter().enumerate() {
        let members: Vec<&Vec<String>> =
            docs.iter().zip(labels).filter(|(_, &l)| l == class).map(|(d, _)| d).collect();
        let total: usize = members.iter().map(|d| d.len()).sum();
        let mut p = members.len() as f64 / docs.len() as f64;
        for w in query {
            if !vocab.contains(&w) {
                continue;
            }
            let c = members.iter().flat_map(|d| d.iter()).filter(|x| *x == w).count();
            p *= (c as f64 + alpha) / (total as f64 + alpha * vocab.len() as f64);
        }
        joint[k] = p;
    }
    joint[1] / (joint[0] + joint[1])
}

fn knn_oracle(x: &[Vec<f64>], y: &[usize], k: usize, q: &[f64]) -> usize {
    let mut all: Vec<(f64, usize, usize)> = x
        .iter()
        .enumerate()
        .map(|(i, r)| (r.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum(), y[i], i))
        .collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut votes = [0usize; 3];
    for &(_, c, _) in all.iter().take(k.min(all.len())) {
        votes[c] += 1;
    }
    (0..3).rev().max_by_key(|&c| votes[c]).unwrap()
}

fn c3_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let words = ["brexit", "vote", "leav", "remain", "eu", "trade", "tax"];
    let mut nb_checks = 0;
    for _ in 0..200 {
        let n = rng.gen_range(2..10);
        let docs: Vec<Vec<String>> = (0..n)
            .map(|_| (0..rng.gen_range(1..8)).map(|_| words[rng.gen_range(0..words.len())].to_owned()).collect())
            .collect();
        let mut labels: Vec<Stance> = (0..n).map(|_| if rng.gen_bool(0.5) { Stance::Pro } else { Stance::Against }).collect();
        labels[0] = Stance::Pro;
        labels[1] = Stance::Against;
        let alpha = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
        let model = train_nb(&docs, &labels, alpha, 1).map_err(|e| e.to_string())?;
        for _ in 0..5 {
            let mut query: Vec<String> =
                (0..rng.gen_range(0..10)).map(|_| words[rng.gen_range(0..words.len())].to_owned()).collect();
            query.push("unseen".into());
            let got = model.leave_probability(&query);
            let want = brute_force_pro(&docs, &labels, alpha, &query);
            ensure(close(got, want, 1e-9), || format!("NB posterior {got} vs brute force {want}"))?;
            nb_checks += 1;
        }
    }

    let mut fs_checks = 0;
    for _ in 0..300 {
        let toy = random_toy(&mut rng, 200);
        let forest = ThreadForest::build(toy.entries.clone());
        let ex = FeatureExtractor::new(&forest, &toy.partition, &toy.stances, FeatureConfig::default())
            .map_err(|e| e.to_string())?;
        for ((user, t), row) in naive_features(&toy) {
            let pairs = [
                (ex.fs1(&user, t).map_err(|e| e.to_string())?, &row.fs1),
                (ex.fs2(&user, t).map_err(|e| e.to_string())?, &row.fs2),
                (ex.fs3(&user, t).map_err(|e| e.to_string())?, &row.fs3),
            ];
            for (v, want) in pairs {
                let got = v.numeric();
                ensure(
                    got.len() == want.len() && got.iter().zip(want).all(|(a, b)| close(*a, *b, 1e-9)),
                    || format!("{} for {user}@{t}: {got:?} vs naive {want:?}", v.set_id),
                )?;
                fs_checks += 1;
            }
        }
    }

    let mut knn_checks = 0;
    for _ in 0..100 {
        let n = rng.gen_range(3..40);
        let d = rng.gen_range(1..5);
        let integer = rng.gen_bool(0.5);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..d)
                .map(|_| if integer { rng.gen_range(0..3) as f64 } else { rng.gen::<f64>() })
                .collect()
        };
        let x: Vec<Vec<f64>> = (0..n).map(|_| draw(&mut rng)).collect();
        let mut y: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        y[0] = 0;
        y[1] = 1;
        let k = rng.gen_range(1..=n + 2);
        let model = fit(&Hyperparams::Knn { k }, &Matrix::from_rows(&x).unwrap(), &y, 0).map_err(|e| e.to_string())?;
        for _ in 0..10 {
            let q = draw(&mut rng);
            let (got, want) = (model.predict_row(&q), knn_oracle(&x, &y, k, &q));
            ensure(got == want, || format!("KNN k={k}: predicted {got}, exhaustive scan {want}"))?;
            knn_checks += 1;
        }
    }
    Ok(format!("{nb_checks} NB posteriors, {fs_checks} FS1-FS3 vectors, {knn_checks} KNN queries agree"))
}

/// Balanced three-class labels independent of uniform features.
fn chance_instances(seed: u64, n: usize, d: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<Stance> = (0..n).map(|i| Stance::ALL[i % 3]).collect();
    labels.shuffle(&mut rng);
    labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| {
            let current = Stance::ALL[rng.gen_range(0..3)];
            let mut values: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
            values.extend(current.one_hot());
            Instance {
                features: FeatureVector {
                    user: format!("u{i:04}"),
                    period: 0,
                    set_id: FeatureSet::Fs1,
                    values,
                    current_stance: current,
                },
                label,
            }
        })
        .collect()
}

fn c4_chance_level() -> Check {
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for family in Family::ALL {
        let seeds: u64 = match family {
            Family::RandomForest | Family::GradientBoosting => 1,
            _ => 10,
        };
        let mut scores = Vec::new();
        for seed in 0..seeds {
            let instances = chance_instances(100 + seed, 1000, 10);
            let cv = CvConfig {
                search_iters: 20,
                seed,
                ..CvConfig::default()
            };
            let started = Instant::now();
            let out = nested_cv(&instances, &ClassifierSpec::default_for(family), &cv).map_err(|e| e.to_string())?;
            let elapsed = started.elapsed();
            let f1 = out.mean.f1;
            if !(0.28..=0.38).contains(&f1) {
                failures.push(format!("{} seed {seed}: macro-F1 {f1:.3}", family.name()));
            }
            if elapsed >= Duration::from_secs(300) {
                failures.push(format!("{} seed {seed}: {elapsed:.0?}", family.name()));
            }
            scores.push(f1);
        }
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let (lo, hi) = scores.iter().fold((1.0f64, 0.0f64), |(l, h), &s| (l.min(s), h.max(s)));
        lines.push(format!("{} {mean:.3} [{lo:.3}, {hi:.3}] x{seeds}", family.name()));
    }
    if failures.is_empty() {
        Ok(lines.join("; "))
    } else {
        Err(format!("{}; {}", failures.join("; "), lines.join("; ")))
    }
}

fn c5_planted_signal() -> Check {
    let started = Instant::now();
    let seed = 7;
    let config = SynthConfig {
        users: 2000,
        periods: 6,
        threads_per_period: 400,
        homophily: 1.0,
        tweet_users: 0,
        ..SynthConfig::default()
    };
    let corpus = generate_synthetic_corpus(&config, seed).map_err(|e| e.to_string())?;
    let forest = ThreadForest::build(corpus.entries.clone());
    let ex = FeatureExtractor::new(&forest, &corpus.partition, &corpus.ground_truth, FeatureConfig::default())
        .map_err(|e| e.to_string())?;
    let datasets = [FeatureSet::Fs1, FeatureSet::Fs3]
        .into_iter()
        .map(|s| Ok(Dataset::new(&ex.extract(s)?, &corpus.ground_truth)))
        .collect::<stancecast::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let specs = [Family::RandomForest, Family::GradientBoosting].map(ClassifierSpec::default_for);
    let cv = CvConfig {
        search_iters: 3,
        seed,
        ..CvConfig::default()
    };
    let report = evaluate(&datasets, &specs, &cv, false).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for family in [Family::RandomForest, Family::GradientBoosting] {
        let fs1 = report.result(family, FeatureSet::Fs1).unwrap().macro_f1.mean;
        let fs3 = report.result(family, FeatureSet::Fs3).unwrap().macro_f1.mean;
        if fs3 < 0.80 || fs3 - fs1 < 0.10 {
            failures.push(format!("{}: FS1 {fs1:.3} FS3 {fs3:.3}", family.name()));
        }
        lines.push(format!("{} FS1 {fs1:.3} FS3 {fs3:.3}", family.name()));
    }
    let elapsed = started.elapsed();
    if elapsed >= Duration::from_secs(1800) {
        failures.push(format!("took {elapsed:.0?}"));
    }
    let detail = format!("{} instances; {} ({elapsed:.0?})", datasets[0].len(), lines.join("; "));
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}; {detail}", failures.join("; ")))
    }
}

fn c6_fold_hygiene() -> Check {
    let mut instances = chance_instances(6, 240, 4);
    for (i, inst) in instances.iter_mut().enumerate() {
        inst.features.user = format!("u{:02}", i % 40);
        inst.features.period = i / 40;
    }
    let mut checked = 0;
    for group_by_user in [false, true] {
        for family in Family::ALL {
            let cv = CvConfig {
                outer_k: 4,
                inner_k: 3,
                search_iters: 2,
                group_by_user,
                seed: 6,
            };
            let out = nested_cv(&instances, &ClassifierSpec::default_for(family), &cv).map_err(|e| e.to_string())?;
            let a = &out.audit;
            ensure(a.overlap == 0, || format!("{}: {} inner rows were outer-test rows", family.name(), a.overlap))?;
            ensure(a.test_appearances.len() == instances.len() && a.test_appearances.iter().all(|&c| c == 1), || {
                format!("{}: an instance is not in exactly one outer test fold", family.name())
            })?;
            ensure(a.inner_rows.iter().all(|&r| r > 0), || "an inner search read nothing".into())?;
            checked += 1;
        }
    }
    // The instrument itself must flag a planted leak.
    let mut read = vec![false; 10];
    read[3] = true;
    match audit_fold(&read, &[3, 4], None) {
        Err(Error::Leakage(_)) => {}
        other => return Err(format!("planted leak not detected: {other:?}")),
    }
    Ok(format!("{checked} nested runs audited, planted leak detected"))
}

fn pipeline_run(base: &PipelineConfig, dir: PathBuf) -> stancecast::Result<serde_json::Value> {
    let mut c = base.clone();
    c.output_dir = dir.clone();
    for stage in [Stage::Ingest, Stage::Label, Stage::Features, Stage::Evaluate] {
        run_stage(stage, &c)?;
    }
    Ok(serde_json::to_value(load_report(&dir)?.without_timestamp())?)
}

fn c7_determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut seed_config = PipelineConfig::with_seed(17);
    seed_config.output_dir = tmp.path().to_path_buf();
    seed_config.synth = SynthConfig {
        users: 150,
        periods: 4,
        threads_per_period: 30,
        ..SynthConfig::default()
    };
    run_stage(Stage::Synth, &seed_config).map_err(|e| e.to_string())?;
    let mut base = PipelineConfig::load(&tmp.path().join("synth/pipeline.toml")).map_err(|e| e.to_string())?;
    base.labeler.source = stancecast::pipeline::LabelSource::Model;
    base.learning.feature_sets = vec![FeatureSet::Fs1, FeatureSet::Fs3];
    base.learning.outer_k = 3;
    base.learning.inner_k = 2;
    base.learning.search_iters = 2;
    let a = pipeline_run(&base, tmp.path().join("a")).map_err(|e| e.to_string())?;
    let b = pipeline_run(&base, tmp.path().join("b")).map_err(|e| e.to_string())?;
    ensure(a == b, || "reports differ between identical runs".into())?;
    let stances_a = std::fs::read(tmp.path().join("a/stances.tsv")).map_err(|e| e.to_string())?;
    let stances_b = std::fs::read(tmp.path().join("b/stances.tsv")).map_err(|e| e.to_string())?;
    ensure(stances_a == stances_b, || "stance labels differ between identical runs".into())?;
    let results = a["results"].as_array().map_or(0, Vec::len);
    Ok(format!("two full runs, {results} results, identical reports"))
}

fn c8_weak_label_nb() -> Check {
    let mut lines = Vec::new();
    for seed in [1, 2, 3] {
        let corpus = generate_synthetic_corpus(
            &SynthConfig {
                users: 50,
                periods: 1,
                threads_per_period: 5,
                ..SynthConfig::default()
            },
            seed,
        )
        .map_err(|e| e.to_string())?;
        let t = train_transfer_model(&corpus.tweets, &HashtagLexicon::default(), &LabelerConfig::default(), seed)
            .map_err(|e| e.to_string())?;
        let acc = t.evaluation.macro_accuracy;
        ensure(acc >= 0.95, || format!("seed {seed}: held-out macro-accuracy {acc:.3}"))?;
        lines.push(format!("{acc:.3} on {} held out", t.evaluation.test_size));
    }
    Ok(format!("macro-accuracy {}", lines.join(", ")))
}

fn c9_real_dump() -> Option<Check> {
    let path = std::env::var_os("STANCECAST_REDDIT_CONFIG")?;
    let run = || -> stancecast::Result<String> {
        let started = Instant::now();
        let config = PipelineConfig::load(PathBuf::from(&path).as_path())?;
        for stage in [Stage::Ingest, Stage::Profile, Stage::Label, Stage::Features, Stage::Evaluate] {
            run_stage(stage, &config)?;
        }
        let report = load_report(&config.output_dir)?;
        let best = report
            .results
            .iter()
            .filter(|r| r.feature_set == FeatureSet::Fs3 && r.period.is_none())
            .map(|r| (r.macro_f1.mean, r.family.name()))
            .fold((f64::NAN, ""), |a, b| if a.0.is_nan() || b.0 > a.0 { b } else { a });
        let band = if (0.45..=0.60).contains(&best.0) { "inside" } else { "outside" };
        Ok(format!(
            "best FS3 macro-F1 {:.3} ({}), {band} [0.45, 0.60], {:.0?}",
            best.0,
            best.1,
            started.elapsed()
        ))
    };
    Some(run().map_err(|e| e.to_string()))
}

fn main() {
    let only: Option<Vec<u32>> = std::env::var("STANCECAST_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |id: u32| only.as_ref().is_none_or(|o| o.contains(&id));

    let criteria: [Criterion; 8] = [
        (1, "structural identities", c1_structural_identities),
        (2, "feature-count parity", c2_feature_counts),
        (3, "oracle equivalence", c3_oracles),
        (4, "chance-level sanity", c4_chance_level),
        (5, "planted-signal reproduction", c5_planted_signal),
        (6, "fold hygiene", c6_fold_hygiene),
        (7, "determinism", c7_determinism),
        (8, "weak-label NB sanity", c8_weak_label_nb),
    ];
    let mut failed = BTreeMap::new();
    for (id, name, check) in criteria {
        if !wanted(id) {
            continue;
        }
        let started = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>().map(String::as_str).or(p.downcast_ref::<&str>().copied()))));
        match result {
            Ok(detail) => println!("criterion {id} {name}: PASS ({:.1?}) {detail}", started.elapsed()),
            Err(detail) => {
                println!("criterion {id} {name}: FAIL ({:.1?}) {detail}", started.elapsed());
                failed.insert(id, name);
            }
        }
    }
    if wanted(9) {
        match c9_real_dump() {
            None => println!("criterion 9 full-dump stretch goal: SKIPPED (non-blocking; set STANCECAST_REDDIT_CONFIG)"),
            Some(Ok(d)) => println!("criterion 9 full-dump stretch goal: PASS (non-blocking) {d}"),
            Some(Err(d)) => println!("criterion 9 full-dump stretch goal: FAIL (non-blocking) {d}"),
        }
    }
    if !failed.is_empty() {
        println!("{} blocking criteria failed: {:?}", failed.len(), failed.keys().collect::<Vec<_>>());
        std::process::exit(1);
    }
}
