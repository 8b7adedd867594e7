//! Acceptance suite. Runs every criterion, prints one `[PASS]`/`[FAIL]` line
//! each, and exits non-zero if any criterion fails.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use lblab_cli::commands::{self, DemoOptions, TrainSummary};
use lblab_cli::history_file::payload;
use lblab_cli::manifest::ExperimentManifest;
use lblab_core::metrics::rank_scores;
use lblab_core::trainer::gradcheck::{max_relative_error, DEFAULT_STEP};
use lblab_core::trainer::{init_model, OptimizerKind, OptimizerState};
use lblab_core::{
    compute_learnability, compute_ranks, histogram2d, make_blobs, pearson, rank_correlation,
    Activation, BlobParams, DifficultyTag, InitScheme, LearnabilityVector, ModelSpec,
    OptimizerSpec, PredictionHistory,
};
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Suite = fn(&mut TestRunner) -> Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome, Option<f64>);

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i}")).collect()
}

/// Literal rank: number of j with s[j] >= s[i].
fn oracle_ranks(s: &[f64]) -> Vec<usize> {
    s.iter()
        .map(|&si| s.iter().filter(|&&sj| sj >= si).count())
        .collect()
}

/// Explicit triple loop over the run-major layout.
fn oracle_learnability(values: &[f64], n: usize, t: usize, r: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for run in 0..r {
            for epoch in 0..t {
                acc += values[(run * t + epoch) * n + i];
            }
        }
        *slot = acc / (t * r) as f64;
    }
    out
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut total_ties = 0usize;
    for case in 0..200 {
        let n = rng.gen_range(1..=2000);
        let t = rng.gen_range(1..=6);
        let r = rng.gen_range(1..=4);
        let mut values: Vec<f64> = (0..n * t * r).map(|_| rng.gen::<f64>()).collect();
        // inject ties: copy a random sample's cells onto others
        let dups = rng.gen_range(0..=n / 4);
        for _ in 0..dups {
            let (src, dst) = (rng.gen_range(0..n), rng.gen_range(0..n));
            for cell in 0..t * r {
                values[cell * n + dst] = values[cell * n + src];
            }
        }
        if case % 10 == 0 {
            values.iter_mut().for_each(|v| *v = 1.0);
        }

        let history = PredictionHistory::new(ids(n), t, r, values.clone()).unwrap();
        let scores = compute_learnability(&history);
        let expected = oracle_learnability(&values, n, t, r);
        for (a, b) in scores.scores().iter().zip(&expected) {
            worst = worst.max((a - b).abs());
        }
        if worst > 1e-12 {
            return Err(format!("case {case}: learnability differs by {worst:e}"));
        }

        // ranks are checked on the produced scores and on tie-heavy raw vectors
        let ranks = compute_ranks(&scores).unwrap();
        if ranks.ranks() != oracle_ranks(scores.scores()).as_slice() {
            return Err(format!("case {case}: ranks differ from the double loop (N={n})"));
        }
        let grid: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=50) as f64 / 50.0).collect();
        let v = LearnabilityVector::new(ids(n), grid.clone()).unwrap();
        if compute_ranks(&v).unwrap().ranks() != oracle_ranks(&grid).as_slice() {
            return Err(format!("case {case}: tie-heavy ranks differ (N={n})"));
        }
        total_ties += n - {
            let mut g = grid.clone();
            g.sort_by(f64::total_cmp);
            g.dedup();
            g.len()
        };
    }
    Ok(format!(
        "200 vectors, ranks exact, max learnability error {worst:.1e}, {total_ties} tied samples"
    ))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    let mut models = 0;
    for activation in [Activation::Relu, Activation::Tanh] {
        for k in 0..30 {
            let depth = k % 4; // 0..=3 hidden layers
            let mut sizes = vec![rng.gen_range(1..=6)];
            for _ in 0..depth {
                sizes.push(rng.gen_range(1..=9));
            }
            sizes.push(rng.gen_range(2..=5));
            let init = if k % 2 == 0 { InitScheme::He } else { InitScheme::Lecun };
            let spec = ModelSpec {
                layer_sizes: sizes.clone(),
                activation,
                init,
            };
            let mut model = init_model(&spec, rng.gen()).unwrap();
            for layer in model.layers_mut() {
                layer.bias.iter_mut().for_each(|b| *b = rng.gen_range(-0.5..0.5));
            }
            let batch = rng.gen_range(1..=8);
            let classes = *sizes.last().unwrap();
            let x: Vec<f64> = (0..batch * sizes[0]).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let y: Vec<usize> = (0..batch).map(|_| rng.gen_range(0..classes)).collect();
            let err = max_relative_error(&model, &x, &y, DEFAULT_STEP).unwrap();
            if err >= 1e-4 {
                return Err(format!("{sizes:?} {activation}: relative error {err:e}"));
            }
            worst = worst.max(err);
            models += 1;
        }
    }
    Ok(format!("{models} random MLPs (relu, tanh; 0-3 hidden layers), max relative error {worst:.1e}"))
}

fn one_step(spec: OptimizerSpec, param: f64, grads: &[f64]) -> f64 {
    let mut state = OptimizerState::new(spec, &[1]).unwrap();
    let mut p = [param];
    for &g in grads {
        state.step(&mut [&mut p[..]], &[&[g][..]]).unwrap();
    }
    p[0]
}

fn criterion_3() -> Outcome {
    let eps = 1e-8;
    let momentum = OptimizerSpec {
        kind: OptimizerKind::Sgd { momentum: 0.9 },
        learning_rate: 0.01,
    };
    let cases = [
        ("sgd", one_step(OptimizerSpec::sgd(), 1.0, &[0.5]), 0.995),
        (
            "adam",
            one_step(OptimizerSpec::adam(), 1.0, &[0.5]),
            // m̂ = 0.5, v̂ = 0.25
            1.0 - 0.001 * 0.5 / (0.25f64.sqrt() + eps),
        ),
        (
            "rmsprop",
            one_step(OptimizerSpec::rmsprop(), 1.0, &[0.5]),
            1.0 - 0.001 * 0.5 / (0.1 * 0.25 + eps).sqrt(),
        ),
        // v = -0.005, then v = 0.9 * -0.005 - 0.005 = -0.0095
        ("sgd momentum, 2 steps", one_step(momentum, 1.0, &[0.5, 0.5]), 0.9855),
    ];
    let mut worst = 0.0f64;
    for (name, got, want) in cases {
        let diff = (got - want).abs();
        if diff > 1e-10 {
            return Err(format!("{name}: got {got}, expected {want} (diff {diff:e})"));
        }
        worst = worst.max(diff);
    }
    Ok(format!("sgd, adam, rmsprop and momentum steps within {worst:.1e}"))
}

const MAIN_MANIFEST: &str = "\
version = lbman/1
dataset = preset:standard
output = histories

[run model-a]
layers = 8,16,4
optimizer = sgd
learning_rate = 0.01
epochs = 50
runs = 3
batch_size = 32
seed = 0

[run model-b]
layers = 8,64,64,4
optimizer = sgd
learning_rate = 0.01
epochs = 50
runs = 3
batch_size = 32
seed = 0
";

struct MainExperiment {
    _dir: tempfile::TempDir,
    manifest_path: PathBuf,
    summaries: Vec<TrainSummary>,
    payloads: Vec<String>,
    elapsed: Duration,
}

fn main_experiment() -> &'static MainExperiment {
    static CELL: OnceLock<MainExperiment> = OnceLock::new();
    CELL.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let manifest_path = dir.path().join("main.lbman");
        fs::write(&manifest_path, MAIN_MANIFEST).unwrap();
        let manifest = ExperimentManifest::read(&manifest_path).unwrap();
        let start = Instant::now();
        let summaries = commands::train(&manifest).unwrap();
        let elapsed = start.elapsed();
        let payloads = summaries
            .iter()
            .map(|s| payload(&fs::read_to_string(&s.path).unwrap()).unwrap())
            .collect();
        MainExperiment {
            _dir: dir,
            manifest_path,
            summaries,
            payloads,
            elapsed,
        }
    })
}

fn scores_of(s: &TrainSummary) -> LearnabilityVector {
    compute_learnability(&s.report.history)
}

fn criterion_4() -> Outcome {
    let exp = main_experiment();
    let a = scores_of(&exp.summaries[0]);
    let b = scores_of(&exp.summaries[1]);
    let score = pearson(a.scores(), b.scores()).map_err(|e| e.to_string())?;
    let rank = rank_correlation(&a, &b).map_err(|e| e.to_string())?;
    let line = format!(
        "score r = {score:.4}, rank r = {rank:.4} (need > 0.5); acc A {:.3}, B {:.3}; training {:.1} s",
        exp.summaries[0].report.mean_final_accuracy(),
        exp.summaries[1].report.mean_final_accuracy(),
        exp.elapsed.as_secs_f64()
    );
    if score > 0.5 && rank > 0.5 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn criterion_5() -> Outcome {
    let report = commands::demo_cross_optimizer(&DemoOptions::default()).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for i in 0..3 {
        for j in i + 1..3 {
            let r = report.rank.get(i, j);
            ok &= r > 0.5;
            parts.push(format!("{}/{} {r:.4}", report.names[i], report.names[j]));
        }
    }
    let line = format!("rank r: {} (need > 0.5)", parts.join(", "));
    if ok {
        Ok(line)
    } else {
        Err(line)
    }
}

fn criterion_6() -> Outcome {
    let exp = main_experiment();
    let dataset = make_blobs(&BlobParams::preset("standard").unwrap()).unwrap();
    let a = scores_of(&exp.summaries[0]);
    if a.sample_ids() != dataset.sample_ids() {
        return Err("history ids do not match the dataset".into());
    }
    let ranks = compute_ranks(&a).unwrap();
    let n = a.len() as f64;
    let clean = dataset.indices_tagged(DifficultyTag::Clean);
    let noisy = dataset.indices_tagged(DifficultyTag::Noisy);
    let mean = |idx: &[usize]| idx.iter().map(|&i| a.scores()[i]).sum::<f64>() / idx.len() as f64;
    let gap = mean(&clean) - mean(&noisy);
    let worst_quartile = noisy
        .iter()
        .filter(|&&i| ranks.ranks()[i] as f64 > 0.75 * n)
        .count();
    let frac = worst_quartile as f64 / noisy.len() as f64;
    let line = format!(
        "clean mean {:.4} - noisy mean {:.4} = {gap:.4} (need >= 0.1); {worst_quartile}/{} noisy in worst quartile = {:.1}% (need >= 70%)",
        mean(&clean),
        mean(&noisy),
        noisy.len(),
        100.0 * frac
    );
    if gap >= 0.1 && frac >= 0.7 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn criterion_7() -> Outcome {
    let exp = main_experiment();
    let out = Command::new(env!("CARGO_BIN_EXE_lblab"))
        .arg("train")
        .arg(&exp.manifest_path)
        .env("LBLAB_THREADS", "1")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("rerun failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let mut bytes = 0;
    for (s, before) in exp.summaries.iter().zip(&exp.payloads) {
        let after = payload(&fs::read_to_string(&s.path).unwrap())?;
        if &after != before {
            return Err(format!("{}: payload differs after rerun", s.name));
        }
        bytes += after.len();
    }
    Ok(format!(
        "{} histories ({bytes} payload bytes) identical after rerun through the binary",
        exp.summaries.len()
    ))
}

// ---- property suites ----

const CASES: u32 = 1000;

fn runner() -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases: CASES,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn prob() -> impl Strategy<Value = f64> {
    prop_oneof![1 => Just(0.0), 1 => Just(1.0), 8 => 0.0..=1.0f64]
}

fn history(max_n: usize) -> impl Strategy<Value = PredictionHistory> {
    (1..=max_n, 1..=6usize, 1..=4usize).prop_flat_map(|(n, t, r)| {
        vec(prob(), n * t * r).prop_map(move |v| PredictionHistory::new(ids(n), t, r, v).unwrap())
    })
}

/// Scores with plenty of exact ties from a coarse grid.
fn tied_scores(min_n: usize, max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    vec(
        prop_oneof![(0u32..=20).prop_map(|k| k as f64 / 20.0), 0.0..=1.0f64],
        min_n..=max_n,
    )
}

fn permuted<T: Clone>(v: &[T], perm: &[usize]) -> Vec<T> {
    perm.iter().map(|&k| v[k].clone()).collect()
}

fn ranks_of(s: &[f64]) -> Vec<usize> {
    compute_ranks(&LearnabilityVector::new(ids(s.len()), s.to_vec()).unwrap())
        .unwrap()
        .ranks()
        .to_vec()
}

fn boundedness(r: &mut TestRunner) -> Result<(), String> {
    r.run(&history(60), |h| {
        let s = compute_learnability(&h);
        prop_assert_eq!(s.len(), h.n_samples());
        prop_assert!(s.scores().iter().all(|v| (0.0..=1.0).contains(v)));
        Ok(())
    })
    .map_err(|e| e.to_string())
}

fn mean_decomposition(r: &mut TestRunner) -> Result<(), String> {
    r.run(&history(60), |h| {
        let whole = compute_learnability(&h);
        let singles: Vec<LearnabilityVector> =
            (0..h.n_runs()).map(|k| compute_learnability(&h.run(k))).collect();
        for i in 0..h.n_samples() {
            let mean = singles.iter().map(|v| v.scores()[i]).sum::<f64>() / h.n_runs() as f64;
            prop_assert!((whole.scores()[i] - mean).abs() <= 1e-12);
        }
        Ok(())
    })
    .map_err(|e| e.to_string())
}

fn rank_oracle(r: &mut TestRunner) -> Result<(), String> {
    r.run(&tied_scores(1, 2000), |s| {
        prop_assert_eq!(ranks_of(&s), oracle_ranks(&s));
        Ok(())
    })
    .map_err(|e| e.to_string())
}

fn rank_monotonicity(r: &mut TestRunner) -> Result<(), String> {
    r.run(&tied_scores(1, 2000), |s| {
        let ranks = ranks_of(&s);
        let n = s.len();
        prop_assert!(ranks.iter().all(|&k| (1..=n).contains(&k)));
        // the top score's rank is the size of its tie group, so rank 1 is
        // attained exactly when the maximum is unique
        let top = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let n_top = s.iter().filter(|&&v| v == top).count();
        prop_assert_eq!(*ranks.iter().min().unwrap(), n_top);
        prop_assert_eq!(ranks.contains(&1), n_top == 1);
        // adjacent pairs in descending score order imply every pair
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
        for w in order.windows(2) {
            let (i, j) = (w[0], w[1]);
            if s[i] == s[j] {
                prop_assert_eq!(ranks[i], ranks[j]);
            } else {
                prop_assert!(ranks[i] < ranks[j]);
            }
        }
        Ok(())
    })
    .map_err(|e| e.to_string())
}

fn permutation_equivariance(r: &mut TestRunner) -> Result<(), String> {
    let strategy = history(200).prop_flat_map(|h| {
        let n = h.n_samples();
        (
            Just(h),
            tied_scores(n, n),
            Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
        )
    });
    r.run(&strategy, |(h, other, perm)| {
        let (n, t, runs) = (h.n_samples(), h.n_epochs(), h.n_runs());
        let mut values = vec![0.0; h.values().len()];
        for cell in 0..t * runs {
            for (dst, &src) in perm.iter().enumerate() {
                values[cell * n + dst] = h.values()[cell * n + src];
            }
        }
        let ph = PredictionHistory::new(permuted(h.sample_ids(), &perm), t, runs, values).unwrap();

        let s = compute_learnability(&h);
        let ps = compute_learnability(&ph);
        prop_assert_eq!(ps.scores().to_vec(), permuted(s.scores(), &perm));
        prop_assert_eq!(ps.sample_ids().to_vec(), permuted(s.sample_ids(), &perm));
        let ranks = compute_ranks(&s).unwrap();
        let pranks = compute_ranks(&ps).unwrap();
        prop_assert_eq!(pranks.ranks().to_vec(), permuted(ranks.ranks(), &perm));

        let o = LearnabilityVector::new(h.sample_ids().to_vec(), other.clone()).unwrap();
        let po = LearnabilityVector::new(ph.sample_ids().to_vec(), permuted(&other, &perm)).unwrap();
        match (pearson(s.scores(), o.scores()), pearson(ps.scores(), po.scores())) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-12, "pearson {} vs {}", a, b),
            (Err(_), Err(_)) => {}
            (a, b) => return Err(TestCaseError::fail(format!("pearson {a:?} vs {b:?}"))),
        }
        match (rank_correlation(&s, &o), rank_correlation(&ps, &po)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-12, "rank {} vs {}", a, b),
            (Err(_), Err(_)) => {}
            (a, b) => return Err(TestCaseError::fail(format!("rank {a:?} vs {b:?}"))),
        }
        Ok(())
    })
    .map_err(|e| e.to_string())
}

fn pearson_properties(r: &mut TestRunner) -> Result<(), String> {
    let strategy = (2..=300usize).prop_flat_map(|n| {
        (
            vec(-1e3..1e3f64, n),
            vec(-1e3..1e3f64, n),
            1e-3..1e3f64,
            -1e3..1e3f64,
        )
    });
    r.run(&strategy, |(x, y, a, b)| {
        let rxy = pearson(&x, &y).unwrap();
        prop_assert!(rxy.abs() <= 1.0 + 1e-12);
        prop_assert!((pearson(&y, &x).unwrap() - rxy).abs() <= 1e-12);
        prop_assert!((pearson(&x, &x).unwrap() - 1.0).abs() <= 1e-12);
        let z: Vec<f64> = y.iter().map(|v| a * v + b).collect();
        let rxz = pearson(&x, &z).unwrap();
        prop_assert!((rxz - rxy).abs() <= 1e-9, "{} vs {}", rxz, rxy);
        Ok(())
    })
    .map_err(|e| e.to_string())
}

fn rank_transform_invariance(r: &mut TestRunner) -> Result<(), String> {
    let strategy = (tied_scores(1, 2000), 0.1..10.0f64, -5.0..5.0f64);
    r.run(&strategy, |(s, a, b)| {
        let base = ranks_of(&s);
        let exp: Vec<f64> = s.iter().map(|v| v.exp()).collect();
        let affine: Vec<f64> = s.iter().map(|v| a * v + b).collect();
        prop_assert_eq!(rank_scores(&exp).unwrap(), base.clone());
        prop_assert_eq!(rank_scores(&affine).unwrap(), base);
        Ok(())
    })
    .map_err(|e| e.to_string())
}

fn histogram_conservation(r: &mut TestRunner) -> Result<(), String> {
    let value = || {
        prop_oneof![
            8 => -3.0..3.0f64,
            1 => Just(f64::NAN),
            1 => prop_oneof![Just(f64::INFINITY), Just(f64::NEG_INFINITY), Just(0.0), Just(1.0)],
        ]
    };
    let strategy = (0..=400usize).prop_flat_map(move |n| {
        (
            vec(value(), n),
            vec(value(), n),
            1..=50usize,
            1..=50usize,
            (-2.0..2.0f64, 0.01..4.0f64),
            (-2.0..2.0f64, 0.01..4.0f64),
        )
    });
    r.run(&strategy, |(x, y, bx, by, (lx, wx), (ly, wy))| {
        let h = histogram2d(&x, &y, bx, by, (lx, lx + wx), (ly, ly + wy)).unwrap();
        prop_assert_eq!(h.total() + h.overflow(), x.len() as u64);
        prop_assert_eq!(h.counts().len(), bx * by);
        prop_assert!(h.x_edges().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(h.y_edges().windows(2).all(|w| w[0] < w[1]));
        Ok(())
    })
    .map_err(|e| e.to_string())
}

fn criterion_8() -> Outcome {
    let suites: [(&str, Suite); 8] = [
        ("boundedness", boundedness),
        ("mean decomposition", mean_decomposition),
        ("rank oracle", rank_oracle),
        ("rank monotonicity", rank_monotonicity),
        ("permutation equivariance", permutation_equivariance),
        ("pearson properties", pearson_properties),
        ("rank transform invariance", rank_transform_invariance),
        ("histogram conservation", histogram_conservation),
    ];
    let mut failures = Vec::new();
    for (name, suite) in suites {
        if let Err(e) = suite(&mut runner()) {
            failures.push(format!("{name}: {e}"));
        }
    }
    if failures.is_empty() {
        Ok(format!("{} property suites x {CASES} cases", suites.len()))
    } else {
        Err(failures.join("; "))
    }
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("formula fidelity", criterion_1, Some(10.0)),
        ("gradient suite", criterion_2, Some(30.0)),
        ("optimizer single steps", criterion_3, None),
        ("cross-architecture correlation", criterion_4, None),
        ("cross-optimizer correlation", criterion_5, None),
        ("easy/hard calibration", criterion_6, None),
        ("determinism", criterion_7, None),
        ("metric invariants", criterion_8, None),
    ];
    let mut failed = 0;
    for (k, (title, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        if let (Some(limit), Ok(detail)) = (limit, &outcome) {
            if secs >= limit {
                outcome = Err(format!("{detail}; took {secs:.2} s (limit {limit} s)"));
            }
        }
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] criterion {}: {title}: {detail} [{secs:.2} s]", k + 1);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
