//! Acceptance criteria 1 to 10, run one after another so the timed criteria
//! never compete for the CPU. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Arguments not starting with `-` filter the
//! criteria by substring of their names.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dyntopic::corpus::{
    build_windowed_corpus, DocumentSets, TokenizerConfig, Vocabulary, WindowedCorpus,
};
use dyntopic::factor::{
    cnmf_fit, nmf_fit, nnls_fixed_basis, nnls_objective, pos_neg_split, reconstruction_error,
    seeded_init, snmf_fit, FitConfig, SnmfConfig,
};
use dyntopic::metrics::{
    align_topics, c_umass, ranking_change, stability_experiment, tc_w2v, EmbeddingTable,
    ShareConvention, StabilityConfig,
};
use dyntopic::pipeline::{
    fit_dynamic_model, fit_window_models, rank_topics, refine_dynamic_model, stack_window_features,
    KRange, PipelineConfig, RankedTopic, Scoring,
};
use dyntopic::synthetic::{generate, SyntheticConfig};

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random::<f64>())
}

fn non_increasing(initial: f64, trace: &[f64]) -> bool {
    std::iter::once(initial)
        .chain(trace.iter().copied())
        .collect::<Vec<_>>()
        .windows(2)
        .all(|p| p[1] <= p[0] * (1.0 + 1e-9))
}

fn criterion_01_loss_monotonicity() -> (bool, String) {
    let start = Instant::now();
    let config = FitConfig {
        k: 8,
        max_iters: 500,
        rel_tolerance: 0.0,
        ..FitConfig::default()
    };
    let reg = SnmfConfig {
        alpha: 0.1,
        beta: 0.05,
        l1_ratio: 0.5,
    };
    let mut violations = Vec::new();
    let mut updates = 0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_matrix(&mut rng, 100, 200);
        let cfg = config.with_seed(seed);
        let nmf = nmf_fit(v.view(), &cfg).unwrap();
        let snmf = snmf_fit(v.view(), &cfg, &reg).unwrap();
        let g0 = seeded_init(200, 8, seed + 100);
        let h0 = seeded_init(8, 200, seed + 200);
        let cnmf = cnmf_fit(v.view(), g0.view(), h0.view(), &cfg).unwrap();
        for (name, initial, trace) in [
            ("nmf", nmf.initial_loss, &nmf.loss_trace),
            ("snmf", snmf.initial_loss, &snmf.loss_trace),
            ("cnmf", cnmf.initial_loss, &cnmf.loss_trace),
        ] {
            updates += trace.len();
            if trace.len() != 500 || !non_increasing(initial, trace) {
                violations.push(format!("{name} seed {seed}"));
            }
        }
    }
    let elapsed = start.elapsed();
    (
        violations.is_empty() && elapsed <= Duration::from_secs(60),
        format!(
            "{updates} updates checked, violations {violations:?}, {:.1} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_02_planted_factor_recovery() -> (bool, String) {
    let mut errors = Vec::new();
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1_000 + seed);
        let w0 = random_matrix(&mut rng, 50, 4);
        let h0 = random_matrix(&mut rng, 4, 80);
        let v = w0.dot(&h0);
        let config = FitConfig {
            k: 4,
            max_iters: 1000,
            rel_tolerance: 0.0,
            seed,
            ..FitConfig::default()
        };
        let fit = nmf_fit(v.view(), &config).unwrap();
        let norm = v.iter().map(|x| x * x).sum::<f64>();
        errors.push((reconstruction_error(v.view(), fit.w.view(), fit.h.view()) / norm).sqrt());
    }
    let hits = errors.iter().filter(|&&e| e <= 0.05).count();
    let worst = errors.iter().copied().fold(0.0, f64::max);
    (
        hits >= 9,
        format!("{hits}/10 seeds within 0.05, worst relative error {worst:.2e}"),
    )
}

fn criterion_03_restriction_ordering() -> (bool, String) {
    let config = FitConfig {
        k: 4,
        max_iters: 5000,
        rel_tolerance: 1e-10,
        ..FitConfig::default()
    };
    let mut gaps = Vec::new();
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(3_000 + seed);
        let v = random_matrix(&mut rng, 40, 30);
        let nmf = nmf_fit(v.view(), &config.with_seed(seed)).unwrap();
        let g0 = seeded_init(30, 4, seed + 10);
        let h0 = seeded_init(4, 30, seed + 20);
        let cnmf = cnmf_fit(v.view(), g0.view(), h0.view(), &config).unwrap();
        let unrestricted = reconstruction_error(v.view(), nmf.w.view(), nmf.h.view());
        let restricted = reconstruction_error(v.view(), cnmf.w_tilde.view(), cnmf.h_tilde.view());
        gaps.push(restricted - unrestricted);
    }
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    (
        min_gap >= -1e-9,
        format!(
            "convex minus unrestricted loss per instance [{}]",
            gaps.iter()
                .map(|g| format!("{g:.3e}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn criterion_04_nnls_oracle() -> (bool, String) {
    let steps = 5000usize;
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(4_000 + seed);
        let v = Array2::from_shape_simple_fn((6, 2), || rng.random_range(-1.0..2.0));
        let w = Array1::from_shape_simple_fn(6, || rng.random_range(-1.0..3.0));
        let solution = nnls_fixed_basis(v.view(), w.view());
        // |w - V g|^2 = c - 2 b.g + g' A g, evaluated on the grid.
        let a = v.t().dot(&v);
        let b = v.t().dot(&w);
        let c = w.dot(&w);
        let mut grid_best = f64::INFINITY;
        for i in 0..=steps {
            let x = i as f64 * 1e-3;
            for j in 0..=steps {
                let y = j as f64 * 1e-3;
                let f = c - 2.0 * (b[0] * x + b[1] * y)
                    + a[[0, 0]] * x * x
                    + 2.0 * a[[0, 1]] * x * y
                    + a[[1, 1]] * y * y;
                grid_best = grid_best.min(f);
            }
        }
        let direct = nnls_objective(v.view(), w.view(), solution.coefficients.view());
        assert!((direct - solution.objective).abs() <= 1e-12 * (1.0 + direct));
        worst = worst.max(solution.objective - grid_best);
    }
    (
        worst <= 5e-3,
        format!("largest excess over the grid optimum {worst:.3e} on 20 instances"),
    )
}

fn criterion_05_split_identities() -> (bool, String) {
    let mut failures = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5_000 + seed);
        let rows = rng.random_range(1..12);
        let cols = rng.random_range(1..12);
        let m = Array2::from_shape_simple_fn((rows, cols), || match rng.random_range(0..5) {
            0 => 0.0,
            1 => -0.0,
            _ => rng.random_range(-1e3..1e3),
        });
        let (p, n) = pos_neg_split(m.view());
        let exact = m
            .iter()
            .zip(p.iter().zip(n.iter()))
            .all(|(&x, (&a, &b))| a - b == x && a * b == 0.0);
        if !exact {
            failures += 1;
        }
    }
    (
        failures == 0,
        format!("{failures} of 100 matrices violate m = m+ - m- or m+ * m- = 0"),
    )
}

fn ranked(entries: &[(usize, usize, f64)]) -> Vec<RankedTopic> {
    entries
        .iter()
        .map(|&(topic_index, rank, share)| RankedTopic {
            topic_index,
            rank,
            share,
            top_terms: Vec::new(),
        })
        .collect()
}

fn criterion_06_ranking_change_worked_example() -> (bool, String) {
    let base = ranked(&[(0, 1, 0.6), (1, 2, 0.4)]);
    let swapped = ranked(&[(0, 2, 0.4), (1, 1, 0.6)]);
    let swap = ranking_change(&base, &swapped, &[0, 1], ShareConvention::default())
        .unwrap()
        .score;

    let vocab = Vocabulary::from_terms((0..40).map(|i| format!("t{i:02}")).collect()).unwrap();
    let mut self_changes = Vec::new();
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(6_000 + seed);
        let v = random_matrix(&mut rng, 30, 40);
        let fit = nmf_fit(v.view(), &FitConfig::default().with_k(5).with_seed(seed)).unwrap();
        let ranking = rank_topics(&[(2020, fit.w.clone())], fit.h.view(), &vocab, 5).unwrap();
        let alignment = align_topics(fit.h.view(), fit.h.view()).unwrap();
        let change = ranking_change(
            &ranking.topics,
            &ranking.topics,
            &alignment,
            ShareConvention::default(),
        )
        .unwrap();
        self_changes.push(change.score);
    }
    (
        (swap - 0.2).abs() <= 1e-15 && self_changes.iter().all(|&c| c == 0.0),
        format!("swap case {swap}, self comparison of 5 fitted models {self_changes:?}"),
    )
}

fn topic(terms: &[&str]) -> Vec<String> {
    terms.iter().map(|s| s.to_string()).collect()
}

fn criterion_07_coherence_unit_checks() -> (bool, String) {
    let mut table = EmbeddingTable::new(3);
    for w in ["a", "b", "c"] {
        table.insert(w, vec![0.3, -1.2, 2.0]);
    }
    let identical = tc_w2v(&[topic(&["a", "b", "c"])], &table).per_topic[0];

    // D(a)=3 D(b)=3 D(c)=2 D(a,b)=2 D(a,c)=2 D(b,c)=1
    let docs = DocumentSets::from_documents([
        vec!["a", "b", "c"],
        vec!["a", "b"],
        vec!["a", "c"],
        vec!["b", "d"],
    ]);
    let forward = c_umass(&[topic(&["a", "b", "c"])], &docs).per_topic[0];
    let pair = |joint: f64, given: f64| ((joint + 1.0) / given).ln();
    let hand_forward = pair(2.0, 3.0) + pair(2.0, 3.0) + pair(1.0, 3.0);
    let reversed = c_umass(&[topic(&["c", "b", "a"])], &docs).per_topic[0];
    let hand_reversed = pair(1.0, 2.0) + pair(2.0, 2.0) + pair(2.0, 3.0);

    let mut rng = ChaCha8Rng::seed_from_u64(7_000);
    let mut random = EmbeddingTable::new(8);
    let words = ["p", "q", "r", "s", "t"];
    for w in words {
        random.insert(w, (0..8).map(|_| rng.random_range(-1.0..1.0)).collect());
    }
    let order = tc_w2v(&[topic(&words)], &random).per_topic[0];
    let permuted = tc_w2v(&[topic(&["s", "p", "t", "r", "q"])], &random).per_topic[0];

    let checks = [
        (identical - 1.0).abs() <= 1e-12,
        (forward - hand_forward).abs() <= 1e-9,
        (reversed - hand_reversed).abs() <= 1e-9,
        (order - permuted).abs() <= 1e-12,
        (forward - reversed).abs() > 1e-6,
    ];
    (checks.iter().all(|&c| c), format!(
            "identical {identical}, umass {forward:.9} vs hand {hand_forward:.9}, reversed {reversed:.9} vs hand \
             {hand_reversed:.9}, tc-w2v permuted {order:.12} vs {permuted:.12}"
        ))
}

fn synthetic_corpus(
    config: &SyntheticConfig,
) -> (
    WindowedCorpus,
    EmbeddingTable,
    dyntopic::synthetic::SyntheticTruth,
) {
    let synthetic = generate(config).unwrap();
    let corpus = build_windowed_corpus(&synthetic.documents, &TokenizerConfig::default()).unwrap();
    (corpus, synthetic.embeddings, synthetic.truth)
}

const WINDOW_RANGE: KRange = KRange { min: 4, max: 8 };
const DYNAMIC_RANGE: KRange = KRange { min: 4, max: 10 };

fn criterion_08_stability_direction() -> (bool, String) {
    let start = Instant::now();
    let (corpus, table, _) = synthetic_corpus(&SyntheticConfig::default());
    let config = PipelineConfig::default();
    // The dynamic K is the one the coherence criterion selects on this corpus.
    let fits = fit_window_models(
        &corpus.matrices,
        &corpus.vocabulary,
        WINDOW_RANGE,
        Some(&table),
        0,
        &config,
    )
    .unwrap();
    let stacked = stack_window_features(&fits.models).unwrap();
    let dynamic = fit_dynamic_model(
        &stacked,
        &fits.models,
        &corpus.vocabulary,
        DYNAMIC_RANGE,
        Scoring::TcW2v(&table),
        0,
        &config,
    )
    .unwrap();
    let stability = StabilityConfig {
        l_values: vec![0.4, 0.6, 0.9],
        alpha: 1e-5,
        beta: 0.0,
        k: dynamic.k,
        window_k_range: WINDOW_RANGE,
        seeds: (0..10).collect(),
        convention: ShareConvention::default(),
    };
    let result = stability_experiment(
        &corpus.matrices,
        &corpus.vocabulary,
        Some(&table),
        &stability,
        &config,
    )
    .unwrap();
    let n = result.rows.len() as f64;
    let nmf = result.rows.iter().map(|r| r.change_nmf).sum::<f64>() / n;
    let cnmf = result.rows.iter().map(|r| r.change_cnmf).sum::<f64>() / n;
    let per_l: Vec<String> = result
        .rows
        .iter()
        .map(|r| format!("l={} {:.4}/{:.4}", r.l, r.change_nmf, r.change_cnmf))
        .collect();
    let elapsed = start.elapsed();
    (cnmf <= nmf && elapsed <= Duration::from_secs(600), format!(
            "K={}, mean change nmf-nmf {nmf:.5} vs nmf-cnmf {cnmf:.5} over 10 seeds; per l {}; {:.0} s",
            dynamic.k,
            per_l.join(", "),
            elapsed.as_secs_f64()
        ))
}

fn criterion_09_emerging_topic_detection() -> (bool, String) {
    let config = PipelineConfig::default();
    let mut outcomes = Vec::new();
    for seed in 0..10u64 {
        let synthetic = SyntheticConfig {
            seed,
            emerging: true,
            ..SyntheticConfig::default()
        };
        let (corpus, table, truth) = synthetic_corpus(&synthetic);
        let planted = truth.emerging.expect("emerging topic planted");
        let vocab = &corpus.vocabulary;
        let fits = fit_window_models(
            &corpus.matrices,
            vocab,
            WINDOW_RANGE,
            Some(&table),
            seed,
            &config,
        )
        .unwrap();
        let stacked = stack_window_features(&fits.models).unwrap();
        let dynamic = fit_dynamic_model(
            &stacked,
            &fits.models,
            vocab,
            DYNAMIC_RANGE,
            Scoring::TcW2v(&table),
            seed,
            &config,
        )
        .unwrap();
        let refined =
            refine_dynamic_model(&stacked, &fits.models, &dynamic, vocab, &config).unwrap();
        let best = refined
            .ranking
            .topics
            .iter()
            .map(|t| {
                t.top_terms
                    .iter()
                    .take(5)
                    .filter(|(term, _)| planted.contains(term))
                    .count()
            })
            .max()
            .unwrap_or(0);
        outcomes.push((seed, dynamic.k, best));
    }
    let hits = outcomes.iter().filter(|(_, _, best)| *best >= 4).count();
    let detail: Vec<String> = outcomes
        .iter()
        .map(|(s, k, b)| format!("seed {s} K={k} {b}/5"))
        .collect();
    (
        hits >= 8,
        format!(
            "{hits}/10 seeds with >= 4 planted terms in a top-5; {}",
            detail.join(", ")
        ),
    )
}

fn run_cli(config: &Path, out: &Path, args: &[&str]) -> i32 {
    let output = Command::new(env!("CARGO_BIN_EXE_dyntopic"))
        .arg("--config")
        .arg(config)
        .arg("--output")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs");
    if !output.status.success() {
        eprintln!("{args:?}: {}", String::from_utf8_lossy(&output.stderr));
    }
    output.status.code().unwrap_or(-1)
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn criterion_10_end_to_end_determinism() -> (bool, String) {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/synthetic.toml");
    let tmp = tempfile::tempdir().unwrap();
    let mut durations = Vec::new();
    let mut codes = Vec::new();
    for run in ["run1", "run2"] {
        let out = tmp.path().join(run);
        let corpus = out.join("synthetic/corpus.jsonl");
        let embeddings = out.join("synthetic/embeddings.txt");
        let (corpus, embeddings) = (corpus.to_str().unwrap(), embeddings.to_str().unwrap());
        let start = Instant::now();
        for args in [
            vec!["gen-synthetic"],
            vec!["ingest", "--input", corpus],
            vec!["fit", "--embeddings", embeddings],
            vec!["refine"],
            vec!["stability", "--embeddings", embeddings],
        ] {
            codes.push(run_cli(&config, &out, &args));
        }
        durations.push(start.elapsed());
    }
    let (a, b) = (tmp.path().join("run1"), tmp.path().join("run2"));
    let files = files_under(&a);
    let identical = files == files_under(&b)
        && files
            .iter()
            .all(|f| std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap());
    let in_time = durations.iter().all(|d| *d <= Duration::from_secs(120));
    (codes.iter().all(|&c| c == 0) && identical && in_time && files.len() > 10, format!(
            "exit codes {codes:?}, {} files byte-identical: {identical}, run times {:.0} s and {:.0} s",
            files.len(),
            durations[0].as_secs_f64(),
            durations[1].as_secs_f64()
        ))
}

type Criterion = fn() -> (bool, String);

const CRITERIA: [(&str, Criterion); 10] = [
    (
        "criterion_01_loss_monotonicity",
        criterion_01_loss_monotonicity,
    ),
    (
        "criterion_02_planted_factor_recovery",
        criterion_02_planted_factor_recovery,
    ),
    (
        "criterion_03_restriction_ordering",
        criterion_03_restriction_ordering,
    ),
    ("criterion_04_nnls_oracle", criterion_04_nnls_oracle),
    (
        "criterion_05_split_identities",
        criterion_05_split_identities,
    ),
    (
        "criterion_06_ranking_change_worked_example",
        criterion_06_ranking_change_worked_example,
    ),
    (
        "criterion_07_coherence_unit_checks",
        criterion_07_coherence_unit_checks,
    ),
    (
        "criterion_08_stability_direction",
        criterion_08_stability_direction,
    ),
    (
        "criterion_09_emerging_topic_detection",
        criterion_09_emerging_topic_detection,
    ),
    (
        "criterion_10_end_to_end_determinism",
        criterion_10_end_to_end_determinism,
    ),
];

fn main() {
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    let mut ran = 0;
    for (name, criterion) in CRITERIA {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let (pass, detail) = match catch_unwind(AssertUnwindSafe(criterion)) {
            Ok(outcome) => outcome,
            Err(panic) => {
                let message = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {message}"))
            }
        };
        if !pass {
            failed += 1;
        }
        println!("{name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
