//! End-to-end acceptance checks. Runs without the libtest harness so the
//! per-criterion report is always printed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repcite::solver::Solver;
use repcite::synth::{generate_network, ground_truth_separation, SynthConfig};
use repcite::{
    build_graph, institution_prestige, ks_two_sample, score_authors, segment_tiers, spearman,
    BuildOptions, CitationGraph, RankingEntry, RankingSourceFile, ScoringOptions, SolverConfig,
    SolverError,
};
use support::fixture::{oracle_config, table};
use support::oracle;
use support::random::{random_graph, RandomGraph};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn build(g: &RandomGraph) -> CitationGraph {
    build_graph(
        g.institutions.clone(),
        g.journals.clone(),
        g.works.clone(),
        g.edges.clone(),
        BuildOptions::default(),
    )
    .expect("random graphs are valid")
}

fn synth_graph(
    config: &SynthConfig,
) -> (
    CitationGraph,
    repcite::PrestigeTable,
    repcite::synth::SynthOutput,
) {
    let out = generate_network(config).expect("config is feasible");
    let r = out.records.clone();
    let graph = build_graph(
        r.institutions,
        r.journals,
        r.works,
        r.edges,
        BuildOptions::default(),
    )
    .unwrap();
    let table = institution_prestige(
        &out.rankings,
        graph.institutions().iter().map(|i| i.id.as_str()),
    )
    .unwrap();
    (graph, table, out)
}

fn convergence_at_scale() -> Outcome {
    let config = SynthConfig {
        journal_count: 500,
        exogenous_journal_count: 25,
        author_pool: 12_500,
        institution_pool: 1_000,
        base_citation_rate: 9.0,
        ..SynthConfig::default()
    };
    let (graph, table, _) = synth_graph(&config);
    let works = graph
        .works()
        .iter()
        .filter(|w| !w.id.starts_with('V'))
        .count();
    let edges = graph.edges().len();
    ensure!((22_500..=27_500).contains(&works), "{works} works");
    ensure!((225_000..=300_000).contains(&edges), "{edges} edges");
    let solver_config = SolverConfig {
        max_iterations: 60,
        ..SolverConfig::default()
    };
    let start = Instant::now();
    let (scores, _) = repcite::solve(&graph, &table, &solver_config).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let last = scores.trace.last().unwrap();
    ensure!(
        last.mean_delta < 1e-4,
        "final mean delta {}",
        last.mean_delta
    );
    ensure!(secs < 60.0, "solve took {secs:.1}s");
    Ok(format!(
        "{} journals, {works} works, {edges} edges; {} iterations, final mean delta {:.2e}, {secs:.2}s",
        scores.scores.len(),
        scores.iteration_count,
        last.mean_delta
    ))
}

fn oracle_agreement() -> Outcome {
    let mut graphs = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..120 {
        let g = random_graph(seed, 20, 200);
        ensure!(
            g.journals.len() <= 20 && g.works.len() <= 200,
            "seed {seed} too large"
        );
        let graph = build(&g);
        let t = table(&g.prestige);
        for variant in SolverConfig::variants() {
            let config = SolverConfig {
                max_iterations: 80,
                ..variant
            };
            let solver = Solver::new(&graph, &t, config).map_err(|e| e.to_string())?;
            let mut seen: Vec<Vec<f64>> = Vec::new();
            let result = solver.solve_observed(|rec| seen.push(rec.scores.to_vec()));
            let want = oracle::run(
                &g.institutions,
                &g.journals,
                &g.works,
                &g.edges,
                &g.prestige,
                1.0,
                oracle_config(&config),
            );
            ensure!(
                solver.journal_ids() == want.journals,
                "seed {seed}: journal order differs"
            );
            ensure!(
                seen.len() == want.iterations.len(),
                "seed {seed}: iteration count differs"
            );
            ensure!(
                result.is_ok() == want.converged,
                "seed {seed}: convergence differs"
            );
            if let Err(e) = result {
                ensure!(
                    matches!(e, SolverError::NotConverged { .. }),
                    "seed {seed}: {e}"
                );
            }
            for (k, (a, b)) in seen.iter().zip(&want.iterations).enumerate() {
                for (x, y) in a.iter().zip(b) {
                    let gap = (x - y).abs();
                    worst = worst.max(gap);
                    ensure!(gap <= 1e-9, "seed {seed} iteration {}: {x} vs {y}", k + 1);
                }
            }
        }
        graphs += 1;
    }
    Ok(format!(
        "{graphs} graphs x 4 variants, largest per-iteration gap {worst:.1e}"
    ))
}

fn bounds_every_iteration() -> Outcome {
    let mut iterations = 0;
    let mut constant = 0;
    let mut check = |graph: &CitationGraph,
                     t: &repcite::PrestigeTable,
                     config: SolverConfig|
     -> Result<(), String> {
        let solver = Solver::new(graph, t, config).map_err(|e| e.to_string())?;
        let mut failure = None;
        let _ = solver.solve_observed(|rec| {
            iterations += 1;
            let mut distinct = rec.raw.to_vec();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            let min = rec.scores.iter().copied().fold(f64::INFINITY, f64::min);
            let max = rec.scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if distinct.len() >= 2 {
                if (min - 0.05).abs() > 1e-12 || (max - 10.0).abs() > 1e-12 {
                    failure.get_or_insert(format!(
                        "iteration {}: min {min}, max {max}",
                        rec.iteration
                    ));
                }
            } else {
                constant += 1;
            }
        });
        failure.map_or(Ok(()), Err)
    };
    for seed in 0..100 {
        let g = random_graph(seed, 20, 200);
        let graph = build(&g);
        let t = table(&g.prestige);
        for variant in SolverConfig::variants() {
            check(
                &graph,
                &t,
                SolverConfig {
                    max_iterations: 50,
                    ..variant
                },
            )
            .map_err(|e| format!("seed {seed}: {e}"))?;
        }
    }
    let (graph, t, _) = synth_graph(&SynthConfig::default());
    for variant in SolverConfig::variants() {
        check(&graph, &t, variant).map_err(|e| format!("synth: {e}"))?;
    }
    Ok(format!(
        "{iterations} iterations checked, {constant} with a single distinct raw value"
    ))
}

fn ranking(name: &str, ids: &[String]) -> RankingSourceFile {
    let entries = ids
        .iter()
        .enumerate()
        .map(|(i, id)| RankingEntry {
            rank: i as u32 + 1,
            institution_id: id.clone(),
        })
        .collect();
    RankingSourceFile::new(name, entries).unwrap()
}

fn prestige_bounds() -> Outcome {
    let universe: Vec<String> = (0..150).map(|i| format!("I{i:03}")).collect();
    let listed: Vec<String> = universe[..100].to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sources: Vec<RankingSourceFile> = (0..7)
        .map(|s| {
            let mut order = listed.clone();
            // I000..I009 stay in the top decile of every source.
            rand::seq::SliceRandom::shuffle(&mut order[10..], &mut rng);
            rand::seq::SliceRandom::shuffle(&mut order[..10], &mut rng);
            ranking(&format!("s{s}"), &order)
        })
        .collect();
    let t = institution_prestige(&sources, universe.iter().map(String::as_str))
        .map_err(|e| e.to_string())?;
    ensure!(t.source_count() == 7, "source count {}", t.source_count());
    for (id, p) in t.scores() {
        ensure!((1.0..=8.0).contains(p), "{id}: {p}");
    }
    for id in &universe[..10] {
        ensure!(
            t.get(id) == 8.0,
            "{id} is top decile everywhere but scores {}",
            t.get(id)
        );
    }
    for id in &universe[100..] {
        ensure!(
            t.get(id) == 1.0,
            "{id} is unlisted but scores {}",
            t.get(id)
        );
    }
    ensure!(
        t.get("nowhere") == 1.0,
        "unknown institution scores {}",
        t.get("nowhere")
    );

    // Random partial lists.
    for trial in 0..50 {
        let sources: Vec<RankingSourceFile> = (0..7)
            .map(|s| {
                let mut ids = universe.clone();
                rand::seq::SliceRandom::shuffle(&mut ids[..], &mut rng);
                ids.truncate(rng.random_range(1..=150));
                ranking(&format!("t{trial}s{s}"), &ids)
            })
            .collect();
        let t = institution_prestige(&sources, universe.iter().map(String::as_str))
            .map_err(|e| e.to_string())?;
        for (id, p) in t.scores() {
            ensure!((1.0..=8.0).contains(p), "trial {trial} {id}: {p}");
        }
    }
    Ok("150 institutions, 7 sources: range [1, 8], top decile 8.0, unlisted 1.0; 50 random source sets in range".into())
}

fn scale_invariance() -> Outcome {
    let config = SolverConfig::default();
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    let mut reordered = 0;
    let mut compare =
        |label: &str, graph: &CitationGraph, t: &repcite::PrestigeTable| -> Result<bool, String> {
            let Ok((reference, weights)) = repcite::solve(graph, t, &config) else {
                return Ok(false);
            };
            let ref_scores = score_authors(graph, &weights, &ScoringOptions::default());
            let ref_tiers = (ref_scores.len() >= 3)
                .then(|| segment_tiers(&ref_scores, &BTreeMap::new()).unwrap());
            for c in [0.1, 3.0, 10.0] {
                let (scaled, weights) = repcite::solve(graph, &t.scaled(c), &config)
                    .map_err(|e| format!("{label} c={c}: {e}"))?;
                for (id, a) in &reference.scores {
                    let gap = (a - scaled.scores[id]).abs();
                    worst = worst.max(gap);
                    ensure!(
                        gap <= 1e-12,
                        "{label} c={c} {id}: {a} vs {}",
                        scaled.scores[id]
                    );
                }
                let scores = score_authors(graph, &weights, &ScoringOptions::default());
                let tiers =
                    (scores.len() >= 3).then(|| segment_tiers(&scores, &BTreeMap::new()).unwrap());
                let tier_map = |t: &Option<repcite::TierAssignment>| {
                    t.as_ref().map(|t| {
                        t.ranked
                            .iter()
                            .map(|r| (r.author_id.clone(), r.tier))
                            .collect::<BTreeMap<_, _>>()
                    })
                };
                ensure!(
                    tier_map(&tiers) == tier_map(&ref_tiers),
                    "{label} c={c}: tiers differ"
                );
                if let (Some(a), Some(b)) = (&tiers, &ref_tiers) {
                    reordered += a
                        .ranked
                        .iter()
                        .zip(&b.ranked)
                        .filter(|(x, y)| x.author_id != y.author_id)
                        .count();
                }
            }
            checked += 1;
            Ok(true)
        };
    for seed in 0..80 {
        let g = random_graph(seed, 20, 200);
        compare(&format!("seed {seed}"), &build(&g), &table(&g.prestige))?;
    }
    let (graph, t, _) = synth_graph(&SynthConfig::default());
    ensure!(
        compare("synth", &graph, &t)?,
        "synth reference graph did not converge"
    );
    ensure!(checked >= 40, "only {checked} converged graphs");
    Ok(format!("{checked} converged graphs x c in {{0.1, 3, 10}}, largest gap {worst:.1e}, tiers identical ({reordered} within-tier swaps of tied scores)"))
}

/// Mean fractions over seeds 0..20 of the reference synth config, recorded
/// on the first pinned run. Any drift means generator or scoring changed.
const BASELINE_CARTEL_TOP_RAW_DECILE: f64 = 0.9749999999999999;
const BASELINE_CARTEL_BOTTOM_TIER: f64 = 1.0;
const BASELINE_CARTEL_ATTENUATED: f64 = 1.0;
const BASELINE_ELITE_TOP_TIER: f64 = 0.9966666666666667;

fn planted_separation() -> Outcome {
    let (mut top_raw, mut bottom, mut attenuated, mut elite) = (0.0, 0.0, 0.0, 0.0);
    let seeds = 20;
    for seed in 0..seeds {
        let config = SynthConfig {
            seed,
            ..SynthConfig::default()
        };
        let (graph, t, out) = synth_graph(&config);
        let (_, weights) = repcite::solve(&graph, &t, &SolverConfig::default())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let scores = score_authors(&graph, &weights, &ScoringOptions::default());
        let r = ground_truth_separation(&scores, &out.truth).map_err(|e| e.to_string())?;
        ensure!(
            r.cartel_bottom_tier_fraction >= 0.9,
            "seed {seed}: cartel bottom tier {}",
            r.cartel_bottom_tier_fraction
        );
        ensure!(
            r.cartel_attenuated_fraction >= 0.9,
            "seed {seed}: cartel attenuated {}",
            r.cartel_attenuated_fraction
        );
        ensure!(
            r.elite_top_tier_fraction >= 0.9,
            "seed {seed}: elite top tier {}",
            r.elite_top_tier_fraction
        );
        ensure!(
            r.cartel_top_raw_decile_fraction >= 0.9,
            "seed {seed}: cartel top raw decile {}",
            r.cartel_top_raw_decile_fraction
        );
        top_raw += r.cartel_top_raw_decile_fraction;
        bottom += r.cartel_bottom_tier_fraction;
        attenuated += r.cartel_attenuated_fraction;
        elite += r.elite_top_tier_fraction;
    }
    let n = seeds as f64;
    let (top_raw, bottom, attenuated, elite) = (top_raw / n, bottom / n, attenuated / n, elite / n);
    let pinned = [
        (
            "cartel top raw decile",
            top_raw,
            BASELINE_CARTEL_TOP_RAW_DECILE,
        ),
        ("cartel bottom tier", bottom, BASELINE_CARTEL_BOTTOM_TIER),
        ("cartel attenuated", attenuated, BASELINE_CARTEL_ATTENUATED),
        ("elite top tier", elite, BASELINE_ELITE_TOP_TIER),
    ];
    let drift: Vec<String> = pinned
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > 1e-12)
        .map(|(name, got, want)| format!("{name} {got:?} vs baseline {want:?}"))
        .collect();
    ensure!(drift.is_empty(), "{}", drift.join("; "));
    Ok(format!(
        "{seeds} seeds, mean fractions: cartel top raw decile {top_raw:.4}, cartel bottom tier {bottom:.4}, cartel attenuated {attenuated:.4}, elite top tier {elite:.4}"
    ))
}

fn brute_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let less = v.iter().filter(|&&y| y < x).count() as f64;
            let equal = v.iter().filter(|&&y| y == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

fn brute_spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    let (rx, ry) = (brute_ranks(x), brute_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}

fn brute_ks(a: &[f64], b: &[f64]) -> (f64, f64) {
    let cdf = |s: &[f64], t: f64| s.iter().filter(|&&v| v <= t).count() as f64 / s.len() as f64;
    let d = a
        .iter()
        .chain(b)
        .map(|&t| (cdf(a, t) - cdf(b, t)).abs())
        .fold(0.0, f64::max);
    let ne = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let p = if lambda == 0.0 {
        1.0
    } else {
        let mut sum = 0.0;
        for j in 1..=100_000u32 {
            let term = (-2.0 * f64::from(j).powi(2) * lambda * lambda).exp();
            sum += if j % 2 == 1 { term } else { -term };
            if term == 0.0 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    };
    (d, p)
}

fn sample(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let tied = rng.random_bool(0.4);
    (0..n)
        .map(|_| {
            if tied {
                f64::from(rng.random_range(0..5u32))
            } else {
                rng.random::<f64>() * 100.0 - 50.0
            }
        })
        .collect()
}

fn statistics_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut rho_checked, mut worst_rho, mut worst_d, mut worst_p): (usize, f64, f64, f64) =
        (0, 0.0, 0.0, 0.0);
    for i in 0..1000 {
        let n = rng.random_range(2..=25);
        let (x, y) = (sample(&mut rng, n), sample(&mut rng, n));
        match (spearman(&x, &y), brute_spearman(&x, &y)) {
            (Ok(a), Some(b)) => {
                worst_rho = worst_rho.max((a - b).abs());
                ensure!((a - b).abs() <= 1e-10, "sample {i}: rho {a} vs {b}");
                rho_checked += 1;
            }
            (Err(_), None) => {}
            (a, b) => return Err(format!("sample {i}: {a:?} vs {b:?}")),
        }
        let m = rng.random_range(1..=25);
        let z = sample(&mut rng, m);
        let got = ks_two_sample(&x, &z).map_err(|e| e.to_string())?;
        let (d, p) = brute_ks(&x, &z);
        worst_d = worst_d.max((got.d - d).abs());
        worst_p = worst_p.max((got.p_value - p).abs());
        ensure!((got.d - d).abs() <= 1e-10, "sample {i}: D {} vs {d}", got.d);
        ensure!(
            (got.p_value - p).abs() <= 1e-10,
            "sample {i}: p {} vs {p}",
            got.p_value
        );

        let same = ks_two_sample(&x, &x).map_err(|e| e.to_string())?;
        ensure!(
            same.d == 0.0,
            "sample {i}: D on identical samples {}",
            same.d
        );

        let mut distinct = x.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() >= 2 {
            let up: Vec<f64> = x.iter().map(|v| v.powi(3) + 2.0).collect();
            let down: Vec<f64> = x.iter().map(|v| -v.exp().min(1e300)).collect();
            let (r_up, r_down) = (spearman(&x, &up).unwrap(), spearman(&x, &down).unwrap());
            ensure!(
                r_up == 1.0 && r_down == -1.0,
                "sample {i}: monotone rho {r_up}, {r_down}"
            );
        }
    }
    Ok(format!(
        "1000 samples ({rho_checked} non-constant pairs): max |rho| gap {worst_rho:.1e}, max |D| gap {worst_d:.1e}, max |p| gap {worst_p:.1e}"
    ))
}

fn pipeline(dir: &Path) -> Result<(), String> {
    let bin = env!("CARGO_BIN_EXE_repcite");
    let data = dir.join("data");
    let d = data.to_str().unwrap();
    let rankings = data.join("rankings");
    let r = rankings.to_str().unwrap();
    let labels = data.join("labels.csv");
    let l = labels.to_str().unwrap();
    let steps: Vec<Vec<String>> = vec![
        vec![
            "synth".into(),
            "--seed".into(),
            "11".into(),
            "--out".into(),
            d.into(),
        ],
        vec![
            "solve".into(),
            "--data".into(),
            d.into(),
            "--rankings".into(),
            r.into(),
            "--out".into(),
            dir.join("solve").display().to_string(),
        ],
        vec![
            "score".into(),
            "--data".into(),
            d.into(),
            "--rankings".into(),
            r.into(),
            "--labels".into(),
            l.into(),
            "--out".into(),
            dir.join("score").display().to_string(),
        ],
        vec![
            "segment".into(),
            "--scores".into(),
            dir.join("score/authors.csv").display().to_string(),
            "--out".into(),
            dir.join("segment").display().to_string(),
        ],
        vec![
            "report".into(),
            "--data".into(),
            d.into(),
            "--rankings".into(),
            r.into(),
            "--labels".into(),
            l.into(),
            "--out".into(),
            dir.join("report").display().to_string(),
        ],
    ];
    for args in steps {
        let out = Command::new(bin)
            .args(&args)
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(
            out.status.success(),
            "{} failed: {}",
            args[0],
            String::from_utf8_lossy(&out.stderr)
        );
    }
    Ok(())
}

fn csv_files(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "csv" || e == "jsonl") {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                files.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn reproducible_pipeline() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    pipeline(&a)?;
    pipeline(&b)?;
    let (fa, fb) = (csv_files(&a), csv_files(&b));
    ensure!(fa.keys().eq(fb.keys()), "different file sets");
    let csvs = fa.keys().filter(|k| k.ends_with(".csv")).count();
    ensure!(csvs >= 15, "only {csvs} CSV files");
    for (name, bytes) in &fa {
        ensure!(bytes == &fb[name], "{name} differs between runs");
    }
    let total: usize = fa.values().map(Vec::len).sum();
    Ok(format!(
        "{} files ({csvs} CSV, {total} bytes) identical across two runs",
        fa.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("convergence at scale", convergence_at_scale),
        ("solver matches oracle", oracle_agreement),
        ("rescale bounds", bounds_every_iteration),
        ("prestige bounds", prestige_bounds),
        ("prestige scale invariance", scale_invariance),
        ("planted separation", planted_separation),
        ("statistics oracles", statistics_oracles),
        ("reproducible pipeline", reproducible_pipeline),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({secs:.1}s) {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({secs:.1}s) {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
