use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use log::warn;
use serde_json::json;

use repcite::analytics::{coauthorship_components, ks_two_sample, spearman};
use repcite::export::{self, KsRow, SpearmanRow};
use repcite::ingest::{parse_entity_files, parse_ranking_file};
use repcite::model::{EDGES_FILE, INSTITUTIONS_FILE, JOURNALS_FILE, WORKS_FILE};
use repcite::scoring::{segment_tiers, tier_sizes, UNLABELED};
use repcite::solver::effective_gate;
use repcite::synth::{generate_network, SynthConfig};
use repcite::{
    build_graph, fetch_openalex_works, institution_prestige, population_summary, score_authors,
    summary_and_share_tables, AuthorScore, BuildOptions, CitationGraph, FetchSpec, JournalScores,
    PrestigeTable, RankingSourceFile, ScoringOptions, SolverConfig,
};

use crate::args::*;
use crate::manifest::Run;

pub const JOURNAL_SCORES_FILE: &str = "journal_scores.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const AUTHORS_FILE: &str = "authors.csv";
pub const TIERS_FILE: &str = "tiers.csv";
pub const TIER_COUNTS_FILE: &str = "tier_counts.csv";
pub const PRESTIGE_FILE: &str = "prestige.csv";

struct DataPaths {
    journals: PathBuf,
    works: PathBuf,
    edges: PathBuf,
    institutions: PathBuf,
}

impl DataPaths {
    fn all(&self) -> [&Path; 4] {
        [&self.journals, &self.works, &self.edges, &self.institutions]
    }
}

fn resolve(
    explicit: &Option<PathBuf>,
    data: &Option<PathBuf>,
    file: &str,
    flag: &str,
) -> Result<PathBuf> {
    explicit
        .clone()
        .or_else(|| data.as_ref().map(|d| d.join(file)))
        .ok_or_else(|| anyhow!("missing input: pass --{flag} or --data"))
}

fn data_paths(d: &DataArgs) -> Result<DataPaths> {
    Ok(DataPaths {
        journals: resolve(&d.journals, &d.data, JOURNALS_FILE, "journals")?,
        works: resolve(&d.works, &d.data, WORKS_FILE, "works")?,
        edges: resolve(&d.edges, &d.data, EDGES_FILE, "edges")?,
        institutions: resolve(&d.institutions, &d.data, INSTITUTIONS_FILE, "institutions")?,
    })
}

/// Ranking files; a directory stands for every `.csv` inside, in name order.
fn ranking_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut inner: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("cannot list {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "csv"))
                .collect();
            inner.sort();
            files.extend(inner);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn solver_config(a: &SolverArgs) -> Result<SolverConfig> {
    let mut config = SolverConfig::default();
    if let Some(path) = &a.config {
        let text =
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        config.apply_kv_str(&text)?;
    }
    let flags = [
        ("use_institutional_prestige", &a.use_institutional_prestige),
        ("exogenous_mode", &a.exogenous),
        ("affiliation_combine", &a.affiliation_combine),
        ("scale_min", &a.scale_min),
        ("scale_max", &a.scale_max),
        ("tolerance", &a.tolerance),
        ("max_iterations", &a.max_iterations),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            config.set(key, v)?;
        }
    }
    config.validate()?;
    Ok(config)
}

fn load_graph(
    run: &mut Run,
    paths: &DataPaths,
    census_year: Option<i32>,
    config: &SolverConfig,
) -> Result<CitationGraph> {
    let raw = run.stage("ingest", |_| {
        Ok(parse_entity_files(
            &paths.journals,
            &paths.works,
            &paths.edges,
            &paths.institutions,
        )?)
    })?;
    run.stage("model", |_| {
        Ok(build_graph(
            raw.institutions,
            raw.journals,
            raw.works,
            raw.edges,
            BuildOptions {
                census_year,
                exogenous_default: config.exogenous_mode,
            },
        )?)
    })
}

fn parse_rankings(files: &[PathBuf]) -> Result<Vec<RankingSourceFile>> {
    files.iter().map(|f| Ok(parse_ranking_file(f)?)).collect()
}

fn prestige_table(
    run: &mut Run,
    graph: &CitationGraph,
    ranking: &RankingArgs,
    rankings: &[PathBuf],
    config: &SolverConfig,
) -> Result<PrestigeTable> {
    run.stage("prestige", |_| {
        if let Some(path) = &ranking.prestige {
            let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
            return Ok(PrestigeTable::read_csv(file)?);
        }
        let universe = graph.institutions().iter().map(|i| i.id.as_str());
        if rankings.is_empty() {
            if config.use_institutional_prestige {
                bail!("no ranking sources: pass --rankings or --prestige, or --use-institutional-prestige false");
            }
            return Ok(PrestigeTable::uniform(universe));
        }
        Ok(institution_prestige(&parse_rankings(rankings)?, universe)?)
    })
}

fn read_labels(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut labels = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.with_context(|| format!("{} line {}", path.display(), i + 2))?;
        let (Some(a), Some(l)) = (rec.get(0), rec.get(1)) else {
            bail!(
                "{} line {}: expected author_id,label",
                path.display(),
                i + 2
            );
        };
        labels.insert(a.to_owned(), l.to_owned());
    }
    Ok(labels)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn paths_json(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

/// Everything solve-like commands share: inputs digested, graph built,
/// prestige table ready.
struct Prepared {
    graph: CitationGraph,
    table: PrestigeTable,
    config: SolverConfig,
}

fn prepare(
    run: &mut Run,
    data: &DataArgs,
    ranking: &RankingArgs,
    solver: &SolverArgs,
    extra: &[&Path],
) -> Result<Prepared> {
    let config = run.stage("config", |_| solver_config(solver))?;
    let paths = data_paths(data)?;
    let rankings = ranking_files(&ranking.rankings)?;
    let mut inputs: Vec<&Path> = paths.all().to_vec();
    inputs.extend(rankings.iter().map(PathBuf::as_path));
    inputs.extend(ranking.prestige.as_deref());
    inputs.extend(extra.iter().copied());
    run.set_config(json!({
        "solver": config,
        "census_year": data.census_year,
        "rankings": paths_json(&rankings),
        "prestige": ranking.prestige.as_ref().map(|p| p.display().to_string()),
    }));
    run.record_inputs(inputs)?;
    let graph = load_graph(run, &paths, data.census_year, &config)?;
    if config.exogenous_mode == repcite::ExogenousMode::Include && !graph.has_exogenous_citations()
    {
        warn!("exogenous citations are included but the graph has none");
    }
    let table = prestige_table(run, &graph, ranking, &rankings, &config)?;
    Ok(Prepared {
        graph,
        table,
        config,
    })
}

fn solve_stage(run: &mut Run, p: &Prepared) -> Result<(JournalScores, repcite::ConvergedWeights)> {
    run.stage("solve", |_| {
        Ok(repcite::solve(&p.graph, &p.table, &p.config)?)
    })
}

pub fn ingest(run: &mut Run, a: &IngestArgs) -> Result<()> {
    let paths = data_paths(&a.data)?;
    let rankings = ranking_files(&a.rankings)?;
    run.set_config(json!({ "census_year": a.data.census_year, "rankings": paths_json(&rankings) }));
    let mut inputs: Vec<&Path> = paths.all().to_vec();
    inputs.extend(rankings.iter().map(PathBuf::as_path));
    run.record_inputs(inputs)?;
    let raw_edges = run.stage("ingest", |_| {
        let raw = parse_entity_files(
            &paths.journals,
            &paths.works,
            &paths.edges,
            &paths.institutions,
        )?;
        Ok(raw.edges.len())
    })?;
    let graph = load_graph(run, &paths, a.data.census_year, &SolverConfig::default())?;
    let sources = run.stage("rankings", |_| parse_rankings(&rankings))?;
    run.stage("write", |run| {
        graph.write_dump(&run.out)?;
        for f in [INSTITUTIONS_FILE, JOURNALS_FILE, WORKS_FILE, EDGES_FILE] {
            run.note_output(f);
        }
        for s in &sources {
            run.write(
                &format!("rankings/{}.csv", s.source_name),
                s.to_csv_string().as_bytes(),
            )?;
        }
        let census = (0..graph.works().len())
            .filter(|&w| graph.is_census(w))
            .count();
        let exogenous = (0..graph.edges().len())
            .filter(|&e| !graph.citing_in_set(e))
            .count();
        let rows = vec![
            ("institutions", graph.institutions().len()),
            ("journals", graph.journals().len()),
            (
                "in_set_journals",
                graph.journals().iter().filter(|j| j.in_set).count(),
            ),
            ("works", graph.works().len()),
            ("census_works", census),
            ("authors", graph.authors().len()),
            ("edges", graph.edges().len()),
            ("duplicate_edges_dropped", raw_edges - graph.edges().len()),
            ("exogenous_citations", exogenous),
            ("ranking_sources", sources.len()),
        ];
        let rows: Vec<Vec<String>> = rows
            .into_iter()
            .map(|(k, v)| vec![k.to_owned(), v.to_string()])
            .collect();
        let bytes = csv_bytes(|b| export::write_rows(b, &["item", "count"], &rows))?;
        run.write("ingest_summary.csv", &bytes)
    })
}

pub fn fetch(run: &mut Run, a: &FetchArgs) -> Result<()> {
    let spec = FetchSpec {
        page_cursor: a.cursor.clone(),
        rate_limit: a.rate_limit,
        per_page: a.per_page,
        mailto: a.mailto.clone(),
        ..FetchSpec::new(a.sources.clone(), a.census_year)
    };
    run.set_config(json!({
        "sources": a.sources,
        "census_year": a.census_year,
        "rate_limit": a.rate_limit,
        "per_page": a.per_page,
        "cursor": a.cursor,
        "base_url": spec.base_url,
    }));
    let report = run.stage("fetch", |_| Ok(fetch_openalex_works(&spec)?))?;
    run.stage("write", |run| {
        let r = &report.records;
        let graph = build_graph(
            r.institutions.clone(),
            r.journals.clone(),
            r.works.clone(),
            r.edges.clone(),
            BuildOptions::default(),
        );
        if let Err(e) = &graph {
            warn!("fetched records do not form a valid graph yet: {e}");
        }
        let dir = run.out.clone();
        repcite::model::write_jsonl(&dir.join(INSTITUTIONS_FILE), &r.institutions)?;
        repcite::model::write_jsonl(&dir.join(JOURNALS_FILE), &r.journals)?;
        repcite::model::write_jsonl(&dir.join(WORKS_FILE), &r.works)?;
        repcite::model::write_jsonl(&dir.join(EDGES_FILE), &r.edges)?;
        for f in [INSTITUTIONS_FILE, JOURNALS_FILE, WORKS_FILE, EDGES_FILE] {
            run.note_output(f);
        }
        let rows: Vec<Vec<String>> = [
            ("pages", report.pages),
            ("retries", report.retries),
            ("works", r.works.len()),
            ("edges", r.edges.len()),
            ("skipped_malformed", report.skipped_malformed),
            ("dropped_unmapped", report.dropped_unmapped),
            ("dropped_references", report.dropped_references),
            ("empty_journals", report.empty_journals.len()),
        ]
        .into_iter()
        .map(|(k, v)| vec![k.to_owned(), v.to_string()])
        .collect();
        let bytes = csv_bytes(|b| export::write_rows(b, &["item", "count"], &rows))?;
        run.write("fetch_summary.csv", &bytes)
    })
}

pub fn prestige(run: &mut Run, a: &PrestigeArgs) -> Result<()> {
    let institutions = resolve(
        &a.data.institutions,
        &a.data.data,
        INSTITUTIONS_FILE,
        "institutions",
    )?;
    let rankings = ranking_files(&a.rankings)?;
    run.set_config(json!({ "rankings": paths_json(&rankings) }));
    let mut inputs = vec![institutions.as_path()];
    inputs.extend(rankings.iter().map(PathBuf::as_path));
    run.record_inputs(inputs)?;
    let table = run.stage("prestige", |_| {
        let insts: Vec<repcite::InstitutionRecord> = repcite::ingest::read_jsonl(&institutions)?;
        let sources = parse_rankings(&rankings)?;
        Ok(institution_prestige(
            &sources,
            insts.iter().map(|i| i.id.as_str()),
        )?)
    })?;
    run.stage("write", |run| {
        let bytes = csv_bytes(|b| table.write_csv(b))?;
        run.write(PRESTIGE_FILE, &bytes)
    })
}

pub fn solve(run: &mut Run, a: &SolveArgs) -> Result<()> {
    let p = prepare(run, &a.data, &a.ranking, &a.solver, &[])?;
    let (scores, _) = solve_stage(run, &p)?;
    run.stage("write", |run| {
        let bytes = csv_bytes(|b| export::write_journal_scores(b, &scores))?;
        run.write(JOURNAL_SCORES_FILE, &bytes)?;
        let bytes = csv_bytes(|b| export::write_trace(b, &scores))?;
        run.write(TRACE_FILE, &bytes)
    })
}

pub fn score(run: &mut Run, a: &ScoreArgs) -> Result<()> {
    let extra: Vec<&Path> = a.labels.iter().map(PathBuf::as_path).collect();
    let p = prepare(run, &a.data, &a.ranking, &a.solver, &extra)?;
    let labels = match &a.labels {
        Some(path) => read_labels(path)?,
        None => BTreeMap::new(),
    };
    let (_, weights) = solve_stage(run, &p)?;
    let options = ScoringOptions {
        exclude_self_citations: a.exclude_self_citations,
    };
    let scores = run.stage("score", |_| Ok(score_authors(&p.graph, &weights, &options)))?;
    let tiers = if scores.len() >= 3 {
        Some(segment_tiers(&scores, &labels)?)
    } else {
        warn!("fewer than 3 scored authors; tier column left blank");
        None
    };
    run.stage("write", |run| {
        let bytes =
            csv_bytes(|b| export::write_author_scores(b, &scores, &labels, tiers.as_ref()))?;
        run.write(AUTHORS_FILE, &bytes)
    })
}

/// Read an `authors.csv` written by `score`.
pub fn read_author_scores(path: &Path) -> Result<(Vec<AuthorScore>, BTreeMap<String, String>)> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("{}: missing column `{name}`", path.display()))
    };
    let (id, label, works, cites, rc) = (
        col("author_id")?,
        col("label").ok(),
        col("R_a")?,
        col("L_a")?,
        col("rc")?,
    );
    let mut scores = Vec::new();
    let mut labels = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.with_context(|| format!("{} line {line}", path.display()))?;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let parse_err = |what: &str| anyhow!("{} line {line}: bad {what}", path.display());
        let works: u32 = field(works).parse().map_err(|_| parse_err("R_a"))?;
        let citations: u32 = field(cites).parse().map_err(|_| parse_err("L_a"))?;
        let rc: f64 = field(rc).parse().map_err(|_| parse_err("rc"))?;
        if works == 0 {
            bail!("{} line {line}: R_a must be >= 1", path.display());
        }
        let s = AuthorScore {
            author_id: field(id).to_owned(),
            works,
            citations,
            rc,
            citations_per_paper: f64::from(citations) / f64::from(works),
            attenuated: false,
        };
        if let Some(l) = label.map(field).filter(|l| !l.is_empty()) {
            labels.insert(s.author_id.clone(), l.to_owned());
        }
        scores.push(AuthorScore {
            attenuated: repcite::scoring::attenuation_flag(&s),
            ..s
        });
    }
    Ok((scores, labels))
}

pub fn segment(run: &mut Run, a: &SegmentArgs) -> Result<()> {
    run.set_config(json!({ "labelled_only": a.labelled_only }));
    let mut inputs = vec![a.scores.as_path()];
    inputs.extend(a.labels.as_deref());
    run.record_inputs(inputs)?;
    let (mut scores, mut labels) = run.stage("ingest", |_| read_author_scores(&a.scores))?;
    if let Some(path) = &a.labels {
        labels = read_labels(path)?;
    }
    if a.labelled_only {
        scores.retain(|s| labels.contains_key(&s.author_id));
    }
    let tiers = run.stage("segment", |_| Ok(segment_tiers(&scores, &labels)?))?;
    run.stage("write", |run| {
        let bytes = csv_bytes(|b| export::write_tiers(b, &tiers))?;
        run.write(TIERS_FILE, &bytes)?;
        let bytes = csv_bytes(|b| export::write_tier_counts(b, &tiers))?;
        run.write(TIER_COUNTS_FILE, &bytes)
    })
}

fn variant_name(c: &SolverConfig) -> String {
    format!(
        "rc_{}_{}",
        if c.use_institutional_prestige {
            "prestige"
        } else {
            "plain"
        },
        c.exogenous_mode
    )
}

pub fn report(run: &mut Run, a: &ReportArgs) -> Result<()> {
    let extra: Vec<&Path> = a.labels.iter().map(PathBuf::as_path).collect();
    let p = prepare(run, &a.data, &a.ranking, &a.solver, &extra)?;
    let labels = match &a.labels {
        Some(path) => read_labels(path)?,
        None => BTreeMap::new(),
    };
    let (journal_scores, weights) = solve_stage(run, &p)?;
    let scores = run.stage("score", |_| {
        Ok(score_authors(
            &p.graph,
            &weights,
            &ScoringOptions::default(),
        ))
    })?;
    let graph = &p.graph;

    let mut samples: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (author, label) in &labels {
        samples
            .entry(label.clone())
            .or_default()
            .insert(author.clone());
    }

    let (summaries, networks) = run.stage("tables", |_| {
        let mut summaries = vec![population_summary(graph, "all", a.top)];
        summaries.extend(summary_and_share_tables(graph, &samples, a.top));
        let rc: BTreeMap<String, f64> =
            scores.iter().map(|s| (s.author_id.clone(), s.rc)).collect();
        let networks: Vec<(String, repcite::CoauthorNetwork)> = samples
            .iter()
            .map(|(label, members)| {
                (
                    label.clone(),
                    coauthorship_components(graph, members, Some(&rc)),
                )
            })
            .collect();
        Ok((summaries, networks))
    })?;

    // Raw (gated) citations per census paper, per in-set journal.
    let raw_per_paper: BTreeMap<String, f64> = graph
        .journals()
        .iter()
        .enumerate()
        .filter(|(_, j)| j.in_set)
        .map(|(j, rec)| {
            let n = graph
                .incoming_edge_ids(j)
                .iter()
                .filter(|&&e| effective_gate(graph, e, &p.config) == 1)
                .count();
            (rec.id.clone(), n as f64 / f64::from(rec.census_paper_count))
        })
        .collect();

    let (ks_rows, spearman_rows) = run.stage("statistics", |_| {
        let by_label = |label: &str| -> Vec<&AuthorScore> {
            scores
                .iter()
                .filter(|s| labels.get(&s.author_id).map_or(UNLABELED, String::as_str) == label)
                .collect()
        };
        let mut ks_rows = Vec::new();
        let names: Vec<&String> = samples.keys().collect();
        for (i, x) in names.iter().enumerate() {
            for y in &names[i + 1..] {
                let (sx, sy) = (by_label(x), by_label(y));
                if sx.is_empty() || sy.is_empty() {
                    continue;
                }
                for (metric, get) in [
                    ("rc", (|s: &AuthorScore| s.rc) as fn(&AuthorScore) -> f64),
                    ("citations_per_paper", |s: &AuthorScore| {
                        s.citations_per_paper
                    }),
                ] {
                    let va: Vec<f64> = sx.iter().map(|s| get(s)).collect();
                    let vb: Vec<f64> = sy.iter().map(|s| get(s)).collect();
                    ks_rows.push(KsRow {
                        metric: metric.to_owned(),
                        sample_a: x.to_string(),
                        sample_b: y.to_string(),
                        result: ks_two_sample(&va, &vb)?,
                    });
                }
            }
        }
        let mut spearman_rows = Vec::new();
        let jx: Vec<f64> = journal_scores.scores.values().copied().collect();
        let jy: Vec<f64> = journal_scores
            .scores
            .keys()
            .map(|k| raw_per_paper[k])
            .collect();
        spearman_rows.push(SpearmanRow {
            sample: "journals".into(),
            x: "rc_score".into(),
            y: "raw_citations_per_paper".into(),
            n: jx.len(),
            rho: spearman(&jx, &jy).ok(),
        });
        let mut groups: Vec<(String, Vec<&AuthorScore>)> =
            vec![("all".into(), scores.iter().collect())];
        groups.extend(names.iter().map(|l| (l.to_string(), by_label(l))));
        for (label, group) in groups {
            let x: Vec<f64> = group.iter().map(|s| s.rc).collect();
            let y: Vec<f64> = group.iter().map(|s| s.citations_per_paper).collect();
            spearman_rows.push(SpearmanRow {
                sample: label,
                x: "rc".into(),
                y: "citations_per_paper".into(),
                n: x.len(),
                rho: spearman(&x, &y).ok(),
            });
        }
        Ok((ks_rows, spearman_rows))
    })?;

    let variants = run.stage("variants", |_| {
        Ok(SolverConfig::variants()
            .into_iter()
            .map(|v| {
                let v = SolverConfig {
                    affiliation_combine: p.config.affiliation_combine,
                    scale_min: p.config.scale_min,
                    scale_max: p.config.scale_max,
                    tolerance: p.config.tolerance,
                    max_iterations: p.config.max_iterations,
                    ..v
                };
                let result = repcite::solve(graph, &p.table, &v).map(|(s, _)| s).ok();
                if result.is_none() {
                    warn!(
                        "variant {} did not converge; column left blank",
                        variant_name(&v)
                    );
                }
                (variant_name(&v), result)
            })
            .collect::<Vec<_>>())
    })?;

    run.stage("write", |run| {
        let bytes = csv_bytes(|b| export::write_summary(b, &summaries))?;
        run.write("summary.csv", &bytes)?;
        let bytes = csv_bytes(|b| export::write_shares(b, &summaries))?;
        run.write("shares.csv", &bytes)?;
        let bytes = csv_bytes(|b| export::write_components(b, &networks))?;
        run.write("components.csv", &bytes)?;
        let bytes = csv_bytes(|b| export::write_ks(b, &ks_rows))?;
        run.write("ks.csv", &bytes)?;
        let bytes = csv_bytes(|b| export::write_spearman(b, &spearman_rows))?;
        run.write("spearman.csv", &bytes)?;

        let journal_rows: Vec<Vec<String>> = journal_scores
            .scores
            .iter()
            .map(|(id, s)| vec![id.clone(), export::num(raw_per_paper[id]), export::num(*s)])
            .collect();
        let bytes = csv_bytes(|b| {
            export::write_rows(
                b,
                &["journal_id", "raw_citations_per_paper", "rc_score"],
                &journal_rows,
            )
        })?;
        run.write("plot_journals.csv", &bytes)?;

        let mut header = vec!["journal_id".to_owned()];
        header.extend(variants.iter().map(|(n, _)| n.clone()));
        let variant_rows: Vec<Vec<String>> = journal_scores
            .scores
            .keys()
            .map(|id| {
                let mut row = vec![id.clone()];
                row.extend(variants.iter().map(|(_, s)| {
                    s.as_ref()
                        .and_then(|s| s.get(id))
                        .map(export::num)
                        .unwrap_or_default()
                }));
                row
            })
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let bytes = csv_bytes(|b| export::write_rows(b, &header, &variant_rows))?;
        run.write("plot_variants.csv", &bytes)?;

        let author_rows: Vec<Vec<String>> = scores
            .iter()
            .map(|s| {
                vec![
                    s.author_id.clone(),
                    labels.get(&s.author_id).cloned().unwrap_or_default(),
                    export::num(s.citations_per_paper),
                    export::num(s.rc),
                    s.attenuated.to_string(),
                ]
            })
            .collect();
        let bytes = csv_bytes(|b| {
            export::write_rows(
                b,
                &[
                    "author_id",
                    "label",
                    "citations_per_paper",
                    "rc",
                    "attenuated",
                ],
                &author_rows,
            )
        })?;
        run.write("plot_authors.csv", &bytes)
    })
}

pub fn synth_config(a: &SynthArgs) -> SynthConfig {
    let d = SynthConfig::default();
    SynthConfig {
        seed: a.seed,
        journal_count: a.journal_count.unwrap_or(d.journal_count),
        exogenous_journal_count: a
            .exogenous_journal_count
            .unwrap_or(d.exogenous_journal_count),
        works_per_journal: a.works_per_journal.unwrap_or(d.works_per_journal),
        author_pool: a.author_pool.unwrap_or(d.author_pool),
        institution_pool: a.institution_pool.unwrap_or(d.institution_pool),
        prestige_profile: a.prestige_profile.unwrap_or(d.prestige_profile),
        honest_elite_size: a.honest_elite_size.unwrap_or(d.honest_elite_size),
        cartel_size: a.cartel_size.unwrap_or(d.cartel_size),
        cartel_citation_boost: a.cartel_citation_boost.unwrap_or(d.cartel_citation_boost),
        base_citation_rate: a.base_citation_rate.unwrap_or(d.base_citation_rate),
        ranking_sources: a.ranking_sources.unwrap_or(d.ranking_sources),
        census_year: a.census_year.unwrap_or(d.census_year),
    }
}

pub fn synth(run: &mut Run, a: &SynthArgs) -> Result<()> {
    let config = synth_config(a);
    run.set_config(serde_json::to_value(&config)?);
    let out = run.stage("synth", |_| Ok(generate_network(&config)?))?;
    run.stage("write", |run| {
        let dir = run.out.clone();
        for rel in out.write_to(&dir)? {
            run.note_output(&rel);
        }
        Ok(())
    })
}

/// Tier sizes for `n` authors, exposed for callers checking segment output.
pub fn expected_tier_sizes(n: usize) -> [usize; 3] {
    tier_sizes(n)
}
