//! Seeded synthetic citation networks with planted honest elites and
//! citation cartels.
//!
//! Structure of a generated network:
//!
//! * Institutions fall into three prestige classes. Ranking sources list
//!   the high class first (noisy order), then a random part of the middle
//!   class; the low class is never ranked.
//! * A tenth of the in-set journals are *elite venues*, hosting works of
//!   high-prestige authors and of the honest elites. A small set of *cartel
//!   venues* hosts the cartel and low-prestige authors. The rest are
//!   mainstream venues.
//! * Every work draws a Poisson number of references. Targets are picked by
//!   preferential attachment on the raw citation count (+1) from a pool that
//!   depends on the citer: high-prestige works lean towards elite venues,
//!   works in cartel venues lean towards cartel venues, everyone else cites
//!   the mainstream.
//! * On top of that, every cartel work receives `cartel_citation_boost`
//!   citations from other cartel works.
//!
//! Each entity class draws from its own ChaCha stream, so adding draws to
//! one class never shifts another.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{RankingEntry, RankingSourceFile, RawRecords};
use crate::model::{
    write_jsonl, CitationEdge, InstitutionRecord, JournalRecord, ModelError, WorkRecord,
    EDGES_FILE, INSTITUTIONS_FILE, JOURNALS_FILE, WORKS_FILE,
};
use crate::scoring::{segment_tiers, AuthorScore, TierAssignment};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("infeasible synth config: {0}")]
    Infeasible(String),
    #[error("labelled author `{0}` has no score")]
    Unscored(String),
    #[error("tier segmentation failed: {0}")]
    Tiers(String),
    #[error(transparent)]
    Io(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    /// In-set journals.
    pub journal_count: usize,
    pub exogenous_journal_count: usize,
    pub works_per_journal: usize,
    /// Authors available to the in-set journals, elites and cartel included.
    pub author_pool: usize,
    pub institution_pool: usize,
    /// Fraction of institutions in the high-prestige class.
    pub prestige_profile: f64,
    pub honest_elite_size: usize,
    pub cartel_size: usize,
    /// Extra citations each cartel work receives from other cartel works.
    pub cartel_citation_boost: usize,
    /// Mean number of references per citing work.
    pub base_citation_rate: f64,
    pub ranking_sources: usize,
    pub census_year: i32,
}

impl Default for SynthConfig {
    /// Reference configuration used by the screening regression.
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            journal_count: 200,
            exogenous_journal_count: 10,
            works_per_journal: 50,
            author_pool: 5000,
            institution_pool: 400,
            prestige_profile: 0.2,
            honest_elite_size: 30,
            cartel_size: 30,
            cartel_citation_boost: 20,
            base_citation_rate: 10.0,
            ranking_sources: 7,
            census_year: 2020,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Infeasible(m));
        if self.journal_count == 0 || self.works_per_journal == 0 {
            return bad("journal_count and works_per_journal must be positive".into());
        }
        if self.author_pool == 0 || self.institution_pool == 0 {
            return bad("author_pool and institution_pool must be positive".into());
        }
        if self.cartel_size + self.honest_elite_size > self.author_pool {
            return bad(format!(
                "cartel_size + honest_elite_size = {} exceeds author_pool {}",
                self.cartel_size + self.honest_elite_size,
                self.author_pool
            ));
        }
        if self.author_pool - self.cartel_size - self.honest_elite_size == 0 {
            return bad("no baseline authors left in the pool".into());
        }
        if !(0.0..=1.0).contains(&self.prestige_profile) {
            return bad(format!(
                "prestige_profile {} outside [0, 1]",
                self.prestige_profile
            ));
        }
        if !(self.base_citation_rate >= 0.0 && self.base_citation_rate.is_finite()) {
            return bad(format!(
                "base_citation_rate {} must be >= 0",
                self.base_citation_rate
            ));
        }
        if self.institution_pool < 3 {
            return bad("institution_pool must be at least 3".into());
        }
        Ok(())
    }

    fn elite_journals(&self) -> usize {
        (self.journal_count / 10).max(1)
    }

    fn cartel_journals(&self) -> usize {
        if self.cartel_size == 0 {
            0
        } else {
            (self.journal_count / 40).clamp(
                1,
                self.journal_count
                    .saturating_sub(self.elite_journals())
                    .max(1),
            )
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthLabel {
    Elite,
    Cartel,
    Baseline,
}

impl TruthLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            TruthLabel::Elite => "elite",
            TruthLabel::Cartel => "cartel",
            TruthLabel::Baseline => "baseline",
        }
    }
}

impl fmt::Display for TruthLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    /// Every author of an in-set work.
    pub labels: BTreeMap<String, TruthLabel>,
}

impl GroundTruth {
    pub fn members(&self, label: TruthLabel) -> BTreeSet<String> {
        self.labels
            .iter()
            .filter(|(_, &l)| l == label)
            .map(|(a, _)| a.clone())
            .collect()
    }

    pub fn as_strings(&self) -> BTreeMap<String, String> {
        self.labels
            .iter()
            .map(|(a, l)| (a.clone(), l.to_string()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub records: RawRecords,
    pub rankings: Vec<RankingSourceFile>,
    pub truth: GroundTruth,
    pub census_year: i32,
}

pub const LABELS_FILE: &str = "labels.csv";
pub const RANKINGS_DIR: &str = "rankings";

impl SynthOutput {
    /// Same file layout `ingest` reads: entity JSON Lines, one ranking CSV
    /// per source under `rankings/`, and `labels.csv`.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<String>, SynthError> {
        let io = |e: std::io::Error| SynthError::Io(ModelError::from(e));
        std::fs::create_dir_all(dir.join(RANKINGS_DIR)).map_err(io)?;
        write_jsonl(&dir.join(INSTITUTIONS_FILE), &self.records.institutions)?;
        write_jsonl(&dir.join(JOURNALS_FILE), &self.records.journals)?;
        write_jsonl(&dir.join(WORKS_FILE), &self.records.works)?;
        write_jsonl(&dir.join(EDGES_FILE), &self.records.edges)?;
        let mut written = vec![
            INSTITUTIONS_FILE.to_owned(),
            JOURNALS_FILE.to_owned(),
            WORKS_FILE.to_owned(),
            EDGES_FILE.to_owned(),
        ];
        for r in &self.rankings {
            let rel = format!("{RANKINGS_DIR}/{}.csv", r.source_name);
            std::fs::write(dir.join(&rel), r.to_csv_string()).map_err(io)?;
            written.push(rel);
        }
        let mut labels = String::from("author_id,label\n");
        for (a, l) in &self.truth.labels {
            labels.push_str(&format!("{a},{l}\n"));
        }
        std::fs::write(dir.join(LABELS_FILE), labels).map_err(io)?;
        written.push(LABELS_FILE.to_owned());
        Ok(written)
    }
}

// Stream labels, one per entity class.
const STREAM_INSTITUTIONS: u64 = 1;
const STREAM_RANKINGS: u64 = 2;
const STREAM_AUTHORS: u64 = 3;
const STREAM_WORKS: u64 = 4;
const STREAM_EXOGENOUS: u64 = 5;
const STREAM_CITATIONS: u64 = 6;
const STREAM_CARTEL: u64 = 7;

fn stream(seed: u64, label: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(label);
    rng
}

const COUNTRIES: [&str; 12] = [
    "US", "CN", "GB", "DE", "FR", "ES", "IT", "JP", "AU", "CA", "IN", "BR",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    High,
    Mid,
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Venue {
    Elite,
    Mainstream,
    Cartel,
}

struct Pools {
    elite: Vec<usize>,
    main: Vec<usize>,
    cartel: Vec<usize>,
}

impl Pools {
    fn pick<'a>(&'a self, rng: &mut ChaCha8Rng, weights: [f64; 3]) -> &'a [usize] {
        let pools = [&self.elite, &self.main, &self.cartel];
        let total: f64 = weights
            .iter()
            .zip(pools)
            .filter(|(_, p)| !p.is_empty())
            .map(|(w, _)| w)
            .sum();
        let mut x = rng.random::<f64>() * total;
        for (w, p) in weights.iter().zip(pools) {
            if p.is_empty() {
                continue;
            }
            if x < *w {
                return p;
            }
            x -= w;
        }
        pools.into_iter().rev().find(|p| !p.is_empty()).unwrap()
    }
}

fn choose<T: Copy>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

/// Generate a network and its ground-truth labels. Pure function of
/// `config`.
pub fn generate_network(config: &SynthConfig) -> Result<SynthOutput, SynthError> {
    config.validate()?;
    let seed = config.seed;

    // Institutions
    let mut rng = stream(seed, STREAM_INSTITUTIONS);
    let n_inst = config.institution_pool;
    let n_high = ((config.prestige_profile * n_inst as f64).round() as usize).min(n_inst);
    let n_mid = (n_inst - n_high) / 2;
    let class_of = |i: usize| {
        if i < n_high {
            Class::High
        } else if i < n_high + n_mid {
            Class::Mid
        } else {
            Class::Low
        }
    };
    let institutions: Vec<InstitutionRecord> = (0..n_inst)
        .map(|i| InstitutionRecord {
            id: format!("I{i:05}"),
            name: format!("Institution {i}"),
            country: Some(choose(&mut rng, &COUNTRIES).to_owned()),
        })
        .collect();
    let by_class = |c: Class| -> Vec<usize> { (0..n_inst).filter(|&i| class_of(i) == c).collect() };
    let (high, mid, low) = (
        by_class(Class::High),
        by_class(Class::Mid),
        by_class(Class::Low),
    );
    let any_of = |v: &Vec<usize>| {
        if v.is_empty() {
            (0..n_inst).collect()
        } else {
            v.clone()
        }
    };
    let (high, low) = (any_of(&high), any_of(&low));

    // Rankings: high class on top in noisy order, then part of the middle class.
    let mut rng = stream(seed, STREAM_RANKINGS);
    let mut rankings = Vec::with_capacity(config.ranking_sources);
    for s in 0..config.ranking_sources {
        let mut keyed: Vec<(f64, usize)> = high
            .iter()
            .filter(|&&i| class_of(i) == Class::High)
            .map(|&i| (i as f64 + rng.random::<f64>() * n_high as f64 * 0.5, i))
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut listed: Vec<usize> = keyed.into_iter().map(|(_, i)| i).collect();
        let mut tail: Vec<usize> = mid
            .iter()
            .copied()
            .filter(|_| rng.random_bool(0.6))
            .collect();
        tail.shuffle(&mut rng);
        listed.extend(tail);
        if listed.is_empty() {
            continue;
        }
        let entries = listed
            .into_iter()
            .enumerate()
            .map(|(r, i)| RankingEntry {
                rank: r as u32 + 1,
                institution_id: institutions[i].id.clone(),
            })
            .collect();
        rankings.push(
            RankingSourceFile::new(format!("source{}", s + 1), entries)
                .expect("generated rankings are valid"),
        );
    }

    // Authors: elites first, then cartel, then baseline.
    let mut rng = stream(seed, STREAM_AUTHORS);
    let n_auth = config.author_pool;
    let label_of = |a: usize| {
        if a < config.honest_elite_size {
            TruthLabel::Elite
        } else if a < config.honest_elite_size + config.cartel_size {
            TruthLabel::Cartel
        } else {
            TruthLabel::Baseline
        }
    };
    let author_ids: Vec<String> = (0..n_auth).map(|a| format!("A{a:06}")).collect();
    let home: Vec<usize> = (0..n_auth)
        .map(|a| match label_of(a) {
            TruthLabel::Elite => choose(&mut rng, &high),
            TruthLabel::Cartel => choose(&mut rng, &low),
            TruthLabel::Baseline => rng.random_range(0..n_inst),
        })
        .collect();
    let authors_where =
        |pred: &dyn Fn(usize) -> bool| -> Vec<usize> { (0..n_auth).filter(|&a| pred(a)).collect() };
    let elites = authors_where(&|a| label_of(a) == TruthLabel::Elite);
    let cartel = authors_where(&|a| label_of(a) == TruthLabel::Cartel);
    let baseline = authors_where(&|a| label_of(a) == TruthLabel::Baseline);
    let baseline_high = {
        let v: Vec<usize> = baseline
            .iter()
            .copied()
            .filter(|&a| class_of(home[a]) == Class::High)
            .collect();
        if v.is_empty() {
            baseline.clone()
        } else {
            v
        }
    };
    let baseline_low = {
        let v: Vec<usize> = baseline
            .iter()
            .copied()
            .filter(|&a| class_of(home[a]) == Class::Low)
            .collect();
        if v.is_empty() {
            baseline.clone()
        } else {
            v
        }
    };

    // Journals
    let n_elite_j = config.elite_journals();
    let n_cartel_j = config.cartel_journals();
    let venue_of = |j: usize| {
        if j < n_elite_j {
            Venue::Elite
        } else if j >= config.journal_count - n_cartel_j {
            Venue::Cartel
        } else {
            Venue::Mainstream
        }
    };
    let mut journals: Vec<JournalRecord> = (0..config.journal_count)
        .map(|j| JournalRecord {
            id: format!("J{j:04}"),
            title: format!("Journal {j}"),
            in_set: true,
            census_paper_count: config.works_per_journal as u32,
        })
        .collect();
    journals.extend((0..config.exogenous_journal_count).map(|x| JournalRecord {
        id: format!("X{x:04}"),
        title: format!("Outside Journal {x}"),
        in_set: false,
        census_paper_count: 0,
    }));

    // In-set works
    let mut rng = stream(seed, STREAM_WORKS);
    let elite_share = if elites.is_empty() {
        0.0
    } else {
        (elites.len() as f64 * 6.0 / (n_elite_j * config.works_per_journal) as f64).min(0.5)
    };
    let mut works: Vec<WorkRecord> = Vec::new();
    let mut work_venue: Vec<Venue> = Vec::new();
    let mut work_high: Vec<bool> = Vec::new();
    let mut is_cartel_work: Vec<bool> = Vec::new();
    for (j, journal) in journals.iter().enumerate().take(config.journal_count) {
        let venue = venue_of(j);
        for k in 0..config.works_per_journal {
            let team = rng.random_range(1..=3usize);
            let mut team_members: Vec<usize> = Vec::with_capacity(team);
            let (lead, co_pool): (usize, &[usize]) = match venue {
                Venue::Elite => {
                    if rng.random_bool(elite_share) {
                        (choose(&mut rng, &elites), &baseline_high)
                    } else {
                        (choose(&mut rng, &baseline_high), &baseline_high)
                    }
                }
                Venue::Cartel => {
                    if !cartel.is_empty() && rng.random_bool(0.6) {
                        (choose(&mut rng, &cartel), &cartel)
                    } else {
                        (choose(&mut rng, &baseline_low), &baseline_low)
                    }
                }
                Venue::Mainstream => (choose(&mut rng, &baseline), &baseline),
            };
            team_members.push(lead);
            for _ in 1..team {
                let c = choose(&mut rng, co_pool);
                if !team_members.contains(&c) {
                    team_members.push(c);
                }
            }
            let mut insts: Vec<usize> = team_members.iter().map(|&a| home[a]).collect();
            insts.sort_unstable();
            insts.dedup();
            work_high.push(insts.iter().any(|&i| class_of(i) == Class::High));
            is_cartel_work.push(
                team_members
                    .iter()
                    .any(|&a| label_of(a) == TruthLabel::Cartel),
            );
            work_venue.push(venue);
            works.push(WorkRecord {
                id: format!("W{j:04}-{k:04}"),
                journal_id: journal.id.clone(),
                year: config.census_year,
                author_ids: team_members
                    .iter()
                    .map(|&a| author_ids[a].clone())
                    .collect(),
                institution_ids: insts.iter().map(|&i| institutions[i].id.clone()).collect(),
                page_count: Some(rng.random_range(5..=40)),
                reference_count: None,
            });
        }
    }
    let n_census = works.len();

    // Exogenous works cite into the set but receive no flow.
    let mut rng = stream(seed, STREAM_EXOGENOUS);
    for x in 0..config.exogenous_journal_count {
        for k in 0..config.works_per_journal {
            let inst = rng.random_range(0..n_inst);
            works.push(WorkRecord {
                id: format!("V{x:04}-{k:04}"),
                journal_id: format!("X{x:04}"),
                year: config.census_year + rng.random_range(0..=1),
                author_ids: vec![format!("E{x:04}-{k:04}")],
                institution_ids: vec![institutions[inst].id.clone()],
                page_count: Some(rng.random_range(5..=40)),
                reference_count: None,
            });
            work_venue.push(Venue::Mainstream);
            work_high.push(class_of(inst) == Class::High);
            is_cartel_work.push(false);
        }
    }

    // Baseline citations by preferential attachment. Each pool is an urn
    // holding every candidate once plus once per citation received.
    let mut rng = stream(seed, STREAM_CITATIONS);
    let mut pools = Pools {
        elite: Vec::new(),
        main: Vec::new(),
        cartel: Vec::new(),
    };
    for (w, venue) in work_venue.iter().enumerate().take(n_census) {
        match venue {
            Venue::Elite => {
                pools.elite.push(w);
                pools.main.push(w);
            }
            Venue::Mainstream => pools.main.push(w),
            Venue::Cartel => pools.cartel.push(w),
        }
    }
    let poisson = (config.base_citation_rate > 0.0)
        .then(|| Poisson::new(config.base_citation_rate).expect("rate validated"));
    let mut cited_by: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); works.len()];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for citing in 0..works.len() {
        let Some(poisson) = &poisson else { break };
        let refs = poisson.sample(&mut rng) as usize;
        let weights = if work_venue[citing] == Venue::Cartel {
            [0.0, 0.2, 0.8]
        } else if work_high[citing] {
            [0.6, 0.4, 0.0]
        } else {
            [0.05, 0.945, 0.005]
        };
        for _ in 0..refs {
            for _attempt in 0..20 {
                let pool = pools.pick(&mut rng, weights);
                let target = choose(&mut rng, pool);
                if target == citing || !cited_by[target].insert(citing) {
                    continue;
                }
                edges.push((citing, target));
                match work_venue[target] {
                    Venue::Elite => {
                        pools.elite.push(target);
                        pools.main.push(target);
                    }
                    Venue::Mainstream => pools.main.push(target),
                    Venue::Cartel => pools.cartel.push(target),
                }
                break;
            }
        }
    }

    // Cartel boost: `boost` new citations per cartel work, fewer only when
    // the cartel has too few works left that do not already cite it.
    let mut rng = stream(seed, STREAM_CARTEL);
    let cartel_works: Vec<usize> = (0..n_census).filter(|&w| is_cartel_work[w]).collect();
    for &target in &cartel_works {
        let mut candidates: Vec<usize> = cartel_works
            .iter()
            .copied()
            .filter(|&c| c != target && !cited_by[target].contains(&c))
            .collect();
        candidates.shuffle(&mut rng);
        for &c in candidates.iter().take(config.cartel_citation_boost) {
            cited_by[target].insert(c);
            edges.push((c, target));
        }
    }

    let mut edge_records: Vec<CitationEdge> = edges
        .iter()
        .map(|&(c, t)| CitationEdge::new(works[c].id.clone(), works[t].id.clone()))
        .collect();
    edge_records.sort_by(|a, b| {
        (&a.citing_work_id, &a.cited_work_id).cmp(&(&b.citing_work_id, &b.cited_work_id))
    });
    let mut refs_out = vec![0u32; works.len()];
    for &(c, _) in &edges {
        refs_out[c] += 1;
    }
    for (w, r) in works.iter_mut().zip(refs_out) {
        w.reference_count = Some(r);
    }

    let mut truth = GroundTruth::default();
    for w in works.iter().take(n_census) {
        for a in &w.author_ids {
            let idx: usize = a[1..].parse().expect("generated id");
            truth.labels.insert(a.clone(), label_of(idx));
        }
    }

    Ok(SynthOutput {
        records: RawRecords {
            institutions,
            journals,
            works,
            edges: edge_records,
        },
        rankings,
        truth,
        census_year: config.census_year,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    pub tiers: TierAssignment,
    /// Label → authors per tier.
    pub counts: BTreeMap<String, [usize; 3]>,
    pub cartel_attenuated_fraction: f64,
    pub cartel_bottom_tier_fraction: f64,
    pub cartel_top_raw_decile_fraction: f64,
    pub elite_top_tier_fraction: f64,
}

fn fraction(hit: usize, of: usize) -> f64 {
    if of == 0 {
        0.0
    } else {
        hit as f64 / of as f64
    }
}

/// Tier the scored population and report how the planted groups land.
pub fn ground_truth_separation(
    scores: &[AuthorScore],
    truth: &GroundTruth,
) -> Result<SeparationReport, SynthError> {
    let scored: BTreeMap<&str, &AuthorScore> =
        scores.iter().map(|s| (s.author_id.as_str(), s)).collect();
    if let Some(missing) = truth
        .labels
        .keys()
        .find(|a| !scored.contains_key(a.as_str()))
    {
        return Err(SynthError::Unscored(missing.clone()));
    }
    let tiers =
        segment_tiers(scores, &truth.as_strings()).map_err(|e| SynthError::Tiers(e.to_string()))?;
    let cartel = truth.members(TruthLabel::Cartel);
    let elite = truth.members(TruthLabel::Elite);

    let attenuated = cartel
        .iter()
        .filter(|a| scored[a.as_str()].attenuated)
        .count();
    let bottom = cartel
        .iter()
        .filter(|a| tiers.tier_of(a) == Some(3))
        .count();
    let top_elite = elite.iter().filter(|a| tiers.tier_of(a) == Some(1)).count();

    let mut by_raw: Vec<&AuthorScore> = scores.iter().collect();
    by_raw.sort_by(|a, b| {
        b.citations
            .cmp(&a.citations)
            .then_with(|| a.author_id.cmp(&b.author_id))
    });
    let decile = by_raw.len().div_ceil(10);
    let top_raw: BTreeSet<&str> = by_raw[..decile]
        .iter()
        .map(|s| s.author_id.as_str())
        .collect();
    let in_top_raw = cartel
        .iter()
        .filter(|a| top_raw.contains(a.as_str()))
        .count();

    let mut counts = tiers.counts.clone();
    for label in [TruthLabel::Elite, TruthLabel::Cartel, TruthLabel::Baseline] {
        counts.entry(label.to_string()).or_default();
    }
    Ok(SeparationReport {
        counts,
        cartel_attenuated_fraction: fraction(attenuated, cartel.len()),
        cartel_bottom_tier_fraction: fraction(bottom, cartel.len()),
        cartel_top_raw_decile_fraction: fraction(in_top_raw, cartel.len()),
        elite_top_tier_fraction: fraction(top_elite, elite.len()),
        tiers,
    })
}
