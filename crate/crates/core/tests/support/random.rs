//! Small random citation graphs for oracle comparisons.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repcite::{CitationEdge, InstitutionRecord, JournalRecord, WorkRecord};

pub struct RandomGraph {
    pub institutions: Vec<InstitutionRecord>,
    pub journals: Vec<JournalRecord>,
    pub works: Vec<WorkRecord>,
    pub edges: Vec<CitationEdge>,
    pub prestige: Vec<(String, f64)>,
}

/// Up to `max_journals` journals (a few exogenous) and `max_works` works.
/// Edges may repeat so deduplication is exercised.
pub fn random_graph(seed: u64, max_journals: usize, max_works: usize) -> RandomGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_inst = rng.random_range(1..=8usize);
    let institutions: Vec<InstitutionRecord> = (0..n_inst)
        .map(|i| InstitutionRecord {
            id: format!("I{i}"),
            name: format!("inst {i}"),
            country: None,
        })
        .collect();
    // Some institutions stay unlisted and fall back to the floor.
    let mut prestige: Vec<(String, f64)> = Vec::new();
    for i in &institutions {
        if rng.random_bool(0.7) {
            prestige.push((i.id.clone(), 1.0 + rng.random_range(0.0..7.0)));
        }
    }

    let n_journals = rng.random_range(2..=max_journals);
    let n_exo = rng.random_range(0..=n_journals / 3).min(n_journals - 1);
    let n_works = rng.random_range(n_journals..=max_works.max(n_journals));
    let mut journal_of = Vec::with_capacity(n_works);
    for w in 0..n_works {
        journal_of.push(if w < n_journals {
            w
        } else {
            rng.random_range(0..n_journals)
        });
    }
    let journals: Vec<JournalRecord> = (0..n_journals)
        .map(|j| {
            let in_set = j >= n_exo;
            let count = journal_of.iter().filter(|&&x| x == j).count() as u32;
            JournalRecord {
                id: format!("J{j:02}"),
                title: format!("journal {j}"),
                in_set,
                census_paper_count: if in_set { count } else { 0 },
            }
        })
        .collect();
    let works: Vec<WorkRecord> = (0..n_works)
        .map(|w| {
            let k = rng.random_range(0..=3usize);
            WorkRecord {
                id: format!("W{w:03}"),
                journal_id: journals[journal_of[w]].id.clone(),
                year: 2020,
                author_ids: vec![format!("A{}", rng.random_range(0..n_works))],
                institution_ids: (0..k)
                    .map(|_| institutions[rng.random_range(0..n_inst)].id.clone())
                    .collect(),
                page_count: None,
                reference_count: None,
            }
        })
        .collect();
    let n_edges = rng.random_range(0..=n_works * 4);
    let mut edges = Vec::with_capacity(n_edges);
    for _ in 0..n_edges {
        let c = rng.random_range(0..n_works);
        let t = rng.random_range(0..n_works);
        if c != t {
            edges.push(CitationEdge::new(works[c].id.clone(), works[t].id.clone()));
        }
    }
    RandomGraph {
        institutions,
        journals,
        works,
        edges,
        prestige,
    }
}
