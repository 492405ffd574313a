//! Shared fixtures and helpers.

use repcite::{
    AffiliationCombine, CitationEdge, ExogenousMode, InstitutionRecord, JournalRecord,
    PrestigeTable, SolverConfig, WorkRecord,
};

use super::oracle::OracleConfig;
use super::random::RandomGraph;

pub fn table(prestige: &[(String, f64)]) -> PrestigeTable {
    let mut csv = String::from("institution_id,prestige\n");
    for (k, v) in prestige {
        csv.push_str(&format!("{k},{v:?}\n"));
    }
    PrestigeTable::read_csv(csv.as_bytes()).unwrap()
}

pub fn oracle_config(c: &SolverConfig) -> OracleConfig {
    OracleConfig {
        use_prestige: c.use_institutional_prestige,
        include_exogenous: c.exogenous_mode == ExogenousMode::Include,
        combine_max: c.affiliation_combine == AffiliationCombine::Max,
        lo: c.scale_min,
        hi: c.scale_max,
        tolerance: c.tolerance,
        max_iterations: c.max_iterations,
        census_year: None,
    }
}

pub fn journal(id: &str, n: u32) -> JournalRecord {
    JournalRecord {
        id: id.into(),
        title: id.into(),
        in_set: true,
        census_paper_count: n,
    }
}

pub fn work(id: &str, journal: &str, author: &str, inst: &[&str]) -> WorkRecord {
    WorkRecord {
        id: id.into(),
        journal_id: journal.into(),
        year: 2020,
        author_ids: vec![author.into()],
        institution_ids: inst.iter().map(|s| s.to_string()).collect(),
        page_count: None,
        reference_count: None,
    }
}

/// Five journals, two works each, thirty citations.
pub fn five_journal_fixture() -> RandomGraph {
    let institutions = ["I1", "I2", "I3"]
        .iter()
        .map(|i| InstitutionRecord {
            id: i.to_string(),
            name: i.to_string(),
            country: None,
        })
        .collect();
    let journals = ["A", "B", "C", "D", "E"]
        .iter()
        .map(|j| journal(j, 2))
        .collect();
    let insts: [&[&str]; 3] = [&["I1"], &["I2", "I3"], &[]];
    let works: Vec<WorkRecord> = ["A", "B", "C", "D", "E"]
        .iter()
        .enumerate()
        .flat_map(|(j, jid)| {
            (0..2).map(move |k| {
                work(
                    &format!("{jid}{k}"),
                    jid,
                    &format!("a{}", (j + k) % 4),
                    insts[(j + k) % 3],
                )
            })
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..works.len() {
        for step in [1, 3, 7] {
            let t = (i * step + step) % works.len();
            if t != i {
                edges.push(CitationEdge::new(works[i].id.clone(), works[t].id.clone()));
            }
        }
    }
    edges.truncate(30);
    assert_eq!(edges.len(), 30);
    RandomGraph {
        institutions,
        journals,
        works,
        edges,
        prestige: vec![("I1".into(), 8.0), ("I2".into(), 2.0), ("I3".into(), 4.0)],
    }
}
