//! Full-recompute reference for the journal recursion. Works on the raw
//! records with linear scans and re-derives every weight on every
//! iteration; shares no code with the solver. Sums run over edges sorted by
//! (citing id, cited id), the canonical order, so results agree to the last
//! few bits even on graphs whose iterates never settle.

use repcite::{CitationEdge, InstitutionRecord, JournalRecord, WorkRecord};

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub use_prestige: bool,
    pub include_exogenous: bool,
    pub combine_max: bool,
    pub lo: f64,
    pub hi: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub census_year: Option<i32>,
}

pub struct OracleRun {
    /// In-set journal ids, ascending.
    pub journals: Vec<String>,
    /// Rescaled scores after each iteration.
    pub iterations: Vec<Vec<f64>>,
    pub converged: bool,
}

fn find_work<'a>(works: &'a [WorkRecord], id: &str) -> &'a WorkRecord {
    works.iter().find(|w| w.id == id).expect("work exists")
}

fn find_journal<'a>(journals: &'a [JournalRecord], id: &str) -> &'a JournalRecord {
    journals
        .iter()
        .find(|j| j.id == id)
        .expect("journal exists")
}

fn prestige_of(work: &WorkRecord, prestige: &[(String, f64)], floor: f64, max: bool) -> f64 {
    let mut ids: Vec<&String> = Vec::new();
    for i in &work.institution_ids {
        if !ids.contains(&i) {
            ids.push(i);
        }
    }
    if ids.is_empty() {
        return floor;
    }
    let vals: Vec<f64> = ids
        .iter()
        .map(|i| {
            prestige
                .iter()
                .find(|(k, _)| k == *i)
                .map(|(_, v)| *v)
                .unwrap_or(floor)
        })
        .collect();
    if max {
        vals.iter().cloned().fold(f64::MIN, f64::max)
    } else {
        vals.iter().sum::<f64>() / vals.len() as f64
    }
}

pub fn rescale(raw: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let min = raw.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return vec![(lo + hi) / 2.0; raw.len()];
    }
    raw.iter()
        .map(|&r| {
            if r == max {
                hi
            } else {
                lo + (hi - lo) * ((r - min) / (max - min))
            }
        })
        .collect()
}

pub fn run(
    _institutions: &[InstitutionRecord],
    journals: &[JournalRecord],
    works: &[WorkRecord],
    edges: &[CitationEdge],
    prestige: &[(String, f64)],
    floor: f64,
    cfg: OracleConfig,
) -> OracleRun {
    let mut ids: Vec<String> = journals
        .iter()
        .filter(|j| j.in_set)
        .map(|j| j.id.clone())
        .collect();
    ids.sort();
    let n = ids.len();
    let pos = |id: &str| ids.iter().position(|x| x == id);

    let mut pairs: Vec<(String, String)> = Vec::new();
    for e in edges {
        let p = (e.citing_work_id.clone(), e.cited_work_id.clone());
        if !pairs.contains(&p) {
            pairs.push(p);
        }
    }
    pairs.sort();

    let mut p = vec![1.0; n];
    let mut prev_mean = 1.0;
    let mut iterations = Vec::new();
    for _ in 0..cfg.max_iterations {
        let mut raw = vec![0.0; n];
        for (j, jid) in ids.iter().enumerate() {
            let nj = f64::from(find_journal(journals, jid).census_paper_count);
            let mut sum = 0.0;
            for (citing_id, cited_id) in &pairs {
                let cited = find_work(works, cited_id);
                if &cited.journal_id != jid || cfg.census_year.is_some_and(|y| cited.year != y) {
                    continue;
                }
                let citing = find_work(works, citing_id);
                match pos(&citing.journal_id) {
                    Some(k) => {
                        let inst = if cfg.use_prestige {
                            prestige_of(citing, prestige, floor, cfg.combine_max)
                        } else {
                            1.0
                        };
                        sum += inst * p[k];
                    }
                    None if cfg.include_exogenous => sum += 1.0,
                    None => {}
                }
            }
            raw[j] = sum / nj;
        }
        p = rescale(&raw, cfg.lo, cfg.hi);
        iterations.push(p.clone());
        let mean = p.iter().sum::<f64>() / n as f64;
        if (mean - prev_mean).abs() < cfg.tolerance {
            return OracleRun {
                journals: ids,
                iterations,
                converged: true,
            };
        }
        prev_mean = mean;
    }
    OracleRun {
        journals: ids,
        iterations,
        converged: false,
    }
}

/// RC of `author` at the final iterate of `run`, by direct scanning.
#[allow(clippy::too_many_arguments)]
pub fn author_rc(
    journals: &[JournalRecord],
    works: &[WorkRecord],
    edges: &[CitationEdge],
    prestige: &[(String, f64)],
    floor: f64,
    cfg: OracleConfig,
    run: &OracleRun,
    author: &str,
) -> (f64, u32) {
    let last = run.iterations.last().expect("at least one iteration");
    let score = |journal: &str| {
        run.journals
            .iter()
            .position(|j| j == journal)
            .map(|k| last[k])
    };
    let is_census = |w: &WorkRecord| {
        find_journal(journals, &w.journal_id).in_set && cfg.census_year.is_none_or(|y| w.year == y)
    };
    let mine: Vec<&WorkRecord> = works
        .iter()
        .filter(|w| w.author_ids.iter().any(|a| a == author) && is_census(w))
        .collect();
    let mut seen: Vec<(&str, &str)> = Vec::new();
    let (mut sum, mut count) = (0.0, 0u32);
    for e in edges {
        let key = (e.citing_work_id.as_str(), e.cited_work_id.as_str());
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        if !mine.iter().any(|w| w.id == e.cited_work_id) {
            continue;
        }
        let citing = find_work(works, &e.citing_work_id);
        match score(&citing.journal_id) {
            Some(p) => {
                let inst = if cfg.use_prestige {
                    prestige_of(citing, prestige, floor, cfg.combine_max)
                } else {
                    1.0
                };
                sum += inst * p;
                count += 1;
            }
            None if cfg.include_exogenous => {
                sum += 1.0;
                count += 1;
            }
            None => {}
        }
    }
    (sum / mine.len() as f64, count)
}
