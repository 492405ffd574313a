//! Author-level reputable citation scores and tier segmentation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::CitationGraph;
use crate::solver::ConvergedWeights;

#[derive(Debug, Error, PartialEq)]
pub enum ScoringError {
    #[error("unknown author `{0}`")]
    UnknownAuthor(String),
    #[error("author `{0}` has no census works")]
    NoCensusWorks(String),
    #[error("tier segmentation needs at least 3 authors, got {0}")]
    TooFewAuthors(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScoringOptions {
    /// Drop citations where the citing work shares an author with the cited
    /// work.
    pub exclude_self_citations: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuthorScore {
    pub author_id: String,
    /// Census works `R_a`.
    pub works: u32,
    /// Gated raw citation count `L_a`.
    pub citations: u32,
    pub rc: f64,
    pub citations_per_paper: f64,
    pub attenuated: bool,
}

/// Raw citations per paper strictly exceed the RC score.
pub fn attenuation_flag(score: &AuthorScore) -> bool {
    score.citations_per_paper > score.rc
}

fn shares_author(graph: &CitationGraph, a: usize, b: usize) -> bool {
    let other = graph.work_authors(b);
    graph.work_authors(a).iter().any(|x| other.contains(x))
}

fn score_index(
    author: usize,
    graph: &CitationGraph,
    weights: &ConvergedWeights,
    options: &ScoringOptions,
) -> AuthorScore {
    let works = graph.census_works_of_author(author);
    let mut sum = 0.0;
    let mut citations = 0u32;
    for &w in works {
        for &e in graph.incoming_by_work(w) {
            if options.exclude_self_citations && shares_author(graph, graph.edge_citing(e), w) {
                continue;
            }
            sum += weights.weight(e);
            citations += u32::from(weights.gate(e));
        }
    }
    let r = works.len() as f64;
    let mut score = AuthorScore {
        author_id: graph.authors()[author].clone(),
        works: works.len() as u32,
        citations,
        rc: sum / r,
        citations_per_paper: f64::from(citations) / r,
        attenuated: false,
    };
    score.attenuated = attenuation_flag(&score);
    score
}

/// RC of one author: mean over their census works of the summed converged
/// weights of incoming citations. Every listed author of a cited work gets
/// full credit.
pub fn author_rc(
    author_id: &str,
    graph: &CitationGraph,
    weights: &ConvergedWeights,
    options: &ScoringOptions,
) -> Result<AuthorScore, ScoringError> {
    let a = graph
        .author_idx(author_id)
        .ok_or_else(|| ScoringError::UnknownAuthor(author_id.to_owned()))?;
    if graph.census_works_of_author(a).is_empty() {
        return Err(ScoringError::NoCensusWorks(author_id.to_owned()));
    }
    Ok(score_index(a, graph, weights, options))
}

/// Scores for every author with at least one census work, by author id.
pub fn score_authors(
    graph: &CitationGraph,
    weights: &ConvergedWeights,
    options: &ScoringOptions,
) -> Vec<AuthorScore> {
    (0..graph.authors().len())
        .into_par_iter()
        .filter(|&a| !graph.census_works_of_author(a).is_empty())
        .map(|a| score_index(a, graph, weights, options))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TieredAuthor {
    pub author_id: String,
    pub label: Option<String>,
    pub rc: f64,
    /// 1, 2 or 3.
    pub tier: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TierAssignment {
    /// Descending RC, ties by ascending author id.
    pub ranked: Vec<TieredAuthor>,
    pub sizes: [usize; 3],
    /// Label → authors per tier. Unlabelled authors count under
    /// [`UNLABELED`].
    pub counts: BTreeMap<String, [usize; 3]>,
}

pub const UNLABELED: &str = "unlabeled";

impl TierAssignment {
    pub fn tier_of(&self, author_id: &str) -> Option<u8> {
        self.ranked
            .iter()
            .find(|t| t.author_id == author_id)
            .map(|t| t.tier)
    }
}

/// Tier sizes for `n` authors: as equal as possible, earlier tiers larger.
pub fn tier_sizes(n: usize) -> [usize; 3] {
    let base = n / 3;
    let extra = n % 3;
    [
        base + usize::from(extra > 0),
        base + usize::from(extra > 1),
        base,
    ]
}

/// Split authors sorted by descending RC into three contiguous tiers.
pub fn segment_tiers(
    scores: &[AuthorScore],
    labels: &BTreeMap<String, String>,
) -> Result<TierAssignment, ScoringError> {
    if scores.len() < 3 {
        return Err(ScoringError::TooFewAuthors(scores.len()));
    }
    let mut order: Vec<&AuthorScore> = scores.iter().collect();
    order.sort_by(|a, b| {
        b.rc.total_cmp(&a.rc)
            .then_with(|| a.author_id.cmp(&b.author_id))
    });
    let sizes = tier_sizes(order.len());
    let mut counts: BTreeMap<String, [usize; 3]> = BTreeMap::new();
    let mut ranked = Vec::with_capacity(order.len());
    for (pos, s) in order.into_iter().enumerate() {
        let tier = if pos < sizes[0] {
            1
        } else if pos < sizes[0] + sizes[1] {
            2
        } else {
            3
        };
        let label = labels.get(&s.author_id).cloned();
        let key = label.clone().unwrap_or_else(|| UNLABELED.to_owned());
        counts.entry(key).or_default()[tier as usize - 1] += 1;
        ranked.push(TieredAuthor {
            author_id: s.author_id.clone(),
            label,
            rc: s.rc,
            tier,
        });
    }
    Ok(TierAssignment {
        ranked,
        sizes,
        counts,
    })
}
