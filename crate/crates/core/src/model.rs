//! In-memory citation universe.
//!
//! A [`CitationGraph`] is assembled once from raw record lists by
//! [`build_graph`] and is read-only afterwards. Records are kept sorted by id
//! and every cross reference is resolved to a dense index, so the solver and
//! the analytics never touch string lookups in their inner loops.
//!
//! Works are *census works* when they belong to an in-set journal and were
//! published in the census year (every year counts when no census year is
//! configured). Only census works receive prestige flow.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("{kind} `{from}` references unknown {target} `{id}`")]
    DanglingReference {
        kind: &'static str,
        from: String,
        target: &'static str,
        id: String,
    },
    #[error("in-set journal `{0}` has census_paper_count = 0")]
    EmptyCensus(String),
    #[error("work `{0}` cites itself")]
    SelfCitation(String),
    #[error("work `{0}` has no authors")]
    NoAuthors(String),
    #[error("institution `{0}` has an empty name")]
    EmptyName(String),
    #[error("edge `{citing}` -> `{cited}` has f = {f}; expected 0 or 1")]
    InvalidGate {
        citing: String,
        cited: String,
        f: u8,
    },
    #[error("unknown journal `{0}`")]
    UnknownJournal(String),
    #[error("journal `{0}` is not in the journal set")]
    ExogenousJournal(String),
    #[error("unknown author `{0}`")]
    UnknownAuthor(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ModelError {
    fn from(e: std::io::Error) -> Self {
        ModelError::Io(e.to_string())
    }
}

/// Whether citations from journals outside the journal set count fully
/// (`f = 1`) or are omitted (`f = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ExogenousMode {
    Include,
    #[default]
    Exclude,
}

impl ExogenousMode {
    pub fn gate(self) -> u8 {
        match self {
            ExogenousMode::Include => 1,
            ExogenousMode::Exclude => 0,
        }
    }
}

impl std::str::FromStr for ExogenousMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "include" => Ok(ExogenousMode::Include),
            "exclude" => Ok(ExogenousMode::Exclude),
            other => Err(format!("expected `include` or `exclude`, got `{other}`")),
        }
    }
}

impl std::fmt::Display for ExogenousMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExogenousMode::Include => "include",
            ExogenousMode::Exclude => "exclude",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstitutionRecord {
    pub id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub country: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JournalRecord {
    pub id: String,
    pub title: String,
    pub in_set: bool,
    /// Works the journal published in the census year (`N_j`).
    pub census_paper_count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkRecord {
    pub id: String,
    pub journal_id: String,
    pub year: i32,
    pub author_ids: Vec<String>,
    #[serde(default)]
    pub institution_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_count: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationEdge {
    pub citing_work_id: String,
    pub cited_work_id: String,
    #[serde(default = "default_gate")]
    pub f: u8,
}

fn default_gate() -> u8 {
    1
}

impl CitationEdge {
    pub fn new(citing: impl Into<String>, cited: impl Into<String>) -> Self {
        CitationEdge {
            citing_work_id: citing.into(),
            cited_work_id: cited.into(),
            f: 1,
        }
    }
}

/// Options applied while assembling a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BuildOptions {
    /// Publication year of the works that receive prestige flow. `None`
    /// treats every work of an in-set journal as a census work.
    pub census_year: Option<i32>,
    /// Gate stored on edges whose citing journal is exogenous.
    pub exogenous_default: ExogenousMode,
}

/// Validated, indexed citation universe.
#[derive(Debug, Clone, PartialEq)]
pub struct CitationGraph {
    options: BuildOptions,
    institutions: Vec<InstitutionRecord>,
    journals: Vec<JournalRecord>,
    works: Vec<WorkRecord>,
    edges: Vec<CitationEdge>,
    authors: Vec<String>,

    institution_index: HashMap<String, usize>,
    journal_index: HashMap<String, usize>,
    work_index: HashMap<String, usize>,
    author_index: HashMap<String, usize>,

    work_journal: Vec<usize>,
    work_institutions: Vec<Vec<usize>>,
    work_authors: Vec<Vec<usize>>,
    work_is_census: Vec<bool>,
    edge_citing: Vec<usize>,
    edge_cited: Vec<usize>,
    incoming_by_work: Vec<Vec<usize>>,
    incoming_by_journal: Vec<Vec<usize>>,
    census_by_journal: Vec<Vec<usize>>,
    census_by_author: Vec<Vec<usize>>,
}

fn index_unique<T>(
    items: &[T],
    kind: &'static str,
    id: impl Fn(&T) -> &str,
) -> Result<HashMap<String, usize>, ModelError> {
    let mut index = HashMap::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        if index.insert(id(item).to_owned(), i).is_some() {
            return Err(ModelError::DuplicateId {
                kind,
                id: id(item).to_owned(),
            });
        }
    }
    Ok(index)
}

/// Assemble and validate a graph.
///
/// Repeated `(citing, cited)` pairs collapse to one edge. The stored gate is
/// forced to 1 for in-set citing journals and set to
/// `options.exogenous_default` otherwise.
pub fn build_graph(
    institutions: Vec<InstitutionRecord>,
    journals: Vec<JournalRecord>,
    works: Vec<WorkRecord>,
    edges: Vec<CitationEdge>,
    options: BuildOptions,
) -> Result<CitationGraph, ModelError> {
    let mut institutions = institutions;
    let mut journals = journals;
    let mut works = works;
    institutions.sort_by(|a, b| a.id.cmp(&b.id));
    journals.sort_by(|a, b| a.id.cmp(&b.id));
    works.sort_by(|a, b| a.id.cmp(&b.id));

    let institution_index = index_unique(&institutions, "institution", |r| &r.id)?;
    let journal_index = index_unique(&journals, "journal", |r| &r.id)?;
    let work_index = index_unique(&works, "work", |r| &r.id)?;

    if let Some(inst) = institutions.iter().find(|i| i.name.trim().is_empty()) {
        return Err(ModelError::EmptyName(inst.id.clone()));
    }
    if let Some(j) = journals
        .iter()
        .find(|j| j.in_set && j.census_paper_count == 0)
    {
        return Err(ModelError::EmptyCensus(j.id.clone()));
    }

    let mut author_set = BTreeSet::new();
    let mut work_journal = Vec::with_capacity(works.len());
    let mut work_institutions = Vec::with_capacity(works.len());
    for work in works.iter_mut() {
        let mut seen = BTreeSet::new();
        work.author_ids.retain(|a| seen.insert(a.clone()));
        if work.author_ids.is_empty() {
            return Err(ModelError::NoAuthors(work.id.clone()));
        }
        let journal =
            *journal_index
                .get(&work.journal_id)
                .ok_or_else(|| ModelError::DanglingReference {
                    kind: "work",
                    from: work.id.clone(),
                    target: "journal",
                    id: work.journal_id.clone(),
                })?;
        work_journal.push(journal);
        let mut insts = Vec::with_capacity(work.institution_ids.len());
        for inst in &work.institution_ids {
            let i = *institution_index
                .get(inst)
                .ok_or_else(|| ModelError::DanglingReference {
                    kind: "work",
                    from: work.id.clone(),
                    target: "institution",
                    id: inst.clone(),
                })?;
            if !insts.contains(&i) {
                insts.push(i);
            }
        }
        work_institutions.push(insts);
        author_set.extend(work.author_ids.iter().cloned());
    }

    let authors: Vec<String> = author_set.into_iter().collect();
    let author_index: HashMap<String, usize> = authors
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), i))
        .collect();
    let work_authors: Vec<Vec<usize>> = works
        .iter()
        .map(|w| w.author_ids.iter().map(|a| author_index[a]).collect())
        .collect();
    let work_is_census: Vec<bool> = works
        .iter()
        .zip(&work_journal)
        .map(|(w, &j)| journals[j].in_set && options.census_year.is_none_or(|y| w.year == y))
        .collect();

    let mut resolved = Vec::with_capacity(edges.len());
    for edge in edges {
        let lookup = |id: &str| {
            work_index
                .get(id)
                .copied()
                .ok_or_else(|| ModelError::DanglingReference {
                    kind: "edge",
                    from: format!("{}->{}", edge.citing_work_id, edge.cited_work_id),
                    target: "work",
                    id: id.to_owned(),
                })
        };
        let citing = lookup(&edge.citing_work_id)?;
        let cited = lookup(&edge.cited_work_id)?;
        if citing == cited {
            return Err(ModelError::SelfCitation(edge.citing_work_id));
        }
        if edge.f > 1 {
            return Err(ModelError::InvalidGate {
                citing: edge.citing_work_id,
                cited: edge.cited_work_id,
                f: edge.f,
            });
        }
        resolved.push((citing, cited));
    }
    // Work indices follow id order, so this is also (citing id, cited id) order.
    resolved.sort_unstable();
    resolved.dedup();

    let mut edges = Vec::with_capacity(resolved.len());
    let mut edge_citing = Vec::with_capacity(resolved.len());
    let mut edge_cited = Vec::with_capacity(resolved.len());
    let mut incoming_by_work = vec![Vec::new(); works.len()];
    let mut incoming_by_journal = vec![Vec::new(); journals.len()];
    for (id, &(citing, cited)) in resolved.iter().enumerate() {
        let f = if journals[work_journal[citing]].in_set {
            1
        } else {
            options.exogenous_default.gate()
        };
        edges.push(CitationEdge {
            citing_work_id: works[citing].id.clone(),
            cited_work_id: works[cited].id.clone(),
            f,
        });
        edge_citing.push(citing);
        edge_cited.push(cited);
        incoming_by_work[cited].push(id);
        if work_is_census[cited] {
            incoming_by_journal[work_journal[cited]].push(id);
        }
    }

    let mut census_by_journal = vec![Vec::new(); journals.len()];
    let mut census_by_author = vec![Vec::new(); authors.len()];
    for (w, &census) in work_is_census.iter().enumerate() {
        if census {
            census_by_journal[work_journal[w]].push(w);
            for &a in &work_authors[w] {
                census_by_author[a].push(w);
            }
        }
    }

    Ok(CitationGraph {
        options,
        institutions,
        journals,
        works,
        edges,
        authors,
        institution_index,
        journal_index,
        work_index,
        author_index,
        work_journal,
        work_institutions,
        work_authors,
        work_is_census,
        edge_citing,
        edge_cited,
        incoming_by_work,
        incoming_by_journal,
        census_by_journal,
        census_by_author,
    })
}

impl CitationGraph {
    pub fn options(&self) -> BuildOptions {
        self.options
    }

    pub fn institutions(&self) -> &[InstitutionRecord] {
        &self.institutions
    }

    pub fn journals(&self) -> &[JournalRecord] {
        &self.journals
    }

    pub fn works(&self) -> &[WorkRecord] {
        &self.works
    }

    /// Deduplicated edges in ascending `(citing, cited)` id order. The
    /// position of an edge in this slice is its edge id.
    pub fn edges(&self) -> &[CitationEdge] {
        &self.edges
    }

    /// Distinct author ids, sorted.
    pub fn authors(&self) -> &[String] {
        &self.authors
    }

    pub fn journal_idx(&self, id: &str) -> Option<usize> {
        self.journal_index.get(id).copied()
    }

    pub fn work_idx(&self, id: &str) -> Option<usize> {
        self.work_index.get(id).copied()
    }

    pub fn author_idx(&self, id: &str) -> Option<usize> {
        self.author_index.get(id).copied()
    }

    pub fn institution_idx(&self, id: &str) -> Option<usize> {
        self.institution_index.get(id).copied()
    }

    pub fn work_journal(&self, work: usize) -> usize {
        self.work_journal[work]
    }

    pub fn work_institutions(&self, work: usize) -> &[usize] {
        &self.work_institutions[work]
    }

    pub fn work_authors(&self, work: usize) -> &[usize] {
        &self.work_authors[work]
    }

    pub fn is_census(&self, work: usize) -> bool {
        self.work_is_census[work]
    }

    pub fn edge_citing(&self, edge: usize) -> usize {
        self.edge_citing[edge]
    }

    pub fn edge_cited(&self, edge: usize) -> usize {
        self.edge_cited[edge]
    }

    /// Edge ids citing `work`, ascending.
    pub fn incoming_by_work(&self, work: usize) -> &[usize] {
        &self.incoming_by_work[work]
    }

    /// Edge ids landing on census works of journal `journal`, ascending.
    pub fn incoming_edge_ids(&self, journal: usize) -> &[usize] {
        &self.incoming_by_journal[journal]
    }

    pub fn census_works_of_journal(&self, journal: usize) -> &[usize] {
        &self.census_by_journal[journal]
    }

    pub fn census_works_of_author(&self, author: usize) -> &[usize] {
        &self.census_by_author[author]
    }

    /// Whether the journal of the citing work belongs to the journal set.
    pub fn citing_in_set(&self, edge: usize) -> bool {
        self.journals[self.work_journal[self.edge_citing[edge]]].in_set
    }

    pub fn has_exogenous_citations(&self) -> bool {
        (0..self.edges.len()).any(|e| !self.citing_in_set(e))
    }

    /// Every citation landing on a census work of `journal_id`, paired with
    /// the citing work. Citations between works of the same journal are
    /// included.
    pub fn incoming_citations(
        &self,
        journal_id: &str,
    ) -> Result<Vec<(&CitationEdge, &WorkRecord)>, ModelError> {
        let j = self
            .journal_idx(journal_id)
            .ok_or_else(|| ModelError::UnknownJournal(journal_id.to_owned()))?;
        if !self.journals[j].in_set {
            return Err(ModelError::ExogenousJournal(journal_id.to_owned()));
        }
        Ok(self.incoming_by_journal[j]
            .iter()
            .map(|&e| (&self.edges[e], &self.works[self.edge_citing[e]]))
            .collect())
    }

    /// Write one JSON Lines file per entity kind into `dir`, ordered by id.
    pub fn write_dump(&self, dir: &Path) -> Result<(), ModelError> {
        std::fs::create_dir_all(dir)?;
        write_jsonl(&dir.join(INSTITUTIONS_FILE), &self.institutions)?;
        write_jsonl(&dir.join(JOURNALS_FILE), &self.journals)?;
        write_jsonl(&dir.join(WORKS_FILE), &self.works)?;
        write_jsonl(&dir.join(EDGES_FILE), &self.edges)?;
        Ok(())
    }
}

pub const INSTITUTIONS_FILE: &str = "institutions.jsonl";
pub const JOURNALS_FILE: &str = "journals.jsonl";
pub const WORKS_FILE: &str = "works.jsonl";
pub const EDGES_FILE: &str = "edges.jsonl";

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), ModelError> {
    let mut out = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| ModelError::Io(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
