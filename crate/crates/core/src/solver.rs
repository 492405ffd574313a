//! Journal prestige by rescaled fixed-point iteration.
//!
//! Starting from a score of 1 for every in-set journal, each iteration
//!
//! 1. weighs every citation landing on a census work by the prestige of the
//!    citing work's institutions times the current score of the citing
//!    journal (exogenous citing journals weigh 1, gated by `f`),
//! 2. sums the weights per cited journal and divides by its census paper
//!    count,
//! 3. maps the per-journal sums affinely onto `[scale_min, scale_max]`.
//!
//! The loop stops when the mean rescaled score moves less than the tolerance
//! between consecutive iterations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CitationGraph, ExogenousMode};
use crate::prestige::PrestigeTable;

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error("graph has no in-set journals")]
    NoJournals,
    #[error("rescale input is empty")]
    EmptyInput,
    #[error("non-finite or negative raw score {0}")]
    NonFinite(f64),
    #[error("edge {0} does not exist")]
    UnknownEdge(usize),
    #[error("journal `{0}` is unknown or has no score")]
    UnknownJournal(String),
    #[error("cited journal `{0}` is not in the journal set")]
    ExogenousCitedJournal(String),
    #[error("no convergence after {iterations} iterations (last mean delta {final_delta:e})")]
    NotConverged {
        iterations: usize,
        final_delta: f64,
        trace: Vec<TracePoint>,
    },
}

/// How the prestige of several affiliations of one citing work combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AffiliationCombine {
    #[default]
    Mean,
    Max,
}

impl FromStr for AffiliationCombine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(AffiliationCombine::Mean),
            "max" => Ok(AffiliationCombine::Max),
            other => Err(format!("expected `mean` or `max`, got `{other}`")),
        }
    }
}

impl fmt::Display for AffiliationCombine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AffiliationCombine::Mean => "mean",
            AffiliationCombine::Max => "max",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub use_institutional_prestige: bool,
    pub exogenous_mode: ExogenousMode,
    pub affiliation_combine: AffiliationCombine,
    pub scale_min: f64,
    pub scale_max: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    /// Reference configuration: institutional prestige on, exogenous
    /// citations excluded.
    fn default() -> Self {
        SolverConfig {
            use_institutional_prestige: true,
            exogenous_mode: ExogenousMode::Exclude,
            affiliation_combine: AffiliationCombine::Mean,
            scale_min: 0.05,
            scale_max: 10.0,
            tolerance: 1e-4,
            max_iterations: 1000,
        }
    }
}

impl SolverConfig {
    /// The four combinations of institutional prestige on/off and exogenous
    /// citations included/excluded, reference configuration first.
    pub fn variants() -> [SolverConfig; 4] {
        let base = SolverConfig::default();
        let with = |p, e| SolverConfig {
            use_institutional_prestige: p,
            exogenous_mode: e,
            ..base
        };
        [
            with(true, ExogenousMode::Exclude),
            with(false, ExogenousMode::Exclude),
            with(true, ExogenousMode::Include),
            with(false, ExogenousMode::Include),
        ]
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::InvalidConfig(m));
        if !(self.scale_min > 0.0 && self.scale_min < self.scale_max && self.scale_max.is_finite())
        {
            return bad(format!(
                "need 0 < scale_min < scale_max, got ({}, {})",
                self.scale_min, self.scale_max
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return bad(format!("tolerance must be > 0, got {}", self.tolerance));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be >= 1".into());
        }
        Ok(())
    }

    /// Set one field by name. Accepts field names and their hyphenated flag
    /// spellings (`exogenous` is an alias for `exogenous_mode`).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), SolverError> {
        let bad = |m: String| SolverError::InvalidConfig(format!("{key}: {m}"));
        let float = |v: &str| v.parse::<f64>().map_err(|e| bad(e.to_string()));
        match key.trim().replace('-', "_").as_str() {
            "use_institutional_prestige" => {
                self.use_institutional_prestige = value
                    .parse()
                    .map_err(|_| bad(format!("`{value}` is not a boolean")))?
            }
            "exogenous_mode" | "exogenous" => self.exogenous_mode = value.parse().map_err(bad)?,
            "affiliation_combine" => self.affiliation_combine = value.parse().map_err(bad)?,
            "scale_min" => self.scale_min = float(value)?,
            "scale_max" => self.scale_max = float(value)?,
            "tolerance" => self.tolerance = float(value)?,
            "max_iterations" => {
                self.max_iterations = value.parse().map_err(|e| bad(format!("{e}")))?
            }
            _ => return Err(SolverError::InvalidConfig(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Parse a line-oriented `key = value` file over the defaults. Blank
    /// lines and `#` comments are skipped.
    pub fn from_kv_str(text: &str) -> Result<SolverConfig, SolverError> {
        let mut config = SolverConfig::default();
        config.apply_kv_str(text)?;
        Ok(config)
    }

    pub fn apply_kv_str(&mut self, text: &str) -> Result<(), SolverError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                SolverError::InvalidConfig(format!("line {}: expected key = value", i + 1))
            })?;
            self.set(k.trim(), v.trim())?;
        }
        self.validate()
    }

    pub fn to_kv_string(&self) -> String {
        format!(
            "use_institutional_prestige = {}\nexogenous_mode = {}\naffiliation_combine = {}\n\
             scale_min = {}\nscale_max = {}\ntolerance = {}\nmax_iterations = {}\n",
            self.use_institutional_prestige,
            self.exogenous_mode,
            self.affiliation_combine,
            self.scale_min,
            self.scale_max,
            self.tolerance,
            self.max_iterations
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub mean_score: f64,
    /// |mean(k) - mean(k-1)|, the stopping statistic.
    pub mean_delta: f64,
    /// Largest per-journal change; reported only.
    pub max_delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JournalScores {
    pub scores: BTreeMap<String, f64>,
    pub iteration_count: usize,
    pub trace: Vec<TracePoint>,
}

impl JournalScores {
    pub fn get(&self, journal_id: &str) -> Option<f64> {
        self.scores.get(journal_id).copied()
    }
}

/// Per-edge citation weights evaluated at the converged journal scores,
/// indexed by edge id.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergedWeights {
    pub weights: Vec<f64>,
    pub gates: Vec<u8>,
    pub config: SolverConfig,
}

impl ConvergedWeights {
    pub fn weight(&self, edge: usize) -> f64 {
        self.weights[edge]
    }

    pub fn gate(&self, edge: usize) -> u8 {
        self.gates[edge]
    }

    /// Copy with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> ConvergedWeights {
        ConvergedWeights {
            weights: self.weights.iter().map(|w| w * factor).collect(),
            ..self.clone()
        }
    }
}

/// Combined prestige of the work's affiliations; the floor when the work has
/// none, and 1 when institutional prestige is switched off.
pub fn institution_factor(
    graph: &CitationGraph,
    work: usize,
    table: &PrestigeTable,
    config: &SolverConfig,
) -> f64 {
    if !config.use_institutional_prestige {
        return 1.0;
    }
    let insts = graph.work_institutions(work);
    if insts.is_empty() {
        return table.floor();
    }
    let values = insts
        .iter()
        .map(|&i| table.get(&graph.institutions()[i].id));
    match config.affiliation_combine {
        AffiliationCombine::Mean => values.sum::<f64>() / insts.len() as f64,
        AffiliationCombine::Max => values.fold(f64::NEG_INFINITY, f64::max),
    }
}

/// `f` for an edge under the configured exogenous mode.
pub fn effective_gate(graph: &CitationGraph, edge: usize, config: &SolverConfig) -> u8 {
    if graph.citing_in_set(edge) {
        1
    } else {
        config.exogenous_mode.gate()
    }
}

fn weight_with(
    graph: &CitationGraph,
    edge: usize,
    table: &PrestigeTable,
    config: &SolverConfig,
    citing_score: impl FnOnce(usize) -> Result<f64, SolverError>,
) -> Result<f64, SolverError> {
    let gate = effective_gate(graph, edge, config);
    if gate == 0 {
        return Ok(0.0);
    }
    if !graph.citing_in_set(edge) {
        return Ok(1.0);
    }
    let citing = graph.edge_citing(edge);
    let p_inst = institution_factor(graph, citing, table, config);
    Ok(p_inst * citing_score(graph.work_journal(citing))?)
}

/// Weight of one citation: `f * P_inst * p(citing journal)` for in-set
/// citing journals, `f * 1` for exogenous ones.
pub fn citation_weight(
    edge: usize,
    graph: &CitationGraph,
    table: &PrestigeTable,
    journal_scores: &BTreeMap<String, f64>,
    config: &SolverConfig,
) -> Result<f64, SolverError> {
    if edge >= graph.edges().len() {
        return Err(SolverError::UnknownEdge(edge));
    }
    let cited_journal = &graph.journals()[graph.work_journal(graph.edge_cited(edge))];
    if !cited_journal.in_set {
        return Err(SolverError::ExogenousCitedJournal(cited_journal.id.clone()));
    }
    weight_with(graph, edge, table, config, |j| {
        let id = &graph.journals()[j].id;
        journal_scores
            .get(id)
            .copied()
            .ok_or_else(|| SolverError::UnknownJournal(id.clone()))
    })
}

/// Per-paper weighted inflow of one journal, before rescaling.
pub fn journal_update(
    journal_id: &str,
    graph: &CitationGraph,
    table: &PrestigeTable,
    journal_scores: &BTreeMap<String, f64>,
    config: &SolverConfig,
) -> Result<f64, SolverError> {
    let j = graph
        .journal_idx(journal_id)
        .ok_or_else(|| SolverError::UnknownJournal(journal_id.to_owned()))?;
    let record = &graph.journals()[j];
    if !record.in_set {
        return Err(SolverError::ExogenousCitedJournal(journal_id.to_owned()));
    }
    let mut sum = 0.0;
    for &e in graph.incoming_edge_ids(j) {
        sum += citation_weight(e, graph, table, journal_scores, config)?;
    }
    Ok(sum / f64::from(record.census_paper_count))
}

/// Affine map of `raw` onto `[scale_min, scale_max]`, minimum to minimum.
/// A constant input maps to the midpoint.
pub fn rescale(raw: &[f64], config: &SolverConfig) -> Result<Vec<f64>, SolverError> {
    if raw.is_empty() {
        return Err(SolverError::EmptyInput);
    }
    if let Some(&bad) = raw.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(SolverError::NonFinite(bad));
    }
    let (lo, hi) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let (min, max) = (config.scale_min, config.scale_max);
    if hi == lo {
        return Ok(vec![(min + max) / 2.0; raw.len()]);
    }
    let span = hi - lo;
    Ok(raw
        .iter()
        .map(|&x| {
            if x == hi {
                max
            } else {
                min + (max - min) * ((x - lo) / span)
            }
        })
        .collect())
}

/// One iteration as seen by an observer.
#[derive(Debug)]
pub struct IterationRecord<'a> {
    pub iteration: usize,
    /// Per-journal inflow before rescaling, in [`Solver::journal_ids`] order.
    pub raw: &'a [f64],
    pub scores: &'a [f64],
    pub mean_delta: f64,
    pub max_delta: f64,
}

#[derive(Debug, Clone, Copy)]
struct Inflow {
    /// Slot of the citing journal, `None` for exogenous citers.
    citing: Option<u32>,
    factor: f64,
}

/// Prepared solver: inflow lists per in-set journal with the
/// score-independent part of every weight folded in.
pub struct Solver<'g> {
    graph: &'g CitationGraph,
    table: &'g PrestigeTable,
    config: SolverConfig,
    journals: Vec<usize>,
    slot: Vec<Option<u32>>,
    inflow: Vec<Vec<Inflow>>,
    papers: Vec<f64>,
}

impl<'g> Solver<'g> {
    pub fn new(
        graph: &'g CitationGraph,
        table: &'g PrestigeTable,
        config: SolverConfig,
    ) -> Result<Self, SolverError> {
        config.validate()?;
        let journals: Vec<usize> = graph
            .journals()
            .iter()
            .enumerate()
            .filter(|(_, j)| j.in_set)
            .map(|(i, _)| i)
            .collect();
        if journals.is_empty() {
            return Err(SolverError::NoJournals);
        }
        let mut slot = vec![None; graph.journals().len()];
        for (s, &j) in journals.iter().enumerate() {
            slot[j] = Some(s as u32);
        }
        let inflow = journals
            .par_iter()
            .map(|&j| {
                graph
                    .incoming_edge_ids(j)
                    .iter()
                    .map(|&e| {
                        let gate = f64::from(effective_gate(graph, e, &config));
                        let citing = graph.edge_citing(e);
                        match slot[graph.work_journal(citing)] {
                            Some(s) => Inflow {
                                citing: Some(s),
                                factor: gate * institution_factor(graph, citing, table, &config),
                            },
                            None => Inflow {
                                citing: None,
                                factor: gate,
                            },
                        }
                    })
                    .collect()
            })
            .collect();
        let papers = journals
            .iter()
            .map(|&j| f64::from(graph.journals()[j].census_paper_count))
            .collect();
        Ok(Solver {
            graph,
            table,
            config,
            journals,
            slot,
            inflow,
            papers,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// In-set journal ids in slot order (ascending id).
    pub fn journal_ids(&self) -> Vec<&'g str> {
        self.journals
            .iter()
            .map(|&j| self.graph.journals()[j].id.as_str())
            .collect()
    }

    /// Per-paper inflow for every journal given the current scores.
    /// Each journal sums its inflow in ascending edge-id order.
    pub fn step(&self, scores: &[f64]) -> Vec<f64> {
        self.inflow
            .par_iter()
            .zip(self.papers.par_iter())
            .map(|(list, &n)| {
                let mut sum = 0.0;
                for inflow in list {
                    sum += match inflow.citing {
                        Some(s) => inflow.factor * scores[s as usize],
                        None => inflow.factor,
                    };
                }
                sum / n
            })
            .collect()
    }

    pub fn solve(&self) -> Result<(JournalScores, ConvergedWeights), SolverError> {
        self.solve_observed(|_| {})
    }

    /// Iterate to convergence, handing every iteration to `observer`.
    pub fn solve_observed(
        &self,
        mut observer: impl FnMut(&IterationRecord<'_>),
    ) -> Result<(JournalScores, ConvergedWeights), SolverError> {
        let n = self.journals.len();
        let mut current = vec![1.0; n];
        let mut prev_mean = 1.0;
        let mut trace = Vec::new();
        for iteration in 1..=self.config.max_iterations {
            let raw = self.step(&current);
            let next = rescale(&raw, &self.config)?;
            let mean = next.iter().sum::<f64>() / n as f64;
            let mean_delta = (mean - prev_mean).abs();
            let max_delta = next
                .iter()
                .zip(&current)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            trace.push(TracePoint {
                iteration,
                mean_score: mean,
                mean_delta,
                max_delta,
            });
            observer(&IterationRecord {
                iteration,
                raw: &raw,
                scores: &next,
                mean_delta,
                max_delta,
            });
            current = next;
            prev_mean = mean;
            if mean_delta < self.config.tolerance {
                return Ok(self.finish(current, trace));
            }
        }
        let final_delta = trace.last().map_or(f64::NAN, |t| t.mean_delta);
        Err(SolverError::NotConverged {
            iterations: self.config.max_iterations,
            final_delta,
            trace,
        })
    }

    fn finish(
        &self,
        scores: Vec<f64>,
        trace: Vec<TracePoint>,
    ) -> (JournalScores, ConvergedWeights) {
        let graph = self.graph;
        let (weights, gates) = (0..graph.edges().len())
            .into_par_iter()
            .map(|e| {
                let w = weight_with(graph, e, self.table, &self.config, |j| {
                    Ok(self.slot[j].map_or(0.0, |s| scores[s as usize]))
                })
                .expect("score lookup is infallible");
                (w, effective_gate(graph, e, &self.config))
            })
            .unzip();
        let journal_scores = JournalScores {
            scores: self
                .journal_ids()
                .into_iter()
                .map(str::to_owned)
                .zip(scores)
                .collect(),
            iteration_count: trace.len(),
            trace,
        };
        (
            journal_scores,
            ConvergedWeights {
                weights,
                gates,
                config: self.config,
            },
        )
    }
}

pub fn solve(
    graph: &CitationGraph,
    table: &PrestigeTable,
    config: &SolverConfig,
) -> Result<(JournalScores, ConvergedWeights), SolverError> {
    Solver::new(graph, table, *config)?.solve()
}
