//! Reputable-citation scoring: journal scores from prestige-weighted
//! citation flow, author scores from the converged weights, and the
//! analytics and synthetic networks used to study them.

pub mod analytics;
pub mod export;
pub mod ingest;
pub mod model;
pub mod prestige;
pub mod scoring;
pub mod solver;
pub mod synth;

pub use analytics::{
    coauthorship_components, ks_two_sample, population_summary, spearman, summary_and_share_tables,
    AnalyticsError, CoauthorNetwork, Component, KsResult, SampleSummary,
};
pub use ingest::{
    fetch_openalex_works, parse_entity_files, parse_ranking_file, FetchReport, FetchSpec,
    IngestError, RankingEntry, RankingSourceFile, RawRecords,
};
pub use model::{
    build_graph, BuildOptions, CitationEdge, CitationGraph, ExogenousMode, InstitutionRecord,
    JournalRecord, ModelError, WorkRecord,
};
pub use prestige::{institution_prestige, PrestigeError, PrestigeTable, PRESTIGE_FLOOR};
pub use scoring::{
    author_rc, score_authors, segment_tiers, AuthorScore, ScoringError, ScoringOptions,
    TierAssignment,
};
pub use solver::{
    solve, AffiliationCombine, ConvergedWeights, JournalScores, Solver, SolverConfig, SolverError,
    TracePoint,
};
pub use synth::{
    generate_network, ground_truth_separation, GroundTruth, SeparationReport, SynthConfig,
    SynthError, SynthOutput, TruthLabel,
};
