//! Inputs shared by the benchmarks.

use repcite::synth::{generate_network, SynthConfig};
use repcite::{build_graph, institution_prestige, BuildOptions, CitationGraph, PrestigeTable};

/// Synthetic graph with `journals` journals of 50 works each, plus its
/// prestige table.
pub fn synth_graph(journals: usize, seed: u64) -> (CitationGraph, PrestigeTable) {
    let config = SynthConfig {
        seed,
        journal_count: journals,
        exogenous_journal_count: journals / 20,
        author_pool: journals * 25,
        institution_pool: (journals * 2).max(100),
        ..SynthConfig::default()
    };
    let out = generate_network(&config).expect("bench config is feasible");
    let r = out.records;
    let graph = build_graph(
        r.institutions,
        r.journals,
        r.works,
        r.edges,
        BuildOptions::default(),
    )
    .expect("synth output is valid");
    let table = institution_prestige(
        &out.rankings,
        graph.institutions().iter().map(|i| i.id.as_str()),
    )
    .expect("rankings cover known institutions");
    (graph, table)
}
