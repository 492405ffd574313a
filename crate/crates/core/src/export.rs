//! CSV writers for pipeline outputs. Rows are written in a fixed order and
//! floats in shortest round-trip form, so equal inputs give equal bytes.

use std::collections::BTreeMap;
use std::io::Write;

use crate::analytics::{CoauthorNetwork, KsResult, SampleSummary};
use crate::scoring::{AuthorScore, TierAssignment};
use crate::solver::JournalScores;

pub type CsvResult = csv::Result<()>;

/// Shortest round-trip form; exponent notation for very small or large
/// magnitudes.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// `journal_id,rc_score,iterations`
pub fn write_journal_scores(out: impl Write, scores: &JournalScores) -> CsvResult {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["journal_id", "rc_score", "iterations"])?;
    let iterations = scores.iteration_count.to_string();
    for (id, s) in &scores.scores {
        w.write_record([id.as_str(), &num(*s), &iterations])?;
    }
    w.flush()?;
    Ok(())
}

/// `iteration,mean_score,mean_delta,max_delta`
pub fn write_trace(out: impl Write, scores: &JournalScores) -> CsvResult {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "mean_score", "mean_delta", "max_delta"])?;
    for t in &scores.trace {
        w.write_record([
            t.iteration.to_string(),
            num(t.mean_score),
            num(t.mean_delta),
            num(t.max_delta),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `author_id,label,R_a,L_a,citations_per_paper,rc,attenuated,tier`.
/// Label and tier are blank when unknown.
pub fn write_author_scores(
    out: impl Write,
    scores: &[AuthorScore],
    labels: &BTreeMap<String, String>,
    tiers: Option<&TierAssignment>,
) -> CsvResult {
    let tier_of: BTreeMap<&str, u8> = tiers
        .map(|t| {
            t.ranked
                .iter()
                .map(|r| (r.author_id.as_str(), r.tier))
                .collect()
        })
        .unwrap_or_default();
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "author_id",
        "label",
        "R_a",
        "L_a",
        "citations_per_paper",
        "rc",
        "attenuated",
        "tier",
    ])?;
    for s in scores {
        w.write_record([
            s.author_id.clone(),
            labels.get(&s.author_id).cloned().unwrap_or_default(),
            s.works.to_string(),
            s.citations.to_string(),
            num(s.citations_per_paper),
            num(s.rc),
            s.attenuated.to_string(),
            tier_of
                .get(s.author_id.as_str())
                .map(u8::to_string)
                .unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `rank,author_id,label,rc,tier` in tier order.
pub fn write_tiers(out: impl Write, tiers: &TierAssignment) -> CsvResult {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "author_id", "label", "rc", "tier"])?;
    for (i, t) in tiers.ranked.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            t.author_id.clone(),
            t.label.clone().unwrap_or_default(),
            num(t.rc),
            t.tier.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `label,tier1,tier2,tier3` plus a `total` row.
pub fn write_tier_counts(out: impl Write, tiers: &TierAssignment) -> CsvResult {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "tier1", "tier2", "tier3"])?;
    for (label, c) in &tiers.counts {
        w.write_record([
            label.clone(),
            c[0].to_string(),
            c[1].to_string(),
            c[2].to_string(),
        ])?;
    }
    let s = tiers.sizes;
    w.write_record([
        "total".to_owned(),
        s[0].to_string(),
        s[1].to_string(),
        s[2].to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

pub fn write_summary(out: impl Write, summaries: &[SampleSummary]) -> CsvResult {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "label",
        "articles",
        "journals",
        "coauthors",
        "institutions",
        "mean_citations",
        "mean_authors",
        "mean_institutions",
        "mean_countries",
        "mean_pages",
        "mean_references",
        "mean_references_per_page",
        "excluded_countries",
        "excluded_pages",
        "excluded_references",
    ])?;
    for s in summaries {
        w.write_record([
            s.label.clone(),
            s.totals.articles.to_string(),
            s.totals.journals.to_string(),
            s.totals.coauthors.to_string(),
            s.totals.institutions.to_string(),
            num(s.means.citations),
            num(s.means.authors),
            num(s.means.institutions),
            opt(s.means.countries),
            opt(s.means.pages),
            opt(s.means.references),
            opt(s.means.references_per_page),
            s.excluded.countries.to_string(),
            s.excluded.pages.to_string(),
            s.excluded.references.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `label,kind,rank,id,works,fraction` for journal, institution and country
/// shares.
pub fn write_shares(out: impl Write, summaries: &[SampleSummary]) -> CsvResult {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "kind", "rank", "id", "works", "fraction"])?;
    for s in summaries {
        for (kind, shares) in [
            ("journal", &s.journal_shares),
            ("institution", &s.institution_shares),
            ("country", &s.country_shares),
        ] {
            for (i, sh) in shares.iter().enumerate() {
                w.write_record([
                    s.label.clone(),
                    kind.to_owned(),
                    (i + 1).to_string(),
                    sh.id.clone(),
                    sh.works.to_string(),
                    num(sh.fraction),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// `label,component,size,rc_mean,rc_sd,members` with members joined by `;`.
pub fn write_components(out: impl Write, networks: &[(String, CoauthorNetwork)]) -> CsvResult {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "component", "size", "rc_mean", "rc_sd", "members"])?;
    for (label, net) in networks {
        for (i, c) in net.components.iter().enumerate() {
            w.write_record([
                label.clone(),
                (i + 1).to_string(),
                c.members.len().to_string(),
                opt(c.rc_mean),
                opt(c.rc_sd),
                c.members.join(";"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub struct KsRow {
    pub metric: String,
    pub sample_a: String,
    pub sample_b: String,
    pub result: KsResult,
}

pub fn write_ks(out: impl Write, rows: &[KsRow]) -> CsvResult {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["metric", "sample_a", "sample_b", "d", "p_value"])?;
    for r in rows {
        w.write_record([
            r.metric.clone(),
            r.sample_a.clone(),
            r.sample_b.clone(),
            num(r.result.d),
            num(r.result.p_value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub struct SpearmanRow {
    pub sample: String,
    pub x: String,
    pub y: String,
    pub n: usize,
    pub rho: Option<f64>,
}

pub fn write_spearman(out: impl Write, rows: &[SpearmanRow]) -> CsvResult {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sample", "x", "y", "n", "rho"])?;
    for r in rows {
        w.write_record([
            r.sample.clone(),
            r.x.clone(),
            r.y.clone(),
            r.n.to_string(),
            opt(r.rho),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Generic plot-data writer: header plus rows of already formatted cells.
pub fn write_rows(out: impl Write, header: &[&str], rows: &[Vec<String>]) -> CsvResult {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}
