//! Rank correlation, two-sample tests, co-authorship components and
//! per-sample summary tables.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::unionfind::UnionFind;
use serde::Serialize;
use thiserror::Error;

use crate::model::CitationGraph;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 pairs, got {0}")]
    TooShort(usize),
    #[error("rank correlation undefined for a constant vector")]
    Constant,
    #[error("sample is empty")]
    EmptySample,
    #[error("non-finite value in sample")]
    NonFinite,
}

fn check_finite(v: &[f64]) -> Result<(), AnalyticsError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(AnalyticsError::NonFinite)
    }
}

/// 1-based ranks with ties sharing the average of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Spearman's rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, AnalyticsError> {
    if x.len() != y.len() {
        return Err(AnalyticsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(AnalyticsError::TooShort(x.len()));
    }
    check_finite(x)?;
    check_finite(y)?;
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    // Average ranks always have mean (n + 1) / 2.
    let mean = (x.len() as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (da, db) = (a - mean, b - mean);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(AnalyticsError::Constant);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    /// Largest absolute gap between the two empirical CDFs.
    pub d: f64,
    /// Asymptotic p-value.
    pub p_value: f64,
}

/// Kolmogorov distribution survival function
/// `Q(λ) = 2 Σ_{j≥1} (-1)^{j-1} exp(-2 j² λ²)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-transformed series, fast for small λ.
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let mut sum = 0.0;
        let mut j = 1i32;
        loop {
            let term = y.powi(j * j);
            sum += term;
            if term < 1e-17 || j > 200 {
                break;
            }
            j += 2;
        }
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / lambda * sum;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for j in 1..=100i32 {
            let term = (-2.0 * f64::from(j * j) * lambda * lambda).exp();
            sum += if j % 2 == 1 { term } else { -term };
            if term < 1e-17 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// Two-sample Kolmogorov–Smirnov statistic with the asymptotic p-value
/// (effective size `n m / (n + m)` and the usual small-sample correction
/// of λ).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult, AnalyticsError> {
    if a.is_empty() || b.is_empty() {
        return Err(AnalyticsError::EmptySample);
    }
    check_finite(a)?;
    check_finite(b)?;
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = a[i].min(b[j]);
        while i < n && a[i] <= v {
            i += 1;
        }
        while j < m && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let root = ne.sqrt();
    let lambda = (root + 0.12 + 0.11 / root) * d;
    Ok(KsResult {
        d,
        p_value: kolmogorov_q(lambda),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub members: Vec<String>,
    pub rc_mean: Option<f64>,
    /// Sample standard deviation (0 for a single scored member).
    pub rc_sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoauthorNetwork {
    pub vertices: Vec<String>,
    /// `(i, j)` with `i < j` into `vertices` → number of shared works.
    pub edges: BTreeMap<(usize, usize), u32>,
    /// Largest first; ties by first member id.
    pub components: Vec<Component>,
}

fn mean_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (Some(mean), Some(sd))
}

/// Co-authorship graph induced on `sample`, with its connected components.
/// Sample members absent from the graph become singletons. When `rc` is
/// given, each component reports mean and s.d. of its scored members.
pub fn coauthorship_components(
    graph: &CitationGraph,
    sample: &BTreeSet<String>,
    rc: Option<&BTreeMap<String, f64>>,
) -> CoauthorNetwork {
    let vertices: Vec<String> = sample.iter().cloned().collect();
    let local: BTreeMap<&str, usize> = vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();
    let mut edges: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    let mut uf = UnionFind::<usize>::new(vertices.len());
    for work in graph.works() {
        let members: Vec<usize> = work
            .author_ids
            .iter()
            .filter_map(|a| local.get(a.as_str()).copied())
            .collect();
        for (k, &u) in members.iter().enumerate() {
            for &v in &members[k + 1..] {
                let key = (u.min(v), u.max(v));
                *edges.entry(key).or_default() += 1;
                uf.union(u, v);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..vertices.len() {
        groups.entry(uf.find(v)).or_default().push(v);
    }
    let mut components: Vec<Component> = groups
        .into_values()
        .map(|idx| {
            let members: Vec<String> = idx.iter().map(|&i| vertices[i].clone()).collect();
            let scores: Vec<f64> = match rc {
                Some(rc) => members.iter().filter_map(|m| rc.get(m).copied()).collect(),
                None => Vec::new(),
            };
            let (rc_mean, rc_sd) = if rc.is_some() {
                mean_sd(&scores)
            } else {
                (None, None)
            };
            Component {
                members,
                rc_mean,
                rc_sd,
            }
        })
        .collect();
    components.sort_by(|a, b| {
        b.members
            .len()
            .cmp(&a.members.len())
            .then_with(|| a.members[0].cmp(&b.members[0]))
    });
    CoauthorNetwork {
        vertices,
        edges,
        components,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SampleTotals {
    pub articles: usize,
    pub journals: usize,
    pub coauthors: usize,
    pub institutions: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SampleMeans {
    pub citations: f64,
    pub authors: f64,
    pub institutions: f64,
    pub countries: Option<f64>,
    pub pages: Option<f64>,
    pub references: Option<f64>,
    pub references_per_page: Option<f64>,
}

/// Works left out of a mean for lack of metadata.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Excluded {
    pub countries: usize,
    pub pages: usize,
    pub references: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Share {
    pub id: String,
    pub works: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSummary {
    pub label: String,
    pub totals: SampleTotals,
    pub means: SampleMeans,
    pub excluded: Excluded,
    pub journal_shares: Vec<Share>,
    pub institution_shares: Vec<Share>,
    pub country_shares: Vec<Share>,
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn ranked_shares(counts: BTreeMap<String, usize>, total: usize, top_n: usize) -> Vec<Share> {
    let mut shares: Vec<Share> = counts
        .into_iter()
        .map(|(id, works)| Share {
            fraction: works as f64 / total as f64,
            id,
            works,
        })
        .collect();
    shares.sort_by(|a, b| b.works.cmp(&a.works).then_with(|| a.id.cmp(&b.id)));
    shares.truncate(top_n);
    shares
}

/// Works indices belonging to a sample: at least one author in it.
pub fn sample_works(graph: &CitationGraph, sample: &BTreeSet<String>) -> Vec<usize> {
    graph
        .works()
        .iter()
        .enumerate()
        .filter(|(_, w)| w.author_ids.iter().any(|a| sample.contains(a)))
        .map(|(i, _)| i)
        .collect()
}

fn summarize(graph: &CitationGraph, label: &str, works: &[usize], top_n: usize) -> SampleSummary {
    let mut journals: BTreeMap<String, usize> = BTreeMap::new();
    let mut institutions: BTreeMap<String, usize> = BTreeMap::new();
    let mut countries: BTreeMap<String, usize> = BTreeMap::new();
    let mut coauthors: BTreeSet<&str> = BTreeSet::new();
    let mut excluded = Excluded::default();
    let mut country_counts = Vec::new();
    for &w in works {
        let record = &graph.works()[w];
        *journals.entry(record.journal_id.clone()).or_default() += 1;
        coauthors.extend(record.author_ids.iter().map(String::as_str));
        let mut work_countries = BTreeSet::new();
        for &i in graph.work_institutions(w) {
            let inst = &graph.institutions()[i];
            *institutions.entry(inst.id.clone()).or_default() += 1;
            if let Some(c) = &inst.country {
                work_countries.insert(c.clone());
            }
        }
        if work_countries.is_empty() {
            excluded.countries += 1;
        } else {
            country_counts.push(work_countries.len() as f64);
        }
        for c in work_countries {
            *countries.entry(c).or_default() += 1;
        }
        excluded.pages += usize::from(record.page_count.is_none());
        excluded.references += usize::from(record.reference_count.is_none());
    }
    let records = || works.iter().map(|&w| &graph.works()[w]);
    let n = works.len();
    let means = if n == 0 {
        SampleMeans::default()
    } else {
        SampleMeans {
            citations: works
                .iter()
                .map(|&w| graph.incoming_by_work(w).len() as f64)
                .sum::<f64>()
                / n as f64,
            authors: records().map(|r| r.author_ids.len() as f64).sum::<f64>() / n as f64,
            institutions: works
                .iter()
                .map(|&w| graph.work_institutions(w).len() as f64)
                .sum::<f64>()
                / n as f64,
            countries: mean_of(country_counts.iter().copied()),
            pages: mean_of(records().filter_map(|r| r.page_count.map(f64::from))),
            references: mean_of(records().filter_map(|r| r.reference_count.map(f64::from))),
            references_per_page: mean_of(records().filter_map(|r| {
                match (r.reference_count, r.page_count) {
                    (Some(refs), Some(p)) if p > 0 => Some(f64::from(refs) / f64::from(p)),
                    _ => None,
                }
            })),
        }
    };
    let totals = SampleTotals {
        articles: n,
        journals: journals.len(),
        coauthors: coauthors.len(),
        institutions: institutions.len(),
    };
    let total = n.max(1);
    SampleSummary {
        label: label.to_owned(),
        totals,
        means,
        excluded,
        journal_shares: ranked_shares(journals, total, top_n),
        institution_shares: ranked_shares(institutions, total, top_n),
        country_shares: ranked_shares(countries, total, top_n),
    }
}

/// Summary statistics and top-`top_n` share lists per labelled sample.
/// A work belongs to every sample holding at least one of its authors.
pub fn summary_and_share_tables(
    graph: &CitationGraph,
    samples: &BTreeMap<String, BTreeSet<String>>,
    top_n: usize,
) -> Vec<SampleSummary> {
    samples
        .iter()
        .map(|(label, members)| summarize(graph, label, &sample_works(graph, members), top_n))
        .collect()
}

/// Summary over every work in the graph.
pub fn population_summary(graph: &CitationGraph, label: &str, top_n: usize) -> SampleSummary {
    let all: Vec<usize> = (0..graph.works().len()).collect();
    summarize(graph, label, &all, top_n)
}
