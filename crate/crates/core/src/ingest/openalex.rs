//! Cursor-paginated client for the OpenAlex `works` endpoint.
//!
//! Fetches every work published from the census year onward in the requested
//! sources and maps it onto the model schema. Each fetched work's reference
//! list becomes citation edges; references that land outside the fetched set
//! are dropped because they cannot receive prestige flow.

use std::collections::{BTreeMap, BTreeSet};
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde_json::Value;

use super::{IngestError, RawRecords};
use crate::model::{CitationEdge, InstitutionRecord, JournalRecord, WorkRecord};

pub const DEFAULT_BASE_URL: &str = "https://api.openalex.org";
/// Environment variable overriding [`DEFAULT_BASE_URL`].
pub const BASE_URL_ENV: &str = "REPCITE_OPENALEX_URL";

const ID_PREFIX: &str = "https://openalex.org/";
const MAX_RETRY_AFTER: Duration = Duration::from_secs(120);
const MAX_BODY_BYTES: u64 = 256 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct FetchSpec {
    /// Source ids (e.g. `S123`), with or without the `https://openalex.org/` prefix.
    pub journal_external_ids: Vec<String>,
    pub census_year: i32,
    /// Continuation token; `None` starts from the beginning (`*`).
    pub page_cursor: Option<String>,
    /// Requests per second.
    pub rate_limit: f64,
    pub per_page: u32,
    pub max_retries: u32,
    pub base_url: String,
    pub mailto: Option<String>,
}

impl FetchSpec {
    pub fn new(journal_external_ids: Vec<String>, census_year: i32) -> Self {
        FetchSpec {
            journal_external_ids,
            census_year,
            page_cursor: None,
            rate_limit: 5.0,
            per_page: 200,
            max_retries: 5,
            base_url: std::env::var(BASE_URL_ENV).unwrap_or_else(|_| DEFAULT_BASE_URL.to_owned()),
            mailto: None,
        }
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        let invalid = |m: String| Err(IngestError::InvalidSpec(m));
        let now = current_year();
        if !(1900..=now).contains(&self.census_year) {
            return invalid(format!(
                "census_year {} outside [1900, {now}]",
                self.census_year
            ));
        }
        if !(self.rate_limit > 0.0 && self.rate_limit.is_finite()) {
            return invalid(format!("rate_limit must be > 0, got {}", self.rate_limit));
        }
        if self.journal_external_ids.is_empty() {
            return invalid("no source ids given".into());
        }
        if self.per_page == 0 || self.per_page > 200 {
            return invalid(format!(
                "per_page must be in 1..=200, got {}",
                self.per_page
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FetchReport {
    pub records: RawRecords,
    pub pages: usize,
    pub retries: usize,
    /// Upstream records that could not be mapped (missing id, year or authors).
    pub skipped_malformed: usize,
    /// Records without a source in the requested journal set.
    pub dropped_unmapped: usize,
    /// References pointing outside the fetched set.
    pub dropped_references: usize,
    /// Requested sources with no census-year works; emitted as exogenous.
    pub empty_journals: Vec<String>,
}

fn current_year() -> i32 {
    let days = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs() / 86_400)
        .unwrap_or(0) as i64;
    // civil-from-days (Howard Hinnant)
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let month = if mp < 10 { mp + 3 } else { mp - 9 };
    (yoe + era * 400 + i64::from(month <= 2)) as i32
}

fn short_id(raw: &str) -> String {
    raw.strip_prefix(ID_PREFIX).unwrap_or(raw).to_owned()
}

/// Mapped form of one upstream work.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct MappedWork {
    pub work: WorkRecord,
    pub source_title: Option<String>,
    pub institutions: Vec<InstitutionRecord>,
    pub references: Vec<String>,
}

#[derive(Debug, PartialEq)]
pub(crate) enum MapOutcome {
    Mapped(Box<MappedWork>),
    Unmapped,
    Malformed,
}

pub(crate) fn map_work(value: &Value, journal_set: &BTreeSet<String>) -> MapOutcome {
    let Some(id) = value.get("id").and_then(Value::as_str).map(short_id) else {
        return MapOutcome::Malformed;
    };
    let Some(year) = value.get("publication_year").and_then(Value::as_i64) else {
        return MapOutcome::Malformed;
    };
    let source = value.pointer("/primary_location/source");
    let Some(journal_id) = source
        .and_then(|s| s.get("id"))
        .and_then(Value::as_str)
        .map(short_id)
        .filter(|j| journal_set.contains(j))
    else {
        return MapOutcome::Unmapped;
    };
    let source_title = source
        .and_then(|s| s.get("display_name"))
        .and_then(Value::as_str)
        .map(str::to_owned);

    let mut author_ids = Vec::new();
    let mut institutions: Vec<InstitutionRecord> = Vec::new();
    for authorship in value
        .get("authorships")
        .and_then(Value::as_array)
        .into_iter()
        .flatten()
    {
        if let Some(a) = authorship.pointer("/author/id").and_then(Value::as_str) {
            let a = short_id(a);
            if !author_ids.contains(&a) {
                author_ids.push(a);
            }
        }
        for inst in authorship
            .get("institutions")
            .and_then(Value::as_array)
            .into_iter()
            .flatten()
        {
            let Some(iid) = inst.get("id").and_then(Value::as_str).map(short_id) else {
                continue;
            };
            if institutions.iter().any(|r| r.id == iid) {
                continue;
            }
            let name = inst
                .get("display_name")
                .and_then(Value::as_str)
                .filter(|n| !n.trim().is_empty())
                .map(str::to_owned)
                .unwrap_or_else(|| iid.clone());
            let country = inst
                .get("country_code")
                .and_then(Value::as_str)
                .map(str::to_owned);
            institutions.push(InstitutionRecord {
                id: iid,
                name,
                country,
            });
        }
    }
    if author_ids.is_empty() {
        return MapOutcome::Malformed;
    }

    let page = |key: &str| {
        value
            .pointer(&format!("/biblio/{key}"))
            .and_then(Value::as_str)
            .and_then(|s| s.trim().parse::<u32>().ok())
    };
    let page_count = match (page("first_page"), page("last_page")) {
        (Some(first), Some(last)) if last >= first => Some(last - first + 1),
        _ => None,
    };
    let reference_count = value
        .get("referenced_works_count")
        .and_then(Value::as_u64)
        .map(|n| n as u32);
    let references = value
        .get("referenced_works")
        .and_then(Value::as_array)
        .into_iter()
        .flatten()
        .filter_map(Value::as_str)
        .map(short_id)
        .collect();

    MapOutcome::Mapped(Box::new(MappedWork {
        work: WorkRecord {
            id,
            journal_id,
            year: year as i32,
            author_ids,
            institution_ids: institutions.iter().map(|i| i.id.clone()).collect(),
            page_count,
            reference_count,
        },
        source_title,
        institutions,
        references,
    }))
}

struct Throttle {
    interval: Duration,
    last: Option<Instant>,
}

impl Throttle {
    fn wait(&mut self) {
        if let Some(last) = self.last {
            let elapsed = last.elapsed();
            if elapsed < self.interval {
                thread::sleep(self.interval - elapsed);
            }
        }
        self.last = Some(Instant::now());
    }
}

fn retry_delay(attempt: u32, retry_after: Option<&str>) -> Duration {
    if let Some(secs) = retry_after.and_then(|s| s.trim().parse::<f64>().ok()) {
        if secs.is_finite() && secs >= 0.0 {
            return Duration::from_secs_f64(secs).min(MAX_RETRY_AFTER);
        }
    }
    Duration::from_millis(500u64.saturating_mul(1 << attempt.min(8))).min(MAX_RETRY_AFTER)
}

fn get_page(
    agent: &ureq::Agent,
    spec: &FetchSpec,
    url: &str,
    cursor: &str,
    throttle: &mut Throttle,
    retries: &mut usize,
) -> Result<Value, IngestError> {
    let filter = format!(
        "primary_location.source.id:{},from_publication_date:{}-01-01",
        spec.journal_external_ids
            .iter()
            .map(|s| short_id(s))
            .collect::<Vec<_>>()
            .join("|"),
        spec.census_year
    );
    let mut attempt = 0u32;
    loop {
        throttle.wait();
        let mut req = agent
            .get(url)
            .query("filter", &filter)
            .query("per-page", spec.per_page.to_string())
            .query("cursor", cursor);
        if let Some(mail) = &spec.mailto {
            req = req.query("mailto", mail);
        }
        let failure = match req.call() {
            Ok(mut resp) => {
                let status = resp.status().as_u16();
                if status == 200 {
                    let body = resp
                        .body_mut()
                        .with_config()
                        .limit(MAX_BODY_BYTES)
                        .read_to_string()
                        .map_err(|e| IngestError::Transport(e.to_string()))?;
                    return serde_json::from_str(&body).map_err(|e| {
                        IngestError::Upstream(format!("page at cursor `{cursor}`: {e}"))
                    });
                }
                let retry_after = resp
                    .headers()
                    .get("retry-after")
                    .and_then(|v| v.to_str().ok())
                    .map(str::to_owned);
                if status == 429 || status >= 500 {
                    (format!("HTTP {status}"), retry_after)
                } else {
                    return Err(IngestError::Upstream(format!(
                        "HTTP {status} for cursor `{cursor}`"
                    )));
                }
            }
            Err(e) => (e.to_string(), None),
        };
        if attempt >= spec.max_retries {
            return Err(IngestError::Transport(format!(
                "{} after {} retries",
                failure.0, attempt
            )));
        }
        let delay = retry_delay(attempt, failure.1.as_deref());
        log::warn!("{}; retrying in {:?}", failure.0, delay);
        thread::sleep(delay);
        attempt += 1;
        *retries += 1;
    }
}

/// Page through the works endpoint until the cursor is exhausted.
pub fn fetch_openalex_works(spec: &FetchSpec) -> Result<FetchReport, IngestError> {
    spec.validate()?;
    let journal_set: BTreeSet<String> = spec
        .journal_external_ids
        .iter()
        .map(|s| short_id(s))
        .collect();
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(Duration::from_secs(120)))
        .build()
        .into();
    let url = format!("{}/works", spec.base_url.trim_end_matches('/'));
    let mut throttle = Throttle {
        interval: Duration::from_secs_f64(1.0 / spec.rate_limit),
        last: None,
    };

    let mut report = FetchReport::default();
    let mut works: BTreeMap<String, MappedWork> = BTreeMap::new();
    let mut cursor = spec.page_cursor.clone().unwrap_or_else(|| "*".to_owned());
    loop {
        let page = get_page(
            &agent,
            spec,
            &url,
            &cursor,
            &mut throttle,
            &mut report.retries,
        )?;
        report.pages += 1;
        let results = page
            .get("results")
            .and_then(Value::as_array)
            .ok_or_else(|| {
                IngestError::Upstream(format!("page at cursor `{cursor}` has no results array"))
            })?;
        for item in results {
            match map_work(item, &journal_set) {
                MapOutcome::Mapped(m) => {
                    works.insert(m.work.id.clone(), *m);
                }
                MapOutcome::Unmapped => report.dropped_unmapped += 1,
                MapOutcome::Malformed => report.skipped_malformed += 1,
            }
        }
        let next = page
            .pointer("/meta/next_cursor")
            .and_then(Value::as_str)
            .map(str::to_owned);
        match next {
            Some(n) if !results.is_empty() => cursor = n,
            _ => break,
        }
    }
    if report.skipped_malformed > 0 {
        log::warn!(
            "skipped {} malformed upstream records",
            report.skipped_malformed
        );
    }
    if report.dropped_unmapped > 0 {
        log::warn!(
            "dropped {} records without a mapped source",
            report.dropped_unmapped
        );
    }
    assemble(works, &journal_set, spec.census_year, &mut report);
    Ok(report)
}

fn assemble(
    works: BTreeMap<String, MappedWork>,
    journal_set: &BTreeSet<String>,
    census_year: i32,
    report: &mut FetchReport,
) {
    let mut titles: BTreeMap<&str, &str> = BTreeMap::new();
    let mut census: BTreeMap<&str, u32> = BTreeMap::new();
    let mut institutions: BTreeMap<String, InstitutionRecord> = BTreeMap::new();
    let mut edges = Vec::new();
    for m in works.values() {
        if let Some(t) = &m.source_title {
            titles.entry(&m.work.journal_id).or_insert(t);
        }
        if m.work.year == census_year {
            *census.entry(&m.work.journal_id).or_default() += 1;
        }
        for inst in &m.institutions {
            institutions
                .entry(inst.id.clone())
                .or_insert_with(|| inst.clone());
        }
        for r in &m.references {
            if r != &m.work.id && works.contains_key(r) {
                edges.push(CitationEdge::new(m.work.id.clone(), r.clone()));
            } else {
                report.dropped_references += 1;
            }
        }
    }
    let journals = journal_set
        .iter()
        .map(|j| {
            let n = census.get(j.as_str()).copied().unwrap_or(0);
            if n == 0 {
                report.empty_journals.push(j.clone());
            }
            JournalRecord {
                id: j.clone(),
                title: titles
                    .get(j.as_str())
                    .map_or_else(|| j.clone(), |t| t.to_string()),
                in_set: n > 0,
                census_paper_count: n,
            }
        })
        .collect();
    edges.sort_by(|a: &CitationEdge, b| {
        (&a.citing_work_id, &a.cited_work_id).cmp(&(&b.citing_work_id, &b.cited_work_id))
    });
    edges.dedup();
    report.records = RawRecords {
        institutions: institutions.into_values().collect(),
        journals,
        works: works.into_values().map(|m| m.work).collect(),
        edges,
    };
}
