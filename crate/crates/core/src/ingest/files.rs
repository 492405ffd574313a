use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::model::{CitationEdge, InstitutionRecord, JournalRecord, WorkRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingEntry {
    pub rank: u32,
    pub institution_id: String,
}

/// One provider's ranked list of institutions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankingSourceFile {
    pub source_name: String,
    entries: Vec<RankingEntry>,
}

impl RankingSourceFile {
    /// Validates that ranks are positive and strictly increasing and that no
    /// institution appears twice.
    pub fn new(
        source_name: impl Into<String>,
        entries: Vec<RankingEntry>,
    ) -> Result<Self, IngestError> {
        let source_name = source_name.into();
        if entries.is_empty() {
            return Err(IngestError::Empty(source_name));
        }
        let mut seen = HashSet::with_capacity(entries.len());
        let mut last = 0u32;
        for e in &entries {
            if e.rank == 0 || e.rank <= last {
                return Err(IngestError::RankOrder {
                    ranking: source_name,
                    rank: e.rank,
                });
            }
            last = e.rank;
            if !seen.insert(e.institution_id.as_str()) {
                return Err(IngestError::DuplicateInstitution {
                    ranking: source_name,
                    institution: e.institution_id.clone(),
                });
            }
        }
        Ok(RankingSourceFile {
            source_name,
            entries,
        })
    }

    pub fn entries(&self) -> &[RankingEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("rank,institution_id\n");
        for e in &self.entries {
            s.push_str(&format!("{},{}\n", e.rank, e.institution_id));
        }
        s
    }
}

/// Parse a `rank,institution_id` CSV. The source name is the file stem.
pub fn parse_ranking_file(path: &Path) -> Result<RankingSourceFile, IngestError> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let file = File::open(path).map_err(|e| IngestError::io(path, e))?;
    parse_ranking_reader(&name, file)
}

pub fn parse_ranking_reader(
    source_name: &str,
    reader: impl Read,
) -> Result<RankingSourceFile, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| IngestError::csv(source_name, 1, e))?
        .clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(IngestError::Empty(source_name.to_owned()));
    }
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingField {
                file: source_name.to_owned(),
                line: 1,
                field: name.to_owned(),
            })
    };
    let rank_col = col("rank")?;
    let inst_col = col("institution_id")?;

    let mut entries = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| IngestError::csv(source_name, line, e))?;
        let raw_rank = record.get(rank_col).unwrap_or("");
        let rank = raw_rank
            .parse::<u32>()
            .map_err(|_| IngestError::Malformed {
                file: source_name.to_owned(),
                line,
                message: format!("rank `{raw_rank}` is not a positive integer"),
            })?;
        let institution_id = record.get(inst_col).unwrap_or("").to_owned();
        if institution_id.is_empty() {
            return Err(IngestError::MissingField {
                file: source_name.to_owned(),
                line,
                field: "institution_id".into(),
            });
        }
        entries.push(RankingEntry {
            rank,
            institution_id,
        });
    }
    RankingSourceFile::new(source_name, entries)
}

/// Raw record lists, ready for [`crate::model::build_graph`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawRecords {
    pub institutions: Vec<InstitutionRecord>,
    pub journals: Vec<JournalRecord>,
    pub works: Vec<WorkRecord>,
    pub edges: Vec<CitationEdge>,
}

pub fn parse_entity_files(
    journals: &Path,
    works: &Path,
    edges: &Path,
    institutions: &Path,
) -> Result<RawRecords, IngestError> {
    Ok(RawRecords {
        institutions: read_jsonl(institutions)?,
        journals: read_jsonl(journals)?,
        works: read_jsonl(works)?,
        edges: read_jsonl(edges)?,
    })
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, IngestError> {
    let file = File::open(path).map_err(|e| IngestError::io(path, e))?;
    parse_jsonl(&path.display().to_string(), BufReader::new(file))
}

/// Parse JSON Lines, one record per non-blank line. Unknown fields are
/// ignored; errors carry file name and 1-based line number.
pub fn parse_jsonl<T: DeserializeOwned>(
    file_name: &str,
    reader: impl BufRead,
) -> Result<Vec<T>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| IngestError::Io {
            path: file_name.to_owned(),
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| {
            let message = e.to_string();
            match missing_field(&message) {
                Some(field) => IngestError::MissingField {
                    file: file_name.to_owned(),
                    line: line_no,
                    field,
                },
                None => IngestError::Malformed {
                    file: file_name.to_owned(),
                    line: line_no,
                    message,
                },
            }
        })?;
        out.push(record);
    }
    Ok(out)
}

fn missing_field(message: &str) -> Option<String> {
    let rest = message.strip_prefix("missing field `")?;
    Some(rest[..rest.find('`')?].to_owned())
}
