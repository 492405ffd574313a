//! Readers for user-supplied data files and the OpenAlex API client.

mod files;
pub mod openalex;

use std::path::Path;

use thiserror::Error;

pub use files::{
    parse_entity_files, parse_jsonl, parse_ranking_file, parse_ranking_reader, read_jsonl,
    RankingEntry, RankingSourceFile, RawRecords,
};
pub use openalex::{fetch_openalex_works, FetchReport, FetchSpec};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{file}:{line}: {message}")]
    Malformed {
        file: String,
        line: usize,
        message: String,
    },
    #[error("{file}:{line}: missing required field `{field}`")]
    MissingField {
        file: String,
        line: usize,
        field: String,
    },
    #[error("ranking source `{0}` is empty")]
    Empty(String),
    #[error("ranking source `{ranking}`: institution `{institution}` listed more than once")]
    DuplicateInstitution {
        ranking: String,
        institution: String,
    },
    #[error("ranking source `{ranking}`: rank {rank} is not strictly increasing")]
    RankOrder { ranking: String, rank: u32 },
    #[error("invalid fetch spec: {0}")]
    InvalidSpec(String),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("malformed upstream response: {0}")]
    Upstream(String),
}

impl IngestError {
    fn io(path: &Path, e: std::io::Error) -> Self {
        IngestError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    fn csv(file: &str, line: usize, e: csv::Error) -> Self {
        IngestError::Malformed {
            file: file.to_owned(),
            line,
            message: e.to_string(),
        }
    }
}
