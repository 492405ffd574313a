//! Fixed institutional prestige from external ranking sources.
//!
//! Each source's list is cut into deciles by list position; the top decile
//! is worth 1.0, the next 0.9, down to 0.1. An institution's prestige is a
//! floor of 1.0 plus the sum of its decile values over all sources.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use thiserror::Error;

use crate::ingest::RankingSourceFile;

/// Prestige of an institution that appears in no source, and of a work
/// without any resolvable affiliation.
pub const PRESTIGE_FLOOR: f64 = 1.0;

#[derive(Debug, Error, PartialEq)]
pub enum PrestigeError {
    #[error("no ranking sources given")]
    NoSources,
    #[error("ranking source `{source_name}` lists institution `{institution}` outside the institution set")]
    UnknownInstitution {
        source_name: String,
        institution: String,
    },
    #[error("prestige table line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Decile number (1 = top) for 1-based list position `position` out of `n`.
fn decile(position: usize, n: usize) -> usize {
    (10 * position).div_ceil(n)
}

/// Decile value per institution: `1.0 - 0.1 * (ceil(10 r / n) - 1)` where
/// `r` is the 1-based position in rank order.
pub fn decile_values(source: &RankingSourceFile) -> BTreeMap<String, f64> {
    let n = source.len();
    source
        .entries()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            // (11 - d) / 10 avoids accumulating 0.1 steps.
            let d = decile(i + 1, n);
            (e.institution_id.clone(), (11 - d) as f64 / 10.0)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrestigeTable {
    scores: BTreeMap<String, f64>,
    source_count: usize,
    floor: f64,
}

impl PrestigeTable {
    pub fn source_count(&self) -> usize {
        self.source_count
    }

    pub fn scores(&self) -> &BTreeMap<String, f64> {
        &self.scores
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// Prestige of `institution`; the floor for ids not in the table.
    pub fn get(&self, institution: &str) -> f64 {
        self.scores.get(institution).copied().unwrap_or(self.floor)
    }

    /// Copy with every value, the floor included, multiplied by `factor`.
    /// The result no longer respects the `[1, 1 + k]` bound; it exists to
    /// probe scale invariance of the solver.
    pub fn scaled(&self, factor: f64) -> PrestigeTable {
        PrestigeTable {
            scores: self
                .scores
                .iter()
                .map(|(k, v)| (k.clone(), v * factor))
                .collect(),
            source_count: self.source_count,
            floor: self.floor * factor,
        }
    }

    /// Table with every listed institution at the floor value.
    pub fn uniform<'a>(universe: impl IntoIterator<Item = &'a str>) -> PrestigeTable {
        PrestigeTable {
            scores: universe
                .into_iter()
                .map(|i| (i.to_owned(), PRESTIGE_FLOOR))
                .collect(),
            source_count: 0,
            floor: PRESTIGE_FLOOR,
        }
    }

    /// `institution_id,prestige` sorted by id.
    pub fn write_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["institution_id", "prestige"])?;
        for (id, p) in &self.scores {
            w.write_record([id.as_str(), &p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read back a table written by [`PrestigeTable::write_csv`]. The source
    /// count is not stored in the file and is reported as 0.
    pub fn read_csv(input: impl Read) -> Result<PrestigeTable, PrestigeError> {
        let mut r = csv::Reader::from_reader(input);
        let mut scores = BTreeMap::new();
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let parse = |message: String| PrestigeError::Parse { line, message };
            let rec = rec.map_err(|e| parse(e.to_string()))?;
            let id = rec
                .get(0)
                .ok_or_else(|| parse("missing institution_id".into()))?;
            let p: f64 = rec
                .get(1)
                .ok_or_else(|| parse("missing prestige".into()))?
                .parse()
                .map_err(|e| parse(format!("{e}")))?;
            scores.insert(id.to_owned(), p);
        }
        Ok(PrestigeTable {
            scores,
            source_count: 0,
            floor: PRESTIGE_FLOOR,
        })
    }
}

/// Aggregate sources into the prestige table over `universe`.
pub fn institution_prestige<'a>(
    sources: &[RankingSourceFile],
    universe: impl IntoIterator<Item = &'a str>,
) -> Result<PrestigeTable, PrestigeError> {
    if sources.is_empty() {
        return Err(PrestigeError::NoSources);
    }
    let universe: BTreeSet<&str> = universe.into_iter().collect();
    let mut scores: BTreeMap<String, f64> = universe
        .iter()
        .map(|&i| (i.to_owned(), PRESTIGE_FLOOR))
        .collect();
    for source in sources {
        for (inst, value) in decile_values(source) {
            match scores.get_mut(&inst) {
                Some(p) => *p += value,
                None => {
                    return Err(PrestigeError::UnknownInstitution {
                        source_name: source.source_name.clone(),
                        institution: inst,
                    })
                }
            }
        }
    }
    Ok(PrestigeTable {
        scores,
        source_count: sources.len(),
        floor: PRESTIGE_FLOOR,
    })
}
