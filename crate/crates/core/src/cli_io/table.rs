//! CSV input with a header row: required columns `score` and `group`,
//! optional `label`; any other columns are carried through untouched.

use std::io::Read;

use csv::{ReaderBuilder, StringRecord};

use crate::barycenter::GroupedScores;
use crate::error::{FairError, Result};

pub const SCORE_COLUMN: &str = "score";
pub const GROUP_COLUMN: &str = "group";
pub const LABEL_COLUMN: &str = "label";

#[derive(Debug, Clone)]
pub struct ScoreTable {
    headers: StringRecord,
    records: Vec<StringRecord>,
    /// Physical line of each record, for error messages.
    lines: Vec<u64>,
    scores: Vec<f64>,
    group_col: usize,
    label_col: Option<usize>,
}

fn parse_err(line: u64, column: &str, msg: impl std::fmt::Display) -> FairError {
    FairError::Parse(format!("line {line}, column `{column}`: {msg}"))
}

impl ScoreTable {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| FairError::Parse(format!("cannot read CSV header: {e}")))?
            .clone();
        let find = |name: &str| headers.iter().position(|h| h.trim() == name);
        let score_col = find(SCORE_COLUMN)
            .ok_or_else(|| FairError::Parse(format!("missing required column `{SCORE_COLUMN}`")))?;
        let group_col = find(GROUP_COLUMN)
            .ok_or_else(|| FairError::Parse(format!("missing required column `{GROUP_COLUMN}`")))?;
        let label_col = find(LABEL_COLUMN);

        let mut records = Vec::new();
        let mut lines = Vec::new();
        let mut scores = Vec::new();
        for result in rdr.records() {
            let record = result.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                FairError::Parse(format!("line {line}: {e}"))
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let raw = record.get(score_col).unwrap_or("").trim();
            if raw.is_empty() {
                return Err(parse_err(line, SCORE_COLUMN, "missing value"));
            }
            let score: f64 = raw
                .parse()
                .map_err(|_| parse_err(line, SCORE_COLUMN, format!("cannot parse `{raw}` as a number")))?;
            if !score.is_finite() {
                return Err(parse_err(line, SCORE_COLUMN, format!("non-finite value `{raw}`")));
            }
            if record.get(group_col).unwrap_or("").trim().is_empty() {
                return Err(parse_err(line, GROUP_COLUMN, "missing value"));
            }
            scores.push(score);
            records.push(record);
            lines.push(line);
        }
        Ok(Self { headers, records, lines, scores, group_col, label_col })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| FairError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn headers(&self) -> &StringRecord {
        &self.headers
    }

    pub fn records(&self) -> &[StringRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Line number of data row `index` (0-based) in the source file.
    pub fn line_of(&self, index: usize) -> u64 {
        self.lines.get(index).copied().unwrap_or(0)
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn groups(&self) -> Vec<String> {
        self.string_column(self.group_col)
    }

    pub fn grouped(&self) -> Result<GroupedScores> {
        GroupedScores::new(self.scores.clone(), self.groups())
    }

    pub fn has_labels(&self) -> bool {
        self.label_col.is_some()
    }

    /// The named column as strings; `Parse` error when absent.
    pub fn column(&self, name: &str) -> Result<Vec<String>> {
        let idx = self
            .headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| FairError::Parse(format!("missing column `{name}`")))?;
        let values = self.string_column(idx);
        if let Some(i) = values.iter().position(|v| v.is_empty()) {
            return Err(parse_err(self.line_of(i), name, "missing value"));
        }
        Ok(values)
    }

    /// Numeric labels, when a `label` column exists.
    pub fn labels(&self) -> Option<Result<Vec<f64>>> {
        let idx = self.label_col?;
        Some(
            self.records
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let raw = r.get(idx).unwrap_or("").trim();
                    raw.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| parse_err(self.line_of(i), LABEL_COLUMN, format!("cannot parse `{raw}` as a number")))
                })
                .collect(),
        )
    }

    fn string_column(&self, idx: usize) -> Vec<String> {
        self.records.iter().map(|r| r.get(idx).unwrap_or("").trim().to_string()).collect()
    }
}

/// Labels as booleans when every value is exactly 0 or 1.
pub fn binary_labels(labels: &[f64]) -> Option<Vec<bool>> {
    labels
        .iter()
        .map(|&v| if v == 1.0 { Some(true) } else if v == 0.0 { Some(false) } else { None })
        .collect()
}
