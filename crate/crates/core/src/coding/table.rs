//! Tab-separated findings tables.
//!
//! Input columns: `finding_id kind text condition participant coder`. Coded
//! tables add `level principle rationale`, with rationale cues joined by
//! ` | `. Empty cells read as absent.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::codebook::{LevelId, PrincipleId};
use super::{CodedFinding, CodingError, FindingKind, ReviewFinding};

pub const RATIONALE_SEPARATOR: &str = " | ";

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    finding_id: String,
    kind: FindingKind,
    text: String,
    #[serde(default)]
    condition: Option<String>,
    #[serde(default)]
    participant: Option<String>,
    #[serde(default)]
    coder: Option<String>,
    #[serde(default)]
    level: Option<LevelId>,
    #[serde(default)]
    principle: Option<PrincipleId>,
    #[serde(default)]
    rationale: Option<String>,
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().delimiter(b'\t').quoting(false).flexible(true).trim(csv::Trim::All).from_reader(input)
}

fn blank_to_none(s: Option<String>) -> Option<String> {
    s.filter(|v| !v.trim().is_empty())
}

fn rows<R: Read>(input: R) -> Result<Vec<Row>, CodingError> {
    let mut out = Vec::new();
    for (i, row) in reader(input).deserialize::<Row>().enumerate() {
        let mut row = row.map_err(|e| CodingError::Table(format!("row {}: {e}", i + 2)))?;
        if row.finding_id.is_empty() {
            return Err(CodingError::Table(format!("row {}: finding_id is empty", i + 2)));
        }
        if row.text.is_empty() {
            return Err(CodingError::EmptyFinding(row.finding_id));
        }
        row.condition = blank_to_none(row.condition);
        row.participant = blank_to_none(row.participant);
        row.coder = blank_to_none(row.coder);
        out.push(row);
    }
    Ok(out)
}

fn finding(row: &Row) -> ReviewFinding {
    ReviewFinding {
        finding_id: row.finding_id.clone(),
        kind: row.kind,
        text: row.text.clone(),
        condition: row.condition.clone(),
        participant: row.participant.clone(),
        coder: row.coder.clone(),
    }
}

/// Findings, ignoring any coding columns.
pub fn read_findings<R: Read>(input: R) -> Result<Vec<ReviewFinding>, CodingError> {
    Ok(rows(input)?.iter().map(finding).collect())
}

/// Findings with their level and principle; both columns are required.
pub fn read_coded<R: Read>(input: R) -> Result<Vec<CodedFinding>, CodingError> {
    rows(input)?
        .into_iter()
        .map(|row| {
            let (Some(level), Some(principle)) = (row.level, row.principle) else {
                return Err(CodingError::Table(format!("finding `{}` has no level or principle", row.finding_id)));
            };
            let rationale = row
                .rationale
                .as_deref()
                .map(|r| r.split(RATIONALE_SEPARATOR).map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect())
                .unwrap_or_default();
            Ok(CodedFinding { finding: finding(&row), level, principle, rationale })
        })
        .collect()
}

fn clean(cell: &str) -> String {
    cell.replace(['\t', '\n', '\r'], " ")
}

pub fn write_coded<W: Write>(out: W, coded: &[CodedFinding]) -> Result<(), CodingError> {
    let mut w = csv::WriterBuilder::new().delimiter(b'\t').quote_style(csv::QuoteStyle::Never).from_writer(out);
    let err = |e: csv::Error| CodingError::Table(e.to_string());
    w.write_record(["finding_id", "kind", "text", "condition", "participant", "coder", "level", "principle", "rationale"])
        .map_err(err)?;
    for c in coded {
        let f = &c.finding;
        w.write_record([
            clean(&f.finding_id),
            f.kind.as_str().to_string(),
            clean(&f.text),
            clean(f.condition.as_deref().unwrap_or("")),
            clean(f.participant.as_deref().unwrap_or("")),
            clean(f.coder.as_deref().unwrap_or("")),
            c.level.to_string(),
            c.principle.to_string(),
            clean(&c.rationale.join(RATIONALE_SEPARATOR)),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| CodingError::Table(e.to_string()))
}

/// Two label columns of a tab-separated table, for inter-rater agreement.
/// With no column names the second and third columns are used.
pub fn read_label_pairs<R: Read>(
    input: R,
    a: Option<&str>,
    b: Option<&str>,
) -> Result<(Vec<String>, Vec<String>), CodingError> {
    let mut rdr = reader(input);
    let headers = rdr.headers().map_err(|e| CodingError::Table(e.to_string()))?.clone();
    let index = |name: Option<&str>, default: usize| -> Result<usize, CodingError> {
        match name {
            Some(n) => headers.iter().position(|h| h == n).ok_or_else(|| CodingError::Table(format!("no column `{n}`"))),
            None if default < headers.len() => Ok(default),
            None => Err(CodingError::Table(format!("table needs at least {} columns", default + 1))),
        }
    };
    let (ia, ib) = (index(a, 1)?, index(b, 2)?);
    let (mut la, mut lb) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CodingError::Table(format!("row {}: {e}", i + 2)))?;
        let cell = |j: usize| rec.get(j).map(str::to_string).unwrap_or_default();
        la.push(cell(ia));
        lb.push(cell(ib));
    }
    Ok((la, lb))
}
