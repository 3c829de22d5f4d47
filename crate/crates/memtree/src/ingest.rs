//! JSONL corpus ingestion: one JSON object per line, text extracted from a
//! configurable field, order preserved.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which JSON fields carry the text and the optional source id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldMap {
    /// Field holding the text to insert.
    pub text_field: String,
    /// Optional field holding a source id; lines without one are labeled
    /// by line number.
    pub id_field: Option<String>,
}

impl Default for FieldMap {
    fn default() -> Self {
        FieldMap {
            text_field: "text".into(),
            id_field: None,
        }
    }
}

/// One successfully parsed corpus line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IngestRecord {
    /// 1-based line number in the stream.
    pub line: usize,
    pub source_id: String,
    pub text: String,
}

/// One rejected corpus line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineError {
    /// 1-based line number in the stream.
    pub line: usize,
    pub message: String,
}

/// Parsed records in file order plus per-line rejections.
#[derive(Debug, Default)]
pub struct IngestOutcome {
    pub records: Vec<IngestRecord>,
    pub errors: Vec<LineError>,
}

/// Reads JSONL records from `reader`. Blank lines are skipped. Malformed
/// lines are collected as [`LineError`]s; with `strict` the first one
/// aborts instead.
pub fn ingest_jsonl(
    reader: impl BufRead,
    field_map: &FieldMap,
    strict: bool,
) -> Result<IngestOutcome> {
    let mut outcome = IngestOutcome::default();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line, line_no, field_map) {
            Ok(record) => outcome.records.push(record),
            Err(message) => {
                if strict {
                    return Err(Error::SchemaError {
                        line: line_no,
                        message,
                    });
                }
                outcome.errors.push(LineError {
                    line: line_no,
                    message,
                });
            }
        }
    }
    Ok(outcome)
}

fn parse_line(
    line: &str,
    line_no: usize,
    field_map: &FieldMap,
) -> std::result::Result<IngestRecord, String> {
    let value: serde_json::Value =
        serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
    let object = value
        .as_object()
        .ok_or_else(|| "line is not a JSON object".to_string())?;
    let text = object
        .get(&field_map.text_field)
        .ok_or_else(|| format!("missing field {:?}", field_map.text_field))?
        .as_str()
        .ok_or_else(|| format!("field {:?} is not a string", field_map.text_field))?;
    if text.is_empty() {
        return Err(format!("field {:?} is empty", field_map.text_field));
    }
    let source_id = match &field_map.id_field {
        Some(field) => match object.get(field) {
            Some(serde_json::Value::String(s)) => s.clone(),
            Some(serde_json::Value::Number(n)) => n.to_string(),
            Some(_) => return Err(format!("field {field:?} is not a string or number")),
            None => return Err(format!("missing field {field:?}")),
        },
        None => format!("line-{line_no}"),
    };
    Ok(IngestRecord {
        line: line_no,
        source_id,
        text: text.to_string(),
    })
}
