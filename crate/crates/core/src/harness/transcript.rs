//! File I/O for experiment records and QKD session transcripts.

use std::fs;
use std::path::Path;

use super::HarnessError;
use crate::adversary::ExperimentRecord;
use crate::qkd::QkdTranscript;

pub fn write_records(path: &Path, records: &[ExperimentRecord]) -> Result<(), HarnessError> {
    let text: String = records.iter().map(ToString::to_string).collect();
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(ExperimentRecord::parse_all(&text)?)
}

pub fn write_transcript(path: &Path, t: &QkdTranscript) -> Result<(), HarnessError> {
    fs::write(path, t.encode()).map_err(|e| HarnessError::io(path, e))
}

pub fn read_transcript(path: &Path) -> Result<QkdTranscript, HarnessError> {
    let bytes = fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(QkdTranscript::decode(&bytes)?)
}
