use std::path::Path;

use crate::error::{Error, Result};
use crate::jsonl::JsonlReader;
use crate::model::{check_unique_ids, validate_record, SequenceRecord};

/// Streams validated records from a line-delimited corpus file.
/// Validation failures are reported with the offending line number.
pub fn read_corpus(
    path: &Path,
    expected_len: usize,
) -> Result<impl Iterator<Item = Result<SequenceRecord>>> {
    let path_buf = path.to_path_buf();
    Ok(JsonlReader::<SequenceRecord>::open(path)?.map(move |item| {
        let (line, record) = item?;
        validate_record(record, expected_len).map_err(|e| Error::parse(&path_buf, line, e))
    }))
}

/// Reads the whole corpus and rejects repeated ids.
pub fn load_corpus(path: &Path, expected_len: usize) -> Result<Vec<SequenceRecord>> {
    let records = read_corpus(path, expected_len)?.collect::<Result<Vec<_>>>()?;
    check_unique_ids(&records)?;
    Ok(records)
}
