//! Line-delimited JSON files with an optional leading metadata line.
//!
//! Artifacts written by the toolkit start with `{"_meta":{...}}`; readers
//! skip any line beginning with that key.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const META_PREFIX: &str = "{\"_meta\"";

/// Provenance stamped into every artifact. Carries no timestamps so that
/// reruns stay byte-identical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMeta {
    pub toolkit: String,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
}

impl RunMeta {
    pub fn new(seed: u64, config_hash: impl Into<String>) -> Self {
        RunMeta {
            toolkit: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config_hash: config_hash.into(),
        }
    }
}

#[derive(Serialize)]
struct MetaLine<'a> {
    _meta: &'a RunMeta,
}

pub(crate) fn is_skippable(line: &str) -> bool {
    let t = line.trim_start();
    t.is_empty() || t.starts_with(META_PREFIX)
}

/// Streams `(line_number, parsed)` pairs, 1-based.
pub struct JsonlReader<T> {
    path: std::path::PathBuf,
    lines: std::io::Lines<BufReader<File>>,
    line_no: usize,
    _marker: std::marker::PhantomData<T>,
}

impl<T: DeserializeOwned> JsonlReader<T> {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(JsonlReader {
            path: path.to_path_buf(),
            lines: BufReader::new(file).lines(),
            line_no: 0,
            _marker: std::marker::PhantomData,
        })
    }
}

impl<T: DeserializeOwned> Iterator for JsonlReader<T> {
    type Item = Result<(usize, T)>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = self.lines.next()?;
            self.line_no += 1;
            let line = match line {
                Ok(l) => l,
                Err(e) => return Some(Err(Error::io(&self.path, e))),
            };
            if is_skippable(&line) {
                continue;
            }
            return Some(
                serde_json::from_str(&line)
                    .map(|v| (self.line_no, v))
                    .map_err(|e| Error::parse(&self.path, self.line_no, e)),
            );
        }
    }
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    JsonlReader::open(path)?.map(|r| r.map(|(_, v)| v)).collect()
}

pub fn read_meta(path: &Path) -> Result<Option<RunMeta>> {
    #[derive(Deserialize)]
    struct Wrapper {
        _meta: RunMeta,
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let first = BufReader::new(file).lines().next();
    match first {
        Some(Ok(line)) if line.trim_start().starts_with(META_PREFIX) => {
            Ok(Some(serde_json::from_str::<Wrapper>(&line)?._meta))
        }
        Some(Err(e)) => Err(Error::io(path, e)),
        _ => Ok(None),
    }
}

pub fn write_jsonl<'a, T: Serialize + 'a>(
    path: &Path,
    meta: Option<&RunMeta>,
    items: impl IntoIterator<Item = &'a T>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    if let Some(meta) = meta {
        serde_json::to_writer(&mut w, &MetaLine { _meta: meta })?;
        w.write_all(b"\n").map_err(io)?;
    }
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meta_line_is_skipped_on_read() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.jsonl");
        let meta = RunMeta::new(7, "abc");
        write_jsonl(&p, Some(&meta), &[1u32, 2, 3]).unwrap();
        assert_eq!(read_jsonl::<u32>(&p).unwrap(), vec![1, 2, 3]);
        assert_eq!(read_meta(&p).unwrap(), Some(meta));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.jsonl");
        std::fs::write(&p, "1\n\n{oops}\n").unwrap();
        match read_jsonl::<u32>(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
