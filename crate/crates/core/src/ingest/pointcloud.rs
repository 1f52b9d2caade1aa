//! Point-cloud files.
//!
//! Binary (`IDPC`), one or more frames back to back:
//!
//! ```text
//! "IDPC"  u8 version = 1
//! u16 LE  seq_id byte length, then UTF-8 seq_id
//! u32 LE  n_points
//! u32 LE  dim
//! n_points bytes of special mask (0/1)
//! n_points * dim f32 LE, row-major
//! ```
//!
//! Text: one JSON object per line with `seq_id`, `special`, `vectors`.
//!
//! Coordinates are held as f64 in memory and stored as f32 in the binary
//! form, so a cloud read from an IDPC file writes back bit-for-bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::jsonl::is_skippable;
use crate::model::PointCloud;

pub const MAGIC: &[u8; 4] = b"IDPC";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    Binary,
    Text,
}

pub fn encode_binary(cloud: &PointCloud, out: &mut Vec<u8>) -> Result<()> {
    let id = cloud.seq_id().as_bytes();
    let id_len = u16::try_from(id.len())
        .map_err(|_| Error::Framing(format!("seq_id of {} bytes exceeds u16", id.len())))?;
    let n = u32::try_from(cloud.len()).map_err(|_| Error::Framing("too many points".into()))?;
    let dim = u32::try_from(cloud.dim()).map_err(|_| Error::Framing("dim too large".into()))?;
    out.reserve(15 + id.len() + cloud.len() * (1 + 4 * cloud.dim()));
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&id_len.to_le_bytes());
    out.extend_from_slice(id);
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&dim.to_le_bytes());
    out.extend(cloud.special_mask().iter().map(|&b| b as u8));
    for (pos, &x) in cloud.coords().iter().enumerate() {
        let v = x as f32;
        if !v.is_finite() {
            return Err(Error::NonFinite {
                row: pos / cloud.dim(),
                col: pos % cloud.dim(),
            });
        }
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            Error::Framing(format!("truncated {what} at byte {}", self.pos))
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

/// Decodes every frame in `buf`.
pub fn decode_binary(buf: &[u8]) -> Result<Vec<PointCloud>> {
    let mut cur = Cursor { buf, pos: 0 };
    let mut clouds = Vec::new();
    while cur.pos < buf.len() {
        if cur.take(4, "magic")? != MAGIC {
            return Err(Error::Framing(format!("bad magic at byte {}", cur.pos - 4)));
        }
        let version = cur.take(1, "version")?[0];
        if version != VERSION {
            return Err(Error::Framing(format!("unsupported version {version}")));
        }
        let id_len = cur.u16("seq_id length")? as usize;
        let seq_id = std::str::from_utf8(cur.take(id_len, "seq_id")?)
            .map_err(|_| Error::Framing("seq_id is not UTF-8".into()))?
            .to_string();
        let n = cur.u32("n_points")? as usize;
        let dim = cur.u32("dim")? as usize;
        if dim == 0 {
            return Err(Error::Framing("dim is zero".into()));
        }
        let mask = cur
            .take(n, "special mask")?
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::Framing(format!("special flag {other} is not 0/1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let values = n
            .checked_mul(dim)
            .and_then(|v| v.checked_mul(4))
            .ok_or_else(|| Error::Framing("point count overflows".into()))?;
        let coords = cur
            .take(values, "coordinates")?
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect();
        clouds.push(PointCloud::new(seq_id, dim, coords, mask)?);
    }
    Ok(clouds)
}

pub fn decode_text(text: &str, path: &Path) -> Result<Vec<PointCloud>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !is_skippable(l))
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(path, i + 1, e)))
        .collect()
}

/// Reads all clouds in `path`, detecting the format from the magic bytes.
pub fn read_pointclouds(path: &Path) -> Result<Vec<PointCloud>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(MAGIC) {
        decode_binary(&bytes)
    } else {
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| Error::Framing(format!("{} is neither IDPC nor UTF-8", path.display())))?;
        decode_text(text, path)
    }
}

pub fn write_pointclouds<'a>(
    path: &Path,
    clouds: impl IntoIterator<Item = &'a PointCloud>,
    format: CloudFormat,
) -> Result<()> {
    let mut buf = Vec::new();
    for c in clouds {
        match format {
            CloudFormat::Binary => encode_binary(c, &mut buf)?,
            CloudFormat::Text => {
                serde_json::to_writer(&mut buf, c)?;
                buf.push(b'\n');
            }
        }
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}
