//! Checkpoint files.
//!
//! ```text
//! pivotmt-checkpoint v1\n
//! <ModelConfig as key=value lines>\n
//! tensors=<count>\n
//! end\n
//! then, per tensor in path order:
//!   u32 LE path length, path bytes (UTF-8),
//!   u32 LE rank, rank × u64 LE dims,
//!   product(dims) × f64 LE values
//! ```
//!
//! Loading then saving reproduces the file byte for byte.

use std::collections::BTreeMap;
use std::path::Path;

use super::config::ModelConfig;
use super::params::Parameters;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::io_util;

const MAGIC: &str = "pivotmt-checkpoint v1";

pub fn to_bytes(config: &ModelConfig, params: &Parameters) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + params.num_values() * 8);
    out.extend_from_slice(MAGIC.as_bytes());
    out.push(b'\n');
    out.extend_from_slice(config.to_key_values().as_bytes());
    out.extend_from_slice(format!("tensors={}\nend\n", params.len()).as_bytes());
    for (name, t) in params.iter() {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(t.rank() as u32).to_le_bytes());
        for &d in t.shape() {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for &v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    origin: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::format(self.origin, "truncated checkpoint"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn from_bytes(bytes: &[u8], origin: &Path) -> Result<(ModelConfig, Parameters)> {
    let bad = |m: &str| Error::format(origin, m);
    let marker = b"\nend\n";
    let header_end = bytes
        .windows(marker.len())
        .position(|w| w == marker)
        .ok_or_else(|| bad("missing end of header"))?;
    let header = std::str::from_utf8(&bytes[..header_end]).map_err(|_| bad("header is not UTF-8"))?;
    let (first, rest) = header.split_once('\n').ok_or_else(|| bad("missing header body"))?;
    if first != MAGIC {
        return Err(bad("unrecognised checkpoint version"));
    }
    let mut map = io_util::parse_key_values(rest, origin)?;
    let count: usize = io_util::take(&mut map, "tensors", origin)?;
    let config = ModelConfig::from_map(&mut map, origin)?;
    io_util::reject_unknown(&map, origin)?;

    let mut reader = Reader {
        bytes,
        pos: header_end + marker.len(),
        origin,
    };
    let mut tensors = BTreeMap::new();
    for _ in 0..count {
        let len = reader.u32()? as usize;
        let name = std::str::from_utf8(reader.take(len)?)
            .map_err(|_| bad("tensor path is not UTF-8"))?
            .to_owned();
        let rank = reader.u32()? as usize;
        let shape = (0..rank)
            .map(|_| reader.u64().map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        let n: usize = shape.iter().product();
        let raw = reader.take(n.checked_mul(8).ok_or_else(|| bad("tensor too large"))?)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        if tensors.insert(name.clone(), Tensor::new(shape, data)?).is_some() {
            return Err(bad(&format!("duplicate tensor {name}")));
        }
    }
    if reader.pos != bytes.len() {
        return Err(bad("trailing bytes after last tensor"));
    }
    let params = Parameters::from_map(tensors);
    params
        .check_against(&config)
        .map_err(|e| Error::format(origin, e.to_string()))?;
    Ok((config, params))
}

pub fn save(path: impl AsRef<Path>, config: &ModelConfig, params: &Parameters) -> Result<()> {
    io_util::write_atomic(path, &to_bytes(config, params))
}

pub fn load(path: impl AsRef<Path>) -> Result<(ModelConfig, Parameters)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ModelConfig {
        ModelConfig {
            num_layers: 1,
            d_model: 8,
            num_heads: 2,
            d_ff: 12,
            max_seq_len: 16,
            dropout_rate: 0.1,
            src_vocab_size: 9,
            tgt_vocab_size: 7,
        }
    }

    #[test]
    fn bytes_round_trip_exactly() {
        let params = Parameters::init(&config(), 42).unwrap();
        let bytes = to_bytes(&config(), &params);
        let (c, p) = from_bytes(&bytes, Path::new("ck")).unwrap();
        assert_eq!(c, config());
        assert_eq!(p, params);
        assert_eq!(to_bytes(&c, &p), bytes);
    }

    #[test]
    fn corrupt_files_rejected() {
        let params = Parameters::init(&config(), 42).unwrap();
        let bytes = to_bytes(&config(), &params);
        let origin = Path::new("ck");
        assert!(from_bytes(&bytes[..bytes.len() - 3], origin).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(from_bytes(&extra, origin).is_err());
        let wrong = String::from_utf8_lossy(&bytes[..40]).replace("v1", "v9");
        let mut versioned = wrong.into_bytes();
        versioned.extend_from_slice(&bytes[40..]);
        assert!(from_bytes(&versioned, origin).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let params = Parameters::init(&config(), 1).unwrap();
        save(&path, &config(), &params).unwrap();
        let (c, p) = load(&path).unwrap();
        assert_eq!((c, p), (config(), params));
    }
}
