//! Named-tensor weights container.
//!
//! Layout:
//!
//! ```text
//! [u64 LE header length N][N bytes UTF-8 JSON header][payload]
//! ```
//!
//! The header maps each tensor name to `{"dtype":"f32","shape":[..],"offset":k}`
//! where `k` is a byte offset into the payload. Tensors are little-endian f32,
//! row-major, 8-byte aligned and non-overlapping.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Tensor;
use crate::error::{Error, Result};

pub type TensorMap = BTreeMap<String, Tensor>;

const ALIGN: usize = 8;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    dtype: String,
    shape: Vec<usize>,
    offset: usize,
}

pub fn write_container(tensors: &TensorMap) -> Vec<u8> {
    let mut offsets = Vec::with_capacity(tensors.len());
    let mut header = BTreeMap::new();
    let mut payload_len = 0usize;
    for (name, t) in tensors {
        offsets.push(payload_len);
        header.insert(
            name.as_str(),
            Entry {
                dtype: "f32".to_owned(),
                shape: t.shape().to_vec(),
                offset: payload_len,
            },
        );
        payload_len = (payload_len + t.len() * 4).next_multiple_of(ALIGN);
    }
    let header = serde_json::to_vec(&header).expect("header serializes");

    let mut out = Vec::with_capacity(8 + header.len() + payload_len);
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(&header);
    let payload_start = out.len();
    for (t, offset) in tensors.values().zip(offsets) {
        out.resize(payload_start + offset, 0);
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.resize(payload_start + payload_len, 0);
    out
}

pub fn read_container(bytes: &[u8]) -> Result<TensorMap> {
    let bad = |msg: String| Error::Container(msg);
    if bytes.len() < 8 {
        return Err(bad(format!("{} bytes is too short for a header length", bytes.len())));
    }
    let header_len = u64::from_le_bytes(bytes[..8].try_into().unwrap());
    let header_len = usize::try_from(header_len).map_err(|_| bad("header length overflows".into()))?;
    let header_end = 8usize
        .checked_add(header_len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| bad(format!("header length {header_len} exceeds file size {}", bytes.len())))?;
    let header: BTreeMap<String, Entry> = serde_json::from_slice(&bytes[8..header_end])
        .map_err(|e| bad(format!("header is not a valid tensor index: {e}")))?;
    let payload = &bytes[header_end..];

    let mut spans = Vec::with_capacity(header.len());
    let mut out = TensorMap::new();
    for (name, entry) in header {
        if entry.dtype != "f32" {
            return Err(bad(format!("tensor \"{name}\" has unsupported dtype {}", entry.dtype)));
        }
        if entry.offset % ALIGN != 0 {
            return Err(bad(format!("tensor \"{name}\" offset {} is not 8-byte aligned", entry.offset)));
        }
        let count: usize = entry.shape.iter().product();
        let end = count
            .checked_mul(4)
            .and_then(|n| n.checked_add(entry.offset))
            .filter(|&e| e <= payload.len())
            .ok_or_else(|| bad(format!("tensor \"{name}\" extends past the payload")))?;
        let data = payload[entry.offset..end]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let tensor = Tensor::new(entry.shape, data).map_err(|e| bad(format!("tensor \"{name}\": {e}")))?;
        spans.push((entry.offset, end, name.clone()));
        out.insert(name, tensor);
    }

    spans.sort();
    for pair in spans.windows(2) {
        if pair[1].0 < pair[0].1 {
            return Err(bad(format!("tensors \"{}\" and \"{}\" overlap", pair[0].2, pair[1].2)));
        }
    }
    Ok(out)
}

pub fn read_container_file(path: impl AsRef<Path>) -> Result<(TensorMap, Vec<u8>)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let map = read_container(&bytes)?;
    Ok((map, bytes))
}

pub fn write_container_file(path: impl AsRef<Path>, tensors: &TensorMap) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_container(tensors)).map_err(|e| Error::io(path, e))
}
