//! Shard files: a fixed 67-byte header, the node's symbols as
//! little-endian `u16` words, then the original input length as a
//! little-endian `u64`.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use ssmds_core::codes::CodeSpec;
use ssmds_core::gf::Fe;
use thiserror::Error;

pub const MAGIC: [u8; 8] = *b"SSMDS\0\0\0";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 67;
const TRAILER_LEN: usize = 8;

#[derive(Debug, Error)]
pub enum ShardError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: not a shard file ({reason})")]
    BadFormat { path: PathBuf, reason: String },
    #[error("{path}: spec hash does not match the bundle")]
    SpecHashMismatch { path: PathBuf },
    #[error("{path}: header holds node {found}, expected {expected}")]
    WrongNode { path: PathBuf, found: u16, expected: u16 },
    #[error("shards disagree on the input length")]
    LengthMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShardHeader {
    pub version: u16,
    pub node_index: u16,
    pub n: u16,
    pub k: u16,
    pub r: u16,
    pub n_prime: u16,
    pub m: u16,
    pub q: u32,
    pub family: u8,
    pub payload_symbols: u64,
    pub spec_hash: [u8; 32],
}

impl ShardHeader {
    pub fn for_node(spec: &CodeSpec, spec_hash: [u8; 32], node: usize, payload_symbols: u64) -> ShardHeader {
        ShardHeader {
            version: VERSION,
            node_index: node as u16,
            n: spec.n as u16,
            k: spec.k as u16,
            r: spec.r as u16,
            n_prime: spec.n_prime as u16,
            m: spec.m as u16,
            q: spec.q,
            family: spec.family.code(),
            payload_symbols,
            spec_hash,
        }
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[..8].copy_from_slice(&MAGIC);
        let mut pos = 8;
        for v in [self.version, self.node_index, self.n, self.k, self.r, self.n_prime, self.m] {
            out[pos..pos + 2].copy_from_slice(&v.to_le_bytes());
            pos += 2;
        }
        out[pos..pos + 4].copy_from_slice(&self.q.to_le_bytes());
        pos += 4;
        out[pos] = self.family;
        pos += 1;
        out[pos..pos + 8].copy_from_slice(&self.payload_symbols.to_le_bytes());
        pos += 8;
        out[pos..].copy_from_slice(&self.spec_hash);
        out
    }

    pub fn from_bytes(bytes: &[u8; HEADER_LEN]) -> Result<ShardHeader, String> {
        if bytes[..8] != MAGIC {
            return Err("bad magic".into());
        }
        let u16_at = |p: usize| u16::from_le_bytes([bytes[p], bytes[p + 1]]);
        let version = u16_at(8);
        if version != VERSION {
            return Err(format!("unsupported version {version}"));
        }
        let mut spec_hash = [0u8; 32];
        spec_hash.copy_from_slice(&bytes[35..]);
        Ok(ShardHeader {
            version,
            node_index: u16_at(10),
            n: u16_at(12),
            k: u16_at(14),
            r: u16_at(16),
            n_prime: u16_at(18),
            m: u16_at(20),
            q: u32::from_le_bytes(bytes[22..26].try_into().expect("4 bytes")),
            family: bytes[26],
            payload_symbols: u64::from_le_bytes(bytes[27..35].try_into().expect("8 bytes")),
            spec_hash,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shard {
    pub header: ShardHeader,
    pub payload: Vec<Fe>,
    /// Byte length of the encoded input.
    pub input_len: u64,
}

pub fn shard_path(dir: &Path, node: usize) -> PathBuf {
    dir.join(format!("node_{node:03}.shard"))
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ShardError + '_ {
    move |source| ShardError::Io { path: path.to_path_buf(), source }
}

impl Shard {
    pub fn write(&self, path: &Path) -> Result<(), ShardError> {
        let mut buf = Vec::with_capacity(HEADER_LEN + 2 * self.payload.len() + TRAILER_LEN);
        buf.extend_from_slice(&self.header.to_bytes());
        for s in &self.payload {
            buf.extend_from_slice(&s.0.to_le_bytes());
        }
        buf.extend_from_slice(&self.input_len.to_le_bytes());
        let mut file = fs::File::create(path).map_err(io_err(path))?;
        file.write_all(&buf).map_err(io_err(path))
    }

    pub fn read(path: &Path) -> Result<Shard, ShardError> {
        let bad = |reason: &str| ShardError::BadFormat { path: path.to_path_buf(), reason: reason.to_string() };
        let mut bytes = Vec::new();
        fs::File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(io_err(path))?;
        if bytes.len() < HEADER_LEN + TRAILER_LEN {
            return Err(bad("too short"));
        }
        let header =
            ShardHeader::from_bytes(bytes[..HEADER_LEN].try_into().expect("header slice")).map_err(|e| bad(&e))?;
        let body = &bytes[HEADER_LEN..bytes.len() - TRAILER_LEN];
        if body.len() as u64 != 2 * header.payload_symbols {
            return Err(bad("payload length disagrees with header"));
        }
        let payload = body.chunks_exact(2).map(|c| Fe(u16::from_le_bytes([c[0], c[1]]))).collect();
        let input_len = u64::from_le_bytes(bytes[bytes.len() - TRAILER_LEN..].try_into().expect("8 bytes"));
        Ok(Shard { header, payload, input_len })
    }

    /// Reads the shard of `node` and checks it belongs to the bundle.
    pub fn read_checked(dir: &Path, node: usize, spec_hash: &[u8; 32]) -> Result<Shard, ShardError> {
        let path = shard_path(dir, node);
        let shard = Shard::read(&path)?;
        if &shard.header.spec_hash != spec_hash {
            return Err(ShardError::SpecHashMismatch { path });
        }
        if shard.header.node_index as usize != node {
            return Err(ShardError::WrongNode { path, found: shard.header.node_index, expected: node as u16 });
        }
        Ok(shard)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_roundtrip() {
        let h = ShardHeader {
            version: VERSION,
            node_index: 7,
            n: 12,
            k: 10,
            r: 2,
            n_prime: 3,
            m: 3,
            q: 13,
            family: 4,
            payload_symbols: 800,
            spec_hash: [9; 32],
        };
        let bytes = h.to_bytes();
        assert_eq!(bytes.len(), HEADER_LEN);
        assert_eq!(ShardHeader::from_bytes(&bytes).unwrap(), h);
        let mut broken = bytes;
        broken[0] = b'X';
        assert!(ShardHeader::from_bytes(&broken).is_err());
    }
}
