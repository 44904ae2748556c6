//! Byte stream <-> field symbol stream.
//!
//! For `q < 256` every 8-byte little-endian chunk becomes `L` base-`q`
//! digits, least significant first, with `L` the smallest count such that
//! `q^L >= 2^64`. Larger fields hold one byte per symbol.

use ssmds_core::gf::Fe;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolError {
    #[error("symbol {value} is not below q = {q}")]
    OutOfField { value: u32, q: u32 },
    #[error("digit group decodes past 64 bits")]
    ChunkOverflow,
    #[error("symbol stream holds {have} bytes, trailer claims {want}")]
    Truncated { have: usize, want: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolMap {
    /// Base-`q` digits of 8-byte chunks.
    Radix { q: u32, digits: usize },
    /// One byte per symbol.
    Bytes { q: u32 },
}

impl SymbolMap {
    pub fn new(q: u32) -> SymbolMap {
        if q >= 256 {
            return SymbolMap::Bytes { q };
        }
        let mut digits = 0;
        let mut span: u128 = 1;
        while span < 1u128 << 64 {
            span *= q as u128;
            digits += 1;
        }
        SymbolMap::Radix { q, digits }
    }

    /// Symbols produced for `len` input bytes.
    pub fn symbols_for(&self, len: usize) -> usize {
        match *self {
            SymbolMap::Radix { digits, .. } => len.div_ceil(8) * digits,
            SymbolMap::Bytes { .. } => len,
        }
    }

    pub fn encode(&self, bytes: &[u8]) -> Vec<Fe> {
        match *self {
            SymbolMap::Bytes { .. } => bytes.iter().map(|&b| Fe(b as u16)).collect(),
            SymbolMap::Radix { q, digits } => {
                let mut out = Vec::with_capacity(self.symbols_for(bytes.len()));
                for chunk in bytes.chunks(8) {
                    let mut word = [0u8; 8];
                    word[..chunk.len()].copy_from_slice(chunk);
                    let mut v = u64::from_le_bytes(word);
                    for _ in 0..digits {
                        out.push(Fe((v % q as u64) as u16));
                        v /= q as u64;
                    }
                }
                out
            }
        }
    }

    /// Inverse of [`SymbolMap::encode`], keeping the first `len` bytes.
    pub fn decode(&self, symbols: &[Fe], len: u64) -> Result<Vec<u8>, SymbolError> {
        let mut out = Vec::with_capacity(len as usize);
        match *self {
            SymbolMap::Bytes { q } => {
                for s in symbols.iter().take(len as usize) {
                    if s.value() > 255 {
                        return Err(SymbolError::OutOfField { value: s.value(), q });
                    }
                    out.push(s.0 as u8);
                }
            }
            SymbolMap::Radix { q, digits } => {
                for group in symbols.chunks_exact(digits) {
                    if out.len() as u64 >= len {
                        break;
                    }
                    let mut v: u128 = 0;
                    for s in group.iter().rev() {
                        if s.value() >= q {
                            return Err(SymbolError::OutOfField { value: s.value(), q });
                        }
                        v = v * q as u128 + s.value() as u128;
                    }
                    let v = u64::try_from(v).map_err(|_| SymbolError::ChunkOverflow)?;
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        if (out.len() as u64) < len {
            return Err(SymbolError::Truncated { have: out.len(), want: len });
        }
        out.truncate(len as usize);
        Ok(out)
    }
}
