//! Binary dump of a null distribution matrix, for debugging.
//!
//! Layout, all little-endian:
//!
//! | offset | type    | field                              |
//! |--------|---------|------------------------------------|
//! | 0      | [u8; 8] | magic `b"ZNULL\0\0\x01"`           |
//! | 8      | u64     | M                                  |
//! | 16     | u64     | B                                  |
//! | 24     | u64     | seed                               |
//! | 32     | u8      | scheme (0 bootstrap, 1 permutation) |
//! | 33     | u8      | sidedness (0 upper, 1 two-sided)   |
//! | 34     | [u8; 6] | zero padding                       |
//! | 40     | f64 x MB | Z, column-major (replicate b holds M values) |

use std::io::{Read, Write};

use super::null::{NullDistributionEstimate, Scheme, Sidedness};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"ZNULL\0\0\x01";

pub fn write_dump<W: Write>(null: &NullDistributionEstimate, mut w: W) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(null.n_stats() as u64).to_le_bytes())?;
    w.write_all(&(null.n_replicates() as u64).to_le_bytes())?;
    w.write_all(&null.seed.to_le_bytes())?;
    let scheme = match null.scheme {
        Scheme::BootstrapNonparam => 0u8,
        Scheme::Permutation => 1,
    };
    let side = match null.sidedness {
        Sidedness::OneSidedUpper => 0u8,
        Sidedness::TwoSided => 1,
    };
    w.write_all(&[scheme, side, 0, 0, 0, 0, 0, 0])?;
    for v in null.raw() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a dump back into an estimate (row moments are recomputed from Z).
pub fn read_dump<R: Read>(mut r: R) -> Result<NullDistributionEstimate> {
    let bad = |msg: &str| Error::invalid(format!("null dump: {msg}"));
    let mut header = [0u8; 40];
    r.read_exact(&mut header).map_err(|_| bad("truncated header"))?;
    if &header[..8] != MAGIC {
        return Err(bad("bad magic"));
    }
    let word = |i: usize| u64::from_le_bytes(header[i..i + 8].try_into().expect("8 bytes"));
    let (m, b, seed) = (word(8) as usize, word(16) as usize, word(24));
    let scheme = match header[32] {
        0 => Scheme::BootstrapNonparam,
        1 => Scheme::Permutation,
        _ => return Err(bad("unknown scheme")),
    };
    let sidedness = match header[33] {
        0 => Sidedness::OneSidedUpper,
        1 => Sidedness::TwoSided,
        _ => return Err(bad("unknown sidedness")),
    };
    let mut rows = vec![vec![0.0; b]; m];
    let mut buf = [0u8; 8];
    for j in 0..b {
        for row in rows.iter_mut() {
            r.read_exact(&mut buf).map_err(|_| bad("truncated body"))?;
            row[j] = f64::from_le_bytes(buf);
        }
    }
    let mut null = NullDistributionEstimate::from_rows(&rows, sidedness)?;
    null.scheme = scheme;
    null.seed = seed;
    Ok(null)
}
