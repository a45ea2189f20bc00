//! Binary state snapshots.
//!
//! Layout, all little endian: a 16-byte header (`KSLABSNP` magic, u32
//! format version, u32 reserved), the cell count as u64, then `u` and `v`
//! as f64 arrays.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"KSLABSNP";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

pub fn encode_snapshot(u: &[f64], v: &[f64]) -> Result<Vec<u8>> {
    if u.len() != v.len() {
        return Err(Error::Snapshot(format!("u has {} cells but v has {}", u.len(), v.len())));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + 8 + 16 * u.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&(u.len() as u64).to_le_bytes());
    for x in u.iter().chain(v) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<(Vec<f64>, Vec<f64>)> {
    if bytes.len() < HEADER_LEN + 8 {
        return Err(Error::Snapshot(format!("file is {} bytes, shorter than the header", bytes.len())));
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
    let expected = (n as u128) * 16 + (HEADER_LEN as u128) + 8;
    if bytes.len() as u128 != expected {
        return Err(Error::Snapshot(format!("{n} cells need {expected} bytes, file has {}", bytes.len())));
    }
    let n = n as usize;
    let mut values = bytes[24..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let u: Vec<f64> = values.by_ref().take(n).collect();
    let v: Vec<f64> = values.collect();
    Ok((u, v))
}

pub fn write_snapshot(path: &Path, u: &[f64], v: &[f64]) -> Result<()> {
    let bytes = encode_snapshot(u, v)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_snapshot(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let bytes = encode_snapshot(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(bytes.len(), 16 + 8 + 32);
        assert_eq!(&bytes[..8], b"KSLABSNP");
        assert_eq!(bytes[8..12], 1u32.to_le_bytes());
        assert_eq!(bytes[16..24], 2u64.to_le_bytes());
        assert_eq!(bytes[24..32], 1.0f64.to_le_bytes());
        assert_eq!(bytes[48..56], 4.0f64.to_le_bytes());
    }

    #[test]
    fn corrupt_input() {
        let good = encode_snapshot(&[1.0], &[2.0]).unwrap();
        assert!(decode_snapshot(&good[..20]).is_err());
        assert!(decode_snapshot(&good[..good.len() - 1]).is_err());
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(decode_snapshot(&bad).is_err());
        let mut bad = good;
        bad[8] = 9;
        assert!(decode_snapshot(&bad).is_err());
        assert!(encode_snapshot(&[1.0], &[]).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        write_snapshot(&path, &[0.5, f64::MIN_POSITIVE], &[1e300, 0.0]).unwrap();
        assert_eq!(read_snapshot(&path).unwrap(), (vec![0.5, f64::MIN_POSITIVE], vec![1e300, 0.0]));
        assert!(matches!(read_snapshot(&dir.path().join("missing")), Err(Error::Io { .. })));
    }

    proptest! {
        #[test]
        fn bit_exact_round_trip(pairs in proptest::collection::vec((any::<f64>(), any::<f64>()), 0..64)) {
            let (u, v): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let (u2, v2) = decode_snapshot(&encode_snapshot(&u, &v).unwrap()).unwrap();
            let bits = |x: &[f64]| x.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&u), bits(&u2));
            prop_assert_eq!(bits(&v), bits(&v2));
        }
    }
}
