//! `CTF1` — a minimal binary interchange format for channel tensors.
//!
//! Layout (all integers and floats little-endian):
//!
//! | offset | size | content                                  |
//! |--------|------|------------------------------------------|
//! | 0      | 4    | magic bytes `CTF1`                       |
//! | 4      | 4    | format version, u32, currently 1         |
//! | 8      | 4    | users K, u32, >= 1                       |
//! | 12     | 4    | antennas M, u32, >= 1                    |
//! | 16     | 4    | subcarriers L, u32, >= 1                 |
//! | 20     | 16·n | n = K·M·L entries, each (re, im) as f64  |
//!
//! Entries are ordered subcarrier-major, then user, then antenna — the
//! in-memory order of [`ChannelTensor`].  A valid file is exactly
//! `20 + 16·K·M·L` bytes; loaders reject truncation, trailing bytes and
//! non-finite values, reporting the first offending byte offset.

use super::ChannelTensor;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 4] = b"CTF1";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 20;
const ENTRY_LEN: usize = 16;

/// Serialize a tensor to the `CTF1` byte layout.
pub fn encode(tensor: &ChannelTensor) -> Result<Vec<u8>> {
    let (k, m, l) = (tensor.users(), tensor.antennas(), tensor.subcarriers());
    for (dim, name) in [(k, "K"), (m, "M"), (l, "L")] {
        if dim > u32::MAX as usize {
            return Err(Error::Dimension(format!(
                "dimension {name} = {dim} does not fit the 32-bit header field"
            )));
        }
    }
    let mut out = Vec::with_capacity(HEADER_LEN + ENTRY_LEN * tensor.flat().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(k as u32).to_le_bytes());
    out.extend_from_slice(&(m as u32).to_le_bytes());
    out.extend_from_slice(&(l as u32).to_le_bytes());
    for z in tensor.flat() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    Ok(out)
}

/// Parse the `CTF1` byte layout into a tensor.
pub fn decode(bytes: &[u8]) -> Result<ChannelTensor> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format {
            offset: bytes.len() as u64,
            reason: format!(
                "truncated header: need {HEADER_LEN} bytes, found {}",
                bytes.len()
            ),
        });
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format {
            offset: 0,
            reason: format!(
                "bad magic {:?}: expected the ASCII bytes \"CTF1\"",
                &bytes[0..4]
            ),
        });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format {
            offset: 4,
            reason: format!("unsupported version {version}: expected {VERSION}"),
        });
    }
    let users = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let antennas = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let subcarriers = u32::from_le_bytes(bytes[16..20].try_into().unwrap()) as usize;
    for (dim, name, offset) in [
        (users, "K", 8u64),
        (antennas, "M", 12),
        (subcarriers, "L", 16),
    ] {
        if dim == 0 {
            return Err(Error::Format {
                offset,
                reason: format!("dimension {name} must be at least 1"),
            });
        }
    }
    let entries = users as u64 * antennas as u64 * subcarriers as u64;
    let expected = HEADER_LEN as u64 + ENTRY_LEN as u64 * entries;
    let found = bytes.len() as u64;
    if found < expected {
        return Err(Error::Format {
            offset: found,
            reason: format!(
                "truncated payload: K·M·L = {entries} entries need \
                 {expected} bytes, found {found}"
            ),
        });
    }
    if found > expected {
        return Err(Error::Format {
            offset: expected,
            reason: format!("{} unexpected trailing bytes", found - expected),
        });
    }
    let mut data = Vec::with_capacity(entries as usize);
    for (i, chunk) in bytes[HEADER_LEN..].chunks_exact(ENTRY_LEN).enumerate() {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        if !(re.is_finite() && im.is_finite()) {
            return Err(Error::Format {
                offset: (HEADER_LEN + ENTRY_LEN * i) as u64,
                reason: format!("entry {i} is not finite ({re}, {im})"),
            });
        }
        data.push(Complex64::new(re, im));
    }
    ChannelTensor::from_flat(users, antennas, subcarriers, data)
}

/// Write a tensor to a `CTF1` file.
pub fn save(tensor: &ChannelTensor, path: &Path) -> Result<()> {
    let bytes = encode(tensor)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Read a tensor from a `CTF1` file.
pub fn load(path: &Path) -> Result<ChannelTensor> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::rayleigh::gen_iid_rayleigh;

    fn sample() -> ChannelTensor {
        gen_iid_rayleigh(2, 3, 4, 99).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let t = sample();
        let back = decode(&encode(&t).unwrap()).unwrap();
        assert_eq!(t.users(), back.users());
        assert_eq!(t.antennas(), back.antennas());
        assert_eq!(t.subcarriers(), back.subcarriers());
        // Bit-for-bit, not approximately.
        for (a, b) in t.flat().iter().zip(back.flat()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn file_length_is_exactly_header_plus_entries() {
        let t = sample();
        let bytes = encode(&t).unwrap();
        assert_eq!(bytes.len(), 20 + 16 * 2 * 3 * 4);
    }

    #[test]
    fn bad_magic_is_reported_at_offset_zero() {
        let mut bytes = encode(&sample()).unwrap();
        bytes[0] = b'X';
        match decode(&bytes).unwrap_err() {
            Error::Format { offset, .. } => assert_eq!(offset, 0),
            other => panic!("expected a format error, got {other}"),
        }
    }

    #[test]
    fn wrong_version_is_reported_at_offset_four() {
        let mut bytes = encode(&sample()).unwrap();
        bytes[4] = 2;
        match decode(&bytes).unwrap_err() {
            Error::Format { offset, reason } => {
                assert_eq!(offset, 4);
                assert!(reason.contains("version"));
            }
            other => panic!("expected a format error, got {other}"),
        }
    }

    #[test]
    fn zero_user_count_is_reported_at_offset_eight() {
        let mut bytes = encode(&sample()).unwrap();
        bytes[8..12].copy_from_slice(&0u32.to_le_bytes());
        match decode(&bytes).unwrap_err() {
            Error::Format { offset, reason } => {
                assert_eq!(offset, 8);
                assert!(reason.contains('K'), "reason should name the dimension: {reason}");
            }
            other => panic!("expected a format error, got {other}"),
        }
    }

    #[test]
    fn truncation_is_reported_at_the_end_of_the_data() {
        let bytes = encode(&sample()).unwrap();
        let cut = bytes.len() - 5;
        match decode(&bytes[..cut]).unwrap_err() {
            Error::Format { offset, reason } => {
                assert_eq!(offset, cut as u64);
                assert!(reason.contains("truncated"));
            }
            other => panic!("expected a format error, got {other}"),
        }
    }

    #[test]
    fn trailing_bytes_are_rejected() {
        let mut bytes = encode(&sample()).unwrap();
        let expected = bytes.len() as u64;
        bytes.extend_from_slice(&[0u8; 3]);
        match decode(&bytes).unwrap_err() {
            Error::Format { offset, reason } => {
                assert_eq!(offset, expected);
                assert!(reason.contains("trailing"));
            }
            other => panic!("expected a format error, got {other}"),
        }
    }

    #[test]
    fn non_finite_entry_is_located_by_byte_offset() {
        let mut bytes = encode(&sample()).unwrap();
        // Overwrite the real half of entry 5 with NaN.
        let at = 20 + 16 * 5;
        bytes[at..at + 8].copy_from_slice(&f64::NAN.to_le_bytes());
        match decode(&bytes).unwrap_err() {
            Error::Format { offset, .. } => assert_eq!(offset, at as u64),
            other => panic!("expected a format error, got {other}"),
        }
    }

    #[test]
    fn save_and_load_through_the_filesystem() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chan.ctf1");
        let t = sample();
        save(&t, &path).unwrap();
        let back = load(&path).unwrap();
        assert_eq!(t.flat(), back.flat());
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = load(Path::new("/nonexistent/nope.ctf1")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
