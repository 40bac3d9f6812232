//! Binary field snapshots with a JSON sidecar.
//!
//! Layout, all little-endian: `n: u64, R: u64, t: i64, eps: f64, tau: f64,
//! m: f64`, then `ψ^t` and `ψ^{t+1}` as interleaved `(re, im)` f64 pairs in
//! row-major site order.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::grid::{BoxDomain, GridParams};

pub const HEADER_BYTES: usize = 48;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub n: usize,
    pub radius: usize,
    pub t: i64,
    pub eps: f64,
    pub tau: f64,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSidecar {
    #[serde(flatten)]
    pub header: SnapshotHeader,
    pub sites: usize,
    pub levels: usize,
    pub bytes: usize,
    pub sha256: String,
    pub sha256_psi_prev: String,
    pub sha256_psi_curr: String,
}

fn hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn push_level(buf: &mut Vec<u8>, level: &[Complex64]) {
    for z in level {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
}

/// Encodes `state` and its sidecar.
pub fn encode(state: &FieldState, grid: &GridParams) -> Result<(Vec<u8>, SnapshotSidecar)> {
    if grid.n != state.domain.n {
        return Err(Error::DimensionError(state.domain.n));
    }
    let header = SnapshotHeader {
        n: state.domain.n,
        radius: state.domain.radius,
        t: state.t,
        eps: grid.eps,
        tau: grid.tau,
        m: grid.m,
    };
    let sites = state.domain.len();
    let mut buf = Vec::with_capacity(HEADER_BYTES + 32 * sites);
    buf.extend_from_slice(&(header.n as u64).to_le_bytes());
    buf.extend_from_slice(&(header.radius as u64).to_le_bytes());
    buf.extend_from_slice(&header.t.to_le_bytes());
    for x in [header.eps, header.tau, header.m] {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    push_level(&mut buf, &state.psi_prev);
    push_level(&mut buf, &state.psi_curr);
    let level_bytes = 16 * sites;
    let sidecar = SnapshotSidecar {
        header,
        sites,
        levels: 2,
        bytes: buf.len(),
        sha256: hex(&buf),
        sha256_psi_prev: hex(&buf[HEADER_BYTES..HEADER_BYTES + level_bytes]),
        sha256_psi_curr: hex(&buf[HEADER_BYTES + level_bytes..]),
    };
    Ok((buf, sidecar))
}

fn word(bytes: &[u8], k: usize) -> [u8; 8] {
    bytes[8 * k..8 * k + 8].try_into().unwrap()
}

/// Decodes a snapshot; checks the sidecar when one is given.
pub fn decode(bytes: &[u8], sidecar: Option<&SnapshotSidecar>) -> Result<(FieldState, GridParams)> {
    let bad = |m: String| Error::Format(m);
    if bytes.len() < HEADER_BYTES {
        return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
    }
    let n = u64::from_le_bytes(word(bytes, 0)) as usize;
    let radius = u64::from_le_bytes(word(bytes, 1)) as usize;
    let t = i64::from_le_bytes(word(bytes, 2));
    let [eps, tau, m] = [3, 4, 5].map(|k| f64::from_le_bytes(word(bytes, k)));
    let domain = BoxDomain::new(radius, n)?;
    let want = HEADER_BYTES + 32 * domain.len();
    if bytes.len() != want {
        return Err(bad(format!("expected {want} bytes for n = {n}, R = {radius}, found {}", bytes.len())));
    }
    if let Some(s) = sidecar {
        let header = SnapshotHeader { n, radius, t, eps, tau, m };
        if s.header != header {
            return Err(bad("sidecar header differs from the binary header".into()));
        }
        if s.sha256 != hex(bytes) {
            return Err(bad("checksum mismatch".into()));
        }
    }
    let values: Vec<Complex64> = bytes[HEADER_BYTES..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    let (prev, curr) = values.split_at(domain.len());
    let state = FieldState::new(domain, prev.to_vec(), curr.to_vec(), t)?;
    Ok((state, GridParams::new(n, eps, tau, m)?))
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes `path` and `path.json`.
pub fn write(path: &Path, state: &FieldState, grid: &GridParams) -> Result<SnapshotSidecar> {
    let (buf, sidecar) = encode(state, grid)?;
    fs::write(path, &buf)?;
    let json = serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(sidecar_path(path), json)?;
    Ok(sidecar)
}

/// Reads `path`, verifying it against `path.json` when that file exists.
pub fn read(path: &Path) -> Result<(FieldState, GridParams)> {
    let bytes = fs::read(path)?;
    let side = sidecar_path(path);
    let sidecar = if side.exists() {
        let text = fs::read_to_string(&side)?;
        Some(serde_json::from_str::<SnapshotSidecar>(&text).map_err(|e| Error::Format(e.to_string()))?)
    } else {
        None
    };
    decode(&bytes, sidecar.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (FieldState, GridParams) {
        let d = BoxDomain::new(3, 2).unwrap();
        let g = GridParams::exact_ratio(2, 0.3, 1.5).unwrap();
        let s = FieldState::from_fn(d, -4, |x, t| Complex64::new(x[0] as f64 + 0.25 * t as f64, x[1] as f64 * 1e-300));
        (s, g)
    }

    #[test]
    fn roundtrip_is_bitwise() {
        let (s, g) = sample();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("snap.bin");
        let side = write(&p, &s, &g).unwrap();
        assert_eq!(side.bytes, HEADER_BYTES + 32 * 49);
        let (back, g2) = read(&p).unwrap();
        assert_eq!(back, s);
        assert_eq!(g2, g);
    }

    #[test]
    fn layout() {
        let (s, g) = sample();
        let (buf, _) = encode(&s, &g).unwrap();
        assert_eq!(u64::from_le_bytes(word(&buf, 0)), 2);
        assert_eq!(u64::from_le_bytes(word(&buf, 1)), 3);
        assert_eq!(i64::from_le_bytes(word(&buf, 2)), -4);
        assert_eq!(f64::from_le_bytes(word(&buf, 4)), 0.3);
        // first site is (−3, −3)
        assert_eq!(f64::from_le_bytes(word(&buf, 6)), -3.0 - 1.0);
        assert_eq!(f64::from_le_bytes(word(&buf, 7)), -3e-300);
    }

    #[test]
    fn corruption_detected() {
        let (s, g) = sample();
        let (mut buf, side) = encode(&s, &g).unwrap();
        buf[100] ^= 1;
        assert!(matches!(decode(&buf, Some(&side)), Err(Error::Format(_))));
        assert!(decode(&buf, None).is_ok());
        assert!(matches!(decode(&buf[..buf.len() - 1], None), Err(Error::Format(_))));
    }
}
