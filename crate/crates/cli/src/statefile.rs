//! Raw state files: an 8-byte magic, the qubit count as a little-endian
//! `u64`, then the `2^n x 2^n` density matrix row-major as little-endian
//! `(re, im)` pairs of `f64`.

use std::path::Path;

use anyhow::{bail, Context, Result};
use sqent_core::qstate::{CMatrix, DensityOp, Register, C64};

pub const MAGIC: &[u8; 8] = b"TSQSTATE";
const HEADER_LEN: usize = 16;
const MAX_FILE_QUBITS: usize = 12;

pub fn encode(rho: &DensityOp) -> Vec<u8> {
    let m = rho.matrix();
    let d = rho.dim();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * d * d);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(rho.n_qubits() as u64).to_le_bytes());
    for i in 0..d {
        for j in 0..d {
            out.extend_from_slice(&m[(i, j)].re.to_le_bytes());
            out.extend_from_slice(&m[(i, j)].im.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<DensityOp> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        bail!("not a state file (missing magic header)");
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().expect("8-byte slice")) as usize;
    if n == 0 || n > MAX_FILE_QUBITS {
        bail!("state file declares {n} qubits; supported range is 1..={MAX_FILE_QUBITS}");
    }
    let d = 1usize << n;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 16 * d * d {
        bail!("state file body has {} bytes, expected {} for {n} qubits", body.len(), 16 * d * d);
    }
    let f = |k: usize| f64::from_le_bytes(body[8 * k..8 * k + 8].try_into().expect("8-byte slice"));
    let m = CMatrix::from_fn(d, d, |i, j| {
        let k = 2 * (i * d + j);
        C64::new(f(k), f(k + 1))
    });
    Ok(DensityOp::new(m, Register::new(n)?)?)
}

pub fn read(path: &Path) -> Result<DensityOp> {
    let bytes = std::fs::read(path).with_context(|| format!("reading state file {}", path.display()))?;
    decode(&bytes).with_context(|| format!("decoding {}", path.display()))
}

pub fn write(path: &Path, rho: &DensityOp) -> Result<()> {
    std::fs::write(path, encode(rho)).with_context(|| format!("writing state file {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use sqent_core::measures::make_w;

    #[test]
    fn round_trip_is_exact() {
        let rho = make_w(3).unwrap().density();
        let bytes = encode(&rho);
        assert_eq!(bytes.len(), 16 + 16 * 64);
        assert_eq!(&bytes[..8], b"TSQSTATE");
        assert_eq!(bytes[8], 3);
        let back = decode(&bytes).unwrap();
        assert_eq!(back.matrix(), rho.matrix());
    }

    #[test]
    fn rejects_malformed_files() {
        let rho = make_w(3).unwrap().density();
        let bytes = encode(&rho);
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(decode(&wrong).is_err());
        let mut not_state = bytes;
        // Setting the empty |000><000| entry to one makes the trace 2.
        not_state[16..24].copy_from_slice(&1.0f64.to_le_bytes());
        assert!(decode(&not_state).is_err());
    }
}
