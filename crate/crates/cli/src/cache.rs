//! Disk cache for mode bases: diagonalization dominates the cost of a sweep
//! and the same basis is reused across all times, echoes and distances.
//!
//! Payload layout (little endian): magic "XYMB", version byte, n: u64,
//! energies (n f64), phi (n*n f64 row-major), psi (n*n f64 row-major),
//! momenta count + values (u64 each, reserved; written empty), then the
//! sha-256 of everything before it.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use sha2::{Digest, Sha256};
use xychain::{ChainSpec, ModeBasis};

const MAGIC: &[u8; 4] = b"XYMB";
const VERSION: u8 = 1;

/// Deterministic identifier for a chain spec. Floats are canonicalized by
/// Rust's shortest round-trip decimal formatting, so distinct doubles give
/// distinct keys.
pub fn cache_key(spec: &ChainSpec) -> String {
    format!(
        "N{}_gam{}_lam{}_g{}_d{}_lab{}",
        spec.n_sites, spec.gamma, spec.lambda, spec.coupling, spec.site_b, spec.label
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheEvent {
    Hit,
    Miss,
    Corrupt,
}

fn encode(basis: &ModeBasis) -> Vec<u8> {
    let n = basis.n_sites();
    let mut buf = Vec::with_capacity(16 + 8 * (n + 2 * n * n) + 40);
    buf.extend_from_slice(MAGIC);
    buf.push(VERSION);
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    for &e in basis.energies.iter() {
        buf.extend_from_slice(&e.to_le_bytes());
    }
    for i in 0..n {
        for j in 0..n {
            buf.extend_from_slice(&basis.phi[(i, j)].to_le_bytes());
        }
    }
    for i in 0..n {
        for j in 0..n {
            buf.extend_from_slice(&basis.psi[(i, j)].to_le_bytes());
        }
    }
    buf.extend_from_slice(&0u64.to_le_bytes()); // momenta (reserved)
    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);
    buf
}

fn decode(bytes: &[u8]) -> Option<ModeBasis> {
    if bytes.len() < 4 + 1 + 8 + 8 + 32 || &bytes[..4] != MAGIC || bytes[4] != VERSION {
        return None;
    }
    let (body, checksum) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != checksum {
        return None;
    }
    let mut pos = 5;
    let read_u64 = |p: &mut usize| -> Option<u64> {
        let v = u64::from_le_bytes(body.get(*p..*p + 8)?.try_into().ok()?);
        *p += 8;
        Some(v)
    };
    let n = read_u64(&mut pos)? as usize;
    let need = 5 + 8 + 8 * (n + 2 * n * n) + 8;
    if body.len() != need {
        return None;
    }
    let read_f64 = |p: &mut usize| -> f64 {
        let v = f64::from_le_bytes(body[*p..*p + 8].try_into().unwrap());
        *p += 8;
        v
    };
    let energies = DVector::from_fn(n, |_, _| read_f64(&mut pos));
    let mut phi = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            phi[(i, j)] = read_f64(&mut pos);
        }
    }
    let mut psi = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            psi[(i, j)] = read_f64(&mut pos);
        }
    }
    Some(ModeBasis { energies, phi, psi })
}

fn basis_path(dir: &Path, spec: &ChainSpec) -> PathBuf {
    dir.join(format!("{}.basis", cache_key(spec)))
}

/// Store atomically: write a temp file, then rename into place.
pub fn store_basis(dir: &Path, spec: &ChainSpec, basis: &ModeBasis) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let target = basis_path(dir, spec);
    let tmp = target.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, encode(basis))?;
    fs::rename(&tmp, &target)
}

/// Load a cached basis: `(outcome, basis-if-hit)`. A corrupt file is removed
/// so the caller can recompute and overwrite.
pub fn load_basis(dir: &Path, spec: &ChainSpec) -> (CacheEvent, Option<ModeBasis>) {
    let path = basis_path(dir, spec);
    match fs::read(&path) {
        Err(_) => (CacheEvent::Miss, None),
        Ok(bytes) => match decode(&bytes) {
            Some(b) if b.n_sites() == spec.n_sites => (CacheEvent::Hit, Some(b)),
            _ => {
                let _ = fs::remove_file(&path);
                (CacheEvent::Corrupt, None)
            }
        },
    }
}

/// Fetch from cache or diagonalize; returns the basis and what happened.
pub fn get_or_compute(
    dir: Option<&Path>,
    spec: &ChainSpec,
) -> xychain::Result<(ModeBasis, CacheEvent)> {
    if let Some(dir) = dir {
        let (event, cached) = load_basis(dir, spec);
        if let Some(b) = cached {
            return Ok((b, event));
        }
        if event == CacheEvent::Corrupt {
            eprintln!(
                "warning: corrupt cache entry for {}; recomputing",
                cache_key(spec)
            );
        }
        let basis = xychain::diagonalize_spec(spec)?;
        if let Err(e) = store_basis(dir, spec, &basis) {
            eprintln!("warning: could not write cache entry: {e}");
        }
        return Ok((basis, event));
    }
    Ok((xychain::diagonalize_spec(spec)?, CacheEvent::Miss))
}
