//! Little-endian binary formats: the profile cache and field checkpoints.
//!
//! Profile cache (`GKDVPROF`, version 1):
//!
//! ```text
//! magic [u8; 8] | version u32 | x_min f64 | h f64 | n u64
//! | q, q', Lambda Q, P, R: f64 x n each | l2sq_q f64 | l1_q f64
//! ```
//!
//! A right end within `1e-12 |x_min|` of `-x_min` decodes as a symmetric grid.
//!
//! Field checkpoint (`GKDVFLD1`): `magic | t f64 | length f64 | n u64 | f64 x n`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use gkdv_core::grid::Grid1D;
use gkdv_core::pde::Field;
use gkdv_core::profiles::{build_profiles, Norms, ProfileTable};

use crate::error::{CliError, Result};

pub const PROFILE_MAGIC: &[u8; 8] = b"GKDVPROF";
pub const PROFILE_VERSION: u32 = 1;
pub const FIELD_MAGIC: &[u8; 8] = b"GKDVFLD1";

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
    path: &'a Path,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| CliError::Corrupt {
            path: self.path.to_path_buf(),
            reason: format!("truncated at byte {}", self.at),
        })?;
        let out = &self.bytes[self.at..end];
        self.at = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).unwrap_or(usize::MAX))?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn finish(&self) -> Result<()> {
        if self.at != self.bytes.len() {
            return Err(CliError::Corrupt {
                path: self.path.to_path_buf(),
                reason: format!("{} trailing bytes", self.bytes.len() - self.at),
            });
        }
        Ok(())
    }
}

fn check_magic(r: &mut Reader, magic: &'static [u8; 8]) -> Result<()> {
    if r.bytes.len() < 8 || &r.bytes[..8] != magic {
        return Err(CliError::BadMagic {
            path: r.path.to_path_buf(),
            expected: std::str::from_utf8(magic).unwrap(),
        });
    }
    r.at = 8;
    Ok(())
}

fn put_f64s(buf: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(CliError::io(&tmp))?;
    f.write_all(bytes).map_err(CliError::io(&tmp))?;
    f.sync_all().map_err(CliError::io(&tmp))?;
    fs::rename(&tmp, path).map_err(CliError::io(path))
}

pub fn encode_profiles(table: &ProfileTable) -> Vec<u8> {
    let n = table.grid.len();
    let mut buf = Vec::with_capacity(52 + 40 * n);
    buf.extend_from_slice(PROFILE_MAGIC);
    buf.extend_from_slice(&PROFILE_VERSION.to_le_bytes());
    buf.extend_from_slice(&table.grid.x_min().to_le_bytes());
    buf.extend_from_slice(&table.grid.h().to_le_bytes());
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    for arr in [&table.q, &table.q_prime, &table.lambda_q, &table.p, &table.r] {
        put_f64s(&mut buf, arr);
    }
    buf.extend_from_slice(&table.norms.l2sq_q.to_le_bytes());
    buf.extend_from_slice(&table.norms.l1_q.to_le_bytes());
    buf
}

pub fn decode_profiles(bytes: &[u8], path: &Path) -> Result<ProfileTable> {
    let mut r = Reader { bytes, at: 0, path };
    check_magic(&mut r, PROFILE_MAGIC)?;
    let version = r.u32()?;
    if version != PROFILE_VERSION {
        return Err(CliError::Corrupt { path: path.to_path_buf(), reason: format!("unsupported version {version}") });
    }
    let (x_min, h) = (r.f64()?, r.f64()?);
    let n = r.u64()? as usize;
    let x_end = x_min + h * n.saturating_sub(1) as f64;
    let x_max = if (x_end + x_min).abs() <= 1e-12 * x_min.abs() { -x_min } else { x_end };
    let grid = Grid1D::new(x_min, x_max, n).map_err(CliError::Setup)?;
    let mut arrays = (0..5).map(|_| r.f64s(n)).collect::<Result<Vec<_>>>()?.into_iter();
    let norms = Norms { l2sq_q: r.f64()?, l1_q: r.f64()? };
    r.finish()?;
    let mut next = || arrays.next().unwrap();
    ProfileTable::from_parts(grid, next(), next(), next(), next(), next(), norms).map_err(CliError::Setup)
}

/// Cache file for a symmetric grid `[-x_max, x_max]` with `n` nodes.
pub fn profile_cache_path(dir: &Path, x_max: f64, n: usize) -> PathBuf {
    dir.join(format!("profiles_x{x_max}_n{n}.bin"))
}

/// Where a profile table came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Built,
}

/// Load the cached table for `(x_max, n)` or build and store it.
pub fn load_or_build_profiles(dir: &Path, x_max: f64, n: usize) -> Result<(ProfileTable, CacheStatus)> {
    let path = profile_cache_path(dir, x_max, n);
    match fs::read(&path) {
        Ok(bytes) => {
            let table = decode_profiles(&bytes, &path)?;
            if table.grid.x_max() != x_max || table.grid.len() != n || !table.grid.is_symmetric() {
                return Err(CliError::Corrupt { path, reason: "grid does not match the file name".into() });
            }
            Ok((table, CacheStatus::Hit))
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            let grid = Grid1D::symmetric(x_max, n).map_err(CliError::Setup)?;
            let table = build_profiles(grid).map_err(CliError::Setup)?;
            write_atomic(&path, &encode_profiles(&table))?;
            Ok((table, CacheStatus::Built))
        }
        Err(e) => Err(CliError::Io { path, source: e }),
    }
}

pub fn encode_field(field: &Field) -> Vec<u8> {
    let mut buf = Vec::with_capacity(32 + 8 * field.len());
    buf.extend_from_slice(FIELD_MAGIC);
    buf.extend_from_slice(&field.t.to_le_bytes());
    buf.extend_from_slice(&field.length().to_le_bytes());
    buf.extend_from_slice(&(field.len() as u64).to_le_bytes());
    put_f64s(&mut buf, field.values());
    buf
}

pub fn decode_field(bytes: &[u8], path: &Path) -> Result<Field> {
    let mut r = Reader { bytes, at: 0, path };
    check_magic(&mut r, FIELD_MAGIC)?;
    let t = r.f64()?;
    let length = r.f64()?;
    let n = r.u64()? as usize;
    let values = r.f64s(n)?;
    r.finish()?;
    Field::new(t, length, values).map_err(CliError::Setup)
}

pub fn write_field(path: &Path, field: &Field) -> Result<()> {
    write_atomic(path, &encode_field(field))
}

pub fn read_field(path: &Path) -> Result<Field> {
    let bytes = fs::read(path).map_err(CliError::io(path))?;
    decode_field(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip_is_bit_exact() {
        let f = Field::from_fn(0.25, 12.0, 64, |x| (x * 0.7).sin() / 3.0).unwrap();
        let bytes = encode_field(&f);
        assert_eq!(&bytes[..8], b"GKDVFLD1");
        assert_eq!(bytes.len(), 32 + 8 * 64);
        let g = decode_field(&bytes, Path::new("mem")).unwrap();
        assert_eq!(g.t.to_bits(), f.t.to_bits());
        assert_eq!(g.values(), f.values());
    }

    #[test]
    fn field_errors() {
        let f = Field::from_fn(0.0, 8.0, 32, |x| x.cos()).unwrap();
        let mut bytes = encode_field(&f);
        bytes[0] = b'X';
        assert!(matches!(decode_field(&bytes, Path::new("m")), Err(CliError::BadMagic { .. })));
        let bytes = encode_field(&f);
        assert!(matches!(decode_field(&bytes[..bytes.len() - 3], Path::new("m")), Err(CliError::Corrupt { .. })));
    }

    #[test]
    fn profile_round_trip_is_bit_exact() {
        let table = build_profiles(Grid1D::symmetric(16.0, 1601).unwrap()).unwrap();
        let bytes = encode_profiles(&table);
        assert_eq!(bytes.len(), 52 + 40 * 1601);
        let back = decode_profiles(&bytes, Path::new("mem")).unwrap();
        assert_eq!(back, table);
        assert!(matches!(decode_profiles(&bytes[4..], Path::new("m")), Err(CliError::BadMagic { .. })));
        let mut v2 = bytes.clone();
        v2[8] = 2;
        assert!(matches!(decode_profiles(&v2, Path::new("m")), Err(CliError::Corrupt { .. })));
    }
}
