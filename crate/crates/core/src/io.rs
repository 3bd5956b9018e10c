//! File formats: the binary grid format, CSV text, PGM heatmaps.
//!
//! Binary grid layout, all little-endian:
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 8     | magic `NKGRID` and a `u16` version        |
//! | 4     | `u32` dimension (1 or 2)                  |
//! | 4     | `u32` component count                     |
//! | 16    | `u64` points along x, `u64` along y       |
//! | 8     | `f64` spacing                             |
//! | 8     | `f64` time                                |
//! | 8     | `u64` value count                         |
//! | 8·n   | `f64` values, component-major, x fastest  |

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::netspec::Dimension;
use crate::simulate::Field;

const MAGIC: &[u8; 6] = b"NKGRID";
const VERSION: u16 = 1;
const HEADER_LEN: usize = 56;

pub fn encode_grid(field: &Field) -> Vec<u8> {
    let ny = if field.dimension == Dimension::One { 1 } else { field.n };
    let count = field.components.iter().map(Vec::len).sum::<usize>();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * count);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(field.dimension.as_usize() as u32).to_le_bytes());
    out.extend_from_slice(&(field.components.len() as u32).to_le_bytes());
    out.extend_from_slice(&(field.n as u64).to_le_bytes());
    out.extend_from_slice(&(ny as u64).to_le_bytes());
    out.extend_from_slice(&field.spacing.to_le_bytes());
    out.extend_from_slice(&field.time.to_le_bytes());
    out.extend_from_slice(&(count as u64).to_le_bytes());
    for v in field.components.iter().flatten() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_grid(bytes: &[u8]) -> Result<Field> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("grid file too short ({} bytes)", bytes.len())));
    }
    if &bytes[..6] != MAGIC {
        return Err(Error::Format("bad magic, not a grid file".into()));
    }
    let u16_at = |o: usize| u16::from_le_bytes(bytes[o..o + 2].try_into().unwrap());
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u16_at(6);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported grid version {version}")));
    }
    let dimension = match u32_at(8) {
        1 => Dimension::One,
        2 => Dimension::Two,
        d => return Err(Error::Format(format!("dimension must be 1 or 2, got {d}"))),
    };
    let components = u32_at(12) as usize;
    let (nx, ny) = (u64_at(16) as usize, u64_at(24) as usize);
    let spacing = f64_at(32);
    let time = f64_at(40);
    let count = u64_at(48) as usize;
    let expected_ny = if dimension == Dimension::One { 1 } else { nx };
    if ny != expected_ny {
        return Err(Error::Format(format!(
            "shape {nx}×{ny} does not match a {dimension} grid"
        )));
    }
    let points = nx * ny;
    if count != components * points {
        return Err(Error::Format(format!("value count {count} ≠ {components} × {points}")));
    }
    if bytes.len() != HEADER_LEN + 8 * count {
        return Err(Error::Format(format!(
            "payload holds {} bytes, header promises {}",
            bytes.len() - HEADER_LEN,
            8 * count
        )));
    }
    let mut field = Field::zeros(dimension, nx, spacing, components).map_err(|e| Error::Format(e.to_string()))?;
    field.time = time;
    for (k, v) in field.components.iter_mut().flatten().enumerate() {
        *v = f64_at(HEADER_LEN + 8 * k);
    }
    Ok(field)
}

pub fn write_grid(path: &Path, field: &Field) -> Result<()> {
    write_atomic(path, &encode_grid(field))
}

pub fn read_grid(path: &Path) -> Result<Field> {
    decode_grid(&fs::read(path)?)
}

/// 8-bit binary PGM of one component, `[min, max]` mapped onto `[0, 255]`.
/// One-dimensional fields become a single row.
pub fn encode_pgm(field: &Field, component: usize) -> Vec<u8> {
    let u = &field.components[component];
    let (w, h) = match field.dimension {
        Dimension::One => (field.n, 1),
        Dimension::Two => (field.n, field.n),
    };
    let (lo, hi) = u
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let span = hi - lo;
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(u.iter().map(|v| {
        if span > 0.0 {
            ((v - lo) / span * 255.0).round() as u8
        } else {
            0
        }
    }));
    out
}

/// CSV `x,value` along the row through the middle of the field.
pub fn line_profile_csv(field: &Field, component: usize) -> String {
    let row = if field.dimension == Dimension::One {
        0
    } else {
        field.n / 2
    };
    let u = &field.components[component];
    let mut out = String::from("x,value\n");
    for ix in 0..field.n {
        out.push_str(&format!(
            "{:.17e},{:.17e}\n",
            ix as f64 * field.spacing,
            u[row * field.n + ix]
        ));
    }
    out
}

/// Writes through a temporary file in the same directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Domain(format!("not a file path: {}", path.display())))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::Io(e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{initial_field, Initial};

    #[test]
    fn grid_round_trip() {
        for dim in [Dimension::One, Dimension::Two] {
            let mut f = initial_field(dim, 16, 0.37, 2, &Initial::Noise { amplitude: 3.0 }, 1).unwrap();
            f.time = 12.5;
            let bytes = encode_grid(&f);
            assert_eq!(bytes.len(), HEADER_LEN + 8 * 2 * f.len());
            assert_eq!(decode_grid(&bytes).unwrap(), f);
        }
    }

    #[test]
    fn header_layout() {
        let f = Field::zeros(Dimension::Two, 4, 0.5, 1).unwrap();
        let b = encode_grid(&f);
        assert_eq!(&b[..8], b"NKGRID\x01\x00");
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(b[48..56].try_into().unwrap()), 16);
    }

    #[test]
    fn corrupt_files_rejected() {
        let f = Field::zeros(Dimension::One, 8, 0.5, 1).unwrap();
        let good = encode_grid(&f);
        assert!(decode_grid(&good[..10]).is_err());
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(decode_grid(&bad).is_err());
        let mut bad = good.clone();
        bad.pop();
        assert!(matches!(decode_grid(&bad), Err(Error::Format(_))));
        let mut bad = good;
        bad[8] = 3;
        assert!(decode_grid(&bad).is_err());
    }

    #[test]
    fn files_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u.grid");
        let f = initial_field(Dimension::One, 32, 0.2, 1, &Initial::Noise { amplitude: 1.0 }, 2).unwrap();
        write_grid(&p, &f).unwrap();
        assert_eq!(read_grid(&p).unwrap(), f);
        let names: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn pgm_scaling() {
        let f = Field::from_fn(Dimension::Two, 2, 1.0, |x, y| x + 2.0 * y).unwrap();
        let pgm = encode_pgm(&f, 0);
        assert!(pgm.starts_with(b"P5\n2 2\n255\n"));
        assert_eq!(&pgm[pgm.len() - 4..], &[0, 85, 170, 255]);
        let csv = line_profile_csv(&f, 0);
        assert_eq!(csv.lines().count(), 3);
    }
}
