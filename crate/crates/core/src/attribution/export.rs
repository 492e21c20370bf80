//! Map export: CSV (channels as rows) and 8-bit binary PGM heat images with
//! the min-max scaling recorded in a JSON sidecar.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::scalar::Scalar;

use super::AttributionMap;

pub fn write_map_csv<S: Scalar>(path: &Path, map: &AttributionMap<S>) -> Result<()> {
    let mut out = String::new();
    for row in map.values.rows() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&format!("{:e}", v.as_f64()));
            first = false;
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Serialize)]
struct PgmSidecar<'a> {
    method: &'a str,
    fingerprint: &'a str,
    min: f64,
    max: f64,
    width: usize,
    height: usize,
}

/// Min-max scaled grayscale image; a constant map renders black and the
/// sidecar records the degenerate range.
pub fn write_map_pgm<S: Scalar>(
    path: &Path,
    sidecar_path: &Path,
    map: &AttributionMap<S>,
) -> Result<()> {
    let (h, w) = map.values.dim();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in map.values.iter() {
        let v = v.as_f64();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = hi - lo;
    let mut bytes = Vec::with_capacity(64 + w * h);
    bytes.extend_from_slice(format!("P5\n{w} {h}\n255\n").as_bytes());
    for v in map.values.iter() {
        let scaled = if span > 0.0 {
            (((v.as_f64() - lo) / span) * 255.0).round() as u8
        } else {
            0
        };
        bytes.push(scaled);
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;

    let sidecar = PgmSidecar {
        method: &map.method,
        fingerprint: &map.fingerprint,
        min: lo,
        max: hi,
        width: w,
        height: h,
    };
    fs::write(sidecar_path, serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn pgm_and_csv_emit_expected_bytes() {
        let dir = std::env::temp_dir().join("tsexplain-export-test");
        fs::create_dir_all(&dir).unwrap();
        let map = AttributionMap::new(
            array![[0.0, 0.5], [1.0, 0.25]],
            "test",
            "test".into(),
        );
        let pgm = dir.join("map.pgm");
        let sidecar = dir.join("map.json");
        write_map_pgm(&pgm, &sidecar, &map).unwrap();
        let bytes = fs::read(&pgm).unwrap();
        assert!(bytes.starts_with(b"P5\n2 2\n255\n"));
        assert_eq!(&bytes[bytes.len() - 4..], &[0u8, 128, 255, 64]);

        let csv = dir.join("map.csv");
        write_map_csv(&csv, &map).unwrap();
        let text = fs::read_to_string(&csv).unwrap();
        assert_eq!(text.lines().count(), 2);
        let first: f64 = text.lines().next().unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(first, 0.5);
    }
}
