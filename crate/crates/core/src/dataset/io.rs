//! Fleet and sample-set persistence.
//!
//! A fleet is one CSV per unit (`unit_<id>.csv` with columns
//! `cycle,channel_0..channel_{F-1}`) plus a `fleet.json` manifest holding
//! unit ids, total useful lives, the seed, and the generator config.
//!
//! Sample sets cache to a little-endian binary layout:
//! magic `TSXSAMP1`, `u32` channels, `u32` window length, `u64` count, then
//! per sample: `f64` label, `u32` unit id, `u32` window end, and the
//! channels-by-time values as row-major `f64`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{FleetConfig, Sample, UnitHistory};

const SAMPLE_MAGIC: &[u8; 8] = b"TSXSAMP1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FleetManifest {
    pub unit_ids: Vec<usize>,
    pub tul: Vec<f64>,
    pub seed: u64,
    pub config: FleetConfig,
}

pub fn write_fleet<S: Scalar>(
    dir: &Path,
    fleet: &[UnitHistory<S>],
    seed: u64,
    config: &FleetConfig,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    for unit in fleet {
        let mut out = String::new();
        out.push_str("cycle");
        for f in 0..unit.n_channels() {
            out.push_str(&format!(",channel_{f}"));
        }
        out.push('\n');
        for t in 0..unit.steps() {
            out.push_str(&format!("{}", unit.cycles[t]));
            for f in 0..unit.n_channels() {
                out.push_str(&format!(",{}", unit.channels[[f, t]]));
            }
            out.push('\n');
        }
        fs::write(dir.join(format!("unit_{}.csv", unit.unit_id)), out)?;
    }
    let manifest = FleetManifest {
        unit_ids: fleet.iter().map(|u| u.unit_id).collect(),
        tul: fleet.iter().map(|u| u.tul).collect(),
        seed,
        config: config.clone(),
    };
    fs::write(
        dir.join("fleet.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

pub fn read_fleet<S: Scalar>(dir: &Path) -> Result<(Vec<UnitHistory<S>>, FleetManifest)> {
    let manifest: FleetManifest =
        serde_json::from_str(&fs::read_to_string(dir.join("fleet.json"))?)?;
    let mut fleet = Vec::with_capacity(manifest.unit_ids.len());
    for (&unit_id, &tul) in manifest.unit_ids.iter().zip(&manifest.tul) {
        let text = fs::read_to_string(dir.join(format!("unit_{unit_id}.csv")))?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("unit_{unit_id}.csv is empty")))?;
        let n_channels = header.split(',').count() - 1;
        let mut cycles = Vec::new();
        let mut values: Vec<Vec<S>> = vec![Vec::new(); n_channels];
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let cycle: f64 = fields
                .next()
                .ok_or_else(|| Error::Parse(format!("unit {unit_id} line {lineno}: no cycle")))?
                .parse()
                .map_err(|e| Error::Parse(format!("unit {unit_id} line {lineno}: {e}")))?;
            cycles.push(cycle);
            for ch in values.iter_mut() {
                let field = fields.next().ok_or_else(|| {
                    Error::Parse(format!("unit {unit_id} line {lineno}: missing channel"))
                })?;
                let v: f64 = field
                    .parse()
                    .map_err(|e| Error::Parse(format!("unit {unit_id} line {lineno}: {e}")))?;
                ch.push(S::from_f64_lossy(v));
            }
        }
        let steps = cycles.len();
        let mut channels = Array2::<S>::zeros((n_channels, steps));
        for (f, ch) in values.into_iter().enumerate() {
            for (t, v) in ch.into_iter().enumerate() {
                channels[[f, t]] = v;
            }
        }
        fleet.push(UnitHistory {
            unit_id,
            channels,
            cycles,
            tul,
        });
    }
    Ok((fleet, manifest))
}

pub fn write_samples_bin<S: Scalar>(path: &Path, samples: &[Sample<S>]) -> Result<()> {
    let (f, t) = samples
        .first()
        .map(|s| s.x.dim())
        .ok_or_else(|| Error::InvalidInput("no samples to write".into()))?;
    let mut out = Vec::with_capacity(24 + samples.len() * (16 + f * t * 8));
    out.extend_from_slice(SAMPLE_MAGIC);
    out.extend_from_slice(&(f as u32).to_le_bytes());
    out.extend_from_slice(&(t as u32).to_le_bytes());
    out.extend_from_slice(&(samples.len() as u64).to_le_bytes());
    for s in samples {
        if s.x.dim() != (f, t) {
            return Err(Error::InvalidInput("samples disagree on shape".into()));
        }
        out.extend_from_slice(&s.y.as_f64().to_le_bytes());
        out.extend_from_slice(&(s.unit_id as u32).to_le_bytes());
        out.extend_from_slice(&(s.t_end as u32).to_le_bytes());
        for v in s.x.iter() {
            out.extend_from_slice(&v.as_f64().to_le_bytes());
        }
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

pub fn read_samples_bin<S: Scalar>(path: &Path) -> Result<Vec<Sample<S>>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut cursor = 0usize;
    let take = |cursor: &mut usize, n: usize| -> Result<&[u8]> {
        if *cursor + n > bytes.len() {
            return Err(Error::Parse("sample cache truncated".into()));
        }
        let slice = &bytes[*cursor..*cursor + n];
        *cursor += n;
        Ok(slice)
    };
    if take(&mut cursor, 8)? != SAMPLE_MAGIC {
        return Err(Error::Parse("bad sample cache magic".into()));
    }
    let f = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
    let t = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap()) as usize;
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let y = f64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap());
        let unit_id = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
        let t_end = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
        let mut x = Array2::<S>::zeros((f, t));
        for v in x.iter_mut() {
            *v = S::from_f64_lossy(f64::from_le_bytes(
                take(&mut cursor, 8)?.try_into().unwrap(),
            ));
        }
        samples.push(Sample {
            x,
            y: S::from_f64_lossy(y),
            unit_id,
            t_end,
        });
    }
    Ok(samples)
}
