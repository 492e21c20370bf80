//! Seeded degradation-to-failure generator.
//!
//! Each channel is a per-unit baseline plus a monotone degradation trend
//! scaled by the consumed-life fraction, plus Gaussian noise. Only the first
//! `informative_channels` carry a trend, which plants a known importance
//! structure for the explanation trend checks.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::rng::{draw_normal, draw_uniform, substream};
use crate::scalar::Scalar;

use super::UnitHistory;

const PURPOSE_FLEET: u64 = 0x666c_6565_74;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize, PartialEq)]
pub struct FleetConfig {
    pub n_units: usize,
    pub channels: usize,
    /// Inclusive range of unit life lengths in steps.
    pub life_range: (usize, usize),
    /// Inclusive range the per-channel drift amplitude is drawn from.
    pub drift_range: (f64, f64),
    pub noise_amp: f64,
    /// Leading channels that receive a drift; the rest are pure noise.
    pub informative_channels: usize,
    /// Inclusive range the per-channel baseline level is drawn from.
    pub baseline_range: (f64, f64),
}

impl Default for FleetConfig {
    fn default() -> Self {
        FleetConfig {
            n_units: 12,
            channels: 8,
            life_range: (120, 240),
            drift_range: (0.8, 1.6),
            noise_amp: 0.08,
            informative_channels: 4,
            baseline_range: (-1.0, 1.0),
        }
    }
}

impl FleetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_units == 0 {
            return Err(Error::InvalidInput("n_units must be >= 1".into()));
        }
        if self.channels == 0 {
            return Err(Error::InvalidInput("channels must be >= 1".into()));
        }
        if self.life_range.0 < 2 || self.life_range.0 > self.life_range.1 {
            return Err(Error::InvalidInput(format!(
                "life_range {:?} is not a valid range",
                self.life_range
            )));
        }
        if self.drift_range.0 > self.drift_range.1 {
            return Err(Error::InvalidInput("drift_range is reversed".into()));
        }
        if self.noise_amp < 0.0 {
            return Err(Error::InvalidInput("noise_amp must be >= 0".into()));
        }
        if self.informative_channels > self.channels {
            return Err(Error::InvalidInput(
                "informative_channels exceeds channel count".into(),
            ));
        }
        Ok(())
    }
}

/// Generate the fleet; a pure function of `(config, seed)`.
pub fn generate_fleet<S: Scalar>(cfg: &FleetConfig, seed: u64) -> Result<Vec<UnitHistory<S>>> {
    cfg.validate()?;
    let mut fleet = Vec::with_capacity(cfg.n_units);
    for unit_id in 0..cfg.n_units {
        let mut rng = substream(seed, &[PURPOSE_FLEET, unit_id as u64]);
        let steps = rng_range(&mut rng, cfg.life_range);
        let tul = (steps - 1) as f64;
        let cycles: Vec<f64> = (0..steps).map(|t| t as f64).collect();

        let mut channels = Array2::<S>::zeros((cfg.channels, steps));
        for f in 0..cfg.channels {
            let baseline: f64 =
                draw_uniform::<f64>(&mut rng, cfg.baseline_range.0, cfg.baseline_range.1);
            let drift: f64 = if f < cfg.informative_channels {
                draw_uniform::<f64>(&mut rng, cfg.drift_range.0, cfg.drift_range.1)
            } else {
                0.0
            };
            for t in 0..steps {
                let life_fraction = cycles[t] / tul;
                let noise: f64 = if cfg.noise_amp > 0.0 {
                    draw_normal::<f64>(&mut rng) * cfg.noise_amp
                } else {
                    0.0
                };
                channels[[f, t]] = S::from_f64_lossy(baseline + drift * life_fraction + noise);
            }
        }
        fleet.push(UnitHistory {
            unit_id,
            channels,
            cycles,
            tul,
        });
    }
    Ok(fleet)
}

fn rng_range(rng: &mut rand_chacha::ChaCha8Rng, range: (usize, usize)) -> usize {
    use rand::Rng;
    rng.gen_range(range.0..=range.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_noise_no_drift_gives_constant_channels() {
        let cfg = FleetConfig {
            noise_amp: 0.0,
            drift_range: (0.0, 0.0),
            ..FleetConfig::default()
        };
        let fleet = generate_fleet::<f64>(&cfg, 5).unwrap();
        for unit in &fleet {
            for f in 0..unit.n_channels() {
                let row = unit.channels.row(f);
                let first = row[0];
                assert!(row.iter().all(|&v| v == first));
            }
        }
    }

    #[test]
    fn same_seed_same_fleet() {
        let cfg = FleetConfig::default();
        let a = generate_fleet::<f64>(&cfg, 11).unwrap();
        let b = generate_fleet::<f64>(&cfg, 11).unwrap();
        assert_eq!(a.len(), b.len());
        for (ua, ub) in a.iter().zip(&b) {
            assert_eq!(ua.channels, ub.channels);
            assert_eq!(ua.tul, ub.tul);
        }
    }

    #[test]
    fn drifting_channels_rise_over_life() {
        let cfg = FleetConfig::default();
        let fleet = generate_fleet::<f64>(&cfg, 3).unwrap();
        let window = 10;
        for unit in &fleet {
            let steps = unit.steps();
            for f in 0..cfg.informative_channels {
                let head: f64 =
                    (0..window).map(|t| unit.channels[[f, t]]).sum::<f64>() / window as f64;
                let tail: f64 = (steps - window..steps)
                    .map(|t| unit.channels[[f, t]])
                    .sum::<f64>()
                    / window as f64;
                assert!(
                    tail > head,
                    "unit {} channel {f}: tail {tail} <= head {head}",
                    unit.unit_id
                );
            }
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = FleetConfig {
            n_units: 0,
            ..FleetConfig::default()
        };
        assert!(generate_fleet::<f64>(&cfg, 0).is_err());
    }
}
