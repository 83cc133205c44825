//! Synthetic uplink channel between UE, TAG and base station.
//!
//! The TAG's effect is a real multiplicative change of the whole SRS
//! amplitude: `g_k (1 + delta b) s_n + w_n`, with `b = 1` while the TAG
//! backscatters. The direct-path gain `g_k` follows a log-normal random walk,
//! `w_n` is circular complex Gaussian noise, and with a small probability an
//! entire symbol is scaled by a spike gain (receiver impairments).

use core::fmt;
use core::str::FromStr;

use alloc::string::{String, ToString};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::srs::SrsSymbol;
use crate::tag::OokState;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ChannelConfig {
    /// Direct-path amplitude `A` per subcarrier.
    pub base_gain: f64,
    /// Fractional amplitude increase while the TAG backscatters.
    pub modulation_depth: f64,
    /// Standard deviation of the complex noise per subcarrier
    /// (`E|w|^2 = sigma^2`).
    pub noise_sigma: f64,
    pub spike_probability: f64,
    pub spike_gain: f64,
    /// Standard deviation of the per-period log-gain increment.
    pub drift_rate: f64,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.base_gain,
            self.modulation_depth,
            self.noise_sigma,
            self.spike_probability,
            self.spike_gain,
            self.drift_rate,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::Config("channel parameters must be finite".into()));
        }
        if self.base_gain <= 0.0 {
            return Err(Error::Config("base_gain must be positive".into()));
        }
        if self.modulation_depth < 0.0 || self.noise_sigma < 0.0 || self.drift_rate < 0.0 {
            return Err(Error::Config(
                "modulation_depth, noise_sigma and drift_rate must be non-negative".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.spike_probability) {
            return Err(Error::Config("spike_probability must lie in [0, 1]".into()));
        }
        if self.spike_gain <= 1.0 {
            return Err(Error::Config("spike_gain must exceed 1".into()));
        }
        Ok(())
    }
}

/// Named channel settings standing in for the measured deployments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ScenarioPreset {
    Noiseless,
    IndoorShort,
    IndoorLong,
    Outdoor,
}

impl ScenarioPreset {
    pub const ALL: [ScenarioPreset; 4] = [
        ScenarioPreset::Noiseless,
        ScenarioPreset::IndoorShort,
        ScenarioPreset::IndoorLong,
        ScenarioPreset::Outdoor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioPreset::Noiseless => "noiseless",
            ScenarioPreset::IndoorShort => "indoor_short",
            ScenarioPreset::IndoorLong => "indoor_long",
            ScenarioPreset::Outdoor => "outdoor",
        }
    }

    /// The base gain keeps `A (1 + delta)` plus noise well under the default
    /// 0.55 validity threshold, while a 3x spike lands above it.
    pub fn config(self) -> ChannelConfig {
        let base = ChannelConfig {
            base_gain: 0.3,
            modulation_depth: 0.05,
            noise_sigma: 0.0,
            spike_probability: 0.0,
            spike_gain: 3.0,
            drift_rate: 0.0,
        };
        match self {
            ScenarioPreset::Noiseless => base,
            ScenarioPreset::IndoorShort => ChannelConfig {
                noise_sigma: 0.01,
                spike_probability: 0.005,
                drift_rate: 5e-5,
                ..base
            },
            ScenarioPreset::IndoorLong => ChannelConfig {
                modulation_depth: 0.02,
                noise_sigma: 0.02,
                spike_probability: 0.01,
                drift_rate: 1e-4,
                ..base
            },
            ScenarioPreset::Outdoor => ChannelConfig {
                modulation_depth: 0.01,
                noise_sigma: 0.04,
                spike_probability: 0.02,
                drift_rate: 2e-4,
                ..base
            },
        }
    }

    /// Ratio of the amplitude step `A delta` to the noise on one averaged
    /// magnitude sample, `sigma / sqrt(2 * 144)`. Infinite without noise.
    pub fn modulation_to_noise(self) -> f64 {
        let c = self.config();
        let step = c.base_gain * c.modulation_depth;
        let noise = c.noise_sigma / libm::sqrt(2.0 * crate::srs::SRS_LENGTH as f64);
        if noise == 0.0 {
            f64::INFINITY
        } else {
            step / noise
        }
    }
}

impl fmt::Display for ScenarioPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(alloc::format!("unknown scenario `{s}`")))
    }
}

impl From<ScenarioPreset> for String {
    fn from(p: ScenarioPreset) -> String {
        p.name().to_string()
    }
}

/// Per-stream channel state: the configuration and the current gain `g_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    config: ChannelConfig,
    gain: f64,
}

impl Channel {
    pub fn new(config: ChannelConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            gain: config.base_gain,
            config,
        })
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.config
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// Advances the gain: `g_{k+1} = g_k exp(drift_rate * w)`.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let w: f64 = StandardNormal.sample(rng);
        if self.config.drift_rate > 0.0 {
            self.gain *= libm::exp(self.config.drift_rate * w);
        }
    }

    /// Received symbol for one SRS period.
    ///
    /// Random draws per call, in order: one uniform for the spike decision,
    /// then real and imaginary noise parts per subcarrier. The draw count is
    /// fixed so streams stay aligned across parameter changes.
    pub fn propagate<R: Rng + ?Sized>(&self, srs: &SrsSymbol, state: OokState, rng: &mut R) -> SrsSymbol {
        let spike = rng.random::<f64>() < self.config.spike_probability;
        let mut amplitude = self.gain;
        if state == OokState::Backscatter {
            amplitude *= 1.0 + self.config.modulation_depth;
        }
        let scale = if spike { self.config.spike_gain } else { 1.0 };
        let component = self.config.noise_sigma / core::f64::consts::SQRT_2;
        let noise = Normal::new(0.0, component).expect("validated sigma");

        let mut out = srs.clone();
        for z in out.values_mut() {
            let w = Complex64::new(noise.sample(rng), noise.sample(rng));
            *z = (*z * amplitude + w) * scale;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::srs::ZcConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pilot() -> SrsSymbol {
        SrsSymbol::pilot(&ZcConfig::default(), 0).unwrap()
    }

    #[test]
    fn identity_channel() {
        let ch = Channel::new(ChannelConfig {
            base_gain: 1.0,
            ..ScenarioPreset::Noiseless.config()
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tx = pilot();
        let rx = ch.propagate(&tx, OokState::Transparent, &mut rng);
        assert_eq!(rx, tx);
    }

    #[test]
    fn backscatter_raises_magnitude() {
        let ch = Channel::new(ChannelConfig {
            base_gain: 1.0,
            ..ScenarioPreset::Noiseless.config()
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rx = ch.propagate(&pilot(), OokState::Backscatter, &mut rng);
        assert!(rx.values().iter().all(|z| (z.norm() - 1.05).abs() < 1e-12));
    }

    #[test]
    fn zero_drift_keeps_gain() {
        let mut ch = Channel::new(ScenarioPreset::Noiseless.config()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            ch.step(&mut rng);
        }
        assert_eq!(ch.gain(), 0.3);
    }

    #[test]
    fn gain_trajectory_replays() {
        let trajectory = |seed| {
            let mut ch = Channel::new(ScenarioPreset::Outdoor.config()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|_| {
                    ch.step(&mut rng);
                    ch.gain()
                })
                .collect::<alloc::vec::Vec<_>>()
        };
        assert_eq!(trajectory(3), trajectory(3));
        assert_ne!(trajectory(3), trajectory(4));
    }

    #[test]
    fn spikes_scale_whole_symbol() {
        let ch = Channel::new(ChannelConfig {
            spike_probability: 1.0,
            spike_gain: 3.0,
            ..ScenarioPreset::Noiseless.config()
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rx = ch.propagate(&pilot(), OokState::Transparent, &mut rng);
        assert!(rx.values().iter().all(|z| (z.norm() - 0.9).abs() < 1e-12));
    }

    #[test]
    fn presets_ordered_by_modulation_to_noise() {
        let ratios: alloc::vec::Vec<f64> =
            ScenarioPreset::ALL.iter().map(|p| p.modulation_to_noise()).collect();
        assert!(ratios.windows(2).all(|w| w[0] > w[1]), "{ratios:?}");
        for p in ScenarioPreset::ALL {
            p.config().validate().unwrap();
            assert_eq!(p.name().parse::<ScenarioPreset>().unwrap(), p);
        }
        assert!("indoor".parse::<ScenarioPreset>().is_err());
    }

    #[test]
    fn invalid_configs() {
        let ok = ScenarioPreset::IndoorLong.config();
        for bad in [
            ChannelConfig { base_gain: 0.0, ..ok },
            ChannelConfig { noise_sigma: -1.0, ..ok },
            ChannelConfig { spike_probability: 1.5, ..ok },
            ChannelConfig { spike_gain: 1.0, ..ok },
            ChannelConfig { drift_rate: f64::NAN, ..ok },
        ] {
            assert!(Channel::new(bad).is_err(), "{bad:?}");
        }
    }
}
