//! End-to-end experiments: a TAG cycling its message over `R` message
//! durations, the synthetic channel, and the streaming detector, followed by
//! per-message outcome counting.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{Channel, ChannelConfig, ScenarioPreset};
use crate::detector::{average_magnitude, DetectionEvent, Detector, DetectorConfig, FilterConfig};
use crate::srs::{SrsSymbol, ZcConfig};
use crate::tag::{ook_state, GoldCodeSet, LfsrSpec, OokState};
use crate::{timing, Error, Result};

/// Channel selection: a named preset or explicit parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum Scenario {
    Preset(ScenarioPreset),
    Custom(ChannelConfig),
}

impl Scenario {
    pub fn channel_config(&self) -> ChannelConfig {
        match *self {
            Scenario::Preset(p) => p.config(),
            Scenario::Custom(c) => c,
        }
    }
}

impl From<ScenarioPreset> for Scenario {
    fn from(p: ScenarioPreset) -> Self {
        Scenario::Preset(p)
    }
}

impl From<ChannelConfig> for Scenario {
    fn from(c: ChannelConfig) -> Self {
        Scenario::Custom(c)
    }
}

/// LFSR seeds of the two code generators (polynomials are fixed).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct CodeConfig {
    pub seed_a: u32,
    pub seed_b: u32,
}

impl Default for CodeConfig {
    fn default() -> Self {
        Self {
            seed_a: 0b11111,
            seed_b: 0b11111,
        }
    }
}

impl CodeConfig {
    pub fn code_set(&self) -> Result<GoldCodeSet> {
        GoldCodeSet::generate(
            &LfsrSpec::poly_a().with_seed(self.seed_a),
            &LfsrSpec::poly_b().with_seed(self.seed_b),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub tag_code_id: usize,
    pub tag_enabled: bool,
    /// Number of message durations simulated.
    #[cfg_attr(feature = "serde", serde(rename = "R"))]
    pub messages: usize,
    pub seed: u64,
    pub zc_root: usize,
    pub codes: CodeConfig,
    pub detector: DetectorConfig,
    pub filter: FilterConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Preset(ScenarioPreset::IndoorShort),
            tag_code_id: 7,
            tag_enabled: true,
            messages: timing::MESSAGE_COUNT,
            seed: 1,
            zc_root: 25,
            codes: CodeConfig::default(),
            detector: DetectorConfig::default(),
            filter: FilterConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.messages < 1 {
            return Err(Error::Config("R must be at least 1".into()));
        }
        self.scenario.channel_config().validate()?;
        self.detector.validate()?;
        self.filter.validate(self.detector.v)?;
        ZcConfig::with_root(self.zc_root).validate()?;
        let codes = self.codes.code_set()?;
        if self.tag_code_id >= codes.len() {
            return Err(Error::Config(alloc::format!(
                "tag_code_id {} outside 0..{}",
                self.tag_code_id,
                codes.len()
            )));
        }
        Ok(())
    }

    /// SRS periods per message, `v N`.
    pub fn message_periods(&self) -> usize {
        timing::message_periods(self.detector.v, timing::CODE_LENGTH)
    }

    pub fn n_srs(&self) -> usize {
        self.messages * self.message_periods()
    }

    /// Periods the TAG has already been transmitting when the measurement
    /// starts: the group delay of the median and SD stages. With this lead
    /// the correlation peak for message `w` falls on the last period of
    /// window `w`, so the final message is observable within `n_srs`.
    pub fn tag_lead(&self) -> usize {
        let median = self.filter.median_window / 2;
        let sd = if self.filter.deviation_factor.is_finite() {
            self.filter.sd_window / 2
        } else {
            0
        };
        median + sd
    }
}

/// Per-run outcome counts and probabilities.
///
/// Detection and cross false alarm are counted only with the TAG enabled;
/// false alarm only with it disabled. The other fields stay zero.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Metrics {
    pub tag_enabled: bool,
    pub messages: usize,
    pub detections: usize,
    pub missed: usize,
    pub false_alarms: usize,
    pub cross_false_alarms: usize,
    pub detection_probability: f64,
    pub false_alarm_probability: f64,
    pub cross_false_alarm_probability: f64,
    pub n_srs: usize,
    /// Every thresholded detector output.
    pub events: Vec<DetectionEvent>,
    /// Events collapsed into one detection per run of a code.
    pub detections_log: Vec<DetectionEvent>,
}

/// A finished run: metrics and the raw `a^(k)` trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub metrics: Metrics,
    pub trace: Vec<f64>,
}

/// Decorrelated child seed for trial `index` (SplitMix64 finaliser).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Collapses runs of consecutive-period events for the same code.
///
/// A run ends at a gap, a code change, or once it spans `max_span`
/// periods. Each run becomes one detection at its peak correlation (the
/// earliest peak on ties).
pub fn deduplicate(events: &[DetectionEvent], max_span: usize) -> Vec<DetectionEvent> {
    // (peak so far, first period of the run)
    let mut runs: Vec<(DetectionEvent, usize)> = Vec::new();
    let mut last_period: Option<usize> = None;
    for e in events {
        let extends = match (runs.last(), last_period) {
            (Some((open, start)), Some(prev)) => {
                open.code_id == e.code_id && e.period_index == prev + 1 && e.period_index - start < max_span
            }
            _ => false,
        };
        if extends {
            let (peak, _) = runs.last_mut().expect("run open");
            if e.correlation > peak.correlation {
                *peak = *e;
            }
        } else {
            runs.push((*e, e.period_index));
        }
        last_period = Some(e.period_index);
    }
    runs.into_iter().map(|(peak, _)| peak).collect()
}

/// Message window a detection belongs to: the one holding the centre of the
/// correlation window that produced it. The window ending at period `k`
/// covers `k - L + 1 ..= k`, so a detection of message `w` peaks near the
/// last period of `w` plus the filter delay.
pub fn message_window(period_index: usize, message_periods: usize) -> usize {
    period_index.saturating_sub((message_periods - 1) / 2) / message_periods
}

fn count_outcomes(config: &ExperimentConfig, events: Vec<DetectionEvent>) -> Metrics {
    let span = config.message_periods();
    let detections_log = deduplicate(&events, span);
    let r = config.messages;
    let mut hit = alloc::vec![false; r];
    let mut wrong = alloc::vec![false; r];
    let mut any = alloc::vec![false; r];
    for d in &detections_log {
        let w = message_window(d.period_index, span);
        if w >= r {
            continue;
        }
        any[w] = true;
        if d.code_id == config.tag_code_id {
            hit[w] = true;
        } else {
            wrong[w] = true;
        }
    }
    let count = |v: &[bool]| v.iter().filter(|&&b| b).count();
    let (detections, cross, false_alarms) = if config.tag_enabled {
        (count(&hit), count(&wrong), 0)
    } else {
        (0, 0, count(&any))
    };
    let p = |c: usize| c as f64 / r as f64;
    Metrics {
        tag_enabled: config.tag_enabled,
        messages: r,
        detections,
        missed: if config.tag_enabled { r - detections } else { 0 },
        false_alarms,
        cross_false_alarms: cross,
        detection_probability: p(detections),
        false_alarm_probability: p(false_alarms),
        cross_false_alarm_probability: p(cross),
        n_srs: config.n_srs(),
        events,
        detections_log,
    }
}

/// Generates the averaged magnitude trace `a^(k)` for a whole run.
pub fn simulate_trace(config: &ExperimentConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let codes = config.codes.code_set()?;
    let message = codes.message(config.tag_code_id, config.detector.v)?;
    let pilot = SrsSymbol::pilot(&ZcConfig::with_root(config.zc_root), 0)?;
    let mut channel = Channel::new(config.scenario.channel_config())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let lead = config.tag_lead();

    Ok((0..config.n_srs())
        .map(|k| {
            let state = if config.tag_enabled {
                ook_state(&message, k + lead)
            } else {
                OokState::Transparent
            };
            let rx = channel.propagate(&pilot, state, &mut rng);
            channel.step(&mut rng);
            average_magnitude(rx.values())
        })
        .collect())
}

/// Runs the detector over a recorded `a^(k)` trace.
pub fn detect_trace(config: &ExperimentConfig, trace: &[f64]) -> Result<Vec<DetectionEvent>> {
    config.detector.validate()?;
    let codes = config.codes.code_set()?;
    let mut detector = Detector::new(&codes, config.detector, &config.filter)?;
    Ok(detector.run(trace.iter().copied()))
}

/// Counts outcomes for an already detected event list.
pub fn evaluate(config: &ExperimentConfig, events: Vec<DetectionEvent>) -> Metrics {
    count_outcomes(config, events)
}

pub fn simulate(config: &ExperimentConfig) -> Result<Run> {
    let trace = simulate_trace(config)?;
    let events = detect_trace(config, &trace)?;
    Ok(Run {
        metrics: count_outcomes(config, events),
        trace,
    })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Metrics> {
    simulate(config).map(|run| run.metrics)
}

/// TAG-OFF then TAG-ON runs over the same scenario and seed.
pub fn run_phases(config: &ExperimentConfig) -> Result<(Run, Run)> {
    let off = ExperimentConfig {
        tag_enabled: false,
        ..config.clone()
    };
    let on = ExperimentConfig {
        tag_enabled: true,
        ..config.clone()
    };
    Ok((simulate(&off)?, simulate(&on)?))
}

/// Scalar knobs accepted by [`sweep`].
pub const SWEEP_PARAMETERS: [&str; 11] = [
    "base_gain",
    "modulation_depth",
    "noise_sigma",
    "spike_probability",
    "spike_gain",
    "drift_rate",
    "theta",
    "alpha",
    "u",
    "P",
    "Q",
];

fn as_window(name: &str, value: f64) -> Result<usize> {
    if libm::trunc(value) != value || value.is_nan() || value < 1.0 {
        return Err(Error::Config(alloc::format!("{name} needs a positive integer, got {value}")));
    }
    Ok(value as usize)
}

/// Copy of `base` with one scalar parameter replaced.
pub fn with_parameter(base: &ExperimentConfig, parameter: &str, value: f64) -> Result<ExperimentConfig> {
    let mut cfg = base.clone();
    let mut channel = cfg.scenario.channel_config();
    match parameter {
        "base_gain" => channel.base_gain = value,
        "modulation_depth" => channel.modulation_depth = value,
        "noise_sigma" => channel.noise_sigma = value,
        "spike_probability" => channel.spike_probability = value,
        "spike_gain" => channel.spike_gain = value,
        "drift_rate" => channel.drift_rate = value,
        "theta" => cfg.detector.theta = value,
        "alpha" => cfg.filter.alpha = value,
        "u" | "deviation_factor" => cfg.filter.deviation_factor = value,
        "P" | "median_window" => cfg.filter.median_window = as_window(parameter, value)?,
        "Q" | "sd_window" => cfg.filter.sd_window = as_window(parameter, value)?,
        other => return Err(Error::UnknownParameter(other.to_string())),
    }
    if channel != cfg.scenario.channel_config() {
        cfg.scenario = Scenario::Custom(channel);
    }
    Ok(cfg)
}

/// Configurations a sweep runs, one per value, with child seeds
/// `derive_seed(base.seed, i)`.
pub fn sweep_configs(base: &ExperimentConfig, parameter: &str, values: &[f64]) -> Result<Vec<ExperimentConfig>> {
    // reject unknown names even for an empty value list
    with_parameter(base, parameter, 1.0).or_else(|e| match e {
        Error::UnknownParameter(_) => Err(e),
        _ => Ok(base.clone()),
    })?;
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut cfg = with_parameter(base, parameter, v)?;
            cfg.seed = derive_seed(base.seed, i as u64);
            cfg.validate()?;
            Ok(cfg)
        })
        .collect()
}

/// One experiment per value, in input order.
pub fn sweep(base: &ExperimentConfig, parameter: &str, values: &[f64]) -> Result<Vec<(f64, Metrics)>> {
    let configs = sweep_configs(base, parameter, values)?;
    values
        .iter()
        .zip(&configs)
        .map(|(&v, cfg)| Ok((v, run_experiment(cfg)?)))
        .collect()
}

/// Human-readable scenario label.
pub fn scenario_label(s: &Scenario) -> String {
    match s {
        Scenario::Preset(p) => p.name().to_string(),
        Scenario::Custom(_) => "custom".to_string(),
    }
}
