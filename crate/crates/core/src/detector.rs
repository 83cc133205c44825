//! Base-station detection pipeline.
//!
//! Per SRS period `k`:
//!
//! 1. `a = mean |s_n|` over the 144 subcarriers.
//! 2. Hard threshold: samples above `alpha` are replaced by the last valid one.
//! 3. Median filter over the last `P` outputs of step 2.
//! 4. Standard-deviation filter over the last `Q` outputs of step 3.
//! 5. Pearson correlation of the last `v N` outputs against every candidate
//!    message; the best code is reported when its correlation exceeds `theta`.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::tag::GoldCodeSet;
use crate::{timing, Error, Result};

/// Mean subcarrier magnitude of one SRS occurrence.
pub fn average_magnitude(values: &[Complex64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().map(|z| z.norm()).sum::<f64>() / values.len() as f64
}

/// Value the SD filter emits for an outlier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SdReplacement {
    /// Mean of the current window.
    #[default]
    WindowMean,
    /// The filter's previous output.
    PreviousOutput,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct FilterConfig {
    /// Upper validity bound on the averaged magnitude.
    pub alpha: f64,
    /// Median filter depth `P`; 1 disables the stage.
    #[cfg_attr(feature = "serde", serde(rename = "P"))]
    pub median_window: usize,
    /// SD filter depth `Q`.
    #[cfg_attr(feature = "serde", serde(rename = "Q"))]
    pub sd_window: usize,
    /// Deviation factor `u`; infinity disables the SD stage (`null` in JSON).
    #[cfg_attr(feature = "serde", serde(rename = "u", with = "infinite_as_null"))]
    pub deviation_factor: f64,
    pub sd_replacement: SdReplacement,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            alpha: 0.55,
            median_window: 5,
            sd_window: 5,
            deviation_factor: 0.2,
            sd_replacement: SdReplacement::WindowMean,
        }
    }
}

impl FilterConfig {
    /// Same validity threshold, median and SD stages switched off.
    pub fn without_smoothing(self) -> Self {
        Self {
            median_window: 1,
            deviation_factor: f64::INFINITY,
            ..self
        }
    }

    /// Both windows must be shorter than the chip run `v` so a run survives
    /// filtering.
    pub fn validate(&self, v: usize) -> Result<()> {
        if self.alpha.is_nan() || self.alpha <= 0.0 {
            return Err(Error::Config("alpha must be positive".into()));
        }
        if self.median_window < 1 || self.sd_window < 1 {
            return Err(Error::Config("filter windows must hold at least one sample".into()));
        }
        if self.median_window >= v || self.sd_window >= v {
            return Err(Error::Config(alloc::format!(
                "filter windows (P={}, Q={}) must be shorter than the repetition run v={v}",
                self.median_window,
                self.sd_window
            )));
        }
        if self.deviation_factor.is_nan() || self.deviation_factor < 0.0 {
            return Err(Error::Config("deviation factor must be non-negative".into()));
        }
        Ok(())
    }
}

#[cfg(feature = "serde")]
mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DetectorConfig {
    pub theta: f64,
    /// Repetitions per chip `v`.
    pub v: usize,
    /// Compare `|r|` instead of `r`, accepting inverted chip polarity.
    pub polarity_agnostic: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            theta: 0.4,
            v: timing::REPETITIONS,
            polarity_agnostic: false,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Config("theta must lie in (0, 1)".into()));
        }
        if self.v < 1 {
            return Err(Error::InvalidRepetition);
        }
        Ok(())
    }
}

/// One thresholded correlation peak.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetectionEvent {
    pub period_index: usize,
    pub code_id: usize,
    /// Pearson correlation `r` of the reported code (signed, also in
    /// polarity-agnostic mode).
    pub correlation: f64,
}

/// First filter stage. Stores the latest sample that passed the test.
#[derive(Debug, Clone, PartialEq)]
pub struct HardThreshold {
    alpha: f64,
    last_valid: Option<f64>,
}

impl HardThreshold {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            last_valid: None,
        }
    }

    pub fn last_valid(&self) -> Option<f64> {
        self.last_valid
    }

    /// The first sample always passes and seeds the stored value.
    pub fn apply(&mut self, a: f64) -> f64 {
        match self.last_valid {
            None => {
                self.last_valid = Some(a);
                a
            }
            Some(prev) if a > self.alpha => prev,
            Some(_) => {
                self.last_valid = Some(a);
                a
            }
        }
    }
}

/// Sliding median over the last `P` inputs; shorter prefixes during warm-up.
#[derive(Debug, Clone, PartialEq)]
pub struct MedianFilter {
    depth: usize,
    buffer: VecDeque<f64>,
    scratch: Vec<f64>,
}

impl MedianFilter {
    pub fn new(depth: usize) -> Self {
        Self {
            depth: depth.max(1),
            buffer: VecDeque::with_capacity(depth),
            scratch: Vec::with_capacity(depth),
        }
    }

    pub fn buffer(&self) -> &VecDeque<f64> {
        &self.buffer
    }

    pub fn push(&mut self, x: f64) -> f64 {
        if self.buffer.len() == self.depth {
            self.buffer.pop_front();
        }
        self.buffer.push_back(x);
        self.scratch.clear();
        self.scratch.extend(self.buffer.iter().copied());
        median_in_place(&mut self.scratch)
    }
}

/// Middle order statistic; even counts average the two central values.
pub fn median_in_place(xs: &mut [f64]) -> f64 {
    xs.sort_unstable_by(f64::total_cmp);
    let n = xs.len();
    match n {
        0 => 0.0,
        _ if n % 2 == 1 => xs[n / 2],
        _ => 0.5 * (xs[n / 2 - 1] + xs[n / 2]),
    }
}

/// Replaces samples that deviate from the window mean by more than
/// `u` standard deviations (population form).
#[derive(Debug, Clone, PartialEq)]
pub struct SdFilter {
    depth: usize,
    deviation_factor: f64,
    replacement: SdReplacement,
    buffer: VecDeque<f64>,
    last_output: Option<f64>,
}

impl SdFilter {
    pub fn new(depth: usize, deviation_factor: f64, replacement: SdReplacement) -> Self {
        Self {
            depth: depth.max(1),
            deviation_factor,
            replacement,
            buffer: VecDeque::with_capacity(depth),
            last_output: None,
        }
    }

    pub fn buffer(&self) -> &VecDeque<f64> {
        &self.buffer
    }

    pub fn push(&mut self, d: f64) -> f64 {
        if self.buffer.len() == self.depth {
            self.buffer.pop_front();
        }
        self.buffer.push_back(d);
        let n = self.buffer.len() as f64;
        let mean = self.buffer.iter().sum::<f64>() / n;
        let var = self.buffer.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let sd = libm::sqrt(var);

        let y = if libm::fabs(d - mean) > self.deviation_factor * sd {
            match self.replacement {
                SdReplacement::WindowMean => mean,
                SdReplacement::PreviousOutput => self.last_output.unwrap_or(d),
            }
        } else {
            d
        };
        self.last_output = Some(y);
        y
    }
}

/// Intermediate values of the filter chain for one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterOutput {
    pub validated: f64,
    pub median: f64,
    pub filtered: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterChain {
    pub hard: HardThreshold,
    pub median: MedianFilter,
    pub sd: SdFilter,
}

impl FilterChain {
    pub fn new(config: &FilterConfig) -> Self {
        Self {
            hard: HardThreshold::new(config.alpha),
            median: MedianFilter::new(config.median_window),
            sd: SdFilter::new(config.sd_window, config.deviation_factor, config.sd_replacement),
        }
    }

    pub fn process(&mut self, a: f64) -> FilterOutput {
        let validated = self.hard.apply(a);
        let (median, filtered) = self.smooth(validated);
        FilterOutput {
            validated,
            median,
            filtered,
        }
    }

    /// Median and SD stages only.
    pub fn smooth(&mut self, validated: f64) -> (f64, f64) {
        let d = self.median.push(validated);
        (d, self.sd.push(d))
    }
}

/// Pearson correlation of two equal-length sequences, computed two-pass.
/// A constant sequence yields 0.
pub fn pearson(template: &[f64], window: &[f64]) -> f64 {
    assert_eq!(template.len(), window.len(), "length mismatch");
    if is_constant(template.iter().copied()) || is_constant(window.iter().copied()) {
        return 0.0;
    }
    let n = template.len() as f64;
    let mu = template.iter().sum::<f64>() / n;
    let rho = window.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in template.iter().zip(window) {
        let (dx, dy) = (x - mu, y - rho);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    clamp_unit(sxy / libm::sqrt(sxx * syy))
}

fn is_constant(mut xs: impl Iterator<Item = f64>) -> bool {
    match xs.next() {
        None => true,
        Some(first) => xs.all(|x| x == first),
    }
}

fn clamp_unit(r: f64) -> f64 {
    r.clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
struct Template {
    centered: Vec<f64>,
    norm: f64,
}

/// Sliding window of filtered samples correlated against every candidate
/// message. Templates are centred once; each step only centres the window.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlator {
    templates: Vec<Template>,
    window: VecDeque<f64>,
    scratch: Vec<f64>,
    length: usize,
}

impl Correlator {
    pub fn new(codes: &GoldCodeSet, v: usize) -> Result<Self> {
        let length = timing::message_periods(v, codes.code_length());
        let templates = (0..codes.len())
            .map(|id| {
                let msg = codes.message(id, v)?;
                let n = msg.len() as f64;
                let mean = msg.samples().iter().map(|&x| f64::from(x)).sum::<f64>() / n;
                let centered: Vec<f64> = msg.samples().iter().map(|&x| f64::from(x) - mean).collect();
                let norm = libm::sqrt(centered.iter().map(|c| c * c).sum::<f64>());
                Ok(Template { centered, norm })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            templates,
            window: VecDeque::with_capacity(length),
            scratch: Vec::with_capacity(length),
            length,
        })
    }

    /// Number of samples the window holds when full (`v N`).
    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn is_full(&self) -> bool {
        self.window.len() == self.length
    }

    pub fn window(&self) -> &VecDeque<f64> {
        &self.window
    }

    pub fn push(&mut self, y: f64) {
        if self.window.len() == self.length {
            self.window.pop_front();
        }
        self.window.push_back(y);
    }

    /// Correlation with every template, in code id order. `None` until the
    /// window is full.
    pub fn correlations(&mut self) -> Option<Vec<f64>> {
        if !self.is_full() {
            return None;
        }
        if is_constant(self.window.iter().copied()) {
            return Some(alloc::vec![0.0; self.templates.len()]);
        }
        let n = self.length as f64;
        let rho = self.window.iter().sum::<f64>() / n;
        self.scratch.clear();
        self.scratch.extend(self.window.iter().map(|y| y - rho));
        let ynorm = libm::sqrt(self.scratch.iter().map(|d| d * d).sum::<f64>());
        Some(
            self.templates
                .iter()
                .map(|t| {
                    let sxy: f64 = t.centered.iter().zip(&self.scratch).map(|(c, d)| c * d).sum();
                    clamp_unit(sxy / (t.norm * ynorm))
                })
                .collect(),
        )
    }
}

/// Best code for one set of correlations; ties go to the lowest id.
fn best_code(correlations: &[f64], polarity_agnostic: bool) -> Option<(usize, f64)> {
    let score = |r: f64| if polarity_agnostic { libm::fabs(r) } else { r };
    let mut best: Option<(usize, f64)> = None;
    for (id, &r) in correlations.iter().enumerate() {
        match best {
            Some((_, b)) if score(r) <= score(b) => {}
            _ => best = Some((id, r)),
        }
    }
    best
}

/// Full streaming detector: filter chain, correlator and decision.
#[derive(Debug, Clone, PartialEq)]
pub struct Detector {
    config: DetectorConfig,
    filters: FilterChain,
    correlator: Correlator,
    period: usize,
}

impl Detector {
    pub fn new(codes: &GoldCodeSet, config: DetectorConfig, filter: &FilterConfig) -> Result<Self> {
        config.validate()?;
        filter.validate(config.v)?;
        Ok(Self {
            config,
            filters: FilterChain::new(filter),
            correlator: Correlator::new(codes, config.v)?,
            period: 0,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn filters(&self) -> &FilterChain {
        &self.filters
    }

    pub fn correlator(&self) -> &Correlator {
        &self.correlator
    }

    /// Periods processed so far.
    pub fn period_counter(&self) -> usize {
        self.period
    }

    /// Consumes one averaged magnitude `a^(k)`.
    pub fn step(&mut self, a: f64) -> Option<DetectionEvent> {
        let y = self.filters.process(a).filtered;
        self.detect_step(y)
    }

    /// Consumes one sample that already passed the hard threshold.
    pub fn step_validated(&mut self, validated: f64) -> Option<DetectionEvent> {
        let (_, y) = self.filters.smooth(validated);
        self.detect_step(y)
    }

    /// Correlation and decision on an already filtered sample `y^(k)`.
    pub fn detect_step(&mut self, y: f64) -> Option<DetectionEvent> {
        let k = self.period;
        self.period += 1;
        self.correlator.push(y);
        let correlations = self.correlator.correlations()?;
        let (code_id, r) = best_code(&correlations, self.config.polarity_agnostic)?;
        let score = if self.config.polarity_agnostic { libm::fabs(r) } else { r };
        (score > self.config.theta).then_some(DetectionEvent {
            period_index: k,
            code_id,
            correlation: r,
        })
    }

    pub fn run(&mut self, magnitudes: impl IntoIterator<Item = f64>) -> Vec<DetectionEvent> {
        magnitudes.into_iter().filter_map(|a| self.step(a)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn averaging() {
        let ones = vec![Complex64::new(0.0, 1.0); 144];
        assert_eq!(average_magnitude(&ones), 1.0);
        let mut mixed = vec![Complex64::new(0.4, 0.0); 72];
        mixed.extend(vec![Complex64::new(0.0, -0.6); 72]);
        assert!((average_magnitude(&mixed) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hard_threshold_rules() {
        let mut h = HardThreshold::new(0.55);
        assert_eq!(h.apply(0.28), 0.28);
        assert_eq!(h.apply(0.30), 0.30);
        assert_eq!(h.last_valid(), Some(0.30));

        let mut h = HardThreshold::new(0.55);
        h.apply(0.28);
        assert_eq!(h.apply(0.90), 0.28);
        assert_eq!(h.last_valid(), Some(0.28));

        let mut h = HardThreshold::new(0.55);
        assert_eq!(h.apply(0.9), 0.9);
    }

    #[test]
    fn median_rejects_single_spike() {
        let mut m = MedianFilter::new(5);
        let out: Vec<f64> = [0.1, 0.9, 0.1, 0.1, 0.1].into_iter().map(|x| m.push(x)).collect();
        assert_eq!(*out.last().unwrap(), 0.1);
        // warm-up on prefixes: [0.1], [0.1, 0.9] -> 0.5, [0.1, 0.9, 0.1] -> 0.1
        assert_eq!(&out[..3], &[0.1, 0.5, 0.1]);
        assert_eq!(m.buffer().len(), 5);
    }

    #[test]
    fn median_of_constant() {
        let mut m = MedianFilter::new(5);
        for _ in 0..9 {
            assert_eq!(m.push(0.42), 0.42);
        }
    }

    #[test]
    fn sd_filter_cases() {
        let mut f = SdFilter::new(5, 0.2, SdReplacement::WindowMean);
        for _ in 0..5 {
            assert_eq!(f.push(0.3), 0.3);
        }

        // [1, 1, 1, 1, 2]: mean 1.2, population sd 0.4, |2 - 1.2| = 0.8 > 0.08
        let mut f = SdFilter::new(5, 0.2, SdReplacement::WindowMean);
        for _ in 0..4 {
            f.push(1.0);
        }
        assert!((f.push(2.0) - 1.2).abs() < 1e-15);

        let mut f = SdFilter::new(5, 0.2, SdReplacement::PreviousOutput);
        for _ in 0..4 {
            f.push(1.0);
        }
        assert_eq!(f.push(2.0), 1.0);

        let mut f = SdFilter::new(5, f64::INFINITY, SdReplacement::WindowMean);
        for x in [1.0, 5.0, -3.0, 2.0, 100.0] {
            assert_eq!(f.push(x), x);
        }
    }

    #[test]
    fn pearson_basics() {
        let codes = GoldCodeSet::default();
        let msg = codes.message(3, 7).unwrap();
        let t: Vec<f64> = msg.samples().iter().map(|&x| f64::from(x)).collect();
        let affine: Vec<f64> = t.iter().map(|x| 2.0 * x + 5.0).collect();
        let neg: Vec<f64> = t.iter().map(|x| -x).collect();
        assert!((pearson(&t, &affine) - 1.0).abs() < 1e-12);
        assert!((pearson(&t, &neg) + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&t, &vec![0.3; t.len()]), 0.0);
    }

    #[test]
    fn filter_config_validation() {
        assert!(FilterConfig::default().validate(7).is_ok());
        assert!(FilterConfig::default().validate(5).is_err());
        let zero = FilterConfig {
            median_window: 0,
            ..FilterConfig::default()
        };
        assert!(zero.validate(7).is_err());
        assert!(FilterConfig::default().without_smoothing().validate(7).is_ok());
        for theta in [0.0, 1.0, -0.2, f64::NAN] {
            let c = DetectorConfig {
                theta,
                ..DetectorConfig::default()
            };
            assert!(c.validate().is_err());
        }
    }

    #[test]
    fn aligned_template_detected() {
        let codes = GoldCodeSet::default();
        let mut det = Detector::new(&codes, DetectorConfig::default(), &FilterConfig::default()).unwrap();
        let msg = codes.message(7, 7).unwrap();
        let mut events = Vec::new();
        for &x in msg.samples() {
            events.extend(det.detect_step(0.3 + 0.015 * f64::from(x)));
        }
        assert_eq!(events.len(), 1);
        let e = events[0];
        assert_eq!((e.period_index, e.code_id), (216, 7));
        assert!((e.correlation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn silent_until_window_full_and_on_flat_input() {
        let codes = GoldCodeSet::default();
        let mut det = Detector::new(&codes, DetectorConfig::default(), &FilterConfig::default()).unwrap();
        for _ in 0..1000 {
            assert!(det.step(0.3).is_none());
        }
        assert_eq!(det.period_counter(), 1000);
        assert_eq!(det.correlator().window().len(), 217);
    }

    #[test]
    fn inverted_polarity_needs_agnostic_mode() {
        let codes = GoldCodeSet::default();
        let msg = codes.message(12, 7).unwrap();
        let run = |agnostic| {
            let cfg = DetectorConfig {
                polarity_agnostic: agnostic,
                ..DetectorConfig::default()
            };
            let mut det = Detector::new(&codes, cfg, &FilterConfig::default()).unwrap();
            msg.samples()
                .iter()
                .filter_map(|&x| det.detect_step(1.0 - f64::from(x)))
                .collect::<Vec<_>>()
        };
        assert!(run(false).is_empty());
        let events = run(true);
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].code_id, 12);
        assert!((events[0].correlation + 1.0).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_lowest_id() {
        assert_eq!(best_code(&[0.5, 0.7, 0.7], false), Some((1, 0.7)));
        assert_eq!(best_code(&[0.5, -0.9, 0.7], true), Some((1, -0.9)));
        assert_eq!(best_code(&[], false), None);
    }
}
