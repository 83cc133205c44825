//! Period bookkeeping. Simulated time is an index; nothing here sleeps.

use core::time::Duration;

/// SRS periodicity, which is also the TAG bit duration.
pub const SRS_PERIOD: Duration = Duration::from_millis(10);

/// Default Gold code length.
pub const CODE_LENGTH: usize = 31;

/// Default number of SRS periods each code chip is held for.
pub const REPETITIONS: usize = 7;

/// Default number of message transmissions per measurement.
pub const MESSAGE_COUNT: usize = 300;

/// Number of SRS periods in one TAG message.
pub const fn message_periods(v: usize, n: usize) -> usize {
    v * n
}

/// Duration of one TAG message, `v * N * T_s`.
pub fn message_duration(v: usize, n: usize) -> Duration {
    SRS_PERIOD * (message_periods(v, n) as u32)
}

/// SRS occurrences consumed by a measurement of `r` messages.
pub const fn srs_count(r: usize, v: usize, n: usize) -> usize {
    r * v * n
}

/// Simulated wall time of a measurement of `r` messages.
pub fn measurement_duration(r: usize, v: usize, n: usize) -> Duration {
    SRS_PERIOD * (srs_count(r, v, n) as u32)
}
