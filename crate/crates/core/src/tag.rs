//! TAG identity codes and on-off keying.
//!
//! Codes are carried in ±1 form: LFSR bit 0 maps to +1 and bit 1 to -1, so
//! XOR of two bit sequences is the elementwise product of their ±1 forms.

use alloc::vec::Vec;

use crate::{timing, Error, Result};

/// Fibonacci LFSR description for a polynomial `x^n + ... + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LfsrSpec {
    /// Exponents with nonzero coefficients, excluding the constant term.
    /// The largest is the register degree.
    pub taps: Vec<u32>,
    /// Initial register contents. The most significant of the `degree` bits
    /// is the first output.
    pub seed: u32,
}

impl LfsrSpec {
    /// `x^5 + x^2 + 1`, seeded with all ones.
    pub fn poly_a() -> Self {
        Self {
            taps: alloc::vec![5, 2],
            seed: 0b11111,
        }
    }

    /// `x^5 + x^4 + x^3 + x^2 + 1`, seeded with all ones.
    pub fn poly_b() -> Self {
        Self {
            taps: alloc::vec![5, 4, 3, 2],
            seed: 0b11111,
        }
    }

    pub fn degree(&self) -> u32 {
        self.taps.iter().copied().max().unwrap_or(0)
    }

    pub fn with_seed(mut self, seed: u32) -> Self {
        self.seed = seed;
        self
    }

    fn check(&self) -> Result<()> {
        let n = self.degree();
        if n == 0 || n > 24 {
            return Err(Error::Config(alloc::format!("unsupported LFSR degree {n}")));
        }
        if self.seed == 0 || self.seed >> n != 0 {
            return Err(Error::InvalidSeed {
                seed: self.seed,
                degree: n,
            });
        }
        Ok(())
    }
}

/// Runs the register for one full period and returns the output bits.
///
/// With `reg[i] = a_{k+i}`, the recurrence is
/// `a_{k+n} = a_k ^ XOR_{t in taps, t < n} a_{k+t}`.
fn lfsr_bits(spec: &LfsrSpec) -> Result<Vec<u8>> {
    spec.check()?;
    let n = spec.degree() as usize;
    let expected = (1usize << n) - 1;
    let mut reg: Vec<u8> = (0..n).map(|i| ((spec.seed >> (n - 1 - i)) & 1) as u8).collect();
    let initial = reg.clone();
    let feedback: Vec<usize> = spec
        .taps
        .iter()
        .map(|&t| t as usize)
        .filter(|&t| t < n)
        .collect();

    let mut out = Vec::with_capacity(expected);
    for tick in 1..=expected {
        let next = feedback.iter().fold(reg[0], |acc, &t| acc ^ reg[t]);
        out.push(reg[0]);
        reg.rotate_left(1);
        reg[n - 1] = next;
        if reg == initial && tick != expected {
            return Err(Error::NotPrimitive {
                period: tick,
                expected,
            });
        }
    }
    if reg != initial {
        return Err(Error::NotPrimitive {
            period: 0,
            expected,
        });
    }
    Ok(out)
}

/// One period of the maximal-length sequence in ±1 form.
pub fn generate_m_sequence(spec: &LfsrSpec) -> Result<Vec<i8>> {
    Ok(lfsr_bits(spec)?
        .into_iter()
        .map(|b| if b == 0 { 1 } else { -1 })
        .collect())
}

/// Unnormalized cyclic correlation `sum_i a[i] * b[(i + lag) mod n]`.
pub fn cyclic_correlation(a: &[i8], b: &[i8], lag: usize) -> i32 {
    let n = b.len();
    a.iter()
        .enumerate()
        .map(|(i, &x)| i32::from(x) * i32::from(b[(i + lag) % n]))
        .sum()
}

/// `b` cyclically advanced by `shift` chips.
fn rotated(b: &[i8], shift: usize) -> Vec<i8> {
    let mut out = b.to_vec();
    out.rotate_left(shift % b.len().max(1));
    out
}

/// The three cross-correlation values of a preferred pair of degree `n`.
fn preferred_values(n: u32) -> [i32; 3] {
    let t = 1 + (1i32 << ((n + 2) / 2));
    [-t, -1, t - 2]
}

/// Gold code family: the two m-sequences followed by their products at
/// every relative shift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldCodeSet {
    codes: Vec<Vec<i8>>,
}

impl GoldCodeSet {
    /// Order: `[m_a, m_b, m_a * shift(m_b, 0), ..., m_a * shift(m_b, L-1)]`.
    pub fn generate(poly_a: &LfsrSpec, poly_b: &LfsrSpec) -> Result<Self> {
        if poly_a.degree() != poly_b.degree() {
            return Err(Error::Config("LFSR degrees differ".into()));
        }
        let ma = generate_m_sequence(poly_a)?;
        let mb = generate_m_sequence(poly_b)?;
        if ma == mb || (0..ma.len()).any(|s| rotated(&mb, s) == ma) {
            return Err(Error::NotPreferredPair(ma.len() as i32));
        }
        let allowed = preferred_values(poly_a.degree());
        for lag in 0..ma.len() {
            let c = cyclic_correlation(&ma, &mb, lag);
            if !allowed.contains(&c) {
                return Err(Error::NotPreferredPair(c));
            }
        }

        let mut codes = Vec::with_capacity(ma.len() + 2);
        codes.push(ma.clone());
        codes.push(mb.clone());
        for tau in 0..mb.len() {
            let shifted = rotated(&mb, tau);
            codes.push(ma.iter().zip(&shifted).map(|(x, y)| x * y).collect());
        }
        Ok(Self { codes })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn code_length(&self) -> usize {
        self.codes.first().map_or(0, Vec::len)
    }

    pub fn get(&self, code_id: usize) -> Option<&[i8]> {
        self.codes.get(code_id).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[i8])> {
        self.codes.iter().map(Vec::as_slice).enumerate()
    }

    /// Repetition-encoded message for `code_id`.
    pub fn message(&self, code_id: usize, v: usize) -> Result<TagMessage> {
        let code = self
            .get(code_id)
            .ok_or_else(|| Error::Config(alloc::format!("code id {code_id} not in set of {}", self.len())))?;
        encode_repetition(code, v, code_id)
    }
}

impl Default for GoldCodeSet {
    fn default() -> Self {
        Self::generate(&LfsrSpec::poly_a(), &LfsrSpec::poly_b()).expect("default pair is preferred")
    }
}

/// The TAG's transmit pattern: each code chip held for `v` SRS periods.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagMessage {
    samples: Vec<i8>,
    pub code_id: usize,
    pub v: usize,
}

impl TagMessage {
    pub fn samples(&self) -> &[i8] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn code_length(&self) -> usize {
        self.samples.len() / self.v
    }

    pub fn duration(&self) -> core::time::Duration {
        timing::message_duration(self.v, self.code_length())
    }

    /// Majority vote over each run of `v` samples.
    pub fn decode(&self) -> Vec<i8> {
        self.samples
            .chunks(self.v)
            .map(|run| {
                let s: i32 = run.iter().map(|&x| i32::from(x)).sum();
                if s >= 0 {
                    1
                } else {
                    -1
                }
            })
            .collect()
    }
}

/// `x'[q + (n-1) v] = x[n]` for `1 <= n <= N`, `1 <= q <= v`.
pub fn encode_repetition(code: &[i8], v: usize, code_id: usize) -> Result<TagMessage> {
    if v < 1 {
        return Err(Error::InvalidRepetition);
    }
    let samples = code
        .iter()
        .flat_map(|&c| core::iter::repeat_n(c, v))
        .collect();
    Ok(TagMessage {
        samples,
        code_id,
        v,
    })
}

/// Antenna state of the TAG during one SRS period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OokState {
    /// Dipole short-circuited, reflecting the UE signal.
    Backscatter,
    /// Dipole open, transparent to the UE signal.
    Transparent,
}

/// State at SRS period `period_index`; the message repeats back to back.
/// A +1 chip means backscatter.
pub fn ook_state(message: &TagMessage, period_index: usize) -> OokState {
    if message.samples[period_index % message.samples.len()] > 0 {
        OokState::Backscatter
    } else {
        OokState::Transparent
    }
}
