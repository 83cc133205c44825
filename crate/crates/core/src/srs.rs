//! Sounding reference signal generation and grid placement.
//!
//! The pilot is a Zadoff-Chu sequence of prime length 139, cyclically
//! extended to fill 144 subcarriers, placed on every other subcarrier of
//! PRBs 13 through 36 in the last OFDM symbol of the SRS subframe.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// Subcarriers carrying one SRS occurrence.
pub const SRS_LENGTH: usize = 144;

/// Subcarriers per physical resource block.
pub const SUBCARRIERS_PER_PRB: usize = 12;

/// Zadoff-Chu generation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZcConfig {
    /// Sequence root `u`.
    pub root: usize,
    pub base_length: usize,
    pub target_length: usize,
}

impl Default for ZcConfig {
    fn default() -> Self {
        Self {
            root: 25,
            base_length: 139,
            target_length: SRS_LENGTH,
        }
    }
}

impl ZcConfig {
    pub fn with_root(root: usize) -> Self {
        Self {
            root,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.base_length) {
            return Err(Error::NonPrimeLength(self.base_length));
        }
        if self.root == 0 || self.root >= self.base_length {
            return Err(Error::RootOutOfRange {
                root: self.root,
                length: self.base_length,
            });
        }
        if self.target_length < self.base_length {
            return Err(Error::TargetTooShort {
                base: self.base_length,
                target: self.target_length,
            });
        }
        Ok(())
    }
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Base sequence `x[m] = exp(-i pi u m (m + 1) / N)`.
///
/// The phase numerator is reduced modulo `2N` in integer arithmetic so the
/// unit modulus holds to the last bit regardless of `m`.
pub fn generate_zc_base(config: &ZcConfig) -> Result<Vec<Complex64>> {
    config.validate()?;
    let n = config.base_length as u64;
    let u = config.root as u64;
    Ok((0..n)
        .map(|m| {
            let k = (u * ((m * (m + 1)) % (2 * n))) % (2 * n);
            Complex64::from_polar(1.0, -PI * k as f64 / n as f64)
        })
        .collect())
}

/// Cyclic extension: `out[n] = base[n mod len(base)]`.
pub fn extend_to_srs(base: &[Complex64], target_length: usize) -> Result<Vec<Complex64>> {
    if base.is_empty() || target_length < base.len() {
        return Err(Error::TargetTooShort {
            base: base.len(),
            target: target_length,
        });
    }
    Ok(base.iter().copied().cycle().take(target_length).collect())
}

/// One SRS occurrence as seen on its 144 subcarriers.
#[derive(Debug, Clone, PartialEq)]
pub struct SrsSymbol {
    values: Vec<Complex64>,
    /// Index `k` of the 10 ms SRS period.
    pub period_index: usize,
}

impl SrsSymbol {
    pub fn new(values: Vec<Complex64>, period_index: usize) -> Result<Self> {
        if values.len() != SRS_LENGTH {
            return Err(Error::SymbolLength {
                expected: SRS_LENGTH,
                got: values.len(),
            });
        }
        Ok(Self {
            values,
            period_index,
        })
    }

    /// The transmitted pilot for `config`, unit amplitude per subcarrier.
    pub fn pilot(config: &ZcConfig, period_index: usize) -> Result<Self> {
        if config.target_length != SRS_LENGTH {
            return Err(Error::SymbolLength {
                expected: SRS_LENGTH,
                got: config.target_length,
            });
        }
        let base = generate_zc_base(config)?;
        Self::new(extend_to_srs(&base, config.target_length)?, period_index)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
}

/// Placement of the SRS on a 10 MHz carrier (50 PRBs).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMapping {
    /// Ordinal of the carrying subframe within the radio frame (1-based).
    pub srs_subframe: usize,
    /// OFDM symbol index within the subframe (normal CP: 0..14).
    pub srs_symbol_position: usize,
    pub total_prbs: usize,
    pub first_prb: usize,
    pub last_prb: usize,
    /// Comb offset; 0 selects even subcarriers.
    pub comb_offset: usize,
}

impl Default for GridMapping {
    fn default() -> Self {
        Self {
            srs_subframe: 8,
            srs_symbol_position: 13,
            total_prbs: 50,
            first_prb: 13,
            last_prb: 36,
            comb_offset: 0,
        }
    }
}

impl GridMapping {
    pub fn subcarrier_count(&self) -> usize {
        self.total_prbs * SUBCARRIERS_PER_PRB
    }

    /// Occupied subcarrier indices, strictly increasing with stride 2.
    pub fn occupied_subcarriers(&self) -> Vec<usize> {
        let start = self.first_prb * SUBCARRIERS_PER_PRB + self.comb_offset;
        let end = (self.last_prb + 1) * SUBCARRIERS_PER_PRB;
        (start..end).step_by(2).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.first_prb > self.last_prb || self.last_prb >= self.total_prbs {
            return Err(Error::Config("SRS PRB range outside the carrier".into()));
        }
        let prbs = self.last_prb + 1 - self.first_prb;
        if self.comb_offset > 1 {
            return Err(Error::Config("comb offset must be 0 or 1".into()));
        }
        if prbs * SUBCARRIERS_PER_PRB / 2 != SRS_LENGTH {
            return Err(Error::Config(alloc::format!(
                "{prbs} PRBs do not hold {SRS_LENGTH} comb subcarriers"
            )));
        }
        Ok(())
    }
}

/// A single OFDM symbol of the resource grid; `None` marks cells not
/// carrying SRS (data or empty).
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub cells: Vec<Option<Complex64>>,
}

impl GridRow {
    pub fn populated(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|v| (i, v)))
    }
}

pub fn map_to_grid(srs: &SrsSymbol, mapping: &GridMapping) -> Result<GridRow> {
    mapping.validate()?;
    let mut cells = alloc::vec![None; mapping.subcarrier_count()];
    for (sc, &v) in mapping.occupied_subcarriers().into_iter().zip(srs.values()) {
        cells[sc] = Some(v);
    }
    Ok(GridRow { cells })
}

/// Reads the SRS back out of its occupied cells.
pub fn extract_from_grid(row: &GridRow, mapping: &GridMapping, period_index: usize) -> Result<SrsSymbol> {
    mapping.validate()?;
    let values = mapping
        .occupied_subcarriers()
        .into_iter()
        .map(|sc| {
            row.cells
                .get(sc)
                .copied()
                .flatten()
                .ok_or_else(|| Error::Config(alloc::format!("subcarrier {sc} carries no SRS")))
        })
        .collect::<Result<Vec<_>>>()?;
    SrsSymbol::new(values, period_index)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic_autocorrelation(x: &[Complex64], lag: usize) -> Complex64 {
        let n = x.len();
        (0..n).map(|i| x[i] * x[(i + lag) % n].conj()).sum::<Complex64>() / n as f64
    }

    #[test]
    fn first_element_is_one() {
        let base = generate_zc_base(&ZcConfig::with_root(1)).unwrap();
        assert_eq!(base.len(), 139);
        assert_eq!(base[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn known_phase() {
        // m = 2, u = 1: phase -pi * 6 / 139
        let base = generate_zc_base(&ZcConfig::with_root(1)).unwrap();
        let expect = Complex64::from_polar(1.0, -PI * 6.0 / 139.0);
        assert!((base[2] - expect).norm() < 1e-15);
    }

    #[test]
    fn unit_modulus_all_roots() {
        for root in 1..139 {
            let base = generate_zc_base(&ZcConfig::with_root(root)).unwrap();
            assert!(base.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn ideal_cyclic_autocorrelation() {
        for root in [1, 25, 138] {
            let base = generate_zc_base(&ZcConfig::with_root(root)).unwrap();
            assert!((cyclic_autocorrelation(&base, 0).norm() - 1.0).abs() < 1e-12);
            for lag in 1..base.len() {
                assert!(cyclic_autocorrelation(&base, lag).norm() < 1e-9, "root {root} lag {lag}");
            }
        }
    }

    #[test]
    fn config_errors() {
        let bad = ZcConfig {
            base_length: 140,
            ..ZcConfig::default()
        };
        assert_eq!(generate_zc_base(&bad), Err(Error::NonPrimeLength(140)));
        assert!(matches!(
            generate_zc_base(&ZcConfig::with_root(0)),
            Err(Error::RootOutOfRange { .. })
        ));
        assert!(matches!(
            generate_zc_base(&ZcConfig::with_root(139)),
            Err(Error::RootOutOfRange { .. })
        ));
        let short = ZcConfig {
            target_length: 100,
            ..ZcConfig::default()
        };
        assert!(matches!(short.validate(), Err(Error::TargetTooShort { .. })));
    }

    #[test]
    fn cyclic_extension() {
        let base = generate_zc_base(&ZcConfig::default()).unwrap();
        let ext = extend_to_srs(&base, 144).unwrap();
        assert_eq!(ext.len(), 144);
        assert_eq!(&ext[139..], &base[..5]);
        assert!(ext.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));

        let four = [Complex64::new(1.0, 2.0); 4];
        assert_eq!(extend_to_srs(&four, 4).unwrap(), four.to_vec());
        assert!(matches!(extend_to_srs(&four, 3), Err(Error::TargetTooShort { .. })));
    }

    #[test]
    fn symbol_length_checked() {
        assert!(matches!(
            SrsSymbol::new(alloc::vec![Complex64::new(1.0, 0.0); 143], 0),
            Err(Error::SymbolLength { got: 143, .. })
        ));
    }

    #[test]
    fn grid_layout() {
        let mapping = GridMapping::default();
        let sc = mapping.occupied_subcarriers();
        assert_eq!(sc.len(), 144);
        assert!(sc.windows(2).all(|w| w[1] == w[0] + 2));
        assert_eq!(sc[0] / SUBCARRIERS_PER_PRB, 13);
        assert_eq!(sc[143] / SUBCARRIERS_PER_PRB, 36);
        // centred on the 600-subcarrier carrier
        let mid = (sc[0] + sc[143]) as f64 / 2.0;
        assert!((mid - 300.0).abs() <= 1.0);
    }

    #[test]
    fn grid_round_trip() {
        let mapping = GridMapping::default();
        let srs = SrsSymbol::pilot(&ZcConfig::default(), 3).unwrap();
        let row = map_to_grid(&srs, &mapping).unwrap();
        assert_eq!(row.populated().count(), 144);
        let occupied = mapping.occupied_subcarriers();
        assert!(row.populated().map(|(i, _)| i).eq(occupied.iter().copied()));
        let back = extract_from_grid(&row, &mapping, 3).unwrap();
        assert_eq!(back, srs);
    }

    #[test]
    fn bad_mapping_rejected() {
        let mapping = GridMapping {
            last_prb: 30,
            ..GridMapping::default()
        };
        assert!(mapping.validate().is_err());
    }
}
