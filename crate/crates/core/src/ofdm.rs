//! 64-point OFDM framing with a 16-sample cyclic prefix.
//!
//! Subcarriers follow the 802.11a/p layout: logical indices −26..=26
//! without DC, pilots at ±7 and ±21, the remaining 48 carry data, and DC
//! plus the band edges are null. Logical index `k` maps to DFT bin
//! `k mod 64`. Transforms are unitary (`1/√64` both ways).

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result, Scalar};

pub const FFT_LEN: usize = 64;
pub const CP_LEN: usize = FFT_LEN / 4;
pub const SYMBOL_LEN: usize = FFT_LEN + CP_LEN;
pub const DATA_CARRIERS: usize = 48;
pub const PILOT_CARRIERS: usize = 4;

/// Logical pilot indices and their fixed polarity.
pub const PILOT_LAYOUT: [(i32, f64); PILOT_CARRIERS] = [(-21, 1.0), (-7, 1.0), (7, 1.0), (21, -1.0)];

/// Assignment of DFT bins to data, pilot and null carriers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OfdmGrid {
    pub data_bins: Vec<usize>,
    pub pilot_bins: Vec<usize>,
    pub null_bins: Vec<usize>,
}

fn bin_of(logical: i32) -> usize {
    logical.rem_euclid(FFT_LEN as i32) as usize
}

impl Default for OfdmGrid {
    fn default() -> Self {
        let pilots: Vec<i32> = PILOT_LAYOUT.iter().map(|&(k, _)| k).collect();
        let data_bins = (-26..=26).filter(|k| *k != 0 && !pilots.contains(k)).map(bin_of).collect();
        let pilot_bins: Vec<usize> = pilots.iter().map(|&k| bin_of(k)).collect();
        let used: Vec<usize> = (-26..=26).filter(|k| *k != 0).map(bin_of).collect();
        let null_bins = (0..FFT_LEN).filter(|b| !used.contains(b)).collect();
        Self { data_bins, pilot_bins, null_bins }
    }
}

impl OfdmGrid {
    /// Human-readable layout, recorded next to results.
    pub fn describe(&self) -> String {
        format!(
            "fft={FFT_LEN} cp={CP_LEN} data={} pilots={} (logical -21,-7,7,21) nulls={} (DC, ±27..±32)",
            self.data_bins.len(),
            self.pilot_bins.len(),
            self.null_bins.len()
        )
    }

    /// The fixed pilot values, in `pilot_bins` order.
    pub fn pilot_values<T: Scalar>(&self) -> Vec<Complex<T>> {
        PILOT_LAYOUT.iter().map(|&(_, v)| Complex::new(T::lit(v), T::zero())).collect()
    }
}

/// One cyclic-prefixed OFDM symbol, 80 time samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDomainSymbol<T>(Vec<Complex<T>>);

impl<T: Scalar> TimeDomainSymbol<T> {
    pub fn from_samples(samples: Vec<Complex<T>>) -> Result<Self> {
        if samples.len() != SYMBOL_LEN {
            return Err(Error::InputShape { what: "OFDM time samples", expected: SYMBOL_LEN, actual: samples.len() });
        }
        Ok(Self(samples))
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.0
    }

    pub fn samples_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.0
    }

    pub fn into_samples(self) -> Vec<Complex<T>> {
        self.0
    }
}

/// Frequency-domain view of a received symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Subcarriers<T> {
    pub data: Vec<Complex<T>>,
    pub pilots: Vec<Complex<T>>,
}

/// Planned transforms plus the carrier layout. Cheap to share across threads.
#[derive(Clone)]
pub struct OfdmModem<T: Scalar> {
    grid: OfdmGrid,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    norm: T,
}

impl<T: Scalar> std::fmt::Debug for OfdmModem<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OfdmModem").field("grid", &self.grid).finish()
    }
}

impl<T: Scalar> Default for OfdmModem<T> {
    fn default() -> Self {
        Self::new(OfdmGrid::default())
    }
}

impl<T: Scalar> OfdmModem<T> {
    pub fn new(grid: OfdmGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(FFT_LEN),
            inverse: planner.plan_fft_inverse(FFT_LEN),
            norm: T::lit(FFT_LEN as f64).sqrt().recip(),
            grid,
        }
    }

    pub fn grid(&self) -> &OfdmGrid {
        &self.grid
    }

    pub fn assemble(&self, data: &[Complex<T>], pilots: &[Complex<T>]) -> Result<TimeDomainSymbol<T>> {
        if data.len() != self.grid.data_bins.len() {
            return Err(Error::InputShape {
                what: "data subcarrier values",
                expected: self.grid.data_bins.len(),
                actual: data.len(),
            });
        }
        if pilots.len() != self.grid.pilot_bins.len() {
            return Err(Error::InputShape {
                what: "pilot subcarrier values",
                expected: self.grid.pilot_bins.len(),
                actual: pilots.len(),
            });
        }
        let mut out = vec![Complex::new(T::zero(), T::zero()); SYMBOL_LEN];
        {
            let body = &mut out[CP_LEN..];
            for (&bin, &v) in self.grid.data_bins.iter().zip(data) {
                body[bin] = v;
            }
            for (&bin, &v) in self.grid.pilot_bins.iter().zip(pilots) {
                body[bin] = v;
            }
            self.inverse.process(body);
            for s in body.iter_mut() {
                *s = *s * self.norm;
            }
        }
        out.copy_within(FFT_LEN..SYMBOL_LEN, 0);
        Ok(TimeDomainSymbol(out))
    }

    pub fn disassemble(&self, rx: &TimeDomainSymbol<T>) -> Result<Subcarriers<T>> {
        if rx.0.len() != SYMBOL_LEN {
            return Err(Error::InputShape { what: "OFDM time samples", expected: SYMBOL_LEN, actual: rx.0.len() });
        }
        let mut bins = rx.0[CP_LEN..].to_vec();
        self.forward.process(&mut bins);
        let pick = |idx: &[usize]| idx.iter().map(|&b| bins[b] * self.norm).collect::<Vec<_>>();
        Ok(Subcarriers { data: pick(&self.grid.data_bins), pilots: pick(&self.grid.pilot_bins) })
    }
}
