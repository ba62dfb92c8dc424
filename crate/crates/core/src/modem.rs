//! Square M-QAM (and BPSK) mapping with a per-dimension PAM digit view.
//!
//! Every symbol is described by one digit per real dimension, `d ∈ [0, q)`,
//! placed at amplitude `(2d − (q − 1)) · scale`. The PNC relay works on these
//! digits directly, so the bit labeling only matters at the edges of the
//! link (payload in, payload out).

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// Bit-to-digit labeling inside one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Labeling {
    /// Digit index written in plain binary, MSB first.
    #[default]
    Natural,
    /// Binary-reflected Gray code of the digit index.
    Gray,
}

impl Labeling {
    fn encode(self, digit: u16) -> u16 {
        match self {
            Labeling::Natural => digit,
            Labeling::Gray => digit ^ (digit >> 1),
        }
    }

    fn decode(self, label: u16) -> u16 {
        match self {
            Labeling::Natural => label,
            Labeling::Gray => {
                let mut d = label;
                let mut shift = label >> 1;
                while shift != 0 {
                    d ^= shift;
                    shift >>= 1;
                }
                d
            }
        }
    }
}

/// Per-dimension digits of one symbol. `quadrature` is `None` for BPSK.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DigitPair {
    pub inphase: u16,
    pub quadrature: Option<u16>,
}

impl DigitPair {
    pub const fn new(inphase: u16, quadrature: u16) -> Self {
        Self { inphase, quadrature: Some(quadrature) }
    }

    pub const fn real(inphase: u16) -> Self {
        Self { inphase, quadrature: None }
    }

    /// Applies `f` to every present dimension.
    pub fn map(self, mut f: impl FnMut(u16) -> u16) -> Self {
        Self { inphase: f(self.inphase), quadrature: self.quadrature.map(f) }
    }

    /// Combines two digit pairs dimension by dimension.
    pub fn zip_with(self, other: Self, mut f: impl FnMut(u16, u16) -> u16) -> Self {
        Self {
            inphase: f(self.inphase, other.inphase),
            quadrature: match (self.quadrature, other.quadrature) {
                (Some(a), Some(b)) => Some(f(a, b)),
                _ => None,
            },
        }
    }
}

/// An M-QAM alphabet with unit average symbol energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulation<T> {
    order: u32,
    levels: u16,
    bits_per_digit: u32,
    scale: T,
    labeling: Labeling,
}

impl<T: Scalar> Modulation<T> {
    pub const SUPPORTED_ORDERS: [u32; 4] = [2, 4, 16, 64];

    /// Builds the alphabet for `order ∈ {2, 4, 16, 64}` with natural labeling.
    pub fn new(order: u32) -> Result<Self> {
        let (levels, scale) = match order {
            2 => (2u16, T::one()),
            4 | 16 | 64 => {
                let q = (order as f64).sqrt().round() as u16;
                // mean |p|² of the unnormalized grid is 2(M − 1)/3
                let scale = (3.0 / (2.0 * (order as f64 - 1.0))).sqrt();
                (q, T::lit(scale))
            }
            _ => {
                return Err(Error::domain(format!(
                    "unsupported modulation order {order}; valid orders are {{2, 4, 16, 64}}"
                )))
            }
        };
        Ok(Self { order, levels, bits_per_digit: levels.trailing_zeros(), scale, labeling: Labeling::Natural })
    }

    pub fn with_labeling(mut self, labeling: Labeling) -> Self {
        self.labeling = labeling;
        self
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Digits per dimension, `q`.
    pub fn levels(&self) -> u16 {
        self.levels
    }

    pub fn is_bpsk(&self) -> bool {
        self.order == 2
    }

    /// Number of real dimensions carrying digits (1 for BPSK, else 2).
    pub fn dims(&self) -> usize {
        if self.is_bpsk() {
            1
        } else {
            2
        }
    }

    pub fn bits_per_digit(&self) -> u32 {
        self.bits_per_digit
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_digit * self.dims() as u32
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn labeling(&self) -> Labeling {
        self.labeling
    }

    /// Every digit pair of the alphabet, inphase-major.
    pub fn digit_pairs(&self) -> Vec<DigitPair> {
        let q = self.levels;
        if self.is_bpsk() {
            (0..q).map(DigitPair::real).collect()
        } else {
            (0..q).flat_map(|i| (0..q).map(move |k| DigitPair::new(i, k))).collect()
        }
    }

    /// Groups `bits` into digit pairs, inphase bits first, MSB first.
    pub fn bits_to_digits(&self, bits: &[u8]) -> Result<Vec<DigitPair>> {
        let per_symbol = self.bits_per_symbol() as usize;
        if !bits.len().is_multiple_of(per_symbol) {
            return Err(Error::InputShape {
                what: "bit count (multiple of bits per symbol)",
                expected: bits.len().next_multiple_of(per_symbol),
                actual: bits.len(),
            });
        }
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::domain(format!("bit value {bad} is not 0 or 1")));
        }
        let k = self.bits_per_digit as usize;
        Ok(bits
            .chunks_exact(per_symbol)
            .map(|chunk| {
                let inphase = self.pack_digit(&chunk[..k]);
                if self.is_bpsk() {
                    DigitPair::real(inphase)
                } else {
                    DigitPair::new(inphase, self.pack_digit(&chunk[k..]))
                }
            })
            .collect())
    }

    /// Appends the labeled bits of `d` to `out`.
    pub fn digits_to_bits(&self, d: DigitPair, out: &mut Vec<u8>) {
        self.unpack_digit(d.inphase, out);
        if let Some(q) = d.quadrature {
            self.unpack_digit(q, out);
        }
    }

    fn pack_digit(&self, bits: &[u8]) -> u16 {
        let label = bits.iter().fold(0u16, |acc, &b| (acc << 1) | b as u16);
        self.labeling.decode(label)
    }

    fn unpack_digit(&self, digit: u16, out: &mut Vec<u8>) {
        let label = self.labeling.encode(digit);
        for shift in (0..self.bits_per_digit).rev() {
            out.push(((label >> shift) & 1) as u8);
        }
    }

    /// Number of differing labeled bits between two digit pairs.
    pub fn bit_distance(&self, a: DigitPair, b: DigitPair) -> u32 {
        let da = (self.labeling.encode(a.inphase) ^ self.labeling.encode(b.inphase)).count_ones();
        let dq = match (a.quadrature, b.quadrature) {
            (Some(x), Some(y)) => (self.labeling.encode(x) ^ self.labeling.encode(y)).count_ones(),
            _ => 0,
        };
        da + dq
    }

    fn check_digits(&self, d: DigitPair) -> Result<()> {
        let q = self.levels;
        let shape_ok = d.quadrature.is_some() != self.is_bpsk();
        let range_ok = d.inphase < q && d.quadrature.is_none_or(|x| x < q);
        if shape_ok && range_ok {
            Ok(())
        } else {
            Err(Error::domain(format!("digit pair {d:?} out of range for {}-QAM (q = {q})", self.order)))
        }
    }

    /// Real amplitude of one digit, `(2d − (q − 1)) · scale`.
    #[inline]
    pub(crate) fn amplitude(&self, digit: u16) -> T {
        let centered = 2 * digit as i32 - (self.levels as i32 - 1);
        T::lit(centered as f64) * self.scale
    }

    #[inline]
    pub(crate) fn symbol(&self, d: DigitPair) -> Complex<T> {
        Complex::new(self.amplitude(d.inphase), d.quadrature.map_or(T::zero(), |q| self.amplitude(q)))
    }

    pub fn digits_to_symbol(&self, d: DigitPair) -> Result<Complex<T>> {
        self.check_digits(d)?;
        Ok(self.symbol(d))
    }

    /// Nearest digit to the unscaled coordinate `u`; ties go to the smaller digit.
    #[inline]
    fn slice(&self, u: T) -> u16 {
        let top = self.levels - 1;
        let v = (u + T::lit(top as f64)) / T::lit(2.0);
        let d = (v - T::lit(0.5)).ceil();
        if d.is_nan() || d <= T::zero() {
            0
        } else if d >= T::lit(top as f64) {
            top
        } else {
            d.to_u16().unwrap_or(0)
        }
    }

    /// Single-user minimum-distance detection by per-dimension slicing.
    pub fn detect_symbol(&self, y: Complex<T>) -> DigitPair {
        let inphase = self.slice(y.re / self.scale);
        if self.is_bpsk() {
            DigitPair::real(inphase)
        } else {
            DigitPair::new(inphase, self.slice(y.im / self.scale))
        }
    }
}
