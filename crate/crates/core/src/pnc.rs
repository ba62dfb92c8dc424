//! Relay-side denoising map and UE-side peer recovery.
//!
//! With both branches arriving at equal real amplitude, each real dimension
//! of the superposed symbol lies on a `(2q − 1)`-level PAM grid indexed by
//! the digit sum `s = a + b`. The relay slices to the nearest `s` and
//! forwards `z = s mod q`; a UE holding its own digit `a` recovers the peer
//! as `(z − a) mod q`. For BPSK this is XOR.

use num_complex::Complex;

use crate::modem::{DigitPair, Modulation};
use crate::{Error, Result, Scalar};

/// Per-dimension digit sums of the two superposed symbols, each in `[0, 2q − 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SuperposedLevel {
    pub inphase: u16,
    pub quadrature: Option<u16>,
}

impl SuperposedLevel {
    /// Folds the sums onto network-coded digits, `z = s mod q`.
    pub fn alias(self, levels: u16) -> NetworkCodedDigit {
        NetworkCodedDigit(DigitPair { inphase: self.inphase % levels, quadrature: self.quadrature.map(|s| s % levels) })
    }
}

/// The relay's per-dimension modular-sum digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NetworkCodedDigit(pub DigitPair);

impl NetworkCodedDigit {
    pub fn digits(self) -> DigitPair {
        self.0
    }
}

/// Noiseless ground truth: `z = (a + b) mod q` per dimension.
pub fn pnc_map_digits<T: Scalar>(a: DigitPair, b: DigitPair, m: &Modulation<T>) -> NetworkCodedDigit {
    let q = m.levels();
    NetworkCodedDigit(a.zip_with(b, |x, y| (x + y) % q))
}

/// `peer = (z − own) mod q` per dimension.
pub fn recover_peer<T: Scalar>(z: NetworkCodedDigit, own: DigitPair, m: &Modulation<T>) -> DigitPair {
    let q = m.levels();
    z.0.zip_with(own, |zd, od| (zd % q + q - od % q) % q)
}

/// Nearest superposed level per dimension after normalizing by the common
/// branch amplitude. Ties go to the smaller sum.
pub fn slice_superposed<T: Scalar>(y: Complex<T>, branch_gain: T, m: &Modulation<T>) -> Result<SuperposedLevel> {
    if !(branch_gain > T::zero()) || !branch_gain.is_finite() {
        return Err(Error::domain(format!("branch gain must be positive and finite, got {branch_gain}")));
    }
    let unit = branch_gain * m.scale();
    let top = 2 * (m.levels() - 1);
    let slice = |v: T| -> u16 {
        // levels sit at 2s − 2(q − 1); solve for s and round half down
        let s = (v / unit / T::lit(2.0) + T::lit((m.levels() - 1) as f64) - T::lit(0.5)).ceil();
        if s.is_nan() || s <= T::zero() {
            0
        } else if s >= T::lit(top as f64) {
            top
        } else {
            s.to_u16().unwrap_or(0)
        }
    };
    Ok(SuperposedLevel { inphase: slice(y.re), quadrature: (!m.is_bpsk()).then(|| slice(y.im)) })
}

/// Denoising PNC detection: slice the superposed grid, then alias mod `q`.
pub fn relay_detect<T: Scalar>(y: Complex<T>, branch_gain: T, m: &Modulation<T>) -> Result<NetworkCodedDigit> {
    Ok(slice_superposed(y, branch_gain, m)?.alias(m.levels()))
}
