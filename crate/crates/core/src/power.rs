//! UE transmit power control.
//!
//! The UE with the weaker effective gain transmits at `P_max`; the other
//! backs off to `γ² P_max` with `γ = |α_weak| / |α_strong|`, so both
//! branches reach the relay with the same amplitude.

use crate::ris::EffectiveGain;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAllocation<T> {
    /// Watts.
    pub p_a: T,
    /// Watts.
    pub p_b: T,
    /// `min(|α_A|, |α_B|) / max(|α_A|, |α_B|)`, in `(0, 1]`.
    pub gamma: T,
    pub p_max: T,
}

impl<T: Scalar> PowerAllocation<T> {
    /// Both UEs at full power, no equalization.
    pub fn uncontrolled(p_max: T) -> Self {
        Self { p_a: p_max, p_b: p_max, gamma: T::one(), p_max }
    }

    /// Received amplitudes `(√P_A |α_A|, √P_B |α_B|)`.
    pub fn arrival_amplitudes(&self, alpha_a: EffectiveGain<T>, alpha_b: EffectiveGain<T>) -> (T, T) {
        (self.p_a.sqrt() * alpha_a.magnitude(), self.p_b.sqrt() * alpha_b.magnitude())
    }
}

pub fn allocate<T: Scalar>(
    alpha_a: EffectiveGain<T>,
    alpha_b: EffectiveGain<T>,
    p_max: T,
) -> Result<PowerAllocation<T>> {
    if !(p_max > T::zero()) || !p_max.is_finite() {
        return Err(Error::domain(format!("P_max must be positive, got {p_max}")));
    }
    let (mag_a, mag_b) = (alpha_a.magnitude(), alpha_b.magnitude());
    if !(mag_a > T::zero()) || !(mag_b > T::zero()) {
        return Err(Error::AllocationImpossible);
    }
    let alloc = if mag_a >= mag_b {
        let gamma = mag_b / mag_a;
        PowerAllocation { p_a: gamma * gamma * p_max, p_b: p_max, gamma, p_max }
    } else {
        let gamma = mag_a / mag_b;
        PowerAllocation { p_a: p_max, p_b: gamma * gamma * p_max, gamma, p_max }
    };
    Ok(alloc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex;
    use proptest::prelude::*;

    fn gain(re: f64, im: f64) -> EffectiveGain<f64> {
        EffectiveGain(Complex::new(re, im))
    }

    #[test]
    fn asymmetric_example() {
        let p = allocate(gain(2.0, 0.0), gain(1.0, 0.0), 0.1).unwrap();
        assert_relative_eq!(p.p_b, 0.1);
        assert_relative_eq!(p.gamma, 0.5);
        assert_relative_eq!(p.p_a, 0.025, max_relative = 1e-15);
    }

    #[test]
    fn symmetric_example() {
        let p = allocate(gain(0.0, 3.0), gain(3.0, 0.0), 2.0).unwrap();
        assert_eq!((p.p_a, p.p_b, p.gamma), (2.0, 2.0, 1.0));
    }

    #[test]
    fn zero_gain_is_impossible() {
        assert_eq!(allocate(gain(0.0, 0.0), gain(1.0, 0.0), 1.0), Err(Error::AllocationImpossible));
        assert_eq!(allocate(gain(1.0, 0.0), gain(0.0, 0.0), 1.0), Err(Error::AllocationImpossible));
        assert!(allocate(gain(1.0, 0.0), gain(1.0, 0.0), 0.0).is_err());
    }

    proptest! {
        #[test]
        fn equal_arrival_and_cap(
            ar in -1e-6f64..1e-6, ai in -1e-6f64..1e-6,
            br in -1e-6f64..1e-6, bi in -1e-6f64..1e-6,
            p_max in 1e-6f64..10.0,
            k in 1e-3f64..1e3,
        ) {
            let (a, b) = (gain(ar, ai), gain(br, bi));
            prop_assume!(a.magnitude() > 0.0 && b.magnitude() > 0.0);
            let p = allocate(a, b, p_max).unwrap();
            let (ra, rb) = p.arrival_amplitudes(a, b);
            prop_assert!((ra - rb).abs() <= 1e-12 * ra.max(rb));
            prop_assert!(p.p_a <= p_max && p.p_b <= p_max);
            prop_assert_eq!(p.p_a.max(p.p_b), p_max);
            prop_assert!(p.gamma > 0.0 && p.gamma <= 1.0);

            let scaled = allocate(gain(ar * k, ai * k), gain(br * k, bi * k), p_max).unwrap();
            prop_assert!((scaled.p_a - p.p_a).abs() <= 1e-12 * p_max);
            prop_assert!((scaled.p_b - p.p_b).abs() <= 1e-12 * p_max);
        }
    }
}
