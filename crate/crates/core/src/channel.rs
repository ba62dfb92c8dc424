//! Cascaded UE → RIS → relay channels and channel estimation error.
//!
//! Each link is free-space path loss times i.i.d. unit-variance complex
//! Gaussian (Rayleigh) fading per RIS element. The estimated copies used to
//! configure the surfaces are the true coefficients plus independent complex
//! Gaussian error.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space power ratio `(c / (4π d f_c))²`.
pub fn free_space_path_loss<T: Scalar>(distance_m: T, carrier_hz: T) -> Result<T> {
    if !(distance_m > T::zero()) || !(carrier_hz > T::zero()) {
        return Err(Error::domain(format!(
            "path loss needs positive distance and frequency, got d = {distance_m} m, f = {carrier_hz} Hz"
        )));
    }
    let amp = T::lit(SPEED_OF_LIGHT) / (T::lit(4.0) * T::PI() * distance_m * carrier_hz);
    Ok(amp * amp)
}

/// Zero-mean circularly symmetric complex Gaussian with the given variance.
#[inline]
pub fn complex_gaussian<T: Scalar, R: Rng + ?Sized>(rng: &mut R, variance: T) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let sigma = (variance / T::lit(2.0)).sqrt();
    Complex::new(T::lit(re) * sigma, T::lit(im) * sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }
}

/// Node positions in meters and the carrier frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NodeGeometry {
    pub ue_a: Point3,
    pub ue_b: Point3,
    pub ris_a: Point3,
    pub ris_b: Point3,
    pub relay: Point3,
    pub carrier_hz: f64,
}

impl Default for NodeGeometry {
    fn default() -> Self {
        Self {
            ue_a: Point3::new(0.0, 2.0, 1.5),
            ue_b: Point3::new(0.0, 30.0, 1.5),
            ris_a: Point3::new(0.0, 8.0, 2.5),
            ris_b: Point3::new(0.0, 22.0, 2.5),
            relay: Point3::new(0.0, 14.0, 2.0),
            carrier_hz: 28e9,
        }
    }
}

/// Power path-loss factors of the four hops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLosses<T> {
    pub h_a: T,
    pub g_a: T,
    pub h_b: T,
    pub g_b: T,
}

impl NodeGeometry {
    pub fn path_losses<T: Scalar>(&self) -> Result<PathLosses<T>> {
        let fc = T::lit(self.carrier_hz);
        let pl = |p: &Point3, q: &Point3| free_space_path_loss(T::lit(p.distance(q)), fc);
        Ok(PathLosses {
            h_a: pl(&self.ue_a, &self.ris_a)?,
            g_a: pl(&self.ris_a, &self.relay)?,
            h_b: pl(&self.ue_b, &self.ris_b)?,
            g_b: pl(&self.ris_b, &self.relay)?,
        })
    }
}

/// One UE's cascaded channel: UE → RIS (`h`) and RIS → relay (`g`), per element.
#[derive(Debug, Clone, PartialEq)]
pub struct SideChannel<T> {
    pub h: Vec<Complex<T>>,
    pub g: Vec<Complex<T>>,
    pub h_est: Vec<Complex<T>>,
    pub g_est: Vec<Complex<T>>,
    pub pl_h: T,
    pub pl_g: T,
}

impl<T: Scalar> SideChannel<T> {
    fn sample<R: Rng + ?Sized>(elements: usize, pl_h: T, pl_g: T, rng: &mut R) -> Self {
        let (amp_h, amp_g) = (pl_h.sqrt(), pl_g.sqrt());
        let h: Vec<_> = (0..elements).map(|_| complex_gaussian::<T, _>(rng, T::one()) * amp_h).collect();
        let g: Vec<_> = (0..elements).map(|_| complex_gaussian::<T, _>(rng, T::one()) * amp_g).collect();
        Self { h_est: h.clone(), g_est: g.clone(), h, g, pl_h, pl_g }
    }

    pub fn elements(&self) -> usize {
        self.h.len()
    }
}

/// Both sides' channels for one PNC round, reused for MA and BC phases.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T> {
    pub a: SideChannel<T>,
    pub b: SideChannel<T>,
}

/// Draws one realization with `elements` RIS elements per side.
///
/// Estimates start out equal to the true channels; see [`apply_cee`].
pub fn sample_realization<T: Scalar, R: Rng + ?Sized>(
    geometry: &NodeGeometry,
    elements: usize,
    rng: &mut R,
) -> Result<ChannelRealization<T>> {
    if elements == 0 {
        return Err(Error::domain("a RIS needs at least one element"));
    }
    let pl = geometry.path_losses::<T>()?;
    let a = SideChannel::sample(elements, pl.h_a, pl.g_a, rng);
    let b = SideChannel::sample(elements, pl.h_b, pl.g_b, rng);
    Ok(ChannelRealization { a, b })
}

/// How the CEE level is turned into an error variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CeeMode {
    /// The level is read as dBm, `10^((x − 30)/10)` watts, and used directly
    /// as the error variance on the raw coefficients.
    #[default]
    Absolute,
    /// The level is dB relative to each link's mean coefficient power.
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CeeSpec {
    /// `None` disables estimation error.
    pub level_db: Option<f64>,
    pub mode: CeeMode,
}

impl CeeSpec {
    pub fn off() -> Self {
        Self::default()
    }

    pub fn absolute(level_dbm: f64) -> Self {
        Self { level_db: Some(level_dbm), mode: CeeMode::Absolute }
    }

    pub fn relative(level_db: f64) -> Self {
        Self { level_db: Some(level_db), mode: CeeMode::Relative }
    }

    /// Linear error variance for a link whose mean coefficient power is `link_power`.
    pub fn variance(&self, link_power: f64) -> f64 {
        match (self.level_db, self.mode) {
            (None, _) => 0.0,
            (Some(x), CeeMode::Absolute) => 10f64.powf((x - 30.0) / 10.0),
            (Some(x), CeeMode::Relative) => link_power * 10f64.powf(x / 10.0),
        }
    }
}

fn corrupt<T: Scalar, R: Rng + ?Sized>(truth: &[Complex<T>], estimate: &mut [Complex<T>], variance: T, rng: &mut R) {
    for (est, &t) in estimate.iter_mut().zip(truth) {
        *est = t + complex_gaussian(rng, variance);
    }
}

/// Replaces the estimates by true channels plus independent `CN(0, σ²)` error.
///
/// The draws are consumed even when the variance is zero, so the random
/// stream stays aligned across CEE levels.
pub fn apply_cee<T: Scalar, R: Rng + ?Sized>(
    mut real: ChannelRealization<T>,
    spec: &CeeSpec,
    rng: &mut R,
) -> Result<ChannelRealization<T>> {
    for side in [&mut real.a, &mut real.b] {
        let var_h = spec.variance(side.pl_h.to_f64_lossy());
        let var_g = spec.variance(side.pl_g.to_f64_lossy());
        if !var_h.is_finite() || !var_g.is_finite() || var_h < 0.0 || var_g < 0.0 {
            return Err(Error::domain(format!(
                "CEE variance must be finite and non-negative, got {var_h:e} / {var_g:e}"
            )));
        }
        corrupt(&side.h, &mut side.h_est, T::lit(var_h), rng);
        corrupt(&side.g, &mut side.g_est, T::lit(var_g), rng);
    }
    Ok(real)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fspl_examples() {
        // hand evaluation: λ = c/f, (λ / 4π)² at 1 m
        let lambda = 299_792_458.0 / 28e9;
        let hand = (lambda / (4.0 * std::f64::consts::PI)).powi(2);
        let one = free_space_path_loss(1.0, 28e9).unwrap();
        assert_relative_eq!(one, hand, max_relative = 1e-14);
        assert_relative_eq!(one, 7.27e-7, max_relative = 5e-3);
        assert_relative_eq!(10.0 * one.log10(), -61.39, epsilon = 0.01);

        let two = free_space_path_loss(2.0, 28e9).unwrap();
        assert_relative_eq!(two, one / 4.0, max_relative = 1e-15);

        let g = NodeGeometry::default();
        let d = g.ue_a.distance(&g.ris_a);
        assert_relative_eq!(d, 37f64.sqrt(), max_relative = 1e-15);
        let pl = g.path_losses::<f64>().unwrap();
        assert_relative_eq!(pl.h_a, hand / 37.0, max_relative = 1e-12);
        assert_relative_eq!(pl.g_a, hand / 36.25, max_relative = 1e-12);
        assert_relative_eq!(pl.h_b, hand / 65.0, max_relative = 1e-12);
        assert_relative_eq!(pl.g_b, hand / 64.25, max_relative = 1e-12);
    }

    #[test]
    fn fspl_rejects_bad_input() {
        assert!(free_space_path_loss(0.0, 28e9).is_err());
        assert!(free_space_path_loss(1.0, -1.0).is_err());
        assert!(free_space_path_loss(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = NodeGeometry::default();
        let r1: ChannelRealization<f64> = sample_realization(&g, 1, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let r2: ChannelRealization<f64> = sample_realization(&g, 1, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(r1, r2);
        assert!(sample_realization::<f64, _>(&g, 0, &mut ChaCha8Rng::seed_from_u64(9)).is_err());
    }

    #[test]
    fn fading_has_unit_second_moment() {
        let g = NodeGeometry::default();
        let n = 10_000;
        let r: ChannelRealization<f64> = sample_realization(&g, n, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for (v, pl) in [(&r.a.h, r.a.pl_h), (&r.a.g, r.a.pl_g), (&r.b.h, r.b.pl_h), (&r.b.g, r.b.pl_g)] {
            let m2 = v.iter().map(|c| c.norm_sqr() / pl).sum::<f64>() / n as f64;
            assert!((m2 - 1.0).abs() < 0.05, "second moment {m2}");
        }
    }

    #[test]
    fn zero_cee_leaves_estimates_exact() {
        let g = NodeGeometry::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r: ChannelRealization<f64> = sample_realization(&g, 32, &mut rng).unwrap();
        let off = apply_cee(r.clone(), &CeeSpec::off(), &mut rng).unwrap();
        assert_eq!(off.a.h_est, r.a.h);
        assert_eq!(off.b.g_est, r.b.g);
        let zero = apply_cee(r.clone(), &CeeSpec::absolute(f64::NEG_INFINITY), &mut rng).unwrap();
        assert_eq!(zero.a.g_est, r.a.g);
    }

    #[test]
    fn cee_variance_and_independence() {
        let g = NodeGeometry::default();
        let n = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r: ChannelRealization<f64> = sample_realization(&g, n, &mut rng).unwrap();
        let spec = CeeSpec::absolute(-70.0);
        let v = 1e-10;
        assert_relative_eq!(spec.variance(1.0), v, max_relative = 1e-12);
        let c = apply_cee(r.clone(), &spec, &mut rng).unwrap();
        assert_eq!(c.a.h, r.a.h, "true channels untouched");

        let eh: Vec<_> = c.a.h_est.iter().zip(&c.a.h).map(|(e, t)| e - t).collect();
        let eg: Vec<_> = c.a.g_est.iter().zip(&c.a.g).map(|(e, t)| e - t).collect();
        let var = |e: &[Complex<f64>]| e.iter().map(|x| x.norm_sqr()).sum::<f64>() / n as f64;
        assert!((var(&eh) / v - 1.0).abs() < 0.05);
        assert!((var(&eg) / v - 1.0).abs() < 0.05);

        let cross: Complex<f64> = eh.iter().zip(&eg).map(|(a, b)| a * b.conj()).sum();
        let rho = cross.norm() / n as f64 / (var(&eh) * var(&eg)).sqrt();
        assert!(rho < 0.05, "correlation {rho}");
    }

    #[test]
    fn relative_mode_scales_with_link_power() {
        let spec = CeeSpec::relative(-10.0);
        assert_relative_eq!(spec.variance(2e-8), 2e-9, max_relative = 1e-12);
    }
}
