//! RIS phase configuration and the resulting effective cascaded gain.

use num_complex::Complex;
use rand::Rng;

use crate::{Error, Result, Scalar};

/// Per-element reflection coefficients `μ_i e^{jθ_i}` of one surface.
#[derive(Debug, Clone, PartialEq)]
pub struct RisPhaseConfig<T> {
    /// Phases in `[0, 2π)`.
    pub phases: Vec<T>,
    /// Amplitudes in `[0, 1]`.
    pub amplitudes: Vec<T>,
}

impl<T: Scalar> RisPhaseConfig<T> {
    /// Lossless reflection with the given phases.
    pub fn lossless(phases: Vec<T>) -> Self {
        let amplitudes = vec![T::one(); phases.len()];
        Self { phases, amplitudes }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn reflection(&self, i: usize) -> Complex<T> {
        Complex::from_polar(self.amplitudes[i], self.phases[i])
    }
}

/// Summed cascaded gain `α = Σ g_i μ_i e^{jθ_i} h_i` of one side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveGain<T>(pub Complex<T>);

impl<T: Scalar> EffectiveGain<T> {
    pub fn value(self) -> Complex<T> {
        self.0
    }

    pub fn magnitude(self) -> T {
        self.0.norm()
    }

    pub fn phase(self) -> T {
        self.0.arg()
    }
}

fn wrap_phase<T: Scalar>(theta: T) -> T {
    let two_pi = T::TAU();
    let w = theta % two_pi;
    let w = if w < T::zero() { w + two_pi } else { w };
    if w >= two_pi {
        T::zero()
    } else {
        w
    }
}

/// Phases that cancel the estimated cascaded phase of every element,
/// `θ_i = −(∠ĥ_i + ∠ĝ_i)` wrapped to `[0, 2π)`.
///
/// Elements with a zero estimate have no defined angle; they get `θ_i = 0`
/// and are counted in the second return value.
pub fn optimal_phases<T: Scalar>(h_est: &[Complex<T>], g_est: &[Complex<T>]) -> Result<(RisPhaseConfig<T>, usize)> {
    if h_est.len() != g_est.len() {
        return Err(Error::InputShape {
            what: "RIS-to-relay coefficient count",
            expected: h_est.len(),
            actual: g_est.len(),
        });
    }
    let mut degenerate = 0;
    let phases = h_est
        .iter()
        .zip(g_est)
        .map(|(h, g)| {
            if h.norm_sqr() == T::zero() || g.norm_sqr() == T::zero() {
                degenerate += 1;
                T::zero()
            } else {
                wrap_phase(-(h.arg() + g.arg()))
            }
        })
        .collect();
    Ok((RisPhaseConfig::lossless(phases), degenerate))
}

/// I.i.d. uniform phases on `[0, 2π)`.
pub fn random_phases<T: Scalar, R: Rng + ?Sized>(elements: usize, rng: &mut R) -> RisPhaseConfig<T> {
    let phases = (0..elements).map(|_| wrap_phase(T::lit(rng.random::<f64>() * std::f64::consts::TAU))).collect();
    RisPhaseConfig::lossless(phases)
}

/// Effective gain over the true channels `h`, `g` under configuration `cfg`.
pub fn effective_gain<T: Scalar>(
    h: &[Complex<T>],
    g: &[Complex<T>],
    cfg: &RisPhaseConfig<T>,
) -> Result<EffectiveGain<T>> {
    if h.len() != g.len() || h.len() != cfg.len() || cfg.amplitudes.len() != cfg.len() {
        return Err(Error::InputShape {
            what: "RIS element count",
            expected: h.len(),
            actual: if g.len() != h.len() { g.len() } else { cfg.len() },
        });
    }
    let alpha = h
        .iter()
        .zip(g)
        .enumerate()
        .map(|(i, (h, g))| g * cfg.reflection(i) * h)
        .fold(Complex::new(T::zero(), T::zero()), |acc, x| acc + x);
    Ok(EffectiveGain(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn optimal_phase_examples() {
        let h = [Complex::from_polar(1.0, PI / 3.0)];
        let g = [Complex::from_polar(1.0, PI / 6.0)];
        let (cfg, bad) = optimal_phases(&h, &g).unwrap();
        assert_eq!(bad, 0);
        assert_relative_eq!(cfg.phases[0], 1.5 * PI, epsilon = 1e-12);
        assert_eq!(cfg.amplitudes, vec![1.0]);

        let real = vec![Complex::new(0.5, 0.0); 4];
        let (cfg, _) = optimal_phases(&real, &real).unwrap();
        assert_eq!(cfg.phases, vec![0.0; 4]);
    }

    #[test]
    fn zero_coefficient_is_counted() {
        let h = [Complex::new(0.0, 0.0), Complex::new(1.0, 1.0)];
        let g = [Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)];
        let (cfg, bad) = optimal_phases(&h, &g).unwrap();
        assert_eq!(bad, 1);
        assert_eq!(cfg.phases[0], 0.0);
        assert!(optimal_phases(&h, &g[..1]).is_err());
    }

    #[test]
    fn effective_gain_examples() {
        let h = [Complex::new(1.0f64, 0.0), Complex::new(1.0, 0.0)];
        let g = [Complex::new(1.0, 0.0), Complex::new(0.0, 1.0)];
        let (cfg, _) = optimal_phases(&h, &g).unwrap();
        let a = effective_gain(&h, &g, &cfg).unwrap().value();
        assert_relative_eq!(a.re, 2.0, epsilon = 1e-12);
        assert!(a.im.abs() < 1e-12);

        let one = [Complex::new(1.0f64, 0.0)];
        let flip = RisPhaseConfig::lossless(vec![PI]);
        let a = effective_gain(&one, &one, &flip).unwrap().value();
        assert_relative_eq!(a.re, -1.0, epsilon = 1e-12);
        assert!(a.im.abs() < 1e-12);

        assert!(effective_gain(&one, &g, &flip).is_err());
    }

    #[test]
    fn perfect_csi_gain_is_sum_of_magnitudes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for l in [1usize, 4, 16, 64, 256] {
            let h: Vec<Complex<f64>> = (0..l).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            let g: Vec<Complex<f64>> = (0..l).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            let (cfg, _) = optimal_phases(&h, &g).unwrap();
            let a = effective_gain(&h, &g, &cfg).unwrap().value();
            let brute: f64 = h.iter().zip(&g).map(|(h, g)| h.norm() * g.norm()).sum();
            assert_relative_eq!(a.re, brute, max_relative = 1e-12);
            assert!(a.im.abs() / a.norm() < 1e-9);
        }
    }

    #[test]
    fn random_phases_are_uniform() {
        let cfg: RisPhaseConfig<f64> = random_phases(10_000, &mut ChaCha8Rng::seed_from_u64(2));
        let again: RisPhaseConfig<f64> = random_phases(10_000, &mut ChaCha8Rng::seed_from_u64(2));
        assert_eq!(cfg, again);
        assert!(cfg.phases.iter().all(|&p| (0.0..2.0 * PI).contains(&p)));
        let mean: Complex<f64> =
            cfg.phases.iter().map(|&p| Complex::from_polar(1.0, p)).sum::<Complex<f64>>() / 10_000.0;
        assert!(mean.norm() < 0.05);
        let single: RisPhaseConfig<f64> = random_phases(1, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn coherent_gain_grows_linearly() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sizes = [16usize, 64, 256];
        let trials = 400;
        let means: Vec<f64> = sizes
            .iter()
            .map(|&l| {
                (0..trials)
                    .map(|_| {
                        let h: Vec<Complex<f64>> = (0..l).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
                        let g: Vec<Complex<f64>> = (0..l).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
                        let (cfg, _) = optimal_phases(&h, &g).unwrap();
                        effective_gain(&h, &g, &cfg).unwrap().value().re
                    })
                    .sum::<f64>()
                    / trials as f64
            })
            .collect();
        // least-squares slope through the origin
        let slope = sizes.iter().zip(&means).map(|(&l, m)| l as f64 * m).sum::<f64>()
            / sizes.iter().map(|&l| (l * l) as f64).sum::<f64>();
        for (&l, m) in sizes.iter().zip(&means) {
            assert!((m / (slope * l as f64) - 1.0).abs() < 0.05, "L={l}: {m} vs {}", slope * l as f64);
        }
        // E|h||g| = π/4 for unit-variance Rayleigh
        assert_relative_eq!(slope, PI / 4.0, max_relative = 0.02);
    }

    #[test]
    fn cee_degrades_coherent_gain_monotonically() {
        let levels = [0.0, 0.01, 0.1, 1.0, 10.0];
        let trials = 300;
        let l = 64;
        let means: Vec<f64> = levels
            .iter()
            .map(|&var| {
                let mut rng = ChaCha8Rng::seed_from_u64(8);
                (0..trials)
                    .map(|_| {
                        let h: Vec<Complex<f64>> = (0..l).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
                        let g: Vec<Complex<f64>> = (0..l).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
                        let he: Vec<_> = h.iter().map(|x| x + complex_gaussian(&mut rng, var)).collect();
                        let ge: Vec<_> = g.iter().map(|x| x + complex_gaussian(&mut rng, var)).collect();
                        let (cfg, _) = optimal_phases(&he, &ge).unwrap();
                        effective_gain(&h, &g, &cfg).unwrap().value().re
                    })
                    .sum::<f64>()
                    / trials as f64
            })
            .collect();
        for w in means.windows(2) {
            assert!(w[1] <= w[0], "{means:?}");
        }
    }

    #[test]
    fn random_phases_collapse_coherent_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let l = 16;
        let trials = 4000;
        let mut sum = Complex::new(0.0, 0.0);
        let mut power = 0.0;
        let mut reference = 0.0;
        for _ in 0..trials {
            let h: Vec<Complex<f64>> = (0..l).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            let g: Vec<Complex<f64>> = (0..l).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            let cfg = random_phases(l, &mut rng);
            let a = effective_gain(&h, &g, &cfg).unwrap().value();
            sum += a;
            power += a.norm_sqr();
            reference += h.iter().zip(&g).map(|(h, g)| (h * g).norm_sqr()).sum::<f64>();
        }
        assert!((sum / trials as f64).norm() < 0.2);
        assert_relative_eq!(power / reference, 1.0, max_relative = 0.1);
    }
}
