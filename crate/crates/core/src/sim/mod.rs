//! Monte Carlo orchestration: rounds, points, sweeps and power calibration.
//!
//! Every round draws from its own ChaCha stream keyed by
//! `(master_seed, point, round)`, so results do not depend on how rounds are
//! spread over worker threads. Tallies are integer sums.

mod engine;
mod scenario;

use std::ops::{Add, AddAssign};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use engine::{MaRound, Simulator};
pub use scenario::{dbm_to_watts, Framing, Metric, PhaseMode, Scenario, SweepAxis};

use crate::ofdm::FFT_LEN;
use crate::{Error, Result, Scalar};

/// Thermal noise density in dBm/Hz.
pub const THERMAL_FLOOR_DBM_HZ: f64 = -174.0;

/// Rounds simulated between early-stop checks.
pub const BATCH_ROUNDS: u64 = 256;

/// Total thermal noise power in watts over `bandwidth_hz`.
pub fn noise_power(bandwidth_hz: f64, noise_figure_db: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) {
        return Err(Error::domain(format!("bandwidth must be positive, got {bandwidth_hz}")));
    }
    Ok(dbm_to_watts(noise_power_dbm(bandwidth_hz, noise_figure_db)))
}

pub fn noise_power_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_FLOOR_DBM_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

/// Share of the total noise landing in one of the 64 subcarriers.
pub fn noise_power_per_bin(bandwidth_hz: f64, noise_figure_db: f64) -> Result<f64> {
    Ok(noise_power(bandwidth_hz, noise_figure_db)? / FFT_LEN as f64)
}

/// Random stream of one round.
pub fn round_stream(master_seed: u64, point: u32, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((point as u64) << 40) | (round & ((1 << 40) - 1)));
    rng
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub rounds: u64,
    pub bits: u64,
    pub errors: u64,
    pub dropped: u64,
}

impl Tally {
    pub fn dropped() -> Self {
        Tally { rounds: 1, dropped: 1, ..Tally::default() }
    }
}

impl Add for Tally {
    type Output = Tally;

    fn add(self, o: Tally) -> Tally {
        Tally {
            rounds: self.rounds + o.rounds,
            bits: self.bits + o.bits,
            errors: self.errors + o.errors,
            dropped: self.dropped + o.dropped,
        }
    }
}

impl AddAssign for Tally {
    fn add_assign(&mut self, o: Tally) {
        *self = *self + o;
    }
}

impl std::iter::Sum for Tally {
    fn sum<I: Iterator<Item = Tally>>(iter: I) -> Tally {
        iter.fold(Tally::default(), Add::add)
    }
}

/// One measured operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub swept_value: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub dropped_rounds: u64,
    pub rounds: u64,
    /// The point stopped at the round cap before reaching its error target.
    pub hit_cap: bool,
}

impl BerPoint {
    pub fn from_tally(swept_value: f64, t: Tally, target_errors: u64) -> Self {
        Self {
            swept_value,
            bits: t.bits,
            errors: t.errors,
            ber: if t.bits == 0 { f64::NAN } else { t.errors as f64 / t.bits as f64 },
            dropped_rounds: t.dropped,
            rounds: t.rounds,
            hit_cap: target_errors > 0 && t.errors < target_errors,
        }
    }

    /// Binomial standard deviation of the estimate.
    pub fn std_error(&self) -> f64 {
        (self.ber * (1.0 - self.ber) / self.bits as f64).sqrt()
    }
}

impl<T: Scalar> Simulator<T> {
    /// Tally of rounds `[start, end)` of point `point`, in parallel.
    pub fn run_rounds(&self, point: u32, start: u64, end: u64) -> Result<Tally> {
        let seed = self.scenario().master_seed;
        (start..end)
            .into_par_iter()
            .map(|r| self.run_round(&mut round_stream(seed, point, r)))
            .try_reduce(Tally::default, |a, b| Ok(a + b))
    }

    /// Runs batches until the error target or the round cap is reached.
    pub fn run_point(&self, point: u32) -> Result<Tally> {
        let sc = self.scenario();
        let mut total = Tally::default();
        while total.rounds < sc.rounds {
            let end = (total.rounds + BATCH_ROUNDS).min(sc.rounds);
            total += self.run_rounds(point, total.rounds, end)?;
            if sc.target_errors > 0 && total.errors >= sc.target_errors {
                break;
            }
        }
        Ok(total)
    }
}

/// One point per value of `axis`; point `i` uses stream family `i`.
pub fn sweep<T: Scalar>(template: &Scenario, axis: SweepAxis, values: &[f64]) -> Result<Vec<BerPoint>> {
    if values.is_empty() {
        return Err(Error::domain("sweep needs at least one value"));
    }
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let sc = template.with_axis(axis, v)?;
            let tally = Simulator::<T>::new(&sc)?.run_point(i as u32)?;
            Ok(BerPoint::from_tally(v, tally, sc.target_errors))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub p_max_dbm: f64,
    /// BER measured at the returned power.
    pub ber: f64,
    pub bits: u64,
}

/// Finds the `P_max` (dBm) at which the scenario's BER crosses `target_ber`.
///
/// Every evaluation replays the same rounds (point stream 0, exactly
/// `template.rounds` rounds), so only the transmit power changes between
/// evaluations and the measured BER is non-increasing in power for
/// co-phased arrivals. Bisection runs until the bracket is narrower than
/// `tolerance_db`.
pub fn calibrate_power<T: Scalar>(
    template: &Scenario,
    target_ber: f64,
    bracket_dbm: (f64, f64),
    tolerance_db: f64,
) -> Result<Calibration> {
    let (mut lo, mut hi) = bracket_dbm;
    if !(lo < hi) || !(target_ber > 0.0 && target_ber < 1.0) || !(tolerance_db > 0.0) {
        return Err(Error::Calibration(format!(
            "invalid request: bracket {bracket_dbm:?}, target {target_ber}, tolerance {tolerance_db}"
        )));
    }
    let eval = |p: f64| -> Result<BerPoint> {
        let mut sc = template.with_axis(SweepAxis::PMaxDbm, p)?;
        sc.target_errors = 0;
        let tally = Simulator::<T>::new(&sc)?.run_point(0)?;
        Ok(BerPoint::from_tally(p, tally, 0))
    };
    let low = eval(lo)?;
    let high = eval(hi)?;
    if !(low.ber > target_ber) || high.ber > target_ber {
        return Err(Error::Calibration(format!(
            "target BER {target_ber:e} not bracketed: BER({lo} dBm) = {:e}, BER({hi} dBm) = {:e}",
            low.ber, high.ber
        )));
    }
    let (mut ber_lo, mut ber_hi) = (low.ber, high.ber);
    let mut best = high;
    while hi - lo > tolerance_db {
        let mid = 0.5 * (lo + hi);
        let p = eval(mid)?;
        if p.ber > target_ber {
            lo = mid;
            ber_lo = p.ber;
        } else {
            hi = mid;
            ber_hi = p.ber;
            best = p;
        }
    }
    // log-linear interpolation inside the final bracket
    let p_max_dbm = if ber_hi > 0.0 {
        let t = (ber_lo.ln() - target_ber.ln()) / (ber_lo.ln() - ber_hi.ln());
        lo + t.clamp(0.0, 1.0) * (hi - lo)
    } else {
        hi
    };
    Ok(Calibration { p_max_dbm, ber: best.ber, bits: best.bits })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_power_examples() {
        assert!((noise_power_dbm(10e6, 0.0) - -104.0).abs() < 1e-9);
        assert!((noise_power_dbm(10e6, 3.0) - -101.0).abs() < 1e-9);
        let total = noise_power(10e6, 0.0).unwrap();
        let bin = noise_power_per_bin(10e6, 0.0).unwrap();
        assert!((10.0 * (total / bin).log10() - 18.0618).abs() < 1e-4);
        assert!((total - 3.981e-14).abs() < 1e-16);
        assert_eq!(noise_power(10e6, f64::NEG_INFINITY).unwrap(), 0.0);
        assert!(noise_power(0.0, 0.0).is_err());
    }

    #[test]
    fn streams_are_distinct_and_stable() {
        use rand::Rng;
        let a: u64 = round_stream(1, 0, 0).random();
        let b: u64 = round_stream(1, 0, 1).random();
        let c: u64 = round_stream(1, 1, 0).random();
        let d: u64 = round_stream(2, 0, 0).random();
        assert!(a != b && a != c && a != d && b != c);
        assert_eq!(a, round_stream(1, 0, 0).random::<u64>());
    }

    #[test]
    fn single_round_bookkeeping() {
        for (metric, factor) in [(Metric::Uplink, 1), (Metric::EndToEnd, 2)] {
            let sc = Scenario { rounds: 1, modulation: 16, metric, ..Scenario::default() };
            let pts = sweep::<f64>(&sc, SweepAxis::PMaxDbm, &[10.0]).unwrap();
            assert_eq!(pts.len(), 1);
            assert_eq!(pts[0].bits, 48 * 4 * factor);
            assert_eq!(pts[0].rounds, 1);
        }
    }

    #[test]
    fn empty_sweep_is_rejected() {
        assert!(sweep::<f64>(&Scenario::default(), SweepAxis::PMaxDbm, &[]).is_err());
    }

    #[test]
    fn early_stop_on_error_target() {
        let sc = Scenario { rounds: 100_000, target_errors: 50, p_max_dbm: -20.0, ..Scenario::default() };
        let t = Simulator::<f64>::new(&sc).unwrap().run_point(0).unwrap();
        assert!(t.errors >= 50);
        assert_eq!(t.rounds % BATCH_ROUNDS, 0);
        assert!(t.rounds < 100_000);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let sc = Scenario { rounds: 600, ris_elements: 4, modulation: 16, p_max_dbm: 45.0, ..Scenario::default() };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sweep::<f64>(&sc, SweepAxis::PMaxDbm, &[40.0, 50.0]).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}
