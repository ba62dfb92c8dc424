use num_complex::Complex;
use rand::Rng;

use super::scenario::{dbm_to_watts, Framing, Metric, PhaseMode, Scenario};
use super::{noise_power, Tally};
use crate::channel::{apply_cee, complex_gaussian, sample_realization, CeeSpec, ChannelRealization};
use crate::modem::{DigitPair, Modulation};
use crate::ofdm::{OfdmModem, DATA_CARRIERS, FFT_LEN, SYMBOL_LEN};
use crate::pnc::{pnc_map_digits, recover_peer, relay_detect, NetworkCodedDigit};
use crate::power::{allocate, PowerAllocation};
use crate::ris::{effective_gain, optimal_phases, random_phases, EffectiveGain, RisPhaseConfig};
use crate::{Error, Result, Scalar};

/// State of one multiple-access phase, kept for the broadcast phase.
#[derive(Debug, Clone)]
pub struct MaRound<T> {
    pub realization: ChannelRealization<T>,
    pub alpha_a: EffectiveGain<T>,
    pub alpha_b: EffectiveGain<T>,
    pub power: PowerAllocation<T>,
    pub digits_a: Vec<DigitPair>,
    pub digits_b: Vec<DigitPair>,
    /// Relay decisions per data subcarrier. In single-user runs these hold
    /// UE A's detected digits.
    pub decisions: Vec<NetworkCodedDigit>,
    /// Amplitude the relay normalizes by.
    pub branch_gain: T,
    /// Per-subcarrier SNR of one arriving branch, `branch_gain² / σ²`.
    pub branch_snr: f64,
    /// RIS elements whose optimal phase was undefined (zero estimate).
    pub degenerate_elements: usize,
    pub tally: Tally,
}

/// One scenario compiled for a scalar type: alphabet, transforms and
/// linear-scale powers.
#[derive(Debug, Clone)]
pub struct Simulator<T: Scalar> {
    scenario: Scenario,
    modulation: Modulation<T>,
    ofdm: OfdmModem<T>,
    pilots: Vec<Complex<T>>,
    cee: CeeSpec,
    p_max: T,
    p_relay: T,
    noise_var: T,
}

impl<T: Scalar> Simulator<T> {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let modulation = Modulation::new(scenario.modulation)?.with_labeling(scenario.labeling);
        let ofdm = OfdmModem::default();
        let pilots = ofdm.grid().pilot_values();
        let total = noise_power(scenario.bandwidth_hz, scenario.noise_figure_db)?;
        Ok(Self {
            scenario: scenario.clone(),
            modulation,
            ofdm,
            pilots,
            cee: scenario.cee(),
            p_max: T::lit(dbm_to_watts(scenario.p_max_dbm)),
            p_relay: T::lit(dbm_to_watts(scenario.p_relay_dbm)),
            noise_var: T::lit(total / FFT_LEN as f64),
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn modulation(&self) -> &Modulation<T> {
        &self.modulation
    }

    /// Noise variance per subcarrier (and per time sample).
    pub fn noise_variance(&self) -> T {
        self.noise_var
    }

    pub fn bits_per_round(&self) -> u64 {
        let uplink = (DATA_CARRIERS as u32 * self.modulation.bits_per_symbol()) as u64;
        match self.scenario.metric {
            Metric::Uplink => uplink,
            Metric::EndToEnd => 2 * uplink,
        }
    }

    fn configure(
        &self,
        h_est: &[Complex<T>],
        g_est: &[Complex<T>],
        rng: &mut (impl Rng + ?Sized),
    ) -> Result<(RisPhaseConfig<T>, usize)> {
        match self.scenario.phase_mode {
            PhaseMode::Optimal => optimal_phases(h_est, g_est),
            PhaseMode::Random => Ok((random_phases(h_est.len(), rng), 0)),
        }
    }

    fn payload(&self, rng: &mut (impl Rng + ?Sized)) -> Vec<DigitPair> {
        let n = DATA_CARRIERS * self.modulation.bits_per_symbol() as usize;
        let bits: Vec<u8> = (0..n).map(|_| rng.random::<bool>() as u8).collect();
        self.modulation.bits_to_digits(&bits).expect("payload length is a whole number of symbols")
    }

    /// Passes the weighted sum of the given frequency-domain streams through
    /// the air interface and returns the received data subcarriers.
    fn receive(
        &self,
        streams: &[(Complex<T>, &[Complex<T>])],
        rng: &mut (impl Rng + ?Sized),
    ) -> Result<Vec<Complex<T>>> {
        let zero = Complex::new(T::zero(), T::zero());
        match self.scenario.framing {
            Framing::Ofdm => {
                let mut rx = vec![zero; SYMBOL_LEN];
                for &(coef, symbols) in streams {
                    let tx = self.ofdm.assemble(symbols, &self.pilots)?;
                    for (r, &s) in rx.iter_mut().zip(tx.samples()) {
                        *r = *r + coef * s;
                    }
                }
                for r in rx.iter_mut() {
                    *r = *r + complex_gaussian(rng, self.noise_var);
                }
                let rx = crate::ofdm::TimeDomainSymbol::from_samples(rx)?;
                Ok(self.ofdm.disassemble(&rx)?.data)
            }
            Framing::Flat => Ok((0..DATA_CARRIERS)
                .map(|k| {
                    let signal = streams.iter().fold(zero, |acc, &(coef, symbols)| acc + coef * symbols[k]);
                    signal + complex_gaussian(rng, self.noise_var)
                })
                .collect()),
        }
    }

    /// Multiple-access phase: both UEs transmit one OFDM symbol through their
    /// RIS, the relay maps every data subcarrier to a network-coded digit.
    ///
    /// Returns [`Error::AllocationImpossible`] when an effective gain is zero;
    /// the caller counts the round as dropped.
    pub fn run_ma_round(&self, rng: &mut (impl Rng + ?Sized)) -> Result<MaRound<T>> {
        let sc = &self.scenario;
        let realization = sample_realization::<T, _>(&sc.geometry, sc.ris_elements, rng)?;
        let realization = apply_cee(realization, &self.cee, rng)?;

        let (cfg_a, bad_a) = self.configure(&realization.a.h_est, &realization.a.g_est, rng)?;
        let (cfg_b, bad_b) = self.configure(&realization.b.h_est, &realization.b.g_est, rng)?;
        let alpha_a = effective_gain(&realization.a.h, &realization.a.g, &cfg_a)?;
        let alpha_b = effective_gain(&realization.b.h, &realization.b.g, &cfg_b)?;

        let power = if sc.single_user {
            if !(alpha_a.magnitude() > T::zero()) {
                return Err(Error::AllocationImpossible);
            }
            PowerAllocation { p_a: self.p_max, p_b: T::zero(), gamma: T::one(), p_max: self.p_max }
        } else if sc.power_control {
            allocate(alpha_a, alpha_b, self.p_max)?
        } else {
            if !(alpha_a.magnitude() > T::zero() && alpha_b.magnitude() > T::zero()) {
                return Err(Error::AllocationImpossible);
            }
            PowerAllocation::uncontrolled(self.p_max)
        };

        let digits_a = self.payload(rng);
        let digits_b = self.payload(rng);
        let m = &self.modulation;
        let x_a: Vec<_> = digits_a.iter().map(|&d| m.symbol(d)).collect();
        let x_b: Vec<_> = digits_b.iter().map(|&d| m.symbol(d)).collect();
        let coef_a = alpha_a.value() * power.p_a.sqrt();
        let coef_b = alpha_b.value() * power.p_b.sqrt();

        let y = self.receive(&[(coef_a, &x_a), (coef_b, &x_b)], rng)?;

        let (amp_a, amp_b) = power.arrival_amplitudes(alpha_a, alpha_b);
        let mut errors = 0u64;
        let (decisions, branch_gain) = if sc.single_user {
            let decisions = y
                .iter()
                .zip(&digits_a)
                .map(|(&yk, &truth)| {
                    let d = m.detect_symbol(yk / coef_a);
                    errors += m.bit_distance(d, truth) as u64;
                    NetworkCodedDigit(d)
                })
                .collect();
            (decisions, amp_a)
        } else {
            let branch_gain = if sc.power_control { amp_a } else { (amp_a + amp_b) / T::lit(2.0) };
            let mut decisions = Vec::with_capacity(DATA_CARRIERS);
            for ((&yk, &a), &b) in y.iter().zip(&digits_a).zip(&digits_b) {
                let z = relay_detect(yk, branch_gain, m)?;
                errors += m.bit_distance(z.digits(), pnc_map_digits(a, b, m).digits()) as u64;
                decisions.push(z);
            }
            (decisions, branch_gain)
        };

        let branch_snr = (branch_gain * branch_gain / self.noise_var).to_f64_lossy();
        Ok(MaRound {
            realization,
            alpha_a,
            alpha_b,
            power,
            digits_a,
            digits_b,
            decisions,
            branch_gain,
            branch_snr,
            degenerate_elements: bad_a + bad_b,
            tally: Tally { rounds: 1, bits: (DATA_CARRIERS as u32 * m.bits_per_symbol()) as u64, errors, dropped: 0 },
        })
    }

    /// Broadcast phase over the same (reciprocal) effective gains: the relay
    /// re-modulates its decisions, each UE detects them and strips its own
    /// digits. Errors are counted against the peer's true payload, both UEs.
    pub fn run_bc_round(&self, ma: &MaRound<T>, rng: &mut (impl Rng + ?Sized)) -> Result<Tally> {
        let m = &self.modulation;
        let x_r: Vec<_> = ma.decisions.iter().map(|z| m.symbol(z.digits())).collect();
        let amp = self.p_relay.sqrt();
        let mut errors = 0u64;
        for (alpha, own, peer) in [(ma.alpha_a, &ma.digits_a, &ma.digits_b), (ma.alpha_b, &ma.digits_b, &ma.digits_a)] {
            let coef = alpha.value() * amp;
            if !(coef.norm() > T::zero()) {
                return Err(Error::AllocationImpossible);
            }
            let y = self.receive(&[(coef, &x_r)], rng)?;
            for ((&yk, &own_d), &peer_d) in y.iter().zip(own).zip(peer) {
                let z_hat = NetworkCodedDigit(m.detect_symbol(yk / coef));
                let recovered = recover_peer(z_hat, own_d, m);
                errors += m.bit_distance(recovered, peer_d) as u64;
            }
        }
        Ok(Tally { rounds: 1, bits: 2 * (DATA_CARRIERS as u32 * m.bits_per_symbol()) as u64, errors, dropped: 0 })
    }

    /// One full round under the scenario's metric.
    pub fn run_round(&self, rng: &mut (impl Rng + ?Sized)) -> Result<Tally> {
        let ma = match self.run_ma_round(rng) {
            Ok(ma) => ma,
            Err(Error::AllocationImpossible) => return Ok(Tally::dropped()),
            Err(e) => return Err(e),
        };
        match self.scenario.metric {
            Metric::Uplink => Ok(ma.tally),
            Metric::EndToEnd => match self.run_bc_round(&ma, rng) {
                Err(Error::AllocationImpossible) => Ok(Tally::dropped()),
                other => other,
            },
        }
    }
}
