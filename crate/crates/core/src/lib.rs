//! Link-level Monte Carlo simulator for RIS-assisted OFDM physical-layer
//! network coding (PNC) over a two-way relay channel.
//!
//! Two user equipments (UEs) transmit M-QAM symbols simultaneously to an
//! active relay, each through its own reconfigurable intelligent surface
//! (RIS). The surfaces co-phase the cascaded channels, the UEs equalize
//! their arrival amplitudes by power control, and the relay maps the
//! superposed symbol to the per-dimension modular sum of the two digits.
//!
//! The numeric modules are generic over the [`Scalar`] type (`f32` or
//! `f64`); the aliases below pin the common instantiations.

pub mod channel;
pub mod error;
pub mod modem;
pub mod ofdm;
pub mod pnc;
pub mod power;
pub mod ris;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use num_complex::Complex;

/// A complex baseband coefficient.
pub type ComplexGain<T> = Complex<T>;

pub type ComplexGain64 = ComplexGain<f64>;
pub type ComplexGain32 = ComplexGain<f32>;

pub type Modulation64 = modem::Modulation<f64>;
pub type Modulation32 = modem::Modulation<f32>;

pub type ChannelRealization64 = channel::ChannelRealization<f64>;
pub type ChannelRealization32 = channel::ChannelRealization<f32>;

pub type RisPhaseConfig64 = ris::RisPhaseConfig<f64>;
pub type RisPhaseConfig32 = ris::RisPhaseConfig<f32>;

pub type EffectiveGain64 = ris::EffectiveGain<f64>;
pub type EffectiveGain32 = ris::EffectiveGain<f32>;

pub type PowerAllocation64 = power::PowerAllocation<f64>;
pub type PowerAllocation32 = power::PowerAllocation<f32>;

pub type OfdmModem64 = ofdm::OfdmModem<f64>;
pub type OfdmModem32 = ofdm::OfdmModem<f32>;

pub type Simulator64 = sim::Simulator<f64>;
pub type Simulator32 = sim::Simulator<f32>;
