use serde::{Deserialize, Serialize};

use crate::channel::{CeeMode, CeeSpec, NodeGeometry};
use crate::modem::{Labeling, Modulation};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    /// Co-phase every element from the estimated channels.
    #[default]
    Optimal,
    /// I.i.d. uniform phases, redrawn every round.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Network-coded digit errors at the relay (MA phase only).
    #[default]
    Uplink,
    /// Peer-payload errors at both UEs after the BC phase.
    EndToEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Framing {
    /// Full OFDM symbol: IFFT, cyclic prefix, time-domain noise, FFT.
    #[default]
    Ofdm,
    /// Per-subcarrier flat model with noise added directly on each bin.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    PMaxDbm,
    CeeDb,
    RisElements,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::PMaxDbm => "p_max_dbm",
            SweepAxis::CeeDb => "cee_db",
            SweepAxis::RisElements => "ris_elements",
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p_max_dbm" => Ok(SweepAxis::PMaxDbm),
            "cee_db" => Ok(SweepAxis::CeeDb),
            "ris_elements" => Ok(SweepAxis::RisElements),
            other => Err(Error::domain(format!(
                "unknown sweep axis '{other}'; expected one of p_max_dbm, cee_db, ris_elements"
            ))),
        }
    }
}

/// Everything that defines one simulated operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub geometry: NodeGeometry,
    /// RIS elements per surface, `L`.
    pub ris_elements: usize,
    /// Modulation order `M`.
    pub modulation: u32,
    pub labeling: Labeling,
    pub p_max_dbm: f64,
    /// Relay transmit power for the BC phase.
    pub p_relay_dbm: f64,
    /// CEE level; `None` means perfect CSI.
    pub cee_db: Option<f64>,
    pub cee_mode: CeeMode,
    pub phase_mode: PhaseMode,
    pub metric: Metric,
    pub framing: Framing,
    pub power_control: bool,
    /// Silence UE B and detect UE A alone (single-user reference runs).
    pub single_user: bool,
    pub bandwidth_hz: f64,
    /// Receiver noise figure; `-inf` gives a noiseless link.
    pub noise_figure_db: f64,
    /// Round cap per point.
    pub rounds: u64,
    /// Stop a point early once this many bit errors are seen (0 = never).
    pub target_errors: u64,
    pub master_seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            geometry: NodeGeometry::default(),
            ris_elements: 1,
            modulation: 4,
            labeling: Labeling::Natural,
            p_max_dbm: 20.0,
            p_relay_dbm: 20.0,
            cee_db: None,
            cee_mode: CeeMode::Absolute,
            phase_mode: PhaseMode::Optimal,
            metric: Metric::Uplink,
            framing: Framing::Ofdm,
            power_control: true,
            single_user: false,
            bandwidth_hz: 10e6,
            noise_figure_db: 0.0,
            rounds: 10_000,
            target_errors: 100,
            master_seed: 1,
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

impl Scenario {
    pub fn cee(&self) -> CeeSpec {
        CeeSpec { level_db: self.cee_db, mode: self.cee_mode }
    }

    pub fn validate(&self) -> Result<()> {
        Modulation::<f64>::new(self.modulation)?;
        if self.ris_elements == 0 {
            return Err(Error::domain("ris_elements must be at least 1"));
        }
        if self.rounds == 0 {
            return Err(Error::domain("rounds must be at least 1"));
        }
        if !(self.bandwidth_hz > 0.0) || !self.bandwidth_hz.is_finite() {
            return Err(Error::domain("bandwidth_hz must be positive"));
        }
        if self.noise_figure_db.is_nan() || self.noise_figure_db == f64::INFINITY {
            return Err(Error::domain("noise_figure_db must be finite or -inf"));
        }
        for (name, v) in [("p_max_dbm", self.p_max_dbm), ("p_relay_dbm", self.p_relay_dbm)] {
            if !v.is_finite() {
                return Err(Error::domain(format!("{name} must be finite")));
            }
        }
        if self.cee_db.is_some_and(|x| x.is_nan() || x == f64::INFINITY) {
            return Err(Error::domain("cee_db must be finite or -inf"));
        }
        if self.single_user && self.metric == Metric::EndToEnd {
            return Err(Error::domain("single_user runs only support the uplink metric"));
        }
        self.geometry.path_losses::<f64>()?;
        Ok(())
    }

    /// Copy of this scenario with `axis` set to `value`.
    pub fn with_axis(&self, axis: SweepAxis, value: f64) -> Result<Scenario> {
        let mut sc = self.clone();
        match axis {
            SweepAxis::PMaxDbm => sc.p_max_dbm = value,
            SweepAxis::CeeDb => sc.cee_db = Some(value),
            SweepAxis::RisElements => {
                if value < 1.0 || value.fract() != 0.0 || value > u32::MAX as f64 {
                    return Err(Error::domain(format!("ris_elements sweep value {value} is not a positive integer")));
                }
                sc.ris_elements = value as usize;
            }
        }
        sc.validate()?;
        Ok(sc)
    }

    /// Current value along `axis` (`cee_db` off reads as `-inf`).
    pub fn axis_value(&self, axis: SweepAxis) -> f64 {
        match axis {
            SweepAxis::PMaxDbm => self.p_max_dbm,
            SweepAxis::CeeDb => self.cee_db.unwrap_or(f64::NEG_INFINITY),
            SweepAxis::RisElements => self.ris_elements as f64,
        }
    }
}
