//! Run configuration: a TOML document with scenario fields at the top
//! level, plus `[geometry]`, `[sweep]`, optional `[calibrate]` and any
//! number of `[[series]]` overrides. Omitted fields take the reference
//! scenario defaults.

use std::path::PathBuf;

use ris_pnc::channel::{CeeMode, NodeGeometry, Point3};
use ris_pnc::modem::Labeling;
use ris_pnc::sim::{Framing, Metric, PhaseMode, Scenario, SweepAxis};
use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Syntax(String),

    #[error("line {line}: invalid value for `{key}`: {message}")]
    Invalid { key: String, line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Plot,
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        true
    }

    pub fn plot(self) -> bool {
        matches!(self, OutputFormat::Plot | OutputFormat::Both)
    }
}

/// Power calibration applied to every series before its sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrateSpec {
    pub target_ber: f64,
    /// Sweep-axis value at which the target is hit.
    pub at: f64,
    pub bracket_dbm: (f64, f64),
    pub tolerance_db: f64,
    /// Fixed round count per calibration evaluation.
    pub rounds: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub scenario: Scenario,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub sweep_axis: SweepAxis,
    pub series: Vec<Series>,
    pub calibrate: Option<CalibrateSpec>,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
}

impl RunConfig {
    pub fn set_seed(&mut self, seed: u64) {
        for s in &mut self.series {
            s.scenario.master_seed = seed;
        }
    }

    pub fn seed(&self) -> u64 {
        self.series.first().map_or(1, |s| s.scenario.master_seed)
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum CeeValue {
    Level(f64),
    Keyword(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    ue_a: Option<Spanned<[f64; 3]>>,
    ue_b: Option<Spanned<[f64; 3]>>,
    ris_a: Option<Spanned<[f64; 3]>>,
    ris_b: Option<Spanned<[f64; 3]>>,
    relay: Option<Spanned<[f64; 3]>>,
    carrier_hz: Option<Spanned<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: Option<Spanned<String>>,
    values: Option<Spanned<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCalibrate {
    target_ber: Spanned<f64>,
    at: Spanned<f64>,
    bracket_dbm: Option<Spanned<[f64; 2]>>,
    tolerance_db: Option<Spanned<f64>>,
    rounds: Option<Spanned<u64>>,
}

/// Scenario fields that a `[[series]]` entry may override.
#[derive(Debug, Default)]
struct RawScenario {
    ris_elements: Option<Spanned<i64>>,
    modulation: Option<Spanned<i64>>,
    labeling: Option<Spanned<Labeling>>,
    p_max_dbm: Option<Spanned<f64>>,
    p_relay_dbm: Option<Spanned<f64>>,
    cee_db: Option<Spanned<CeeValue>>,
    cee_mode: Option<Spanned<CeeMode>>,
    phase_mode: Option<Spanned<PhaseMode>>,
    metric: Option<Spanned<Metric>>,
    framing: Option<Spanned<Framing>>,
    power_control: Option<Spanned<bool>>,
    single_user: Option<Spanned<bool>>,
    bandwidth_hz: Option<Spanned<f64>>,
    noise_figure_db: Option<Spanned<f64>>,
    rounds: Option<Spanned<i64>>,
    target_errors: Option<Spanned<i64>>,
}

// Spans are lost through `#[serde(flatten)]`, so the scenario fields are
// spliced into each table struct instead.
macro_rules! with_scenario_fields {
    ($(#[$m:meta])* struct $name:ident { $($(#[$fm:meta])* $f:ident : $t:ty,)* }) => {
        $(#[$m])*
        struct $name {
            $($(#[$fm])* $f: $t,)*
            ris_elements: Option<Spanned<i64>>,
            modulation: Option<Spanned<i64>>,
            labeling: Option<Spanned<Labeling>>,
            p_max_dbm: Option<Spanned<f64>>,
            p_relay_dbm: Option<Spanned<f64>>,
            cee_db: Option<Spanned<CeeValue>>,
            cee_mode: Option<Spanned<CeeMode>>,
            phase_mode: Option<Spanned<PhaseMode>>,
            metric: Option<Spanned<Metric>>,
            framing: Option<Spanned<Framing>>,
            power_control: Option<Spanned<bool>>,
            single_user: Option<Spanned<bool>>,
            bandwidth_hz: Option<Spanned<f64>>,
            noise_figure_db: Option<Spanned<f64>>,
            rounds: Option<Spanned<i64>>,
            target_errors: Option<Spanned<i64>>,
        }

        impl $name {
            fn take_scenario(&mut self) -> RawScenario {
                RawScenario {
                    ris_elements: self.ris_elements.take(),
                    modulation: self.modulation.take(),
                    labeling: self.labeling.take(),
                    p_max_dbm: self.p_max_dbm.take(),
                    p_relay_dbm: self.p_relay_dbm.take(),
                    cee_db: self.cee_db.take(),
                    cee_mode: self.cee_mode.take(),
                    phase_mode: self.phase_mode.take(),
                    metric: self.metric.take(),
                    framing: self.framing.take(),
                    power_control: self.power_control.take(),
                    single_user: self.single_user.take(),
                    bandwidth_hz: self.bandwidth_hz.take(),
                    noise_figure_db: self.noise_figure_db.take(),
                    rounds: self.rounds.take(),
                    target_errors: self.target_errors.take(),
                }
            }
        }
    };
}

with_scenario_fields! {
    #[derive(Debug, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct RawSeries {
        label: Option<String>,
        values: Option<Spanned<Vec<f64>>>,
    }
}

with_scenario_fields! {
    #[derive(Debug, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct RawConfig {
        name: Option<String>,
        seed: Option<Spanned<u64>>,
        workers: Option<Spanned<i64>>,
        out: Option<String>,
        format: Option<OutputFormat>,
        #[serde(default)]
        geometry: RawGeometry,
        #[serde(default)]
        sweep: RawSweep,
        calibrate: Option<RawCalibrate>,
        #[serde(default)]
        series: Vec<RawSeries>,
    }
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn line(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    fn invalid<T>(
        &self,
        key: &str,
        span: std::ops::Range<usize>,
        message: impl Into<String>,
    ) -> Result<T, ConfigError> {
        Err(ConfigError::Invalid { key: key.to_string(), line: self.line(span.start), message: message.into() })
    }

    fn non_negative(&self, key: &str, v: &Spanned<i64>) -> Result<u64, ConfigError> {
        u64::try_from(*v.get_ref()).or_else(|_| self.invalid(key, v.span(), "must be non-negative"))
    }
}

fn apply_overrides(ctx: &Ctx, sc: &mut Scenario, raw: &RawScenario) -> Result<(), ConfigError> {
    if let Some(v) = &raw.modulation {
        let m = *v.get_ref();
        if ![2, 4, 16, 64].contains(&m) {
            return ctx.invalid(
                "modulation",
                v.span(),
                format!("{m} is not a supported order; valid set is {{2, 4, 16, 64}}"),
            );
        }
        sc.modulation = m as u32;
    }
    if let Some(v) = &raw.ris_elements {
        let l = *v.get_ref();
        if l < 1 {
            return ctx.invalid("ris_elements", v.span(), format!("{l} must be at least 1"));
        }
        sc.ris_elements = l as usize;
    }
    if let Some(v) = &raw.labeling {
        sc.labeling = *v.get_ref();
    }
    for (key, field, dst) in
        [("p_max_dbm", &raw.p_max_dbm, &mut sc.p_max_dbm), ("p_relay_dbm", &raw.p_relay_dbm, &mut sc.p_relay_dbm)]
    {
        if let Some(v) = field {
            if !v.get_ref().is_finite() {
                return ctx.invalid(key, v.span(), "must be a finite number");
            }
            *dst = *v.get_ref();
        }
    }
    if let Some(v) = &raw.cee_db {
        sc.cee_db = match v.get_ref() {
            CeeValue::Level(x) if !x.is_nan() && *x != f64::INFINITY => Some(*x),
            CeeValue::Keyword(k) if k == "off" => None,
            _ => return ctx.invalid("cee_db", v.span(), "expected a level in dB or \"off\""),
        };
    }
    if let Some(v) = &raw.cee_mode {
        sc.cee_mode = *v.get_ref();
    }
    if let Some(v) = &raw.phase_mode {
        sc.phase_mode = *v.get_ref();
    }
    if let Some(v) = &raw.metric {
        sc.metric = *v.get_ref();
    }
    if let Some(v) = &raw.framing {
        sc.framing = *v.get_ref();
    }
    if let Some(v) = &raw.power_control {
        sc.power_control = *v.get_ref();
    }
    if let Some(v) = &raw.single_user {
        sc.single_user = *v.get_ref();
    }
    if let Some(v) = &raw.bandwidth_hz {
        if !(*v.get_ref() > 0.0) || !v.get_ref().is_finite() {
            return ctx.invalid("bandwidth_hz", v.span(), "must be positive");
        }
        sc.bandwidth_hz = *v.get_ref();
    }
    if let Some(v) = &raw.noise_figure_db {
        if v.get_ref().is_nan() || *v.get_ref() == f64::INFINITY {
            return ctx.invalid("noise_figure_db", v.span(), "must be finite or -inf");
        }
        sc.noise_figure_db = *v.get_ref();
    }
    if let Some(v) = &raw.rounds {
        let r = ctx.non_negative("rounds", v)?;
        if r == 0 {
            return ctx.invalid("rounds", v.span(), "must be at least 1");
        }
        sc.rounds = r;
    }
    if let Some(v) = &raw.target_errors {
        sc.target_errors = ctx.non_negative("target_errors", v)?;
    }
    Ok(())
}

fn default_label(sc: &Scenario) -> String {
    format!("L={} M={}", sc.ris_elements, sc.modulation)
}

/// Parses and validates a run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let ctx = Ctx { text };

    let mut base = Scenario::default();
    if let Some(seed) = &raw.seed {
        base.master_seed = *seed.get_ref();
    }

    let mut geometry = NodeGeometry::default();
    let g = &raw.geometry;
    for (key, field, dst) in [
        ("geometry.ue_a", &g.ue_a, &mut geometry.ue_a),
        ("geometry.ue_b", &g.ue_b, &mut geometry.ue_b),
        ("geometry.ris_a", &g.ris_a, &mut geometry.ris_a),
        ("geometry.ris_b", &g.ris_b, &mut geometry.ris_b),
        ("geometry.relay", &g.relay, &mut geometry.relay),
    ] {
        if let Some(p) = field {
            let [x, y, z] = *p.get_ref();
            if !(x.is_finite() && y.is_finite() && z.is_finite()) {
                return ctx.invalid(key, p.span(), "coordinates must be finite");
            }
            *dst = Point3::new(x, y, z);
        }
    }
    if let Some(f) = &g.carrier_hz {
        if !(*f.get_ref() > 0.0) || !f.get_ref().is_finite() {
            return ctx.invalid("geometry.carrier_hz", f.span(), "must be positive");
        }
        geometry.carrier_hz = *f.get_ref();
    }
    if let Err(e) = geometry.path_losses::<f64>() {
        let span = g.ue_a.as_ref().map_or(0..0, |p| p.span());
        return ctx.invalid("geometry", span, e.to_string());
    }
    base.geometry = geometry;
    apply_overrides(&ctx, &mut base, &raw.take_scenario())?;

    let sweep_axis = match &raw.sweep.axis {
        None => SweepAxis::PMaxDbm,
        Some(a) => match a.get_ref().parse::<SweepAxis>() {
            Ok(axis) => axis,
            Err(e) => return ctx.invalid("sweep.axis", a.span(), e.to_string()),
        },
    };
    let check_values = |key: &str, v: &Spanned<Vec<f64>>| -> Result<Vec<f64>, ConfigError> {
        if v.get_ref().is_empty() {
            return ctx.invalid(key, v.span(), "needs at least one value");
        }
        if v.get_ref().iter().any(|x| x.is_nan()) {
            return ctx.invalid(key, v.span(), "values must be numbers");
        }
        Ok(v.get_ref().clone())
    };
    let default_values = match &raw.sweep.values {
        Some(v) => check_values("sweep.values", v)?,
        None => vec![base.axis_value(sweep_axis)],
    };

    let calibrate = match &raw.calibrate {
        None => None,
        Some(c) => {
            if sweep_axis == SweepAxis::PMaxDbm {
                return ctx.invalid("calibrate", c.target_ber.span(), "cannot calibrate power on a power sweep");
            }
            let target = *c.target_ber.get_ref();
            if !(target > 0.0 && target < 1.0) {
                return ctx.invalid("calibrate.target_ber", c.target_ber.span(), "must be in (0, 1)");
            }
            let bracket_dbm = c.bracket_dbm.as_ref().map_or((-60.0, 100.0), |b| (b.get_ref()[0], b.get_ref()[1]));
            if !(bracket_dbm.0 < bracket_dbm.1) {
                let span = c.bracket_dbm.as_ref().map_or(0..0, |b| b.span());
                return ctx.invalid("calibrate.bracket_dbm", span, "needs low < high");
            }
            let tolerance_db = c.tolerance_db.as_ref().map_or(0.1, |t| *t.get_ref());
            if !(tolerance_db > 0.0) {
                return ctx.invalid(
                    "calibrate.tolerance_db",
                    c.tolerance_db.as_ref().unwrap().span(),
                    "must be positive",
                );
            }
            let rounds = c.rounds.as_ref().map_or(base.rounds, |r| *r.get_ref());
            if rounds == 0 {
                return ctx.invalid("calibrate.rounds", c.rounds.as_ref().unwrap().span(), "must be at least 1");
            }
            Some(CalibrateSpec { target_ber: target, at: *c.at.get_ref(), bracket_dbm, tolerance_db, rounds })
        }
    };

    let mut series = Vec::new();
    if raw.series.is_empty() {
        series.push(Series { label: default_label(&base), scenario: base.clone(), values: default_values.clone() });
    }
    for s in &mut raw.series {
        let mut sc = base.clone();
        apply_overrides(&ctx, &mut sc, &s.take_scenario())?;
        let values = match &s.values {
            Some(v) => check_values("series.values", v)?,
            None => default_values.clone(),
        };
        series.push(Series { label: s.label.clone().unwrap_or_else(|| default_label(&sc)), scenario: sc, values });
    }
    for s in &series {
        for &v in &s.values {
            if let Err(e) = s.scenario.with_axis(sweep_axis, v) {
                let span = raw.sweep.values.as_ref().map_or(0..0, |v| v.span());
                return ctx.invalid("sweep.values", span, format!("series '{}': {e}", s.label));
            }
        }
    }

    let workers = match &raw.workers {
        None => 0,
        Some(w) => ctx.non_negative("workers", w)? as usize,
    };

    Ok(RunConfig {
        name: raw.name.unwrap_or_else(|| "run".to_string()),
        sweep_axis,
        series,
        calibrate,
        out_dir: PathBuf::from(raw.out.unwrap_or_else(|| "results".to_string())),
        format: raw.format.unwrap_or_default(),
        workers,
    })
}

/// Config document reproducing `sc` swept over `values` along `axis`.
pub fn scenario_document(sc: &Scenario, axis: SweepAxis, values: &[f64]) -> Result<String, toml::ser::Error> {
    let mut t = toml::Table::try_from(sc)?;
    t.remove("master_seed");
    t.insert("seed".into(), toml::Value::Integer(sc.master_seed as i64));
    if sc.cee_db.is_none() {
        t.insert("cee_db".into(), toml::Value::String("off".into()));
    }
    let g = &sc.geometry;
    let mut geometry = toml::Table::new();
    for (key, p) in [("ue_a", g.ue_a), ("ue_b", g.ue_b), ("ris_a", g.ris_a), ("ris_b", g.ris_b), ("relay", g.relay)] {
        geometry.insert(key.into(), toml::Value::try_from([p.x, p.y, p.z])?);
    }
    geometry.insert("carrier_hz".into(), toml::Value::Float(g.carrier_hz));
    t.insert("geometry".into(), toml::Value::Table(geometry));
    let mut sweep = toml::Table::new();
    sweep.insert("axis".into(), toml::Value::String(axis.name().into()));
    sweep.insert("values".into(), toml::Value::try_from(values)?);
    t.insert("sweep".into(), toml::Value::Table(sweep));
    toml::to_string(&t)
}
