//! CSV emission and parsing. Each file holds one series: a `#`-prefixed
//! header block with the resolved configuration, then one row per point.

use std::fmt::Write as _;

use ris_pnc::ofdm::{OfdmGrid, CP_LEN, DATA_CARRIERS, FFT_LEN, PILOT_CARRIERS};
use ris_pnc::sim::{noise_power_per_bin, BerPoint, Calibration, PhaseMode, Scenario, SweepAxis};
use serde::Deserialize;

use crate::config::{scenario_document, CalibrateSpec};

pub const COLUMNS: [&str; 11] = [
    "sweep_axis",
    "sweep_value",
    "L",
    "M",
    "phase_mode",
    "cee_db",
    "p_max_dbm",
    "bits",
    "errors",
    "ber",
    "dropped_rounds",
];

/// Measured points of one series together with everything needed to rerun it.
#[derive(Debug, Clone)]
pub struct SeriesResult {
    pub run_name: String,
    pub label: String,
    pub axis: SweepAxis,
    /// Scenario after calibration.
    pub scenario: Scenario,
    pub calibration: Option<(CalibrateSpec, Calibration)>,
    pub points: Vec<BerPoint>,
}

fn phase_mode_name(p: PhaseMode) -> &'static str {
    match p {
        PhaseMode::Optimal => "optimal",
        PhaseMode::Random => "random",
    }
}

fn cee_cell(cee: Option<f64>) -> String {
    cee.map_or_else(|| "off".to_string(), |v| v.to_string())
}

fn header(s: &SeriesResult) -> anyhow::Result<String> {
    let sc = &s.scenario;
    let mut h = String::new();
    writeln!(h, "# ris-pnc sweep")?;
    writeln!(h, "# run: {}", s.run_name)?;
    writeln!(h, "# series: {}", s.label)?;
    writeln!(h, "# master_seed: {}", sc.master_seed)?;
    writeln!(h, "# sweep_axis: {}", s.axis)?;
    let values: Vec<String> = s.points.iter().map(|p| p.swept_value.to_string()).collect();
    writeln!(h, "# sweep_values: {}", values.join(", "))?;
    if let Some((spec, cal)) = &s.calibration {
        writeln!(
            h,
            "# calibration: target_ber={} at {}={} bracket_dbm=[{}, {}] tolerance_db={} rounds={} -> p_max_dbm={} (measured ber={})",
            spec.target_ber, s.axis, spec.at, spec.bracket_dbm.0, spec.bracket_dbm.1, spec.tolerance_db, spec.rounds,
            cal.p_max_dbm, cal.ber
        )?;
    }
    let grid = OfdmGrid::default();
    writeln!(
        h,
        "# ofdm: fft_len={FFT_LEN} cp_len={CP_LEN} data_carriers={DATA_CARRIERS} pilot_carriers={PILOT_CARRIERS} pilot_bins={:?} null_bins={:?}",
        grid.pilot_bins, grid.null_bins
    )?;
    let per_bin = noise_power_per_bin(sc.bandwidth_hz, sc.noise_figure_db)?;
    writeln!(h, "# noise_per_bin_dbm: {}", 10.0 * per_bin.log10() + 30.0)?;
    writeln!(h, "# config:")?;
    let sweep_values: Vec<f64> = s.points.iter().map(|p| p.swept_value).collect();
    for line in scenario_document(sc, s.axis, &sweep_values)?.lines().filter(|l| !l.is_empty()) {
        writeln!(h, "#   {line}")?;
    }
    Ok(h)
}

/// Renders one series as CSV text.
pub fn render_csv(s: &SeriesResult) -> anyhow::Result<String> {
    let mut out = header(s)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(COLUMNS)?;
    for p in &s.points {
        let sc = s.scenario.with_axis(s.axis, p.swept_value)?;
        w.write_record([
            s.axis.name().to_string(),
            p.swept_value.to_string(),
            sc.ris_elements.to_string(),
            sc.modulation.to_string(),
            phase_mode_name(sc.phase_mode).to_string(),
            cee_cell(sc.cee_db),
            sc.p_max_dbm.to_string(),
            p.bits.to_string(),
            p.errors.to_string(),
            p.ber.to_string(),
            p.dropped_rounds.to_string(),
        ])?;
    }
    out.push_str(std::str::from_utf8(&w.into_inner()?)?);
    Ok(out)
}

/// One CSV row as read back from disk.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Row {
    pub sweep_axis: String,
    pub sweep_value: f64,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub phase_mode: String,
    pub cee_db: String,
    pub p_max_dbm: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub dropped_rounds: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSeries {
    pub run_name: String,
    pub label: String,
    pub rows: Vec<Row>,
}

/// Reads a CSV produced by [`render_csv`].
pub fn parse_csv(text: &str) -> anyhow::Result<ParsedSeries> {
    let meta = |key: &str| {
        text.lines()
            .filter_map(|l| l.strip_prefix("# "))
            .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
            .map(str::to_string)
    };
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let rows = rdr.deserialize().collect::<Result<Vec<Row>, _>>()?;
    Ok(ParsedSeries { run_name: meta("run").unwrap_or_default(), label: meta("series").unwrap_or_default(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SeriesResult {
        let sc = Scenario { ris_elements: 16, modulation: 16, ..Scenario::default() };
        SeriesResult {
            run_name: "t".into(),
            label: "L=16, M=16".into(),
            axis: SweepAxis::PMaxDbm,
            scenario: sc,
            calibration: None,
            points: vec![
                BerPoint {
                    swept_value: 10.0,
                    bits: 1000,
                    errors: 3,
                    ber: 0.003,
                    dropped_rounds: 1,
                    rounds: 6,
                    hit_cap: true,
                },
                BerPoint {
                    swept_value: 12.5,
                    bits: 3,
                    errors: 1,
                    ber: 1.0 / 3.0,
                    dropped_rounds: 0,
                    rounds: 1,
                    hit_cap: false,
                },
            ],
        }
    }

    #[test]
    fn csv_layout() {
        let text = render_csv(&sample()).unwrap();
        assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.lines().collect();
        let first_row = lines.iter().position(|l| !l.starts_with('#')).unwrap();
        assert!(lines[..first_row].iter().any(|l| l.starts_with("# master_seed: 1")));
        assert!(lines[..first_row].iter().any(|l| l.contains("modulation = 16")));
        let embedded: String = lines[..first_row]
            .iter()
            .skip_while(|l| !l.starts_with("# config:"))
            .skip(1)
            .map(|l| format!("{}\n", l.trim_start_matches('#').trim_start()))
            .collect();
        let cfg = crate::config::parse_config(&embedded).unwrap();
        assert_eq!(cfg.series[0].scenario, sample().scenario);
        assert_eq!(cfg.series[0].values, vec![10.0, 12.5]);
        assert_eq!(lines[first_row], COLUMNS.join(","));
        assert_eq!(lines[first_row + 1], "p_max_dbm,10,16,16,optimal,off,10,1000,3,0.003,1");
        assert!(lines[first_row + 2].contains("0.3333333333333333"));
    }

    #[test]
    fn csv_round_trip() {
        let s = sample();
        let parsed = parse_csv(&render_csv(&s).unwrap()).unwrap();
        assert_eq!(parsed.label, "L=16, M=16");
        assert_eq!(parsed.run_name, "t");
        assert_eq!(parsed.rows.len(), 2);
        for (row, p) in parsed.rows.iter().zip(&s.points) {
            assert_eq!(row.sweep_value, p.swept_value);
            assert_eq!(row.ber, p.ber);
            assert_eq!(row.bits, p.bits);
            assert_eq!(row.errors, p.errors);
            assert_eq!(row.cee_db, "off");
        }
    }
}
