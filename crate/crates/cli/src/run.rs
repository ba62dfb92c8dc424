//! Sweep execution and output files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ris_pnc::sim::{calibrate_power, sweep};

use crate::config::RunConfig;
use crate::plot::render_svg;
use crate::report::{parse_csv, render_csv, SeriesResult};

/// Files written by a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutput {
    pub csv: Vec<PathBuf>,
    pub plot: Option<PathBuf>,
}

fn slug(label: &str) -> String {
    let mut s = String::new();
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            s.push(c.to_ascii_lowercase());
        } else if !s.ends_with('_') {
            s.push('_');
        }
    }
    s.trim_matches('_').to_string()
}

fn csv_path(dir: &Path, name: &str, index: usize, label: &str) -> PathBuf {
    let tail = slug(label);
    let file = if tail.is_empty() {
        format!("{name}_{:02}.csv", index + 1)
    } else {
        format!("{name}_{:02}_{tail}.csv", index + 1)
    };
    dir.join(file)
}

fn simulate(cfg: &RunConfig, pool: &rayon::ThreadPool, log: &mut dyn Write) -> Result<Vec<SeriesResult>> {
    let mut results = Vec::with_capacity(cfg.series.len());
    for s in &cfg.series {
        let mut scenario = s.scenario.clone();
        let mut calibration = None;
        if let Some(spec) = &cfg.calibrate {
            let mut probe = scenario.with_axis(cfg.sweep_axis, spec.at)?;
            probe.rounds = spec.rounds;
            let cal = pool
                .install(|| calibrate_power::<f64>(&probe, spec.target_ber, spec.bracket_dbm, spec.tolerance_db))
                .with_context(|| format!("calibrating series '{}'", s.label))?;
            writeln!(log, "{}: calibrated p_max_dbm = {:.3} (ber {:e})", s.label, cal.p_max_dbm, cal.ber)?;
            scenario.p_max_dbm = cal.p_max_dbm;
            calibration = Some((spec.clone(), cal));
        }
        let points = pool
            .install(|| sweep::<f64>(&scenario, cfg.sweep_axis, &s.values))
            .with_context(|| format!("simulating series '{}'", s.label))?;
        results.push(SeriesResult {
            run_name: cfg.name.clone(),
            label: s.label.clone(),
            axis: cfg.sweep_axis,
            scenario,
            calibration,
            points,
        });
    }
    Ok(results)
}

fn summary(results: &[SeriesResult], out: &mut dyn Write) -> Result<()> {
    for r in results {
        writeln!(out, "\n{} ({} sweep, seed {})", r.label, r.axis, r.scenario.master_seed)?;
        writeln!(
            out,
            "{:>5} {:>12} {:>12} {:>10} {:>12} {:>8}",
            "point",
            r.axis.name(),
            "bits",
            "errors",
            "ber",
            "dropped"
        )?;
        for (i, p) in r.points.iter().enumerate() {
            writeln!(
                out,
                "{:>5} {:>12} {:>12} {:>10} {:>12.4e} {:>8}{}",
                i,
                p.swept_value,
                p.bits,
                p.errors,
                p.ber,
                p.dropped_rounds,
                if p.hit_cap { " (round cap)" } else { "" }
            )?;
        }
    }
    Ok(())
}

/// Runs every series, writes one CSV per series and optionally an SVG plot,
/// and prints a summary table to `out`.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<RunOutput> {
    let dir = &cfg.out_dir;
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let probe = dir.join(".ris-pnc-write-check");
    fs::write(&probe, b"").with_context(|| format!("output directory {} is not writable", dir.display()))?;
    fs::remove_file(&probe)?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build()?;
    let results = simulate(cfg, &pool, out)?;

    let mut written = RunOutput::default();
    for (i, r) in results.iter().enumerate() {
        let path = csv_path(dir, &cfg.name, i, &r.label);
        fs::write(&path, render_csv(r)?).with_context(|| format!("cannot write {}", path.display()))?;
        written.csv.push(path);
    }
    summary(&results, out)?;

    if cfg.format.plot() {
        let path = render_plot_files(&cfg.name, &written.csv, &dir.join(format!("{}.svg", cfg.name)))?;
        written.plot = Some(path);
    }
    for p in written.csv.iter().chain(&written.plot) {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(written)
}

/// Renders CSV files into one SVG.
pub fn render_plot_files(title: &str, csv_files: &[PathBuf], svg_path: &Path) -> Result<PathBuf> {
    let series = csv_files
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            parse_csv(&text).with_context(|| format!("malformed CSV {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    fs::write(svg_path, render_svg(title, &series)).with_context(|| format!("cannot write {}", svg_path.display()))?;
    Ok(svg_path.to_path_buf())
}
