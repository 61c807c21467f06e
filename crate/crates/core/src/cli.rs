//! Command-line driver: JSON run configuration in, CSV sweep out.
//!
//! Exit codes: 0 on success, 1 for an invalid configuration or I/O failure,
//! 2 for a numerical failure (coefficients could not be built, or any point
//! flagged while `strict_numerics` is on).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fading::AlphaMuParams;
use crate::outage::{db_to_linear, OutageAnalysis, OutageReport, SystemConfig};
use crate::series::{Combiner, SeriesOptions};
use crate::sim::{self, McConfig, McOutage};

/// Column names written without simulation results.
pub const ANALYTIC_COLUMNS: [&str; 9] = [
    "snr_db",
    "p_u1",
    "p_u2",
    "p_overall",
    "p_u1_asym",
    "p_u2_asym",
    "p_overall_asym",
    "flag_u1",
    "flag_u2",
];

/// Columns appended when the simulation is enabled.
pub const MC_COLUMNS: [&str; 9] = [
    "mc_u1", "mc_u1_lo", "mc_u1_hi", "mc_u2", "mc_u2_lo", "mc_u2_hi", "mc_ov", "mc_ov_lo", "mc_ov_hi",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SnrGrid {
    /// `start, start + step, …` up to and including `stop` (within a tolerance
    /// of a millionth of a step).
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-6).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    #[serde(default = "enabled_by_default")]
    pub enabled: bool,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn enabled_by_default() -> bool {
    true
}

fn default_terms() -> usize {
    200
}

/// One run as read from the JSON configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub alpha: f64,
    pub mu: f64,
    pub h_hat: f64,
    pub num_tx_antennas: usize,
    pub num_rx_antennas: usize,
    pub combiner: Combiner,
    pub rho: f64,
    pub xi: f64,
    pub threshold_u1: f64,
    pub threshold_u2: f64,
    pub snr_db: SnrGrid,
    #[serde(default = "default_terms")]
    pub series_terms: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSpec>,
    #[serde(default)]
    pub strict_numerics: bool,
    /// CSV destination; standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn bad(field: &str, reason: impl std::fmt::Display) -> Error {
    Error::InvalidConfig(format!("`{field}` {reason}"))
}

impl RunSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run spec serializes")
    }

    /// The scenario at the first grid point.
    pub fn system_config(&self) -> Result<SystemConfig> {
        let fading = AlphaMuParams::new(self.alpha, self.mu, self.h_hat).map_err(field_error)?;
        let config = SystemConfig {
            num_tx_antennas: self.num_tx_antennas,
            num_rx_antennas: self.num_rx_antennas,
            rho: self.rho,
            xi: self.xi,
            threshold_u1: self.threshold_u1,
            threshold_u2: self.threshold_u2,
            snr: db_to_linear(self.snr_db.start),
            fading,
            combiner: self.combiner,
        };
        config.validate().map_err(field_error)?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.system_config()?;
        let g = &self.snr_db;
        for (name, v) in [("snr_db.start", g.start), ("snr_db.stop", g.stop), ("snr_db.step", g.step)] {
            if !v.is_finite() {
                return Err(bad(name, format!("= {v} must be finite")));
            }
        }
        if g.start > g.stop {
            return Err(bad("snr_db.start", format!("= {} exceeds snr_db.stop = {}", g.start, g.stop)));
        }
        if !(g.step > 0.0) {
            return Err(bad("snr_db.step", format!("= {} must be positive", g.step)));
        }
        if g.points().len() > 100_000 {
            return Err(bad("snr_db.step", "produces more than 100000 grid points"));
        }
        if self.series_terms == 0 {
            return Err(bad("series_terms", "must be at least 1"));
        }
        if let Some(mc) = &self.mc {
            if mc.trials == 0 {
                return Err(bad("mc.trials", "must be at least 1"));
            }
            if mc.workers == Some(0) {
                return Err(bad("mc.workers", "must be at least 1"));
            }
        }
        Ok(())
    }

    /// Simulation settings when enabled.
    pub fn mc_config(&self) -> Option<McConfig> {
        self.mc.as_ref().filter(|m| m.enabled).map(|m| McConfig {
            trials: m.trials,
            seed: m.seed,
            workers: m.workers.unwrap_or_else(sim::default_workers),
        })
    }

    pub fn series_options(&self) -> SeriesOptions {
        SeriesOptions::with_terms(self.series_terms)
    }
}

fn field_error(e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, value, reason } => bad(name, format!("= {value}: {reason}")),
        other => other,
    }
}

/// Outage sweeps for two-user TAS-NOMA over α-μ fading.
#[derive(Clone, Debug, Default, Parser)]
#[command(name = "tasnoma", version, about)]
pub struct Args {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// CSV destination (overrides the file; "-" for standard output).
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Number of series coefficients.
    #[arg(long, value_name = "INT")]
    pub terms: Option<usize>,
    /// Monte Carlo trials; enables the simulation if the file has none.
    #[arg(long, value_name = "INT")]
    pub trials: Option<u64>,
    /// Monte Carlo seed.
    #[arg(long, value_name = "INT")]
    pub seed: Option<u64>,
    /// Monte Carlo worker threads.
    #[arg(long, value_name = "INT")]
    pub workers: Option<usize>,
    /// Skip the simulation even if configured.
    #[arg(long)]
    pub no_mc: bool,
    /// Exit with status 2 if any point is flagged.
    #[arg(long)]
    pub strict: bool,
    /// Also write the c_i and ϱ_i coefficients into this directory.
    #[arg(long, value_name = "DIR")]
    pub dump_coefficients: Option<PathBuf>,
}

impl Args {
    /// Applies command-line overrides to a loaded spec.
    pub fn apply(&self, spec: &mut RunSpec) {
        if let Some(out) = &self.output {
            spec.output = (out.as_os_str() != "-").then(|| out.clone());
        }
        if let Some(t) = self.terms {
            spec.series_terms = t;
        }
        if self.trials.is_some() || self.seed.is_some() || self.workers.is_some() {
            let mc = spec.mc.get_or_insert(McSpec {
                enabled: true,
                trials: 1_000_000,
                seed: 0,
                workers: None,
            });
            if let Some(t) = self.trials {
                mc.trials = t;
                mc.enabled = true;
            }
            if let Some(s) = self.seed {
                mc.seed = s;
            }
            if let Some(w) = self.workers {
                mc.workers = Some(w);
            }
        }
        if self.no_mc {
            if let Some(mc) = &mut spec.mc {
                mc.enabled = false;
            }
        }
        if self.strict {
            spec.strict_numerics = true;
        }
    }
}

/// Results of a run, before any output is written.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub reports: Vec<OutageReport>,
    pub mc: Option<Vec<McOutage>>,
    pub analysis: OutageAnalysis,
}

impl RunOutput {
    pub fn any_flag(&self) -> bool {
        self.reports.iter().any(OutageReport::flagged)
    }
}

/// Builds coefficients once, sweeps the grid and runs the simulation.
pub fn execute(spec: &RunSpec) -> Result<RunOutput> {
    spec.validate()?;
    let config = spec.system_config()?;
    let grid = spec.snr_db.points();
    let analysis = OutageAnalysis::new(&config, &spec.series_options())?;
    let reports = analysis.sweep(&grid)?;
    let mc = match spec.mc_config() {
        Some(mc) => {
            let snrs: Vec<f64> = grid.iter().map(|&db| db_to_linear(db)).collect();
            Some(sim::estimate_outage_sweep(&config, &snrs, &mc)?)
        }
        None => None,
    };
    Ok(RunOutput { reports, mc, analysis })
}

fn flag(b: bool) -> u8 {
    u8::from(b)
}

/// Writes the sweep as CSV with every value at 17 significant digits.
pub fn write_csv<W: Write>(reports: &[OutageReport], mc: Option<&[McOutage]>, mut out: W) -> std::io::Result<()> {
    let mut header: Vec<&str> = ANALYTIC_COLUMNS.to_vec();
    if mc.is_some() {
        header.extend(MC_COLUMNS);
    }
    writeln!(out, "{}", header.join(","))?;
    for (i, r) in reports.iter().enumerate() {
        write!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            r.snr_db,
            r.p_u1,
            r.p_u2,
            r.p_overall,
            r.asym_u1,
            r.asym_u2,
            r.asym_overall,
            flag(r.flag_u1),
            flag(r.flag_u2)
        )?;
        if let Some(m) = mc.map(|m| &m[i]) {
            for e in [m.u1, m.u2, m.overall] {
                write!(out, ",{:.16e},{:.16e},{:.16e}", e.p_hat, e.ci95_low, e.ci95_high)?;
            }
        }
        writeln!(out)?;
    }
    out.flush()
}

/// [`write_csv`] into a file, with the path attached to any I/O error.
pub fn emit_csv(reports: &[OutageReport], mc: Option<&[McOutage]>, path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    write_csv(reports, mc, BufWriter::new(file)).map_err(io)
}

fn dump_coefficients(output: &RunOutput, dir: &Path) -> Result<()> {
    let io = |path: PathBuf| move |source| Error::Io { path, source };
    std::fs::create_dir_all(dir).map_err(io(dir.to_owned()))?;
    let p1 = dir.join("coefficients_phi1.csv");
    let f = File::create(&p1).map_err(io(p1.clone()))?;
    output.analysis.series().write_csv(BufWriter::new(f)).map_err(io(p1))?;
    let p2 = dir.join("coefficients_phi2.csv");
    let f = File::create(&p2).map_err(io(p2.clone()))?;
    output.analysis.tas().write_csv(BufWriter::new(f)).map_err(io(p2))?;
    Ok(())
}

fn fmt_p(p: f64, flagged: bool) -> String {
    format!("{p:>11.4e}{}", if flagged { "*" } else { " " })
}

/// Human-readable table of the sweep. Simulation estimates backed by fewer
/// than ten events are not compared.
pub fn write_summary<W: Write>(output: &RunOutput, mut out: W) -> std::io::Result<()> {
    let mc = output.mc.as_deref();
    write!(out, "{:>8} {:>12} {:>12} {:>12} {:>11} {:>11}", "snr_db", "p_u1", "p_u2", "p_overall", "asym_u1", "asym_u2")?;
    if mc.is_some() {
        write!(out, " {:>11} {:>7} {:>11} {:>7}", "mc_u1", "z_u1", "mc_u2", "z_u2")?;
    }
    writeln!(out)?;
    for (i, r) in output.reports.iter().enumerate() {
        write!(
            out,
            "{:>8.2} {} {} {} {:>11.4e} {:>11.4e}",
            r.snr_db,
            fmt_p(r.p_u1, r.flag_u1),
            fmt_p(r.p_u2, r.flag_u2),
            fmt_p(r.p_overall, r.flagged()),
            r.asym_u1,
            r.asym_u2
        )?;
        if let Some(m) = mc.map(|m| &m[i]) {
            for (e, p) in [(m.u1, r.p_u1), (m.u2, r.p_u2)] {
                let z = if e.resolvable() && e.std_error > 0.0 {
                    format!("{:>7.2}", (p - e.p_hat) / e.std_error)
                } else {
                    format!("{:>7}", "n/a")
                };
                write!(out, " {:>11.4e} {}", e.p_hat, z)?;
            }
        }
        writeln!(out)?;
    }
    if output.any_flag() {
        writeln!(out, "* flagged: truncation, cancellation or evaluation failure")?;
    }
    Ok(())
}

/// Runs the CLI and returns the process exit status.
pub fn run(args: &Args) -> i32 {
    let mut spec = match RunSpec::load(&args.config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    args.apply(&mut spec);
    if let Err(e) = spec.validate() {
        eprintln!("error: {e}");
        return 1;
    }
    if let Ok(config) = spec.system_config() {
        for w in config.warnings() {
            eprintln!("warning: {w}");
        }
    }

    let output = match execute(&spec) {
        Ok(o) => o,
        Err(e @ (Error::InvalidConfig(_) | Error::InvalidParameter { .. } | Error::Io { .. })) => {
            eprintln!("error: {e}");
            return 1;
        }
        Err(e) => {
            eprintln!("numerical failure: {e}");
            return 2;
        }
    };
    let tas = output.analysis.tas();
    if tas.truncation_count() < tas.requested_terms() {
        eprintln!(
            "note: antenna-selection series kept {} of {} terms (recurrence rounding limit)",
            tas.truncation_count(),
            tas.requested_terms()
        );
    }
    for r in output.reports.iter().filter(|r| r.flagged()) {
        for (user, err) in [("U1", &r.error_u1), ("U2", &r.error_u2)] {
            if let Some(e) = err {
                eprintln!("warning: {user} at {} dB: {e}", r.snr_db);
            }
        }
    }

    if let Some(dir) = &args.dump_coefficients {
        if let Err(e) = dump_coefficients(&output, dir) {
            eprintln!("error: {e}");
            return 1;
        }
    }

    let mc = output.mc.as_deref();
    let written = match &spec.output {
        Some(path) => emit_csv(&output.reports, mc, path).and_then(|()| {
            write_summary(&output, std::io::stdout().lock()).map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }),
        None => write_csv(&output.reports, mc, std::io::stdout().lock())
            .and_then(|()| write_summary(&output, std::io::stderr().lock()))
            .map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 1;
    }

    if spec.strict_numerics && output.any_flag() {
        eprintln!("strict numerics: at least one value is flagged");
        return 2;
    }
    0
}
