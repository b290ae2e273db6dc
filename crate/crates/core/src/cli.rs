//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input (config, flags, unwritable
//! output), 2 numerical failure during integration.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::analysis::{energy_audit, summarize, SummaryReport};
use crate::config::{load_source, parse_config, RunConfig, SweepSpec};
use crate::dynamics::integrate;
use crate::output::{
    fmt_f64, plot_script, write_summary, write_sweep_csv, write_trace_csv, SummaryStatus, SweepRow,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const PLOT_FILE: &str = "plot_trace.py";
pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Debug, Parser)]
#[command(name = "twophase", version, about = "Unsymmetrical two-phase induction motor simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a config and write trace, summary and (optionally) a plot script.
    Run {
        /// Config file path or built-in name (paper_s3, symmetric_check, blocked_rotor).
        config: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Parse and validate a config, then print it with all defaults expanded.
    Validate { config: String },
    /// Run the config once per value of a numeric parameter.
    Sweep {
        config: String,
        /// Dotted parameter path, e.g. `load.torque` or `machine.turns_ratio_a`.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Comma-separated summary fields to tabulate (default: all).
        #[arg(long)]
        columns: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Overrides `output.dir`.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Overrides `integrator.record_every`.
    #[arg(long)]
    record_every: Option<usize>,
    /// Also write a matplotlib script for the trace.
    #[arg(long)]
    emit_plot_script: bool,
}

impl OutputArgs {
    fn apply(&self, config: &mut RunConfig) {
        if let Some(dir) = &self.output_dir {
            config.output.dir = dir.clone();
        }
        if let Some(n) = self.record_every {
            config.integrator.record_every = n;
        }
        if self.emit_plot_script {
            config.output.emit_plot_script = true;
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
            } else {
                let _ = write!(stdout, "{}", e.render());
            }
            return code;
        }
    };
    match cli.command {
        Command::Run { config, out } => cmd_run(&config, &out, stdout, stderr),
        Command::Validate { config } => cmd_validate(&config, stdout, stderr),
        Command::Sweep { config, axis, values, columns, out } => {
            cmd_sweep(&config, axis, &values, columns.as_deref(), &out, stdout, stderr)
        }
    }
}

fn load(arg: &str, stderr: &mut dyn Write) -> Option<RunConfig> {
    match load_source(arg).and_then(|text| parse_config(&text)) {
        Ok(c) => Some(c),
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            None
        }
    }
}

fn cmd_validate(arg: &str, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let Some(config) = load(arg, stderr) else { return EXIT_INVALID };
    let _ = write!(stdout, "{}", config.to_text());
    EXIT_OK
}

fn create_file(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
    ))
}

fn cmd_run(arg: &str, out: &OutputArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let Some(mut config) = load(arg, stderr) else { return EXIT_INVALID };
    out.apply(&mut config);
    let run = match config.resolve() {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INVALID;
        }
    };
    let dir = &config.output.dir;
    if let Err(e) = fs::create_dir_all(dir) {
        let _ = writeln!(stderr, "error: cannot create output directory {}: {e}", dir.display());
        return EXIT_INVALID;
    }

    let (trace, failure) = match integrate(&run.params, &run.scenario) {
        Ok(t) => (t, None),
        Err(f) => (f.partial, Some(f.error)),
    };

    let write_outputs = || -> anyhow::Result<()> {
        let csv_path = dir.join(TRACE_FILE);
        write_trace_csv(create_file(&csv_path)?, &trace)
            .with_context(|| format!("cannot write {}", csv_path.display()))?;
        if config.output.emit_plot_script {
            let path = dir.join(PLOT_FILE);
            fs::write(&path, plot_script(TRACE_FILE))
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
        Ok(())
    };
    if let Err(e) = write_outputs() {
        let _ = writeln!(stderr, "error: {e:#}");
        return EXIT_INVALID;
    }

    if let Some(err) = failure {
        let _ = writeln!(
            stderr,
            "numerical failure: {err}; partial trace ({} records) written to {}",
            trace.len(),
            dir.join(TRACE_FILE).display()
        );
        return EXIT_NUMERICAL;
    }

    let energy = energy_audit(&trace, &run.params);
    let summary = summarize(&trace, &run.params, run.supply_frequency, &run.criteria);
    let status = match &summary {
        Ok(s) => SummaryStatus::Settled(s),
        Err(e) => SummaryStatus::Unsettled(e.to_string()),
    };
    let summary_path = dir.join(SUMMARY_FILE);
    let written = create_file(&summary_path).and_then(|mut f| {
        write_summary(&mut f, &status, &energy)?;
        f.flush()?;
        Ok(())
    });
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e:#}");
        return EXIT_INVALID;
    }

    let _ = writeln!(stdout, "wrote {} records to {}", trace.len(), dir.join(TRACE_FILE).display());
    match &summary {
        Ok(s) => {
            let _ = writeln!(
                stdout,
                "settled at {} s: speed {} rad/s, slip {}, mean torque {} N·m",
                fmt_f64(s.settle_time),
                fmt_f64(s.final_speed_mech),
                fmt_f64(s.slip),
                fmt_f64(s.mean_torque)
            );
        }
        Err(e) => {
            let _ = writeln!(stdout, "no steady-state summary: {e}");
        }
    }
    EXIT_OK
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|v| !v.is_empty())
}

fn cmd_sweep(
    arg: &str,
    axis: String,
    values: &str,
    columns: Option<&str>,
    out: &OutputArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let Some(mut base) = load(arg, stderr) else { return EXIT_INVALID };
    out.apply(&mut base);

    let values: Result<Vec<f64>, _> = split_list(values).map(str::parse::<f64>).collect();
    let values = match values {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(stderr, "error: --values: {e}");
            return EXIT_INVALID;
        }
    };
    let columns: Vec<String> = match columns {
        Some(c) => split_list(c).map(str::to_owned).collect(),
        None => SummaryReport::FIELDS.iter().map(|s| s.to_string()).collect(),
    };
    let dir = base.output.dir.clone();
    let spec = SweepSpec { base, axis, values, columns };
    let configs = match spec.expand() {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INVALID;
        }
    };

    let rows = run_sweep(&spec.values, &configs);

    if let Err(e) = fs::create_dir_all(&dir) {
        let _ = writeln!(stderr, "error: cannot create output directory {}: {e}", dir.display());
        return EXIT_INVALID;
    }
    let path = dir.join(SWEEP_FILE);
    let written = create_file(&path).and_then(|f| {
        write_sweep_csv(f, &spec.axis, &spec.columns, &rows)
            .with_context(|| format!("cannot write {}", path.display()))
    });
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e:#}");
        return EXIT_INVALID;
    }
    let _ = write_sweep_csv(&mut *stdout, &spec.axis, &spec.columns, &rows);
    EXIT_OK
}

/// Runs each config independently; rows come back in input order.
pub fn run_sweep(values: &[f64], configs: &[RunConfig]) -> Vec<SweepRow> {
    values
        .par_iter()
        .zip(configs.par_iter())
        .map(|(&value, config)| {
            let outcome = config.resolve().map_err(|e| e.to_string()).and_then(|run| {
                let trace = integrate(&run.params, &run.scenario).map_err(|f| f.to_string())?;
                summarize(&trace, &run.params, run.supply_frequency, &run.criteria)
                    .map_err(|e| e.to_string())
            });
            SweepRow { value, outcome }
        })
        .collect()
}
