//! File formats written by the CLI: trace CSV, plain-text summary, sweep
//! table, and a matplotlib script that plots the trace.

use std::io::{Read, Write};

use crate::analysis::{EnergyReport, SummaryReport};
use crate::dynamics::{SimulationTrace, TraceRecord};

pub const TRACE_HEADER: &str =
    "t,v_sa,v_sb,i_sa,i_sb,i_ra,i_rb,psi_sa,psi_sb,psi_ra,psi_rb,te,te_ec,omega_mech,tl";

/// Shortest text that parses back to exactly `x`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_trace_csv<W: Write>(out: W, trace: &SimulationTrace) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TraceRecord::COLUMNS)?;
    for r in &trace.records {
        w.write_record(r.values().iter().map(|&v| fmt_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trace CSV back. The record spacing is taken from the first two
/// time stamps.
pub fn read_trace_csv<R: Read>(input: R) -> Result<SimulationTrace, csv::Error> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(TraceRecord::COLUMNS) {
        return Err(csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("unexpected trace header: {}", header.iter().collect::<Vec<_>>().join(",")),
        )));
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let mut v = [0.0; 15];
        for (slot, field) in v.iter_mut().zip(row.iter()) {
            *slot = field.parse().map_err(|e| {
                csv::Error::from(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("bad number `{field}`: {e}"),
                ))
            })?;
        }
        records.push(TraceRecord::from_values(v));
    }
    let spacing = match records.as_slice() {
        [a, b, ..] => b.t - a.t,
        _ => 0.0,
    };
    Ok(SimulationTrace { spacing, records })
}

/// Outcome of post-processing for the summary file.
pub enum SummaryStatus<'a> {
    Settled(&'a SummaryReport),
    /// Steady state was not reached or could not be analysed; the reason is
    /// recorded in the file.
    Unsettled(String),
}

pub fn write_summary<W: Write>(
    mut out: W,
    status: &SummaryStatus<'_>,
    energy: &EnergyReport,
) -> std::io::Result<()> {
    match status {
        SummaryStatus::Settled(s) => {
            for name in SummaryReport::FIELDS {
                writeln!(out, "{name}: {}", summary_value(s, name))?;
            }
        }
        SummaryStatus::Unsettled(reason) => {
            writeln!(out, "steady_state_reached: false")?;
            writeln!(out, "steady_state_note: {reason}")?;
        }
    }
    let rel = |r: f64| {
        if energy.stator_input_energy != 0.0 { r / energy.stator_input_energy } else { 0.0 }
    };
    let lines = [
        ("stator_input_energy", energy.stator_input_energy),
        ("stator_copper_loss", energy.stator_copper_loss),
        ("rotor_copper_loss", energy.rotor_copper_loss),
        ("field_energy_delta", energy.field_energy_delta),
        ("mechanical_energy_out_mutual", energy.mutual.mechanical_energy_out),
        ("residual_mutual", energy.mutual.residual),
        ("relative_residual_mutual", rel(energy.mutual.residual)),
        ("mechanical_energy_out_energy_consistent", energy.energy_consistent.mechanical_energy_out),
        ("residual_energy_consistent", energy.energy_consistent.residual),
        ("relative_residual_energy_consistent", rel(energy.energy_consistent.residual)),
    ];
    for (k, v) in lines {
        writeln!(out, "energy.{k}: {}", fmt_f64(v))?;
    }
    Ok(())
}

fn summary_value(s: &SummaryReport, name: &str) -> String {
    match name {
        "steady_state_reached" => s.steady_state_reached.to_string(),
        _ => s
            .field(name)
            .and_then(|v| v.parse::<f64>().ok())
            .map(fmt_f64)
            .unwrap_or_default(),
    }
}

/// Parses `key: value` lines.
pub fn parse_summary(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once(": "))
        .map(|(k, v)| (k.trim().to_owned(), v.trim().to_owned()))
        .collect()
}

/// One sweep row: the axis value and either the requested summary fields or
/// a failure message.
pub struct SweepRow {
    pub value: f64,
    pub outcome: Result<SummaryReport, String>,
}

pub fn write_sweep_csv<W: Write>(
    out: W,
    axis: &str,
    columns: &[String],
    rows: &[SweepRow],
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![axis.to_owned(), "status".to_owned()];
    header.extend(columns.iter().cloned());
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![fmt_f64(row.value)];
        match &row.outcome {
            Ok(s) => {
                rec.push("ok".into());
                rec.extend(columns.iter().map(|c| summary_value(s, c)));
            }
            Err(msg) => {
                rec.push(format!("failed: {msg}"));
                rec.extend(columns.iter().map(|_| String::new()));
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Python/matplotlib script that renders the five standard plots (supply
/// voltage, stator currents, rotor currents, torque, speed) from `csv_name`
/// located next to the script.
pub fn plot_script(csv_name: &str) -> String {
    PLOT_TEMPLATE.replace("{CSV}", csv_name)
}

const PLOT_TEMPLATE: &str = r#"#!/usr/bin/env python3
"""Plot a twophase trace CSV. Usage: python3 plot_trace.py [trace.csv]"""
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

here = os.path.dirname(os.path.abspath(__file__))
path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "{CSV}")
d = np.genfromtxt(path, delimiter=",", names=True)
t = d["t"]

figures = [
    ("supply_voltage", "Supply voltage", "V", [("v_sa", "aux (alpha)"), ("v_sb", "main (beta)")]),
    ("stator_current", "Stator current", "A", [("i_sa", "aux (alpha)"), ("i_sb", "main (beta)")]),
    ("rotor_current", "Rotor current", "A", [("i_ra", "alpha"), ("i_rb", "beta")]),
    ("torque", "Electromagnetic torque", "N m", [("te", "T_e"), ("te_ec", "T_e energy-consistent"), ("tl", "T_L")]),
    ("speed", "Rotor speed", "rad/s", [("omega_mech", "omega_mech")]),
]

out_dir = os.path.dirname(os.path.abspath(path))
for stem, title, unit, cols in figures:
    fig, ax = plt.subplots(figsize=(8, 3.5))
    for col, label in cols:
        ax.plot(t, d[col], label=label, linewidth=0.8)
    ax.set_title(title)
    ax.set_xlabel("t [s]")
    ax.set_ylabel(unit)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, stem + ".png"), dpi=120)
    plt.close(fig)
"#;
