//! Whitespace-separated column files for generic plotting tools.
//!
//! Headers are `#` comment lines. Numbers are written in shortest
//! round-trip form, so re-reading a file gives back the exact values.

use std::io::{self, Write};

use swarmkit::bench::BenchTable;
use swarmkit::meanfield::{marginal, AxisName, DensityField};

/// What a column file is made from.
pub enum PlotSource<'a> {
    Density(&'a DensityField),
    Table(&'a BenchTable),
}

pub fn emit_plot_columns<W: Write>(source: PlotSource<'_>, out: W) -> io::Result<()> {
    match source {
        PlotSource::Density(f) => write_density(f, out),
        PlotSource::Table(t) => write_table(t, out),
    }
}

/// One-dimensional fields give `(x, rho)` pairs. Two-dimensional fields give
/// `(x, second, f)` triplets with x outermost and a blank line after each x
/// row. A full `(x, y, v)` field is reduced to its `(x, v)` marginal first.
fn write_density<W: Write>(field: &DensityField, mut out: W) -> io::Result<()> {
    let reduced;
    let field = if field.axes.y.is_some() && field.axes.v.is_some() {
        reduced = marginal(field, &[AxisName::V]);
        &reduced
    } else {
        field
    };
    let axes = field.axes;
    writeln!(out, "# t = {}", field.time)?;
    let second = match (axes.y, axes.v) {
        (Some(y), None) => Some(("y", y)),
        (None, Some(v)) => Some(("v", v)),
        _ => None,
    };
    match second {
        None => {
            writeln!(out, "# x rho")?;
            for (i, value) in field.values.iter().enumerate() {
                writeln!(out, "{} {}", axes.x.center(i), value)?;
            }
        }
        Some((label, axis)) => {
            writeln!(out, "# x {label} f")?;
            for i in 0..axes.nx() {
                for k in 0..axis.cells {
                    let value = field.values[i * axis.cells + k];
                    writeln!(out, "{} {} {}", axes.x.center(i), axis.center(k), value)?;
                }
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

/// Numeric table columns; a missing error is written as `nan`.
fn write_table<W: Write>(table: &BenchTable, mut out: W) -> io::Result<()> {
    writeln!(out, "# function and mode per row are in the CSV table")?;
    writeln!(
        out,
        "# m sigma1 sigma2 lambda1 lambda2 alpha beta nu xi N n_r rate error n_iter"
    )?;
    for r in &table.rows {
        writeln!(
            out,
            "{} {} {} {} {} {} {} {} {} {} {} {} {} {}",
            r.m,
            r.sigma1,
            r.sigma2,
            r.lambda1,
            r.lambda2,
            r.alpha,
            r.beta,
            r.nu,
            r.xi,
            r.n,
            r.n_r,
            r.rate,
            r.error.unwrap_or(f64::NAN),
            r.n_iter
        )?;
    }
    Ok(())
}
