//! Density snapshots as CSV or a compact little-endian binary dump.
//!
//! CSV layout: a header `axis,name,lower,upper,cells`, one `axis` record per
//! axis in storage order, a `time` record, a `values` marker, then one value
//! per line in row-major order (x outermost, v fastest).
//!
//! Binary layout: the magic `SWKDENS\0`, `u32` version, `u32` axis count,
//! per axis a `u8` name byte, `f64` lower, `f64` upper and `u64` cells, then
//! `f64` time and the values as `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::{Error, Result};

use super::grid::{Axes, Axis, AxisName, DensityField};

pub const MAGIC: &[u8; 8] = b"SWKDENS\0";
pub const VERSION: u32 = 1;

pub fn write_csv<W: Write>(field: &DensityField, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record(["axis", "name", "lower", "upper", "cells"])?;
    for (name, a) in field.axes.list() {
        w.write_record([
            "axis".to_string(),
            name.label().to_string(),
            a.lower.to_string(),
            a.upper.to_string(),
            a.cells.to_string(),
        ])?;
    }
    w.write_record(["time".to_string(), field.time.to_string()])?;
    w.write_record(["values"])?;
    for v in &field.values {
        w.write_record([v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<DensityField> {
    let mut r = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_reader(input);
    let mut axes: Vec<(AxisName, Axis)> = Vec::new();
    let mut time = None;
    let mut values = Vec::new();
    let mut in_values = false;
    for record in r.records() {
        let record = record?;
        let field = |i: usize| {
            record
                .get(i)
                .ok_or_else(|| Error::Format(format!("short record {record:?}")))
        };
        let num = |i: usize| -> Result<f64> {
            field(i)?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("bad number in {record:?}: {e}")))
        };
        if in_values {
            values.push(num(0)?);
            continue;
        }
        match field(0)? {
            "axis" => {
                let cells = field(4)?
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Format(format!("bad cell count: {e}")))?;
                axes.push((
                    AxisName::from_label(field(1)?)?,
                    Axis::new(num(2)?, num(3)?, cells),
                ));
            }
            "time" => time = Some(num(1)?),
            "values" => in_values = true,
            other => return Err(Error::Format(format!("unexpected record `{other}`"))),
        }
    }
    let field = DensityField {
        axes: assemble_axes(&axes)?,
        values,
        time: time.ok_or_else(|| Error::Format("missing time record".into()))?,
    };
    field.validate().map_err(|e| Error::Format(e.to_string()))?;
    Ok(field)
}

fn assemble_axes(list: &[(AxisName, Axis)]) -> Result<Axes> {
    let names: Vec<AxisName> = list.iter().map(|(n, _)| *n).collect();
    let valid = matches!(
        names.as_slice(),
        [AxisName::X]
            | [AxisName::X, AxisName::Y]
            | [AxisName::X, AxisName::V]
            | [AxisName::X, AxisName::Y, AxisName::V]
    );
    if !valid {
        return Err(Error::Format(format!("axes {names:?} are not x[, y][, v]")));
    }
    let find = |n: AxisName| list.iter().find(|(m, _)| *m == n).map(|(_, a)| *a);
    Ok(Axes {
        x: find(AxisName::X).expect("checked above"),
        y: find(AxisName::Y),
        v: find(AxisName::V),
    })
}

pub fn write_binary<W: Write>(field: &DensityField, mut out: W) -> Result<()> {
    let axes = field.axes.list();
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(axes.len() as u32).to_le_bytes())?;
    for (name, a) in axes {
        out.write_all(&[name.label().as_bytes()[0]])?;
        out.write_all(&a.lower.to_le_bytes())?;
        out.write_all(&a.upper.to_le_bytes())?;
        out.write_all(&(a.cells as u64).to_le_bytes())?;
    }
    out.write_all(&field.time.to_le_bytes())?;
    for v in &field.values {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<DensityField> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n_axes = read_u32(&mut input)?;
    if n_axes == 0 || n_axes > 3 {
        return Err(Error::Format(format!("bad axis count {n_axes}")));
    }
    let mut list = Vec::new();
    for _ in 0..n_axes {
        let mut name = [0u8; 1];
        input.read_exact(&mut name)?;
        let name = AxisName::from_label(&(name[0] as char).to_string())?;
        let lower = read_f64(&mut input)?;
        let upper = read_f64(&mut input)?;
        let cells = read_u64(&mut input)? as usize;
        list.push((name, Axis::new(lower, upper, cells)));
    }
    let axes = assemble_axes(&list)?;
    axes.validate().map_err(|e| Error::Format(e.to_string()))?;
    let time = read_f64(&mut input)?;
    let values = (0..axes.len())
        .map(|_| read_f64(&mut input))
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityField { axes, values, time })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Writes CSV for a `.csv` extension and binary otherwise.
pub fn save(field: &DensityField, path: &Path) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    if path.extension().is_some_and(|e| e == "csv") {
        write_csv(field, file)
    } else {
        write_binary(field, file)
    }
}

pub fn load(path: &Path) -> Result<DensityField> {
    let file = BufReader::new(File::open(path)?);
    if path.extension().is_some_and(|e| e == "csv") {
        read_csv(file)
    } else {
        read_binary(file)
    }
}
