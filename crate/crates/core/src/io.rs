//! CSV and JSON exchange formats.
//!
//! * wave field CSV: header `s,re,im`, one row per node;
//! * wave field JSON: `{"grid": {"s_min", "s_max", "n_points"}, "time", "values": [[re, im], ...]}`;
//! * price path CSV: `t,re,im` with `im = 0`;
//! * curve CSV: `s,<column>...`;
//! * coupled space-time CSV: `t,s,sigma_power,psi_power`.

use std::io::{Read, Write};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manakov::ManakovState;
use crate::market::{GbmPath, SpatialGrid, WaveField};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridRecord {
    s_min: f64,
    s_max: f64,
    n_points: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldRecord {
    grid: GridRecord,
    time: f64,
    values: Vec<[f64; 2]>,
}

pub fn write_field_csv<W: Write>(field: &WaveField<f64>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "re", "im"])?;
    for (s, v) in field.grid().nodes().iter().zip(field.values()) {
        w.serialize((s, v.re, v.im))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a field written by [`write_field_csv`]; the nodes must be uniform.
pub fn read_field_csv<R: Read>(input: R, time: f64) -> Result<WaveField<f64>> {
    let mut r = csv::Reader::from_reader(input);
    let mut s = Vec::new();
    let mut values = Vec::new();
    for row in r.deserialize() {
        let (si, re, im): (f64, f64, f64) = row?;
        s.push(si);
        values.push(Complex::new(re, im));
    }
    let (first, last) = match (s.first(), s.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(Error::Shape("empty field file".into())),
    };
    let grid = SpatialGrid::new(first, last, s.len())?;
    let tol = 1e-9 * grid.spacing();
    if s.iter()
        .enumerate()
        .any(|(i, x)| (x - grid.node(i)).abs() > tol)
    {
        return Err(Error::InvalidGrid(
            "field nodes are not uniformly spaced".into(),
        ));
    }
    WaveField::new(grid, time, values)
}

pub fn write_field_json<W: Write>(field: &WaveField<f64>, out: W) -> Result<()> {
    let g = field.grid();
    let rec = FieldRecord {
        grid: GridRecord {
            s_min: g.s_min(),
            s_max: g.s_max(),
            n_points: g.n_points(),
        },
        time: field.time(),
        values: field.values().iter().map(|v| [v.re, v.im]).collect(),
    };
    serde_json::to_writer_pretty(out, &rec)?;
    Ok(())
}

pub fn read_field_json<R: Read>(input: R) -> Result<WaveField<f64>> {
    let rec: FieldRecord = serde_json::from_reader(input)?;
    let grid = SpatialGrid::new(rec.grid.s_min, rec.grid.s_max, rec.grid.n_points)?;
    WaveField::new(
        grid,
        rec.time,
        rec.values
            .iter()
            .map(|v| Complex::new(v[0], v[1]))
            .collect(),
    )
}

pub fn write_path_csv<W: Write>(path: &GbmPath<f64>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "re", "im"])?;
    for (t, s) in path.times.iter().zip(&path.prices) {
        w.serialize((t, s, 0.0))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `s` and one column per named series.
pub fn write_curves_csv<W: Write>(s: &[f64], columns: &[(&str, &[f64])], out: W) -> Result<()> {
    if let Some((name, _)) = columns.iter().find(|(_, c)| c.len() != s.len()) {
        return Err(Error::Shape(format!(
            "column `{name}` does not match the price axis"
        )));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["s"];
    header.extend(columns.iter().map(|(n, _)| *n));
    w.write_record(&header)?;
    for (i, si) in s.iter().enumerate() {
        let mut row = vec![*si];
        row.extend(columns.iter().map(|(_, c)| c[i]));
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Appends every state of a coupled run as `t,s,sigma_power,psi_power` rows.
pub fn write_spacetime_csv<'a, W: Write>(
    states: impl IntoIterator<Item = &'a ManakovState<f64>>,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "s", "sigma_power", "psi_power"])?;
    for st in states {
        let nodes = st.grid().nodes();
        for ((s, u), v) in nodes
            .iter()
            .zip(st.sigma_field().values())
            .zip(st.psi_field().values())
        {
            w.serialize((st.time(), s, u.norm_sqr(), v.norm_sqr()))?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> WaveField<f64> {
        let g = SpatialGrid::new(-1.0, 1.0, 9).unwrap();
        WaveField::from_fn(g, 0.25, |s| Complex::new(s * s, -s)).unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let f = field();
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("s,re,im\n"));
        let back = read_field_csv(&buf[..], 0.25).unwrap();
        assert!(back.max_abs_diff(&f) == 0.0);
    }

    #[test]
    fn json_round_trip() {
        let f = field();
        let mut buf = Vec::new();
        write_field_json(&f, &mut buf).unwrap();
        let back = read_field_json(&buf[..]).unwrap();
        assert_eq!(back, f);
        assert!(read_field_json(
            &br#"{"grid":{"s_min":0,"s_max":1,"n_points":8},"time":0,"values":[],"x":1}"#[..]
        )
        .is_err());
    }

    #[test]
    fn curves_need_matching_lengths() {
        let mut buf = Vec::new();
        assert!(write_curves_csv(&[1.0, 2.0], &[("a", &[1.0])], &mut buf).is_err());
        let mut buf = Vec::new();
        write_curves_csv(&[1.0, 2.0], &[("a", &[0.5, -0.0])], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "s,a\n1.0,0.5\n2.0,-0.0\n");
    }
}
