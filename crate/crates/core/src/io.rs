//! CSV and JSON interchange.
//!
//! Series files have the header `t,x1,...,xd,y`. Rows are sorted stably by
//! `t` (numerically if every label parses as a number, otherwise
//! lexicographically) and the original labels are kept.

use crate::error::{FcpError, Result};
use crate::fdh::FrontierEstimate;
use crate::model::Series;
use crate::scalar::Scalar;
use crate::scores::ScoreSeries;
use serde::Serialize;
use std::cmp::Ordering;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

pub fn read_series<T: Scalar, R: Read>(reader: R) -> Result<Series<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    if cols.len() < 3
        || !cols[0].eq_ignore_ascii_case("t")
        || !cols[cols.len() - 1].eq_ignore_ascii_case("y")
    {
        return Err(FcpError::Parse(format!(
            "header must be t,x1,...,xd,y; got {}",
            cols.join(",")
        )));
    }
    let d = cols.len() - 2;
    let mut rows: Vec<(String, Vec<T>, T)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != d + 2 {
            return Err(FcpError::Parse(format!(
                "line {line}: expected {} fields, got {}",
                d + 2,
                rec.len()
            )));
        }
        let mut vals = Vec::with_capacity(d + 1);
        for j in 1..=d + 1 {
            let v: f64 = rec[j].parse().map_err(|_| {
                FcpError::Parse(format!("line {line}: '{}' is not a number", &rec[j]))
            })?;
            vals.push(T::lit(v));
        }
        let y = vals.pop().expect("d + 1 values");
        rows.push((rec[0].to_string(), vals, y));
    }
    let numeric: Option<Vec<f64>> = rows.iter().map(|(t, _, _)| t.parse::<f64>().ok()).collect();
    let mut order: Vec<usize> = (0..rows.len()).collect();
    match numeric {
        Some(keys) => {
            order.sort_by(|&a, &b| keys[a].partial_cmp(&keys[b]).unwrap_or(Ordering::Equal))
        }
        None => order.sort_by(|&a, &b| rows[a].0.cmp(&rows[b].0)),
    }
    let mut labels = Vec::with_capacity(rows.len());
    let mut data = Vec::with_capacity(rows.len());
    let mut slots: Vec<Option<(String, Vec<T>, T)>> = rows.into_iter().map(Some).collect();
    for i in order {
        let (t, x, y) = slots[i].take().expect("each row once");
        labels.push(t);
        data.push((x, y));
    }
    Series::from_rows(data)?.with_labels(labels)
}

pub fn read_series_file<T: Scalar>(path: &Path) -> Result<Series<T>> {
    read_series(File::open(path)?)
}

pub fn write_series<T: Scalar, W: Write>(series: &Series<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=series.d()).map(|j| format!("x{j}")));
    header.push("y".into());
    w.write_record(&header)?;
    for (i, o) in series.obs().iter().enumerate() {
        let t = series
            .labels()
            .map_or_else(|| o.t.to_string(), |l| l[i].clone());
        let mut rec = vec![t];
        rec.extend(o.x.iter().map(|v| v.to_string()));
        rec.push(o.y.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_series_file<T: Scalar>(series: &Series<T>, path: &Path) -> Result<()> {
    write_series(series, BufWriter::new(File::create(path)?))
}

/// Antichain points of a fitted frontier, `x1,...,xd,y`. For `d = 1` the
/// rows are the staircase corners in increasing `x`.
pub fn write_frontier<T: Scalar, W: Write>(frontier: &FrontierEstimate<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=frontier.d()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    w.write_record(&header)?;
    let mut pts: Vec<&(Vec<T>, T)> = frontier.points().iter().collect();
    pts.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(u, v)| u.partial_cmp(v).unwrap_or(Ordering::Equal))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    });
    for (x, y) in pts {
        let mut rec: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        rec.push(y.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// `t,r_hat,active` with `active` as 0/1.
pub fn write_scores<T: Scalar, W: Write>(scores: &ScoreSeries<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "r_hat", "active"])?;
    for (i, (r, a)) in scores.r_hat.iter().zip(&scores.active).enumerate() {
        w.write_record([(i + 1).to_string(), r.to_string(), u8::from(*a).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON followed by a newline.
pub fn write_json<V: Serialize + ?Sized, W: Write>(value: &V, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn write_json_file<V: Serialize + ?Sized>(value: &V, path: &Path) -> Result<()> {
    write_json(value, BufWriter::new(File::create(path)?))
}
