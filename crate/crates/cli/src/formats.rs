//! Text formats read and written by the CLI.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which round-trips
//! every finite `f64`. Missing values are written as `NaN`.
//!
//! System file:
//!
//! ```text
//! bilinear <n> <m>
//! A 0
//! <n rows of n numbers>
//! A 1
//! ...
//! ```

use std::io::{Read, Write};

use bilinear_sysid::experiment::{BmsbReportRow, ExperimentRow, GroupSummary, RowStatus};
use bilinear_sysid::linalg::{Matrix, Vector};
use bilinear_sysid::{BilinearSystem, NoiseParams, Trajectory};

use crate::{parse_error, Result};

pub const ROWS_HEADER: [&str; 12] = [
    "trial",
    "T",
    "sigma_u",
    "sigma_w",
    "err0_normalized",
    "errk_avg_normalized",
    "composite_error",
    "cond_xtilde",
    "rho_atilde",
    "max_state_norm",
    "seed",
    "status",
];

pub const BMSB_HEADER: [&str; 7] = [
    "config",
    "check",
    "estimate",
    "std_error",
    "threshold",
    "result",
    "detail",
];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    fmt_f64(x.unwrap_or(f64::NAN))
}

pub fn format_system(sys: &BilinearSystem) -> String {
    let n = sys.n();
    let mut out = format!("bilinear {} {}\n", n, sys.m());
    for (k, a) in sys.matrices().iter().enumerate() {
        out.push_str(&format!("A {k}\n"));
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| fmt_f64(a[(i, j)])).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn parse_system(text: &str, path: &str) -> Result<BilinearSystem> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line, header) = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, "empty system file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let dims = match fields.as_slice() {
        ["bilinear", n, m] => n.parse::<usize>().ok().zip(m.parse::<usize>().ok()),
        _ => None,
    };
    let (n, m) = dims.ok_or_else(|| parse_error(path, line, "expected `bilinear <n> <m>`"))?;
    if n == 0 || m == 0 {
        return Err(parse_error(path, line, "n and m must be positive"));
    }

    let mut matrices = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let (line, tag) = lines
            .next()
            .ok_or_else(|| parse_error(path, line, format!("missing block A {k}")))?;
        if tag.split_whitespace().collect::<Vec<_>>() != ["A", &k.to_string()] {
            return Err(parse_error(path, line, format!("expected `A {k}`")));
        }
        let mut data = Vec::with_capacity(n * n);
        for _ in 0..n {
            let (line, row) = lines
                .next()
                .ok_or_else(|| parse_error(path, line, format!("A {k} has fewer than {n} rows")))?;
            let values: Vec<f64> = row
                .split_whitespace()
                .map(|x| x.parse().map_err(|_| parse_error(path, line, format!("bad number {x:?}"))))
                .collect::<Result<_>>()?;
            if values.len() != n {
                return Err(parse_error(path, line, format!("expected {n} numbers, got {}", values.len())));
            }
            data.extend(values);
        }
        matrices.push(Matrix::from_row_major(n, n, &data)?);
    }
    if let Some((line, _)) = lines.next() {
        return Err(parse_error(path, line, "trailing content after the last block"));
    }
    Ok(BilinearSystem::new(matrices)?)
}

pub fn read_system(path: &std::path::Path) -> Result<BilinearSystem> {
    parse_system(&std::fs::read_to_string(path)?, &path.display().to_string())
}

/// One row per `t = 0..=T+1`; the inputs of the last row are blank.
pub fn write_trajectory<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    let (n, m) = (traj.n(), traj.m());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_owned()];
    header.extend((1..=n).map(|i| format!("x_{i}")));
    header.extend((1..=m).map(|k| format!("u_{k}")));
    w.write_record(&header)?;
    let inputs = traj.inputs();
    for (t, x) in traj.states().iter().enumerate() {
        let mut record = vec![t.to_string()];
        record.extend(x.as_slice().iter().map(|&v| fmt_f64(v)));
        match inputs.get(t) {
            Some(u) => record.extend(u.as_slice().iter().map(|&v| fmt_f64(v))),
            None => record.extend(std::iter::repeat(String::new()).take(m)),
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a trajectory CSV. Noise is not recorded in the file, so the result
/// carries `σ_w = 0` and no noise sequence.
pub fn read_trajectory<R: Read>(input: R, sigma_u: f64, path: &str) -> Result<Trajectory> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    let n = header.iter().filter(|h| h.starts_with("x_")).count();
    let m = header.iter().filter(|h| h.starts_with("u_")).count();
    let mut expected = vec!["t".to_owned()];
    expected.extend((1..=n).map(|i| format!("x_{i}")));
    expected.extend((1..=m).map(|k| format!("u_{k}")));
    if header != expected || n == 0 || m == 0 {
        return Err(parse_error(path, 1, "header must be t,x_1..x_n,u_1..u_m"));
    }

    let mut states = Vec::new();
    let mut inputs = Vec::new();
    let mut final_seen = false;
    for (idx, record) in r.records().enumerate() {
        let record = record?;
        let line = idx + 2;
        if final_seen {
            return Err(parse_error(path, line, "rows after the row with blank inputs"));
        }
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| parse_error(path, line, format!("bad number {s:?}")))
        };
        let t: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| parse_error(path, line, "bad time index"))?;
        if t != idx {
            return Err(parse_error(path, line, format!("expected t = {idx}, got {t}")));
        }
        let x: Vec<f64> = (1..=n).map(|i| num(&record[i])).collect::<Result<_>>()?;
        states.push(Vector::new(x)?);
        let u_fields: Vec<&str> = (n + 1..=n + m).map(|i| record[i].trim()).collect();
        if u_fields.iter().all(|s| s.is_empty()) {
            final_seen = true;
        } else {
            let u: Vec<f64> = u_fields.iter().map(|s| num(s)).collect::<Result<_>>()?;
            inputs.push(Vector::new(u)?);
        }
    }
    if !final_seen {
        return Err(parse_error(path, states.len() + 1, "last row must have blank inputs"));
    }
    let params = NoiseParams::new(sigma_u, 0.0)?;
    Ok(Trajectory::new(states, inputs, None, 0, params)?)
}

pub fn write_rows<W: Write>(out: W, rows: &[ExperimentRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ROWS_HEADER)?;
    for r in rows {
        w.write_record([
            r.trial.to_string(),
            r.horizon.to_string(),
            fmt_f64(r.sigma_u),
            fmt_f64(r.sigma_w),
            fmt_opt(r.err0_normalized),
            fmt_opt(r.errk_avg_normalized),
            fmt_opt(r.composite_error),
            fmt_opt(r.cond_xtilde),
            fmt_f64(r.rho_atilde),
            fmt_opt(r.max_state_norm),
            r.seed.to_string(),
            r.status.as_str().to_owned(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R, path: &str) -> Result<Vec<ExperimentRow>> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().ne(ROWS_HEADER) {
        return Err(parse_error(path, 1, "unexpected rows header"));
    }
    r.records()
        .enumerate()
        .map(|(idx, record)| {
            let record = record?;
            let line = idx + 2;
            let bad = |what: &str| parse_error(path, line, format!("bad {what}"));
            let float = |i: usize| -> Result<f64> { record[i].parse().map_err(|_| bad(ROWS_HEADER[i])) };
            let opt = |i: usize| -> Result<Option<f64>> { float(i).map(|x| (!x.is_nan()).then_some(x)) };
            Ok(ExperimentRow {
                trial: record[0].parse().map_err(|_| bad("trial"))?,
                horizon: record[1].parse().map_err(|_| bad("T"))?,
                sigma_u: float(2)?,
                sigma_w: float(3)?,
                err0_normalized: opt(4)?,
                errk_avg_normalized: opt(5)?,
                composite_error: opt(6)?,
                cond_xtilde: opt(7)?,
                rho_atilde: float(8)?,
                max_state_norm: opt(9)?,
                seed: record[10].parse().map_err(|_| bad("seed"))?,
                status: RowStatus::parse(&record[11]).ok_or_else(|| bad("status"))?,
            })
        })
        .collect()
}

pub fn write_summary<W: Write>(out: W, metric: &str, groups: &[GroupSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sigma_u", "sigma_w", "T", "metric", "count", "median", "mean", "std_dev"])?;
    for g in groups {
        w.write_record([
            fmt_f64(g.sigma_u),
            fmt_f64(g.sigma_w),
            g.horizon.to_string(),
            metric.to_owned(),
            g.count.to_string(),
            fmt_f64(g.median),
            fmt_f64(g.mean),
            fmt_f64(g.std_dev),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table1<W: Write>(out: W, table: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sigma_u", "rho_atilde"])?;
    for &(s, rho) in table {
        w.write_record([fmt_f64(s), fmt_f64(rho)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_bmsb_report<W: Write>(out: W, rows: &[BmsbReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BMSB_HEADER)?;
    for r in rows {
        let record = match &r.outcome {
            Ok(est) => [
                r.config.to_string(),
                r.check.to_owned(),
                fmt_f64(est.probability),
                fmt_f64(est.std_error),
                fmt_f64(est.threshold),
                if est.passed { "pass" } else { "fail" }.to_owned(),
                format!("lower_bound={:.6}; samples={}", est.lower_bound, est.samples),
            ],
            Err(e) => [
                r.config.to_string(),
                r.check.to_owned(),
                fmt_f64(f64::NAN),
                fmt_f64(f64::NAN),
                fmt_f64(f64::NAN),
                "error".to_owned(),
                e.to_string(),
            ],
        };
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
