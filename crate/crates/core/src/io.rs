//! CSV output for curves and trajectories, and CSV input for sample sets.
//!
//! Floats are written with 17 significant digits so they round-trip.

use crate::error::{Error, Result};
use crate::pmean::PMeanCurve;
use crate::tailbone::{SampleSet, TailboneTrajectory};

/// `x` in scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
}

/// `p,nu_p,H_p,dnu_dp,method,residual`, one row per point.
pub fn curve_csv(curve: &PMeanCurve) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["p", "nu_p", "H_p", "dnu_dp", "method", "residual"])
        .unwrap();
    for pt in &curve.points {
        w.write_record([
            fmt_f64(pt.p),
            fmt_f64(pt.nu_p),
            fmt_f64(pt.h_p),
            fmt_opt(pt.dnu_dp),
            pt.method.map(|m| m.as_str()).unwrap_or_default().to_string(),
            fmt_f64(pt.residual),
        ])
        .unwrap();
    }
    finish(w)
}

/// `p,nu_1..nu_d,objective,iterations,converged` and a trailing
/// `# zeta: …` line.
pub fn trajectory_csv(traj: &TailboneTrajectory) -> String {
    let d = traj.entries.first().map_or(0, |e| e.nu.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["p".to_string()];
    header.extend((1..=d).map(|k| format!("nu_{k}")));
    header.extend(["objective", "iterations", "converged"].map(String::from));
    w.write_record(&header).unwrap();
    for e in &traj.entries {
        let mut row = vec![fmt_f64(e.p)];
        row.extend(e.nu.iter().map(|&v| fmt_f64(v)));
        row.push(fmt_f64(e.objective));
        row.push(e.iterations.to_string());
        row.push(e.converged.to_string());
        w.write_record(&row).unwrap();
    }
    let mut out = finish(w);
    match &traj.zeta {
        Some(z) => {
            let parts: Vec<String> = z.iter().map(|&v| fmt_f64(v)).collect();
            out.push_str(&format!("# zeta: {}\n", parts.join(",")));
        }
        None => out.push_str("# zeta: unstable\n"),
    }
    out
}

/// One point per row, comma separated. Blank lines and `#` comments are
/// skipped, as is a first row that does not parse as numbers (a header).
pub fn read_samples_csv(text: &str) -> Result<SampleSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::InvalidSamples(e.to_string()))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(_) => {
                let line = rec.position().map_or(i as u64 + 1, |p| p.line());
                return Err(Error::InvalidSamples(format!("line {line}: not a row of numbers")));
            }
        }
    }
    SampleSet::new(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tailbone::NdPMean;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, std::f64::consts::LN_2, 1e-300, -3.5e200, 1.0 / 3.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn samples_with_header_and_comments() {
        let s = read_samples_csv("x,y\n# comment\n1,2\n\n3, 4\n").unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.len(), 2);
        assert_eq!(s.point(1), &[3.0, 4.0]);
        assert!(read_samples_csv("1,2\n3\n").is_err());
        assert!(read_samples_csv("1,2\nfoo,4\n").is_err());
        assert!(read_samples_csv("").is_err());
    }

    #[test]
    fn trajectory_layout() {
        let traj = TailboneTrajectory {
            entries: vec![NdPMean {
                p: 2.0,
                nu: vec![1.0, -0.5],
                objective: 3.0,
                ln_objective: 3f64.ln(),
                iterations: 0,
                converged: true,
            }],
            zeta: None,
        };
        let text = trajectory_csv(&traj);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "p,nu_1,nu_2,objective,iterations,converged");
        assert!(lines[1].ends_with(",0,true"));
        assert_eq!(lines[2], "# zeta: unstable");
    }
}
