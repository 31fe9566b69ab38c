//! CSV emission and ingestion.
//!
//! Formats (exact headers):
//! - norm series: `t,kind,value`, rows ordered by (kind, t);
//! - tau curves: `t,label,tau`, rows ordered by (label, t);
//! - comparison: `t,h1,h2,margin`;
//! - fit reports: `t,rho,residual,k_lo,k_hi,floor_hit`;
//! - spectral snapshots: `j_1,...,j_n,re,im`, one row per retained mode in
//!   flat lattice order; the loader checks Hermitian symmetry.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! identical inputs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::bounds::{CompareReport, TauCurve};
use crate::error::{Error, Result};
use crate::estimator::DecayFit;
use crate::field::SpectralField;
use crate::lattice::Lattice;
use crate::norms::NormSeries;

fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.is_finite() && (v.abs() >= 1e-4 && v.abs() < 1e15) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// `t,kind,value` with deterministic (kind, t) ordering.
pub fn norm_series_csv(series: &[&NormSeries]) -> String {
    let mut sorted: Vec<&&NormSeries> = series.iter().collect();
    sorted.sort_by_key(|s| s.kind);
    let mut out = String::from("t,kind,value\n");
    for s in sorted {
        for sample in &s.samples {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_f64(sample.t),
                s.kind.label(),
                fmt_f64(sample.value)
            );
        }
    }
    out
}

/// `t,label,tau` with deterministic (label, t) ordering.
pub fn tau_curves_csv(curves: &[&TauCurve]) -> String {
    let mut sorted: Vec<&&TauCurve> = curves.iter().collect();
    sorted.sort_by_key(|c| c.label);
    let mut out = String::from("t,label,tau\n");
    for c in sorted {
        for (t, tau) in c.t.iter().zip(&c.tau) {
            let _ = writeln!(out, "{},{},{}", fmt_f64(*t), c.label.label(), fmt_f64(*tau));
        }
    }
    out
}

/// `t,h1,h2,margin`.
pub fn compare_csv(report: &CompareReport) -> String {
    let mut out = String::from("t,h1,h2,margin\n");
    for i in 0..report.t.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(report.t[i]),
            fmt_f64(report.h1[i]),
            fmt_f64(report.h2[i]),
            fmt_f64(report.margin[i])
        );
    }
    out
}

/// `t,rho,residual,k_lo,k_hi,floor_hit` for the successful fits.
pub fn fit_report_csv(fits: &[(f64, DecayFit)]) -> String {
    let mut out = String::from("t,rho,residual,k_lo,k_hi,floor_hit\n");
    for (t, fit) in fits {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f64(*t),
            fmt_f64(fit.rho),
            fmt_f64(fit.residual),
            fit.k_lo,
            fit.k_hi,
            fit.floor_hit
        );
    }
    out
}

/// Spectral snapshot: `j_1,...,j_n,re,im`, one row per retained mode.
pub fn spectral_csv(field: &SpectralField) -> String {
    let lat = field.lattice();
    let mut out = String::new();
    for axis in 1..=lat.dim() {
        let _ = write!(out, "j_{axis},");
    }
    out.push_str("re,im\n");
    let mut j = vec![0i64; lat.dim()];
    for (flat, c) in field.coeffs().iter().enumerate() {
        lat.mode_of(flat, &mut j);
        for v in &j {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{},{}", fmt_f64(c.re), fmt_f64(c.im));
    }
    out
}

/// Parses a spectral snapshot; the mode cube is inferred from the rows and
/// Hermitian symmetry is validated.
pub fn parse_spectral_csv(text: &str, split: usize) -> Result<SpectralField> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("empty spectral CSV".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[cols.len() - 2] != "re" || cols[cols.len() - 1] != "im" {
        return Err(Error::Config(
            "spectral CSV header must be j_1,...,j_n,re,im".into(),
        ));
    }
    let dim = cols.len() - 2;
    let mut rows: Vec<(Vec<i64>, Complex64)> = Vec::new();
    let mut max_mode = 0i64;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != dim + 2 {
            return Err(Error::Config(format!(
                "spectral CSV row {} has {} fields, expected {}",
                lineno + 2,
                parts.len(),
                dim + 2
            )));
        }
        let mut j = Vec::with_capacity(dim);
        for part in &parts[..dim] {
            let v: i64 = part
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("bad mode index {part:?}: {e}")))?;
            max_mode = max_mode.max(v.abs());
            j.push(v);
        }
        let re: f64 = parts[dim]
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("bad re field: {e}")))?;
        let im: f64 = parts[dim + 1]
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("bad im field: {e}")))?;
        rows.push((j, Complex64::new(re, im)));
    }
    if rows.is_empty() {
        return Err(Error::Config("spectral CSV has no rows".into()));
    }
    let lattice = Lattice::new(dim, split, max_mode.max(1) as usize)?;
    let mut field = SpectralField::zero(lattice);
    for (j, c) in rows {
        field.set(&j, c);
    }
    field.require_real()?;
    Ok(field)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_spectral_csv(path: &Path, split: usize) -> Result<SpectralField> {
    let text = std::fs::read_to_string(path)?;
    parse_spectral_csv(&text, split)
}

/// Two-column gnuplot-friendly data file.
pub fn plot_columns(header: &str, xs: &[f64], ys: &[f64]) -> String {
    let mut out = format!("# {header}\n");
    for (x, y) in xs.iter().zip(ys) {
        let _ = writeln!(out, "{} {}", fmt_f64(*x), fmt_f64(*y));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::BoundLabel;
    use crate::norms::{NormKind, NormSeries};

    #[test]
    fn norm_series_rows_are_sorted_by_kind_then_time() {
        let mut a = NormSeries::new(NormKind::L1);
        a.push(0.0, 1.0).unwrap();
        a.push(1.0, 2.0).unwrap();
        let mut b = NormSeries::new(NormKind::Hp);
        b.push(0.0, 3.0).unwrap();
        let csv = norm_series_csv(&[&a, &b]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,kind,value");
        assert_eq!(lines[1], "0,Hp,3");
        assert_eq!(lines[2], "0,l1,1");
        assert_eq!(lines[3], "1,l1,2");
    }

    #[test]
    fn tau_csv_format() {
        let c = TauCurve {
            label: BoundLabel::Thm1,
            t: vec![0.0, 0.5],
            tau: vec![0.1, 0.05],
        };
        let csv = tau_curves_csv(&[&c]);
        assert!(csv.starts_with("t,label,tau\n"));
        assert!(csv.contains("0.5,thm1,0.05"));
    }

    #[test]
    fn spectral_round_trip_via_csv() {
        let lat = Lattice::new(2, 1, 2).unwrap();
        let mut f = SpectralField::zero(lat);
        f.set(&[1, -2], Complex64::new(0.25, 0.125));
        f.set(&[-1, 2], Complex64::new(0.25, -0.125));
        let csv = spectral_csv(&f);
        let back = parse_spectral_csv(&csv, 1).unwrap();
        assert_eq!(back.lattice().dim(), 2);
        for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn loader_rejects_asymmetric_snapshots() {
        let csv = "j_1,re,im\n1,0.5,0.5\n-1,0.5,0.5\n";
        assert!(matches!(
            parse_spectral_csv(csv, 1),
            Err(Error::SymmetryViolation { .. })
        ));
    }

    #[test]
    fn float_formatting_round_trips() {
        for v in [0.0, 1.0, -2.5e-13, 3.15334809493716, 1e18, 5e-324] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, v, "{s}");
        }
    }
}
