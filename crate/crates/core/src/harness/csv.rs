//! CSV output for sweep reports.
//!
//! One header line, one line per (SNR, decoder), `\n` terminated. Real
//! numbers use nine significant digits in the shortest of fixed or
//! exponent notation (C's `%.9g`).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::sweep::{SweepReport, SweepRow};
use crate::error::{Result, StcError};

pub const CSV_HEADER: &str =
    "snr_db,decoder,code,modulation,channel,trials,ser,nodes_mean,nodes_p95,nodes_max,sorts_mean,time_ns_mean";

/// Formats `x` like C's `%.9g`.
pub fn format_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes `report` as CSV to `out`.
pub fn write_csv<W: Write>(report: &SweepReport, mut out: W) -> Result<()> {
    out.write_all(CSV_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            format_g9(r.snr_db),
            r.decoder,
            r.code,
            r.modulation,
            r.channel,
            r.trials,
            format_g9(r.ser),
            format_g9(r.nodes_mean),
            format_g9(r.nodes_p95),
            r.nodes_max,
            format_g9(r.sorts_mean),
            format_g9(r.time_ns_mean),
        )?;
    }
    out.flush()?;
    Ok(())
}

/// `emit_csv(report, path)`.
pub fn emit_csv(report: &SweepReport, path: &Path) -> Result<()> {
    let file = File::create(path)
        .map_err(|e| StcError::Io(format!("{}: {e}", path.display())))?;
    write_csv(report, BufWriter::new(file))
}

/// Parses text produced by [`write_csv`].
pub fn parse_csv(text: &str) -> Result<SweepReport> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(StcError::InvalidConfig(format!(
                "unexpected CSV header {other:?}"
            )))
        }
    }
    let bad = |line: usize, what: &str| StcError::InvalidConfig(format!("line {line}: bad {what}"));
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let lineno = n + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(bad(lineno, "field count"));
        }
        let real = |i: usize, name: &str| f[i].parse::<f64>().map_err(|_| bad(lineno, name));
        let int = |i: usize, name: &str| f[i].parse::<u64>().map_err(|_| bad(lineno, name));
        rows.push(SweepRow {
            snr_db: real(0, "snr_db")?,
            decoder: f[1].to_string(),
            code: f[2].to_string(),
            modulation: int(3, "modulation")? as usize,
            channel: f[4].to_string(),
            trials: int(5, "trials")? as usize,
            ser: real(6, "ser")?,
            nodes_mean: real(7, "nodes_mean")?,
            nodes_p95: real(8, "nodes_p95")?,
            nodes_max: int(9, "nodes_max")?,
            sorts_mean: real(10, "sorts_mean")?,
            time_ns_mean: real(11, "time_ns_mean")?,
        });
    }
    Ok(SweepReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(snr: f64, decoder: &str) -> SweepRow {
        SweepRow {
            snr_db: snr,
            decoder: decoder.into(),
            code: "golden-dv".into(),
            modulation: 16,
            channel: "markov-0.9".into(),
            trials: 100,
            ser: 0.0125,
            nodes_mean: 123.456789123,
            nodes_p95: 250.0,
            nodes_max: 4368,
            sorts_mean: 2.0,
            time_ns_mean: 15234.5,
        }
    }

    fn to_string(report: &SweepReport) -> String {
        let mut buf = Vec::new();
        write_csv(report, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn g9_formatting() {
        assert_eq!(format_g9(0.0), "0");
        assert_eq!(format_g9(10.0), "10");
        assert_eq!(format_g9(-2.5), "-2.5");
        assert_eq!(format_g9(0.0125), "0.0125");
        assert_eq!(format_g9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_g9(123456789.0), "123456789");
        assert_eq!(format_g9(1234567890.0), "1.23456789e+09");
        assert_eq!(format_g9(0.00001234), "1.234e-05");
        assert_eq!(format_g9(0.0001234), "0.0001234");
        assert_eq!(format_g9(9.9999999999), "10");
        assert_eq!(format_g9(2.0 / 3.0 * 1e-7), "6.66666667e-08");
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(to_string(&SweepReport::default()), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn one_row_is_two_lines() {
        let text = to_string(&SweepReport { rows: vec![row(10.0, "fast")] });
        assert_eq!(text.lines().count(), 2);
        assert!(text.ends_with('\n') && !text.contains('\r'));
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "10,fast,golden-dv,16,markov-0.9,100,0.0125,123.456789,250,4368,2,15234.5"
        );
    }

    #[test]
    fn parse_rejects_wrong_header() {
        assert!(parse_csv("a,b,c\n").is_err());
        assert!(parse_csv(&format!("{CSV_HEADER}\n1,2\n")).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip_within_nine_digits(
            snr in -10.0f64..40.0,
            ser in 0.0f64..1.0,
            mean in 0.0f64..1e7,
            max in 0u64..1_000_000_000,
        ) {
            let mut r = row(snr, "sphere");
            r.ser = ser;
            r.nodes_mean = mean;
            r.nodes_max = max;
            let report = SweepReport { rows: vec![r.clone()] };
            let back = parse_csv(&to_string(&report)).unwrap();
            let b = &back.rows[0];
            let rel = |a: f64, b: f64| (a - b).abs() <= 5e-9 * a.abs().max(1e-300);
            prop_assert!(rel(r.snr_db, b.snr_db));
            prop_assert!(rel(r.ser, b.ser));
            prop_assert!(rel(r.nodes_mean, b.nodes_mean));
            prop_assert_eq!(r.nodes_max, b.nodes_max);
            prop_assert_eq!(&r.decoder, &b.decoder);
            prop_assert_eq!(&r.channel, &b.channel);
            // formatting is idempotent after one round trip
            prop_assert_eq!(to_string(&back), to_string(&report));
        }
    }
}
