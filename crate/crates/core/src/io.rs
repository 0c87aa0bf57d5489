//! Plain-text output: 15-significant-digit numbers and CSV tables.

use std::fmt::Write as _;
use std::io::{self, Write};

/// Formats like C's `%.15g`.
pub fn fmt_g15(v: f64) -> String {
    fmt_g(v, 15)
}

/// Formats like C's `%.{digits}g`.
pub fn fmt_g(v: f64, digits: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = digits.max(1);
    let sci = format!("{:.*e}", p - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Joins a row of numbers with commas.
pub fn csv_row(values: impl IntoIterator<Item = f64>) -> String {
    let mut line = String::new();
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str(&fmt_g15(v));
    }
    line
}

/// Writes a header line followed by one row per record.
pub fn write_columns<W: Write>(out: &mut W, header: &[&str], columns: &[&[f64]]) -> io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    let rows = columns.iter().map(|c| c.len()).min().unwrap_or(0);
    let mut line = String::new();
    for r in 0..rows {
        line.clear();
        for (j, c) in columns.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            let _ = write!(line, "{}", fmt_g15(c[r]));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
