//! Touchstone version 1 two-port files in real/imaginary form.
//!
//! The writer emits the option line `# GHz S RI R <z0>` followed by one row
//! per frequency (`f S11 S21 S12 S22`), values with 8 significant digits and
//! frequencies written exactly. The reader accepts Hz/kHz/MHz/GHz and
//! RI/MA/DB data.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rfss_core::mna::{ParamKind, TwoPort};
use serde_json::json;

use crate::diag::CliError;

/// One frequency point: hertz and a 2x2 S matrix.
pub type Row = (f64, TwoPort);

/// Renders a table. Frequencies must be finite and strictly increasing and
/// every matrix must be a 2x2 S matrix referenced to `z0`.
pub fn render(rows: &[Row], z0: f64) -> Result<String, CliError> {
    for (i, (f, s)) in rows.iter().enumerate() {
        if !f.is_finite() || (i > 0 && *f <= rows[i - 1].0) {
            return Err(CliError::input(
                "unsorted-table",
                "touchstone frequencies must be strictly increasing",
                json!({ "row": i, "frequency_hz": f }),
            ));
        }
        if s.kind != ParamKind::S || s.ports() != 2 {
            return Err(CliError::input(
                "not-s2p",
                "touchstone rows must be 2-port S matrices",
                json!({ "row": i }),
            ));
        }
    }
    let mut out = format!("# GHz S RI R {z0}\n");
    for (f, s) in rows {
        write!(out, "{}", f / 1e9).unwrap();
        for (i, j) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let v = s.get(i, j);
            write!(out, " {:.7e} {:.7e}", v.re, v.im).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes `rows` to `path`. Nothing is created when the table is rejected.
pub fn write(path: &Path, rows: &[Row], z0: f64) -> Result<(), CliError> {
    let text = render(rows, z0)?;
    std::fs::write(path, text).map_err(|e| CliError::io(&path.display().to_string(), &e))
}

fn parse_error(line: usize, message: impl Into<String>) -> CliError {
    CliError::input("invalid-touchstone", message, json!({ "line": line }))
}

/// Parses a two-port Touchstone v1 file. Returns the rows (hertz) and the
/// reference impedance.
pub fn parse(text: &str) -> Result<(Vec<Row>, f64), CliError> {
    let mut scale = 1e9;
    let mut format = "MA".to_string();
    let mut z0 = 50.0;
    let mut seen_options = false;
    let mut numbers: Vec<(usize, f64)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('!').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(opts) = line.strip_prefix('#') {
            if seen_options {
                return Err(parse_error(n + 1, "more than one option line"));
            }
            seen_options = true;
            let tokens: Vec<String> = opts.split_whitespace().map(str::to_ascii_uppercase).collect();
            let mut t = tokens.iter();
            while let Some(tok) = t.next() {
                match tok.as_str() {
                    "HZ" => scale = 1.0,
                    "KHZ" => scale = 1e3,
                    "MHZ" => scale = 1e6,
                    "GHZ" => scale = 1e9,
                    "S" => {}
                    "Y" | "Z" | "H" | "G" => {
                        return Err(parse_error(n + 1, format!("only S data is supported, found {tok}")))
                    }
                    "RI" | "MA" | "DB" => format = tok.clone(),
                    "R" => {
                        z0 = t
                            .next()
                            .and_then(|v| v.parse::<f64>().ok())
                            .filter(|v| *v > 0.0)
                            .ok_or_else(|| parse_error(n + 1, "option R needs a positive value"))?;
                    }
                    other => return Err(parse_error(n + 1, format!("unknown option `{other}`"))),
                }
            }
            continue;
        }
        for tok in line.split_whitespace() {
            let v = tok
                .parse::<f64>()
                .map_err(|_| parse_error(n + 1, format!("not a number: `{tok}`")))?;
            numbers.push((n + 1, v));
        }
    }
    if !numbers.len().is_multiple_of(9) {
        let line = numbers.last().map_or(0, |x| x.0);
        return Err(parse_error(line, "two-port data needs 9 numbers per frequency"));
    }
    let mut rows = Vec::with_capacity(numbers.len() / 9);
    for chunk in numbers.chunks_exact(9) {
        let f = chunk[0].1 * scale;
        let c = |k: usize| {
            let (a, b) = (chunk[1 + 2 * k].1, chunk[2 + 2 * k].1);
            match format.as_str() {
                "RI" => Complex64::new(a, b),
                "MA" => Complex64::from_polar(a, b.to_radians()),
                _ => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
            }
        };
        let (s11, s21, s12, s22) = (c(0), c(1), c(2), c(3));
        let tp = TwoPort::from_rows(ParamKind::S, &[[s11, s12], [s21, s22]], z0)
            .map_err(|e| parse_error(chunk[0].0, e.to_string()))?;
        if let Some((prev, _)) = rows.last() {
            if f <= *prev {
                return Err(parse_error(chunk[0].0, "frequencies must be strictly increasing"));
            }
        }
        rows.push((f, tp));
    }
    Ok((rows, z0))
}

pub fn read(path: &Path) -> Result<(Vec<Row>, f64), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(&path.display().to_string(), &e))?;
    parse(&text)
}
