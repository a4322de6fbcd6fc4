use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

/// 12 significant digits, plain notation where it stays readable.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&mag) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn push_f64(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&v| fmt12(v)).collect());
    }

    fn write_to<W: Write>(&self, w: W) -> io::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(&self.header).map_err(csv_to_io)?;
        for r in &self.rows {
            wtr.write_record(r).map_err(csv_to_io)?;
        }
        wtr.flush()
    }
}

// keeps the io kind so a closed pipe stays recognizable
fn csv_to_io(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => io::Error::other(format!("{other:?}")),
    }
}

/// Writes the table to `out` (or stdout) and the sidecar next to it as
/// `<out>.json`.
pub fn emit<S: Serialize>(table: &Table, sidecar: Option<&S>, out: Option<&Path>) -> io::Result<()> {
    match out {
        Some(path) => {
            let file = std::fs::File::create(path)?;
            table.write_to(io::BufWriter::new(file))?;
            if let Some(meta) = sidecar {
                let json = serde_json::to_string_pretty(meta).map_err(io::Error::other)?;
                std::fs::write(path.with_extension("json"), json + "\n")?;
            }
        }
        None => table.write_to(io::stdout().lock())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::fmt12;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt12(0.48815088419156627), "0.488150884192");
        assert_eq!(fmt12(1.0), "1");
        assert_eq!(fmt12(123.456), "123.456");
        assert_eq!(fmt12(f64::INFINITY), "inf");
        assert_eq!(fmt12(1.5e-7), "1.50000000000e-7");
    }
}
