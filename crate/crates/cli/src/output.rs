use std::fs;
use std::io::Write;
use std::path::Path;

use delayed_opinions::netgen::MixtureSpec;
use delayed_opinions::SignedWeightMatrix;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Named columns of equal length.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let records: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|row| {
                self.header
                    .iter()
                    .zip(row)
                    .map(|(k, &v)| (k.clone(), serde_json::json!(v)))
                    .collect()
            })
            .collect();
        serde_json::to_string_pretty(&records).expect("table serialization is infallible")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json() + "\n",
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialization is infallible") + "\n"
}

/// Writes to `path`, or to standard output when there is none.
pub fn emit(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, content)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())
                .map_err(|e| CliError::Validation(format!("cannot write to stdout: {e}")))
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

pub fn read_matrix(path: &Path) -> Result<SignedWeightMatrix, CliError> {
    Ok(SignedWeightMatrix::from_json(&read(path)?)?)
}

pub fn read_spec(path: &Path) -> Result<MixtureSpec, CliError> {
    let spec: MixtureSpec = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    spec.validate()?;
    Ok(spec)
}

pub fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path)
        .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_bit_for_bit() {
        let mut t = Table::new(vec!["a".into(), "b".into()]);
        let values = [0.1 + 0.2, -1.0 / 3.0, 1e-300, 6.02e23];
        t.rows.push(values[..2].to_vec());
        t.rows.push(values[2..].to_vec());
        let parsed: Vec<f64> = t
            .to_csv()
            .lines()
            .skip(1)
            .flat_map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect::<Vec<_>>())
            .collect();
        assert_eq!(parsed, values);
    }
}
