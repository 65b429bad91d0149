//! Artifact directory: CSVs with the config-hash trailer, field dumps and
//! JSON summaries.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use bbm_core::io::{fmt_f64, write_field_binary, write_field_csv, write_trajectory_csv, CsvWriter};
use bbm_core::dynamics::Trajectory;
use bbm_core::spectral::{ImethodParams, SpectralField};

use crate::error::CliError;

pub struct Artifacts {
    dir: PathBuf,
    hash: String,
    written: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path, hash: String) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    /// File names written so far, in order.
    pub fn written(&self) -> &[String] {
        &self.written
    }

    fn open(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        self.written.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let out = self.open(name)?;
        let mut csv = CsvWriter::new(out, header)?;
        for row in rows {
            csv.row(row)?;
        }
        csv.finish(Some(&self.hash))?;
        Ok(())
    }

    /// `(t, value)` series under the given column names.
    pub fn series(&mut self, name: &str, header: [&str; 2], t: &[f64], values: &[f64]) -> Result<(), CliError> {
        let rows: Vec<Vec<String>> = t.iter().zip(values).map(|(&a, &b)| vec![fmt_f64(a), fmt_f64(b)]).collect();
        self.csv(name, &header, &rows)
    }

    /// Writes `<stem>.csv` and `<stem>.bbm1`.
    pub fn field(&mut self, stem: &str, field: &SpectralField) -> Result<(), CliError> {
        let hash = self.hash.clone();
        let out = self.open(&format!("{stem}.csv"))?;
        write_field_csv(out, field, Some(&hash))?;
        let out = self.open(&format!("{stem}.bbm1"))?;
        write_field_binary(out, field)?;
        Ok(())
    }

    pub fn trajectory(&mut self, name: &str, traj: &Trajectory, params: &ImethodParams) -> Result<(), CliError> {
        let hash = self.hash.clone();
        let out = self.open(name)?;
        write_trajectory_csv(out, traj, params, Some(&hash))?;
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("summary serializes");
        text.push('\n');
        self.written.push(name.to_string());
        std::fs::write(self.dir.join(name), text)?;
        Ok(())
    }
}

/// JSON number, or `null` for non-finite values.
pub fn num(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x).map_or(serde_json::Value::Null, serde_json::Value::Number)
}

pub fn opt_num(x: Option<f64>) -> serde_json::Value {
    x.map_or(serde_json::Value::Null, num)
}
