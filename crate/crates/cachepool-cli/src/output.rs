//! Deterministic text output: fixed 10-significant-digit numbers and
//! plain CSV writers (schemas are versioned in the README).

use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Formats with exactly 10 significant digits, trimming trailing zeros;
/// very large/small magnitudes switch to scientific notation.
pub fn sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = v.abs();
    if (1e-4..1e12).contains(&a) {
        let decimals = (9 - a.log10().floor() as i64).clamp(0, 17) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{v:.9e}")
    }
}

pub struct CsvFile {
    file: std::io::BufWriter<std::fs::File>,
    path: std::path::PathBuf,
}

impl CsvFile {
    pub fn create(dir: &Path, name: &str, header: &str) -> Result<CsvFile, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))?;
        let path = dir.join(name);
        let file = std::fs::File::create(&path)
            .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", path.display())))?;
        let mut out = CsvFile { file: std::io::BufWriter::new(file), path };
        out.row(header)?;
        Ok(out)
    }

    pub fn row(&mut self, line: &str) -> Result<(), CliError> {
        writeln!(self.file, "{line}")
            .map_err(|e| CliError::runtime(format!("write {}: {e}", self.path.display())))
    }

    pub fn finish(mut self) -> Result<std::path::PathBuf, CliError> {
        self.file
            .flush()
            .map_err(|e| CliError::runtime(format!("flush {}: {e}", self.path.display())))?;
        Ok(self.path)
    }
}
