use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;
use tempfile::NamedTempFile;

use crate::CliError;

const DIGITS: usize = 12;

/// `x` with 12 significant digits, trailing zeros trimmed.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..DIGITS as i32).contains(&exp) {
        let decimals = (DIGITS as i32 - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.') } else { &s };
        if s == "-0" { "0".into() } else { s.to_string() }
    } else {
        let s = format!("{x:.*e}", DIGITS - 1);
        let (mantissa, e) = s.split_once('e').expect("scientific format");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{e}")
    }
}

/// Rounds every float in `v` to 12 significant digits.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64");
            if let Some(r) = num(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

pub struct Outputs {
    dir: PathBuf,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    /// Writes `bytes` to `name` through a temporary file and a rename.
    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let mut tmp = NamedTempFile::new_in(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        tmp.write_all(bytes).map_err(|e| CliError::io(&path, e))?;
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            tmp.as_file()
                .set_permissions(fs::Permissions::from_mode(0o644))
                .map_err(|e| CliError::io(&path, e))?;
        }
        tmp.as_file().sync_all().map_err(|e| CliError::io(&path, e))?;
        tmp.persist(&path).map_err(|e| CliError::io(&path, e.error))?;
        Ok(path)
    }

    pub fn write_json(&self, name: &str, value: &impl serde::Serialize) -> Result<PathBuf, CliError> {
        let mut v = serde_json::to_value(value).map_err(|e| CliError::Runtime(e.to_string()))?;
        round_json(&mut v);
        let mut text = serde_json::to_string_pretty(&v).map_err(|e| CliError::Runtime(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn write_csv(&self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Runtime(e.to_string());
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
        self.write(name, &bytes)
    }
}
