use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::{CliError, CliResult, Settings};

/// Round to `digits` significant digits and print the shortest form.
pub fn sig(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{:.*e}", digits - 1, v).parse().expect("formatted float parses");
    rounded.to_string()
}

/// Collects command output; everything reaches stdout or `--out` in `finish`.
pub struct Printer {
    digits: usize,
    json: bool,
    out: Option<PathBuf>,
    text: String,
    value: Option<Value>,
    /// Set when the command already used `--out` as a directory.
    wrote_files: bool,
}

impl Printer {
    pub fn new(s: &Settings) -> Self {
        Self { digits: s.digits, json: s.json, out: s.out.clone(), text: String::new(), value: None, wrote_files: false }
    }

    pub fn num(&self, v: f64) -> String {
        sig(v, self.digits)
    }

    pub fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    pub fn set_json<T: Serialize>(&mut self, v: &T) -> CliResult<()> {
        self.value = Some(serde_json::to_value(v)?);
        Ok(())
    }

    /// Write `name` under the `--out` directory (created on demand).
    pub fn write_file(&mut self, dir: &Path, name: &str, body: &str) -> CliResult<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        self.wrote_files = true;
        Ok(path)
    }

    pub fn finish(self) -> CliResult<()> {
        let body = match (&self.value, self.json) {
            (Some(v), true) => format!("{}\n", serde_json::to_string_pretty(v)?),
            _ => self.text,
        };
        match &self.out {
            Some(path) if !self.wrote_files => fs::write(path, body).map_err(|e| CliError::io(path, e)),
            _ => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(body.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
            }
        }
    }
}
