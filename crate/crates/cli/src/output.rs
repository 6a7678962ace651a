//! The single writer for a run's output directory. Every file carries the
//! toolkit version and the config hash.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Output {
    dir: PathBuf,
    hash: String,
    command: String,
}

impl Output {
    pub fn new(dir: &Path, hash: String, command: &str) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash,
            command: command.to_string(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn stamp(&self) -> String {
        format!("gamow {VERSION} config {}", self.hash)
    }

    pub fn meta(&self) -> Value {
        json!({
            "toolkit": "gamow",
            "version": VERSION,
            "config_hash": self.hash,
            "command": self.command,
        })
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
    }

    /// `{"meta": ..., <fields of body>}`; `body` must serialize to an object.
    pub fn json<S: Serialize>(&self, name: &str, body: &S) -> Result<(), CliError> {
        let mut value = serde_json::to_value(body).map_err(|e| CliError::Failed(e.to_string()))?;
        let map = value
            .as_object_mut()
            .ok_or_else(|| CliError::Failed(format!("{name}: body is not an object")))?;
        map.insert("meta".into(), self.meta());
        let text =
            serde_json::to_string_pretty(&value).map_err(|e| CliError::Failed(e.to_string()))?;
        self.write(name, &(text + "\n"))
    }

    /// CSV with a leading `#` stamp line.
    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)
            .map_err(|e| CliError::Failed(e.to_string()))?;
        for r in rows {
            w.write_record(r)
                .map_err(|e| CliError::Failed(e.to_string()))?;
        }
        let body = w
            .into_inner()
            .map_err(|e| CliError::Failed(e.to_string()))?;
        let body = String::from_utf8(body).expect("csv writes utf-8");
        self.write(name, &format!("# {}\n{body}", self.stamp()))
    }

    /// SVG with the stamp as a comment after the opening tag.
    pub fn svg(&self, name: &str, svg: &str) -> Result<(), CliError> {
        let comment = format!("<!-- {} -->\n", self.stamp());
        let text = match svg.find('\n') {
            Some(i) => format!("{}{comment}{}", &svg[..=i], &svg[i + 1..]),
            None => format!("{svg}\n{comment}"),
        };
        self.write(name, &text)
    }

    /// PGM raster; the stamp goes in a header comment the reader skips.
    pub fn pgm(&self, name: &str, pgm: &str) -> Result<(), CliError> {
        let text = match pgm.find('\n') {
            Some(i) => format!(
                "{}# config {} version {VERSION}\n{}",
                &pgm[..=i],
                self.hash,
                &pgm[i + 1..]
            ),
            None => pgm.to_string(),
        };
        self.write(name, &text)
    }

    pub fn text(&self, name: &str, body: &str) -> Result<(), CliError> {
        self.write(name, &format!("<!-- {} -->\n{body}", self.stamp()))
    }

    /// Wall time goes to a separate log so the result files stay
    /// byte-identical across runs.
    pub fn timing(&self, seconds: f64) -> Result<(), CliError> {
        self.write(
            &format!("{}.timing", self.command.replace('-', "_")),
            &format!("# {}\nwall_time_seconds {seconds:.3}\n", self.stamp()),
        )
    }
}
