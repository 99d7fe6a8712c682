//! Output formatting: 10 significant digits everywhere, one JSON object or
//! one pretty text block per run, stdout or a file.

use std::io::Write;
use std::path::PathBuf;

use qdlab::error::Error;

/// Formats with 10 significant digits (plain notation where reasonable,
/// scientific otherwise).
pub fn fmt_g10(x: f64) -> String {
    if x == 0.0 {
        return "0.000000000".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.9e}")
    }
}

/// Rounds a value to the 10 significant digits the pretty mode prints, so
/// both modes expose identical numbers.
fn round_g10(x: f64) -> f64 {
    fmt_g10(x).parse().unwrap_or(x)
}

pub struct OutputSink {
    out: Option<PathBuf>,
    json: bool,
    record: Vec<(String, Vec<(String, f64)>)>,
    pretty_lines: Vec<String>,
    raw: Option<String>,
}

impl OutputSink {
    pub fn new(out: Option<PathBuf>, json: bool) -> Result<Self, Error> {
        Ok(Self { out, json, record: Vec::new(), pretty_lines: Vec::new(), raw: None })
    }

    /// Adds a named group of numeric results.
    pub fn record(&mut self, name: &str, fields: &[(&str, f64)]) {
        self.record.push((
            name.to_string(),
            fields.iter().map(|(k, v)| (k.to_string(), round_g10(*v))).collect(),
        ));
    }

    /// Adds a human-readable block (ignored in JSON mode).
    pub fn pretty(&mut self, text: String) {
        self.pretty_lines.push(text);
    }

    /// Replaces all output with raw text (CSV); emitted in either mode.
    pub fn raw(&mut self, text: String) {
        self.raw = Some(text);
    }

    pub fn finish(&mut self) -> Result<(), Error> {
        let body = if let Some(raw) = &self.raw {
            raw.clone()
        } else if self.json {
            let mut map = serde_json::Map::new();
            for (name, fields) in &self.record {
                let mut inner = serde_json::Map::new();
                for (k, v) in fields {
                    inner.insert(
                        k.clone(),
                        serde_json::Number::from_f64(*v)
                            .map(serde_json::Value::Number)
                            .unwrap_or(serde_json::Value::Null),
                    );
                }
                map.insert(name.clone(), serde_json::Value::Object(inner));
            }
            serde_json::to_string_pretty(&serde_json::Value::Object(map))
                .map_err(|e| Error::InvalidInput(format!("json encoding: {e}")))?
        } else {
            self.pretty_lines.join("\n")
        };
        match &self.out {
            Some(path) => {
                let mut f = std::fs::File::create(path)
                    .map_err(|e| Error::InvalidInput(format!("cannot write '{}': {e}", path.display())))?;
                writeln!(f, "{body}")
                    .map_err(|e| Error::InvalidInput(format!("write failed: {e}")))?;
            }
            None => println!("{body}"),
        }
        Ok(())
    }
}
