//! Self-describing reports: a run manifest followed by result fields, as
//! plain text or JSON.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use tvd_core::rational::{decimal_string, fraction_string};
use tvd_core::Rational;

const DECIMAL_DIGITS: usize = 15;

/// Everything needed to rerun a command and get the same bytes back.
#[derive(Debug, Default)]
pub struct RunManifest {
    pub command: String,
    /// `(role, path, sha256)` in argument order.
    pub inputs: Vec<(String, String, String)>,
    pub params: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            ..Self::default()
        }
    }

    pub fn input(&mut self, role: &str, path: &str, contents: &[u8]) {
        let digest = hex::encode(Sha256::digest(contents));
        self.inputs.push((role.into(), path.into(), digest));
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.params.insert(key.into(), value.to_string());
    }

    fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "inputs": self.inputs.iter().map(|(role, path, sha)| json!({
                "role": role, "path": path, "sha256": sha,
            })).collect::<Vec<_>>(),
            "params": self.params,
        })
    }
}

pub enum Field {
    Rational(Rational),
    Text(String),
    List(Vec<String>),
}

pub struct Report {
    pub manifest: RunManifest,
    fields: Vec<(String, Field)>,
}

impl Report {
    pub fn new(manifest: RunManifest) -> Self {
        Self {
            manifest,
            fields: Vec::new(),
        }
    }

    pub fn rational(&mut self, key: &str, r: &Rational) -> &mut Self {
        self.fields.push((key.into(), Field::Rational(r.clone())));
        self
    }

    pub fn text(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.fields.push((key.into(), Field::Text(value.to_string())));
        self
    }

    pub fn list(&mut self, key: &str, values: Vec<String>) -> &mut Self {
        self.fields.push((key.into(), Field::List(values)));
        self
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            let mut result = Map::new();
            for (k, f) in &self.fields {
                let v = match f {
                    Field::Rational(r) => json!({
                        "fraction": fraction_string(r),
                        "decimal": decimal_string(r, DECIMAL_DIGITS),
                    }),
                    Field::Text(t) => Value::String(t.clone()),
                    Field::List(xs) => json!(xs),
                };
                result.insert(k.clone(), v);
            }
            let doc = json!({ "manifest": self.manifest.to_json(), "result": result });
            let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
            s.push('\n');
            return s;
        }

        let m = &self.manifest;
        let mut out = format!("# tvd {} {}\n", env!("CARGO_PKG_VERSION"), m.command);
        for (role, path, sha) in &m.inputs {
            out += &format!("# input {role} {path} sha256:{sha}\n");
        }
        for (k, v) in &m.params {
            out += &format!("# param {k} = {v}\n");
        }
        for (k, f) in &self.fields {
            match f {
                Field::Rational(r) => {
                    out += &format!(
                        "{k}: {} = {}\n",
                        fraction_string(r),
                        decimal_string(r, DECIMAL_DIGITS)
                    );
                }
                Field::Text(t) => out += &format!("{k}: {t}\n"),
                Field::List(xs) => {
                    out += &format!("{k}: {}\n", xs.len());
                    for x in xs {
                        out += &format!("  {x}\n");
                    }
                }
            }
        }
        out
    }
}
