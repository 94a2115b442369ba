//! Sampled curves and their CSV / JSON encodings.
//!
//! CSV layout: `# key: value` metadata lines, a header row, then one row per
//! sample with every number written as `{:.16e}` (17 significant digits, so
//! doubles survive the round trip unchanged).

use std::io::{self, Read, Write};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(with = "nonfinite")]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampledCurve {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<Column>,
}

impl SampledCurve {
    pub fn meta(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string().replace(['\n', '\r'], " ");
        self.metadata.push((key.to_string(), value));
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Panics if the length differs from the columns already present.
    pub fn push_column(&mut self, name: &str, values: Vec<f64>) {
        if let Some(first) = self.columns.first() {
            assert_eq!(first.values.len(), values.len(), "column {name} has the wrong length");
        }
        self.columns.push(Column { name: name.to_string(), values });
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for i in 0..self.rows() {
            w.write_record(self.columns.iter().map(|c| format_f64(c.values[i])))?;
        }
        w.flush()
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)
    }

    pub fn read_csv<R: Read>(mut input: R) -> Result<Self, String> {
        let mut text = String::new();
        input.read_to_string(&mut text).map_err(|e| e.to_string())?;
        let mut curve = SampledCurve::default();
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            let Some(rest) = line.strip_prefix("# ") else { break };
            let rest = rest.trim_end_matches(['\n', '\r']);
            let (k, v) = rest.split_once(": ").ok_or_else(|| format!("bad metadata line '{rest}'"))?;
            curve.metadata.push((k.to_string(), v.to_string()));
            body_start += line.len();
        }
        let mut reader = csv::Reader::from_reader(&text.as_bytes()[body_start..]);
        let headers = reader.headers().map_err(|e| e.to_string())?.clone();
        curve.columns = headers.iter().map(|h| Column { name: h.to_string(), values: Vec::new() }).collect();
        for record in reader.records() {
            let record = record.map_err(|e| e.to_string())?;
            for (col, field) in curve.columns.iter_mut().zip(record.iter()) {
                col.values.push(field.parse::<f64>().map_err(|e| format!("'{field}': {e}"))?);
            }
        }
        Ok(curve)
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self, String> {
        serde_json::from_reader(input).map_err(|e| e.to_string())
    }
}

// JSON has no inf/NaN; those are written as the strings "inf", "-inf", "NaN"
mod nonfinite {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Num {
        F(f64),
        S(String),
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let out: Vec<Num> = v
            .iter()
            .map(|&x| if x.is_finite() { Num::F(x) } else { Num::S(format!("{x}")) })
            .collect();
        out.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Num>::deserialize(d)?
            .into_iter()
            .map(|n| match n {
                Num::F(x) => Ok(x),
                Num::S(s) => s.parse::<f64>().map_err(serde::de::Error::custom),
            })
            .collect()
    }
}

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}
