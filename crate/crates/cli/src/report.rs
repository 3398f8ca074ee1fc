//! Uniform tabular output: every command yields records of named fields,
//! rendered as JSON (complex → `{"re", "im"}`) or RFC-4180 CSV (complex →
//! paired `_re`/`_im` columns, lists → indexed columns).

use std::io::Write;

use num_complex::Complex64 as C64;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone)]
pub enum Field {
    Int(i64),
    Real(f64),
    Complex(C64),
    Complexes(Vec<C64>),
    Bool(bool),
    Text(String),
    Null,
}

impl From<i64> for Field {
    fn from(x: i64) -> Self {
        Field::Int(x)
    }
}
impl From<usize> for Field {
    fn from(x: usize) -> Self {
        Field::Int(x as i64)
    }
}
impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Real(x)
    }
}
impl From<C64> for Field {
    fn from(x: C64) -> Self {
        Field::Complex(x)
    }
}
impl From<bool> for Field {
    fn from(x: bool) -> Self {
        Field::Bool(x)
    }
}
impl From<String> for Field {
    fn from(x: String) -> Self {
        Field::Text(x)
    }
}
impl From<&str> for Field {
    fn from(x: &str) -> Self {
        Field::Text(x.to_string())
    }
}
impl<T: Into<Field>> From<Option<T>> for Field {
    fn from(x: Option<T>) -> Self {
        x.map_or(Field::Null, Into::into)
    }
}

pub type Record = Vec<(String, Field)>;

#[macro_export]
macro_rules! record {
    ($($k:expr => $v:expr),* $(,)?) => {
        vec![$(($k.to_string(), $crate::report::Field::from($v))),*]
    };
}

#[derive(Debug, Default)]
pub struct Report {
    pub command: &'static str,
    pub records: Vec<Record>,
    /// JSON-only aggregate fields.
    pub summary: Option<Record>,
}

fn real(x: f64) -> Value {
    // Non-finite values have no JSON number form.
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn complex(z: C64) -> Value {
    json!({ "re": real(z.re), "im": real(z.im) })
}

fn to_json(f: &Field) -> Value {
    match f {
        Field::Int(i) => json!(i),
        Field::Real(x) => real(*x),
        Field::Complex(z) => complex(*z),
        Field::Complexes(v) => Value::Array(v.iter().map(|z| complex(*z)).collect()),
        Field::Bool(b) => json!(b),
        Field::Text(s) => json!(s),
        Field::Null => Value::Null,
    }
}

/// Shortest digits that round-trip, switching to exponent form for very
/// small or large magnitudes.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn object(r: &Record) -> Value {
    let mut m = Map::new();
    for (k, v) in r {
        m.insert(k.clone(), to_json(v));
    }
    Value::Object(m)
}

impl Report {
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command));
        m.insert("records".into(), Value::Array(self.records.iter().map(object).collect()));
        if let Some(s) = &self.summary {
            m.insert("summary".into(), object(s));
        }
        Value::Object(m)
    }

    pub fn write_json(&self, out: &mut dyn Write) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
        writeln!(out)
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let Some(first) = self.records.first() else {
            return Ok(());
        };
        let mut header = Vec::new();
        for (k, v) in first {
            match v {
                Field::Complex(_) => header.extend([format!("{k}_re"), format!("{k}_im")]),
                Field::Complexes(zs) => {
                    for i in 0..zs.len() {
                        header.extend([format!("{k}{}_re", i + 1), format!("{k}{}_im", i + 1)]);
                    }
                }
                _ => header.push(k.clone()),
            }
        }
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = Vec::new();
            for (_, v) in r {
                match v {
                    Field::Int(i) => row.push(i.to_string()),
                    Field::Real(x) => row.push(num(*x)),
                    Field::Complex(z) => row.extend([num(z.re), num(z.im)]),
                    Field::Complexes(zs) => {
                        for z in zs {
                            row.extend([num(z.re), num(z.im)]);
                        }
                    }
                    Field::Bool(b) => row.push(b.to_string()),
                    Field::Text(s) => row.push(s.clone()),
                    Field::Null => row.push(String::new()),
                }
            }
            w.write_record(&row)?;
        }
        w.flush()
    }
}
