//! System and gain files.
//!
//! A system file is TOML with a scalar `alpha`, an optional `name`, and one
//! table per matrix `E`, `A`, `B`, `C`, `D`, each holding explicit `rows`,
//! `cols` and row-major `data`:
//!
//! ```toml
//! name = "example 1"
//! alpha = 0.5
//!
//! [E]
//! rows = 2
//! cols = 2
//! data = [1.0, 0.0, 0.0, 0.0]
//! ```
//!
//! A gain file has the same layout with a single matrix table `K`.

use std::fmt;

use sfos_core::numerics::RMat;
use sfos_core::{ModelError, SfosModel};
use toml::{Table, Value};

/// Parse or validation failure, tagged with the key it concerns.
#[derive(Debug, Clone, PartialEq)]
pub struct FileError {
    pub key: String,
    pub message: String,
}

impl FileError {
    fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        FileError {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "key `{}`: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for FileError {}

const MATRIX_KEYS: [&str; 5] = ["E", "A", "B", "C", "D"];

fn number(key: &str, v: &Value) -> Result<f64, FileError> {
    let x = match v {
        Value::Float(x) => *x,
        Value::Integer(i) => *i as f64,
        other => return Err(FileError::new(key, format!("expected a number, found {}", other.type_str()))),
    };
    if !x.is_finite() {
        return Err(FileError::new(key, format!("value {x} is not finite")));
    }
    Ok(x)
}

fn count(key: &str, v: Option<&Value>) -> Result<usize, FileError> {
    match v {
        Some(Value::Integer(i)) if *i >= 1 => Ok(*i as usize),
        Some(Value::Integer(i)) => Err(FileError::new(key, format!("must be at least 1, got {i}"))),
        Some(other) => Err(FileError::new(key, format!("expected an integer, found {}", other.type_str()))),
        None => Err(FileError::new(key, "missing")),
    }
}

fn matrix(doc: &Table, name: &str) -> Result<RMat, FileError> {
    let table = match doc.get(name) {
        Some(Value::Table(t)) => t,
        Some(other) => {
            return Err(FileError::new(name, format!("expected a table, found {}", other.type_str())))
        }
        None => return Err(FileError::new(name, "missing matrix table")),
    };
    for k in table.keys() {
        if !matches!(k.as_str(), "rows" | "cols" | "data") {
            return Err(FileError::new(format!("{name}.{k}"), "unknown key"));
        }
    }
    let rows = count(&format!("{name}.rows"), table.get("rows"))?;
    let cols = count(&format!("{name}.cols"), table.get("cols"))?;
    let data_key = format!("{name}.data");
    let data = match table.get("data") {
        Some(Value::Array(a)) => a
            .iter()
            .enumerate()
            .map(|(i, v)| number(&format!("{data_key}[{i}]"), v))
            .collect::<Result<Vec<_>, _>>()?,
        Some(other) => {
            return Err(FileError::new(data_key, format!("expected an array, found {}", other.type_str())))
        }
        None => return Err(FileError::new(data_key, "missing")),
    };
    if data.len() != rows * cols {
        return Err(FileError::new(
            data_key,
            format!("has {} entries, expected rows*cols = {}", data.len(), rows * cols),
        ));
    }
    RMat::from_rows(rows, cols, &data).map_err(|e| FileError::new(name, e.to_string()))
}

fn matrix_table(m: &RMat) -> Value {
    let mut t = Table::new();
    t.insert("rows".into(), Value::Integer(m.rows() as i64));
    t.insert("cols".into(), Value::Integer(m.cols() as i64));
    t.insert("data".into(), Value::Array(m.as_slice().iter().map(|&x| Value::Float(x)).collect()));
    Value::Table(t)
}

fn parse_table(text: &str) -> Result<Table, FileError> {
    text.parse::<Table>().map_err(|e| FileError::new("", format!("not valid TOML: {}", e.message())))
}

fn expect_shape(key: &str, m: &RMat, rows: usize, cols: usize) -> Result<(), FileError> {
    if m.shape() == (rows, cols) {
        Ok(())
    } else {
        Err(FileError::new(
            key,
            format!("is {}x{}, expected {}x{}", m.rows(), m.cols(), rows, cols),
        ))
    }
}

/// A parsed system file.
#[derive(Debug, Clone)]
pub struct SystemFile {
    pub name: Option<String>,
    pub model: SfosModel,
}

pub fn parse_system(text: &str) -> Result<SystemFile, FileError> {
    let doc = parse_table(text)?;
    for k in doc.keys() {
        if !(k == "name" || k == "alpha" || MATRIX_KEYS.contains(&k.as_str())) {
            return Err(FileError::new(k.as_str(), "unknown key"));
        }
    }
    let name = match doc.get("name") {
        Some(Value::String(s)) => Some(s.clone()),
        Some(other) => return Err(FileError::new("name", format!("expected a string, found {}", other.type_str()))),
        None => None,
    };
    let alpha = match doc.get("alpha") {
        Some(v) => number("alpha", v)?,
        None => return Err(FileError::new("alpha", "missing")),
    };
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(FileError::new("alpha", format!("fractional order {alpha} must lie in (0, 2)")));
    }
    let a = matrix(&doc, "A")?;
    let n = a.rows();
    expect_shape("A", &a, n, n)?;
    let e = matrix(&doc, "E")?;
    expect_shape("E", &e, n, n)?;
    let b = matrix(&doc, "B")?;
    let m = b.cols();
    expect_shape("B", &b, n, m)?;
    let c = matrix(&doc, "C")?;
    let p = c.rows();
    expect_shape("C", &c, p, n)?;
    let d = matrix(&doc, "D")?;
    expect_shape("D", &d, p, m)?;
    let model = SfosModel::new(e, a, b, c, d, alpha).map_err(|err| match err {
        ModelError::IrregularPencil => FileError::new("E", "pencil sE - A is not regular together with `A`"),
        ModelError::InvalidOrder(_) => FileError::new("alpha", err.to_string()),
        other => FileError::new("", other.to_string()),
    })?;
    Ok(SystemFile { name, model })
}

pub fn format_system(name: Option<&str>, model: &SfosModel) -> String {
    let mut doc = Table::new();
    if let Some(n) = name {
        doc.insert("name".into(), Value::String(n.to_string()));
    }
    doc.insert("alpha".into(), Value::Float(model.alpha()));
    for (key, m) in MATRIX_KEYS.iter().zip([model.e(), model.a(), model.b(), model.c(), model.d()]) {
        doc.insert(key.to_string(), matrix_table(m));
    }
    toml::to_string(&doc).expect("tables of finite numbers serialize")
}

pub fn parse_gain(text: &str) -> Result<RMat, FileError> {
    let doc = parse_table(text)?;
    for k in doc.keys() {
        if !(k == "name" || k == "K") {
            return Err(FileError::new(k.as_str(), "unknown key"));
        }
    }
    matrix(&doc, "K")
}

pub fn format_gain(k: &RMat) -> String {
    let mut doc = Table::new();
    doc.insert("K".into(), matrix_table(k));
    toml::to_string(&doc).expect("tables of finite numbers serialize")
}
