//! Deterministic JSON value builders.
//!
//! Reports must be byte-identical across runs, so every float is rendered
//! with a fixed 17-significant-digit form and stored through serde_json's
//! arbitrary-precision number type, which preserves the rendered text.

use num_complex::Complex64;
use serde_json::{Map, Number, Value};

use crate::linop::ComplexMatrix;

/// A float as a JSON number with exactly 17 significant digits.
pub fn float(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let text = format!("{x:.16e}");
    text.parse::<Number>()
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// `{"re": ..., "im": ...}` with fixed-form floats.
pub fn complex(z: Complex64) -> Value {
    let mut m = Map::new();
    m.insert("re".into(), float(z.re));
    m.insert("im".into(), float(z.im));
    Value::Object(m)
}

/// The matrix JSON form `{"dim": n, "entries": [[re, im], ...]}` row-major.
pub fn matrix(m: &ComplexMatrix) -> Value {
    let entries: Vec<Value> = m
        .entries()
        .iter()
        .map(|z| Value::Array(vec![float(z.re), float(z.im)]))
        .collect();
    let mut obj = Map::new();
    obj.insert("dim".into(), Value::from(m.dim()));
    obj.insert("entries".into(), Value::Array(entries));
    Value::Object(obj)
}

/// A complex vector as `[[re, im], ...]`.
pub fn vector(v: &[Complex64]) -> Value {
    Value::Array(
        v.iter()
            .map(|z| Value::Array(vec![float(z.re), float(z.im)]))
            .collect(),
    )
}
