//! Exact values in reports are strings (`"1/2"`), never JSON numbers.

use serde_json::Value;

use avcdos::channel::StochMatrix;
use avcdos::rational::{format_rational, parse_rational, RVector, Rational};

use crate::error::CliError;

pub fn parse_exact(name: &str, s: &str) -> Result<Rational, CliError> {
    parse_rational(s).map_err(|e| CliError::Input(format!("{name}: {e}")))
}

pub fn num(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

pub fn vec(v: &[Rational]) -> Value {
    v.iter().map(num).collect()
}

pub fn matrix(m: &StochMatrix) -> Value {
    m.as_rows().iter().map(|r| vec(r)).collect()
}

pub fn read_num(v: &Value, what: &str) -> Result<Rational, CliError> {
    v.as_str()
        .ok_or_else(|| CliError::Input(format!("{what}: expected a string")))
        .and_then(|s| parse_exact(what, s))
}

pub fn read_vec(v: &Value, what: &str) -> Result<RVector, CliError> {
    v.as_array()
        .ok_or_else(|| CliError::Input(format!("{what}: expected an array")))?
        .iter()
        .map(|x| read_num(x, what))
        .collect()
}

pub fn read_rows(v: &Value, what: &str) -> Result<Vec<RVector>, CliError> {
    v.as_array()
        .ok_or_else(|| CliError::Input(format!("{what}: expected an array of rows")))?
        .iter()
        .map(|r| read_vec(r, what))
        .collect()
}

/// True when `v` holds no non-integer JSON number outside keys named
/// `estimate` (the only place floating-point output is allowed).
pub fn no_floats(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.is_i64() || n.is_u64(),
        Value::Array(a) => a.iter().all(no_floats),
        Value::Object(o) => o.iter().all(|(k, x)| k == "estimate" || no_floats(x)),
        _ => true,
    }
}
