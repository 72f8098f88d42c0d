//! Fixed 17-significant-digit float formatting for JSON and CSV output.

use serde::Serializer;

/// Formats `x` with 17 significant digits (`d.dddddddddddddddde±x`).
/// Non-finite values become `NaN`, `inf` or `-inf`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn raw_number<S: Serializer>(x: f64, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::{Error, Serialize};
    if !x.is_finite() {
        return s.serialize_none();
    }
    let number: serde_json::Number =
        serde_json::from_str(&format_f64(x)).map_err(S::Error::custom)?;
    number.serialize(s)
}

/// `serialize_with` helper emitting an `f64` as a 17-digit JSON number.
pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    raw_number(*x, s)
}

/// Same as [`serialize`] for optional values (`None` becomes `null`).
pub fn serialize_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => raw_number(*v, s),
        None => s.serialize_none(),
    }
}
