//! Serialization helpers shared by reports.

use serde::Serializer;

/// Writes infinities and NaN as the strings `"-inf"`, `"inf"`, `"nan"`.
pub fn ext_real<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

pub fn ext_real_opt<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => ext_real(x, s),
        None => s.serialize_none(),
    }
}

/// Version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[cfg(test)]
mod tests {
    use serde::Serialize;

    #[derive(Serialize)]
    struct Probe {
        #[serde(serialize_with = "super::ext_real")]
        v: f64,
    }

    #[test]
    fn infinities_are_strings() {
        let text = serde_json::to_string(&Probe { v: f64::NEG_INFINITY }).unwrap();
        assert_eq!(text, r#"{"v":"-inf"}"#);
        let text = serde_json::to_string(&Probe { v: 0.25 }).unwrap();
        assert_eq!(text, r#"{"v":0.25}"#);
    }
}
