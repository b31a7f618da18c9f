//! Number formatting shared by the JSON and CSV writers.
//!
//! Every float is written with 17 significant digits, enough for an exact
//! round trip through `f64` parsing.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

/// `v` with 17 significant digits; `NaN`, `inf`, `-inf` for non-finite values.
pub fn sig17(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(sig17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Compact JSON with 17-digit floats. Non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser).expect("report types serialize infallibly");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [std::f64::consts::LN_2, 1e-300, -3.25, 0.1 + 0.2, 6.02e23] {
            let s = sig17(v);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(sig17(f64::NAN), "NaN");
    }

    #[test]
    fn json_uses_exponent_form() {
        let s = to_json(&serde_json::json!({ "x": 0.5 }));
        assert_eq!(s, r#"{"x":5.0000000000000000e-1}"#);
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.5));
    }
}
