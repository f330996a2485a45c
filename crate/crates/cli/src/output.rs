//! Output encoding: JSON with every float printed at 17 significant
//! digits (so printed values parse back to the identical bits), and the
//! same convention for CSV cells.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

/// A JSON formatter that prints every finite float as
/// `d.dddddddddddddddde±x` — 17 significant digits, enough to round-trip
/// any f64 exactly.
struct SciFormatter;

impl Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes a value to a single JSON line with full-precision floats.
pub fn to_json_line<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serialized JSON is UTF-8")
}

/// One float as a full-precision CSV cell.
pub fn csv_f64(value: f64) -> String {
    format!("{value:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_printed_json() {
        for x in [
            1.0,
            std::f64::consts::PI,
            2.0f64.sqrt() / 3.0,
            -1.2345678901234567e-200,
            0.1 + 0.2,
        ] {
            let line = to_json_line(&serde_json::json!({ "x": x }));
            let back: serde_json::Value = serde_json::from_str(&line).unwrap();
            assert_eq!(back["x"].as_f64().unwrap().to_bits(), x.to_bits(), "{line}");
        }
    }

    #[test]
    fn non_finite_floats_become_null() {
        let line = to_json_line(&serde_json::json!({ "x": f64::INFINITY }));
        assert!(line.contains("null"));
    }

    #[test]
    fn integers_stay_integers() {
        let line = to_json_line(&serde_json::json!({ "n": 42u64 }));
        assert!(line.contains("\"n\":42"));
    }
}
