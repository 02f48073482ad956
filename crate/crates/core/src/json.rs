//! Deterministic JSON output: compact, with every float printed at 17
//! significant digits so files are byte-stable and parse back exactly.

use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, Serializer};

struct Fixed17;

impl Formatter for Fixed17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        CompactFormatter.write_f64(writer, f64::from(value))
    }
}

/// Serializes `value` with fixed-precision floats. Non-finite floats become
/// `null`.
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, Fixed17);
    value
        .serialize(&mut ser)
        .expect("serializing plain data into memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(to_string(&[0.1, -3.0]), "[1.0000000000000001e-1,-3.0000000000000000e0]");
        assert_eq!(to_string(&f64::NAN), "null");
        assert_eq!(to_string(&7usize), "7");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn round_trips_exactly(v in proptest::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 0..20)) {
                let s = to_string(&v);
                let back: Vec<f64> = serde_json::from_str(&s).unwrap();
                prop_assert_eq!(back, v);
            }
        }
    }
}
