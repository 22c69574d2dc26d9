//! Serialization of results: versioned JSON, per-point CSV, console text.
//!
//! JSON floats are written with 17 significant digits, so they round-trip
//! exactly and identical inputs give byte-identical files.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::extrinsic::PointLabel;

pub const SCHEMA: &str = "report_v1";

/// Envelope shared by every machine-readable report.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: &'static str,
    /// `classification`, `variation`, `killing`, `eq3`, `alignment` or `error`.
    pub kind: &'a str,
    pub version: &'static str,
    pub body: &'a T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(kind: &'a str, body: &'a T) -> Self {
        Envelope { schema: SCHEMA, kind, version: env!("CARGO_PKG_VERSION"), body }
    }
}

/// Pretty printer that writes every float as `d.dddddddddddddddde±x`.
struct ExactFloats<'a>(PrettyFormatter<'a>);

impl Formatter for ExactFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with exact float formatting.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats(PrettyFormatter::with_indent(b"  ")));
    value.serialize(&mut ser).expect("report types serialize infallibly");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// A report wrapped in the versioned envelope.
pub fn report_json<T: Serialize>(kind: &str, body: &T) -> String {
    to_json(&Envelope::new(kind, body))
}

/// One row per grid point: `u0..u{d-1}, h_norm2, label, margin`.
pub fn write_labels_csv<W: Write>(w: W, labels: &[PointLabel]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let d = labels.first().map_or(0, |l| l.u.len());
    let mut header: Vec<String> = (0..d).map(|a| format!("u{a}")).collect();
    header.extend(["h_norm2".to_string(), "label".to_string(), "margin".to_string()]);
    out.write_record(&header)?;
    for l in labels {
        let mut row: Vec<String> = l.u.iter().map(|x| format!("{x:.16e}")).collect();
        row.push(format!("{:.16e}", l.h_norm2));
        row.push(l.causal.to_string());
        row.push(format!("{:.16e}", l.margin));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Nine significant digits for console output.
pub fn fmt9(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..9).contains(&exp) {
        let s = format!("{:.*}", (8 - exp).max(0) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.8e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CausalCharacter, CausalKind, TimeOrientation};

    #[derive(Serialize)]
    struct Sample {
        x: f64,
        v: Vec<f64>,
        nan: f64,
    }

    #[test]
    fn floats_round_trip_exactly() {
        let s = Sample { x: 0.1 + 0.2, v: vec![1.0, -1e-300, std::f64::consts::PI], nan: f64::NAN };
        let json = to_json(&s);
        let back: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(back["x"].as_f64().unwrap(), 0.1 + 0.2);
        assert_eq!(back["v"][2].as_f64().unwrap(), std::f64::consts::PI);
        assert_eq!(back["v"][1].as_f64().unwrap(), -1e-300);
        assert!(back["nan"].is_null());
        assert!(json.contains("3.0000000000000004e-1"));
    }

    #[test]
    fn envelope_has_schema() {
        let json = report_json("test", &vec![1.0]);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["schema"], "report_v1");
        assert_eq!(v["kind"], "test");
    }

    #[test]
    fn nine_digits() {
        assert_eq!(fmt9(std::f64::consts::PI), "3.14159265");
        assert_eq!(fmt9(16.0 * std::f64::consts::PI), "50.2654825");
        assert_eq!(fmt9(2.0), "2");
        assert_eq!(fmt9(-1.5e-12), "-1.50000000e-12");
        assert_eq!(fmt9(0.0), "0");
    }

    #[test]
    fn csv_columns() {
        let l = PointLabel {
            u: vec![0.5, 1.0],
            causal: CausalCharacter { kind: CausalKind::Null, time: TimeOrientation::Future },
            h_norm2: 0.0,
            h_ref_norm: 1.0,
            margin: -1e-9,
            boundary: false,
        };
        let mut buf = Vec::new();
        write_labels_csv(&mut buf, &[l]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), "u0,u1,h_norm2,label,margin");
        assert!(lines.next().unwrap().contains("null-future"));
    }
}
