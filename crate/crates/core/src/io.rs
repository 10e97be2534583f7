//! Position files: JSON `{"atoms":[{"p":..,"x":..},...]}` or CSV with header `p,x`.

use crate::error::{Error, Result};
use crate::prob::{FiniteSpace, Position};
use serde::Serialize;
use serde_json::Value;
use std::path::Path;

pub fn parse_position_json(text: &str) -> Result<Position> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| Error::Format(format!("malformed JSON at line {}, column {}: {e}", e.line(), e.column())))?;
    let atoms = doc
        .get("atoms")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Format("expected an object with an \"atoms\" array".into()))?;
    let mut pairs = Vec::with_capacity(atoms.len());
    for (row, atom) in atoms.iter().enumerate() {
        let field = |name: &str| -> Result<f64> {
            atom.get(name)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Format(format!("atom {row}: field \"{name}\" missing or not a number")))
        };
        pairs.push((field("p")?, field("x")?));
    }
    build(pairs)
}

pub fn parse_position_csv(text: &str) -> Result<Position> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::Format(format!("unreadable CSV header: {e}")))?.clone();
    if headers.len() != 2 || &headers[0] != "p" || &headers[1] != "x" {
        return Err(Error::Format(format!("CSV header must be \"p,x\", found \"{}\"", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut pairs = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        // Data rows are numbered from 1; row 0 is the header.
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Format(format!("row {row}: {e}")))?;
        let num = |k: usize, name: &str| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Format(format!("row {row}: column \"{name}\" is not a number")))
        };
        pairs.push((num(0, "p")?, num(1, "x")?));
    }
    build(pairs)
}

fn build(pairs: Vec<(f64, f64)>) -> Result<Position> {
    if pairs.is_empty() {
        return Err(Error::Format("no atoms given".into()));
    }
    for (row, &(p, x)) in pairs.iter().enumerate() {
        if !p.is_finite() || p <= 0.0 {
            return Err(Error::Format(format!("atom {row}: probability {p} must be strictly positive")));
        }
        if !x.is_finite() {
            return Err(Error::Format(format!("atom {row}: outcome {x} is not finite")));
        }
    }
    let space = FiniteSpace::new(pairs.iter().map(|a| a.0).collect())?;
    Position::new(space, pairs.iter().map(|a| a.1).collect())
}

/// Reads a position file, choosing the format from the extension (`.csv` or JSON otherwise).
pub fn load_position(path: &Path) -> Result<Position> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let is_csv = path.extension().map(|e| e.eq_ignore_ascii_case("csv")).unwrap_or(false);
    if is_csv {
        parse_position_csv(&text)
    } else {
        parse_position_json(&text)
    }
}

#[derive(Serialize)]
struct AtomOut {
    p: f64,
    x: f64,
}

#[derive(Serialize)]
struct PositionOut {
    atoms: Vec<AtomOut>,
}

/// JSON document for a position, in the same format the parser accepts.
pub fn position_json(x: &Position) -> Value {
    serde_json::to_value(PositionOut { atoms: x.atoms().map(|(p, x)| AtomOut { p, x }).collect() })
        .expect("position serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let x = parse_position_json(r#"{"atoms":[{"p":0.25,"x":-2},{"p":0.75,"x":1.5}]}"#).unwrap();
        let back = parse_position_json(&position_json(&x).to_string()).unwrap();
        assert_eq!(x, back);
    }

    #[test]
    fn json_errors_name_the_row() {
        let e = parse_position_json(r#"{"atoms":[{"p":0.5,"x":1},{"p":0.5}]}"#).unwrap_err();
        assert!(e.to_string().contains("atom 1"), "{e}");
        let e = parse_position_json(r#"{"atoms":[{"p":0.5,"x":1},{"p":-0.5,"x":2}]}"#).unwrap_err();
        assert!(e.to_string().contains("atom 1"), "{e}");
        assert!(parse_position_json("{not json").is_err());
    }

    #[test]
    fn csv_parsing() {
        let x = parse_position_csv("p,x\n0.2,-2\n0.3,-1\n0.5,3\n").unwrap();
        assert_eq!(x.outcomes(), &[-2.0, -1.0, 3.0]);
        let e = parse_position_csv("p,x\n0.5,1\n0.5,abc\n").unwrap_err();
        assert!(e.to_string().contains("row 2"), "{e}");
        assert!(parse_position_csv("prob,x\n1,0\n").is_err());
    }
}
