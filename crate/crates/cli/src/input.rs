//! Spec and position arguments: inline forms or file paths.

use losssense::{io, Error, FunctionalSpec, Position, Result};
use serde_json::Value;
use std::path::Path;

/// A preset (`es:0.1`), inline JSON (`{"variant":...}`), or a path to a JSON spec file.
pub fn spec(arg: &str) -> Result<FunctionalSpec> {
    let arg = arg.trim();
    if arg.starts_with('{') {
        return FunctionalSpec::from_json(&parse_json(arg, "spec")?);
    }
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        return FunctionalSpec::from_json(&parse_json(&text, &path.display().to_string())?);
    }
    FunctionalSpec::preset(arg)
}

/// A position file (`.json` or `.csv`), inline JSON, inline atoms `p:x,p:x,...`, or
/// `loss:p` for `−1_A` with `P(A) = p`.
pub fn position(arg: &str) -> Result<Position> {
    let arg = arg.trim();
    if arg.starts_with('{') {
        return io::parse_position_json(arg);
    }
    if let Some(p) = arg.strip_prefix("loss:") {
        let p: f64 = p.trim().parse().map_err(|_| Error::Format(format!("`{arg}`: expected `loss:<probability>`")))?;
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Format(format!("`{arg}`: P(A) must lie in (0, 1]")));
        }
        return if p == 1.0 { Position::from_atoms(&[(1.0, -1.0)]) } else { Position::from_atoms(&[(p, -1.0), (1.0 - p, 0.0)]) };
    }
    let path = Path::new(arg);
    if path.is_file() || !arg.contains(':') {
        return io::load_position(path);
    }
    let mut atoms = Vec::new();
    for (row, pair) in arg.split(',').enumerate() {
        let parsed = pair.split_once(':').and_then(|(p, x)| Some((p.trim().parse::<f64>().ok()?, x.trim().parse::<f64>().ok()?)));
        atoms.push(parsed.ok_or_else(|| Error::Format(format!("atom {row}: expected `p:x`, found `{pair}`")))?);
    }
    let json = serde_json::json!({ "atoms": atoms.iter().map(|(p, x)| serde_json::json!({ "p": p, "x": x })).collect::<Vec<_>>() });
    io::parse_position_json(&json.to_string())
}

/// Fixture parameter overrides: inline JSON object or a path to one.
pub fn params(arg: &str) -> Result<Value> {
    let arg = arg.trim();
    if arg.starts_with('{') {
        return parse_json(arg, "params");
    }
    let text = std::fs::read_to_string(arg).map_err(|e| Error::Format(format!("{arg}: {e}")))?;
    parse_json(&text, arg)
}

fn parse_json(text: &str, what: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Format(format!("{what}: malformed JSON at line {}, column {}: {e}", e.line(), e.column())))
}
