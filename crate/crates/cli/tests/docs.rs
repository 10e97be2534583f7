//! Every JSON example in the format documentation parses.

use losssense::{io, FunctionalSpec};
use serde_json::Value;

fn json_blocks(md: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current: Option<String> = None;
    for line in md.lines() {
        match (&mut current, line.trim_start()) {
            (None, "```json") => current = Some(String::new()),
            (Some(b), "```") => {
                blocks.push(std::mem::take(b));
                current = None;
            }
            (Some(b), _) => {
                b.push_str(line);
                b.push('\n');
            }
            _ => {}
        }
    }
    blocks
}

#[test]
fn format_examples_are_valid() {
    let md = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/formats.md")).unwrap();
    let blocks = json_blocks(&md);
    let mut specs = 0;
    for b in &blocks {
        let v: Value = serde_json::from_str(b).unwrap_or_else(|e| panic!("{e}\n{b}"));
        if v.get("variant").is_some() {
            FunctionalSpec::from_json(&v).unwrap_or_else(|e| panic!("{e}\n{b}"));
            specs += 1;
        } else if v.get("atoms").is_some() {
            io::parse_position_json(b).unwrap();
        }
    }
    // One example per variant, plus the explicit-pieces utility.
    assert_eq!(specs, 14);
}
