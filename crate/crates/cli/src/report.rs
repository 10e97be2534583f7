//! Report envelope and its text and JSON renderings.

use losssense::FunctionalSpec;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass = 0,
    Fail = 1,
    Invalid = 2,
    Inconclusive = 3,
}

pub fn sha256(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub struct Report {
    command: &'static str,
    label: Option<String>,
    spec: Option<Value>,
    config: Value,
    result: Value,
}

impl Report {
    pub fn new(command: &'static str, spec: Option<&FunctionalSpec>, config: Value, result: Value) -> Self {
        Report { command, label: spec.map(FunctionalSpec::label), spec: spec.map(FunctionalSpec::to_json), config, result }
    }

    fn envelope(&self) -> Value {
        let mut doc = json!({
            "tool": "losssense",
            "version": losssense::VERSION,
            "command": self.command,
            "config": self.config,
            "result": self.result,
        });
        if let Some(spec) = &self.spec {
            doc["spec"] = spec.clone();
            doc["spec_sha256"] = json!(sha256(&spec.to_string()));
        }
        doc
    }

    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.envelope()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let r = &self.result;
        if let Some(label) = &self.label {
            let _ = writeln!(out, "functional  {label}");
        }
        match self.command {
            "eval" => {
                let _ = writeln!(out, "value       {}", num(&r["value"]));
                let _ = writeln!(out, "risk view   {}", num(&r["risk"]));
                if r["overflow"] == json!(true) {
                    let _ = writeln!(out, "note        value is an overflow sentinel");
                }
            }
            "recession" => {
                let _ = writeln!(out, "recession   {} ({})", num(&r["value"]), str(&r["mode"]));
                let _ = writeln!(out, "risk view   {}", num(&r["risk_value"]));
                for p in r["ratio_trace"].as_array().into_iter().flatten() {
                    let _ = writeln!(out, "  λ = {:<14} ratio {}", num(&p["lambda"]), num(&p["ratio"]));
                }
            }
            "sll" if r.get("verdict").is_some() => {
                let v = &r["verdict"];
                let _ = writeln!(out, "ray         {}", str(&v["status"]).replace('_', " "));
                for key in ["basis", "lambda", "lambda_max"] {
                    if let Some(x) = v.get(key) {
                        let _ = writeln!(out, "{key:<11} {}", num(x));
                    }
                }
                if let Some(e) = v.get("evidence") {
                    let _ = writeln!(out, "evidence    λ = {} → {}", list(&e["lambdas"]), list(&e["values"]));
                }
            }
            "sll" => verdict_line(&mut out, r),
            "battery" => {
                for v in r["verdicts"].as_array().into_iter().flatten() {
                    verdict_line(&mut out, v);
                }
                let _ = writeln!(out, "ordering    {}", if r["ordering_consistent"] == json!(true) { "consistent" } else { "INCONSISTENT" });
            }
            "fixture" if r.get("fixtures").is_some() => {
                for f in r["fixtures"].as_array().into_iter().flatten() {
                    let _ = writeln!(out, "{:<24} {}", str(&f["id"]), str(&f["title"]));
                }
            }
            "fixture" => {
                for f in r["reports"].as_array().into_iter().flatten() {
                    let ok = f["passed"] == json!(true);
                    let _ = writeln!(out, "{} {:<24} {}", if ok { "PASS" } else { "FAIL" }, str(&f["id"]), str(&f["title"]));
                    if !ok {
                        let _ = writeln!(out, "     {}", str(&f["first_failure"]));
                    }
                }
                let _ = writeln!(out, "{} passed, {} failed", r["passed"], r["failed"]);
            }
            "axioms" => {
                for a in r["results"].as_array().into_iter().flatten() {
                    let declared = if a["declared"] == json!(true) { "declared" } else { "" };
                    let verdict = if a["holds"] == json!(true) { "holds" } else { "FAILS" };
                    let _ = writeln!(out, "{:<16} {:<6} {:<9} cases {}", str(&a["axiom"]), verdict, declared, a["cases"]);
                    if let Some(w) = a.get("witness").filter(|w| !w.is_null()) {
                        let lambda = w.get("lambda").map(|l| format!("  λ = {}", num(l))).unwrap_or_default();
                        let _ = writeln!(out, "  witness X = {}{lambda}  {} vs {}", compact_position(&w["x"]), num(&w["lhs"]), num(&w["rhs"]));
                    }
                }
            }
            _ => {}
        }
        out
    }
}

fn verdict_line(out: &mut String, v: &Value) {
    let mark = if v["certified"] == json!(true) { "" } else { " (sampled)" };
    let _ = writeln!(out, "{:<11} {:<12} via {}{mark}", str(&v["domain"]), str(&v["status"]), str(&v["method"]));
    if let Some(w) = v.get("witness").filter(|w| !w.is_null()) {
        match w["type"].as_str() {
            Some("counterexample") => {
                let _ = writeln!(out, "  witness X = {}  λ = {} → {}", compact_position(&w["position"]), list(&w["lambdas"]), list(&w["values"]));
            }
            Some("threshold") => {
                let _ = writeln!(out, "  threshold X = {}  λ > {}", compact_position(&w["position"]), num(&w["lambda"]));
            }
            _ => {}
        }
    }
}

fn str(v: &Value) -> String {
    v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string())
}

fn num(v: &Value) -> String {
    match v {
        Value::Number(n) if n.as_f64() == Some(0.0) => "0".into(),
        Value::Number(n) => n.to_string(),
        other => str(other),
    }
}

/// Long λ sweeps are elided in the middle; the JSON report keeps them whole.
fn list(v: &Value) -> String {
    let mut items: Vec<String> = v.as_array().into_iter().flatten().map(num).collect();
    if items.len() > 6 {
        let tail = items.split_off(items.len() - 2);
        items.truncate(3);
        items.push("…".into());
        items.extend(tail);
    }
    format!("[{}]", items.join(", "))
}

fn compact_position(v: &Value) -> String {
    let atoms: Vec<String> = v["atoms"].as_array().into_iter().flatten().map(|a| format!("{}:{}", num(&a["p"]), num(&a["x"]))).collect();
    atoms.join(",")
}
