//! JSON and table renderings of selection results.

use std::fmt::Write;

use num_rational::BigRational;
use serde_json::{json, Number, Value};
use tcl_core::number::{literal, truncated_decimal};
use tcl_core::{ScenarioRecord, ScenarioStatus, SelectionResult};

pub fn rational_json(r: &BigRational) -> Value {
    let num: Number = r.numer().to_string().parse().expect("integer literal");
    let den: Number = r.denom().to_string().parse().expect("integer literal");
    json!({ "num": num, "den": den })
}

/// Scenarios shown by default: the block holding the selection.
pub fn shown(result: &SelectionResult, include_all: bool) -> Vec<&ScenarioRecord> {
    if include_all {
        result.all.iter().collect()
    } else {
        result.surviving_block()
    }
}

pub fn combine_json(result: &SelectionResult, include_all: bool) -> Value {
    let scenarios: Vec<Value> = shown(result, include_all)
        .into_iter()
        .map(|r| {
            json!({
                "bits": r.selection.bit_string(),
                "probability": rational_json(r.selection.probability.value()),
                "status": r.status.as_str(),
                "block": r.block,
            })
        })
        .collect();
    json!({
        "compound": result.compound.to_string(),
        "head": result.head.to_string(),
        "modifiers": result.modifiers.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        "scenarios": scenarios,
        "selected": result.selected.iter().map(|r| r.selection.bit_string()).collect::<Vec<_>>(),
    })
}

pub fn probability_cell(r: &BigRational) -> String {
    truncated_decimal(r, 6)
}

pub fn percent_cell(r: &BigRational) -> String {
    format!("{}%", truncated_decimal(&(r * BigRational::from_integer(100.into())), 6))
}

pub fn combine_table(result: &SelectionResult, include_all: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "compound:  {}", result.compound);
    let _ = writeln!(s, "head:      {}", result.head);
    let mods: Vec<String> = result.modifiers.iter().map(|m| m.to_string()).collect();
    let _ = writeln!(s, "modifiers: {}", mods.join(", "));
    let _ = writeln!(s, "scenarios: {}", result.all.len());
    let rows = shown(result, include_all);
    if result.selected.is_empty() {
        let _ = writeln!(s, "no admissible scenario");
        for st in ScenarioStatus::ALL {
            let _ = writeln!(s, "  {:<18} {}", st.as_str(), result.diagnostics.count(st));
        }
    }
    if rows.is_empty() {
        return s;
    }
    let width = rows[0].selection.bits.len().max(4);
    let _ = writeln!(s);
    let _ = writeln!(s, "{:>5}  {:<width$}  {:<12}  {:<12}  status", "block", "bits", "probability", "percent");
    for r in rows {
        let p = r.selection.probability.value();
        let _ = writeln!(
            s,
            "{:>5}  {:<width$}  {:<12}  {:<12}  {}",
            r.block,
            r.selection.bit_string(),
            probability_cell(p),
            percent_cell(p),
            r.status
        );
    }
    s
}

/// Exact value for single-number answers.
pub fn exact(r: &BigRational) -> String {
    literal(r)
}
