use std::fmt::Write;

use super::KbDocument;
use crate::network::{FindingDomain, NodeSpec};
use crate::params::{ParamKind, ParameterDef};
use crate::planner::ActionSpec;

/// Canonical text for a document: parameters, findings, clusters,
/// hypotheses, links, actions, strategy. Declaration order is kept within
/// each category.
pub fn serialize_kb(doc: &KbDocument) -> String {
    let mut out = String::from("# mu knowledge base\n");
    if let Some(name) = &doc.name {
        let _ = writeln!(out, "kb {name}");
    }
    section(&mut out, doc.parameters.iter().map(parameter));
    section(&mut out, doc.findings.iter().map(|n| node("finding", n)));
    section(&mut out, doc.clusters.iter().map(|n| node("cluster", n)));
    section(&mut out, doc.hypotheses.iter().map(|n| node("hypothesis", n)));
    section(
        &mut out,
        doc.links
            .iter()
            .map(|l| format!("link {} -> {} role {}\n", l.source, l.target, l.role)),
    );
    section(&mut out, doc.actions.iter().map(action));
    if let Some(s) = &doc.strategy {
        let p = &s.cost_priority;
        let mut entries = vec![format!("cost-priority: {}, {}, {}", p[0], p[1], p[2])];
        if !s.presenting.is_empty() {
            entries.push(format!("presenting: {}", s.presenting.join(", ")));
        }
        section(&mut out, std::iter::once(block(&format!("strategy {}", s.name), &entries)));
    }
    out
}

fn section(out: &mut String, items: impl Iterator<Item = String>) {
    let mut first = true;
    for item in items {
        if first {
            out.push('\n');
            first = false;
        }
        out.push_str(&item);
    }
}

fn block(head: &str, entries: &[String]) -> String {
    if entries.is_empty() {
        return format!("{head}\n");
    }
    let mut s = format!("{head} {{\n");
    for (i, e) in entries.iter().enumerate() {
        let sep = if i + 1 < entries.len() { ";" } else { "" };
        let _ = writeln!(s, "  {e}{sep}");
    }
    s.push_str("}\n");
    s
}

fn parameter(def: &ParameterDef) -> String {
    let head = format!("parameter {} on {}", def.name, def.applies_to);
    match (def.kind, &def.expression) {
        (ParamKind::Derived, Some(expr)) => format!("{head} = {expr}\n"),
        _ => match &def.default {
            Some(d) => format!("{head} static {} default {d}\n", def.value_type),
            None => format!("{head} static {}\n", def.value_type),
        },
    }
}

fn node(keyword: &str, spec: &NodeSpec) -> String {
    let mut entries = Vec::new();
    match &spec.domain {
        None | Some(FindingDomain::Boolean) if spec.statics.is_empty() => {}
        None => {}
        Some(FindingDomain::Boolean) => entries.push("type: boolean".to_string()),
        Some(FindingDomain::Presence) => entries.push("type: presence".to_string()),
        Some(FindingDomain::Values(vs)) => entries.push(format!("values: {}", vs.join(", "))),
        Some(FindingDomain::Numeric(bins)) => {
            let bins: Vec<String> = bins
                .iter()
                .map(|b| match b.upper {
                    Some(u) => format!("{} < {u}", b.label),
                    None => b.label.clone(),
                })
                .collect();
            entries.push(format!("bins: {}", bins.join(", ")));
        }
    }
    for (k, v) in &spec.statics {
        entries.push(format!("{k}: {v}"));
    }
    for rule in &spec.rules {
        entries.push(format!("rule: {rule}"));
    }
    block(&format!("{keyword} {}", spec.id), &entries)
}

fn action(a: &ActionSpec) -> String {
    let mut entries = vec![format!("kind: {}", a.kind), format!("cost: {}", a.cost)];
    if !a.yields.is_empty() {
        entries.push(format!("yields: {}", a.yields.join(", ")));
    }
    for pre in &a.preconditions {
        entries.push(format!("requires: {pre}"));
    }
    if a.repeatable {
        entries.push("repeatable: true".to_string());
    }
    block(&format!("action {}", a.id), &entries)
}
