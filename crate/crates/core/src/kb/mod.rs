//! The `.mu` knowledge-base language.

mod diagnostics;
mod lexer;
mod parser;
mod serialize;

use std::collections::HashMap;

pub use diagnostics::{codes, Location, Severity, SourceDiagnostic};
pub use serialize::serialize_kb;

use crate::belief::{BeliefLevel, ThresholdMode};
use crate::network::{validate_network, EvidenceLink, Network, NodeKind, NodeSpec, RuleAtom, Subject};
use crate::params::{DerivedExpr, ParameterDef};
use crate::planner::{ActionSpec, StrategyConfig};

/// A parsed knowledge base, before graph validation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KbDocument {
    pub name: Option<String>,
    /// Declared parameters only; built-ins are implicit.
    pub parameters: Vec<ParameterDef>,
    pub findings: Vec<NodeSpec>,
    pub clusters: Vec<NodeSpec>,
    pub hypotheses: Vec<NodeSpec>,
    pub links: Vec<EvidenceLink>,
    pub actions: Vec<ActionSpec>,
    pub strategy: Option<StrategyConfig>,
}

impl KbDocument {
    pub fn node_count(&self) -> usize {
        self.findings.len() + self.clusters.len() + self.hypotheses.len()
    }
}

/// Where each declaration starts in the source text.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    pub(crate) parameters: Vec<((String, NodeKind), Location)>,
    pub(crate) nodes: Vec<(String, Location)>,
    pub(crate) links: Vec<Location>,
    pub(crate) actions: Vec<(String, Location)>,
    pub(crate) strategy: Option<Location>,
    pub(crate) rules: HashMap<(String, usize), Location>,
    pub(crate) statics: HashMap<(String, String), Location>,
}

impl SourceMap {
    pub fn node(&self, id: &str) -> Location {
        self.nodes
            .iter()
            .find(|(n, _)| n == id)
            .map(|(_, l)| *l)
            .unwrap_or_default()
    }

    pub fn action(&self, id: &str) -> Location {
        self.actions
            .iter()
            .find(|(n, _)| n == id)
            .map(|(_, l)| *l)
            .unwrap_or_default()
    }

    pub fn link(&self, index: usize) -> Location {
        self.links.get(index).copied().unwrap_or_default()
    }

    pub fn parameter(&self, name: &str, kind: NodeKind) -> Location {
        self.parameters
            .iter()
            .find(|((n, k), _)| n == name && *k == kind)
            .map(|(_, l)| *l)
            .unwrap_or_default()
    }

    pub fn rule(&self, node: &str, index: usize) -> Location {
        self.rules
            .get(&(node.to_string(), index))
            .copied()
            .unwrap_or_else(|| self.node(node))
    }

    pub fn static_entry(&self, node: &str, key: &str) -> Location {
        self.statics
            .get(&(node.to_string(), key.to_string()))
            .copied()
            .unwrap_or_else(|| self.node(node))
    }

    pub fn strategy(&self) -> Location {
        self.strategy.unwrap_or_default()
    }

    fn subject(&self, subject: &Subject, doc: &KbDocument) -> Location {
        match subject {
            Subject::Node { id } => self.node(id),
            Subject::Link { source, target } => doc
                .links
                .iter()
                .position(|l| &l.source == source && &l.target == target)
                .map(|i| self.link(i))
                .unwrap_or_default(),
            Subject::Rule { node, index } => self.rule(node, *index),
            Subject::Action { id } => self.action(id),
            Subject::Parameter { name, kind } => self.parameter(name, *kind),
            Subject::Strategy => self.strategy(),
        }
    }
}

/// Parses KB text. Graph-level checks are left to [`load_kb`].
pub fn parse_kb(text: &str) -> Result<KbDocument, Vec<SourceDiagnostic>> {
    parser::parse_document(text).map(|(doc, _)| doc)
}

/// Like [`parse_kb`], also returning declaration locations.
pub fn parse_kb_with_map(text: &str) -> Result<(KbDocument, SourceMap), Vec<SourceDiagnostic>> {
    parser::parse_document(text)
}

/// Parses a derived-parameter expression such as
/// `belief at-least supported and dangerous`.
pub fn parse_expr(text: &str) -> Result<DerivedExpr, Vec<SourceDiagnostic>> {
    parser::parse_expression(text)
}

/// A KB accepted end to end.
#[derive(Debug, Clone)]
pub struct LoadedKb {
    pub document: KbDocument,
    pub network: Network,
    pub warnings: Vec<SourceDiagnostic>,
}

/// Parse and validate. Validation violations are reported as located
/// diagnostics whose code is the violation code.
pub fn load_kb(text: &str) -> Result<LoadedKb, Vec<SourceDiagnostic>> {
    let (document, map) = parser::parse_document(text)?;
    let mut warnings = inert_atoms(&document, &map);
    match validate_network(&document) {
        Ok(network) => Ok(LoadedKb {
            document,
            network,
            warnings,
        }),
        Err(report) => {
            let mut diags: Vec<SourceDiagnostic> = report
                .violations
                .iter()
                .map(|v| {
                    SourceDiagnostic::error(
                        map.subject(&v.subject, &document),
                        v.code.name(),
                        format!("{}: {}", v.subject, v.message),
                    )
                })
                .collect();
            diags.sort_by_key(|d| d.location);
            diags.append(&mut warnings);
            Err(diags)
        }
    }
}

/// Atoms that hold whatever the source's belief is.
fn inert_atoms(doc: &KbDocument, map: &SourceMap) -> Vec<SourceDiagnostic> {
    let mut out = Vec::new();
    for spec in doc.clusters.iter().chain(&doc.hypotheses) {
        for (i, rule) in spec.rules.iter().enumerate() {
            for atom in &rule.atoms {
                let RuleAtom::Belief { source, mode, level } = atom else {
                    continue;
                };
                let always = matches!(
                    (mode, level),
                    (ThresholdMode::AtLeast, BeliefLevel::Disconfirmed)
                        | (ThresholdMode::AtMost, BeliefLevel::Confirmed)
                );
                if always {
                    out.push(SourceDiagnostic::warning(
                        map.rule(&spec.id, i),
                        codes::INERT_ATOM,
                        format!("`{source} {mode} {level}` always holds"),
                    ));
                }
            }
        }
    }
    out
}
