use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{CompiledAtom, CompiledRule, EvidenceLink, FindingDomain, Network, Node, NodeKind};
use crate::belief::{BeliefLevel, EvidenceRole};
use crate::kb::KbDocument;
use crate::params::{builtin_parameters, ExprError, ParamKind, ParameterDef};
use crate::planner::ActionKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationCode {
    CycleDetected,
    DanglingReference,
    RoleRuleInconsistency,
    DuplicateId,
    InvalidStructure,
    InvalidDomain,
    UnknownValue,
    TypeError,
    MissingValue,
}

impl ViolationCode {
    pub fn name(self) -> &'static str {
        match self {
            ViolationCode::CycleDetected => "cycle-detected",
            ViolationCode::DanglingReference => "dangling-reference",
            ViolationCode::RoleRuleInconsistency => "role-rule-inconsistency",
            ViolationCode::DuplicateId => "duplicate-id",
            ViolationCode::InvalidStructure => "invalid-structure",
            ViolationCode::InvalidDomain => "invalid-domain",
            ViolationCode::UnknownValue => "unknown-value",
            ViolationCode::TypeError => "type-error",
            ViolationCode::MissingValue => "missing-value",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The declaration a violation is about.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum Subject {
    Node { id: String },
    Link { source: String, target: String },
    Rule { node: String, index: usize },
    Action { id: String },
    Parameter { name: String, kind: NodeKind },
    Strategy,
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Node { id } => write!(f, "node `{id}`"),
            Subject::Link { source, target } => write!(f, "link `{source} -> {target}`"),
            Subject::Rule { node, index } => write!(f, "rule {} of `{node}`", index + 1),
            Subject::Action { id } => write!(f, "action `{id}`"),
            Subject::Parameter { name, kind } => write!(f, "parameter `{name}` on {kind}"),
            Subject::Strategy => f.write_str("strategy"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub subject: Subject,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}): {}", self.code, self.subject, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, thiserror::Error, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    fn push(&mut self, code: ViolationCode, subject: Subject, message: impl Into<String>) {
        self.violations.push(Violation {
            code,
            subject,
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn node_subject(id: &str) -> Subject {
    Subject::Node { id: id.to_string() }
}

/// Checks a document and builds the network it describes. Every violation
/// found is reported, not just the first.
pub fn validate_network(doc: &KbDocument) -> Result<Network, ValidationReport> {
    let mut report = ValidationReport::default();

    let mut nodes: Vec<Node> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (kind, specs) in [
        (NodeKind::Finding, &doc.findings),
        (NodeKind::Cluster, &doc.clusters),
        (NodeKind::Hypothesis, &doc.hypotheses),
    ] {
        for spec in specs {
            if index.contains_key(&spec.id) {
                report.push(
                    ViolationCode::DuplicateId,
                    node_subject(&spec.id),
                    format!("node id `{}` is declared more than once", spec.id),
                );
                continue;
            }
            index.insert(spec.id.clone(), nodes.len());
            nodes.push(Node {
                id: spec.id.clone(),
                kind,
                domain: spec.domain.clone(),
                statics: spec.statics.clone(),
                rules: spec.rules.clone(),
                compiled: Vec::new(),
            });
        }
    }

    let params = check_parameters(doc, &mut report);
    let type_of = |kind: NodeKind, name: &str| {
        params
            .iter()
            .find(|p| p.applies_to == kind && p.name == name)
            .map(|p| p.value_type)
    };

    for node in &nodes {
        check_node_shape(node, &params, &mut report);
    }

    // Links.
    let mut preds: Vec<Vec<(usize, EvidenceRole)>> = vec![Vec::new(); nodes.len()];
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    let mut seen_links = HashSet::new();
    for link in &doc.links {
        let subject = Subject::Link {
            source: link.source.clone(),
            target: link.target.clone(),
        };
        let (Some(&s), Some(&t)) = (index.get(&link.source), index.get(&link.target)) else {
            for end in [&link.source, &link.target] {
                if !index.contains_key(end) {
                    report.push(
                        ViolationCode::DanglingReference,
                        subject.clone(),
                        format!("link endpoint `{end}` is not a declared node"),
                    );
                }
            }
            continue;
        };
        if !seen_links.insert((s, t)) {
            report.push(
                ViolationCode::DuplicateId,
                subject,
                "the same pair of nodes is linked more than once",
            );
            continue;
        }
        if nodes[t].kind == NodeKind::Finding {
            report.push(
                ViolationCode::InvalidStructure,
                subject.clone(),
                format!("finding `{}` cannot be the target of a link", link.target),
            );
        }
        if nodes[s].kind == NodeKind::Hypothesis {
            report.push(
                ViolationCode::InvalidStructure,
                subject.clone(),
                format!("hypothesis `{}` cannot be the source of a link", link.source),
            );
        }
        preds[t].push((s, link.role));
        succs[s].push(t);
    }

    let topo = match topological_sort(&succs) {
        Ok(order) => order,
        Err(stuck) => {
            let names: Vec<&str> = stuck.iter().map(|&i| nodes[i].id.as_str()).collect();
            report.push(
                ViolationCode::CycleDetected,
                node_subject(names[0]),
                format!("evidence links form a cycle through {}", names.join(", ")),
            );
            Vec::new()
        }
    };

    // Combining rules.
    for t in 0..nodes.len() {
        let mut compiled = Vec::with_capacity(nodes[t].rules.len());
        for (ri, rule) in nodes[t].rules.iter().enumerate() {
            let subject = Subject::Rule {
                node: nodes[t].id.clone(),
                index: ri,
            };
            let mut atoms = Vec::with_capacity(rule.atoms.len());
            for atom in &rule.atoms {
                let src = atom.source();
                let Some(&s) = index.get(src) else {
                    report.push(
                        ViolationCode::DanglingReference,
                        subject.clone(),
                        format!("rule cites `{src}`, which is not a declared node"),
                    );
                    continue;
                };
                if !preds[t].iter().any(|(p, _)| *p == s) {
                    report.push(
                        ViolationCode::DanglingReference,
                        subject.clone(),
                        format!(
                            "rule cites `{src}`, which has no evidence link into `{}`",
                            nodes[t].id
                        ),
                    );
                    continue;
                }
                match atom {
                    super::RuleAtom::Belief { mode, level, .. } => {
                        atoms.push(CompiledAtom::Belief {
                            source: s,
                            mode: *mode,
                            level: *level,
                        });
                    }
                    super::RuleAtom::Value { value, .. } => {
                        let Some(domain) = nodes[s].domain.as_ref() else {
                            report.push(
                                ViolationCode::TypeError,
                                subject.clone(),
                                format!("`{src} = {value}` compares a value, but `{src}` is not a finding"),
                            );
                            continue;
                        };
                        match domain.code_of(value) {
                            Some(code) => atoms.push(CompiledAtom::Value { finding: s, code }),
                            None => report.push(
                                ViolationCode::UnknownValue,
                                subject.clone(),
                                format!(
                                    "`{value}` is not a value of `{src}` (expected one of {})",
                                    domain.symbols().join(", ")
                                ),
                            ),
                        }
                    }
                }
            }
            compiled.push(CompiledRule {
                atoms,
                output: rule.output,
            });
        }
        nodes[t].compiled = compiled;
    }

    check_roles(&nodes, &doc.links, &index, &mut report);

    // Actions.
    let mut action_index = HashMap::new();
    for (i, action) in doc.actions.iter().enumerate() {
        let subject = Subject::Action {
            id: action.id.clone(),
        };
        if action_index.insert(action.id.clone(), i).is_some() {
            report.push(
                ViolationCode::DuplicateId,
                subject.clone(),
                format!("action id `{}` is declared more than once", action.id),
            );
        }
        if action.yields.is_empty() {
            report.push(
                ViolationCode::InvalidStructure,
                subject.clone(),
                "an action must yield at least one finding",
            );
        }
        for y in &action.yields {
            match index.get(y) {
                Some(&f) if nodes[f].kind == NodeKind::Finding => {}
                Some(_) => report.push(
                    ViolationCode::InvalidStructure,
                    subject.clone(),
                    format!("`{y}` is not a finding and cannot be yielded"),
                ),
                None => report.push(
                    ViolationCode::DanglingReference,
                    subject.clone(),
                    format!("yielded finding `{y}` is not declared"),
                ),
            }
        }
        if action.kind == ActionKind::Treatment && action.preconditions.is_empty() {
            report.push(
                ViolationCode::InvalidStructure,
                subject.clone(),
                "a treatment needs at least one belief precondition",
            );
        }
        for pre in &action.preconditions {
            let Some(&n) = index.get(&pre.node) else {
                report.push(
                    ViolationCode::DanglingReference,
                    subject.clone(),
                    format!("precondition names undeclared node `{}`", pre.node),
                );
                continue;
            };
            let kind = nodes[n].kind;
            if let Err(e) = pre.condition.check(&|name| type_of(kind, name)) {
                push_expr_error(&mut report, subject.clone(), e);
            }
        }
    }

    // Strategy.
    let strategy = doc.strategy.clone().unwrap_or_default();
    for f in &strategy.presenting {
        match index.get(f) {
            Some(&i) if nodes[i].kind == NodeKind::Finding => {}
            _ => report.push(
                ViolationCode::DanglingReference,
                Subject::Strategy,
                format!("presenting finding `{f}` is not a declared finding"),
            ),
        }
    }
    let dims: HashSet<_> = strategy.cost_priority.iter().collect();
    if dims.len() != 3 {
        report.push(
            ViolationCode::InvalidStructure,
            Subject::Strategy,
            "cost-priority must name each cost dimension exactly once",
        );
    }

    let derived_order = derived_evaluation_order(&params, &mut report);

    if !report.violations.is_empty() {
        return Err(report);
    }

    Ok(Network {
        name: doc.name.clone(),
        nodes,
        index,
        links: doc.links.clone(),
        preds,
        succs,
        topo,
        params,
        derived_order,
        actions: doc.actions.clone(),
        action_index,
        strategy,
    })
}

fn push_expr_error(report: &mut ValidationReport, subject: Subject, e: ExprError) {
    let code = match e {
        ExprError::UnknownParameter(_) => ViolationCode::DanglingReference,
        _ => ViolationCode::TypeError,
    };
    report.push(code, subject, e.to_string());
}

/// Built-ins plus declared parameters, with declaration problems reported.
fn check_parameters(doc: &KbDocument, report: &mut ValidationReport) -> Vec<ParameterDef> {
    let mut params = builtin_parameters();
    for def in &doc.parameters {
        let subject = Subject::Parameter {
            name: def.name.clone(),
            kind: def.applies_to,
        };
        if params
            .iter()
            .any(|p| p.applies_to == def.applies_to && p.name == def.name)
        {
            report.push(
                ViolationCode::DuplicateId,
                subject,
                format!(
                    "parameter `{}` is already defined on {}",
                    def.name, def.applies_to
                ),
            );
            continue;
        }
        match def.kind {
            ParamKind::Static => {
                if let Some(default) = &def.default {
                    if !def.value_type.admits(default) {
                        report.push(
                            ViolationCode::UnknownValue,
                            subject.clone(),
                            format!("default `{default}` is not a {}", def.value_type),
                        );
                    }
                }
            }
            ParamKind::Derived => {
                if def.expression.is_none() {
                    report.push(
                        ViolationCode::MissingValue,
                        subject.clone(),
                        "derived parameter has no expression",
                    );
                }
            }
            ParamKind::Dynamic => report.push(
                ViolationCode::InvalidStructure,
                subject.clone(),
                "dynamic parameters are computed by the engine and cannot be declared",
            ),
        }
        params.push(def.clone());
    }
    // Expressions are checked once every name is known, so definitions may
    // refer forward; cycles are caught in `derived_evaluation_order`.
    for def in &params {
        let Some(expr) = &def.expression else { continue };
        let kind = def.applies_to;
        let lookup = |name: &str| {
            params
                .iter()
                .find(|p| p.applies_to == kind && p.name == name)
                .map(|p| p.value_type)
        };
        if let Err(e) = expr.check(&lookup) {
            push_expr_error(
                report,
                Subject::Parameter {
                    name: def.name.clone(),
                    kind,
                },
                e,
            );
        }
    }
    params
}

fn check_node_shape(node: &Node, params: &[ParameterDef], report: &mut ValidationReport) {
    let subject = node_subject(&node.id);
    match node.kind {
        NodeKind::Finding => {
            if !node.rules.is_empty() {
                report.push(
                    ViolationCode::InvalidStructure,
                    subject.clone(),
                    "findings take their belief from observations and cannot have rules",
                );
            }
            match &node.domain {
                None => report.push(
                    ViolationCode::InvalidDomain,
                    subject.clone(),
                    "finding has no value domain",
                ),
                Some(domain) => check_domain(domain, &subject, report),
            }
        }
        _ => {
            if node.domain.is_some() {
                report.push(
                    ViolationCode::InvalidStructure,
                    subject.clone(),
                    "only findings have a value domain",
                );
            }
        }
    }
    for (name, value) in &node.statics {
        match params
            .iter()
            .find(|p| p.applies_to == node.kind && &p.name == name)
        {
            Some(p) if p.kind == ParamKind::Static => {
                if !p.value_type.admits(value) {
                    report.push(
                        ViolationCode::UnknownValue,
                        subject.clone(),
                        format!("`{value}` is not a {} value for `{name}`", p.value_type),
                    );
                }
            }
            Some(_) => report.push(
                ViolationCode::InvalidStructure,
                subject.clone(),
                format!("`{name}` is not a static parameter and cannot be set in the KB"),
            ),
            None => report.push(
                ViolationCode::DanglingReference,
                subject.clone(),
                format!("`{name}` is not a parameter of {}", node.kind),
            ),
        }
    }
    for p in params
        .iter()
        .filter(|p| p.applies_to == node.kind && p.kind == ParamKind::Static)
    {
        if p.default.is_none() && !node.statics.contains_key(&p.name) {
            report.push(
                ViolationCode::MissingValue,
                subject.clone(),
                format!("static parameter `{}` has no value and no default", p.name),
            );
        }
    }
}

fn check_domain(domain: &FindingDomain, subject: &Subject, report: &mut ValidationReport) {
    let symbols = domain.symbols();
    if symbols.is_empty() {
        report.push(
            ViolationCode::InvalidDomain,
            subject.clone(),
            "value domain is empty",
        );
    }
    let unique: BTreeSet<_> = symbols.iter().collect();
    if unique.len() != symbols.len() {
        report.push(
            ViolationCode::InvalidDomain,
            subject.clone(),
            "value domain lists a value more than once",
        );
    }
    if let FindingDomain::Numeric(bins) = domain {
        let last = bins.len().saturating_sub(1);
        let mut prev = f64::NEG_INFINITY;
        for (i, bin) in bins.iter().enumerate() {
            match (bin.upper, i == last) {
                (Some(u), false) if u > prev && u.is_finite() => prev = u,
                (None, true) => {}
                _ => {
                    report.push(
                        ViolationCode::InvalidDomain,
                        subject.clone(),
                        "bins need strictly increasing finite upper bounds, with only the last bin unbounded",
                    );
                    break;
                }
            }
        }
    }
}

/// Roles and rules must agree: a confirming rule cites a potentially-confirming
/// link, and every role is exercised by a rule of matching direction.
fn check_roles(
    nodes: &[Node],
    links: &[EvidenceLink],
    index: &HashMap<String, usize>,
    report: &mut ValidationReport,
) {
    for node in nodes {
        for (ri, rule) in node.rules.iter().enumerate() {
            if rule.output != BeliefLevel::Confirmed {
                continue;
            }
            let has_confirming = rule.atoms.iter().any(|a| {
                links.iter().any(|l| {
                    l.source == a.source()
                        && l.target == node.id
                        && l.role == EvidenceRole::PotentiallyConfirming
                })
            });
            if !has_confirming {
                report.push(
                    ViolationCode::RoleRuleInconsistency,
                    Subject::Rule {
                        node: node.id.clone(),
                        index: ri,
                    },
                    "rule concluding `confirmed` must cite a potentially-confirming link",
                );
            }
        }
    }
    for link in links {
        let Some(&t) = index.get(&link.target) else { continue };
        let participates = |accept: &dyn Fn(BeliefLevel) -> bool| {
            nodes[t].rules.iter().any(|r| {
                accept(r.output) && r.atoms.iter().any(|a| a.source() == link.source)
            })
        };
        let (ok, need) = match link.role {
            EvidenceRole::PotentiallyConfirming => (
                participates(&|l| l == BeliefLevel::Confirmed),
                "rule concluding `confirmed`",
            ),
            EvidenceRole::PotentiallyDisconfirming => (
                participates(&|l| l == BeliefLevel::Disconfirmed),
                "rule concluding `disconfirmed`",
            ),
            EvidenceRole::PotentiallySupporting => (
                participates(&|l| l.rank() > 0),
                "rule concluding a level above `unknown`",
            ),
            EvidenceRole::PotentiallyDetracting => (
                participates(&|l| l.rank() < 0),
                "rule concluding a level below `unknown`",
            ),
        };
        if !ok {
            report.push(
                ViolationCode::RoleRuleInconsistency,
                Subject::Link {
                    source: link.source.clone(),
                    target: link.target.clone(),
                },
                format!("link is {} but `{}` has no {need} citing `{}`", link.role, link.target, link.source),
            );
        }
    }
}

/// Kahn's algorithm; on failure returns the nodes left on cycles.
fn topological_sort(succs: &[Vec<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    let n = succs.len();
    let mut indegree = vec![0usize; n];
    for s in succs {
        for &t in s {
            indegree[t] += 1;
        }
    }
    // Lowest index first keeps the order stable across runs.
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &t in &succs[i] {
            indegree[t] -= 1;
            if indegree[t] == 0 {
                ready.insert(t);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).filter(|&i| indegree[i] > 0).collect())
    }
}

fn derived_evaluation_order(
    params: &[ParameterDef],
    report: &mut ValidationReport,
) -> [Vec<usize>; 3] {
    let mut out: [Vec<usize>; 3] = Default::default();
    for kind in NodeKind::ALL {
        let derived: Vec<usize> = (0..params.len())
            .filter(|&i| params[i].applies_to == kind && params[i].kind == ParamKind::Derived)
            .collect();
        let position: HashMap<&str, usize> = derived
            .iter()
            .enumerate()
            .map(|(pos, &i)| (params[i].name.as_str(), pos))
            .collect();
        let mut succs = vec![Vec::new(); derived.len()];
        for (pos, &i) in derived.iter().enumerate() {
            if let Some(expr) = &params[i].expression {
                for r in expr.references() {
                    if let Some(&dep) = position.get(r.as_str()) {
                        succs[dep].push(pos);
                    }
                }
            }
        }
        match topological_sort(&succs) {
            Ok(order) => out[kind.slot()] = order.into_iter().map(|pos| derived[pos]).collect(),
            Err(stuck) => {
                let names: Vec<&str> = stuck
                    .iter()
                    .map(|&pos| params[derived[pos]].name.as_str())
                    .collect();
                report.push(
                    ViolationCode::CycleDetected,
                    Subject::Parameter {
                        name: names[0].to_string(),
                        kind,
                    },
                    format!(
                        "derived parameters on {kind} are defined in terms of each other: {}",
                        names.join(", ")
                    ),
                );
            }
        }
    }
    out
}
