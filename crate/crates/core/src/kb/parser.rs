use std::collections::{HashMap, HashSet};

use super::diagnostics::{codes, Location, SourceDiagnostic};
use super::lexer::{tokenize, Tok, Token};
use super::{KbDocument, SourceMap};
use crate::belief::{BeliefLevel, CostDimension, CostGrade, CostVector, EvidenceRole, ThresholdMode};
use crate::network::{Bin, CombiningRule, EvidenceLink, FindingDomain, NodeKind, NodeSpec, RuleAtom};
use crate::params::{builtin_parameters, Comparator, DerivedExpr, ParamKind, ParameterDef, Value, ValueType};
use crate::planner::{ActionKind, ActionSpec, Precondition, StrategyConfig};

const TOP_LEVEL: &[&str] = &[
    "kb",
    "parameter",
    "finding",
    "cluster",
    "hypothesis",
    "link",
    "action",
    "strategy",
];

const RESERVED: &[&str] = &["and", "or", "not", "if", "then", "belief"];

/// Abandons the current item; the diagnostic is already recorded.
struct Bail;

type PResult<T> = Result<T, Bail>;

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
    diags: Vec<SourceDiagnostic>,
}

/// Parses a whole document. On failure every diagnostic found is returned.
pub(crate) fn parse_document(text: &str) -> Result<(KbDocument, SourceMap), Vec<SourceDiagnostic>> {
    let (toks, diags) = tokenize(text);
    let mut p = Parser {
        toks,
        pos: 0,
        diags,
    };
    let mut doc = KbDocument::default();
    let mut map = SourceMap::default();
    while !p.at_eof() {
        let start = p.pos;
        if p.item(&mut doc, &mut map).is_err() {
            p.resync(start);
        }
    }
    check_document(&doc, &map, &mut p.diags);
    if p.diags.iter().any(|d| d.is_error()) {
        Err(p.diags)
    } else {
        Ok((doc, map))
    }
}

/// Parses a standalone derived-parameter expression.
pub(crate) fn parse_expression(text: &str) -> Result<DerivedExpr, Vec<SourceDiagnostic>> {
    let (toks, diags) = tokenize(text);
    let mut p = Parser {
        toks,
        pos: 0,
        diags,
    };
    let expr = p.expr();
    if expr.is_ok() && !p.at_eof() {
        let t = p.peek().clone();
        p.error(t.loc, codes::SYNTAX_ERROR, format!("unexpected {} after expression", t.tok.describe()));
    }
    match expr {
        Ok(e) if p.diags.is_empty() => Ok(e),
        _ => Err(p.diags),
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_tok(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_ident(&self) -> Option<&str> {
        match self.peek_tok() {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek_tok(), Tok::Eof)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if !matches!(t.tok, Tok::Eof) {
            self.pos += 1;
        }
        t
    }

    fn error(&mut self, loc: Location, code: &str, message: impl Into<String>) {
        self.diags.push(SourceDiagnostic::error(loc, code, message));
    }

    fn fail<T>(&mut self, message: impl Into<String>) -> PResult<T> {
        let t = self.peek().clone();
        let message = format!("{}, found {}", message.into(), t.tok.describe());
        self.error(t.loc, codes::SYNTAX_ERROR, message);
        Err(Bail)
    }

    /// Skips to the next top-level keyword that starts a line.
    fn resync(&mut self, start: usize) {
        if self.pos == start {
            self.bump();
        }
        while !self.at_eof() {
            let t = self.peek();
            if t.line_start {
                if let Tok::Ident(s) = &t.tok {
                    if TOP_LEVEL.contains(&s.as_str()) {
                        return;
                    }
                }
            }
            self.bump();
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek_tok() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Location> {
        if self.peek_tok() == &tok {
            Ok(self.bump().loc)
        } else {
            self.fail(format!("expected {}", tok.describe()))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.peek_ident() == Some(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.fail(format!("expected `{kw}`"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Location)> {
        match self.peek_tok().clone() {
            Tok::Ident(s) => {
                let loc = self.bump().loc;
                Ok((s, loc))
            }
            _ => self.fail(format!("expected {what}")),
        }
    }

    /// An identifier that names something the author declares.
    fn name(&mut self, what: &str) -> PResult<(String, Location)> {
        let (s, loc) = self.ident(what)?;
        if RESERVED.contains(&s.as_str()) || TOP_LEVEL.contains(&s.as_str()) {
            self.error(loc, codes::SYNTAX_ERROR, format!("`{s}` is a reserved word and cannot be used as {what}"));
            return Err(Bail);
        }
        Ok((s, loc))
    }

    /// A keyword from a closed vocabulary, parsed with `FromStr`.
    fn enumerated<T: std::str::FromStr>(&mut self, what: &str) -> PResult<T> {
        let (s, loc) = self.ident(what)?;
        match s.parse() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.error(loc, codes::UNKNOWN_VALUE, format!("`{s}` is not a valid {what}"));
                Err(Bail)
            }
        }
    }

    fn ident_list(&mut self, what: &str) -> PResult<Vec<String>> {
        let mut out = vec![self.ident(what)?.0];
        while self.eat(&Tok::Comma) {
            out.push(self.ident(what)?.0);
        }
        Ok(out)
    }

    fn item(&mut self, doc: &mut KbDocument, map: &mut SourceMap) -> PResult<()> {
        let t = self.peek().clone();
        let Tok::Ident(kw) = &t.tok else {
            return self.fail("expected a declaration");
        };
        let loc = t.loc;
        match kw.as_str() {
            "kb" => {
                self.bump();
                let (name, nloc) = self.ident("knowledge base name")?;
                if doc.name.is_some() {
                    self.error(nloc, codes::DUPLICATE_ID, "the knowledge base is already named");
                }
                doc.name = Some(name);
            }
            "parameter" => {
                self.bump();
                let def = self.parameter()?;
                map.parameters.push(((def.name.clone(), def.applies_to), loc));
                doc.parameters.push(def);
            }
            "finding" | "cluster" | "hypothesis" => {
                self.bump();
                let kind: NodeKind = kw.parse().expect("keyword is a node kind");
                let spec = self.node(kind, map)?;
                map.nodes.push((spec.id.clone(), loc));
                match kind {
                    NodeKind::Finding => doc.findings.push(spec),
                    NodeKind::Cluster => doc.clusters.push(spec),
                    NodeKind::Hypothesis => doc.hypotheses.push(spec),
                }
            }
            "link" => {
                self.bump();
                let (source, _) = self.name("a node id")?;
                self.expect(Tok::Arrow)?;
                let (target, _) = self.name("a node id")?;
                self.expect_keyword("role")?;
                let role: EvidenceRole = self.enumerated("evidence role")?;
                self.eat(&Tok::Semi);
                map.links.push(loc);
                doc.links.push(EvidenceLink { source, target, role });
            }
            "action" => {
                self.bump();
                let action = self.action()?;
                map.actions.push((action.id.clone(), loc));
                doc.actions.push(action);
            }
            "strategy" => {
                self.bump();
                let strategy = self.strategy()?;
                if doc.strategy.is_some() {
                    self.error(loc, codes::DUPLICATE_ID, "only one strategy block is allowed");
                }
                map.strategy = Some(loc);
                doc.strategy = Some(strategy);
            }
            other => {
                self.error(loc, codes::UNKNOWN_KEYWORD, format!("unknown declaration `{other}`"));
                return Err(Bail);
            }
        }
        Ok(())
    }

    fn parameter(&mut self) -> PResult<ParameterDef> {
        let (name, _) = self.name("a parameter name")?;
        self.expect_keyword("on")?;
        let applies_to: NodeKind = self.enumerated("node kind")?;
        if self.eat(&Tok::Eq) {
            let expr = self.expr()?;
            self.eat(&Tok::Semi);
            return Ok(ParameterDef::new_derived(&name, applies_to, expr));
        }
        self.expect_keyword("static")?;
        let value_type = self.value_type()?;
        let default = if self.eat_keyword("default") {
            Some(self.constant()?)
        } else {
            None
        };
        self.eat(&Tok::Semi);
        Ok(ParameterDef::new_static(&name, applies_to, value_type, default))
    }

    fn value_type(&mut self) -> PResult<ValueType> {
        let (s, loc) = self.ident("a value type")?;
        match s.as_str() {
            "boolean" => Ok(ValueType::Boolean),
            "belief-level" => Ok(ValueType::BeliefLevel),
            "ordinal" => {
                self.expect(Tok::LParen)?;
                let (scale, sloc) = self.ident("a scale name")?;
                self.expect(Tok::RParen)?;
                if scale != "cost" {
                    self.error(sloc, codes::UNKNOWN_VALUE, format!("unknown ordinal scale `{scale}` (only `cost` is defined)"));
                    return Err(Bail);
                }
                Ok(ValueType::Ordinal)
            }
            _ => {
                self.error(loc, codes::UNKNOWN_VALUE, format!("unknown value type `{s}`"));
                Err(Bail)
            }
        }
    }

    fn constant(&mut self) -> PResult<Value> {
        let (s, _) = self.ident("a constant")?;
        Ok(Value::from_constant(&s))
    }

    /// `key: ...` entries between braces, separated by `;`.
    fn block(&mut self, mut entry: impl FnMut(&mut Self, String, Location) -> PResult<()>) -> PResult<()> {
        self.expect(Tok::LBrace)?;
        loop {
            if self.eat(&Tok::RBrace) {
                return Ok(());
            }
            let (key, loc) = self.ident("an entry name or `}`")?;
            self.expect(Tok::Colon)?;
            entry(self, key, loc)?;
            if !self.eat(&Tok::Semi) {
                self.expect(Tok::RBrace)?;
                return Ok(());
            }
        }
    }

    fn node(&mut self, kind: NodeKind, map: &mut SourceMap) -> PResult<NodeSpec> {
        let (id, _) = self.name("a node id")?;
        let mut spec = NodeSpec {
            id: id.clone(),
            ..Default::default()
        };
        if !matches!(self.peek_tok(), Tok::LBrace) {
            self.eat(&Tok::Semi);
            if kind == NodeKind::Finding {
                spec.domain = Some(FindingDomain::Boolean);
            }
            return Ok(spec);
        }
        let mut static_locs = Vec::new();
        self.block(|p, key, loc| {
            match (kind, key.as_str()) {
                (NodeKind::Finding, "type" | "values" | "bins") => {
                    if spec.domain.is_some() {
                        p.error(loc, codes::DUPLICATE_ID, "the value domain is already given");
                    }
                    spec.domain = Some(p.domain(&key)?);
                }
                (NodeKind::Cluster | NodeKind::Hypothesis, "rule") => {
                    map.rules.insert((id.clone(), spec.rules.len()), loc);
                    spec.rules.push(p.rule()?);
                }
                _ => {
                    let value = p.constant()?;
                    if spec.statics.insert(key.clone(), value).is_some() {
                        p.error(loc, codes::DUPLICATE_ID, format!("`{key}` is set more than once"));
                    }
                    static_locs.push((key, loc));
                }
            }
            Ok(())
        })?;
        for (key, loc) in static_locs {
            map.statics.entry((id.clone(), key)).or_insert(loc);
        }
        if kind == NodeKind::Finding && spec.domain.is_none() {
            spec.domain = Some(FindingDomain::Boolean);
        }
        Ok(spec)
    }

    fn domain(&mut self, key: &str) -> PResult<FindingDomain> {
        match key {
            "type" => {
                let (s, loc) = self.ident("`boolean` or `presence`")?;
                match s.as_str() {
                    "boolean" => Ok(FindingDomain::Boolean),
                    "presence" => Ok(FindingDomain::Presence),
                    _ => {
                        self.error(loc, codes::UNKNOWN_VALUE, format!("unknown finding type `{s}` (expected boolean or presence)"));
                        Err(Bail)
                    }
                }
            }
            "values" => Ok(FindingDomain::Values(self.ident_list("a value")?)),
            _ => {
                let mut bins = Vec::new();
                loop {
                    let (label, _) = self.ident("a bin label")?;
                    let upper = if self.eat(&Tok::Lt) {
                        match self.peek_tok().clone() {
                            Tok::Number(x) => {
                                self.bump();
                                Some(x)
                            }
                            _ => return self.fail("expected a number"),
                        }
                    } else {
                        None
                    };
                    bins.push(Bin { label, upper });
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                Ok(FindingDomain::Numeric(bins))
            }
        }
    }

    fn rule(&mut self) -> PResult<CombiningRule> {
        self.expect_keyword("if")?;
        let mut atoms = vec![self.rule_atom()?];
        while self.eat_keyword("and") {
            atoms.push(self.rule_atom()?);
        }
        self.expect_keyword("then")?;
        let output: BeliefLevel = self.enumerated("belief level")?;
        Ok(CombiningRule { atoms, output })
    }

    fn rule_atom(&mut self) -> PResult<RuleAtom> {
        let (source, _) = self.name("a node id")?;
        if self.eat(&Tok::Eq) {
            let (value, _) = self.ident("a value")?;
            return Ok(RuleAtom::Value { finding: source, value });
        }
        let mode = match self.peek_ident() {
            Some("at-least") => ThresholdMode::AtLeast,
            Some("at-most") => ThresholdMode::AtMost,
            _ => return self.fail("expected `=`, `at-least` or `at-most`"),
        };
        self.bump();
        let level: BeliefLevel = self.enumerated("belief level")?;
        Ok(RuleAtom::Belief { source, mode, level })
    }

    fn action(&mut self) -> PResult<ActionSpec> {
        let (id, _) = self.name("an action id")?;
        let mut action = ActionSpec {
            id,
            kind: ActionKind::Question,
            cost: CostVector::FREE,
            yields: Vec::new(),
            preconditions: Vec::new(),
            repeatable: false,
        };
        self.block(|p, key, loc| {
            match key.as_str() {
                "kind" => action.kind = p.enumerated("action kind")?,
                "cost" => action.cost = p.cost()?,
                "yields" => action.yields.extend(p.ident_list("a finding id")?),
                "requires" => {
                    let (node, _) = p.name("a node id")?;
                    p.expect(Tok::LParen)?;
                    let condition = p.expr()?;
                    p.expect(Tok::RParen)?;
                    action.preconditions.push(Precondition { node, condition });
                }
                "repeatable" => {
                    let (s, vloc) = p.ident("`true` or `false`")?;
                    action.repeatable = match s.as_str() {
                        "true" => true,
                        "false" => false,
                        _ => {
                            p.error(vloc, codes::UNKNOWN_VALUE, format!("`{s}` is not a boolean"));
                            return Err(Bail);
                        }
                    };
                }
                _ => {
                    p.error(loc, codes::UNKNOWN_KEYWORD, format!("unknown action entry `{key}`"));
                    return Err(Bail);
                }
            }
            Ok(())
        })?;
        Ok(action)
    }

    fn cost(&mut self) -> PResult<CostVector> {
        let mut cost = CostVector::FREE;
        let mut seen = HashSet::new();
        self.expect(Tok::LBrace)?;
        loop {
            let dim: CostDimension = self.enumerated("cost dimension")?;
            self.expect(Tok::Colon)?;
            let grade: CostGrade = self.enumerated("cost grade")?;
            if !seen.insert(dim) {
                let loc = self.toks[self.pos - 1].loc;
                self.error(loc, codes::DUPLICATE_ID, format!("cost dimension `{dim}` given twice"));
            }
            cost.set(dim, grade);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        let close = self.expect(Tok::RBrace)?;
        if seen.len() != 3 {
            self.error(close, codes::SYNTAX_ERROR, "a cost must give monetary, risk and discomfort");
            return Err(Bail);
        }
        Ok(cost)
    }

    fn strategy(&mut self) -> PResult<StrategyConfig> {
        let (name, _) = self.name("a strategy name")?;
        let mut config = StrategyConfig {
            name,
            ..Default::default()
        };
        self.block(|p, key, loc| {
            match key.as_str() {
                "cost-priority" => {
                    let mut dims = Vec::new();
                    loop {
                        dims.push(p.enumerated::<CostDimension>("cost dimension")?);
                        if !p.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    let unique: HashSet<_> = dims.iter().collect();
                    if dims.len() != 3 || unique.len() != 3 {
                        p.error(loc, codes::SYNTAX_ERROR, "cost-priority must list monetary, risk and discomfort once each");
                        return Err(Bail);
                    }
                    config.cost_priority = [dims[0], dims[1], dims[2]];
                }
                "presenting" => config.presenting = p.ident_list("a finding id")?,
                _ => {
                    p.error(loc, codes::UNKNOWN_KEYWORD, format!("unknown strategy entry `{key}`"));
                    return Err(Bail);
                }
            }
            Ok(())
        })?;
        Ok(config)
    }

    // expr := and ('or' and)*
    fn expr(&mut self) -> PResult<DerivedExpr> {
        let mut lhs = self.conjunction()?;
        while self.eat_keyword("or") {
            let rhs = self.conjunction()?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<DerivedExpr> {
        let mut lhs = self.unary()?;
        while self.eat_keyword("and") {
            let rhs = self.unary()?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<DerivedExpr> {
        if self.eat_keyword("not") {
            return Ok(self.unary()?.not());
        }
        if self.eat(&Tok::LParen) {
            let inner = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(inner);
        }
        let (name, loc) = self.ident("a parameter, `belief`, `not` or `(`")?;
        if ["and", "or", "if", "then"].contains(&name.as_str()) {
            self.error(loc, codes::SYNTAX_ERROR, format!("unexpected `{name}` in expression"));
            return Err(Bail);
        }
        if name == "belief" {
            match self.peek_ident() {
                Some("at-least") | Some("at-most") => {
                    let mode: ThresholdMode = self.enumerated("threshold mode")?;
                    let level: BeliefLevel = self.enumerated("belief level")?;
                    return Ok(DerivedExpr::Belief { mode, level });
                }
                _ => {}
            }
        }
        let op = match self.peek_tok() {
            Tok::Eq => Some(Comparator::Eq),
            Tok::Ne => Some(Comparator::Ne),
            Tok::Lt => Some(Comparator::Lt),
            Tok::Le => Some(Comparator::Le),
            Tok::Gt => Some(Comparator::Gt),
            Tok::Ge => Some(Comparator::Ge),
            _ => None,
        };
        match op {
            Some(op) => {
                self.bump();
                let value = self.constant()?;
                Ok(DerivedExpr::Compare { param: name, op, value })
            }
            None => Ok(DerivedExpr::Flag(name)),
        }
    }
}

/// Checks that need the whole document: duplicate ids and the names and
/// types of static parameter settings.
fn check_document(doc: &KbDocument, map: &SourceMap, diags: &mut Vec<SourceDiagnostic>) {
    let mut seen = HashSet::new();
    for (id, loc) in &map.nodes {
        if !seen.insert(id.as_str()) {
            diags.push(SourceDiagnostic::error(
                *loc,
                codes::DUPLICATE_ID,
                format!("node id `{id}` is declared more than once"),
            ));
        }
    }
    let mut seen = HashSet::new();
    for (id, loc) in &map.actions {
        if !seen.insert(id.as_str()) {
            diags.push(SourceDiagnostic::error(
                *loc,
                codes::DUPLICATE_ID,
                format!("action id `{id}` is declared more than once"),
            ));
        }
    }
    let mut seen = HashSet::new();
    for (i, l) in doc.links.iter().enumerate() {
        if !seen.insert((l.source.as_str(), l.target.as_str())) {
            diags.push(SourceDiagnostic::error(
                map.link(i),
                codes::DUPLICATE_ID,
                format!("`{} -> {}` is linked more than once", l.source, l.target),
            ));
        }
    }

    let mut statics: HashMap<(NodeKind, &str), ValueType> = HashMap::new();
    let mut others: HashSet<(NodeKind, &str)> = HashSet::new();
    let builtins = builtin_parameters();
    let mut seen = HashSet::new();
    for def in builtins.iter() {
        seen.insert((def.applies_to, def.name.as_str()));
    }
    for ((name, kind), loc) in &map.parameters {
        if !seen.insert((*kind, name.as_str())) {
            diags.push(SourceDiagnostic::error(
                *loc,
                codes::DUPLICATE_ID,
                format!("parameter `{name}` is already defined on {kind}"),
            ));
        }
    }
    for def in builtins.iter().chain(&doc.parameters) {
        if def.kind == ParamKind::Static {
            statics.insert((def.applies_to, def.name.as_str()), def.value_type);
        } else {
            others.insert((def.applies_to, def.name.as_str()));
        }
    }
    let kinds = [
        (NodeKind::Finding, &doc.findings),
        (NodeKind::Cluster, &doc.clusters),
        (NodeKind::Hypothesis, &doc.hypotheses),
    ];
    for (kind, specs) in kinds {
        for spec in specs {
            for (key, value) in &spec.statics {
                let loc = map.static_entry(&spec.id, key);
                match statics.get(&(kind, key.as_str())) {
                    Some(ty) if ty.admits(value) => {}
                    Some(ty) => diags.push(SourceDiagnostic::error(
                        loc,
                        codes::UNKNOWN_VALUE,
                        format!("`{value}` is not a {ty} value for `{key}`"),
                    )),
                    None if others.contains(&(kind, key.as_str())) => {
                        diags.push(SourceDiagnostic::error(
                            loc,
                            codes::UNKNOWN_KEYWORD,
                            format!("`{key}` is computed by the engine and cannot be set"),
                        ))
                    }
                    None => diags.push(SourceDiagnostic::error(
                        loc,
                        codes::UNKNOWN_KEYWORD,
                        format!("unknown entry `{key}` for a {kind}"),
                    )),
                }
            }
        }
    }
}
