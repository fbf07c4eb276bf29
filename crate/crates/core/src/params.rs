//! Control parameters: values, declarations and derived-parameter expressions.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::belief::{BeliefLevel, CostGrade, ThresholdMode};
use crate::network::NodeKind;

/// Name of the built-in dynamic parameter holding a node's belief level.
pub const BELIEF: &str = "belief";
/// Built-in dynamic parameter on findings: a value has been recorded.
pub const OBSERVED: &str = "observed";
/// Built-in dynamic parameter on clusters and hypotheses.
pub const TRIGGERED: &str = "triggered";
/// Built-in static boolean on hypotheses, default false.
pub const DANGEROUS: &str = "dangerous";
/// Derived parameter consulted by focus selection when the KB defines it.
pub const CRITICAL: &str = "critical";

/// A control-parameter value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Bool(bool),
    Grade(CostGrade),
    Level(BeliefLevel),
    Symbol(String),
}

impl Value {
    /// Interprets a bare constant the way the KB language does.
    pub fn from_constant(text: &str) -> Value {
        match text {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            _ => {
                if let Ok(level) = text.parse() {
                    Value::Level(level)
                } else if let Ok(grade) = text.parse() {
                    Value::Grade(grade)
                } else {
                    Value::Symbol(text.to_string())
                }
            }
        }
    }

    pub fn value_type(&self) -> Option<ValueType> {
        match self {
            Value::Bool(_) => Some(ValueType::Boolean),
            Value::Grade(_) => Some(ValueType::Ordinal),
            Value::Level(_) => Some(ValueType::BeliefLevel),
            Value::Symbol(_) => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Grade(g) => write!(f, "{g}"),
            Value::Level(l) => write!(f, "{l}"),
            Value::Symbol(s) => f.write_str(s),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Bool(b) => serializer.serialize_bool(*b),
            other => serializer.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Bool(bool),
            Text(String),
        }
        Ok(match Raw::deserialize(deserializer)? {
            Raw::Bool(b) => Value::Bool(b),
            Raw::Text(s) => Value::from_constant(&s),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueType {
    Boolean,
    /// The cost scale `free < low < moderate < high < very-high`.
    Ordinal,
    BeliefLevel,
}

impl ValueType {
    pub fn keyword(self) -> &'static str {
        match self {
            ValueType::Boolean => "boolean",
            ValueType::Ordinal => "ordinal(cost)",
            ValueType::BeliefLevel => "belief-level",
        }
    }

    pub fn admits(self, value: &Value) -> bool {
        value.value_type() == Some(self)
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamKind {
    Static,
    Dynamic,
    Derived,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterDef {
    pub name: String,
    pub applies_to: NodeKind,
    pub kind: ParamKind,
    pub value_type: ValueType,
    /// Static parameters only.
    pub default: Option<Value>,
    /// Derived parameters only.
    pub expression: Option<DerivedExpr>,
}

impl ParameterDef {
    pub fn new_static(
        name: &str,
        applies_to: NodeKind,
        value_type: ValueType,
        default: Option<Value>,
    ) -> Self {
        ParameterDef {
            name: name.to_string(),
            applies_to,
            kind: ParamKind::Static,
            value_type,
            default,
            expression: None,
        }
    }

    pub fn new_derived(name: &str, applies_to: NodeKind, expression: DerivedExpr) -> Self {
        ParameterDef {
            name: name.to_string(),
            applies_to,
            kind: ParamKind::Derived,
            value_type: ValueType::Boolean,
            default: None,
            expression: Some(expression),
        }
    }
}

/// The parameters every network provides without declaration.
pub fn builtin_parameters() -> Vec<ParameterDef> {
    let dynamic = |name: &str, kind: NodeKind, value_type| ParameterDef {
        name: name.to_string(),
        applies_to: kind,
        kind: ParamKind::Dynamic,
        value_type,
        default: None,
        expression: None,
    };
    let mut defs = Vec::new();
    for kind in NodeKind::ALL {
        defs.push(dynamic(BELIEF, kind, ValueType::BeliefLevel));
    }
    defs.push(dynamic(OBSERVED, NodeKind::Finding, ValueType::Boolean));
    defs.push(dynamic(TRIGGERED, NodeKind::Cluster, ValueType::Boolean));
    defs.push(dynamic(TRIGGERED, NodeKind::Hypothesis, ValueType::Boolean));
    defs.push(ParameterDef::new_static(
        DANGEROUS,
        NodeKind::Hypothesis,
        ValueType::Boolean,
        Some(Value::Bool(false)),
    ));
    defs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Comparator {
    pub const ALL: [Comparator; 6] = [
        Comparator::Eq,
        Comparator::Ne,
        Comparator::Lt,
        Comparator::Le,
        Comparator::Gt,
        Comparator::Ge,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Eq => "=",
            Comparator::Ne => "!=",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
        }
    }

    pub fn is_equality(self) -> bool {
        matches!(self, Comparator::Eq | Comparator::Ne)
    }

    fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            Comparator::Eq => ord == Equal,
            Comparator::Ne => ord != Equal,
            Comparator::Lt => ord == Less,
            Comparator::Le => ord != Greater,
            Comparator::Gt => ord == Greater,
            Comparator::Ge => ord != Less,
        }
    }
}

/// Boolean expression over a node's parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DerivedExpr {
    /// `belief at-least LEVEL` / `belief at-most LEVEL`
    Belief {
        mode: ThresholdMode,
        level: BeliefLevel,
    },
    /// Bare reference to a boolean parameter.
    Flag(String),
    /// `param comparator constant`
    Compare {
        param: String,
        op: Comparator,
        value: Value,
    },
    Not(Box<DerivedExpr>),
    And(Box<DerivedExpr>, Box<DerivedExpr>),
    Or(Box<DerivedExpr>, Box<DerivedExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("parameter `{param}` has a value of the wrong type for this expression")]
    TypeMismatch { param: String },
}

/// Static type errors found when checking an expression against declarations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("parameter `{param}` is {found}, expected {expected}")]
    WrongType {
        param: String,
        expected: String,
        found: ValueType,
    },
    #[error("comparator `{op}` is not defined for boolean parameter `{param}`")]
    OrderingOnBoolean { param: String, op: &'static str },
}

/// Source of parameter values for expression evaluation.
pub trait Bindings {
    fn lookup(&self, name: &str) -> Option<Value>;
}

impl Bindings for HashMap<String, Value> {
    fn lookup(&self, name: &str) -> Option<Value> {
        self.get(name).cloned()
    }
}

impl Bindings for HashMap<&str, Value> {
    fn lookup(&self, name: &str) -> Option<Value> {
        self.get(name).cloned()
    }
}

impl Bindings for std::collections::BTreeMap<String, Value> {
    fn lookup(&self, name: &str) -> Option<Value> {
        self.get(name).cloned()
    }
}

impl DerivedExpr {
    pub fn belief(mode: ThresholdMode, level: BeliefLevel) -> Self {
        DerivedExpr::Belief { mode, level }
    }

    pub fn flag(name: &str) -> Self {
        DerivedExpr::Flag(name.to_string())
    }

    pub fn and(self, other: DerivedExpr) -> Self {
        DerivedExpr::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: DerivedExpr) -> Self {
        DerivedExpr::Or(Box::new(self), Box::new(other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        DerivedExpr::Not(Box::new(self))
    }

    /// Parameter names the expression reads, including `belief`.
    pub fn references(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs(&self, out: &mut BTreeSet<String>) {
        match self {
            DerivedExpr::Belief { .. } => {
                out.insert(BELIEF.to_string());
            }
            DerivedExpr::Flag(name) => {
                out.insert(name.clone());
            }
            DerivedExpr::Compare { param, .. } => {
                out.insert(param.clone());
            }
            DerivedExpr::Not(inner) => inner.collect_refs(out),
            DerivedExpr::And(a, b) | DerivedExpr::Or(a, b) => {
                a.collect_refs(out);
                b.collect_refs(out);
            }
        }
    }

    /// Checks names and types against `type_of`, which maps a parameter
    /// name to its declared type for the node kind in question.
    pub fn check(&self, type_of: &dyn Fn(&str) -> Option<ValueType>) -> Result<(), ExprError> {
        let expect = |param: &str, expected: ValueType| -> Result<(), ExprError> {
            let found =
                type_of(param).ok_or_else(|| ExprError::UnknownParameter(param.to_string()))?;
            if found != expected {
                return Err(ExprError::WrongType {
                    param: param.to_string(),
                    expected: expected.to_string(),
                    found,
                });
            }
            Ok(())
        };
        match self {
            DerivedExpr::Belief { .. } => expect(BELIEF, ValueType::BeliefLevel),
            DerivedExpr::Flag(name) => expect(name, ValueType::Boolean),
            DerivedExpr::Compare { param, op, value } => {
                let found = type_of(param)
                    .ok_or_else(|| ExprError::UnknownParameter(param.clone()))?;
                if !found.admits(value) {
                    return Err(ExprError::WrongType {
                        param: param.clone(),
                        expected: format!("compared with `{value}`"),
                        found,
                    });
                }
                if found == ValueType::Boolean && !op.is_equality() {
                    return Err(ExprError::OrderingOnBoolean {
                        param: param.clone(),
                        op: op.symbol(),
                    });
                }
                Ok(())
            }
            DerivedExpr::Not(inner) => inner.check(type_of),
            DerivedExpr::And(a, b) | DerivedExpr::Or(a, b) => {
                a.check(type_of)?;
                b.check(type_of)
            }
        }
    }

    pub fn eval(&self, bindings: &dyn Bindings) -> Result<bool, EvalError> {
        eval_derived(self, bindings)
    }

    fn precedence(&self) -> u8 {
        match self {
            DerivedExpr::Or(..) => 1,
            DerivedExpr::And(..) => 2,
            DerivedExpr::Not(..) => 3,
            _ => 4,
        }
    }
}

pub fn eval_derived(expr: &DerivedExpr, bindings: &dyn Bindings) -> Result<bool, EvalError> {
    let fetch = |name: &str| {
        bindings
            .lookup(name)
            .ok_or_else(|| EvalError::UnboundParameter(name.to_string()))
    };
    match expr {
        DerivedExpr::Belief { mode, level } => match fetch(BELIEF)? {
            Value::Level(current) => Ok(current.satisfies(*mode, *level)),
            _ => Err(EvalError::TypeMismatch {
                param: BELIEF.to_string(),
            }),
        },
        DerivedExpr::Flag(name) => fetch(name)?
            .as_bool()
            .ok_or_else(|| EvalError::TypeMismatch {
                param: name.clone(),
            }),
        DerivedExpr::Compare { param, op, value } => {
            let current = fetch(param)?;
            let ord = match (&current, value) {
                (Value::Bool(a), Value::Bool(b)) if op.is_equality() => a.cmp(b),
                (Value::Grade(a), Value::Grade(b)) => a.cmp(b),
                (Value::Level(a), Value::Level(b)) => a.cmp(b),
                (Value::Symbol(a), Value::Symbol(b)) if op.is_equality() => a.cmp(b),
                _ => {
                    return Err(EvalError::TypeMismatch {
                        param: param.clone(),
                    })
                }
            };
            Ok(op.holds(ord))
        }
        DerivedExpr::Not(inner) => Ok(!eval_derived(inner, bindings)?),
        DerivedExpr::And(a, b) => Ok(eval_derived(a, bindings)? && eval_derived(b, bindings)?),
        DerivedExpr::Or(a, b) => Ok(eval_derived(a, bindings)? || eval_derived(b, bindings)?),
    }
}

impl fmt::Display for DerivedExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, e: &DerivedExpr, min: u8| {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            DerivedExpr::Belief { mode, level } => write!(f, "belief {mode} {level}"),
            DerivedExpr::Flag(name) => f.write_str(name),
            DerivedExpr::Compare { param, op, value } => {
                write!(f, "{param} {} {value}", op.symbol())
            }
            DerivedExpr::Not(inner) => {
                f.write_str("not ")?;
                child(f, inner, 3)
            }
            // Operators parse left-associatively, so a right operand of the
            // same precedence needs parentheses to keep its shape.
            DerivedExpr::And(a, b) => {
                child(f, a, 2)?;
                f.write_str(" and ")?;
                child(f, b, 3)
            }
            DerivedExpr::Or(a, b) => {
                child(f, a, 1)?;
                f.write_str(" or ")?;
                child(f, b, 2)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use BeliefLevel::*;

    fn critical() -> DerivedExpr {
        DerivedExpr::belief(ThresholdMode::AtLeast, Supported).and(DerivedExpr::flag(DANGEROUS))
    }

    fn bindings(level: BeliefLevel, dangerous: bool) -> HashMap<String, Value> {
        HashMap::from([
            (BELIEF.to_string(), Value::Level(level)),
            (DANGEROUS.to_string(), Value::Bool(dangerous)),
        ])
    }

    #[test]
    fn critical_examples() {
        assert!(eval_derived(&critical(), &bindings(Supported, true)).unwrap());
        assert!(!eval_derived(&critical(), &bindings(Confirmed, false)).unwrap());
    }

    #[test]
    fn unbound_parameter_is_reported() {
        let only_belief = HashMap::from([(BELIEF.to_string(), Value::Level(Supported))]);
        assert_eq!(
            eval_derived(&critical(), &only_belief),
            Err(EvalError::UnboundParameter(DANGEROUS.to_string()))
        );
    }

    #[test]
    fn comparisons_on_ordinals() {
        let expr = DerivedExpr::Compare {
            param: "monetary".into(),
            op: Comparator::Le,
            value: Value::Grade(CostGrade::Low),
        };
        let cheap = HashMap::from([("monetary".to_string(), Value::Grade(CostGrade::Free))]);
        let dear = HashMap::from([("monetary".to_string(), Value::Grade(CostGrade::High))]);
        assert!(expr.eval(&cheap).unwrap());
        assert!(!expr.eval(&dear).unwrap());
        assert_eq!(
            expr.eval(&bindings(Unknown, true)),
            Err(EvalError::UnboundParameter("monetary".into()))
        );
    }

    #[test]
    fn check_rejects_bad_types() {
        let types = |name: &str| match name {
            BELIEF => Some(ValueType::BeliefLevel),
            DANGEROUS => Some(ValueType::Boolean),
            _ => None,
        };
        assert!(critical().check(&types).is_ok());
        assert_eq!(
            DerivedExpr::flag("nope").check(&types),
            Err(ExprError::UnknownParameter("nope".into()))
        );
        let ordered_bool = DerivedExpr::Compare {
            param: DANGEROUS.into(),
            op: Comparator::Lt,
            value: Value::Bool(true),
        };
        assert!(matches!(
            ordered_bool.check(&types),
            Err(ExprError::OrderingOnBoolean { .. })
        ));
        let wrong_constant = DerivedExpr::Compare {
            param: DANGEROUS.into(),
            op: Comparator::Eq,
            value: Value::Level(Supported),
        };
        assert!(matches!(
            wrong_constant.check(&types),
            Err(ExprError::WrongType { .. })
        ));
    }

    #[test]
    fn display_keeps_shape() {
        let e = DerivedExpr::flag("a").and(DerivedExpr::flag("b").or(DerivedExpr::flag("c")));
        assert_eq!(e.to_string(), "a and (b or c)");
        let e = DerivedExpr::flag("a")
            .and(DerivedExpr::flag("b"))
            .not()
            .or(critical());
        assert_eq!(
            e.to_string(),
            "not (a and b) or belief at-least supported and dangerous"
        );
    }

    #[test]
    fn value_json_shape() {
        let v: Vec<Value> = vec![
            Value::Bool(true),
            Value::Grade(CostGrade::Low),
            Value::Level(StronglySupported),
        ];
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(text, r#"[true,"low","strongly-supported"]"#);
    }
}
