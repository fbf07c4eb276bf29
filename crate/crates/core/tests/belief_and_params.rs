use std::cmp::Ordering;
use std::collections::HashMap;

use mu_core::belief::{compare_levels, satisfies_threshold, BeliefLevel, CostDimension, CostGrade, CostVector, EvidenceRole, ThresholdMode};
use mu_core::bundled::chest_pain;
use mu_core::kb::parse_expr;
use mu_core::network::{BeliefState, NodeKind};
use mu_core::params::{DerivedExpr, Value};
use proptest::prelude::*;

const NAMES: [&str; 7] = [
    "disconfirmed",
    "strongly-detracted",
    "detracted",
    "unknown",
    "supported",
    "strongly-supported",
    "confirmed",
];

#[test]
fn seven_levels_in_rank_order() {
    assert_eq!(BeliefLevel::ALL.len(), 7);
    for (i, level) in BeliefLevel::ALL.iter().enumerate() {
        assert_eq!(level.rank(), i as i8 - 3);
        assert_eq!(level.name(), NAMES[i]);
        assert_eq!(NAMES[i].parse::<BeliefLevel>().unwrap(), *level);
        assert_eq!(BeliefLevel::from_rank(level.rank()), Some(*level));
    }
    assert_eq!(BeliefLevel::from_rank(4), None);
}

#[test]
fn all_pairwise_comparisons_follow_rank() {
    let mut n = 0;
    for a in BeliefLevel::ALL {
        for b in BeliefLevel::ALL {
            assert_eq!(compare_levels(a, b), a.rank().cmp(&b.rank()));
            assert_eq!(a.cmp(&b), a.rank().cmp(&b.rank()));
            n += 1;
        }
    }
    assert_eq!(n, 49);
}

#[test]
fn thresholds() {
    use BeliefLevel::*;
    assert!(satisfies_threshold(Confirmed, ThresholdMode::AtLeast, Supported));
    assert!(!satisfies_threshold(Unknown, ThresholdMode::AtLeast, Supported));
    assert!(satisfies_threshold(Disconfirmed, ThresholdMode::AtMost, Disconfirmed));
    assert!(Confirmed.is_decisive() && Disconfirmed.is_decisive() && !Supported.is_decisive());
}

#[test]
fn role_polarities() {
    assert_eq!(EvidenceRole::PotentiallyConfirming.polarity(), 1);
    assert_eq!(EvidenceRole::PotentiallySupporting.polarity(), 1);
    assert_eq!(EvidenceRole::PotentiallyDetracting.polarity(), -1);
    assert_eq!(EvidenceRole::PotentiallyDisconfirming.polarity(), -1);
}

#[test]
fn costs_compare_by_priority() {
    use CostGrade::*;
    let ekg = CostVector::new(Low, Free, Low);
    let therapy = CostVector::new(Low, Low, Free);
    let risk_first = [CostDimension::Risk, CostDimension::Monetary, CostDimension::Discomfort];
    let discomfort_first = [CostDimension::Discomfort, CostDimension::Risk, CostDimension::Monetary];
    assert_eq!(ekg.cmp_by(&therapy, &risk_first), Ordering::Less);
    assert_eq!(ekg.cmp_by(&therapy, &discomfort_first), Ordering::Greater);
    assert_eq!(ekg.join(&therapy), CostVector::new(Low, Low, Low));
    assert!(ekg.fits_within(&CostVector::new(Low, Low, Low)));
    assert!(!ekg.fits_within(&CostVector::new(Free, Free, Free)));
    assert!(CostVector::FREE.is_free());
}

#[test]
fn critical_truth_table() {
    let kb = chest_pain();
    let net = &kb.network;
    let def = net.parameter(NodeKind::Hypothesis, "critical").unwrap();
    let expr = def.expression.as_ref().unwrap();
    let mut cells = 0;
    for level in BeliefLevel::ALL {
        for dangerous in [true, false] {
            let scope: HashMap<&str, Value> =
                HashMap::from([("belief", Value::Level(level)), ("dangerous", Value::Bool(dangerous))]);
            let expected = level >= BeliefLevel::Supported && dangerous;
            assert_eq!(expr.eval(&scope).unwrap(), expected, "{level} {dangerous}");
            cells += 1;
        }
    }
    assert_eq!(cells, 14);
}

#[test]
fn critical_follows_propagated_beliefs() {
    let kb = chest_pain();
    let net = &kb.network;
    let h = net.index_of("angina").unwrap();
    for (age, sex, critical) in [("older", "male", true), ("young", "female", false)] {
        let obs = [("age".to_string(), age.to_string()), ("sex".to_string(), sex.to_string())].into();
        let s = BeliefState::with_observations(net, obs).unwrap();
        assert_eq!(s.value(net, h, "critical"), Some(Value::Bool(critical)));
    }
}

#[test]
fn type_errors_in_expressions_are_caught() {
    let e = parse_expr("dangerous >= moderate").unwrap();
    let types = |name: &str| match name {
        "dangerous" => Some(mu_core::params::ValueType::Boolean),
        _ => None,
    };
    assert!(e.check(&types).is_err());
    assert!(parse_expr("missing").unwrap().check(&types).is_err());
}

fn level() -> impl Strategy<Value = BeliefLevel> {
    (0usize..7).prop_map(|i| BeliefLevel::ALL[i])
}

proptest! {
    #[test]
    fn trichotomy(a in level(), b in level()) {
        let lt = a < b;
        let eq = a == b;
        let gt = a > b;
        prop_assert_eq!(u8::from(lt) + u8::from(eq) + u8::from(gt), 1);
    }

    #[test]
    fn at_least_and_at_most_partition(a in level(), b in level()) {
        let ge = a.satisfies(ThresholdMode::AtLeast, b);
        let le = a.satisfies(ThresholdMode::AtMost, b);
        prop_assert!(ge || le);
        prop_assert_eq!(ge && le, a == b);
    }

    #[test]
    fn de_morgan(x in any::<bool>(), y in any::<bool>()) {
        let scope: HashMap<&str, Value> = HashMap::from([("x", Value::Bool(x)), ("y", Value::Bool(y))]);
        let lhs = DerivedExpr::flag("x").and(DerivedExpr::flag("y")).not();
        let rhs = DerivedExpr::flag("x").not().or(DerivedExpr::flag("y").not());
        prop_assert_eq!(lhs.eval(&scope).unwrap(), rhs.eval(&scope).unwrap());
    }
}
