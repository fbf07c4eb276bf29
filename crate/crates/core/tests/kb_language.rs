use mu_core::bundled::CHEST_PAIN_SOURCE;
use mu_core::kb::{codes, load_kb, parse_expr, parse_kb, serialize_kb, Location, Severity};
use mu_core::testkit::{random_kb, random_kb_with, GenConfig};
use proptest::prelude::*;

fn located_inside(text: &str, loc: Location) -> bool {
    let lines: Vec<&str> = text.split('\n').collect();
    loc.line >= 1 && loc.line <= lines.len() && loc.column >= 1 && loc.column <= lines[loc.line - 1].chars().count() + 1
}

#[test]
fn empty_text_is_an_empty_kb() {
    let doc = parse_kb("").unwrap();
    assert_eq!(doc.node_count(), 0);
    assert!(load_kb("# nothing here\n").is_ok());
}

#[test]
fn bundled_kb_round_trips() {
    let doc = parse_kb(CHEST_PAIN_SOURCE).unwrap();
    let text = serialize_kb(&doc);
    assert_eq!(parse_kb(&text).unwrap(), doc);
    assert_eq!(serialize_kb(&parse_kb(&text).unwrap()), text);
}

#[test]
fn random_documents_round_trip() {
    for seed in 0..200 {
        let doc = random_kb(seed);
        let text = serialize_kb(&doc);
        let back = parse_kb(&text).unwrap_or_else(|d| panic!("seed {seed}: {d:?}\n{text}"));
        assert_eq!(back, doc, "seed {seed}\n{text}");
        assert!(load_kb(&text).is_ok(), "seed {seed}");
    }
}

#[test]
fn serialization_is_byte_stable() {
    let doc = random_kb(7);
    assert_eq!(serialize_kb(&doc), serialize_kb(&doc.clone()));
}

#[test]
fn bad_static_value_is_located() {
    let text = "finding f\nhypothesis h {\n  dangerous: maybe;\n  rule: if f = true then supported\n}\nlink f -> h role potentially-supporting\n";
    let diags = parse_kb(text).unwrap_err();
    assert_eq!(diags[0].code, codes::UNKNOWN_VALUE);
    assert_eq!(diags[0].location.line, 3);
}

#[test]
fn cycle_is_rejected_with_location() {
    let text = "\
finding f
cluster a { rule: if f = true then supported; rule: if b at-least supported then supported }
cluster b { rule: if a at-least supported then supported }
link f -> a role potentially-supporting
link b -> a role potentially-supporting
link a -> b role potentially-supporting
";
    let diags = load_kb(text).unwrap_err();
    let cycle = diags.iter().find(|d| d.code == "cycle-detected").expect("cycle diagnostic");
    assert_eq!(cycle.severity, Severity::Error);
    assert_eq!(cycle.location, Location::new(2, 1));
    assert!(cycle.message.contains("a, b"));
    assert!(diags.iter().all(|d| located_inside(text, d.location)));
}

#[test]
fn dangling_reference_is_rejected_with_location() {
    let text = "finding f\nhypothesis h { rule: if f = true then supported }\nlink f -> h role potentially-supporting\nlink g -> h role potentially-supporting\n";
    let diags = load_kb(text).unwrap_err();
    let d = diags.iter().find(|d| d.code == "dangling-reference").expect("dangling diagnostic");
    assert_eq!(d.location, Location::new(4, 1));
}

#[test]
fn dangling_rule_source_is_rejected() {
    let text = "finding f\nhypothesis h { rule: if nowhere = true then supported }\n";
    let diags = load_kb(text).unwrap_err();
    assert!(diags.iter().any(|d| d.code == "dangling-reference" && d.location.line == 2));
}

#[test]
fn duplicate_ids_point_at_the_second_declaration() {
    let text = "finding f\nfinding g\nfinding f\n";
    let diags = parse_kb(text).unwrap_err();
    assert_eq!(diags[0].code, codes::DUPLICATE_ID);
    assert_eq!(diags[0].location.line, 3);
}

#[test]
fn syntax_errors_recover_to_next_declaration() {
    let text = "finding f {\n  type: boolean\nhypothesis h { rule: if f = then supported }\nfinding g { values: }\n";
    let diags = parse_kb(text).unwrap_err();
    assert!(diags.len() >= 2, "{diags:?}");
    assert!(diags.iter().all(|d| d.code == codes::SYNTAX_ERROR));
    assert!(diags.iter().all(|d| located_inside(text, d.location)));
}

#[test]
fn inert_atoms_warn() {
    let text = "finding f\ncluster c { rule: if f = true then supported }\nhypothesis h { rule: if c at-least disconfirmed then supported }\nlink f -> c role potentially-supporting\nlink c -> h role potentially-supporting\n";
    let kb = load_kb(text).unwrap();
    assert_eq!(kb.warnings.len(), 1);
    assert_eq!(kb.warnings[0].code, codes::INERT_ATOM);
    assert_eq!(kb.warnings[0].location.line, 3);
}

#[test]
fn role_rule_mismatch_is_rejected() {
    let text = "finding f\nhypothesis h { rule: if f = true then detracted }\nlink f -> h role potentially-supporting\n";
    let diags = load_kb(text).unwrap_err();
    assert!(diags.iter().any(|d| d.code == "role-rule-inconsistency"), "{diags:?}");
}

#[test]
fn expressions_parse() {
    let e = parse_expr("belief at-least supported and not (dangerous or urgency >= moderate)").unwrap();
    assert_eq!(e.references().len(), 3);
    assert!(parse_expr("belief at-least").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_documents_round_trip(seed in any::<u64>(), boolean in any::<bool>(), decorations in any::<bool>()) {
        let config = GenConfig { boolean_only: boolean, decorations, ..GenConfig::default() };
        let doc = random_kb_with(seed, &config);
        let text = serialize_kb(&doc);
        prop_assert_eq!(parse_kb(&text).unwrap(), doc);
    }

    #[test]
    fn arbitrary_text_never_panics_and_diagnostics_are_located(text in "[a-z{}:;=<>\\-\\n ]{0,120}") {
        if let Err(diags) = load_kb(&text) {
            prop_assert!(!diags.is_empty());
            for d in diags {
                prop_assert!(located_inside(&text, d.location), "{:?}", d);
            }
        }
    }
}
