#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::OnceLock;

use jsonschema::{Draft, JSONSchema};
use mu_service::KbRegistry;
use serde_json::Value;

fn schema_document() -> &'static Value {
    static DOC: OnceLock<Value> = OnceLock::new();
    DOC.get_or_init(|| {
        let text = include_str!("../../../../docs/protocol.md");
        let start = text.find("## Schemas").expect("schema section");
        let rest = &text[start..];
        let open = rest.find("```json\n").expect("schema block") + "```json\n".len();
        let close = rest[open..].find("\n```").expect("schema block end");
        serde_json::from_str(&rest[open..open + close]).expect("schema block is JSON")
    })
}

fn compiled() -> &'static HashMap<String, JSONSchema> {
    static SCHEMAS: OnceLock<HashMap<String, JSONSchema>> = OnceLock::new();
    SCHEMAS.get_or_init(|| {
        let doc = schema_document();
        let defs = doc["$defs"].as_object().expect("$defs");
        defs.keys()
            .map(|name| {
                let wrapper = serde_json::json!({
                    "$schema": "https://json-schema.org/draft/2020-12/schema",
                    "$ref": format!("#/$defs/{name}"),
                    "$defs": doc["$defs"].clone(),
                });
                let schema = JSONSchema::options()
                    .with_draft(Draft::Draft202012)
                    .should_validate_formats(true)
                    .compile(&wrapper)
                    .unwrap_or_else(|e| panic!("schema {name}: {e}"));
                (name.clone(), schema)
            })
            .collect()
    })
}

/// Panics with every violation if `value` does not match the named schema.
pub fn assert_schema(name: &str, value: &Value) {
    let schema = compiled().get(name).unwrap_or_else(|| panic!("no schema {name}"));
    if let Err(errors) = schema.validate(value) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{name} violated:\n{}\n{}", msgs.join("\n"), serde_json::to_string_pretty(value).unwrap());
    }
}

pub fn is_valid(name: &str, value: &Value) -> bool {
    compiled()[name].is_valid(value)
}

pub fn schema_names() -> Vec<String> {
    let mut names: Vec<String> = compiled().keys().cloned().collect();
    names.sort();
    names
}

pub fn kbs() -> KbRegistry {
    KbRegistry::bundled()
}

pub fn classic_patient() -> serde_json::Value {
    serde_json::json!({
        "age": 62,
        "sex": "male",
        "substernal-pain": "present",
        "pain-after-eating": false,
        "episode-pattern": "exertional",
        "ekg-result": "normal",
        "during-episode": false,
        "therapy-response": "abated",
        "stress-test-result": "severe-ischemia",
        "angiogram-result": "positive"
    })
}

pub fn rule_out_patient() -> serde_json::Value {
    serde_json::json!({
        "age": 30,
        "sex": "female",
        "substernal-pain": "present",
        "pain-after-eating": false,
        "episode-pattern": "exertional",
        "ekg-result": "normal",
        "during-episode": false
    })
}
