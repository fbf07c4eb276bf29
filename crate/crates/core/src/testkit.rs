//! Seeded generator of small valid knowledge bases, for property tests.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::belief::{BeliefLevel, CostDimension, CostGrade, CostVector, EvidenceRole, ThresholdMode};
use crate::kb::KbDocument;
use crate::network::{Bin, CombiningRule, EvidenceLink, FindingDomain, NodeSpec, RuleAtom};
use crate::params::{DerivedExpr, ParameterDef, Value, ValueType, DANGEROUS};
use crate::planner::{ActionKind, ActionSpec, Precondition, StrategyConfig};

#[derive(Debug, Clone)]
pub struct GenConfig {
    /// Upper bound on findings + clusters + hypotheses.
    pub max_nodes: usize,
    pub max_findings: usize,
    /// Only boolean findings.
    pub boolean_only: bool,
    /// Add parameters, statics, actions and a strategy.
    pub decorations: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_nodes: 12,
            max_findings: 6,
            boolean_only: false,
            decorations: true,
        }
    }
}

pub fn random_kb(seed: u64) -> KbDocument {
    random_kb_with(seed, &GenConfig::default())
}

const NON_UNKNOWN: [BeliefLevel; 6] = [
    BeliefLevel::Disconfirmed,
    BeliefLevel::StronglyDetracted,
    BeliefLevel::Detracted,
    BeliefLevel::Supported,
    BeliefLevel::StronglySupported,
    BeliefLevel::Confirmed,
];

/// A document that passes validation. Rules are drawn first; links follow
/// from the sources the rules cite, with roles chosen to agree with them.
pub fn random_kb_with(seed: u64, config: &GenConfig) -> KbDocument {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_findings = config.max_findings.min(config.max_nodes.saturating_sub(1)).max(1);
    let n_findings = rng.gen_range(1..=max_findings);
    let room = config.max_nodes - n_findings;
    let n_hyp = rng.gen_range(1..=room.clamp(1, 3));
    let n_clusters = rng.gen_range(0..=(room - n_hyp).min(4));

    let mut doc = KbDocument {
        name: rng.gen_bool(0.5).then(|| format!("kb-{}", seed % 1000)),
        ..Default::default()
    };
    for i in 0..n_findings {
        let domain = if config.boolean_only {
            FindingDomain::Boolean
        } else {
            match rng.gen_range(0..4) {
                0 => FindingDomain::Boolean,
                1 => FindingDomain::Presence,
                2 => {
                    let n = rng.gen_range(2..=3);
                    FindingDomain::Values((0..n).map(|k| format!("v{k}")).collect())
                }
                _ => FindingDomain::Numeric(vec![
                    Bin {
                        label: "low".into(),
                        upper: Some(rng.gen_range(1..100) as f64 / 2.0),
                    },
                    Bin {
                        label: "high".into(),
                        upper: None,
                    },
                ]),
            }
        };
        doc.findings.push(NodeSpec::finding(&format!("f{i}"), domain));
    }

    let mut links: BTreeMap<(String, String), Vec<BeliefLevel>> = BTreeMap::new();
    let mut inner = Vec::new();
    for i in 0..n_clusters + n_hyp {
        let is_cluster = i < n_clusters;
        let id = if is_cluster {
            format!("c{i}")
        } else {
            format!("h{}", i - n_clusters)
        };
        // Sources: findings and earlier clusters.
        let mut sources: Vec<usize> = (0..n_findings).collect();
        sources.extend((0..i.min(n_clusters)).map(|c| n_findings + c));
        let mut rules = Vec::new();
        for _ in 0..rng.gen_range(0..=3) {
            let n_atoms = rng.gen_range(1..=2).min(sources.len());
            let chosen: Vec<usize> = sources.choose_multiple(&mut rng, n_atoms).copied().collect();
            let output = *NON_UNKNOWN.choose(&mut rng).unwrap();
            let mut atoms = Vec::new();
            for s in chosen {
                let atom = if s < n_findings {
                    let f = &doc.findings[s];
                    let symbols = f.domain.as_ref().unwrap().symbols();
                    let two_valued = matches!(
                        f.domain,
                        Some(FindingDomain::Boolean) | Some(FindingDomain::Presence)
                    );
                    if two_valued && rng.gen_bool(0.3) {
                        belief_atom(&mut rng, &f.id)
                    } else {
                        RuleAtom::Value {
                            finding: f.id.clone(),
                            value: symbols.choose(&mut rng).unwrap().to_string(),
                        }
                    }
                } else {
                    belief_atom(&mut rng, &inner_id(&doc, s - n_findings, n_clusters))
                };
                links
                    .entry((atom.source().to_string(), id.clone()))
                    .or_default()
                    .push(output);
                atoms.push(atom);
            }
            rules.push(CombiningRule { atoms, output });
        }
        let mut spec = NodeSpec::inner(&id, rules);
        if !is_cluster && config.decorations && rng.gen_bool(0.6) {
            spec.statics
                .insert(DANGEROUS.to_string(), Value::Bool(rng.gen_bool(0.5)));
        }
        if is_cluster {
            doc.clusters.push(spec);
        } else {
            doc.hypotheses.push(spec);
        }
        inner.push(id);
    }

    let mut link_list: Vec<EvidenceLink> = links
        .into_iter()
        .map(|((source, target), outputs)| {
            let role = if outputs.contains(&BeliefLevel::Confirmed) {
                EvidenceRole::PotentiallyConfirming
            } else if outputs.contains(&BeliefLevel::Disconfirmed) {
                EvidenceRole::PotentiallyDisconfirming
            } else if outputs.iter().any(|o| o.rank() > 0) {
                EvidenceRole::PotentiallySupporting
            } else {
                EvidenceRole::PotentiallyDetracting
            };
            EvidenceLink { source, target, role }
        })
        .collect();
    link_list.shuffle(&mut rng);
    doc.links = link_list;

    if config.decorations {
        decorate(&mut rng, &mut doc);
    }
    doc
}

fn inner_id(doc: &KbDocument, i: usize, n_clusters: usize) -> String {
    if i < n_clusters {
        doc.clusters[i].id.clone()
    } else {
        doc.hypotheses[i - n_clusters].id.clone()
    }
}

fn belief_atom(rng: &mut ChaCha8Rng, source: &str) -> RuleAtom {
    let mode = if rng.gen_bool(0.5) {
        ThresholdMode::AtLeast
    } else {
        ThresholdMode::AtMost
    };
    let level = *NON_UNKNOWN.choose(rng).unwrap();
    RuleAtom::Belief {
        source: source.to_string(),
        mode,
        level,
    }
}

fn random_cost(rng: &mut ChaCha8Rng) -> CostVector {
    let mut g = || *CostGrade::ALL.choose(rng).unwrap();
    CostVector::new(g(), g(), g())
}

fn decorate(rng: &mut ChaCha8Rng, doc: &mut KbDocument) {
    use crate::network::NodeKind;

    if rng.gen_bool(0.5) {
        let expr = DerivedExpr::belief(ThresholdMode::AtLeast, BeliefLevel::Supported)
            .and(DerivedExpr::flag(DANGEROUS));
        doc.parameters
            .push(ParameterDef::new_derived("critical", NodeKind::Hypothesis, expr));
    }
    if rng.gen_bool(0.5) {
        doc.parameters.push(ParameterDef::new_static(
            "urgency",
            NodeKind::Hypothesis,
            ValueType::Ordinal,
            Some(Value::Grade(CostGrade::Low)),
        ));
        if let Some(h) = doc.hypotheses.choose_mut(rng) {
            h.statics
                .insert("urgency".to_string(), Value::Grade(*CostGrade::ALL.choose(rng).unwrap()));
        }
        let expr = DerivedExpr::Compare {
            param: "urgency".into(),
            op: crate::params::Comparator::Ge,
            value: Value::Grade(CostGrade::Moderate),
        }
        .or(DerivedExpr::flag("triggered").not());
        doc.parameters
            .push(ParameterDef::new_derived("pressing", NodeKind::Hypothesis, expr));
    }

    let mut findings: Vec<String> = doc.findings.iter().map(|f| f.id.clone()).collect();
    findings.shuffle(rng);
    let n_actions = rng.gen_range(1..=findings.len().min(4));
    for (a, chunk) in findings.chunks(findings.len().div_ceil(n_actions)).enumerate() {
        let kind = *ActionKind::ALL.choose(rng).unwrap();
        let mut preconditions = Vec::new();
        if kind == ActionKind::Treatment || rng.gen_bool(0.3) {
            let h = doc.hypotheses.choose(rng).unwrap().id.clone();
            preconditions.push(Precondition {
                node: h,
                condition: DerivedExpr::belief(ThresholdMode::AtLeast, BeliefLevel::Supported),
            });
        }
        doc.actions.push(ActionSpec {
            id: format!("a{a}"),
            kind,
            cost: random_cost(rng),
            yields: chunk.to_vec(),
            preconditions,
            repeatable: rng.gen_bool(0.2),
        });
    }
    if rng.gen_bool(0.5) {
        let mut dims = CostDimension::ALL;
        dims.shuffle(rng);
        doc.strategy = Some(StrategyConfig {
            name: "generated".into(),
            cost_priority: dims,
            presenting: findings.iter().take(rng.gen_range(0..=1)).cloned().collect(),
        });
    }
}

/// Brute-force reference answers for the change and effect queries. They
/// enumerate assignments and subsets directly and share no code with the
/// query module.
pub mod oracle {
    use std::collections::BTreeSet;

    use crate::belief::BeliefLevel;
    use crate::network::{BeliefState, Network, NodeKind, Observations};

    fn unobserved(net: &Network, state: &BeliefState) -> Vec<usize> {
        net.of_kind(NodeKind::Finding)
            .filter(|&f| !state.observations().contains_key(&net.node(f).id))
            .collect()
    }

    fn level_of(net: &Network, codes: &[Option<u16>], target: usize) -> Option<BeliefLevel> {
        net.evaluate_beliefs(codes, None).ok().map(|b| b[target])
    }

    /// Every inclusion-minimal consistent partial assignment whose level moves
    /// the target strictly in the requested direction, as (assignment, level).
    pub fn change_plans(
        net: &Network,
        state: &BeliefState,
        target: &str,
        increase: bool,
    ) -> BTreeSet<(Observations, BeliefLevel)> {
        let t = net.index_of(target).expect("target exists");
        let base = net.encode(state.observations()).expect("state is encodable");
        let baseline = state.belief(target);
        let free = unobserved(net, state);
        let radix: Vec<usize> = free.iter().map(|&f| net.domain(f).unwrap().len() + 1).collect();
        let mut stride = vec![1usize; free.len()];
        for i in 1..free.len() {
            stride[i] = stride[i - 1] * radix[i - 1];
        }
        let total: usize = radix.iter().product();

        // 0 = inconsistent, otherwise rank + 4.
        let mut levels = vec![0u8; total];
        let mut codes = base.clone();
        for (idx, slot) in levels.iter_mut().enumerate() {
            let mut rest = idx;
            for (i, &f) in free.iter().enumerate() {
                let d = rest % radix[i];
                rest /= radix[i];
                codes[f] = if d == 0 { None } else { Some((d - 1) as u16) };
            }
            if let Some(l) = level_of(net, &codes, t) {
                *slot = (l.rank() + 4) as u8;
            }
        }

        let better = |a: u8, b: u8| if increase { a > b } else { a < b };
        let at_least = |a: u8, b: u8| if increase { a >= b } else { a <= b };
        let base_rank = (baseline.rank() + 4) as u8;
        let mut out = BTreeSet::new();
        for idx in 0..total {
            let l = levels[idx];
            if l == 0 || !better(l, base_rank) {
                continue;
            }
            let mut assigned = Vec::new();
            let mut rest = idx;
            for (i, &r) in radix.iter().enumerate() {
                let d = rest % r;
                rest /= r;
                if d > 0 {
                    assigned.push((i, d));
                }
            }
            let k = assigned.len();
            let dominated = (0..(1usize << k) - 1).any(|keep| {
                let mut sub = idx;
                for (bit, &(i, d)) in assigned.iter().enumerate() {
                    if keep & (1 << bit) == 0 {
                        sub -= d * stride[i];
                    }
                }
                levels[sub] != 0 && at_least(levels[sub], l)
            });
            if dominated {
                continue;
            }
            let assignment = assigned
                .iter()
                .map(|&(i, d)| {
                    let f = free[i];
                    let symbol = net.domain(f).unwrap().symbol((d - 1) as u16);
                    (net.node(f).id.clone(), symbol.to_string())
                })
                .collect();
            out.insert((assignment, BeliefLevel::from_rank(l as i8 - 4).unwrap()));
        }
        out
    }

    /// Nodes whose belief differs between two consistent values of `finding`
    /// under some completion of the other unobserved findings.
    pub fn effect_set(net: &Network, state: &BeliefState, finding: &str) -> BTreeSet<String> {
        let f = net.index_of(finding).expect("finding exists");
        let mut observations = state.observations().clone();
        observations.remove(finding);
        let others: Vec<usize> = net
            .of_kind(NodeKind::Finding)
            .filter(|&g| g != f && !observations.contains_key(&net.node(g).id))
            .collect();
        let radix: Vec<usize> = others.iter().map(|&g| net.domain(g).unwrap().len()).collect();
        let total: usize = radix.iter().product();
        let values = net.domain(f).unwrap().len();
        let mut affected = BTreeSet::new();
        for idx in 0..total {
            let mut completion = observations.clone();
            let mut rest = idx;
            for (i, &g) in others.iter().enumerate() {
                let d = rest % radix[i];
                rest /= radix[i];
                let symbol = net.domain(g).unwrap().symbol(d as u16).to_string();
                completion.insert(net.node(g).id.clone(), symbol);
            }
            let outcomes: Vec<_> = (0..values)
                .map(|v| {
                    let mut o = completion.clone();
                    o.insert(finding.to_string(), net.domain(f).unwrap().symbol(v as u16).to_string());
                    net.propagate(&o).ok().map(|r| r.beliefs)
                })
                .collect();
            for x in outcomes.iter().flatten() {
                for y in outcomes.iter().flatten() {
                    for (node, level) in x {
                        if node != finding && y[node] != *level {
                            affected.insert(node.clone());
                        }
                    }
                }
            }
        }
        affected
    }
}
