use mu_core::bundled::chest_pain;
use mu_core::kb::load_kb;
use mu_core::network::{BeliefState, Network, NodeKind, Observations};
use mu_core::serialize_kb;
use mu_core::testkit::random_kb;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_observations(net: &Network, rng: &mut ChaCha8Rng) -> Observations {
    let mut obs = Observations::new();
    for f in net.of_kind(NodeKind::Finding) {
        if rng.gen_bool(0.5) {
            let domain = net.domain(f).unwrap();
            let v = rng.gen_range(0..domain.len()) as u16;
            obs.insert(net.node(f).id.clone(), domain.symbol(v).to_string());
        }
    }
    obs
}

fn networks() -> Vec<Network> {
    let mut nets = vec![chest_pain().network];
    nets.extend((0..100).map(|seed| load_kb(&serialize_kb(&random_kb(seed))).unwrap().network));
    nets
}

fn check_properties(net: &Network, obs: &Observations) {
    let Ok(full) = net.propagate(obs) else { return };
    assert_eq!(net.propagate(obs).unwrap(), full, "determinism");

    let mut state = BeliefState::with_observations(net, obs.clone()).unwrap();
    let again = state.observe(net, obs).unwrap();
    assert!(again.diff.is_empty(), "idempotence");
    assert_eq!(again.beliefs, full.beliefs);

    let mut incremental = BeliefState::new(net).unwrap();
    for (f, v) in obs {
        incremental.observe_one(net, f, v).unwrap();
    }
    assert_eq!(incremental.result().beliefs, full.beliefs, "incremental");
    assert_eq!(incremental.result().dynamic, full.dynamic);

    for (f, v) in obs {
        let mut rest = obs.clone();
        rest.remove(f);
        let Ok(before) = net.propagate(&rest) else { continue };
        let mut s = BeliefState::with_observations(net, rest).unwrap();
        let r = s.observe_one(net, f, v).unwrap();
        let reach = net.descendants(net.index_of(f).unwrap());
        for change in &r.diff {
            let n = net.index_of(&change.node).unwrap();
            assert!(n == net.index_of(f).unwrap() || reach[n], "locality: {f} changed {}", change.node);
            assert_eq!(before.belief(&change.node), change.old);
        }
    }
}

#[test]
fn properties_hold_on_bundled_and_random_kbs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for net in networks() {
        for _ in 0..10 {
            let obs = random_observations(&net, &mut rng);
            check_properties(&net, &obs);
        }
    }
}

#[test]
fn diff_lists_exactly_the_changed_nodes() {
    let kb = chest_pain();
    let net = &kb.network;
    let mut s = BeliefState::new(net).unwrap();
    let r = s.observe_one(net, "age", "young").unwrap();
    let changed: Vec<&str> = r.diff.iter().map(|c| c.node.as_str()).collect();
    assert!(changed.is_empty(), "{changed:?}");
    let r = s.observe_one(net, "sex", "female").unwrap();
    let mut changed: Vec<&str> = r.diff.iter().map(|c| c.node.as_str()).collect();
    changed.sort();
    assert_eq!(changed, ["angina", "angina-risk-factors"]);
}

#[test]
fn inconsistent_evidence_leaves_state_untouched() {
    let kb = load_kb(
        "finding a\nfinding b\nhypothesis h { rule: if a = true then confirmed; rule: if b = true then disconfirmed }\nlink a -> h role potentially-confirming\nlink b -> h role potentially-disconfirming\n",
    )
    .unwrap();
    let net = &kb.network;
    let mut s = BeliefState::new(net).unwrap();
    s.observe_one(net, "a", "true").unwrap();
    let before = s.clone();
    assert!(s.observe_one(net, "b", "true").is_err());
    assert_eq!(s, before);
    assert!(s.observe_one(net, "zzz", "true").is_err());
    assert!(s.observe_one(net, "a", "perhaps").is_err());
    assert_eq!(s, before);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_kbs_satisfy_propagation_properties(seed in any::<u64>(), obs_seed in any::<u64>()) {
        let net = load_kb(&serialize_kb(&random_kb(seed))).unwrap().network;
        let mut rng = ChaCha8Rng::seed_from_u64(obs_seed);
        let obs = random_observations(&net, &mut rng);
        check_properties(&net, &obs);
    }
}
