use super::propagate::NodeScope;
use super::{Network, Observations, PropagationError, PropagationResult};
use crate::belief::BeliefLevel;
use crate::params::{Bindings, Value};

/// The observation set of one consultation and the propagation it implies.
///
/// Belief is a pure function of the full observation set: every update
/// re-propagates from scratch.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    observations: Observations,
    result: PropagationResult,
}

impl BeliefState {
    pub fn new(net: &Network) -> Result<Self, PropagationError> {
        Self::with_observations(net, Observations::new())
    }

    pub fn with_observations(
        net: &Network,
        observations: Observations,
    ) -> Result<Self, PropagationError> {
        let mut result = net.propagate(&observations)?;
        result.diff.clear();
        Ok(BeliefState {
            observations,
            result,
        })
    }

    pub fn observations(&self) -> &Observations {
        &self.observations
    }

    pub fn result(&self) -> &PropagationResult {
        &self.result
    }

    pub fn belief(&self, node: &str) -> BeliefLevel {
        self.result.belief(node)
    }

    pub fn belief_at(&self, net: &Network, idx: usize) -> BeliefLevel {
        self.belief(&net.node(idx).id)
    }

    /// Any parameter of a node: belief, dynamic, derived or static.
    pub fn value(&self, net: &Network, idx: usize, name: &str) -> Option<Value> {
        let id = &net.node(idx).id;
        let empty = Default::default();
        let scope = NodeScope {
            net,
            idx,
            belief: self.belief(id),
            dynamic: self.result.dynamic.get(id).unwrap_or(&empty),
        };
        scope.lookup(name)
    }

    pub(crate) fn bindings<'a>(&'a self, net: &'a Network, idx: usize) -> impl Bindings + 'a {
        let id = &net.node(idx).id;
        NodeScope {
            net,
            idx,
            belief: self.belief(id),
            dynamic: self
                .result
                .dynamic
                .get(id)
                .expect("propagation covers every node"),
        }
    }

    /// Merges new observations and re-propagates. On error the state is left
    /// untouched. The returned diff is relative to the previous beliefs.
    pub fn observe(
        &mut self,
        net: &Network,
        observations: &Observations,
    ) -> Result<PropagationResult, PropagationError> {
        let mut merged = self.observations.clone();
        merged.extend(observations.iter().map(|(k, v)| (k.clone(), v.clone())));
        let result = net.propagate_from(&self.result.beliefs, &merged)?;
        self.observations = merged;
        self.result = result.clone();
        Ok(result)
    }

    pub fn observe_one(
        &mut self,
        net: &Network,
        finding: &str,
        value: &str,
    ) -> Result<PropagationResult, PropagationError> {
        let obs = Observations::from([(finding.to_string(), value.to_string())]);
        self.observe(net, &obs)
    }
}
