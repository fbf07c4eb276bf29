use super::{node_index, QueryError};
use crate::belief::CostDimension;
use crate::network::{BeliefState, Network};
use crate::params::Value;

/// Current value of a node parameter, or of an action's cost dimension,
/// `kind` or `repeatable`.
pub fn query_state(net: &Network, state: &BeliefState, id: &str, parameter: &str) -> Result<Value, QueryError> {
    let unknown = || QueryError::UnknownParameter {
        node: id.to_string(),
        name: parameter.to_string(),
    };
    if let Some(action) = net.action(id) {
        if let Ok(dim) = parameter.parse::<CostDimension>() {
            return Ok(Value::Grade(action.cost.get(dim)));
        }
        return match parameter {
            "kind" => Ok(Value::Symbol(action.kind.to_string())),
            "repeatable" => Ok(Value::Bool(action.repeatable)),
            _ => Err(unknown()),
        };
    }
    let idx = node_index(net, id)?;
    net.parameter(net.node(idx).kind, parameter).ok_or_else(unknown)?;
    state.value(net, idx, parameter).ok_or_else(unknown)
}
