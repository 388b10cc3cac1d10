//! Key hierarchies for secure multicast: cost model, multicast oracles,
//! exact and approximate hierarchy construction, instance generators and
//! ratio experiments.

pub mod bench;
pub mod error;
pub mod exact;
pub mod instances;
pub mod model;
pub mod multicast;
pub mod par;
pub mod routed;
pub mod uniform;

pub use error::{Error, ParseError, Result};
pub use model::{
    eval_cost_member, eval_cost_total, hierarchy_cost, hierarchy_weight, Hierarchy, Instance, MemberId,
    MulticastOracle, Node, NodeId, UniformOracle, VertexId, Weights,
};
pub use par::Exec;
