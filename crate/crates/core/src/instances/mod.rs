//! Instance and hierarchy files, random generators and reduction instances.

pub mod gen;
pub mod io;
pub mod reductions;

pub use gen::{gen_random, GenKind, GenSpec, Prng};
pub use io::{parse_hierarchy, parse_hierarchy_for, parse_instance, write_hierarchy, write_instance};
pub use reductions::{gen_3dmatching, gen_3partition, Reduction, ThreeDMatchingSpec, ThreePartitionSpec};
