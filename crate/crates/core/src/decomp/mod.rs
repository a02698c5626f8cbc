//! Tree decompositions: validation, normalization to nice form, good
//! colorings, and the per-forget-node variable contexts.

mod coloring;
mod context;
mod nice;
mod tree;

use thiserror::Error;

pub use coloring::{good_coloring, Coloring};
pub use context::{all_contexts, context_of, forget_ownership, Context, ForgetOwnership};
pub use nice::{check_nice, is_path_decomposition, make_nice, NiceKind, NiceNode, NiceTreeDecomposition};
pub use tree::{
    id_order_path_decomposition, min_fill_decomposition, parse_decomposition,
    path_decomposition_from_order, serialize_decomposition, validate_decomposition,
    TreeDecomposition, ValidationReport, Violation,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("the graph has no vertices")]
    EmptyGraph,
    #[error("invalid tree decomposition: {0}")]
    Invalid(String),
    #[error("not a nice tree decomposition: {0}")]
    NotNice(String),
    #[error("node {0} is not a forget node")]
    NotForget(usize),
    #[error("vertex {0} is never forgotten")]
    NeverForgotten(u32),
}
