pub mod assignment;
pub mod decomp;
pub mod graph;
pub mod io;
pub mod mso;
pub mod obdd;
pub mod pipeline;
pub mod query;
pub mod sdd;
pub mod state;
