//! Policy-space heuristic search for fully observable non-deterministic
//! (FOND) planning.

pub mod bench;
pub mod compressor;
pub mod concretizer;
pub mod heuristics;
pub mod parse;
pub mod policy;
pub mod search;
pub mod symmetry;
pub mod task;
pub mod validator;
