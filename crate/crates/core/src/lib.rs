//! Single-pass streaming matching on random-order edge streams.
//!
//! The crate provides the graph and matching primitives, exact oracles, the
//! edge-degree-constrained sparsifier, the augmentation algorithm that improves on it,
//! checkers for its structural guarantees, instance generators and a deterministic
//! parallel trial runner.

pub mod analyzer;
pub mod augmenter;
pub mod augpath;
pub mod graph;
pub mod instances;
pub mod matching;
pub mod oracle;
pub mod sparsifier;
pub mod stream;
pub mod trial;

pub use augmenter::{beats23_match, greedy_match, TrialDiagnostics};
pub use graph::{Bipartition, Edge, Graph, GraphError, Vertex};
pub use matching::{apply_augmenting_path, symmetric_difference, EdgeSet, Matching, Path};
pub use oracle::{matching_number, max_matching};
pub use sparsifier::{bernstein_match, derive_params, AlgoParams};
pub use stream::{make_stream, EdgeStream, Phase, PhaseSplit};
pub use trial::{run_trials, TrialConfig, TrialReport};
