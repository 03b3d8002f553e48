//! Randomized spectral clustering for large multi-layer networks.
//!
//! The pipeline keeps each edge with probability `p` (rescaled by `1/p`),
//! forms a bias-corrected sum of squared layer adjacencies as a matrix-free
//! operator, extracts its leading eigenvectors with a randomized block Krylov
//! solver, and clusters the embedding rows with k-means. Simulators for
//! multi-layer stochastic block models and the usual partition metrics are
//! included so the whole workflow can be benchmarked end to end.

pub mod eig;
pub mod error;
pub mod exec;
pub mod graph;
pub mod io;
pub mod kmeans;
pub mod metrics;
pub mod operator;
pub mod pipeline;
mod seed;
pub mod sim;
pub mod sketch;

pub use eig::{
    default_power, dense_top_eigs, draw_test_matrix, krylov_basis, pad_basis, rayleigh_ritz, select_k_by_eigengap,
    Embedding, KrylovConfig, TestDistribution,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use graph::{
    degrees, load_edge_list, spmv, write_edge_list, DegreeMode, DegreeVector, MultiLayerNetwork, SparseLayer,
};
pub use kmeans::{kmeans, ClusterResult};
pub use metrics::{ami, ari, misclassification_rate, ConfusionTable};
pub use operator::{DenseOperator, SymmetricOperator};
pub use pipeline::{
    rsc_coclustering, rsc_pipeline, sc_coclustering, sc_pipeline, CoClusterOutput, PipelineConfig, PipelineOutput,
    ScMode, Timings,
};
pub use sim::{model_preset, population_pi, sample_msbm, sample_mscbm, BlockModel, Membership, PopulationMatrix};
pub use sketch::{build_operator, dense_reference, sparsify, DebiasedOperator, SamplingConfig, Variant};
