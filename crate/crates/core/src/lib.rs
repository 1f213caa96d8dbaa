//! Two-sample testing for networks through signed interlacing cycle
//! statistics, with degree-corrected mixed-membership generators and a
//! reproducible Monte Carlo driver.

pub mod error;
pub mod experiment;
pub mod graph;
pub mod dcmm;
pub mod oracle;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{
    degree_stats, diff, load_edge_list, DegreeStats, EdgeList, Network, SignedAdjacency,
    SignedNetwork,
};
pub use oracle::{oracle_check, OracleCheckReport};
pub use rng::{Purpose, StreamRng};
pub use stats::{compare, normal_sf, phi_test, psi_test, q2, q2_dense, q2_sparse, q3, Kernel, TestReport};
pub use dcmm::{
    build_omega, calibrate_b, two_block_preset, least_favorable, make_case, sample_dirichlet,
    sample_network, sinkhorn_normalize, snr, BernoulliMatrix, Calibration, DcmmParams,
    LeastFavorableSpec, SnrReport,
};
pub use experiment::{
    load_networks, read_manifest, run_monte_carlo, run_monte_carlo_with, scan_pairwise, scan_to_csv,
    to_json, ExperimentSpec, McSummary, ScanResult,
};
