//! Topological diagnostics for the toric code in a magnetic field.
//!
//! The crate computes the topological Rényi entropy S₂ᵀ and the Wilson loop in
//! two ways: exactly for the quasi-1D model, which decouples into transverse
//! field Ising chains solved by free fermions, and as exact rational
//! perturbative series for both the quasi-1D and the isotropic model.

pub mod analysis;
pub mod ed;
pub mod error;
pub mod fermion;
pub mod lattice;
pub mod observables;
pub mod pcut;
pub mod pfaffian;

pub use analysis::{
    bracket_report, ratio_estimates, wilson_resummation_check, Bracket, CriticalEstimate, Estimator,
};
pub use ed::{
    ed_boundary_purity, ed_ground_state, ed_sample_collision, CollisionEstimate, DenseGroundState,
    Layout,
};
pub use error::{Error, Result};
pub use fermion::{
    solve_chain, string_expectation, ChainGroundState, Majorana, MajoranaCovariance, MajoranaKind,
    MajoranaWord, StringFactor, StringValue,
};
pub use lattice::{
    build_partition, build_partition_at, enumerate_boundary_products, quasi_spin_edge,
    BoundaryGeometry, BoundaryLoop, ChainStar, Edge, EdgeDir, LatticeSpec, PartitionCase,
    ProductMode, Star, StarRegion, Variant,
};
pub use observables::{
    classify_scaling, renyi_boundary, renyi_fixed_point, topological_renyi, wilson_loop,
    FixedPoint, RenyiOptions, RenyiValue, ScalingFit, ScalingLaw, SweepResult, WilsonValue,
};
pub use pcut::{
    build_generators, flow_expand, perturbed_ground_state, series_renyi, series_wilson,
    wilson_leading_order_large_field, Channel, Regime, SeriesPolynomial, Target,
};
pub use pfaffian::pfaffian;
