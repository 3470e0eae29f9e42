//! Exact-rational perturbative continuous unitary transformations (PCUT).
//!
//! The flow coefficients are computed once per letter set ([`flow`]), ground
//! states of finite term clusters follow from them ([`model`]), and extensive
//! functionals are summed with a linked-cluster expansion ([`cluster`]) before
//! being split into geometric channels ([`series`]).

pub mod cluster;
pub mod coeff;
pub mod flow;
pub mod model;
pub mod operator;
pub mod power;
pub mod series;

pub use cluster::{ClusterEngine, ClusterKey, ClusterStats};
pub use coeff::CoefficientFunction;
pub use flow::{flow_expand, FlowExpansion, Word};
pub use model::{cluster_ground_state, perturbed_ground_state, ClusterObservable, GroundState};
pub use operator::{
    build_generators, Generators, LocalOp, Monomial, OperatorSum, Regime, SiteLabel,
};
pub use power::PowerSeries;
pub use series::{
    default_series, renyi_family, renyi_family_on, series_renyi, series_wilson, wilson_family,
    wilson_family_on, wilson_leading_order_large_field, Channel, LeadingOrder, RenyiSeriesEngine,
    SeriesPolynomial, Target, MAX_ORDER,
};
