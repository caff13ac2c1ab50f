//! Numerical geometry of tangent bundles with the Sasaki metric.
//!
//! The crate computes, at desk scale, the geometry of submanifolds
//! `ξ(F^l) ⊂ TM^n` generated by vector fields along submanifolds of a
//! Riemannian manifold: tangent/normal frames, induced metrics, the
//! totally-geodesic residual conditions, Sasaki geodesic flow, and
//! Lie-algebra reductions for bi-invariant group metrics. A scenario
//! registry packages the theorem-level checks behind a CLI.

pub mod config;
pub mod dual;
pub mod error;
pub mod expr;
pub mod field;
pub mod geodesic;
pub mod lie;
pub mod manifold;
pub mod sasaki;
pub mod scenario;
pub mod smooth;
pub mod tensor;

pub use config::RunConfig;
pub use dual::{Dual, Real, D1, D2};
pub use geodesic::{integrate, oracle_integrate, rhs, sasaki_energy, trace_divergence, trace_to_csv, BundleGeodesicState, GeodesicTrace, StateDerivative, TraceRecord};
pub use field::{riemann_from_parts, FieldAlongPatch, SubmanifoldPatch, TGReport};
pub use error::{GeomError, Result};
pub use lie::LieAlgebraModel;
pub use manifold::{ChartDomain, ChartedManifold, DiffMode, Point, TangentVector};
pub use sasaki::{assemble, kowalski_connection, kowalski_nabla, sasaki_christoffel_fd, sasaki_inner, sasaki_matrix, split, BundlePoint, BundleTangent, LiftKind};
pub use scenario::{run_scenario, GridSpec, Outcome, ScenarioOverrides, ScenarioReport, Tolerances};
pub use smooth::SmoothFn;
pub use tensor::{Tensor3, Tensor4};
