//! Invariant graphs: storage, construction and audits.

pub mod audit;
pub mod boundary;
pub mod derivative;
pub mod graph;
pub mod intersect;
pub mod shoot;
pub mod transform;

pub use audit::{cone_invariance_probe, invariance_residual, lipschitz_audit, periodicity_audit, separation_probe, ConeTrace, InvarianceReport};
pub use boundary::{classify_boundary, BoundaryReport, FaceClass, FaceReport};
pub use derivative::derivative_field;
pub use graph::{Axis, FnGraph, GraphFn, GraphManifold, ZGrid};
pub use intersect::{intersect_graphs, IntersectOptions, Intersection};
pub use shoot::{compute_graph_shoot, ShootOptions};
pub use transform::{compute_graph_transform, TransformOptions, TransformOutcome};
