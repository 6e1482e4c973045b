//! Planar isoperimetric clusters under the radial density |x|^p.
//!
//! The plane is weighted by the density f(x) = |x|^p for a fixed exponent
//! p >= 0: curve lengths and region areas are Euclidean measures integrated
//! against f. This crate evolves 1-4 region clusters toward minimal weighted
//! perimeter at prescribed weighted areas and verifies the equilibrium
//! conditions of the converged states (120-degree junctions, constant
//! generalized curvature, circular arcs through the origin).
//!
//! Module map:
//! * [`geom`] - points and the density field.
//! * [`quadrature`] - Gauss-Legendre rules on [0, 1].
//! * [`measure`] - weighted lengths/areas of segments and their gradients.
//! * [`circle`] - least-squares circle fits.
//! * [`curvature`] - generalized curvature estimation along sampled arcs.
//! * [`cluster`] - the vertex/edge/region mesh, validity, boundaries, arcs.
//! * [`surgery`] - refinement, edge collapse, vertex pop.
//! * [`doc`] - the cluster document format (load/save).
//! * [`energy`] - whole-cluster functionals, constraint projection.
//! * [`evolve`] - projected-gradient descent, transitions, schedules.
//! * [`seeds`] - initial configurations (double/triple/quadruple/chain/circle).
//! * [`analyze`] - junction angles, arc regularity, run comparisons.

pub mod analyze;
pub mod circle;
pub mod cluster;
pub mod curvature;
pub mod doc;
pub mod energy;
pub mod evolve;
pub mod geom;
mod linsolve;
pub mod measure;
pub mod quadrature;
pub mod seeds;
pub mod surgery;

pub use circle::{fit_circle, CircleFit};
pub use cluster::{Cluster, Edge, EdgeId, Region, RegionId, RegionRef, Vertex, VertexId};
pub use energy::EnergyState;
pub use evolve::{EvolveConfig, Schedule, StepResult};
pub use geom::{DensityField, Point};
pub use quadrature::QuadratureRule;
