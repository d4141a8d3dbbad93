//! Achievable rate regions.

mod bundle;
mod capacity;
mod polygon;
mod project;
mod search;
mod system;
#[cfg(test)]
pub(crate) mod testutil;

pub use bundle::{mi_bundle, MiBundle};
pub use capacity::{
    alpha_grid, capacity_terms, example2_capacity, example2_constraints, is_physically_degraded,
    shannon_strategy_bound, theorem3_capacity, CapacityRegion, CapacityTerms, DegradednessMode, Example2Bounds,
    SHANNON_BUDGET,
};
pub use polygon::{convex_hull_2d, HalfPlane, RatePoint, RatePolygon};
pub use project::{
    clip_to_box, eliminate_to_plane, project_polytope, project_polytope_within, scheme1_closed_form, PlaneRow, FEAS_TOL,
};
pub use search::{
    achievable_region, bundle_polygon, random_aux, region_polygon, CandidateSource, RegionSearch, SearchConfig,
    VertexOrigin,
};
pub use system::{region_system, Constraint, LinearConstraintSystem, RegionId};
