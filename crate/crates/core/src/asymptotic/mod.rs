mod fit;
mod glue;
mod inner;
mod outer;

pub use fit::{CubicSpline, Side, SideField};
pub use glue::{
    build_boundary, default_delta, glue, interface_clearance, residual_orders, ApproxSolution, BoundaryEnd, BoundaryLayerFields, BoundaryTrace, Composite,
    ConstructionConfig, Constructor, DistanceExpansion, RegionSups, ResidualNorms, ResidualOrders,
};
pub use inner::{build_inner, interface_solvability_integral, Coefficients, InnerFields, InnerTables, QuotientField, ZBasis};
pub use outer::{build_outer, domain_measure, run_history, FirstOrderFields, Order1State, OuterFields, SharpHistory, SidePair};

/// Truncation order `k` of the matched expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Zero,
    One,
}

impl Order {
    pub fn k(self) -> u32 {
        match self {
            Order::Zero => 0,
            Order::One => 1,
        }
    }
}
