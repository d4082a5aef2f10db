use std::fmt;
use std::sync::Arc;

/// Time-dependent boundary value `f(point, t)`.
pub type BoundaryFn = Arc<dyn Fn([f64; 2], f64) -> f64 + Send + Sync>;

/// Water boundary condition on one facet tag.
#[derive(Clone)]
pub enum FlowBc {
    /// Prescribed pressure head.
    Head(BoundaryFn),
    NoFlux,
    /// Unit hydraulic gradient: outward flux `q·n = K`.
    FreeDrainage,
    /// Constant inflow rate (positive into the domain).
    Infiltration(f64),
}

impl FlowBc {
    pub fn constant_head(value: f64) -> Self {
        FlowBc::Head(Arc::new(move |_, _| value))
    }

    pub fn head(f: impl Fn([f64; 2], f64) -> f64 + Send + Sync + 'static) -> Self {
        FlowBc::Head(Arc::new(f))
    }
}

impl fmt::Debug for FlowBc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowBc::Head(_) => write!(f, "Head(..)"),
            FlowBc::NoFlux => write!(f, "NoFlux"),
            FlowBc::FreeDrainage => write!(f, "FreeDrainage"),
            FlowBc::Infiltration(r) => write!(f, "Infiltration({r})"),
        }
    }
}

/// Boundary conditions by facet tag. Untagged boundaries are no-flux.
/// Where facets with two head conditions meet, the first listed wins.
#[derive(Clone, Debug, Default)]
pub struct FlowBoundary {
    pub by_tag: Vec<(i32, FlowBc)>,
}

impl FlowBoundary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, tag: i32, bc: FlowBc) -> Self {
        self.by_tag.push((tag, bc));
        self
    }
}
