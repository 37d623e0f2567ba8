//! Computational toolkit for cube pavings of closed 3-manifolds, the
//! tetrahedral triangulations they induce, homological systoles of dual
//! graphs, and the tangle links used to certify filling properties.

pub mod dual_graph;
pub mod exact;
pub mod halfspace;
pub mod nielsen;
pub mod paving;
pub mod tangle;
pub mod triangulation;
pub mod volume;
