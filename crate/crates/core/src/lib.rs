//! Exact-geometry trunk packing: free-space regions for box centers,
//! obstacle simplification and LP-driven pattern enumeration.

pub mod geometry;
pub mod rational;
pub mod simplex;
pub mod catalog;
pub mod freespace;
pub mod lp;
pub mod simplify;
pub mod search;
pub mod pipeline;
