//! Exact semi-static hedging on finite filtered markets.
//!
//! Everything is computed in exact rational arithmetic: calibrated martingale
//! measures and their vertices, semi-static replication and completeness,
//! atomic trees, superhedging duality, and progressive enlargement.

pub mod bounds;
pub mod codec;
pub mod duality;
pub mod enlargement;
pub mod hedging;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod polytope;
pub mod random;
pub mod rational;
pub mod scenario;
pub mod tree;
pub mod verify;
