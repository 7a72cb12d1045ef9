//! Enumeration of all inclusion-minimal gene fixings that force every short
//! attractor of a synchronous Boolean network to satisfy a phenotype, via a
//! cut-generation loop over integer linear models, with an exhaustive
//! simulator as independent ground truth.

pub mod benders;
pub mod builder;
pub mod cnf;
pub mod dynamics;
pub mod expr;
pub mod model;
pub mod network;
pub mod solver;
pub mod verify;
