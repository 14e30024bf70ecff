//! Measurement harness: extended-precision oracles, reference integrals,
//! parameter studies and sweep reports.

pub mod experiments;
pub mod model;
pub mod planar;
pub mod precise;
pub mod reference;
pub mod report;
pub mod surface;
