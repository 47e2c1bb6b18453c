#![no_std]
#![doc = "Parameter-state symmetries and universal invariants of rational ODE models."]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod invariants;
pub mod model;
pub mod numverify;
pub mod sample;
pub mod sym;
pub mod symmetry;
