//! Machine models: two-way transducers and nested bimachines.

mod bimachine;
mod twoway;
pub mod zoo;

pub use bimachine::{linear_combination, triples, Kind, Lambda, MarkedWord, NestedBimachine};
pub use twoway::{Move, TapeSymbol, Transition, TwoWayTransducer};
