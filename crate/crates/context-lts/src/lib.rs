//! Reduction of typing contexts and the reachable transition system over
//! their canonical forms.
//!
//! A state is a [`magpi_core::TypeContext`] in canonical form: session
//! components are bisimilarity representatives and buffer components are
//! sorted by the active congruence. Graph-node identity makes the quotient
//! finite whenever buffers stay bounded.

mod explore;
mod export;
mod model;

pub use explore::{Edge, Exceeded, ExceededKind, Explored, LtsGraph, StateFlags, StateId};
pub use export::{export_dot, export_json, ActionJson, EdgeJson, LtsJson, StateJson};
pub use model::{top_restrictions, Action, BoundPolicy, BufferMeasure, ExploreLimits, Model, Relation, Traversal};
