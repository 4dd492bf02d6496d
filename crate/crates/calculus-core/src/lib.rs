//! Core domain of the MAGπ calculus: names, values, processes, session types
//! interned as graphs, typing contexts, congruences and well-formedness.

pub mod bisim;
pub mod congruence;
pub mod context;
pub mod diagnostic;
pub mod graph;
pub mod names;
pub mod process;
pub mod reliability;
pub mod span;
pub mod typeexpr;
pub mod value;
pub mod wellformed;

pub use bisim::{bisimilar, Bisim};
pub use congruence::{
    canonical_buffer_type, canonical_queue, normal_form, structural_congruent, type_congruent, CongruenceMode,
};
pub use context::{end_predicate, gc_predicate, insert_message, BufEntryTy, SbType, TypeContext};
pub use diagnostic::{Diagnostic, Severity};
pub use graph::{Arm, Node, NodeId, PayloadType, TypeError, TypeGraph};
pub use names::{Endpoint, Ident, Label, Role};
pub use process::{BranchArm, Message, ProcDecl, Process};
pub use reliability::Reliability;
pub use span::{Pos, Span};
pub use typeexpr::{ArmExpr, BufEntryExpr, PayloadTypeExpr, SbTypeExpr, SessionTypeExpr, TypeDef, TypeDefs};
pub use value::{BasicKind, BasicValue, Value};
pub use wellformed::well_formed;
