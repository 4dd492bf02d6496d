//! Surface syntax of types as written in protocol files.
//!
//! These trees are what the parser produces and the pretty-printer consumes.
//! Semantic work happens on [`crate::graph::TypeGraph`], into which every
//! expression is interned.

use std::collections::BTreeMap;
use std::fmt;

use crate::names::{Ident, Label, Role};
use crate::span::Span;
use crate::value::BasicKind;

/// `T ::= B | S`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PayloadTypeExpr {
    Basic(BasicKind),
    Session(SessionTypeExpr),
}

impl PayloadTypeExpr {
    pub fn unit() -> PayloadTypeExpr {
        PayloadTypeExpr::Basic(BasicKind::Unit)
    }
}

/// One `p?m(T).S` or `p!m(T).S` alternative.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ArmExpr {
    pub role: Role,
    pub label: Label,
    pub payload: PayloadTypeExpr,
    pub cont: SessionTypeExpr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SessionTypeExpr {
    End,
    Branch {
        arms: Vec<ArmExpr>,
        timeout: Option<Box<SessionTypeExpr>>,
        span: Span,
    },
    Select {
        arms: Vec<ArmExpr>,
        span: Span,
    },
    Rec {
        var: Ident,
        body: Box<SessionTypeExpr>,
        span: Span,
    },
    /// A variable bound by an enclosing `rec`.
    Var(Ident, Span),
    /// A reference to a top-level `type` definition.
    Named(Ident, Span),
}

/// `q!m(T)`, an element of a buffer type `M`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BufEntryExpr {
    pub to: Role,
    pub label: Label,
    pub payload: PayloadTypeExpr,
}

/// `τ ::= M | S | ⟨M;S⟩`, written `<M>`, `S` and `<M; S>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SbTypeExpr {
    pub buffer: Option<Vec<BufEntryExpr>>,
    pub session: Option<SessionTypeExpr>,
}

impl SbTypeExpr {
    pub fn session(s: SessionTypeExpr) -> SbTypeExpr {
        SbTypeExpr {
            buffer: None,
            session: Some(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypeDef {
    pub role: Role,
    pub body: SessionTypeExpr,
    pub span: Span,
}

pub type TypeDefs = BTreeMap<Ident, TypeDef>;

impl fmt::Display for PayloadTypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PayloadTypeExpr::Basic(k) => write!(f, "{k}"),
            PayloadTypeExpr::Session(s) => write!(f, "{s}"),
        }
    }
}

fn fmt_payload(p: &PayloadTypeExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match p {
        PayloadTypeExpr::Basic(BasicKind::Unit) => f.write_str("()"),
        p => write!(f, "({p})"),
    }
}

fn fmt_arm(a: &ArmExpr, op: char, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{}{op}{}", a.role, a.label)?;
    fmt_payload(&a.payload, f)?;
    write!(f, ".{}", a.cont)
}

impl fmt::Display for SessionTypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionTypeExpr::End => f.write_str("end"),
            SessionTypeExpr::Select { arms, .. } if arms.len() == 1 => fmt_arm(&arms[0], '!', f),
            SessionTypeExpr::Select { arms, .. } => {
                f.write_str("+{")?;
                for (i, a) in arms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    fmt_arm(a, '!', f)?;
                }
                f.write_str("}")
            }
            SessionTypeExpr::Branch { arms, timeout: None, .. } if arms.len() == 1 => {
                fmt_arm(&arms[0], '?', f)
            }
            SessionTypeExpr::Branch { arms, timeout, .. } => {
                f.write_str("&{")?;
                for (i, a) in arms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    fmt_arm(a, '?', f)?;
                }
                if let Some(t) = timeout {
                    write!(f, ", timeout.{t}")?;
                }
                f.write_str("}")
            }
            SessionTypeExpr::Rec { var, body, .. } => write!(f, "rec {var}.{body}"),
            SessionTypeExpr::Var(x, _) | SessionTypeExpr::Named(x, _) => write!(f, "{x}"),
        }
    }
}

impl fmt::Display for BufEntryExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}!{}", self.to, self.label)?;
        fmt_payload(&self.payload, f)
    }
}

impl fmt::Display for SbTypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.buffer, &self.session) {
            (None, Some(s)) => write!(f, "{s}"),
            (buffer, session) => {
                f.write_str("<")?;
                match buffer.as_deref() {
                    None | Some([]) => f.write_str("eps")?,
                    Some(entries) => {
                        for (i, e) in entries.iter().enumerate() {
                            if i > 0 {
                                f.write_str(" . ")?;
                            }
                            write!(f, "{e}")?;
                        }
                    }
                }
                if let Some(s) = session {
                    write!(f, "; {s}")?;
                }
                f.write_str(">")
            }
        }
    }
}
