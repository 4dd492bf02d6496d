use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::names::{Endpoint, Ident};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BasicKind {
    Unit,
    Int,
    Bool,
    Real,
    String,
}

impl BasicKind {
    pub const ALL: [BasicKind; 5] = [
        BasicKind::Unit,
        BasicKind::Int,
        BasicKind::Bool,
        BasicKind::Real,
        BasicKind::String,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            BasicKind::Unit => "unit",
            BasicKind::Int => "int",
            BasicKind::Bool => "bool",
            BasicKind::Real => "real",
            BasicKind::String => "string",
        }
    }

    pub fn from_keyword(s: &str) -> Option<BasicKind> {
        BasicKind::ALL.into_iter().find(|k| k.keyword() == s)
    }
}

impl fmt::Display for BasicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A literal. Reals compare by bit pattern so that the type is `Eq`.
#[derive(Clone, Debug)]
pub enum BasicValue {
    Unit,
    Int(i64),
    Bool(bool),
    Real(f64),
    Str(String),
}

impl BasicValue {
    pub fn kind(&self) -> BasicKind {
        match self {
            BasicValue::Unit => BasicKind::Unit,
            BasicValue::Int(_) => BasicKind::Int,
            BasicValue::Bool(_) => BasicKind::Bool,
            BasicValue::Real(_) => BasicKind::Real,
            BasicValue::Str(_) => BasicKind::String,
        }
    }
}

impl PartialEq for BasicValue {
    fn eq(&self, other: &BasicValue) -> bool {
        match (self, other) {
            (BasicValue::Unit, BasicValue::Unit) => true,
            (BasicValue::Int(a), BasicValue::Int(b)) => a == b,
            (BasicValue::Bool(a), BasicValue::Bool(b)) => a == b,
            (BasicValue::Real(a), BasicValue::Real(b)) => a.to_bits() == b.to_bits(),
            (BasicValue::Str(a), BasicValue::Str(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for BasicValue {}

impl Hash for BasicValue {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.kind().hash(h);
        match self {
            BasicValue::Unit => {}
            BasicValue::Int(i) => i.hash(h),
            BasicValue::Bool(b) => b.hash(h),
            BasicValue::Real(r) => r.to_bits().hash(h),
            BasicValue::Str(s) => s.hash(h),
        }
    }
}

pub fn render_real(r: f64) -> String {
    let s = format!("{r}");
    if s.contains(['.', 'e', 'i', 'N']) {
        s
    } else {
        format!("{s}.0")
    }
}

pub fn render_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl fmt::Display for BasicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasicValue::Unit => f.write_str("()"),
            BasicValue::Int(i) => write!(f, "{i}"),
            BasicValue::Bool(b) => write!(f, "{b}"),
            BasicValue::Real(r) => f.write_str(&render_real(*r)),
            BasicValue::Str(s) => f.write_str(&render_string(s)),
        }
    }
}

/// `d ::= v | c`, `w ::= v | s[p]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Basic(BasicValue),
    Endpoint(Endpoint),
    Var(Ident),
}

impl Value {
    pub fn unit() -> Value {
        Value::Basic(BasicValue::Unit)
    }

    /// Ordering key: kind tag, then the rendered literal or name.
    pub fn digest_key(&self) -> (u8, String) {
        match self {
            Value::Basic(b) => (b.kind() as u8, b.to_string()),
            Value::Endpoint(e) => (5, e.to_string()),
            Value::Var(x) => (6, x.to_string()),
        }
    }

    pub fn is_channel(&self) -> bool {
        !matches!(self, Value::Basic(_))
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Value) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Value) -> Ordering {
        self.digest_key().cmp(&other.digest_key())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Basic(b) => write!(f, "{b}"),
            Value::Endpoint(e) => write!(f, "{e}"),
            Value::Var(x) => write!(f, "{x}"),
        }
    }
}
