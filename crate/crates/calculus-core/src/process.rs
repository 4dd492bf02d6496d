//! Process terms.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::names::{Endpoint, Ident, Label, Role};
use crate::span::Span;
use crate::typeexpr::{PayloadTypeExpr, SbTypeExpr};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BranchArm {
    pub from: Role,
    pub label: Label,
    /// `None` for `()`, which only matches a unit payload.
    pub binder: Option<Ident>,
    pub binder_ty: Option<PayloadTypeExpr>,
    pub cont: Process,
    pub span: Span,
}

/// `(p,q)!m⟨w⟩`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Message {
    pub from: Role,
    pub to: Role,
    pub label: Label,
    pub payload: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProcDecl {
    pub name: Ident,
    pub params: Vec<(Ident, PayloadTypeExpr)>,
    pub body: Process,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Process {
    Inaction,
    Restriction {
        session: Ident,
        binding: BTreeMap<Role, SbTypeExpr>,
        body: Box<Process>,
        span: Span,
    },
    Par(Box<Process>, Box<Process>),
    Choice(Box<Process>, Box<Process>),
    Select {
        channel: Value,
        to: Role,
        label: Label,
        payload: Value,
        cont: Box<Process>,
        span: Span,
    },
    Branch {
        channel: Value,
        arms: Vec<BranchArm>,
        timeout: Option<Box<Process>>,
        span: Span,
    },
    Def {
        decl: Box<ProcDecl>,
        body: Box<Process>,
    },
    Call {
        name: Ident,
        args: Vec<Value>,
        span: Span,
    },
    Buffer {
        session: Ident,
        queue: Vec<Message>,
        span: Span,
    },
}

impl Process {
    pub fn par(a: Process, b: Process) -> Process {
        Process::Par(Box::new(a), Box::new(b))
    }

    /// Left-nested parallel composition of `ps`, `0` when empty. Left nesting
    /// is what `a | b | c` parses to.
    pub fn par_all(ps: impl IntoIterator<Item = Process>) -> Process {
        ps.into_iter().reduce(Process::par).unwrap_or(Process::Inaction)
    }

    pub fn span(&self) -> Span {
        match self {
            Process::Restriction { span, .. }
            | Process::Select { span, .. }
            | Process::Branch { span, .. }
            | Process::Call { span, .. }
            | Process::Buffer { span, .. } => *span,
            Process::Def { decl, .. } => decl.span,
            Process::Par(a, _) | Process::Choice(a, _) => a.span(),
            Process::Inaction => Span::DUMMY,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_vars(&self, bound: &mut Vec<Ident>, out: &mut BTreeSet<Ident>) {
        let mut see = |v: &Value, bound: &Vec<Ident>| {
            if let Value::Var(x) = v {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
        };
        match self {
            Process::Inaction | Process::Buffer { .. } => {}
            Process::Restriction { body, .. } => body.collect_free_vars(bound, out),
            Process::Par(a, b) | Process::Choice(a, b) => {
                a.collect_free_vars(bound, out);
                b.collect_free_vars(bound, out);
            }
            Process::Select {
                channel,
                payload,
                cont,
                ..
            } => {
                see(channel, bound);
                see(payload, bound);
                cont.collect_free_vars(bound, out);
            }
            Process::Branch {
                channel,
                arms,
                timeout,
                ..
            } => {
                see(channel, bound);
                for a in arms {
                    let n = bound.len();
                    bound.extend(a.binder.clone());
                    a.cont.collect_free_vars(bound, out);
                    bound.truncate(n);
                }
                if let Some(t) = timeout {
                    t.collect_free_vars(bound, out);
                }
            }
            Process::Def { body, .. } => body.collect_free_vars(bound, out),
            Process::Call { args, .. } => {
                for a in args {
                    see(a, bound);
                }
            }
        }
    }

    /// Endpoints occurring free, including in buffer payloads.
    pub fn free_endpoints(&self) -> BTreeSet<Endpoint> {
        let mut out = BTreeSet::new();
        self.collect_endpoints(&mut Vec::new(), &mut out);
        out
    }

    fn collect_endpoints(&self, bound: &mut Vec<Ident>, out: &mut BTreeSet<Endpoint>) {
        let mut see = |v: &Value, bound: &Vec<Ident>| {
            if let Value::Endpoint(e) = v {
                if !bound.contains(&e.session) {
                    out.insert(e.clone());
                }
            }
        };
        match self {
            Process::Inaction => {}
            Process::Buffer { queue, .. } => {
                for m in queue {
                    see(&m.payload, bound);
                }
            }
            Process::Restriction { session, body, .. } => {
                bound.push(session.clone());
                body.collect_endpoints(bound, out);
                bound.pop();
            }
            Process::Par(a, b) | Process::Choice(a, b) => {
                a.collect_endpoints(bound, out);
                b.collect_endpoints(bound, out);
            }
            Process::Select {
                channel,
                payload,
                cont,
                ..
            } => {
                see(channel, bound);
                see(payload, bound);
                cont.collect_endpoints(bound, out);
            }
            Process::Branch {
                channel,
                arms,
                timeout,
                ..
            } => {
                see(channel, bound);
                for a in arms {
                    a.cont.collect_endpoints(bound, out);
                }
                if let Some(t) = timeout {
                    t.collect_endpoints(bound, out);
                }
            }
            Process::Def { decl, body } => {
                decl.body.collect_endpoints(bound, out);
                body.collect_endpoints(bound, out);
            }
            Process::Call { args, .. } => {
                for a in args {
                    see(a, bound);
                }
            }
        }
    }

    /// Sessions whose buffer `s:σ` occurs free.
    pub fn free_buffers(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        self.collect_buffers(&mut Vec::new(), &mut out);
        out
    }

    fn collect_buffers(&self, bound: &mut Vec<Ident>, out: &mut BTreeSet<Ident>) {
        match self {
            Process::Buffer { session, .. } => {
                if !bound.contains(session) {
                    out.insert(session.clone());
                }
            }
            Process::Restriction { session, body, .. } => {
                bound.push(session.clone());
                body.collect_buffers(bound, out);
                bound.pop();
            }
            Process::Par(a, b) | Process::Choice(a, b) => {
                a.collect_buffers(bound, out);
                b.collect_buffers(bound, out);
            }
            Process::Select { cont, .. } => cont.collect_buffers(bound, out),
            Process::Branch { arms, timeout, .. } => {
                for a in arms {
                    a.cont.collect_buffers(bound, out);
                }
                if let Some(t) = timeout {
                    t.collect_buffers(bound, out);
                }
            }
            Process::Def { decl, body } => {
                decl.body.collect_buffers(bound, out);
                body.collect_buffers(bound, out);
            }
            Process::Inaction | Process::Call { .. } => {}
        }
    }

    /// Every session name bound by a restriction anywhere in the term.
    pub fn bound_sessions(&self, out: &mut BTreeSet<Ident>) {
        self.visit(&mut |p| {
            if let Process::Restriction { session, .. } = p {
                out.insert(session.clone());
            }
        });
    }

    /// Pre-order traversal, descending into declaration bodies.
    pub fn visit(&self, f: &mut impl FnMut(&Process)) {
        f(self);
        match self {
            Process::Inaction | Process::Call { .. } | Process::Buffer { .. } => {}
            Process::Restriction { body, .. } => body.visit(f),
            Process::Par(a, b) | Process::Choice(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Process::Select { cont, .. } => cont.visit(f),
            Process::Branch { arms, timeout, .. } => {
                for a in arms {
                    a.cont.visit(f);
                }
                if let Some(t) = timeout {
                    t.visit(f);
                }
            }
            Process::Def { decl, body } => {
                decl.body.visit(f);
                body.visit(f);
            }
        }
    }

    /// Capture-avoiding substitution of variables by values.
    ///
    /// Restrictions whose session name occurs in a substituted endpoint are
    /// renamed to a fresh name first.
    pub fn subst(&self, map: &HashMap<Ident, Value>) -> Process {
        if map.is_empty() {
            return self.clone();
        }
        let incoming: BTreeSet<Ident> = map
            .values()
            .filter_map(|v| match v {
                Value::Endpoint(e) => Some(e.session.clone()),
                _ => None,
            })
            .collect();
        self.subst_inner(map, &incoming)
    }

    fn subst_inner(&self, map: &HashMap<Ident, Value>, incoming: &BTreeSet<Ident>) -> Process {
        let sv = |v: &Value| match v {
            Value::Var(x) => map.get(x).cloned().unwrap_or_else(|| v.clone()),
            _ => v.clone(),
        };
        match self {
            Process::Inaction => Process::Inaction,
            Process::Buffer { .. } => self.clone(),
            Process::Restriction {
                session,
                binding,
                body,
                span,
            } => {
                if incoming.contains(session) {
                    let mut used = BTreeSet::new();
                    body.bound_sessions(&mut used);
                    used.extend(incoming.iter().cloned());
                    let fresh = fresh_session(session, &used);
                    let renamed = body.rename_session(session, &fresh);
                    Process::Restriction {
                        session: fresh,
                        binding: binding.clone(),
                        body: Box::new(renamed.subst_inner(map, incoming)),
                        span: *span,
                    }
                } else {
                    Process::Restriction {
                        session: session.clone(),
                        binding: binding.clone(),
                        body: Box::new(body.subst_inner(map, incoming)),
                        span: *span,
                    }
                }
            }
            Process::Par(a, b) => Process::par(a.subst_inner(map, incoming), b.subst_inner(map, incoming)),
            Process::Choice(a, b) => Process::Choice(
                Box::new(a.subst_inner(map, incoming)),
                Box::new(b.subst_inner(map, incoming)),
            ),
            Process::Select {
                channel,
                to,
                label,
                payload,
                cont,
                span,
            } => Process::Select {
                channel: sv(channel),
                to: to.clone(),
                label: label.clone(),
                payload: sv(payload),
                cont: Box::new(cont.subst_inner(map, incoming)),
                span: *span,
            },
            Process::Branch {
                channel,
                arms,
                timeout,
                span,
            } => Process::Branch {
                channel: sv(channel),
                arms: arms
                    .iter()
                    .map(|a| {
                        let cont = match &a.binder {
                            Some(x) if map.contains_key(x) => {
                                let mut inner = map.clone();
                                inner.remove(x);
                                a.cont.subst_inner(&inner, incoming)
                            }
                            _ => a.cont.subst_inner(map, incoming),
                        };
                        BranchArm { cont, ..a.clone() }
                    })
                    .collect(),
                timeout: timeout.as_ref().map(|t| Box::new(t.subst_inner(map, incoming))),
                span: *span,
            },
            // Declaration bodies are closed over their parameters.
            Process::Def { decl, body } => Process::Def {
                decl: decl.clone(),
                body: Box::new(body.subst_inner(map, incoming)),
            },
            Process::Call { name, args, span } => Process::Call {
                name: name.clone(),
                args: args.iter().map(sv).collect(),
                span: *span,
            },
        }
    }

    /// Renames free occurrences of session `old` to `new`.
    pub fn rename_session(&self, old: &Ident, new: &Ident) -> Process {
        let rv = |v: &Value| match v {
            Value::Endpoint(e) if &e.session == old => Value::Endpoint(Endpoint {
                session: new.clone(),
                role: e.role.clone(),
            }),
            _ => v.clone(),
        };
        match self {
            Process::Inaction => Process::Inaction,
            Process::Buffer {
                session,
                queue,
                span,
            } => Process::Buffer {
                session: if session == old { new.clone() } else { session.clone() },
                queue: queue
                    .iter()
                    .map(|m| Message {
                        payload: rv(&m.payload),
                        ..m.clone()
                    })
                    .collect(),
                span: *span,
            },
            Process::Restriction { session, .. } if session == old => self.clone(),
            Process::Restriction {
                session,
                binding,
                body,
                span,
            } => Process::Restriction {
                session: session.clone(),
                binding: binding.clone(),
                body: Box::new(body.rename_session(old, new)),
                span: *span,
            },
            Process::Par(a, b) => Process::par(a.rename_session(old, new), b.rename_session(old, new)),
            Process::Choice(a, b) => Process::Choice(
                Box::new(a.rename_session(old, new)),
                Box::new(b.rename_session(old, new)),
            ),
            Process::Select {
                channel,
                to,
                label,
                payload,
                cont,
                span,
            } => Process::Select {
                channel: rv(channel),
                to: to.clone(),
                label: label.clone(),
                payload: rv(payload),
                cont: Box::new(cont.rename_session(old, new)),
                span: *span,
            },
            Process::Branch {
                channel,
                arms,
                timeout,
                span,
            } => Process::Branch {
                channel: rv(channel),
                arms: arms
                    .iter()
                    .map(|a| BranchArm {
                        cont: a.cont.rename_session(old, new),
                        ..a.clone()
                    })
                    .collect(),
                timeout: timeout.as_ref().map(|t| Box::new(t.rename_session(old, new))),
                span: *span,
            },
            Process::Def { decl, body } => Process::Def {
                decl: decl.clone(),
                body: Box::new(body.rename_session(old, new)),
            },
            Process::Call { name, args, span } => Process::Call {
                name: name.clone(),
                args: args.iter().map(rv).collect(),
                span: *span,
            },
        }
    }
}

/// `base'`, `base''`, ... until the name is not in `used`.
pub fn fresh_session(base: &Ident, used: &BTreeSet<Ident>) -> Ident {
    let mut name = format!("{base}'");
    while used.contains(&Ident::new(&name)) {
        name.push('\'');
    }
    Ident::from(name)
}

/// Precedence levels for printing: `|` < `+` < prefix.
pub const PAR: u8 = 0;
pub const CHOICE: u8 = 1;
pub const PREFIX: u8 = 2;

impl Process {
    fn level(&self) -> u8 {
        match self {
            Process::Par(..) => PAR,
            Process::Choice(..) => CHOICE,
            _ => PREFIX,
        }
    }

    /// Whether the printed form extends as far right as possible, so that
    /// anything following it would be absorbed.
    fn open_ended(&self) -> bool {
        match self {
            Process::Restriction { .. } | Process::Def { .. } => true,
            Process::Select { cont, .. } => cont.open_ended(),
            Process::Par(_, b) | Process::Choice(_, b) => b.open_ended(),
            _ => false,
        }
    }

    /// Whether this term needs parentheses as an operand that must bind at
    /// least as tightly as `min`; `last` when nothing follows it.
    pub fn needs_parens(&self, min: u8, last: bool) -> bool {
        self.level() < min || (!last && self.open_ended())
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>, min: u8, last: bool) -> fmt::Result {
        if self.needs_parens(min, last) {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

fn fmt_payload_value(v: &Value, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match v {
        Value::Basic(crate::value::BasicValue::Unit) => f.write_str("()"),
        v => write!(f, "({v})"),
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})!{}", self.from, self.to, self.label)?;
        fmt_payload_value(&self.payload, f)
    }
}

impl fmt::Display for ProcDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, (x, t)) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}: {t}")?;
        }
        write!(f, ") = {}", self.body)
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Inaction => f.write_str("0"),
            Process::Restriction {
                session,
                binding,
                body,
                ..
            } => {
                write!(f, "new {session} : {{")?;
                for (i, (r, t)) in binding.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{r}: {t}")?;
                }
                write!(f, "}} in {body}")
            }
            Process::Par(a, b) => {
                a.fmt_operand(f, PAR, false)?;
                f.write_str(" | ")?;
                b.fmt_operand(f, CHOICE, true)
            }
            Process::Choice(a, b) => {
                a.fmt_operand(f, CHOICE, false)?;
                f.write_str(" + ")?;
                b.fmt_operand(f, PREFIX, true)
            }
            Process::Select {
                channel,
                to,
                label,
                payload,
                cont,
                ..
            } => {
                write!(f, "{channel}!{to}.{label}")?;
                fmt_payload_value(payload, f)?;
                f.write_str(".")?;
                cont.fmt_operand(f, PREFIX, true)
            }
            Process::Branch {
                channel,
                arms,
                timeout,
                ..
            } => {
                write!(f, "{channel} & {{")?;
                for (i, a) in arms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}?{}(", a.from, a.label)?;
                    if let Some(x) = &a.binder {
                        write!(f, "{x}")?;
                        if let Some(t) = &a.binder_ty {
                            write!(f, ": {t}")?;
                        }
                    }
                    write!(f, ").{}", a.cont)?;
                }
                if let Some(t) = timeout {
                    write!(f, ", timeout.{t}")?;
                }
                f.write_str("}")
            }
            Process::Def { decl, body } => write!(f, "def {decl} in {body}"),
            Process::Call { name, args, .. } => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Process::Buffer { session, queue, .. } => {
                write!(f, "{session}:[")?;
                for (i, m) in queue.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{m}")?;
                }
                f.write_str("]")
            }
        }
    }
}
