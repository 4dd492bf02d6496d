//! Session types as a graph with back-edges.
//!
//! Every [`SessionTypeExpr`] is interned into a [`TypeGraph`]. A `rec t.S`
//! becomes a [`Node::Rec`] whose body reaches `t` through a [`Node::Ref`]
//! pointing back at it; a reference to a named definition is a `Ref` to that
//! definition's root. Positions reachable from any node are therefore finite.
//! Construction rejects unguarded recursion: following `Rec` and `Ref` edges
//! from any node must stop at a `Branch` or `Select` (or at `End` for nodes
//! that are not recursion binders).

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::names::{Ident, Label, Role};
use crate::span::Span;
use crate::typeexpr::{ArmExpr, PayloadTypeExpr, SessionTypeExpr, TypeDefs};
use crate::value::BasicKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// `T ::= B | S` over graph nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PayloadType {
    Basic(BasicKind),
    Session(NodeId),
}

impl PayloadType {
    pub const UNIT: PayloadType = PayloadType::Basic(BasicKind::Unit);
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arm {
    pub role: Role,
    pub label: Label,
    pub payload: PayloadType,
    pub cont: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    End,
    Branch { arms: Vec<Arm>, timeout: Option<NodeId> },
    Select { arms: Vec<Arm> },
    Rec { var: Ident, body: NodeId },
    /// Back-edge to a `Rec` (`named == false`) or alias of a named definition.
    Ref { target: NodeId, name: Ident, named: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unguarded recursion in `{name}`")]
    UnguardedRecursion { name: String, span: Span },
    #[error("duplicate arm `{role}`/`{label}`")]
    DuplicateArm { role: Role, label: Label, span: Span },
    #[error("unbound type variable `{0}`")]
    UnboundVariable(Ident, Span),
    #[error("unknown type `{0}`")]
    UnknownType(Ident, Span),
    #[error("choice without alternatives")]
    EmptyArms(Span),
}

impl TypeError {
    pub fn code(&self) -> &'static str {
        match self {
            TypeError::UnguardedRecursion { .. } => "UnguardedRecursion",
            TypeError::DuplicateArm { .. } => "DuplicateArm",
            TypeError::UnboundVariable(..) => "UnboundTypeVariable",
            TypeError::UnknownType(..) => "UnknownType",
            TypeError::EmptyArms(_) => "EmptyArms",
        }
    }

    pub fn span(&self) -> Span {
        match self {
            TypeError::UnguardedRecursion { span, .. } | TypeError::DuplicateArm { span, .. } => *span,
            TypeError::UnboundVariable(_, s) | TypeError::UnknownType(_, s) | TypeError::EmptyArms(s) => *s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("node {0} is not a recursion binder")]
pub struct NotARecNode(pub NodeId);

const UNSET: NodeId = NodeId(u32::MAX);

#[derive(Clone, Debug, Default)]
pub struct TypeGraph {
    nodes: Vec<Node>,
    defs: TypeDefs,
    named: HashMap<Ident, NodeId>,
    cache: HashMap<SessionTypeExpr, NodeId>,
    spans: HashMap<NodeId, Span>,
    end: Option<NodeId>,
}

impl TypeGraph {
    pub fn new() -> TypeGraph {
        TypeGraph::default()
    }

    /// A graph in which `Named` references resolve against `defs`.
    pub fn with_defs(defs: TypeDefs) -> TypeGraph {
        TypeGraph {
            defs,
            ..TypeGraph::default()
        }
    }

    pub fn defs(&self) -> &TypeDefs {
        &self.defs
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, n: NodeId) -> &Node {
        &self.nodes[n.index()]
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    fn push(&mut self, node: Node) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node);
        id
    }

    pub fn end(&mut self) -> NodeId {
        match self.end {
            Some(e) => e,
            None => {
                let e = self.push(Node::End);
                self.end = Some(e);
                e
            }
        }
    }

    /// Interns a closed session type.
    pub fn intern(&mut self, e: &SessionTypeExpr) -> Result<NodeId, TypeError> {
        if let Some(&n) = self.cache.get(e) {
            return Ok(n);
        }
        let start = self.nodes.len();
        let n = self.build(e, &mut Vec::new())?;
        self.validate_from(start)?;
        self.cache.insert(e.clone(), n);
        Ok(n)
    }

    pub fn intern_payload(&mut self, t: &PayloadTypeExpr) -> Result<PayloadType, TypeError> {
        Ok(match t {
            PayloadTypeExpr::Basic(k) => PayloadType::Basic(*k),
            PayloadTypeExpr::Session(s) => PayloadType::Session(self.intern(s)?),
        })
    }

    /// Root node of a named definition.
    pub fn intern_named(&mut self, name: &Ident) -> Result<NodeId, TypeError> {
        let start = self.nodes.len();
        let n = self.named_node(name, Span::DUMMY)?;
        self.validate_from(start)?;
        Ok(n)
    }

    fn named_node(&mut self, name: &Ident, span: Span) -> Result<NodeId, TypeError> {
        if let Some(&n) = self.named.get(name) {
            return Ok(n);
        }
        let Some(def) = self.defs.get(name).cloned() else {
            return Err(TypeError::UnknownType(name.clone(), span));
        };
        let alias = self.push(Node::Ref {
            target: UNSET,
            name: name.clone(),
            named: true,
        });
        self.named.insert(name.clone(), alias);
        let body = self.build(&def.body, &mut Vec::new());
        match body {
            Ok(b) => {
                if let Node::Ref { target, .. } = &mut self.nodes[alias.index()] {
                    *target = b;
                }
                Ok(alias)
            }
            Err(e) => {
                self.named.remove(name);
                Err(e)
            }
        }
    }

    fn build_arms(&mut self, arms: &[ArmExpr], env: &mut Vec<(Ident, NodeId)>, span: Span) -> Result<Vec<Arm>, TypeError> {
        if arms.is_empty() {
            return Err(TypeError::EmptyArms(span));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(arms.len());
        for a in arms {
            if !seen.insert((a.role.clone(), a.label.clone())) {
                return Err(TypeError::DuplicateArm {
                    role: a.role.clone(),
                    label: a.label.clone(),
                    span: a.span,
                });
            }
            // Payload types are closed on their own.
            let payload = match &a.payload {
                PayloadTypeExpr::Basic(k) => PayloadType::Basic(*k),
                PayloadTypeExpr::Session(s) => PayloadType::Session(self.build(s, &mut Vec::new())?),
            };
            let cont = self.build(&a.cont, env)?;
            out.push(Arm {
                role: a.role.clone(),
                label: a.label.clone(),
                payload,
                cont,
            });
        }
        Ok(out)
    }

    fn build(&mut self, e: &SessionTypeExpr, env: &mut Vec<(Ident, NodeId)>) -> Result<NodeId, TypeError> {
        match e {
            SessionTypeExpr::End => Ok(self.end()),
            SessionTypeExpr::Branch { arms, timeout, span } => {
                let arms = self.build_arms(arms, env, *span)?;
                let timeout = match timeout {
                    Some(t) => Some(self.build(t, env)?),
                    None => None,
                };
                Ok(self.push(Node::Branch { arms, timeout }))
            }
            SessionTypeExpr::Select { arms, span } => {
                let arms = self.build_arms(arms, env, *span)?;
                Ok(self.push(Node::Select { arms }))
            }
            SessionTypeExpr::Rec { var, body, span } => {
                let id = self.push(Node::Rec {
                    var: var.clone(),
                    body: UNSET,
                });
                self.spans.insert(id, *span);
                env.push((var.clone(), id));
                let b = self.build(body, env);
                env.pop();
                let b = b?;
                if let Node::Rec { body, .. } = &mut self.nodes[id.index()] {
                    *body = b;
                }
                Ok(id)
            }
            SessionTypeExpr::Var(x, span) => {
                let Some(&(_, target)) = env.iter().rev().find(|(v, _)| v == x) else {
                    return Err(TypeError::UnboundVariable(x.clone(), *span));
                };
                Ok(self.push(Node::Ref {
                    target,
                    name: x.clone(),
                    named: false,
                }))
            }
            SessionTypeExpr::Named(x, span) => self.named_node(x, *span),
        }
    }

    /// Checks guardedness of every node allocated since `start`.
    fn validate_from(&self, start: usize) -> Result<(), TypeError> {
        for i in start..self.nodes.len() {
            let n = NodeId(i as u32);
            let head = self.try_head(n);
            let guarded = match (self.node(n), head) {
                (_, None) => false,
                (Node::Rec { .. }, Some(h)) => !matches!(self.node(h), Node::End),
                (_, Some(_)) => true,
            };
            if !guarded {
                let name = match self.node(n) {
                    Node::Rec { var, .. } => var.to_string(),
                    Node::Ref { name, .. } => name.to_string(),
                    _ => n.to_string(),
                };
                let span = match self.node(n) {
                    Node::Ref { named: true, name, .. } => self.defs.get(name).map(|d| d.span),
                    _ => self.spans.get(&n).copied(),
                };
                return Err(TypeError::UnguardedRecursion {
                    name,
                    span: span.unwrap_or(Span::DUMMY),
                });
            }
        }
        Ok(())
    }

    fn try_head(&self, mut n: NodeId) -> Option<NodeId> {
        let mut steps = 0;
        loop {
            match self.node(n) {
                Node::Rec { body, .. } => n = *body,
                Node::Ref { target, .. } => n = *target,
                _ => return Some(n),
            }
            if n == UNSET {
                return None;
            }
            steps += 1;
            if steps > self.nodes.len() {
                return None;
            }
        }
    }

    /// The first `Branch`, `Select` or `End` reached by unfolding.
    pub fn head(&self, n: NodeId) -> NodeId {
        self.try_head(n).expect("graph nodes are guarded")
    }

    pub fn head_node(&self, n: NodeId) -> &Node {
        self.node(self.head(n))
    }

    pub fn is_end(&self, n: NodeId) -> bool {
        matches!(self.head_node(n), Node::End)
    }

    /// One `[Γ-μ]` step.
    pub fn unfold_once(&self, n: NodeId) -> Result<NodeId, NotARecNode> {
        match self.node(n) {
            Node::Rec { body, .. } => Ok(*body),
            _ => Err(NotARecNode(n)),
        }
    }

    /// Continuation successors of a node (payload types excluded).
    pub fn successors(&self, n: NodeId) -> Vec<NodeId> {
        match self.node(n) {
            Node::End => vec![],
            Node::Branch { arms, timeout } => arms.iter().map(|a| a.cont).chain(*timeout).collect(),
            Node::Select { arms } => arms.iter().map(|a| a.cont).collect(),
            Node::Rec { body, .. } => vec![*body],
            Node::Ref { target, .. } => vec![*target],
        }
    }

    /// All positions reachable from `n` along continuations.
    pub fn reachable(&self, n: NodeId) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![n];
        while let Some(m) = stack.pop() {
            if seen.insert(m) {
                stack.extend(self.successors(m));
            }
        }
        seen
    }

    /// Reads a node back as a closed μ-term. Named definitions print by name.
    pub fn to_expr(&self, n: NodeId) -> SessionTypeExpr {
        self.read_back(n, &mut Vec::new())
    }

    fn read_back(&self, n: NodeId, open: &mut Vec<(NodeId, Ident)>) -> SessionTypeExpr {
        match self.node(n) {
            Node::End => SessionTypeExpr::End,
            Node::Branch { arms, timeout } => SessionTypeExpr::Branch {
                arms: self.read_arms(arms, open),
                timeout: timeout.map(|t| Box::new(self.read_back(t, open))),
                span: Span::DUMMY,
            },
            Node::Select { arms } => SessionTypeExpr::Select {
                arms: self.read_arms(arms, open),
                span: Span::DUMMY,
            },
            Node::Rec { var, body } => {
                if let Some((_, v)) = open.iter().find(|(id, _)| *id == n) {
                    return SessionTypeExpr::Var(v.clone(), Span::DUMMY);
                }
                let mut name = var.to_string();
                while open.iter().any(|(_, v)| v.as_str() == name) || self.defs.contains_key(&Ident::new(&name)) {
                    name.push('\'');
                }
                let name = Ident::from(name);
                open.push((n, name.clone()));
                let body = self.read_back(*body, open);
                open.pop();
                SessionTypeExpr::Rec {
                    var: name,
                    body: Box::new(body),
                    span: Span::DUMMY,
                }
            }
            Node::Ref { name, named: true, .. } => SessionTypeExpr::Named(name.clone(), Span::DUMMY),
            Node::Ref { target, .. } => self.read_back(*target, open),
        }
    }

    fn read_arms(&self, arms: &[Arm], open: &mut Vec<(NodeId, Ident)>) -> Vec<ArmExpr> {
        arms.iter()
            .map(|a| ArmExpr {
                role: a.role.clone(),
                label: a.label.clone(),
                payload: self.payload_expr(a.payload),
                cont: self.read_back(a.cont, open),
                span: Span::DUMMY,
            })
            .collect()
    }

    pub fn payload_expr(&self, p: PayloadType) -> PayloadTypeExpr {
        match p {
            PayloadType::Basic(k) => PayloadTypeExpr::Basic(k),
            PayloadType::Session(s) => PayloadTypeExpr::Session(self.to_expr(s)),
        }
    }

    pub fn render(&self, n: NodeId) -> String {
        self.to_expr(n).to_string()
    }

    pub fn render_payload(&self, p: PayloadType) -> String {
        match p {
            PayloadType::Basic(k) => k.to_string(),
            PayloadType::Session(s) => self.render(s),
        }
    }
}
