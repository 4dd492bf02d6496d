//! One-step reduction: the enabled set of a configuration under a policy
//! and a scenario, with each step mirrored on the session annotations.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use magpi_core::{
    well_formed, BufEntryTy, CongruenceMode, Diagnostic, Endpoint, Ident, Message, Node, ProcDecl, Process,
    Reliability, Role, SbType, Span, TypeDefs, TypeError, TypeGraph, Value,
};
use serde::{Serialize, Serializer};

use crate::config::{Config, Session};
use crate::scenario::FailureScenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ReductionPolicy {
    /// Every rule, every time it applies.
    Unrestricted,
    /// Timeouts need an unreliable arm source; only unreliable entries are lost.
    #[default]
    Reliable,
}

impl ReductionPolicy {
    pub fn name(self) -> &'static str {
        match self {
            ReductionPolicy::Unrestricted => "unrestricted",
            ReductionPolicy::Reliable => "reliable",
        }
    }
}

impl std::str::FromStr for ReductionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<ReductionPolicy, String> {
        match s {
            "unrestricted" => Ok(ReductionPolicy::Unrestricted),
            "reliable" => Ok(ReductionPolicy::Reliable),
            _ => Err(format!("unknown policy `{s}` (expected reliable or unrestricted)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Select,
    Branch,
    Timeout,
    Choice,
    Call,
    Ctx,
    Drop,
}

impl Rule {
    pub fn label(self) -> &'static str {
        match self {
            Rule::Select => "R-⊕",
            Rule::Branch => "R-&",
            Rule::Timeout => "R-⊙",
            Rule::Choice => "R-+",
            Rule::Call => "R-X",
            Rule::Ctx => "R-Ctx",
            Rule::Drop => "R-↓",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for Rule {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

/// How the scheduler weighs a step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepClass {
    /// A thread's ordinary move.
    Move,
    /// A timeout taken while a matching message is buffered.
    Delay,
    /// A timeout with nothing to receive; only enabled when no other step is.
    Idle,
    /// Loss of a buffered entry, with its scenario weight.
    Drop { forced: bool, weight: f64 },
}

#[derive(Clone, Debug)]
pub struct Step {
    pub rule: Rule,
    /// The acting thread; `None` for a drop.
    pub thread: Option<usize>,
    pub span: Span,
    pub detail: String,
    pub class: StepClass,
    pub next: Config,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("process is not well-formed: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    IllFormed(Vec<Diagnostic>),
    #[error("restriction annotation: {0}")]
    Type(#[from] TypeError),
}

/// Owns the type graph that session annotations are interned into.
#[derive(Clone, Debug)]
pub struct Simulator {
    graph: TypeGraph,
    procs: Vec<ProcDecl>,
    pub reliability: Reliability,
    pub policy: ReductionPolicy,
    pub scenario: FailureScenario,
}

impl Simulator {
    pub fn new(
        type_defs: &TypeDefs,
        procs: &[ProcDecl],
        reliability: Reliability,
        policy: ReductionPolicy,
        scenario: FailureScenario,
    ) -> Result<Simulator, SimError> {
        let mut sim = Simulator {
            graph: TypeGraph::with_defs(type_defs.clone()),
            procs: procs.to_vec(),
            reliability,
            policy,
            scenario,
        };
        let mut bindings = Vec::new();
        for d in procs {
            d.body.visit(&mut |p| {
                if let Process::Restriction { binding, .. } = p {
                    bindings.push(binding.clone());
                }
            });
        }
        for b in bindings {
            for t in b.values() {
                SbType::intern(&mut sim.graph, t)?;
            }
        }
        Ok(sim)
    }

    pub fn graph(&self) -> &TypeGraph {
        &self.graph
    }

    pub fn mode(&self) -> CongruenceMode {
        self.scenario.reorder
    }

    pub fn initial(&mut self, system: &Process) -> Result<Config, SimError> {
        let diags = well_formed(system);
        if !diags.is_empty() {
            return Err(SimError::IllFormed(diags));
        }
        let mut c = Config {
            sessions: Vec::new(),
            threads: Vec::new(),
            defs: Vec::new(),
            step: 0,
        };
        self.absorb(&mut c, system.clone())?;
        Ok(c)
    }

    pub fn process(&self, c: &Config) -> Process {
        c.process(&self.graph)
    }

    fn absorb(&mut self, c: &mut Config, p: Process) -> Result<(), SimError> {
        match p {
            Process::Inaction => {}
            Process::Par(a, b) => {
                self.absorb(c, *a)?;
                self.absorb(c, *b)?;
            }
            Process::Restriction {
                session,
                binding,
                body,
                span,
            } => {
                let used: BTreeSet<Ident> = c.sessions.iter().map(|s| s.name.clone()).collect();
                let (name, body) = if used.contains(&session) {
                    let fresh = magpi_core::process::fresh_session(&session, &used);
                    let body = body.rename_session(&session, &fresh);
                    (fresh, body)
                } else {
                    (session, *body)
                };
                let mut types = std::collections::BTreeMap::new();
                for (r, t) in &binding {
                    types.insert(r.clone(), SbType::intern(&mut self.graph, t)?);
                }
                c.sessions.push(Session {
                    name,
                    types,
                    queue: None,
                    span,
                    buffer_span: Span::DUMMY,
                });
                self.absorb(c, body)?;
            }
            Process::Buffer { session, queue, span } => match c.session_mut(&session) {
                Some(s) => {
                    s.queue = Some(queue);
                    s.buffer_span = span;
                }
                None => c.sessions.push(Session {
                    name: session,
                    types: Default::default(),
                    queue: Some(queue),
                    span: Span::DUMMY,
                    buffer_span: span,
                }),
            },
            Process::Def { decl, body } => {
                c.defs.push(*decl);
                self.absorb(c, *body)?;
            }
            thread => c.threads.push(thread),
        }
        Ok(())
    }

    /// `c` with thread `i` replaced by `by`, absorbed.
    fn replace(&mut self, c: &Config, i: usize, by: Process) -> Config {
        let mut next = c.clone();
        next.threads.remove(i);
        let tail = next.threads.split_off(i);
        // Annotations were interned up front, so absorbing cannot fail.
        self.absorb(&mut next, by).expect("annotations are interned");
        next.threads.extend(tail);
        next.step += 1;
        next
    }

    /// Roles whose endpoints thread `t` acts on.
    pub fn thread_roles(t: &Process) -> BTreeSet<Role> {
        match t {
            Process::Select {
                channel: Value::Endpoint(e),
                ..
            }
            | Process::Branch {
                channel: Value::Endpoint(e),
                ..
            } => BTreeSet::from([e.role.clone()]),
            other => other.free_endpoints().into_iter().map(|e| e.role).collect(),
        }
    }

    /// Threads of crashed roles that the scenario freezes.
    pub fn frozen(&self, c: &Config) -> Vec<usize> {
        c.threads
            .iter()
            .enumerate()
            .filter(|(_, t)| {
                let roles = Simulator::thread_roles(t);
                !roles.is_empty() && roles.iter().all(|r| self.scenario.frozen(r, c.step))
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// `≡ 0`, ignoring frozen threads.
    pub fn is_inaction(&self, c: &Config) -> bool {
        c.is_inaction_without(&self.frozen(c), self.mode())
    }

    fn timeout_allowed(&self, q: &Role, arms: &[magpi_core::BranchArm]) -> bool {
        match self.policy {
            ReductionPolicy::Unrestricted => true,
            ReductionPolicy::Reliable => arms.iter().any(|a| !self.reliability.reliable(q, &a.from)),
        }
    }

    fn drop_allowed(&self, m: &Message) -> bool {
        match self.policy {
            ReductionPolicy::Unrestricted => true,
            ReductionPolicy::Reliable => !self.reliability.reliable(&m.from, &m.to),
        }
    }

    /// Indices of entries in `queue` that a receiver `to` may take first;
    /// under FIFO only the oldest entry of each sender.
    fn consumable(queue: &[Message], to: &Role, mode: CongruenceMode) -> Vec<usize> {
        let mut seen: BTreeSet<&Role> = BTreeSet::new();
        let mut out = Vec::new();
        for (i, m) in queue.iter().enumerate() {
            if &m.to != to {
                continue;
            }
            match mode {
                CongruenceMode::TotalReorder => out.push(i),
                CongruenceMode::TcpFifo => {
                    if seen.insert(&m.from) {
                        out.push(i);
                    }
                }
            }
        }
        out
    }

    /// The enabled set of `c`. Timeouts with nothing to receive appear only
    /// when nothing else is enabled.
    pub fn enabled_steps(&mut self, c: &Config) -> Vec<Step> {
        let frozen = self.frozen(c);
        let mode = self.mode();
        let mut steps = Vec::new();
        let mut idle = Vec::new();
        for i in 0..c.threads.len() {
            if frozen.contains(&i) {
                continue;
            }
            match c.threads[i].clone() {
                Process::Select {
                    channel: Value::Endpoint(e),
                    to,
                    label,
                    payload,
                    cont,
                    span,
                } => {
                    if c.session(&e.session).and_then(|s| s.queue.as_ref()).is_none() {
                        continue;
                    }
                    let msg = Message {
                        from: e.role.clone(),
                        to,
                        label,
                        payload,
                    };
                    let mut next = self.replace(c, i, *cont);
                    let s = next.session_mut(&e.session).expect("session exists");
                    s.queue.as_mut().expect("buffer exists").push(msg.clone());
                    self.mirror_send(s, &e.role, &msg);
                    steps.push(Step {
                        rule: Rule::Select,
                        thread: Some(i),
                        span,
                        detail: format!("{e}!{}.{}({})", msg.to, msg.label, payload_text(&msg.payload)),
                        class: StepClass::Move,
                        next,
                    });
                }
                Process::Branch {
                    channel: Value::Endpoint(e),
                    arms,
                    timeout,
                    span,
                } => {
                    let queue = c.queue(&e.session).to_vec();
                    let mut matched = false;
                    for j in Simulator::consumable(&queue, &e.role, mode) {
                        let m = &queue[j];
                        let Some(arm) = arms.iter().find(|a| a.from == m.from && a.label == m.label) else {
                            continue;
                        };
                        matched = true;
                        let cont = match &arm.binder {
                            Some(x) => arm.cont.subst(&HashMap::from([(x.clone(), m.payload.clone())])),
                            None => arm.cont.clone(),
                        };
                        let mut next = self.replace(c, i, cont);
                        let s = next.session_mut(&e.session).expect("session exists");
                        s.queue.as_mut().expect("buffer exists").remove(j);
                        self.mirror_receive(s, &e.role, m);
                        steps.push(Step {
                            rule: Rule::Branch,
                            thread: Some(i),
                            span,
                            detail: format!("{e} received {m}"),
                            class: StepClass::Move,
                            next,
                        });
                    }
                    if let Some(t) = timeout {
                        if !self.timeout_allowed(&e.role, &arms) || (matched && self.scenario.delay_bias <= 0.0) {
                            continue;
                        }
                        let mut next = self.replace(c, i, *t);
                        let s = next.session_mut(&e.session).expect("session exists");
                        self.mirror_timeout(s, &e.role);
                        let step = Step {
                            rule: Rule::Timeout,
                            thread: Some(i),
                            span,
                            detail: format!("{e} timed out"),
                            class: if matched { StepClass::Delay } else { StepClass::Idle },
                            next,
                        };
                        if matched {
                            steps.push(step);
                        } else {
                            idle.push(step);
                        }
                    }
                }
                Process::Choice(a, b) => {
                    let span = a.span();
                    for (side, p) in [("left", *a), ("right", *b)] {
                        let next = self.replace(c, i, p);
                        steps.push(Step {
                            rule: Rule::Choice,
                            thread: Some(i),
                            span,
                            detail: side.into(),
                            class: StepClass::Move,
                            next,
                        });
                    }
                }
                Process::Call { name, args, span } => {
                    let Some(decl) = c.defs.iter().rev().chain(self.procs.iter()).find(|d| d.name == name).cloned()
                    else {
                        continue;
                    };
                    if decl.params.len() != args.len() {
                        continue;
                    }
                    let map: HashMap<Ident, Value> = decl.params.iter().map(|(x, _)| x.clone()).zip(args.iter().cloned()).collect();
                    let body = decl.body.subst(&map);
                    let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                    let next = self.replace(c, i, body);
                    steps.push(Step {
                        rule: Rule::Call,
                        thread: Some(i),
                        span,
                        detail: format!("{name}({})", args.join(", ")),
                        class: StepClass::Move,
                        next,
                    });
                }
                _ => {}
            }
        }
        for s in &c.sessions {
            let Some(queue) = &s.queue else { continue };
            for (j, m) in queue.iter().enumerate() {
                if !self.drop_allowed(m) {
                    continue;
                }
                let forced = self.scenario.forced_drop(&m.from, &m.to, c.step);
                let weight = self.scenario.drop_prob(&m.from, &m.to);
                if !forced && weight <= 0.0 {
                    continue;
                }
                let mut next = c.clone();
                next.step += 1;
                next.session_mut(&s.name).and_then(|s| s.queue.as_mut()).expect("buffer exists").remove(j);
                steps.push(Step {
                    rule: Rule::Drop,
                    thread: None,
                    span: s.buffer_span,
                    detail: format!("{} lost {m}", s.name),
                    class: StepClass::Drop { forced, weight },
                    next,
                });
            }
        }
        if steps.is_empty() {
            idle
        } else {
            steps
        }
    }

    fn mirror_send(&self, s: &mut Session, from: &Role, m: &Message) {
        let Some(t) = s.types.get_mut(from) else { return };
        let Some(n) = t.session else { return };
        if let Node::Select { arms } = self.graph.head_node(n) {
            if let Some(a) = arms.iter().find(|a| a.role == m.to && a.label == m.label) {
                t.buffer.push(BufEntryTy::new(m.to.clone(), m.label.clone(), a.payload));
                t.session = Some(a.cont);
            }
        }
    }

    fn mirror_receive(&self, s: &mut Session, at: &Role, m: &Message) {
        let mode = self.mode();
        if let Some(t) = s.types.get_mut(&m.from) {
            let k = match mode {
                CongruenceMode::TotalReorder => t.buffer.iter().position(|b| b.to == m.to && b.label == m.label),
                CongruenceMode::TcpFifo => t.buffer.iter().position(|b| b.to == m.to).filter(|&k| t.buffer[k].label == m.label),
            };
            if let Some(k) = k {
                t.buffer.remove(k);
            }
        }
        let Some(t) = s.types.get_mut(at) else { return };
        let Some(n) = t.session else { return };
        if let Node::Branch { arms, .. } = self.graph.head_node(n) {
            if let Some(a) = arms.iter().find(|a| a.role == m.from && a.label == m.label) {
                t.session = Some(a.cont);
            }
        }
    }

    fn mirror_timeout(&self, s: &mut Session, at: &Role) {
        let Some(t) = s.types.get_mut(at) else { return };
        let Some(n) = t.session else { return };
        if let Node::Branch { timeout: Some(k), .. } = self.graph.head_node(n) {
            t.session = Some(*k);
        }
    }

    /// The endpoint a thread's prefix acts on.
    pub fn subject(t: &Process) -> Option<&Endpoint> {
        match t {
            Process::Select {
                channel: Value::Endpoint(e),
                ..
            }
            | Process::Branch {
                channel: Value::Endpoint(e),
                ..
            } => Some(e),
            _ => None,
        }
    }
}

fn payload_text(v: &Value) -> String {
    match v {
        Value::Basic(magpi_core::BasicValue::Unit) => String::new(),
        v => v.to_string(),
    }
}
