//! Syntax-directed derivation search: each process shape has at most one
//! applicable rule, contexts are split by the free names of each side, and
//! buffers are typed entry by entry without weakening.

use std::collections::{BTreeMap, BTreeSet};

use magpi_core::{
    end_predicate, gc_predicate, well_formed, Bisim, CongruenceMode, Diagnostic, Endpoint, Ident, Message, Node,
    NodeId, PayloadType, PayloadTypeExpr, ProcDecl, Process, Reliability, Role, SbType, SbTypeExpr, Span,
    TypeContext, TypeDefs, TypeGraph, Value,
};
use magpi_lts::{ExploreLimits, Model};
use magpi_verify::{check_safety, Verdict};

use crate::report::{TraceStep, TypingReport};

/// `Θ`: process variables to parameter types.
pub type ProcVarContext = BTreeMap<Ident, Vec<PayloadType>>;

/// `Σ`: sessions whose buffer occurs in the subject.
pub type BufferTracker = BTreeSet<Ident>;

#[derive(Clone, Copy, Debug, Default)]
pub struct CheckOptions {
    /// Limits for the safety premise of restrictions; `mode` also decides
    /// which buffer-type entries a queue entry may be matched against.
    pub limits: ExploreLimits,
}

/// `φs` over the single session `s` of a restriction.
pub fn check_restriction_safety(
    defs: &TypeDefs,
    session: &Ident,
    binding: &BTreeMap<Role, SbTypeExpr>,
    reliability: &Reliability,
    limits: &ExploreLimits,
) -> Result<Verdict, Diagnostic> {
    let model = Model::from_bindings(defs, [(session, binding)], reliability.clone())
        .map_err(|e| Diagnostic::error(e.code(), e.span(), e.to_string()))?;
    Ok(check_safety(&model, limits))
}

/// Type graph, reliability and options shared by every judgement.
pub struct Typechecker {
    graph: TypeGraph,
    bisim: Bisim,
    /// Graph size `bisim` was computed at.
    seen: usize,
    reliability: Reliability,
    options: CheckOptions,
    failures: Vec<Diagnostic>,
    trace: Vec<TraceStep>,
}

/// The subject of a session prefix.
#[derive(Clone)]
enum Chan {
    Var(Ident),
    Ep(Endpoint),
}

impl Typechecker {
    pub fn new(defs: &TypeDefs, reliability: Reliability, options: CheckOptions) -> Typechecker {
        let graph = TypeGraph::with_defs(defs.clone());
        let bisim = Bisim::compute(&graph);
        Typechecker {
            seen: graph.len(),
            graph,
            bisim,
            reliability,
            options,
            failures: Vec::new(),
            trace: Vec::new(),
        }
    }

    /// Contexts handed to [`Typechecker::typecheck`] must be interned here.
    pub fn graph_mut(&mut self) -> &mut TypeGraph {
        &mut self.graph
    }

    pub fn graph(&self) -> &TypeGraph {
        &self.graph
    }

    fn mode(&self) -> CongruenceMode {
        self.options.limits.mode
    }

    fn refresh(&mut self) {
        if self.seen != self.graph.len() {
            self.bisim = Bisim::compute(&self.graph);
            self.seen = self.graph.len();
        }
    }

    fn fail(&mut self, code: &str, span: Span, message: impl Into<String>) {
        self.failures.push(Diagnostic::error(code, span, message));
    }

    fn rule(&mut self, rule: &'static str, span: Span) {
        self.trace.push(TraceStep { rule, span });
    }

    fn take_report(&mut self) -> TypingReport {
        TypingReport::new(std::mem::take(&mut self.failures), std::mem::take(&mut self.trace))
    }

    /// `Θ·Γ ⊢_Σ P`.
    pub fn typecheck(&mut self, theta: &ProcVarContext, ctx: &TypeContext, sigma: &BufferTracker, p: &Process) -> TypingReport {
        self.refresh();
        let diags = well_formed(p);
        if !diags.is_empty() {
            self.failures.extend(diags);
            return self.take_report();
        }
        if let Some(got) = self.sigma(theta, ctx.clone(), p) {
            if &got != sigma {
                self.fail(
                    "BufferTrackerMismatch",
                    p.span(),
                    format!("subject holds buffers for {{{}}}", join(&got)),
                );
            }
        }
        self.take_report()
    }

    /// A whole program: mutually recursive `procs` checked once each under
    /// their parameters, then `system` under the empty context.
    pub fn typecheck_program(&mut self, procs: &[ProcDecl], system: &Process) -> TypingReport {
        let mut diags = well_formed(system);
        for d in procs {
            diags.extend(well_formed(&d.body));
        }
        if !diags.is_empty() {
            self.failures.extend(diags);
            return self.take_report();
        }
        let mut theta = ProcVarContext::new();
        let mut params = BTreeMap::new();
        for d in procs {
            if let Some(tys) = self.param_types(d) {
                theta.insert(d.name.clone(), tys.clone());
                params.insert(d.name.clone(), tys);
            }
        }
        for d in procs {
            if let Some(tys) = params.get(&d.name) {
                self.def_body(&theta, d, tys);
            }
        }
        self.sigma(&theta, TypeContext::new(), system);
        self.take_report()
    }

    fn intern_payload(&mut self, t: &PayloadTypeExpr) -> Option<PayloadType> {
        match self.graph.intern_payload(t) {
            Ok(p) => {
                self.refresh();
                Some(p)
            }
            Err(e) => {
                self.fail(e.code(), e.span(), e.to_string());
                None
            }
        }
    }

    fn param_types(&mut self, d: &ProcDecl) -> Option<Vec<PayloadType>> {
        let tys: Vec<Option<PayloadType>> = d.params.iter().map(|(_, t)| self.intern_payload(t)).collect();
        tys.into_iter().collect()
    }

    /// `[T-Def]` premise on the declaration.
    fn def_body(&mut self, theta: &ProcVarContext, d: &ProcDecl, tys: &[PayloadType]) -> bool {
        self.rule("T-Def", d.span);
        let mut ctx = TypeContext::new();
        for ((x, _), t) in d.params.iter().zip(tys) {
            ctx.vars.insert(x.clone(), *t);
        }
        self.plain(theta, ctx, &d.body)
    }

    /// `⊢_Σ`: returns `Σ` on success.
    fn sigma(&mut self, theta: &ProcVarContext, ctx: TypeContext, p: &Process) -> Option<BufferTracker> {
        match p {
            Process::Par(a, b) => {
                self.rule("T-|", p.span());
                let (ca, cb) = self.split(&ctx, a, b, p.span())?;
                let sa = self.sigma(theta, ca, a);
                let sb = self.sigma(theta, cb, b);
                let (sa, sb) = (sa?, sb?);
                let shared: BTreeSet<Ident> = sa.intersection(&sb).cloned().collect();
                if !shared.is_empty() {
                    self.fail(
                        "DuplicateSessionBuffer",
                        p.span(),
                        format!("parallel components both hold a buffer for {{{}}}", join(&shared)),
                    );
                    return None;
                }
                Some(sa.union(&sb).cloned().collect())
            }
            Process::Restriction {
                session,
                binding,
                body,
                span,
            } => {
                self.rule("T-ν", *span);
                if ctx.endpoints.keys().any(|e| &e.session == session) {
                    self.fail(
                        "SessionShadowed",
                        *span,
                        format!("session `{session}` is already bound in the context"),
                    );
                    return None;
                }
                self.restriction_safe(session, binding, *span)?;
                let mut inner = ctx;
                for (r, t) in binding {
                    let t = match SbType::intern(&mut self.graph, t) {
                        Ok(t) => t,
                        Err(e) => {
                            self.fail(e.code(), e.span(), e.to_string());
                            return None;
                        }
                    };
                    inner.endpoints.insert(Endpoint::new(session.clone(), r.clone()), t);
                }
                self.refresh();
                let mut s = self.sigma(theta, inner, body)?;
                s.remove(session);
                Some(s)
            }
            Process::Buffer { session, queue, span } => {
                self.buffer(ctx, session, queue, *span)?;
                Some(BTreeSet::from([session.clone()]))
            }
            Process::Def { decl, body } => {
                let tys = self.param_types(decl)?;
                let mut inner = theta.clone();
                inner.insert(decl.name.clone(), tys.clone());
                let ok = self.def_body(&inner, decl, &tys);
                let s = self.sigma(&inner, ctx, body);
                if ok {
                    s
                } else {
                    None
                }
            }
            _ => {
                self.rule("T-Lift", p.span());
                self.plain(theta, ctx, p).then(BTreeSet::new)
            }
        }
    }

    /// `⊢`. Composite subjects are accepted when they hold no buffer.
    fn plain(&mut self, theta: &ProcVarContext, mut ctx: TypeContext, p: &Process) -> bool {
        match p {
            Process::Inaction => {
                self.rule("T-0", Span::DUMMY);
                self.end(&ctx, p.span(), "0")
            }
            Process::Choice(a, b) => {
                self.rule("T-+", p.span());
                let l = self.plain(theta, ctx.clone(), a);
                let r = self.plain(theta, ctx, b);
                l && r
            }
            Process::Select {
                channel,
                to,
                label,
                payload,
                cont,
                span,
            } => {
                self.rule("T-⊕", *span);
                let Some((chan, node)) = self.channel(&ctx, channel, *span) else {
                    return false;
                };
                let Node::Select { arms } = self.graph.head_node(node) else {
                    let t = self.graph.render(node);
                    self.fail("ChannelTypeMismatch", *span, format!("`{channel}` has type {t}, not a selection"));
                    return false;
                };
                let Some(arm) = arms.iter().find(|a| &a.role == to && &a.label == label).cloned() else {
                    let t = self.graph.render(node);
                    self.fail("LabelNotOffered", *span, format!("{to}!{label} is not offered by {t}"));
                    return false;
                };
                if !self.type_value(&mut ctx, payload, arm.payload, *span) {
                    return false;
                }
                put_channel(&mut ctx, &chan, arm.cont);
                self.plain(theta, ctx, cont)
            }
            Process::Branch {
                channel,
                arms,
                timeout,
                span,
            } => {
                self.rule("T-&", *span);
                let Some((chan, node)) = self.channel(&ctx, channel, *span) else {
                    return false;
                };
                let Node::Branch {
                    arms: ty_arms,
                    timeout: ty_timeout,
                } = self.graph.head_node(node).clone()
                else {
                    let t = self.graph.render(node);
                    self.fail("ChannelTypeMismatch", *span, format!("`{channel}` has type {t}, not a branching"));
                    return false;
                };
                let have: BTreeSet<(&Role, &str)> = arms.iter().map(|a| (&a.from, a.label.as_str())).collect();
                let want: BTreeSet<(&Role, &str)> = ty_arms.iter().map(|a| (&a.role, a.label.as_str())).collect();
                if have != want {
                    let show = |s: &BTreeSet<(&Role, &str)>| {
                        s.iter().map(|(r, l)| format!("{r}?{l}")).collect::<Vec<_>>().join(", ")
                    };
                    self.fail(
                        "ArmMismatch",
                        *span,
                        format!("process offers {{{}}} but the type expects {{{}}}", show(&have), show(&want)),
                    );
                    return false;
                }
                match (timeout, ty_timeout) {
                    (None, Some(_)) => {
                        self.fail("MissingTimeoutArm", *span, "the type has a timeout arm the process lacks");
                        return false;
                    }
                    (Some(_), None) => {
                        self.fail("UnexpectedTimeoutArm", *span, "the type has no timeout arm");
                        return false;
                    }
                    _ => {}
                }
                let mut ok = true;
                for a in arms {
                    let ty = ty_arms
                        .iter()
                        .find(|t| t.role == a.from && t.label == a.label)
                        .expect("arm sets agree");
                    let mut inner = ctx.clone();
                    match (&a.binder, &a.binder_ty) {
                        (None, _) => {
                            if ty.payload != PayloadType::UNIT {
                                let t = self.graph.render_payload(ty.payload);
                                self.fail("PayloadMismatch", a.span, format!("`()` binds nothing but the payload is {t}"));
                                ok = false;
                                continue;
                            }
                        }
                        (Some(x), annot) => {
                            if let Some(annot) = annot {
                                let Some(t) = self.intern_payload(annot) else {
                                    ok = false;
                                    continue;
                                };
                                if !self.bisim.eq_payload(t, ty.payload) {
                                    let (have, want) =
                                        (self.graph.render_payload(t), self.graph.render_payload(ty.payload));
                                    self.fail(
                                        "PayloadMismatch",
                                        a.span,
                                        format!("`{x}` is annotated {have} but the payload is {want}"),
                                    );
                                    ok = false;
                                    continue;
                                }
                            }
                            inner.vars.insert(x.clone(), ty.payload);
                        }
                    }
                    put_channel(&mut inner, &chan, ty.cont);
                    ok &= self.plain(theta, inner, &a.cont);
                }
                if let (Some(q), Some(t)) = (timeout, ty_timeout) {
                    put_channel(&mut ctx, &chan, t);
                    ok &= self.plain(theta, ctx, q);
                }
                ok
            }
            Process::Call { name, args, span } => {
                self.rule("T-Call", *span);
                let Some(tys) = theta.get(name).cloned() else {
                    self.fail("UnboundProcessVariable", *span, format!("no declaration for `{name}`"));
                    return false;
                };
                if tys.len() != args.len() {
                    self.fail(
                        "ArityMismatch",
                        *span,
                        format!("`{name}` takes {} arguments, given {}", tys.len(), args.len()),
                    );
                    return false;
                }
                for (a, t) in args.iter().zip(tys) {
                    if !self.type_value(&mut ctx, a, t, *span) {
                        return false;
                    }
                }
                self.end(&ctx, *span, &format!("the call to `{name}`"))
            }
            Process::Def { decl, body } => {
                let Some(tys) = self.param_types(decl) else {
                    return false;
                };
                let mut inner = theta.clone();
                inner.insert(decl.name.clone(), tys.clone());
                let ok = self.def_body(&inner, decl, &tys);
                self.plain(&inner, ctx, body) && ok
            }
            Process::Par(..) | Process::Restriction { .. } | Process::Buffer { .. } => match self.sigma(theta, ctx, p) {
                Some(s) if s.is_empty() => true,
                Some(s) => {
                    self.fail(
                        "BufferUnderPrefix",
                        p.span(),
                        format!("buffers for {{{}}} occur below a prefix", join(&s)),
                    );
                    false
                }
                None => false,
            },
        }
    }

    fn end(&mut self, ctx: &TypeContext, span: Span, what: &str) -> bool {
        if end_predicate(&self.graph, ctx) {
            return true;
        }
        self.fail(
            "LeftoverLinearBinding",
            span,
            format!("{what} leaves {} open", ctx.render(&self.graph)),
        );
        false
    }

    /// The `φs` premise of `[T-ν]`.
    fn restriction_safe(&mut self, session: &Ident, binding: &BTreeMap<Role, SbTypeExpr>, span: Span) -> Option<()> {
        let verdict = match check_restriction_safety(
            self.graph.defs(),
            session,
            binding,
            &self.reliability,
            &self.options.limits,
        ) {
            Ok(v) => v,
            Err(d) => {
                self.failures.push(d);
                return None;
            }
        };
        match verdict {
            Verdict::Holds => Some(()),
            Verdict::Violated { witness, reason } => {
                let steps = if witness.is_empty() {
                    "in the initial context".to_string()
                } else {
                    format!("after {} context reductions", witness.len())
                };
                self.fail(
                    &format!("SafetyUndetermined-{reason}"),
                    span,
                    format!("session `{session}` violates {reason} {steps}"),
                );
                None
            }
            Verdict::Inconclusive(kind) => {
                self.fail(
                    "SafetyUndetermined",
                    span,
                    format!("safety of session `{session}` is undetermined ({kind:?})"),
                );
                None
            }
        }
    }

    fn channel(&mut self, ctx: &TypeContext, v: &Value, span: Span) -> Option<(Chan, NodeId)> {
        let found = match v {
            Value::Var(x) => match ctx.vars.get(x) {
                Some(PayloadType::Session(n)) => Some((Chan::Var(x.clone()), *n)),
                Some(PayloadType::Basic(k)) => {
                    self.fail("ChannelTypeMismatch", span, format!("`{x}` has basic type {k}"));
                    return None;
                }
                None => None,
            },
            Value::Endpoint(e) => ctx
                .endpoints
                .get(e)
                .and_then(|t| t.session)
                .map(|n| (Chan::Ep(e.clone()), n)),
            Value::Basic(b) => {
                self.fail("NotAChannel", span, format!("`{b}` is not a channel"));
                return None;
            }
        };
        if found.is_none() {
            self.fail("UnboundChannel", span, format!("`{v}` has no session type in the context"));
        }
        found
    }

    /// `Γ ⊢ d : T`, consuming linear bindings of `d`.
    fn type_value(&mut self, ctx: &mut TypeContext, v: &Value, want: PayloadType, span: Span) -> bool {
        let have = match v {
            Value::Basic(b) => Some(PayloadType::Basic(b.kind())),
            Value::Var(x) => match ctx.vars.get(x).copied() {
                Some(t @ PayloadType::Session(_)) => {
                    ctx.vars.remove(x);
                    Some(t)
                }
                Some(t) => Some(t),
                None => {
                    self.fail("UnboundVariable", span, format!("`{x}` is not bound"));
                    return false;
                }
            },
            Value::Endpoint(e) => match ctx.endpoints.get(e) {
                Some(SbType { buffer, session: Some(n) }) if buffer.is_empty() => {
                    let n = *n;
                    ctx.endpoints.remove(e);
                    Some(PayloadType::Session(n))
                }
                _ => None,
            },
        };
        let Some(have) = have else {
            self.fail("UnboundChannel", span, format!("`{v}` has no session type to send"));
            return false;
        };
        if self.bisim.eq_payload(have, want) {
            return true;
        }
        let (have, want) = (self.graph.render_payload(have), self.graph.render_payload(want));
        self.fail("PayloadMismatch", span, format!("`{v}` has type {have}, expected {want}"));
        false
    }

    /// `[Σ-1]`/`[Σ-2]` per entry, then `[Σ-ε]`.
    fn buffer(&mut self, mut ctx: TypeContext, session: &Ident, queue: &[Message], span: Span) -> Option<()> {
        let mode = self.mode();
        for m in queue {
            let ep = Endpoint::new(session.clone(), m.from.clone());
            let entries = ctx.endpoints.get(&ep).map(|t| t.buffer.as_slice()).unwrap_or(&[]);
            let at = match mode {
                CongruenceMode::TotalReorder => entries.iter().position(|e| e.to == m.to && e.label == m.label),
                CongruenceMode::TcpFifo => entries
                    .iter()
                    .position(|e| e.to == m.to)
                    .filter(|&i| entries[i].label == m.label),
            };
            let Some(at) = at else {
                self.fail(
                    "BufferEntryMismatch",
                    span,
                    format!("no buffer type of {ep} accounts for {m}"),
                );
                return None;
            };
            let t = ctx.endpoints.get_mut(&ep).expect("entry found");
            let entry = t.buffer.remove(at);
            let last = t.buffer.is_empty();
            self.rule(if last { "Σ-1" } else { "Σ-2" }, span);
            if !self.type_value(&mut ctx, &m.payload, entry.payload, span) {
                return None;
            }
        }
        self.rule("Σ-ε", span);
        if gc_predicate(&self.bisim, &ctx) {
            return Some(());
        }
        self.fail(
            "LeftoverLinearBinding",
            span,
            format!("buffer `{session}` leaves {} that cannot be collected", ctx.render(&self.graph)),
        );
        None
    }

    /// Demand-driven `Γ = Γ1, Γ2` for `a | b`. Session parts follow the
    /// side that names the endpoint, buffer parts the side holding the
    /// session's buffer; unused bindings go left unless the left side is a
    /// bare buffer.
    fn split(&mut self, ctx: &TypeContext, a: &Process, b: &Process, span: Span) -> Option<(TypeContext, TypeContext)> {
        let (va, vb) = (a.free_vars(), b.free_vars());
        let (ea, eb) = (a.free_endpoints(), b.free_endpoints());
        let (ba, bb) = (a.free_buffers(), b.free_buffers());
        let left_default = !matches!(a, Process::Buffer { .. });
        let (mut ca, mut cb) = (TypeContext::new(), TypeContext::new());
        let mut ok = true;
        for (x, t) in &ctx.vars {
            let (ua, ub) = (va.contains(x), vb.contains(x));
            match t {
                // Basic values are not resources.
                PayloadType::Basic(_) => {
                    if ua {
                        ca.vars.insert(x.clone(), *t);
                    }
                    if ub {
                        cb.vars.insert(x.clone(), *t);
                    }
                }
                PayloadType::Session(_) => {
                    if ua && ub {
                        self.fail("LinearityViolation", span, format!("`{x}` is used by both parallel components"));
                        ok = false;
                    }
                    let side = if ua || (!ub && left_default) { &mut ca } else { &mut cb };
                    side.vars.insert(x.clone(), *t);
                }
            }
        }
        for (e, t) in &ctx.endpoints {
            let (ua, ub) = (ea.contains(e), eb.contains(e));
            if t.session.is_some() && ua && ub {
                self.fail("LinearityViolation", span, format!("`{e}` is used by both parallel components"));
                ok = false;
            }
            let session_left = ua || (!ub && left_default);
            let buffer_left = if ba.contains(&e.session) {
                true
            } else if bb.contains(&e.session) {
                false
            } else {
                left_default
            };
            for (left, part) in [
                (
                    session_left,
                    t.session.map(|s| SbType {
                        buffer: Vec::new(),
                        session: Some(s),
                    }),
                ),
                (
                    buffer_left,
                    (!t.buffer.is_empty() || t.session.is_none()).then(|| SbType::buffer(t.buffer.clone())),
                ),
            ] {
                let Some(part) = part else { continue };
                let side = if left { &mut ca } else { &mut cb };
                let slot = side.endpoints.entry(e.clone()).or_insert(SbType {
                    buffer: Vec::new(),
                    session: None,
                });
                slot.buffer.extend(part.buffer);
                slot.session = slot.session.or(part.session);
            }
        }
        ok.then_some((ca, cb))
    }
}

fn put_channel(ctx: &mut TypeContext, chan: &Chan, n: NodeId) {
    match chan {
        Chan::Var(x) => {
            ctx.vars.insert(x.clone(), PayloadType::Session(n));
        }
        Chan::Ep(e) => {
            ctx.endpoints.entry(e.clone()).or_insert_with(|| SbType::session(n)).session = Some(n);
        }
    }
}

fn join(s: &BTreeSet<Ident>) -> String {
    s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}
