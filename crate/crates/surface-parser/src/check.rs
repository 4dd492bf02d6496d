//! Name resolution and static well-formedness of a parsed file.

use std::collections::{BTreeMap, BTreeSet};

use magpi_core::{
    well_formed, Diagnostic, Ident, PayloadTypeExpr, ProcDecl, Process, Reliability, Role, SbTypeExpr,
    SessionTypeExpr, Span, TypeDefs, TypeGraph, Value,
};

use crate::ast::{ProtocolFile, RawFile};

pub(crate) fn check(raw: RawFile) -> Result<ProtocolFile, Vec<Diagnostic>> {
    let mut out = Vec::new();

    let mut roles: Vec<Role> = Vec::new();
    for (r, span) in &raw.roles {
        if roles.contains(r) {
            out.push(Diagnostic::error("DuplicateRole", *span, format!("role `{r}` is declared twice")));
        } else {
            roles.push(r.clone());
        }
    }
    let declared: BTreeSet<Role> = roles.iter().cloned().collect();

    let mut reliability = Reliability::new();
    let mut seen = BTreeSet::new();
    for entry in &raw.reliability {
        if !declared.contains(&entry.role) {
            out.push(Diagnostic::error(
                "UnknownReliabilityRole",
                entry.span,
                format!("`{}` is not a declared role", entry.role),
            ));
        }
        if !seen.insert(entry.role.clone()) {
            out.push(Diagnostic::error(
                "DuplicateReliabilityEntry",
                entry.span,
                format!("reliability of `{}` is given twice", entry.role),
            ));
        }
        for (q, span) in &entry.reliable {
            if q == &entry.role {
                out.push(Diagnostic::error(
                    "SelfReliance",
                    *span,
                    format!("`{q}` cannot appear in its own reliability set"),
                ));
            } else if !declared.contains(q) {
                out.push(Diagnostic::error(
                    "UnknownReliabilityRole",
                    *span,
                    format!("`{q}` is not a declared role"),
                ));
            }
        }
        reliability.set(entry.role.clone(), entry.reliable.iter().map(|(q, _)| q.clone()));
    }
    for r in &roles {
        if !seen.contains(r) {
            reliability.set(r.clone(), []);
        }
    }

    let mut type_defs = TypeDefs::new();
    for (name, def) in &raw.type_defs {
        if type_defs.contains_key(name) {
            out.push(Diagnostic::error("DuplicateTypeDef", def.span, format!("type `{name}` is defined twice")));
            continue;
        }
        if !declared.contains(&def.role) {
            out.push(undeclared(&def.role, def.span));
        }
        session_roles(&def.body, &declared, &mut out);
        type_defs.insert(name.clone(), def.clone());
    }
    for (name, def) in &type_defs {
        if let Err(e) = TypeGraph::with_defs(type_defs.clone()).intern_named(name) {
            let span = if e.span().is_dummy() { def.span } else { e.span() };
            out.push(Diagnostic::error(e.code(), span, format!("in type `{name}`: {e}")));
        }
    }

    let mut procs: BTreeMap<Ident, usize> = BTreeMap::new();
    for d in &raw.proc_defs {
        if procs.insert(d.name.clone(), d.params.len()).is_some() {
            out.push(Diagnostic::error("DuplicateProc", d.span, format!("process `{}` is defined twice", d.name)));
        }
    }
    let mut ctx = Checker {
        declared: &declared,
        defs: &type_defs,
        out: &mut out,
    };
    for d in &raw.proc_defs {
        ctx.decl(d, &procs);
    }
    ctx.process(&raw.system, &procs, &BTreeSet::new(), &mut BTreeSet::new());
    for fv in raw.system.free_vars() {
        out.push(Diagnostic::error(
            "UnboundVariable",
            raw.system.span(),
            format!("variable `{fv}` is free in the system"),
        ));
    }
    out.extend(well_formed(&raw.system));

    if out.is_empty() {
        Ok(ProtocolFile {
            name: raw.name,
            roles,
            reliability,
            type_defs,
            proc_defs: raw.proc_defs,
            system: raw.system,
        })
    } else {
        Err(out)
    }
}

fn undeclared(r: &Role, span: Span) -> Diagnostic {
    Diagnostic::error("UndeclaredRole", span, format!("role `{r}` is not declared"))
}

fn session_roles(t: &SessionTypeExpr, declared: &BTreeSet<Role>, out: &mut Vec<Diagnostic>) {
    match t {
        SessionTypeExpr::Branch { arms, timeout, .. } => {
            for a in arms {
                if !declared.contains(&a.role) {
                    out.push(undeclared(&a.role, a.span));
                }
                payload_roles(&a.payload, declared, out);
                session_roles(&a.cont, declared, out);
            }
            if let Some(t) = timeout {
                session_roles(t, declared, out);
            }
        }
        SessionTypeExpr::Select { arms, .. } => {
            for a in arms {
                if !declared.contains(&a.role) {
                    out.push(undeclared(&a.role, a.span));
                }
                payload_roles(&a.payload, declared, out);
                session_roles(&a.cont, declared, out);
            }
        }
        SessionTypeExpr::Rec { body, .. } => session_roles(body, declared, out),
        SessionTypeExpr::End | SessionTypeExpr::Var(..) | SessionTypeExpr::Named(..) => {}
    }
}

fn payload_roles(t: &PayloadTypeExpr, declared: &BTreeSet<Role>, out: &mut Vec<Diagnostic>) {
    if let PayloadTypeExpr::Session(s) = t {
        session_roles(s, declared, out);
    }
}

struct Checker<'a> {
    declared: &'a BTreeSet<Role>,
    defs: &'a TypeDefs,
    out: &'a mut Vec<Diagnostic>,
}

impl Checker<'_> {
    fn role(&mut self, r: &Role, span: Span) {
        if !self.declared.contains(r) {
            self.out.push(undeclared(r, span));
        }
    }

    fn value(&mut self, v: &Value, span: Span) {
        if let Value::Endpoint(e) = v {
            self.role(&e.role, span);
        }
    }

    fn payload_type(&mut self, t: &PayloadTypeExpr, span: Span) {
        if let PayloadTypeExpr::Session(s) = t {
            self.session_type(s, span);
        }
    }

    fn session_type(&mut self, s: &SessionTypeExpr, span: Span) {
        session_roles(s, self.declared, self.out);
        // A fresh graph per type keeps one bad definition from leaking into
        // unrelated diagnostics.
        if let Err(e) = TypeGraph::with_defs(self.defs.clone()).intern(s) {
            let at = if e.span().is_dummy() { span } else { e.span() };
            self.out.push(Diagnostic::error(e.code(), at, e.to_string()));
        }
    }

    fn sb_type(&mut self, t: &SbTypeExpr, span: Span) {
        for e in t.buffer.iter().flatten() {
            self.role(&e.to, span);
            self.payload_type(&e.payload, span);
        }
        if let Some(s) = &t.session {
            self.session_type(s, span);
        }
    }

    fn decl(&mut self, d: &ProcDecl, procs: &BTreeMap<Ident, usize>) {
        self.params(d);
        self.process(&d.body, procs, &BTreeSet::new(), &mut BTreeSet::new());
        self.out.extend(well_formed(&d.body));
    }

    fn params(&mut self, d: &ProcDecl) {
        let mut params = BTreeSet::new();
        for (x, t) in &d.params {
            if !params.insert(x.clone()) {
                self.out.push(Diagnostic::error(
                    "DuplicateParam",
                    d.span,
                    format!("parameter `{x}` of `{}` is repeated", d.name),
                ));
            }
            self.payload_type(t, d.span);
        }
        for fv in d.body.free_vars() {
            if !params.contains(&fv) {
                self.out.push(Diagnostic::error(
                    "UnboundVariable",
                    d.span,
                    format!("variable `{fv}` is free in the body of `{}`", d.name),
                ));
            }
        }
    }

    /// `open` holds the sessions restricted around `p`, to reject shadowing.
    fn process(
        &mut self,
        p: &Process,
        procs: &BTreeMap<Ident, usize>,
        local: &BTreeSet<(Ident, usize)>,
        open: &mut BTreeSet<Ident>,
    ) {
        match p {
            Process::Inaction => {}
            Process::Restriction {
                session,
                binding,
                body,
                span,
            } => {
                if open.contains(session) {
                    self.out.push(Diagnostic::error(
                        "ShadowedSession",
                        *span,
                        format!("session `{session}` is already restricted in an enclosing scope"),
                    ));
                }
                for (r, t) in binding {
                    self.role(r, *span);
                    self.sb_type(t, *span);
                }
                let fresh = open.insert(session.clone());
                self.process(body, procs, local, open);
                if fresh {
                    open.remove(session);
                }
            }
            Process::Par(a, b) | Process::Choice(a, b) => {
                self.process(a, procs, local, open);
                self.process(b, procs, local, open);
            }
            Process::Select {
                channel,
                to,
                payload,
                cont,
                span,
                ..
            } => {
                self.value(channel, *span);
                self.role(to, *span);
                self.value(payload, *span);
                self.process(cont, procs, local, open);
            }
            Process::Branch {
                channel,
                arms,
                timeout,
                span,
            } => {
                self.value(channel, *span);
                for a in arms {
                    self.role(&a.from, a.span);
                    if let Some(t) = &a.binder_ty {
                        self.payload_type(t, a.span);
                    }
                    self.process(&a.cont, procs, local, open);
                }
                if let Some(t) = timeout {
                    self.process(t, procs, local, open);
                }
            }
            Process::Def { decl, body } => {
                let mut inner = local.clone();
                inner.retain(|(n, _)| n != &decl.name);
                inner.insert((decl.name.clone(), decl.params.len()));
                // The declaration is in scope in its own body.
                self.params(decl);
                self.process(&decl.body, procs, &inner, &mut BTreeSet::new());
                self.process(body, procs, &inner, open);
            }
            Process::Call { name, args, span } => {
                for a in args {
                    self.value(a, *span);
                }
                let arity = local
                    .iter()
                    .find(|(n, _)| n == name)
                    .map(|(_, k)| *k)
                    .or_else(|| procs.get(name).copied());
                match arity {
                    None => self.out.push(Diagnostic::error(
                        "UnknownProcess",
                        *span,
                        format!("process `{name}` is not defined"),
                    )),
                    Some(k) if k != args.len() => self.out.push(Diagnostic::error(
                        "ArityMismatch",
                        *span,
                        format!("`{name}` takes {k} argument(s), {} given", args.len()),
                    )),
                    Some(_) => {}
                }
            }
            Process::Buffer { queue, span, .. } => {
                for m in queue {
                    self.role(&m.from, *span);
                    self.role(&m.to, *span);
                    self.value(&m.payload, *span);
                }
            }
        }
    }
}
