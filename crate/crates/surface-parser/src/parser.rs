//! Recursive-descent parser. Purely syntactic: names are not resolved beyond
//! telling `rec` variables from references to `type` definitions.

use std::collections::BTreeMap;

use magpi_core::{
    ArmExpr, BasicKind, BasicValue, BranchArm, BufEntryExpr, Diagnostic, Endpoint, Ident, Label, Message,
    PayloadTypeExpr, ProcDecl, Process, Role, SbTypeExpr, SessionTypeExpr, Span, TypeDef, Value,
};

use crate::ast::{RawFile, RawReliability};
use crate::lexer::{lex, Tok, Token};

pub const RESERVED: &[&str] = &[
    "protocol",
    "roles",
    "reliability",
    "type",
    "proc",
    "system",
    "new",
    "in",
    "def",
    "end",
    "rec",
    "timeout",
    "true",
    "false",
    "eps",
    "unit",
    "int",
    "bool",
    "real",
    "string",
];

type PResult<T> = Result<T, Diagnostic>;

pub(crate) struct Parser {
    toks: Vec<Token>,
    i: usize,
    rec_scope: Vec<Ident>,
}

impl Parser {
    pub fn new(src: &str) -> PResult<Parser> {
        Ok(Parser {
            toks: lex(src)?,
            i: 0,
            rec_scope: Vec::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.i].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.i.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, expected: &str) -> PResult<T> {
        Err(Diagnostic::error(
            "SyntaxError",
            self.span(),
            format!("expected {expected}, found {}", self.peek().describe()),
        ))
    }

    fn at_punct(&self, c: char) -> bool {
        *self.peek() == Tok::Punct(c)
    }

    fn at_punct_at(&self, k: usize, c: char) -> bool {
        *self.peek_at(k) == Tok::Punct(c)
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.at_punct(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, c: char) -> PResult<()> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            self.err(&format!("`{c}`"))
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.err(&format!("`{kw}`"))
        }
    }

    fn at_name(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if !RESERVED.contains(&s.as_str()))
    }

    fn name(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                let span = self.bump().span;
                Ok((s, span))
            }
            _ => self.err(what),
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Ident> {
        Ok(Ident::from(self.name(what)?.0))
    }

    fn role(&mut self) -> PResult<Role> {
        Ok(Role::from(self.name("a role")?.0))
    }

    fn label(&mut self) -> PResult<Label> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Int(s) => {
                self.bump();
                Ok(Label::from(s))
            }
            _ => self.err("a label"),
        }
    }

    pub fn expect_eof(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.err("end of input")
        }
    }

    fn sep_by<T>(&mut self, close: char, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        let mut out = Vec::new();
        if self.eat_punct(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat_punct(close) {
                return Ok(out);
            }
            self.expect_punct(',')?;
        }
    }

    // ---- files ----

    pub fn file(&mut self) -> PResult<RawFile> {
        self.expect_kw("protocol")?;
        let name = self.ident("a protocol name")?;
        self.expect_kw("roles")?;
        let mut roles = vec![self.name("a role")?];
        while self.eat_punct(',') {
            roles.push(self.name("a role")?);
        }
        let roles = roles.into_iter().map(|(r, s)| (Role::from(r), s)).collect();
        let mut reliability = Vec::new();
        if self.eat_kw("reliability") {
            self.expect_punct('{')?;
            reliability = self.sep_by('}', |p| {
                let (role, span) = p.name("a role")?;
                p.expect_punct(':')?;
                p.expect_punct('{')?;
                let reliable = p.sep_by('}', |p| p.name("a role").map(|(r, s)| (Role::from(r), s)))?;
                Ok(RawReliability {
                    role: role.into(),
                    span,
                    reliable,
                })
            })?;
        }
        let mut type_defs = Vec::new();
        let mut proc_defs = Vec::new();
        loop {
            if self.at_kw("type") {
                let start = self.bump().span;
                let name = self.ident("a type name")?;
                self.expect_punct('@')?;
                let role = self.role()?;
                self.expect_punct('=')?;
                let body = self.session_type()?;
                type_defs.push((
                    name,
                    TypeDef {
                        role,
                        body,
                        span: start.to(self.prev_span()),
                    },
                ));
            } else if self.at_kw("proc") {
                let start = self.bump().span;
                proc_defs.push(self.decl(start)?);
            } else {
                break;
            }
        }
        self.expect_kw("system")?;
        let system = self.process()?;
        self.expect_eof()?;
        Ok(RawFile {
            name,
            roles,
            reliability,
            type_defs,
            proc_defs,
            system,
        })
    }

    fn decl(&mut self, start: Span) -> PResult<ProcDecl> {
        let name = self.ident("a process name")?;
        self.expect_punct('(')?;
        let params = self.sep_by(')', |p| {
            let x = p.ident("a parameter")?;
            p.expect_punct(':')?;
            Ok((x, p.payload_type()?))
        })?;
        self.expect_punct('=')?;
        let body = self.process()?;
        Ok(ProcDecl {
            name,
            params,
            body,
            span: start.to(self.prev_span()),
        })
    }

    // ---- types ----

    fn basic_kind(&self) -> Option<BasicKind> {
        match self.peek() {
            Tok::Ident(s) => BasicKind::from_keyword(s),
            _ => None,
        }
    }

    pub fn payload_type(&mut self) -> PResult<PayloadTypeExpr> {
        if let Some(k) = self.basic_kind() {
            self.bump();
            return Ok(PayloadTypeExpr::Basic(k));
        }
        Ok(PayloadTypeExpr::Session(self.session_type()?))
    }

    /// `(T)`, `()` or nothing; the last two mean unit.
    fn arm_payload(&mut self) -> PResult<PayloadTypeExpr> {
        if !self.eat_punct('(') {
            return Ok(PayloadTypeExpr::unit());
        }
        if self.eat_punct(')') {
            return Ok(PayloadTypeExpr::unit());
        }
        let t = self.payload_type()?;
        self.expect_punct(')')?;
        Ok(t)
    }

    fn type_arm(&mut self, op: char) -> PResult<ArmExpr> {
        let start = self.span();
        let role = self.role()?;
        self.expect_punct(op)?;
        let label = self.label()?;
        let payload = self.arm_payload()?;
        self.expect_punct('.')?;
        let cont = self.session_type()?;
        Ok(ArmExpr {
            role,
            label,
            payload,
            cont,
            span: start.to(self.prev_span()),
        })
    }

    pub fn session_type(&mut self) -> PResult<SessionTypeExpr> {
        let start = self.span();
        if self.eat_kw("end") {
            return Ok(SessionTypeExpr::End);
        }
        if self.eat_kw("rec") {
            let var = self.ident("a recursion variable")?;
            self.expect_punct('.')?;
            self.rec_scope.push(var.clone());
            let body = self.session_type();
            self.rec_scope.pop();
            return Ok(SessionTypeExpr::Rec {
                var,
                body: Box::new(body?),
                span: start.to(self.prev_span()),
            });
        }
        if self.eat_punct('(') {
            let t = self.session_type()?;
            self.expect_punct(')')?;
            return Ok(t);
        }
        if self.eat_punct('&') {
            self.expect_punct('{')?;
            let mut arms = Vec::new();
            let mut timeout = None;
            loop {
                if self.eat_kw("timeout") {
                    self.expect_punct('.')?;
                    timeout = Some(Box::new(self.session_type()?));
                    self.expect_punct('}')?;
                    break;
                }
                arms.push(self.type_arm('?')?);
                if self.eat_punct('}') {
                    break;
                }
                self.expect_punct(',')?;
            }
            return Ok(SessionTypeExpr::Branch {
                arms,
                timeout,
                span: start.to(self.prev_span()),
            });
        }
        if self.eat_punct('+') {
            self.expect_punct('{')?;
            let arms = self.sep_by('}', |p| p.type_arm('!'))?;
            return Ok(SessionTypeExpr::Select {
                arms,
                span: start.to(self.prev_span()),
            });
        }
        if self.at_name() && (self.at_punct_at(1, '!') || self.at_punct_at(1, '?')) {
            let Tok::Punct(op) = *self.peek_at(1) else { unreachable!() };
            let arm = self.type_arm(op)?;
            let span = start.to(self.prev_span());
            return Ok(if op == '!' {
                SessionTypeExpr::Select { arms: vec![arm], span }
            } else {
                SessionTypeExpr::Branch {
                    arms: vec![arm],
                    timeout: None,
                    span,
                }
            });
        }
        if self.at_name() {
            let x = self.ident("a type")?;
            let span = self.prev_span();
            return Ok(if self.rec_scope.contains(&x) {
                SessionTypeExpr::Var(x, span)
            } else {
                SessionTypeExpr::Named(x, span)
            });
        }
        self.err("a session type")
    }

    pub fn sb_type(&mut self) -> PResult<SbTypeExpr> {
        if !self.eat_punct('<') {
            return Ok(SbTypeExpr::session(self.session_type()?));
        }
        let mut entries = Vec::new();
        if !self.eat_kw("eps") {
            loop {
                let to = self.role()?;
                self.expect_punct('!')?;
                let label = self.label()?;
                let payload = self.arm_payload()?;
                entries.push(BufEntryExpr { to, label, payload });
                if !self.eat_punct('.') {
                    break;
                }
            }
        }
        let session = if self.eat_punct(';') {
            Some(self.session_type()?)
        } else {
            None
        };
        self.expect_punct('>')?;
        Ok(SbTypeExpr {
            buffer: Some(entries),
            session,
        })
    }

    // ---- values ----

    fn value(&mut self) -> PResult<Value> {
        let v = match self.peek().clone() {
            Tok::Int(s) => {
                let span = self.span();
                self.bump();
                let i = s
                    .parse::<i64>()
                    .map_err(|e| Diagnostic::error("BadNumber", span, format!("`{s}`: {e}")))?;
                Value::Basic(BasicValue::Int(i))
            }
            Tok::Real(r) => {
                self.bump();
                Value::Basic(BasicValue::Real(r))
            }
            Tok::Str(s) => {
                self.bump();
                Value::Basic(BasicValue::Str(s))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Value::Basic(BasicValue::Bool(s == "true"))
            }
            Tok::Punct('(') if self.at_punct_at(1, ')') => {
                self.bump();
                self.bump();
                Value::unit()
            }
            _ => {
                let x = self.ident("a value")?;
                if self.eat_punct('[') {
                    let role = self.role()?;
                    self.expect_punct(']')?;
                    Value::Endpoint(Endpoint { session: x, role })
                } else {
                    Value::Var(x)
                }
            }
        };
        Ok(v)
    }

    fn payload_value(&mut self) -> PResult<Value> {
        if !self.eat_punct('(') {
            return Ok(Value::unit());
        }
        if self.eat_punct(')') {
            return Ok(Value::unit());
        }
        let v = self.value()?;
        self.expect_punct(')')?;
        Ok(v)
    }

    // ---- processes ----

    pub fn process(&mut self) -> PResult<Process> {
        let mut left = self.choice()?;
        while self.eat_punct('|') {
            left = Process::par(left, self.choice()?);
        }
        Ok(left)
    }

    fn choice(&mut self) -> PResult<Process> {
        let mut left = self.prefix()?;
        while self.eat_punct('+') {
            left = Process::Choice(Box::new(left), Box::new(self.prefix()?));
        }
        Ok(left)
    }

    fn prefix(&mut self) -> PResult<Process> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Int(s) if s == "0" => {
                self.bump();
                return Ok(Process::Inaction);
            }
            Tok::Punct('(') => {
                self.bump();
                let p = self.process()?;
                self.expect_punct(')')?;
                return Ok(p);
            }
            _ => {}
        }
        if self.eat_kw("new") {
            let session = self.ident("a session name")?;
            self.expect_punct(':')?;
            self.expect_punct('{')?;
            let entries = self.sep_by('}', |p| {
                let role = p.role()?;
                p.expect_punct(':')?;
                Ok((role, p.sb_type()?, p.prev_span()))
            })?;
            let mut binding = BTreeMap::new();
            for (role, t, span) in entries {
                if binding.insert(role.clone(), t).is_some() {
                    return Err(Diagnostic::error(
                        "DuplicateRoleBinding",
                        span,
                        format!("role `{role}` is bound twice"),
                    ));
                }
            }
            let head = start.to(self.prev_span());
            self.expect_kw("in")?;
            let body = self.process()?;
            return Ok(Process::Restriction {
                session,
                binding,
                body: Box::new(body),
                span: head,
            });
        }
        if self.at_kw("def") {
            self.bump();
            let decl = self.decl(start)?;
            self.expect_kw("in")?;
            let body = self.process()?;
            return Ok(Process::Def {
                decl: Box::new(decl),
                body: Box::new(body),
            });
        }
        if self.at_name() && self.at_punct_at(1, '(') {
            let name = self.ident("a process name")?;
            self.expect_punct('(')?;
            let args = self.sep_by(')', |p| p.value())?;
            return Ok(Process::Call {
                name,
                args,
                span: start.to(self.prev_span()),
            });
        }
        if self.at_name() && self.at_punct_at(1, ':') {
            let session = self.ident("a session name")?;
            self.expect_punct(':')?;
            self.expect_punct('[')?;
            let queue = self.sep_by(']', |p| {
                p.expect_punct('(')?;
                let from = p.role()?;
                p.expect_punct(',')?;
                let to = p.role()?;
                p.expect_punct(')')?;
                p.expect_punct('!')?;
                let label = p.label()?;
                let payload = p.payload_value()?;
                Ok(Message {
                    from,
                    to,
                    label,
                    payload,
                })
            })?;
            return Ok(Process::Buffer {
                session,
                queue,
                span: start.to(self.prev_span()),
            });
        }
        if self.at_name() {
            let channel = self.value()?;
            if self.eat_punct('!') {
                let to = self.role()?;
                self.expect_punct('.')?;
                let label = self.label()?;
                let payload = self.payload_value()?;
                let span = start.to(self.prev_span());
                self.expect_punct('.')?;
                let cont = self.prefix()?;
                return Ok(Process::Select {
                    channel,
                    to,
                    label,
                    payload,
                    cont: Box::new(cont),
                    span,
                });
            }
            if self.eat_punct('&') {
                let span = start.to(self.prev_span());
                self.expect_punct('{')?;
                let mut arms = Vec::new();
                let mut timeout = None;
                loop {
                    if self.eat_kw("timeout") {
                        self.expect_punct('.')?;
                        timeout = Some(Box::new(self.process()?));
                        self.expect_punct('}')?;
                        break;
                    }
                    arms.push(self.branch_arm()?);
                    if self.eat_punct('}') {
                        break;
                    }
                    self.expect_punct(',')?;
                }
                return Ok(Process::Branch {
                    channel,
                    arms,
                    timeout,
                    span,
                });
            }
            return self.err("`!` or `&` after a channel");
        }
        if matches!(self.peek(), Tok::Int(_) | Tok::Real(_) | Tok::Str(_))
            || self.at_kw("true")
            || self.at_kw("false")
        {
            let v = self.value()?;
            let span = start.to(self.prev_span());
            if self.at_punct('!') || self.at_punct('&') {
                return Err(Diagnostic::error("BadChannel", span, format!("`{v}` is not a channel")));
            }
        }
        self.err("a process")
    }

    fn branch_arm(&mut self) -> PResult<BranchArm> {
        let start = self.span();
        let from = self.role()?;
        self.expect_punct('?')?;
        let label = self.label()?;
        let mut binder = None;
        let mut binder_ty = None;
        if self.eat_punct('(') && !self.eat_punct(')') {
            binder = Some(self.ident("a binder")?);
            if self.eat_punct(':') {
                binder_ty = Some(self.payload_type()?);
            }
            self.expect_punct(')')?;
        }
        let span = start.to(self.prev_span());
        self.expect_punct('.')?;
        let cont = self.process()?;
        Ok(BranchArm {
            from,
            label,
            binder,
            binder_ty,
            cont,
            span,
        })
    }
}
