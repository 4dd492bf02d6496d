//! Indented layout. Emits the same token stream as the `Display` impls in
//! `magpi_core`, with line breaks inside braces; the parser is
//! whitespace-insensitive so both forms read back to the same tree.

use magpi_core::process::{CHOICE, PAR, PREFIX};
use magpi_core::{ArmExpr, BasicKind, PayloadTypeExpr, Process, SbTypeExpr, SessionTypeExpr, Value};

use crate::ast::ProtocolFile;

struct Out {
    buf: String,
    indent: usize,
}

impl Out {
    fn s(&mut self, s: &str) {
        self.buf.push_str(s);
    }

    fn nl(&mut self) {
        self.buf.push('\n');
        for _ in 0..self.indent {
            self.buf.push_str("  ");
        }
    }

    /// Items between `open` and `close`, one per line.
    fn block<T>(&mut self, open: &str, items: &[T], close: &str, mut item: impl FnMut(&mut Out, &T)) {
        self.s(open);
        self.indent += 1;
        for (i, x) in items.iter().enumerate() {
            self.nl();
            item(self, x);
            if i + 1 < items.len() {
                self.s(",");
            }
        }
        self.indent -= 1;
        self.nl();
        self.s(close);
    }
}

fn payload_suffix(t: &PayloadTypeExpr, out: &mut Out) {
    match t {
        PayloadTypeExpr::Basic(BasicKind::Unit) => out.s("()"),
        PayloadTypeExpr::Basic(k) => out.s(&format!("({k})")),
        PayloadTypeExpr::Session(s) => {
            out.s("(");
            session(s, out);
            out.s(")");
        }
    }
}

fn arm(a: &ArmExpr, op: char, out: &mut Out) {
    out.s(&format!("{}{op}{}", a.role, a.label));
    payload_suffix(&a.payload, out);
    out.s(".");
    session(&a.cont, out);
}

enum BranchItem<'a> {
    Arm(&'a ArmExpr),
    Timeout(&'a SessionTypeExpr),
}

fn session(t: &SessionTypeExpr, out: &mut Out) {
    match t {
        SessionTypeExpr::End => out.s("end"),
        SessionTypeExpr::Select { arms, .. } if arms.len() == 1 => arm(&arms[0], '!', out),
        SessionTypeExpr::Select { arms, .. } => out.block("+{", arms, "}", |o, a| arm(a, '!', o)),
        SessionTypeExpr::Branch { arms, timeout: None, .. } if arms.len() == 1 => arm(&arms[0], '?', out),
        SessionTypeExpr::Branch { arms, timeout, .. } => {
            let mut items: Vec<BranchItem> = arms.iter().map(BranchItem::Arm).collect();
            items.extend(timeout.as_deref().map(BranchItem::Timeout));
            out.block("&{", &items, "}", |o, x| match x {
                BranchItem::Arm(a) => arm(a, '?', o),
                BranchItem::Timeout(t) => {
                    o.s("timeout.");
                    session(t, o);
                }
            });
        }
        SessionTypeExpr::Rec { var, body, .. } => {
            out.s(&format!("rec {var}."));
            session(body, out);
        }
        SessionTypeExpr::Var(x, _) | SessionTypeExpr::Named(x, _) => out.s(x.as_str()),
    }
}

fn sb_type(t: &SbTypeExpr, out: &mut Out) {
    if let (None, Some(s)) = (&t.buffer, &t.session) {
        return session(s, out);
    }
    out.s("<");
    match t.buffer.as_deref() {
        None | Some([]) => out.s("eps"),
        Some(entries) => {
            let parts: Vec<String> = entries.iter().map(|e| e.to_string()).collect();
            out.s(&parts.join(" . "));
        }
    }
    if let Some(s) = &t.session {
        out.s("; ");
        session(s, out);
    }
    out.s(">");
}

fn payload_value(v: &Value, out: &mut Out) {
    match v {
        Value::Basic(magpi_core::BasicValue::Unit) => out.s("()"),
        v => out.s(&format!("({v})")),
    }
}

enum ProcItem<'a> {
    Arm(&'a magpi_core::BranchArm),
    Timeout(&'a Process),
}

fn operand(p: &Process, min: u8, last: bool, out: &mut Out) {
    if p.needs_parens(min, last) {
        out.s("(");
        process(p, out);
        out.s(")");
    } else {
        process(p, out);
    }
}

fn process(p: &Process, out: &mut Out) {
    match p {
        Process::Inaction => out.s("0"),
        Process::Restriction {
            session: s, binding, body, ..
        } => {
            out.s(&format!("new {s} : "));
            let items: Vec<_> = binding.iter().collect();
            out.block("{", &items, "}", |o, (r, t)| {
                o.s(&format!("{r}: "));
                sb_type(t, o);
            });
            out.s(" in");
            out.nl();
            process(body, out);
        }
        Process::Par(a, b) => {
            operand(a, PAR, false, out);
            out.nl();
            out.s("| ");
            operand(b, CHOICE, true, out);
        }
        Process::Choice(a, b) => {
            operand(a, CHOICE, false, out);
            out.s(" + ");
            operand(b, PREFIX, true, out);
        }
        Process::Select {
            channel,
            to,
            label,
            payload,
            cont,
            ..
        } => {
            out.s(&format!("{channel}!{to}.{label}"));
            payload_value(payload, out);
            out.s(".");
            operand(cont, PREFIX, true, out);
        }
        Process::Branch {
            channel,
            arms,
            timeout,
            ..
        } => {
            out.s(&format!("{channel} & "));
            let mut items: Vec<ProcItem> = arms.iter().map(ProcItem::Arm).collect();
            items.extend(timeout.as_deref().map(ProcItem::Timeout));
            out.block("{", &items, "}", |o, x| match x {
                ProcItem::Arm(a) => {
                    o.s(&format!("{}?{}(", a.from, a.label));
                    if let Some(b) = &a.binder {
                        o.s(b.as_str());
                        if let Some(t) = &a.binder_ty {
                            o.s(": ");
                            payload_type(t, o);
                        }
                    }
                    o.s(").");
                    process(&a.cont, o);
                }
                ProcItem::Timeout(t) => {
                    o.s("timeout.");
                    process(t, o);
                }
            });
        }
        Process::Def { decl, body } => {
            out.s("def ");
            decl_text(decl, out);
            out.s(" in");
            out.nl();
            process(body, out);
        }
        Process::Call { .. } | Process::Buffer { .. } => out.s(&p.to_string()),
    }
}

fn payload_type(t: &PayloadTypeExpr, out: &mut Out) {
    match t {
        PayloadTypeExpr::Basic(k) => out.s(k.keyword()),
        PayloadTypeExpr::Session(s) => session(s, out),
    }
}

fn decl_text(d: &magpi_core::ProcDecl, out: &mut Out) {
    out.s(&format!("{}(", d.name));
    for (i, (x, t)) in d.params.iter().enumerate() {
        if i > 0 {
            out.s(", ");
        }
        out.s(&format!("{x}: "));
        payload_type(t, out);
    }
    out.s(") =");
    out.indent += 1;
    out.nl();
    process(&d.body, out);
    out.indent -= 1;
}

fn with_out(f: impl FnOnce(&mut Out)) -> String {
    let mut out = Out {
        buf: String::new(),
        indent: 0,
    };
    f(&mut out);
    out.buf
}

pub fn pretty_session_type(t: &SessionTypeExpr) -> String {
    with_out(|o| session(t, o))
}

pub fn pretty_sb_type(t: &SbTypeExpr) -> String {
    with_out(|o| sb_type(t, o))
}

pub fn pretty_process(p: &Process) -> String {
    with_out(|o| process(p, o))
}

pub fn pretty_file(f: &ProtocolFile) -> String {
    with_out(|o| {
        o.s(&format!("protocol {}", f.name));
        o.nl();
        o.nl();
        let roles: Vec<&str> = f.roles.iter().map(|r| r.as_str()).collect();
        o.s(&format!("roles {}", roles.join(", ")));
        o.nl();
        o.nl();
        let entries: Vec<String> = f
            .roles
            .iter()
            .map(|r| {
                let set: Vec<String> = f.reliability.of(r).iter().map(|q| q.to_string()).collect();
                format!("{r}: {{{}}}", set.join(", "))
            })
            .collect();
        o.block("reliability {", &entries, "}", |o, e| o.s(e));
        for (name, def) in &f.type_defs {
            o.nl();
            o.nl();
            o.s(&format!("type {name} @ {} =", def.role));
            o.indent += 1;
            o.nl();
            session(&def.body, o);
            o.indent -= 1;
        }
        for d in &f.proc_defs {
            o.nl();
            o.nl();
            o.s("proc ");
            decl_text(d, o);
        }
        o.nl();
        o.nl();
        o.s("system");
        o.indent += 1;
        o.nl();
        process(&f.system, o);
        o.indent -= 1;
        o.s("\n");
    })
}
