use magpi_core::{Ident, ProcDecl, Process, Reliability, Role, Span, TypeDefs};

/// A checked protocol file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolFile {
    pub name: Ident,
    pub roles: Vec<Role>,
    /// Total on `roles`.
    pub reliability: Reliability,
    pub type_defs: TypeDefs,
    pub proc_defs: Vec<ProcDecl>,
    pub system: Process,
}

impl ProtocolFile {
    pub fn proc_def(&self, name: &Ident) -> Option<&ProcDecl> {
        self.proc_defs.iter().find(|d| &d.name == name)
    }
}

/// The file as written, before semantic checks.
#[derive(Clone, Debug)]
pub(crate) struct RawFile {
    pub name: Ident,
    pub roles: Vec<(Role, Span)>,
    pub reliability: Vec<RawReliability>,
    pub type_defs: Vec<(Ident, magpi_core::TypeDef)>,
    pub proc_defs: Vec<ProcDecl>,
    pub system: Process,
}

#[derive(Clone, Debug)]
pub(crate) struct RawReliability {
    pub role: Role,
    pub span: Span,
    pub reliable: Vec<(Role, Span)>,
}
