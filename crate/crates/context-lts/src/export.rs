//! DOT and JSON serializations of an explored graph.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use magpi_core::TypeGraph;
use serde::{Deserialize, Serialize};

use crate::explore::LtsGraph;
use crate::model::{Action, Model};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateJson {
    pub id: usize,
    pub ctx: String,
    pub stuck: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ActionJson {
    Send {
        session: String,
        from: String,
        to: String,
        label: String,
        payload: String,
    },
    Com {
        session: String,
        from: String,
        to: String,
        label: String,
    },
    Timeout {
        session: String,
        role: String,
    },
}

impl ActionJson {
    pub fn new(a: &Action, g: &TypeGraph) -> ActionJson {
        match a {
            Action::Send {
                session,
                from,
                to,
                label,
                payload,
            } => ActionJson::Send {
                session: session.to_string(),
                from: from.to_string(),
                to: to.to_string(),
                label: label.to_string(),
                payload: g.render_payload(*payload),
            },
            Action::Com {
                session,
                from,
                to,
                label,
            } => ActionJson::Com {
                session: session.to_string(),
                from: from.to_string(),
                to: to.to_string(),
                label: label.to_string(),
            },
            Action::Timeout { session, role } => ActionJson::Timeout {
                session: session.to_string(),
                role: role.to_string(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub from: usize,
    pub action: ActionJson,
    pub to: usize,
}

/// `{states:[{id,ctx,stuck}], edges:[{from,action,to}], initial}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LtsJson {
    pub states: Vec<StateJson>,
    pub edges: Vec<EdgeJson>,
    pub initial: usize,
}

impl LtsJson {
    pub fn new(model: &Model, lts: &LtsGraph) -> LtsJson {
        LtsJson {
            states: lts
                .states
                .iter()
                .enumerate()
                .map(|(id, ctx)| StateJson {
                    id,
                    ctx: model.render(ctx),
                    stuck: lts.flags[id].stuck,
                })
                .collect(),
            edges: lts
                .edges
                .iter()
                .map(|e| EdgeJson {
                    from: e.from,
                    action: ActionJson::new(&e.action, &model.graph),
                    to: e.to,
                })
                .collect(),
            initial: LtsGraph::INITIAL,
        }
    }

    pub fn parse(text: &str) -> Result<LtsJson, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Renderings of canonical contexts are injective, so two exports are
    /// isomorphic iff they agree after replacing ids by state labels.
    pub fn isomorphic(&self, other: &LtsJson) -> bool {
        type Labelled<'a> = (BTreeSet<(&'a str, bool)>, BTreeSet<(&'a str, &'a ActionJson, &'a str)>, Option<&'a str>);
        fn labelled(j: &LtsJson) -> Option<Labelled<'_>> {
            let name = |id: usize| j.states.iter().find(|s| s.id == id).map(|s| s.ctx.as_str());
            let states = j.states.iter().map(|s| (s.ctx.as_str(), s.stuck)).collect();
            let edges = j
                .edges
                .iter()
                .map(|e| Some((name(e.from)?, &e.action, name(e.to)?)))
                .collect::<Option<_>>()?;
            Some((states, edges, name(j.initial)))
        }
        self.states.len() == other.states.len()
            && self.edges.len() == other.edges.len()
            && matches!((labelled(self), labelled(other)), (Some(a), Some(b)) if a == b)
    }
}

pub fn export_json(model: &Model, lts: &LtsGraph) -> String {
    serde_json::to_string_pretty(&LtsJson::new(model, lts)).expect("lts serializes")
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn export_dot(model: &Model, lts: &LtsGraph) -> String {
    let mut out = String::from("digraph lts {\n");
    for (id, ctx) in lts.states.iter().enumerate() {
        let shape = if lts.flags[id].stuck { ", shape=box" } else { "" };
        let _ = writeln!(out, "  n{id} [label=\"{}\"{shape}];", dot_escape(&model.render(ctx)));
    }
    for e in &lts.edges {
        let _ = writeln!(
            out,
            "  n{} -> n{} [label=\"{}\"];",
            e.from,
            e.to,
            dot_escape(&e.action.render(&model.graph))
        );
    }
    out.push_str("}\n");
    out
}
