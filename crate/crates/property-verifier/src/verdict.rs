use magpi_core::{TypeContext, TypeGraph};
use magpi_lts::{Action, ExceededKind, ExploreLimits, Model};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    /// `witness` leads from the initial context to a violating one.
    Violated { witness: Vec<Action>, reason: &'static str },
    Inconclusive(ExceededKind),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn violated(&self) -> bool {
        matches!(self, Verdict::Violated { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated { .. } => "violated",
            Verdict::Inconclusive(_) => "inconclusive",
        }
    }

    pub fn reason(&self) -> Option<&'static str> {
        match self {
            Verdict::Violated { reason, .. } => Some(reason),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<&[Action]> {
        match self {
            Verdict::Violated { witness, .. } => Some(witness),
            _ => None,
        }
    }

    /// 0 holds, 1 violated, 2 inconclusive.
    pub fn severity(&self) -> u8 {
        match self {
            Verdict::Holds => 0,
            Verdict::Violated { .. } => 1,
            Verdict::Inconclusive(_) => 2,
        }
    }

    pub fn to_json(&self, g: &TypeGraph) -> VerdictJson {
        let (limit, bound) = match self {
            Verdict::Inconclusive(ExceededKind::MaxStates(n)) => (Some("maxStates"), Some(*n)),
            Verdict::Inconclusive(ExceededKind::BufferLen(k)) => (Some("bufferLen"), Some(*k)),
            _ => (None, None),
        };
        VerdictJson {
            verdict: self.name(),
            reason: self.reason(),
            witness: self.witness().map(|w| w.iter().map(|a| a.render(g)).collect()),
            limit,
            bound,
        }
    }
}

/// `{verdict, reason?, witness?, limit?, bound?}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerdictJson {
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<usize>,
}

/// Follows `witness` from the initial context; `None` if some action is not
/// enabled where it is taken.
pub fn replay(model: &Model, limits: &ExploreLimits, witness: &[Action]) -> Option<TypeContext> {
    let mut at = model.canonical(&model.initial, limits.mode);
    for a in witness {
        at = model
            .transitions(&at, limits)
            .into_iter()
            .find(|(b, _)| b == a)
            .map(|(_, next)| next)?;
    }
    Some(at)
}
