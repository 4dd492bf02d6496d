//! Failure scenarios: per-channel loss, crashes, link failures, partitions,
//! message delay and the reorder congruence.

use std::collections::{BTreeMap, BTreeSet};

use magpi_core::{CongruenceMode, Role};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crash {
    pub role: String,
    pub at: usize,
}

/// An unordered pair of roles whose messages are lost from `at` onward.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub a: String,
    pub b: String,
    pub at: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub at: usize,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FailureScenario {
    /// Keyed `"p->q"`.
    #[serde(default)]
    pub drop: BTreeMap<String, f64>,
    #[serde(default)]
    pub crash: Vec<Crash>,
    #[serde(default)]
    pub links: Vec<Link>,
    #[serde(default)]
    pub partition: Vec<Partition>,
    #[serde(default)]
    pub delay_bias: f64,
    #[serde(default)]
    pub reorder: CongruenceMode,
    /// A crashed role also stops reducing, not just loses its messages.
    #[serde(default = "yes")]
    pub freeze_crashed: bool,
}

impl Default for FailureScenario {
    fn default() -> FailureScenario {
        FailureScenario {
            drop: BTreeMap::new(),
            crash: Vec::new(),
            links: Vec::new(),
            partition: Vec::new(),
            delay_bias: 0.0,
            reorder: CongruenceMode::TotalReorder,
            freeze_crashed: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("scenario is not valid JSON: {0}")]
    Json(String),
    #[error("drop key `{0}` is not of the form \"p->q\"")]
    BadPair(String),
    #[error("probability {field} = {value} is outside [0, 1]")]
    Probability { field: String, value: String },
    #[error("role `{0}` is not declared")]
    UnknownRole(String),
}

impl FailureScenario {
    pub fn failure_free() -> FailureScenario {
        FailureScenario::default()
    }

    pub fn from_json(src: &str) -> Result<FailureScenario, ScenarioError> {
        serde_json::from_str(src).map_err(|e| ScenarioError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Checks probabilities and that every named role is among `roles`.
    pub fn validate<'a>(&self, roles: impl IntoIterator<Item = &'a Role>) -> Result<(), ScenarioError> {
        let roles: BTreeSet<&str> = roles.into_iter().map(|r| r.as_str()).collect();
        let known = |r: &str| {
            if roles.contains(r) {
                Ok(())
            } else {
                Err(ScenarioError::UnknownRole(r.to_string()))
            }
        };
        let prob = |field: String, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(ScenarioError::Probability {
                    field,
                    value: v.to_string(),
                })
            }
        };
        for (k, v) in &self.drop {
            let (p, q) = split_pair(k).ok_or_else(|| ScenarioError::BadPair(k.clone()))?;
            known(p)?;
            known(q)?;
            prob(format!("drop[{k}]"), *v)?;
        }
        prob("delayBias".into(), self.delay_bias)?;
        for c in &self.crash {
            known(&c.role)?;
        }
        for l in &self.links {
            known(&l.a)?;
            known(&l.b)?;
        }
        for part in &self.partition {
            for r in part.a.iter().chain(&part.b) {
                known(r)?;
            }
        }
        Ok(())
    }

    pub fn drop_prob(&self, from: &Role, to: &Role) -> f64 {
        self.drop.get(&format!("{from}->{to}")).copied().unwrap_or(0.0)
    }

    pub fn crashed(&self, role: &Role, step: usize) -> bool {
        self.crash.iter().any(|c| c.role == role.as_str() && c.at <= step)
    }

    pub fn frozen(&self, role: &Role, step: usize) -> bool {
        self.freeze_crashed && self.crashed(role, step)
    }

    /// Failed links, with partitions compiled to every pair across the cut.
    pub fn link_down(&self, from: &Role, to: &Role, step: usize) -> bool {
        let pair = |a: &str, b: &str| (a == from.as_str() && b == to.as_str()) || (a == to.as_str() && b == from.as_str());
        self.links.iter().any(|l| l.at <= step && pair(&l.a, &l.b))
            || self
                .partition
                .iter()
                .any(|p| p.at <= step && p.a.iter().any(|a| p.b.iter().any(|b| pair(a, b))))
    }

    /// Entries on `from -> to` that must be lost: crashed sender, failed
    /// link, or certain loss.
    pub fn forced_drop(&self, from: &Role, to: &Role, step: usize) -> bool {
        self.crashed(from, step) || self.link_down(from, to, step) || self.drop_prob(from, to) >= 1.0
    }
}

fn split_pair(k: &str) -> Option<(&str, &str)> {
    let (p, q) = k.split_once("->")?;
    let (p, q) = (p.trim(), q.trim());
    (!p.is_empty() && !q.is_empty()).then_some((p, q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_shape() {
        let s = FailureScenario::from_json(
            r#"{"drop":{"p->q":0.3},"crash":[{"role":"q","at":0}],"links":[{"a":"p","b":"q","at":5}],
               "partition":[{"a":["p"],"b":["q","r"],"at":2}],"delayBias":0.1,"reorder":"tcp"}"#,
        )
        .unwrap();
        let (p, q, r) = (Role::new("p"), Role::new("q"), Role::new("r"));
        assert_eq!(s.drop_prob(&p, &q), 0.3);
        assert_eq!(s.drop_prob(&q, &p), 0.0);
        assert!(s.crashed(&q, 0) && s.freeze_crashed);
        assert!(!s.link_down(&q, &p, 1) && s.link_down(&r, &p, 2) && s.link_down(&q, &p, 5));
        assert_eq!(s.reorder, CongruenceMode::TcpFifo);
        assert_eq!(FailureScenario::from_json(&s.to_json()).unwrap(), s);
        s.validate([&p, &q, &r]).unwrap();
        assert_eq!(s.validate([&p, &q]), Err(ScenarioError::UnknownRole("r".into())));
    }

    #[test]
    fn rejects_bad_values() {
        let s = FailureScenario::from_json(r#"{"drop":{"p->q":1.5}}"#).unwrap();
        assert!(matches!(s.validate([&Role::new("p"), &Role::new("q")]), Err(ScenarioError::Probability { .. })));
        let s = FailureScenario::from_json(r#"{"drop":{"pq":0.5}}"#).unwrap();
        assert!(matches!(s.validate([]), Err(ScenarioError::BadPair(_))));
        assert!(FailureScenario::from_json(r#"{"dorp":{}}"#).is_err());
    }
}
