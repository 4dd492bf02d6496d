use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use magpi_lts::{ExploreLimits, Explored, Model};
use serde::Serialize;

use crate::checks;
use crate::verdict::{Verdict, VerdictJson};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    Safety,
    Deadlock,
    Terminating,
    Live,
    Never,
    CommRf,
    Tcp,
    /// `bound_k`.
    Bound(usize),
    /// Minimal `k` up to the given probe.
    Bounded(usize),
}

impl Property {
    pub const DEFAULT: [Property; 5] = [
        Property::Safety,
        Property::Deadlock,
        Property::Terminating,
        Property::Live,
        Property::CommRf,
    ];

    pub fn name(&self) -> String {
        match self {
            Property::Safety => "safety".into(),
            Property::Deadlock => "deadlock".into(),
            Property::Terminating => "terminating".into(),
            Property::Live => "live".into(),
            Property::Never => "never".into(),
            Property::CommRf => "comm-rf".into(),
            Property::Tcp => "tcp".into(),
            Property::Bound(k) => format!("bound_{k}"),
            Property::Bounded(_) => "bounded".into(),
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Property {
    type Err = String;

    /// Names as accepted by `--props`; `bounded` probes up to 16.
    fn from_str(s: &str) -> Result<Property, String> {
        Ok(match s {
            "safety" => Property::Safety,
            "deadlock" => Property::Deadlock,
            "terminating" => Property::Terminating,
            "live" => Property::Live,
            "never" => Property::Never,
            "comm-rf" => Property::CommRf,
            "tcp" => Property::Tcp,
            "bounded" => Property::Bounded(16),
            _ => match s.strip_prefix("bound_").and_then(|k| k.parse().ok()) {
                Some(k) if k >= 1 => Property::Bound(k),
                _ => return Err(format!("unknown property `{s}`")),
            },
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    /// Summed over every exploration the suite ran.
    pub states: usize,
    pub edges: usize,
    /// Only filled in when timing is requested, so output stays reproducible.
    pub ms: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct PropertySuiteResult {
    pub properties: BTreeMap<String, Verdict>,
    pub min_bound: Option<usize>,
    pub stats: Stats,
}

#[derive(Serialize)]
struct SuiteJson<'a> {
    properties: BTreeMap<&'a str, VerdictJson>,
    #[serde(rename = "minBound", skip_serializing_if = "Option::is_none")]
    min_bound: Option<usize>,
    stats: &'a Stats,
}

impl PropertySuiteResult {
    /// 0 all hold, 1 some violated, 2 otherwise some inconclusive.
    pub fn worst(&self) -> u8 {
        let sev: Vec<u8> = self.properties.values().map(Verdict::severity).collect();
        if sev.contains(&1) {
            1
        } else {
            sev.into_iter().max().unwrap_or(0)
        }
    }

    /// `{properties:{name:{verdict,...}}, stats:{states,edges,ms}}`
    pub fn to_json(&self, model: &Model) -> String {
        let json = SuiteJson {
            properties: self
                .properties
                .iter()
                .map(|(k, v)| (k.as_str(), v.to_json(&model.graph)))
                .collect(),
            min_bound: self.min_bound,
            stats: &self.stats,
        };
        serde_json::to_string_pretty(&json).expect("suite serializes")
    }

    pub fn to_text(&self, model: &Model) -> String {
        let mut out = String::new();
        for (name, v) in &self.properties {
            out.push_str(&format!("{name}: {}", v.name()));
            if let Some(r) = v.reason() {
                out.push_str(&format!(" ({r})"));
            }
            if let Verdict::Inconclusive(kind) = v {
                out.push_str(&format!(" ({kind:?})"));
            }
            out.push('\n');
            if let Some(w) = v.witness() {
                for a in w {
                    out.push_str(&format!("    {}\n", a.render(&model.graph)));
                }
            }
        }
        if let Some(k) = self.min_bound {
            out.push_str(&format!("minimal bound: {k}\n"));
        }
        out.push_str(&format!("states: {}, edges: {}\n", self.stats.states, self.stats.edges));
        out
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SuiteOptions {
    pub limits: ExploreLimits,
    pub timing: bool,
}

/// Runs each requested property, sharing one exploration per relation.
pub fn verify_suite(model: &Model, props: &[Property], opts: &SuiteOptions) -> PropertySuiteResult {
    let start = Instant::now();
    let limits = &opts.limits;
    let mut stats = Stats::default();
    let mut count = |e: &Explored| {
        stats.states += e.lts.len();
        stats.edges += e.lts.edges.len();
    };
    let needs_main = props.iter().any(|p| {
        matches!(p, Property::Deadlock | Property::Terminating | Property::Live | Property::Never)
            || (*p == Property::Safety && !checks::static_safety(model))
    });
    let main = needs_main.then(|| model.explore(limits));
    if let Some(e) = &main {
        count(e);
    }
    let mut properties = BTreeMap::new();
    let mut min_bound = None;
    for p in props {
        let v = match p {
            Property::Safety => match &main {
                Some(e) if !checks::static_safety(model) => checks::safety(model, e, limits.mode),
                _ => Verdict::Holds,
            },
            Property::Deadlock => checks::deadlock_free(main.as_ref().expect("explored")),
            Property::Terminating => checks::terminating(main.as_ref().expect("explored")),
            Property::Live => checks::live(model, main.as_ref().expect("explored")),
            Property::Never => checks::never_terminating(main.as_ref().expect("explored")),
            Property::CommRf => {
                let e = model.fully_reliable().explore(limits);
                count(&e);
                checks::comm_safe(&e)
            }
            Property::Tcp => {
                let e = model.fully_reliable().explore(&checks::tcp_limits(limits));
                count(&e);
                checks::tcp_safety(model, &e)
            }
            Property::Bound(k) => {
                let e = model.explore(&checks::bound_limits(*k, limits));
                count(&e);
                checks::bound_k(&e)
            }
            Property::Bounded(k_max) => {
                let (v, k) = checks::check_bounded(model, *k_max, limits);
                min_bound = k;
                v
            }
        };
        properties.insert(p.name(), v);
    }
    if let (Some(t), Some(n)) = (properties.get("terminating"), properties.get("never")) {
        debug_assert!(!(t.holds() && n.holds()), "terminating and never-terminating both hold");
    }
    PropertySuiteResult {
        properties,
        min_bound,
        stats: Stats {
            ms: opts.timing.then(|| start.elapsed().as_millis() as u64),
            ..stats
        },
    }
}
