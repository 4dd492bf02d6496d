//! Seeded runs and their JSON-lines traces.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use magpi_core::Span;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::engine::{Rule, Simulator, Step, StepClass};
use crate::monitor::{monitor_corollaries, MonitorViolation};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub step: usize,
    pub rule: Rule,
    pub span: Span,
    pub detail: String,
    /// Entries buffered after the step, over all sessions.
    pub buffered: usize,
    /// SHA-256 of the buffers after the step, in queue order.
    pub digest: String,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub seed: u64,
    pub events: Vec<TraceEvent>,
    /// The initial configuration followed by one per event.
    pub states: Vec<Config>,
    /// No step was enabled at the end.
    pub quiescent: bool,
    /// Quiescent but not `≡ 0` (frozen threads aside).
    pub stuck: bool,
    pub inaction: bool,
    pub monitors: Vec<MonitorViolation>,
    pub terminal: String,
}

impl Trace {
    pub fn terminal(&self) -> &Config {
        self.states.last().expect("a trace has its initial state")
    }

    /// One event per line, then a summary line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serializes"));
            out.push('\n');
        }
        let summary = serde_json::json!({
            "seed": self.seed,
            "steps": self.events.len(),
            "quiescent": self.quiescent,
            "stuck": self.stuck,
            "inaction": self.inaction,
            "terminal": self.terminal,
            "monitors": self.monitors,
        });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }
}

pub fn buffer_digest(c: &Config) -> String {
    let mut h = Sha256::new();
    for s in &c.sessions {
        h.update(s.name.as_str().as_bytes());
        h.update(b":[");
        for m in s.queue.iter().flatten() {
            h.update(m.to_string().as_bytes());
            h.update(b";");
        }
        h.update(b"]\n");
    }
    let mut hex = String::new();
    for b in h.finalize().iter() {
        let _ = write!(hex, "{b:02x}");
    }
    hex
}

/// Forced drops first. Otherwise each thread counts once and each droppable
/// entry by its loss probability; inside a thread that could both receive
/// and time out, the timeout is taken with the delay bias.
fn choose(steps: &[Step], delay_bias: f64, rng: &mut ChaCha8Rng) -> usize {
    if let Some(k) = steps.iter().position(|s| matches!(s.class, StepClass::Drop { forced: true, .. })) {
        return k;
    }
    let mut threads: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (k, s) in steps.iter().enumerate() {
        match (s.class, s.thread) {
            (StepClass::Drop { weight, .. }, _) => groups.push((weight, vec![k])),
            (_, Some(t)) => threads.entry(t).or_default().push(k),
            (_, None) => groups.push((1.0, vec![k])),
        }
    }
    groups.extend(threads.into_values().map(|ks| (1.0, ks)));
    let total: f64 = groups.iter().map(|g| g.0).sum();
    let mut x = rng.gen::<f64>() * total;
    let mut pick = &groups[groups.len() - 1].1;
    for (w, ks) in &groups {
        if x < *w {
            pick = ks;
            break;
        }
        x -= w;
    }
    let delay = pick.iter().copied().find(|&k| steps[k].class == StepClass::Delay);
    let rest: Vec<usize> = pick.iter().copied().filter(|&k| steps[k].class != StepClass::Delay).collect();
    match delay {
        Some(d) if rest.is_empty() || rng.gen::<f64>() < delay_bias => d,
        _ => rest[rng.gen_range(0..rest.len())],
    }
}

impl Simulator {
    /// Up to `max_steps` scheduled steps from `c0`; deterministic in `seed`.
    pub fn run(&mut self, c0: &Config, seed: u64, max_steps: usize) -> Trace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut states = vec![c0.clone()];
        let mut events = Vec::new();
        let mut quiescent = false;
        let delay_bias = self.scenario.delay_bias;
        while events.len() < max_steps {
            let cur = states.last().expect("nonempty");
            let mut steps = self.enabled_steps(cur);
            if steps.is_empty() {
                quiescent = true;
                break;
            }
            let k = choose(&steps, delay_bias, &mut rng);
            let step = steps.swap_remove(k);
            events.push(TraceEvent {
                step: events.len() + 1,
                rule: step.rule,
                span: step.span,
                detail: step.detail,
                buffered: step.next.buffered(),
                digest: buffer_digest(&step.next),
            });
            states.push(step.next);
        }
        if !quiescent {
            quiescent = self.enabled_steps(states.last().expect("nonempty")).is_empty();
        }
        let terminal = states.last().expect("nonempty");
        let inaction = self.is_inaction(terminal);
        let mut t = Trace {
            seed,
            events,
            quiescent,
            stuck: quiescent && !inaction,
            inaction,
            monitors: Vec::new(),
            terminal: self.process(terminal).to_string(),
            states,
        };
        t.monitors = monitor_corollaries(&t, &self.reliability);
        t
    }
}
