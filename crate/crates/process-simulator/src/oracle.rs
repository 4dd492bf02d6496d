//! Brute-force expansion of every enabled step, for cross-checking runs
//! and type-level verdicts on small inputs.

use std::collections::{BTreeMap, HashSet};

use crate::config::Config;
use crate::engine::Simulator;

#[derive(Clone, Debug)]
pub struct Expansion {
    /// Quiescent configurations reached within the depth, keyed by
    /// [`Config::key`].
    pub terminals: BTreeMap<String, Config>,
    /// Configurations still enabled at the depth bound.
    pub frontier: usize,
    /// Distinct configurations visited.
    pub visited: usize,
}

impl Simulator {
    /// All configurations reachable in at most `depth` steps; `depth == 0`
    /// yields `c0` alone as the terminal set.
    pub fn exhaustive_small_step_oracle(&mut self, c0: &Config, depth: usize) -> Expansion {
        let mode = self.mode();
        let mut seen: HashSet<String> = HashSet::from([c0.key(mode)]);
        let mut layer = vec![c0.clone()];
        let mut terminals = BTreeMap::new();
        if depth == 0 {
            terminals.insert(c0.key(mode), c0.clone());
            return Expansion {
                terminals,
                frontier: 0,
                visited: 1,
            };
        }
        let mut frontier = 0;
        for d in 0..=depth {
            let mut next = Vec::new();
            for c in layer {
                let steps = self.enabled_steps(&c);
                if steps.is_empty() {
                    terminals.insert(c.key(mode), c);
                    continue;
                }
                if d == depth {
                    frontier += 1;
                    continue;
                }
                for s in steps {
                    if seen.insert(s.next.key(mode)) {
                        next.push(s.next);
                    }
                }
            }
            layer = next;
        }
        Expansion {
            terminals,
            frontier,
            visited: seen.len(),
        }
    }

    /// Whether every state of `t` is reachable in the expansion's step
    /// relation, checked step by step.
    pub fn replays(&mut self, states: &[Config]) -> bool {
        let mode = self.mode();
        states.windows(2).all(|w| {
            let k = w[1].key(mode);
            self.enabled_steps(&w[0]).iter().any(|s| s.next.key(mode) == k)
        })
    }
}
