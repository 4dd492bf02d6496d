use std::collections::{BTreeMap, BTreeSet};

use crate::names::Role;

/// `R(p)`: the roles whose communication with `p` never fails, from `p`'s
/// point of view. Roles without an entry have the empty set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Reliability {
    sets: BTreeMap<Role, BTreeSet<Role>>,
}

impl Reliability {
    pub fn new() -> Reliability {
        Reliability::default()
    }

    /// Every role reliable for every other role (`R_F`).
    pub fn full<'a>(roles: impl IntoIterator<Item = &'a Role>) -> Reliability {
        let all: BTreeSet<Role> = roles.into_iter().cloned().collect();
        let sets = all
            .iter()
            .map(|p| (p.clone(), all.iter().filter(|q| *q != p).cloned().collect()))
            .collect();
        Reliability { sets }
    }

    /// Sets `R(p)`. `p` itself is dropped from the set.
    pub fn set(&mut self, p: Role, reliable: impl IntoIterator<Item = Role>) {
        let set = reliable.into_iter().filter(|q| *q != p).collect();
        self.sets.insert(p, set);
    }

    pub fn of(&self, p: &Role) -> BTreeSet<Role> {
        self.sets.get(p).cloned().unwrap_or_default()
    }

    /// `q ∈ R(p)`
    pub fn reliable(&self, p: &Role, q: &Role) -> bool {
        self.sets.get(p).is_some_and(|s| s.contains(q))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Role, &BTreeSet<Role>)> {
        self.sets.iter()
    }
}
