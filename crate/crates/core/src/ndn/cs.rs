use std::collections::{BTreeMap, HashMap};

use crate::name::Name;
use crate::types::SimTime;

use super::packet::Data;

#[derive(Debug, Clone)]
struct CsEntry {
    data: Data,
    inserted: SimTime,
    recency: u64,
}

/// Bounded LRU cache of Data packets with per-item freshness.
///
/// An entry inserted at `t` with freshness `f` is usable while `now <= t + f`.
/// Stale entries are never returned and are dropped when looked up. Data with
/// zero freshness is not cached.
#[derive(Debug, Clone)]
pub struct ContentStore {
    capacity: usize,
    entries: HashMap<Name, CsEntry>,
    by_recency: BTreeMap<u64, Name>,
    tick: u64,
}

impl ContentStore {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            entries: HashMap::new(),
            by_recency: BTreeMap::new(),
            tick: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, name: &Name) -> bool {
        self.entries.contains_key(name)
    }

    /// Returns a fresh cached copy and marks it most recently used.
    pub fn lookup(&mut self, name: &Name, now: SimTime) -> Option<Data> {
        let entry = self.entries.get(name)?;
        if entry.inserted.saturating_add(entry.data.freshness) < now {
            let recency = entry.recency;
            self.entries.remove(name);
            self.by_recency.remove(&recency);
            return None;
        }
        let old = entry.recency;
        let new = self.next_tick();
        let entry = self.entries.get_mut(name).expect("entry present");
        entry.recency = new;
        self.by_recency.remove(&old);
        self.by_recency.insert(new, name.clone());
        Some(entry.data.clone())
    }

    pub fn insert(&mut self, data: Data, now: SimTime) {
        if self.capacity == 0 || data.freshness == 0 {
            return;
        }
        let recency = self.next_tick();
        let name = data.name.clone();
        if let Some(old) = self.entries.insert(
            name.clone(),
            CsEntry {
                data,
                inserted: now,
                recency,
            },
        ) {
            self.by_recency.remove(&old.recency);
        }
        self.by_recency.insert(recency, name);
        while self.entries.len() > self.capacity {
            let (_, victim) = self.by_recency.pop_first().expect("non-empty recency index");
            self.entries.remove(&victim);
        }
    }

    fn next_tick(&mut self) -> u64 {
        self.tick += 1;
        self.tick
    }
}
