use std::collections::BTreeMap;

use crate::name::Name;
use crate::types::{FaceId, SimTime};

/// One downstream requester on a pending entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Downstream {
    pub face: FaceId,
    pub nonces: Vec<u64>,
    /// Data messages this face is still owed.
    pub owed: u32,
}

/// Pending Interest state for one name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PitEntry {
    pub name: Name,
    pub downstream: Vec<Downstream>,
    pub expiry: SimTime,
}

impl PitEntry {
    /// Data messages the entry still expects: the largest amount owed to any
    /// downstream face.
    pub fn remaining(&self) -> u32 {
        self.downstream.iter().map(|d| d.owed).max().unwrap_or(0)
    }

    pub fn is_live(&self, now: SimTime) -> bool {
        now <= self.expiry && self.remaining() > 0
    }

    pub fn has_nonce(&self, nonce: u64) -> bool {
        self.downstream.iter().any(|d| d.nonces.contains(&nonce))
    }

    pub fn faces(&self) -> impl Iterator<Item = FaceId> + '_ {
        self.downstream.iter().map(|d| d.face)
    }

    /// Records a requester, raising what its face is owed to `solicit`.
    pub fn add_downstream(&mut self, face: FaceId, nonce: u64, solicit: u32) {
        match self.downstream.iter_mut().find(|d| d.face == face) {
            Some(d) => {
                if !d.nonces.contains(&nonce) {
                    d.nonces.push(nonce);
                }
                d.owed = d.owed.max(solicit);
            }
            None => self.downstream.push(Downstream {
                face,
                nonces: vec![nonce],
                owed: solicit,
            }),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Pit {
    entries: BTreeMap<Name, PitEntry>,
}

impl Pit {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &Name) -> Option<&PitEntry> {
        self.entries.get(name)
    }

    pub fn get_mut(&mut self, name: &Name) -> Option<&mut PitEntry> {
        self.entries.get_mut(name)
    }

    pub fn insert(&mut self, entry: PitEntry) {
        self.entries.insert(entry.name.clone(), entry);
    }

    pub fn remove(&mut self, name: &Name) -> Option<PitEntry> {
        self.entries.remove(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PitEntry> {
        self.entries.values()
    }

    /// Drops entries with `expiry < now`, returning how many were removed.
    pub fn expire(&mut self, now: SimTime) -> usize {
        let before = self.entries.len();
        self.entries.retain(|_, e| e.expiry >= now);
        before - self.entries.len()
    }

    pub fn next_expiry(&self) -> Option<SimTime> {
        self.entries.values().map(|e| e.expiry).min()
    }
}
