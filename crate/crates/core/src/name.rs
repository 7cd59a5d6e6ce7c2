//! Hierarchical names shared by the forwarding plane and the resource model.
//!
//! A name is a non-empty sequence of components written as a `/`-separated
//! string, e.g. `Gscl1/applications/meter_app/containers/meter_data`. A single
//! leading `/` is accepted and dropped, so `/a/b` and `a/b` are the same name.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const SEPARATOR: char = '/';

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("name has no components")]
    EmptyName,
    #[error("name contains an empty component: {0:?}")]
    EmptyComponent(String),
    #[error("component contains a path separator: {0:?}")]
    SeparatorInComponent(String),
}

/// One label of a [`Name`]. Never empty, never contains `/`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NameComponent(String);

impl NameComponent {
    pub fn new(label: impl Into<String>) -> Result<Self, NameError> {
        let label = label.into();
        if label.is_empty() {
            return Err(NameError::EmptyComponent(label));
        }
        if label.contains(SEPARATOR) {
            return Err(NameError::SeparatorInComponent(label));
        }
        Ok(Self(label))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for NameComponent {
    type Error = NameError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<NameComponent> for String {
    fn from(c: NameComponent) -> Self {
        c.0
    }
}

impl fmt::Display for NameComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A hierarchical name. Ordered lexicographically by component so it can key
/// ordered tables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Name {
    components: Vec<NameComponent>,
}

impl Name {
    /// Parses the textual form. See the module docs for the accepted syntax.
    pub fn parse(text: &str) -> Result<Self, NameError> {
        let body = text.strip_prefix(SEPARATOR).unwrap_or(text);
        if body.is_empty() {
            return Err(NameError::EmptyName);
        }
        let components = body
            .split(SEPARATOR)
            .map(|segment| {
                if segment.is_empty() {
                    Err(NameError::EmptyComponent(text.to_string()))
                } else {
                    Ok(NameComponent(segment.to_string()))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { components })
    }

    pub fn from_components(components: Vec<NameComponent>) -> Result<Self, NameError> {
        if components.is_empty() {
            return Err(NameError::EmptyName);
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[NameComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn first(&self) -> &NameComponent {
        &self.components[0]
    }

    pub fn last(&self) -> &NameComponent {
        &self.components[self.components.len() - 1]
    }

    /// True iff `self` is a leading subsequence of `other` (reflexive).
    pub fn is_prefix_of(&self, other: &Name) -> bool {
        self.components.len() <= other.components.len()
            && self.components == other.components[..self.components.len()]
    }

    /// Returns `self` extended by one component.
    pub fn child(&self, label: &str) -> Result<Name, NameError> {
        let mut components = self.components.clone();
        components.push(NameComponent::new(label)?);
        Ok(Self { components })
    }

    pub fn join(&self, suffix: &Name) -> Name {
        let mut components = self.components.clone();
        components.extend(suffix.components.iter().cloned());
        Self { components }
    }

    /// The name truncated to its first `len` components, if `len >= 1`.
    pub fn prefix(&self, len: usize) -> Option<Name> {
        (1..=self.components.len()).contains(&len).then(|| Self {
            components: self.components[..len].to_vec(),
        })
    }

    /// Components of `self` after `prefix`, or `None` if `prefix` does not match.
    pub fn strip_prefix<'a>(&'a self, prefix: &Name) -> Option<&'a [NameComponent]> {
        prefix
            .is_prefix_of(self)
            .then(|| &self.components[prefix.components.len()..])
    }
}

impl FromStr for Name {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl TryFrom<String> for Name {
    type Error = NameError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::parse(&value)
    }
}

impl From<Name> for String {
    fn from(n: Name) -> Self {
        n.to_string()
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            f.write_str(c.as_str())?;
        }
        Ok(())
    }
}

/// Free-function form of [`Name::parse`].
pub fn parse_name(text: &str) -> Result<Name, NameError> {
    Name::parse(text)
}

/// Free-function form of `name.to_string()`.
pub fn name_to_text(name: &Name) -> String {
    name.to_string()
}

pub fn is_prefix(prefix: &Name, name: &Name) -> bool {
    prefix.is_prefix_of(name)
}

/// Component trie keyed by name prefixes. Holds at most one value per exact
/// prefix; lookups return the longest stored prefix of the query.
#[derive(Debug, Clone)]
pub struct PrefixTable<V> {
    root: TrieNode<V>,
    len: usize,
}

#[derive(Debug, Clone)]
struct TrieNode<V> {
    value: Option<(Name, V)>,
    children: BTreeMap<NameComponent, TrieNode<V>>,
}

impl<V> Default for TrieNode<V> {
    fn default() -> Self {
        Self {
            value: None,
            children: BTreeMap::new(),
        }
    }
}

impl<V> Default for PrefixTable<V> {
    fn default() -> Self {
        Self::new()
    }
}

impl<V> PrefixTable<V> {
    pub fn new() -> Self {
        Self {
            root: TrieNode::default(),
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Stores `value` under `prefix`, returning the value it replaced.
    pub fn insert(&mut self, prefix: Name, value: V) -> Option<V> {
        let mut node = &mut self.root;
        for c in prefix.components() {
            node = node.children.entry(c.clone()).or_default();
        }
        let old = node.value.replace((prefix, value)).map(|(_, v)| v);
        if old.is_none() {
            self.len += 1;
        }
        old
    }

    pub fn get(&self, prefix: &Name) -> Option<&V> {
        self.node(prefix)?.value.as_ref().map(|(_, v)| v)
    }

    pub fn get_mut(&mut self, prefix: &Name) -> Option<&mut V> {
        let mut node = &mut self.root;
        for c in prefix.components() {
            node = node.children.get_mut(c)?;
        }
        node.value.as_mut().map(|(_, v)| v)
    }

    /// Returns the entry for `prefix`, inserting `default()` if absent.
    pub fn get_or_insert_with(&mut self, prefix: &Name, default: impl FnOnce() -> V) -> &mut V {
        let mut node = &mut self.root;
        for c in prefix.components() {
            node = node.children.entry(c.clone()).or_default();
        }
        if node.value.is_none() {
            node.value = Some((prefix.clone(), default()));
            self.len += 1;
        }
        &mut node.value.as_mut().expect("value was just set").1
    }

    pub fn remove(&mut self, prefix: &Name) -> Option<V> {
        let mut node = &mut self.root;
        for c in prefix.components() {
            node = node.children.get_mut(c)?;
        }
        let old = node.value.take().map(|(_, v)| v);
        if old.is_some() {
            self.len -= 1;
        }
        old
    }

    /// The stored entry whose prefix matches `name` on the most components.
    pub fn longest_prefix_match(&self, name: &Name) -> Option<(&Name, &V)> {
        let mut best = None;
        let mut node = &self.root;
        for c in name.components() {
            match node.children.get(c) {
                Some(child) => node = child,
                None => break,
            }
            if let Some((p, v)) = &node.value {
                best = Some((p, v));
            }
        }
        best
    }

    /// Entries in lexicographic prefix order.
    pub fn iter(&self) -> impl Iterator<Item = (&Name, &V)> {
        let mut out = Vec::with_capacity(self.len);
        collect(&self.root, &mut out);
        out.into_iter()
    }

    fn node(&self, prefix: &Name) -> Option<&TrieNode<V>> {
        let mut node = &self.root;
        for c in prefix.components() {
            node = node.children.get(c)?;
        }
        Some(node)
    }
}

fn collect<'a, V>(node: &'a TrieNode<V>, out: &mut Vec<(&'a Name, &'a V)>) {
    if let Some((p, v)) = &node.value {
        out.push((p, v));
    }
    for child in node.children.values() {
        collect(child, out);
    }
}

/// Free-function form of [`PrefixTable::longest_prefix_match`].
pub fn longest_prefix_match<'a, V>(table: &'a PrefixTable<V>, name: &Name) -> Option<(&'a Name, &'a V)> {
    table.longest_prefix_match(name)
}
