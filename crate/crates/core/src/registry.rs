//! Name-keyed registry of interchangeable strategies.
//!
//! Filters, responders, renderers and post-hoc tests are all trait objects
//! registered under a short name and looked up at runtime from config or
//! command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Maps names to shared trait objects.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<String, Arc<T>>,
}

impl<T: ?Sized> Registry<T> {
    /// Creates an empty registry; `kind` is only used in error messages.
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
        }
    }

    /// Registers `item` under `name`, replacing any previous entry.
    pub fn register(&mut self, name: impl Into<String>, item: Arc<T>) {
        self.entries.insert(name.into(), item);
    }

    pub fn get(&self, name: &str) -> Option<Arc<T>> {
        self.entries.get(name).cloned()
    }

    /// Like [`Registry::get`] but reports the known names on a miss.
    pub fn resolve(&self, name: &str) -> Result<Arc<T>, UnknownStrategy> {
        self.get(name).ok_or_else(|| UnknownStrategy {
            kind: self.kind,
            name: name.to_string(),
            known: self.names(),
        })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    /// Registered names in sorted order.
    pub fn names(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }
}

impl<T: ?Sized> fmt::Debug for Registry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("kind", &self.kind)
            .field("names", &self.names())
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} `{name}` (known: {})", known.join(", "))]
pub struct UnknownStrategy {
    pub kind: &'static str,
    pub name: String,
    pub known: Vec<String>,
}
