//! Name-keyed registry of interchangeable strategy implementations.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Something that can be looked up by name.
pub trait Named {
    fn name(&self) -> &'static str;
    fn describe(&self) -> &'static str {
        ""
    }
}

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<&'static str, Arc<T>>,
    default: Option<&'static str>,
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry { kind, entries: BTreeMap::new(), default: None }
    }

    /// Register a strategy under its own name. The first registration becomes the default.
    pub fn register(&mut self, item: Arc<T>) -> &mut Self {
        let name = item.name();
        if self.default.is_none() {
            self.default = Some(name);
        }
        self.entries.insert(name, item);
        self
    }

    pub fn with(mut self, item: Arc<T>) -> Self {
        self.register(item);
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries.get(name).cloned().ok_or_else(|| {
            Error::Config(format!(
                "unknown {} '{}'; available: {}",
                self.kind,
                name,
                self.names().join(", ")
            ))
        })
    }

    pub fn default_entry(&self) -> Option<Arc<T>> {
        self.default.and_then(|n| self.entries.get(n).cloned())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }
}

impl<T: ?Sized + Named> fmt::Debug for Registry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry").field("kind", &self.kind).field("entries", &self.names()).finish()
    }
}
