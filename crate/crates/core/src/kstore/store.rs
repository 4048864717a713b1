use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use super::Graph;

/// Named graphs behind a single-writer lock. Readers get an `Arc` snapshot
/// that stays valid after the entry is replaced.
#[derive(Debug, Default)]
pub struct GraphStore {
    graphs: RwLock<BTreeMap<String, Arc<Graph>>>,
}

impl GraphStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<Arc<Graph>> {
        self.graphs
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(name)
            .cloned()
    }

    /// Inserts or replaces; returns the previous snapshot.
    pub fn put(&self, name: impl Into<String>, graph: Graph) -> Option<Arc<Graph>> {
        self.graphs
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(name.into(), Arc::new(graph))
    }

    pub fn remove(&self, name: &str) -> Option<Arc<Graph>> {
        self.graphs
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .remove(name)
    }

    pub fn names(&self) -> Vec<String> {
        self.graphs
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .keys()
            .cloned()
            .collect()
    }

    pub fn len(&self) -> usize {
        self.graphs.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
