use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const INDEX_FILE: &str = "index.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Registry {
    Ontologies,
    Documents,
    Networks,
    Scenarios,
}

impl Registry {
    pub const ALL: [Registry; 4] = [
        Registry::Ontologies,
        Registry::Documents,
        Registry::Networks,
        Registry::Scenarios,
    ];

    pub fn dir(self) -> &'static str {
        match self {
            Registry::Ontologies => "ontologies",
            Registry::Documents => "documents",
            Registry::Networks => "networks",
            Registry::Scenarios => "scenarios",
        }
    }

    fn singular(self) -> &'static str {
        match self {
            Registry::Ontologies => "ontology",
            Registry::Documents => "document",
            Registry::Networks => "network",
            Registry::Scenarios => "scenario",
        }
    }
}

impl fmt::Display for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.singular())
    }
}

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error("{registry} '{id}' not found")]
    NotFound { registry: Registry, id: String },
    #[error("{registry} '{id}' already exists with different content")]
    Conflict { registry: Registry, id: String },
    #[error("invalid id '{0}': use 1-64 letters, digits, '-' or '_'")]
    BadId(String),
    #[error("workspace index is corrupt: {0}")]
    Corrupt(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> WorkspaceError + '_ {
    move |source| WorkspaceError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One registry entry: file name to SHA-256, plus free-form metadata such as
/// the network a scenario was solved on.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub files: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Index {
    pub ontologies: BTreeMap<String, Entry>,
    pub documents: BTreeMap<String, Entry>,
    pub networks: BTreeMap<String, Entry>,
    pub scenarios: BTreeMap<String, Entry>,
}

impl Index {
    pub fn registry(&self, r: Registry) -> &BTreeMap<String, Entry> {
        match r {
            Registry::Ontologies => &self.ontologies,
            Registry::Documents => &self.documents,
            Registry::Networks => &self.networks,
            Registry::Scenarios => &self.scenarios,
        }
    }

    fn registry_mut(&mut self, r: Registry) -> &mut BTreeMap<String, Entry> {
        match r {
            Registry::Ontologies => &mut self.ontologies,
            Registry::Documents => &mut self.documents,
            Registry::Networks => &mut self.networks,
            Registry::Scenarios => &mut self.scenarios,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Content address of a set of files and metadata: the first 16 hex digits
/// of a SHA-256 over every name, length and body.
pub fn content_id(files: &[(&str, &[u8])], meta: &BTreeMap<String, String>) -> String {
    let mut sorted: Vec<&(&str, &[u8])> = files.iter().collect();
    sorted.sort_by_key(|(n, _)| *n);
    let mut h = Sha256::new();
    for (name, body) in sorted {
        h.update(name.as_bytes());
        h.update([0]);
        h.update((body.len() as u64).to_le_bytes());
        h.update(body);
    }
    for (k, v) in meta {
        h.update(k.as_bytes());
        h.update([1]);
        h.update(v.as_bytes());
        h.update([1]);
    }
    hex::encode(&h.finalize()[..8])
}

pub fn check_id(id: &str) -> Result<(), WorkspaceError> {
    let ok = !id.is_empty()
        && id.len() <= 64
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(WorkspaceError::BadId(id.to_string()))
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), WorkspaceError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| WorkspaceError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

/// A directory of registries. Entries live under `<registry>/<id>/` and the
/// index is rewritten only after an entry's files are in place, so a crash
/// never leaves a listed entry half-written.
#[derive(Debug)]
pub struct Workspace {
    root: PathBuf,
    index: RwLock<Index>,
    writes: Mutex<()>,
}

impl Workspace {
    /// Opens `root`, creating it with an empty index when absent. Opening
    /// an existing workspace writes nothing.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, WorkspaceError> {
        let root = root.into();
        let index_path = root.join(INDEX_FILE);
        let index = if index_path.exists() {
            let text = std::fs::read_to_string(&index_path).map_err(io_err(&index_path))?;
            let index: Index =
                serde_json::from_str(&text).map_err(|e| WorkspaceError::Corrupt(e.to_string()))?;
            for r in Registry::ALL {
                for (id, entry) in index.registry(r) {
                    for name in entry.files.keys() {
                        let p = root.join(r.dir()).join(id).join(name);
                        if !p.is_file() {
                            return Err(WorkspaceError::Corrupt(format!(
                                "missing {}",
                                p.display()
                            )));
                        }
                    }
                }
            }
            index
        } else {
            let index = Index::default();
            write_atomic(&index_path, &index_bytes(&index))?;
            index
        };
        Ok(Workspace {
            root,
            index: RwLock::new(index),
            writes: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn index(&self) -> Index {
        self.index.read().expect("index lock").clone()
    }

    pub fn entry(&self, registry: Registry, id: &str) -> Result<Entry, WorkspaceError> {
        self.index
            .read()
            .expect("index lock")
            .registry(registry)
            .get(id)
            .cloned()
            .ok_or_else(|| WorkspaceError::NotFound {
                registry,
                id: id.to_string(),
            })
    }

    pub fn contains(&self, registry: Registry, id: &str) -> bool {
        self.index
            .read()
            .expect("index lock")
            .registry(registry)
            .contains_key(id)
    }

    pub fn path(&self, registry: Registry, id: &str, name: &str) -> PathBuf {
        self.root.join(registry.dir()).join(id).join(name)
    }

    pub fn read(
        &self,
        registry: Registry,
        id: &str,
        name: &str,
    ) -> Result<Vec<u8>, WorkspaceError> {
        let entry = self.entry(registry, id)?;
        if !entry.files.contains_key(name) {
            return Err(WorkspaceError::NotFound {
                registry,
                id: format!("{id}/{name}"),
            });
        }
        let p = self.path(registry, id, name);
        std::fs::read(&p).map_err(io_err(&p))
    }

    pub fn read_string(
        &self,
        registry: Registry,
        id: &str,
        name: &str,
    ) -> Result<String, WorkspaceError> {
        let bytes = self.read(registry, id, name)?;
        String::from_utf8(bytes).map_err(|e| WorkspaceError::Corrupt(e.to_string()))
    }

    /// Stores a new entry under `id`, or under its content address when
    /// `id` is `None`. Storing identical content again is a no-op, even
    /// after files were attached to the entry.
    pub fn put(
        &self,
        registry: Registry,
        id: Option<&str>,
        files: &[(&str, &[u8])],
        meta: BTreeMap<String, String>,
    ) -> Result<String, WorkspaceError> {
        let id = match id {
            Some(id) => {
                check_id(id)?;
                id.to_string()
            }
            None => content_id(files, &meta),
        };
        let entry = Entry {
            files: files
                .iter()
                .map(|(n, b)| (n.to_string(), sha256_hex(b)))
                .collect(),
            meta,
        };
        let _guard = self.writes.lock().expect("write lock");
        if let Some(existing) = self
            .index
            .read()
            .expect("index lock")
            .registry(registry)
            .get(&id)
        {
            let same = existing.meta == entry.meta
                && entry
                    .files
                    .iter()
                    .all(|(n, h)| existing.files.get(n) == Some(h));
            if same {
                return Ok(id);
            }
            return Err(WorkspaceError::Conflict { registry, id });
        }
        for (name, body) in files {
            write_atomic(&self.path(registry, &id, name), body)?;
        }
        self.commit(|index| {
            index.registry_mut(registry).insert(id.clone(), entry);
        })?;
        Ok(id)
    }

    /// Adds or replaces derived files on an existing entry.
    pub fn attach(
        &self,
        registry: Registry,
        id: &str,
        files: &[(&str, &[u8])],
    ) -> Result<(), WorkspaceError> {
        let _guard = self.writes.lock().expect("write lock");
        let mut entry = self.entry(registry, id)?;
        let before = entry.clone();
        for (name, body) in files {
            entry.files.insert(name.to_string(), sha256_hex(body));
        }
        if entry == before {
            return Ok(());
        }
        for (name, body) in files {
            write_atomic(&self.path(registry, id, name), body)?;
        }
        self.commit(|index| {
            index.registry_mut(registry).insert(id.to_string(), entry);
        })
    }

    fn commit(&self, change: impl FnOnce(&mut Index)) -> Result<(), WorkspaceError> {
        let mut next = self.index();
        change(&mut next);
        write_atomic(&self.root.join(INDEX_FILE), &index_bytes(&next))?;
        *self.index.write().expect("index lock") = next;
        Ok(())
    }
}

fn index_bytes(index: &Index) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(index).expect("index serializes");
    bytes.push(b'\n');
    bytes
}
