use std::collections::BTreeSet;
use std::fs::{self, File, OpenOptions};
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use serde::Serialize;
use serde_json::{Map, Value};

use super::{
    validate_meta, ArtifactPackage, Catalog, DependencyRef, Kind, RegistryError, Resolution, SearchQuery, Uid,
};

const META_FILE: &str = "meta.json";
const PAYLOAD_DIR: &str = "payload";
const INDEX_FILE: &str = "index.json";
const LOCK_FILE: &str = ".lock";

/// Arguments of [`Repository::create_package`].
#[derive(Clone, Debug)]
pub struct NewPackage {
    pub kind: Kind,
    pub name: String,
    pub version: String,
    pub tags: BTreeSet<String>,
    pub dependencies: Vec<DependencyRef>,
    /// Directory whose contents become the package payload.
    pub payload_path: PathBuf,
    pub meta: Map<String, Value>,
}

/// On-disk package repository: `<root>/<kind>/<uid>/meta.json` with the
/// payload under `<root>/<kind>/<uid>/payload/`.
///
/// Readers work on immutable [`Catalog`] snapshots. Writers take an
/// exclusive lock on `<root>/.lock`, so creates are serialized across
/// threads and processes.
#[derive(Debug)]
pub struct Repository {
    root: PathBuf,
    catalog: RwLock<Arc<Catalog>>,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RegistryError + '_ {
    move |source| RegistryError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Serializes a package to `<dir>/meta.json`.
pub fn write_package(dir: &Path, pkg: &ArtifactPackage) -> Result<(), RegistryError> {
    let path = dir.join(META_FILE);
    let mut body = serde_json::to_vec_pretty(pkg).expect("package serializes");
    body.push(b'\n');
    let tmp = dir.join(".meta.json.tmp");
    fs::write(&tmp, body).map_err(io_err(&tmp))?;
    fs::rename(&tmp, &path).map_err(io_err(&path))
}

/// Reads `<dir>/meta.json`.
pub fn read_package(dir: &Path) -> Result<ArtifactPackage, RegistryError> {
    let path = dir.join(META_FILE);
    let bytes = fs::read(&path).map_err(io_err(&path))?;
    let pkg: ArtifactPackage = serde_json::from_slice(&bytes).map_err(|e| RegistryError::Corrupt {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    pkg.check().map_err(|e| RegistryError::Corrupt {
        path,
        reason: e.to_string(),
    })?;
    Ok(pkg)
}

fn copy_dir(from: &Path, to: &Path) -> Result<(), RegistryError> {
    fs::create_dir_all(to).map_err(io_err(to))?;
    for entry in fs::read_dir(from).map_err(io_err(from))? {
        let entry = entry.map_err(io_err(from))?;
        let src = entry.path();
        let dst = to.join(entry.file_name());
        if entry.file_type().map_err(io_err(&src))?.is_dir() {
            copy_dir(&src, &dst)?;
        } else {
            fs::copy(&src, &dst).map_err(io_err(&src))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct IndexEntry<'a> {
    uid: &'a Uid,
    kind: Kind,
    name: &'a str,
    version: &'a str,
}

impl Repository {
    /// Opens the repository at `root`, creating the directory if needed.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, RegistryError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        let catalog = Self::scan(&root, &Catalog::default())?;
        Ok(Self {
            root,
            catalog: RwLock::new(Arc::new(catalog)),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Current snapshot; later writes do not affect it.
    pub fn catalog(&self) -> Arc<Catalog> {
        self.catalog.read().expect("catalog lock").clone()
    }

    /// Re-reads the package directories, picking up writes by other processes.
    pub fn refresh(&self) -> Result<Arc<Catalog>, RegistryError> {
        let fresh = Arc::new(Self::scan(&self.root, &self.catalog())?);
        *self.catalog.write().expect("catalog lock") = fresh.clone();
        Ok(fresh)
    }

    pub fn package_dir(&self, pkg: &ArtifactPackage) -> PathBuf {
        self.root.join(pkg.kind.as_str()).join(pkg.uid.as_str())
    }

    pub fn payload_dir(&self, pkg: &ArtifactPackage) -> PathBuf {
        self.package_dir(pkg).join(&pkg.payload_path)
    }

    pub fn get(&self, uid: &Uid) -> Option<ArtifactPackage> {
        self.catalog().get(uid).cloned()
    }

    pub fn search(&self, query: &SearchQuery) -> Vec<ArtifactPackage> {
        self.catalog().search(query)
    }

    pub fn resolve_dependencies(&self, uid: &Uid) -> Result<Resolution, RegistryError> {
        self.catalog().resolve(uid)
    }

    /// Packages never change once written, so entries already in `known`
    /// are reused instead of re-parsed.
    fn scan(root: &Path, known: &Catalog) -> Result<Catalog, RegistryError> {
        let mut packages = Vec::new();
        for kind in Kind::ALL {
            let dir = root.join(kind.as_str());
            if !dir.is_dir() {
                continue;
            }
            for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
                let entry = entry.map_err(io_err(&dir))?;
                let name = entry.file_name();
                let name = name.to_string_lossy();
                if name.starts_with('.') || !entry.path().join(META_FILE).is_file() {
                    continue;
                }
                if let Some(pkg) = name.parse::<Uid>().ok().and_then(|u| known.get(&u)) {
                    if pkg.kind == kind {
                        packages.push(pkg.clone());
                        continue;
                    }
                }
                let pkg = read_package(&entry.path())?;
                if pkg.kind != kind || pkg.uid.as_str() != name {
                    return Err(RegistryError::Corrupt {
                        path: entry.path(),
                        reason: format!("directory does not match package {}/{}", pkg.kind, pkg.uid),
                    });
                }
                packages.push(pkg);
            }
        }
        Catalog::new(packages)
    }

    fn lock(&self) -> Result<File, RegistryError> {
        let path = self.root.join(LOCK_FILE);
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(io_err(&path))?;
        file.lock().map_err(io_err(&path))?;
        Ok(file)
    }

    /// Validates and stores a new package with a fresh uid, copying the
    /// payload directory into the repository.
    pub fn create_package(&self, new: NewPackage) -> Result<ArtifactPackage, RegistryError> {
        if new.name.trim().is_empty() {
            return Err(RegistryError::EmptyName);
        }
        if !new.payload_path.is_dir() {
            return Err(RegistryError::PayloadMissing(new.payload_path));
        }
        let report = validate_meta(&Value::Object(new.meta.clone()), new.kind);
        if !report.valid {
            return Err(RegistryError::InvalidMeta(report));
        }

        let _guard = self.lock()?;
        let catalog = self.refresh()?;
        if let Some(existing) = catalog
            .iter()
            .find(|p| p.kind == new.kind && p.name == new.name && p.version == new.version)
        {
            return Err(RegistryError::Conflict {
                kind: new.kind,
                name: new.name,
                version: new.version,
                existing: existing.uid.clone(),
            });
        }
        let uid = loop {
            let candidate = Uid::generate();
            if catalog.get(&candidate).is_none() {
                break candidate;
            }
        };
        let pkg = ArtifactPackage {
            uid,
            kind: new.kind,
            name: new.name,
            version: new.version,
            tags: new.tags.into_iter().map(|t| t.to_lowercase()).collect(),
            dependencies: new.dependencies,
            payload_path: PAYLOAD_DIR.to_string(),
            meta: new.meta,
            extra: Map::new(),
        };
        pkg.check()?;

        let kind_dir = self.root.join(pkg.kind.as_str());
        let staging = kind_dir.join(format!(".staging-{}", pkg.uid));
        let result = copy_dir(&new.payload_path, &staging.join(PAYLOAD_DIR))
            .and_then(|()| write_package(&staging, &pkg))
            .and_then(|()| {
                let target = self.package_dir(&pkg);
                fs::rename(&staging, &target).map_err(io_err(&target))
            });
        if let Err(e) = result {
            let _ = fs::remove_dir_all(&staging);
            return Err(e);
        }

        let mut next = (*catalog).clone();
        next.insert(pkg.clone());
        let next = Arc::new(next);
        *self.catalog.write().expect("catalog lock") = next.clone();
        self.write_index(&next)?;
        Ok(pkg)
    }

    /// Rewrites `index.json`, a convenience listing that is never read back
    /// as a source of truth.
    pub fn write_index(&self, catalog: &Catalog) -> Result<(), RegistryError> {
        let entries: Vec<IndexEntry> = catalog
            .iter()
            .map(|p| IndexEntry {
                uid: &p.uid,
                kind: p.kind,
                name: &p.name,
                version: &p.version,
            })
            .collect();
        let path = self.root.join(INDEX_FILE);
        let tmp = self.root.join(".index.json.tmp");
        fs::write(&tmp, serde_json::to_vec_pretty(&entries).expect("index serializes")).map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))
    }
}
