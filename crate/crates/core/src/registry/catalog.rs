use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{compare_versions, ArtifactPackage, DependencyRef, Kind, RegistryError, Selector, Uid};

/// Immutable in-memory view of a repository's packages.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Catalog {
    packages: BTreeMap<Uid, ArtifactPackage>,
}

/// Conjunctive search filters; `None`/empty means "any".
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchQuery {
    pub kind: Option<Kind>,
    #[serde(default)]
    pub tags: BTreeSet<String>,
    pub name_substring: Option<String>,
}

impl SearchQuery {
    pub fn matches(&self, pkg: &ArtifactPackage) -> bool {
        self.kind.is_none_or(|k| k == pkg.kind)
            && self.tags.is_subset(&pkg.tags)
            && self.name_substring.as_deref().is_none_or(|s| pkg.name.contains(s))
    }
}

/// Dependency closure of a package in install order.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolution {
    pub packages: Vec<ArtifactPackage>,
    /// Optional dependencies that could not be satisfied.
    pub notes: Vec<String>,
}

impl Resolution {
    pub fn uids(&self) -> Vec<Uid> {
        self.packages.iter().map(|p| p.uid.clone()).collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mark {
    Active,
    Done,
}

impl Catalog {
    pub fn new(packages: impl IntoIterator<Item = ArtifactPackage>) -> Result<Self, RegistryError> {
        let mut map = BTreeMap::new();
        for pkg in packages {
            pkg.check()?;
            if let Some(prev) = map.insert(pkg.uid.clone(), pkg) {
                return Err(RegistryError::DuplicateUid(prev.uid));
            }
        }
        Ok(Self { packages: map })
    }

    pub fn get(&self, uid: &Uid) -> Option<&ArtifactPackage> {
        self.packages.get(uid)
    }

    pub fn len(&self) -> usize {
        self.packages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packages.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ArtifactPackage> {
        self.packages.values()
    }

    pub(crate) fn insert(&mut self, pkg: ArtifactPackage) {
        self.packages.insert(pkg.uid.clone(), pkg);
    }

    /// Packages matching every filter, sorted by (kind, name, version).
    pub fn search(&self, query: &SearchQuery) -> Vec<ArtifactPackage> {
        let mut hits: Vec<ArtifactPackage> = self.iter().filter(|p| query.matches(p)).cloned().collect();
        hits.sort_by(|a, b| {
            a.kind
                .cmp(&b.kind)
                .then_with(|| a.name.cmp(&b.name))
                .then_with(|| compare_versions(&a.version, &b.version))
                .then_with(|| a.uid.cmp(&b.uid))
        });
        hits
    }

    /// Picks the package a reference points at. Tag selectors prefer the
    /// highest version, then the lowest uid; `requester` never selects itself.
    pub fn select(&self, dep: &DependencyRef, requester: Option<&Uid>) -> Option<&ArtifactPackage> {
        match &dep.selector {
            Selector::Uid(uid) => self.get(uid).filter(|p| Some(&p.uid) != requester),
            Selector::Tags { .. } => self
                .iter()
                .filter(|p| Some(&p.uid) != requester && dep.matches(p))
                .max_by(|a, b| compare_versions(&a.version, &b.version).then_with(|| b.uid.cmp(&a.uid))),
        }
    }

    /// Transitive dependency closure of `root`, dependencies before
    /// dependents, ties broken by ascending uid.
    pub fn resolve(&self, root: &Uid) -> Result<Resolution, RegistryError> {
        if !self.packages.contains_key(root) {
            return Err(RegistryError::UnknownPackage(root.clone()));
        }
        let mut edges: BTreeMap<Uid, BTreeSet<Uid>> = BTreeMap::new();
        let mut marks: BTreeMap<Uid, Mark> = BTreeMap::new();
        let mut path = Vec::new();
        let mut notes = Vec::new();
        self.visit(root, &mut edges, &mut marks, &mut path, &mut notes)?;

        // Kahn's algorithm over the closure: a package is ready once all of
        // its dependencies have been emitted.
        let mut pending: BTreeMap<&Uid, usize> = edges.iter().map(|(u, deps)| (u, deps.len())).collect();
        let mut dependents: BTreeMap<&Uid, Vec<&Uid>> = BTreeMap::new();
        for (u, deps) in &edges {
            for d in deps {
                dependents.entry(d).or_default().push(u);
            }
        }
        let mut ready: BTreeSet<&Uid> = pending.iter().filter(|(_, n)| **n == 0).map(|(u, _)| *u).collect();
        let mut order = Vec::with_capacity(edges.len());
        while let Some(next) = ready.pop_first() {
            order.push(self.packages[next].clone());
            for dependent in dependents.get(next).into_iter().flatten() {
                let n = pending.get_mut(dependent).expect("dependent is in the closure");
                *n -= 1;
                if *n == 0 {
                    ready.insert(dependent);
                }
            }
        }
        debug_assert_eq!(order.len(), edges.len(), "cycles are rejected during the walk");
        Ok(Resolution { packages: order, notes })
    }

    fn visit(
        &self,
        uid: &Uid,
        edges: &mut BTreeMap<Uid, BTreeSet<Uid>>,
        marks: &mut BTreeMap<Uid, Mark>,
        path: &mut Vec<Uid>,
        notes: &mut Vec<String>,
    ) -> Result<(), RegistryError> {
        let pkg = &self.packages[uid];
        marks.insert(uid.clone(), Mark::Active);
        path.push(uid.clone());
        let mut targets = BTreeSet::new();
        for dep in &pkg.dependencies {
            let Some(target) = self.select(dep, Some(uid)) else {
                if dep.optional {
                    notes.push(format!("{uid}: optional dependency `{dep}` not satisfied, skipped"));
                    continue;
                }
                return Err(RegistryError::Unsatisfiable {
                    package: uid.clone(),
                    selector: dep.to_string(),
                });
            };
            let target = &target.uid;
            targets.insert(target.clone());
            match marks.get(target) {
                Some(Mark::Done) => {}
                Some(Mark::Active) => {
                    let start = path
                        .iter()
                        .position(|u| u == target)
                        .expect("active node is on the path");
                    return Err(RegistryError::Cycle(path[start..].to_vec()));
                }
                None => self.visit(target, edges, marks, path, notes)?,
            }
        }
        edges.insert(uid.clone(), targets);
        marks.insert(uid.clone(), Mark::Done);
        path.pop();
        Ok(())
    }
}
