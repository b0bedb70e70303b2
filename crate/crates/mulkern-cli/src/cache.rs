//! On-disk cache of structure-constant tables, keyed by operator
//! fingerprint and depth and sealed with a SHA-256 digest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use mulkern::exact::Rat;
use mulkern::ode::DiffOp;
use mulkern::sc::{GenSCTable, SCTable};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const CACHE_VERSION: u32 = 1;
pub const CACHE_ENV: &str = "MULKERN_CACHE_DIR";
const DEFAULT_DIR: &str = ".mulkern-cache";

pub trait CachedTable: Sized + PartialEq {
    const KIND: &'static str;
    type Entry: Serialize + DeserializeOwned;
    fn to_entries(&self) -> Vec<Self::Entry>;
    fn from_entries(g: usize, depth: usize, entries: Vec<Self::Entry>) -> Self;
}

impl CachedTable for SCTable {
    const KIND: &'static str = "sc";
    type Entry = (usize, usize, usize, Rat);

    fn to_entries(&self) -> Vec<Self::Entry> {
        self.entries().iter().flat_map(|((i, j), row)| row.iter().map(move |(k, v)| (*i, *j, *k, v.clone()))).collect()
    }

    fn from_entries(_g: usize, depth: usize, entries: Vec<Self::Entry>) -> Self {
        let mut m: BTreeMap<(usize, usize), BTreeMap<usize, Rat>> = BTreeMap::new();
        for (i, j, k, v) in entries {
            m.entry((i, j)).or_default().insert(k, v);
        }
        SCTable::from_entries(depth, m)
    }
}

impl CachedTable for GenSCTable {
    const KIND: &'static str = "gen_sc";
    type Entry = (Vec<usize>, Vec<usize>, Rat);

    fn to_entries(&self) -> Vec<Self::Entry> {
        self.entries().iter().flat_map(|(u, row)| row.iter().map(move |(l, v)| (u.clone(), l.clone(), v.clone()))).collect()
    }

    fn from_entries(g: usize, depth: usize, entries: Vec<Self::Entry>) -> Self {
        let mut m: BTreeMap<Vec<usize>, BTreeMap<Vec<usize>, Rat>> = BTreeMap::new();
        for (u, l, v) in entries {
            m.entry(u).or_default().insert(l, v);
        }
        GenSCTable::from_entries(g, depth, m)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CacheFile<E> {
    version: u32,
    kind: String,
    fingerprint: String,
    g: usize,
    depth: usize,
    digest: String,
    entries: Vec<E>,
}

/// How a table was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lookup {
    Hit,
    Miss,
    /// Version or fingerprint disagreed; recomputed.
    Stale,
    /// Digest or syntax check failed; recomputed.
    Rejected,
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

fn sha_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    /// Explicit path, then the environment override, then the default.
    pub fn resolve(explicit: Option<&Path>) -> Self {
        match explicit {
            Some(p) => Cache::new(p),
            None => Cache::new(std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_DIR))),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for<T: CachedTable>(&self, op: &DiffOp, depth: usize) -> PathBuf {
        let key = sha_hex(format!("v{CACHE_VERSION}|{}|{}|{depth}", T::KIND, op.fingerprint()).as_bytes());
        self.dir.join(format!("{}-{}.json", T::KIND, &key[..32]))
    }

    pub fn store<T: CachedTable>(&self, op: &DiffOp, depth: usize, table: &T) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        let entries = table.to_entries();
        let digest = sha_hex(serde_json::to_string(&entries)?.as_bytes());
        let file = CacheFile {
            version: CACHE_VERSION,
            kind: T::KIND.to_string(),
            fingerprint: op.fingerprint(),
            g: op.g(),
            depth,
            digest,
            entries,
        };
        let path = self.path_for::<T>(op, depth);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, serde_json::to_vec(&file)?).map_err(|e| CliError::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    /// `Ok(None)` on a miss or a stale entry.
    pub fn load<T: CachedTable>(&self, op: &DiffOp, depth: usize) -> Result<Option<T>> {
        self.load_inner::<T>(op, depth).map(|(t, _)| t)
    }

    fn load_inner<T: CachedTable>(&self, op: &DiffOp, depth: usize) -> Result<(Option<T>, Lookup)> {
        let path = self.path_for::<T>(op, depth);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((None, Lookup::Miss)),
            Err(e) => return Err(CliError::io(&path, e)),
        };
        let corrupt = |reason: String| CliError::CorruptCache { path: path.clone(), reason };
        let file: CacheFile<T::Entry> = serde_json::from_slice(&bytes).map_err(|e| corrupt(e.to_string()))?;
        if file.version != CACHE_VERSION
            || file.kind != T::KIND
            || file.fingerprint != op.fingerprint()
            || file.depth != depth
            || file.g != op.g()
        {
            return Ok((None, Lookup::Stale));
        }
        if sha_hex(serde_json::to_string(&file.entries)?.as_bytes()) != file.digest {
            return Err(corrupt("digest mismatch".into()));
        }
        Ok((Some(T::from_entries(file.g, depth, file.entries)), Lookup::Hit))
    }

    /// Loads the table or computes and stores it.
    pub fn get_or_compute<T: CachedTable>(&self, op: &DiffOp, depth: usize, compute: impl FnOnce() -> Result<T>) -> Result<(T, Lookup)> {
        let how = match self.load_inner::<T>(op, depth) {
            Ok((Some(t), how)) => return Ok((t, how)),
            Ok((None, how)) => how,
            Err(CliError::CorruptCache { .. }) => Lookup::Rejected,
            Err(e) => return Err(e),
        };
        let t = compute()?;
        self.store(op, depth, &t)?;
        Ok((t, how))
    }
}

/// Writes the table, reads it back, and compares exactly.
pub fn cache_roundtrip<T: CachedTable>(cache: &Cache, op: &DiffOp, depth: usize, table: &T) -> Result<bool> {
    cache.store(op, depth, table)?;
    Ok(cache.load::<T>(op, depth)?.is_some_and(|t| t == *table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use mulkern::ode::{expand_solution, first_order_g, heun4};
    use mulkern::sc::{gen_structure_constants, structure_constants};

    fn heun(t: i64) -> DiffOp {
        heun4(&Rat::int(t), [&Rat::new(1, 3), &Rat::new(1, 5), &Rat::new(1, 7)], &Rat::new(1, 2), None).unwrap()
    }

    fn table(op: &DiffOp, n: usize) -> SCTable {
        structure_constants(&expand_solution(op, 2 * n).unwrap(), n).unwrap()
    }

    #[test]
    fn roundtrip_heun4_depth6() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::new(dir.path());
        let op = heun(2);
        assert!(cache_roundtrip(&c, &op, 6, &table(&op, 6)).unwrap());
        let g2 = first_order_g(2).unwrap();
        let gt = gen_structure_constants(&expand_solution(&g2, 4).unwrap(), 4).unwrap();
        assert!(cache_roundtrip(&c, &g2, 4, &gt).unwrap());
    }

    #[test]
    fn edited_byte_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::new(dir.path());
        let op = heun(2);
        let t = table(&op, 3);
        let path = c.store(&op, 3, &t).unwrap();
        let mut text = fs::read_to_string(&path).unwrap();
        let at = text.find("\"1/").expect("a unit fraction entry");
        text.replace_range(at + 1..at + 2, "7");
        fs::write(&path, &text).unwrap();
        assert!(matches!(c.load::<SCTable>(&op, 3), Err(CliError::CorruptCache { .. })));
        let (again, how) = c.get_or_compute(&op, 3, || Ok(table(&op, 3))).unwrap();
        assert_eq!(how, Lookup::Rejected);
        assert_eq!(again, t);
        assert_eq!(c.get_or_compute::<SCTable>(&op, 3, || unreachable!()).unwrap().1, Lookup::Hit);
    }

    #[test]
    fn changed_parameter_misses() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::new(dir.path());
        let (a, b) = (heun(2), heun(3));
        c.store(&a, 3, &table(&a, 3)).unwrap();
        assert_ne!(c.path_for::<SCTable>(&a, 3), c.path_for::<SCTable>(&b, 3));
        assert!(c.load::<SCTable>(&b, 3).unwrap().is_none());
        let (t, how) = c.get_or_compute(&b, 3, || Ok(table(&b, 3))).unwrap();
        assert_eq!(how, Lookup::Miss);
        assert_eq!(t, table(&b, 3));
    }

    #[test]
    fn foreign_fingerprint_is_stale() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::new(dir.path());
        let (a, b) = (heun(2), heun(3));
        let pa = c.store(&a, 3, &table(&a, 3)).unwrap();
        fs::copy(&pa, c.path_for::<SCTable>(&b, 3)).unwrap();
        assert!(c.load::<SCTable>(&b, 3).unwrap().is_none());
        assert_eq!(c.get_or_compute(&b, 3, || Ok(table(&b, 3))).unwrap().1, Lookup::Stale);
    }
}
