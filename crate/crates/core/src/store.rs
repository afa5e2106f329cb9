//! Append-only JSON-lines cache of rank results.
//!
//! One record per line; on load the last record for a key wins, and lines
//! that fail to parse or verify are skipped with a warning.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize, Serializer};

use crate::descent2::{RankResult, RankStatus};
use crate::ellcurve::{Curve, Point};
use crate::exactnum::{parse_int, rat_int, Int, Rat};
use num_traits::Zero;

pub const CACHE_ENV: &str = "GEOPROG_CACHE";
pub const DEFAULT_CACHE: &str = "cache.jsonl";
/// Largest rank bound accepted from disk.
pub const MAX_SANE_RANK: u32 = 8;

pub fn ser_int<S: Serializer>(v: &Int, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `y^2 = x^3 + A x^2 + B x`
    Bx,
    /// `y^2 = x^3 + B` (with `A = 0`)
    Mordell,
}

impl Family {
    pub fn curve(self, a: &Int, b: &Int) -> Option<Curve> {
        match self {
            Family::Bx => Curve::new(rat_int(a), rat_int(b), Rat::zero()).ok(),
            Family::Mordell if a.is_zero() => Curve::mordell(rat_int(b)).ok(),
            Family::Mordell => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CacheKey {
    pub family: Family,
    pub a: Int,
    pub b: Int,
    pub budget: String,
}

impl CacheKey {
    pub fn new(family: Family, a: Int, b: Int, budget: impl Into<String>) -> Self {
        CacheKey { family, a, b, budget: budget.into() }
    }

    /// `Family|A|B|budget`, the string `scan` prefixes match against.
    pub fn as_string(&self) -> String {
        format!("{:?}|{}|{}|{}", self.family, self.a, self.b, self.budget)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub family: Family,
    pub a: String,
    pub b: String,
    pub lower: u32,
    pub upper: u32,
    pub status: RankStatus,
    pub witnesses: Vec<Point>,
    pub budget: String,
    pub budget_used: u64,
    pub timestamp: String,
}

impl CacheRecord {
    pub fn from_rank(key: &CacheKey, r: &RankResult) -> Self {
        CacheRecord {
            family: key.family,
            a: key.a.to_string(),
            b: key.b.to_string(),
            lower: r.lower,
            upper: r.upper,
            status: r.status,
            witnesses: r.witnesses.clone(),
            budget: key.budget.clone(),
            budget_used: r.budget_used,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn key(&self) -> Option<CacheKey> {
        Some(CacheKey::new(self.family, parse_int(&self.a).ok()?, parse_int(&self.b).ok()?, self.budget.clone()))
    }

    pub fn rank(&self) -> RankResult {
        RankResult {
            lower: self.lower,
            upper: self.upper,
            status: self.status,
            witnesses: self.witnesses.clone(),
            budget_used: self.budget_used,
        }
    }

    /// Bounds are sane and every witness is on the curve.
    pub fn verify(&self) -> bool {
        let Some(key) = self.key() else { return false };
        let Some(curve) = key.family.curve(&key.a, &key.b) else { return false };
        self.lower <= self.upper
            && self.upper <= MAX_SANE_RANK
            && self.witnesses.iter().all(|p| curve.on_curve(p))
    }
}

struct Inner {
    index: BTreeMap<CacheKey, CacheRecord>,
    file: Option<File>,
}

/// Cache backed by a JSON-lines file, or purely in memory.
pub struct Store {
    path: Option<PathBuf>,
    inner: Mutex<Inner>,
}

impl Store {
    pub fn in_memory() -> Self {
        Store { path: None, inner: Mutex::new(Inner { index: BTreeMap::new(), file: None }) }
    }

    /// Loads `path` (creating it if missing) and opens it for appending.
    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new().create(true).read(true).append(true).open(&path)?;
        let mut index = BTreeMap::new();
        let mut skipped = 0usize;
        for (n, line) in BufReader::new(&file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<CacheRecord>(&line) {
                Ok(rec) if rec.verify() => {
                    let key = rec.key().expect("verified record has a key");
                    index.insert(key, rec);
                }
                Ok(_) => {
                    log::warn!("{}:{}: record fails verification, skipped", path.display(), n + 1);
                    skipped += 1;
                }
                Err(e) => {
                    log::warn!("{}:{}: unreadable record ({e}), skipped", path.display(), n + 1);
                    skipped += 1;
                }
            }
        }
        // a truncated last line must not swallow the next append
        let len = file.seek(SeekFrom::End(0))?;
        if len > 0 {
            let mut last = [0u8; 1];
            file.seek(SeekFrom::Start(len - 1))?;
            file.read_exact(&mut last)?;
            if last[0] != b'\n' {
                file.write_all(b"\n")?;
            }
        }
        log::debug!("loaded {} records from {} ({skipped} skipped)", index.len(), path.display());
        Ok(Store { path: Some(path), inner: Mutex::new(Inner { index, file: Some(file) }) })
    }

    /// `$GEOPROG_CACHE`, else `./cache.jsonl`.
    pub fn from_env() -> io::Result<Self> {
        let path = std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE));
        Store::open(path)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn put(&self, rec: CacheRecord) -> io::Result<()> {
        let key = rec
            .key()
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "record has malformed coefficients"))?;
        let mut inner = self.inner.lock().expect("store lock");
        if let Some(f) = inner.file.as_mut() {
            let mut line = serde_json::to_string(&rec)?;
            line.push('\n');
            f.write_all(line.as_bytes())?;
            f.flush()?;
        }
        inner.index.insert(key, rec);
        Ok(())
    }

    pub fn get(&self, key: &CacheKey) -> Option<CacheRecord> {
        self.inner.lock().expect("store lock").index.get(key).cloned()
    }

    /// Records whose [`CacheKey::as_string`] starts with `prefix`, in key order.
    pub fn scan(&self, prefix: &str) -> Vec<CacheRecord> {
        let inner = self.inner.lock().expect("store lock");
        inner
            .index
            .iter()
            .filter(|(k, _)| k.as_string().starts_with(prefix))
            .map(|(_, r)| r.clone())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("store lock").index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
