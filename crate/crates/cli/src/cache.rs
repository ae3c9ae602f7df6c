//! On-disk cache of L-polynomials.
//!
//! One entry per line: an 8-digit hex CRC32 of the JSON payload, a space, then
//! the payload. Lines whose checksum or schema does not verify are reported
//! and dropped, and the file is rewritten without them; the affected entries
//! are recomputed on demand. Entries are write-once per key.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use census_core::curve::{HyperellipticCurve, LPolynomial};
use census_core::survey::LPolySource;
use census_core::{Error, Result};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

pub const CACHE_SCHEMA: u32 = 1;
pub const CACHE_FILE: &str = "lpoly-v1.jsonl";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CacheKey {
    pub q: u64,
    pub gamma: usize,
    /// c_0..c_{γ-1} as canonical labels.
    pub poly: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub schema: u32,
    #[serde(flatten)]
    pub key: CacheKey,
    /// The defining polynomial of F_q used for the labels, low degree first.
    pub modulus: Vec<u64>,
    pub lpoly: Vec<String>,
}

fn encode(entry: &CacheEntry) -> String {
    let payload = serde_json::to_string(entry).expect("entries serialize");
    format!("{:08x} {}", crc32fast::hash(payload.as_bytes()), payload)
}

fn decode(line: &str) -> std::result::Result<CacheEntry, String> {
    let (crc, payload) = line.split_once(' ').ok_or("missing checksum column")?;
    let want = u32::from_str_radix(crc, 16).map_err(|_| "unreadable checksum")?;
    if crc32fast::hash(payload.as_bytes()) != want {
        return Err("checksum mismatch".into());
    }
    let entry: CacheEntry = serde_json::from_str(payload).map_err(|e| format!("bad payload: {e}"))?;
    if entry.schema != CACHE_SCHEMA {
        return Err(format!("unknown schema version {}", entry.schema));
    }
    Ok(entry)
}

/// What loading a cache file found.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub entries: usize,
    /// (1-based line number, reason) for each dropped line.
    pub dropped: Vec<(usize, String)>,
}

pub struct LPolyCache {
    path: PathBuf,
    map: Mutex<HashMap<CacheKey, CacheEntry>>,
    writer: Mutex<File>,
    point_counts: AtomicU64,
    verbose: bool,
}

impl LPolyCache {
    /// Open or create the cache in `dir`, dropping unverifiable lines.
    pub fn open(dir: &Path, verbose: bool) -> Result<(Self, LoadReport)> {
        let io = |e: std::io::Error| Error::Invalid(format!("cache {}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        let path = dir.join(CACHE_FILE);
        let mut report = LoadReport::default();
        let mut map = HashMap::new();
        let mut good: Vec<String> = Vec::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path).map_err(io)?);
            for (i, line) in reader.lines().enumerate() {
                let line = match line {
                    Ok(l) => l,
                    Err(e) => {
                        report.dropped.push((i + 1, e.to_string()));
                        continue;
                    }
                };
                if line.trim().is_empty() {
                    continue;
                }
                match decode(&line) {
                    Ok(entry) => {
                        if !map.contains_key(&entry.key) {
                            map.insert(entry.key.clone(), entry);
                            good.push(line);
                        }
                    }
                    Err(why) => report.dropped.push((i + 1, why)),
                }
            }
        }
        if !report.dropped.is_empty() {
            // Rewrite atomically without the bad lines.
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            for l in &good {
                writeln!(tmp, "{l}").map_err(io)?;
            }
            tmp.persist(&path).map_err(|e| io(e.error))?;
        }
        report.entries = map.len();
        let writer = OpenOptions::new().create(true).append(true).open(&path).map_err(io)?;
        Ok((
            LPolyCache { path, map: Mutex::new(map), writer: Mutex::new(writer), point_counts: AtomicU64::new(0), verbose },
            report,
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Number of extension-field point counts performed through this cache.
    pub fn point_counts(&self) -> u64 {
        self.point_counts.load(Ordering::Relaxed)
    }

    fn key_for(curve: &HyperellipticCurve) -> CacheKey {
        CacheKey { q: curve.q(), gamma: curve.gamma(), poly: curve.poly().labels() }
    }

    fn lookup(&self, curve: &HyperellipticCurve) -> Option<LPolynomial> {
        let key = Self::key_for(curve);
        let map = self.map.lock().expect("cache lock");
        let entry = map.get(&key)?;
        if entry.modulus != curve.field().modulus() {
            return None;
        }
        let coeffs: Option<Vec<BigInt>> = entry.lpoly.iter().map(|s| s.parse().ok()).collect();
        LPolynomial::from_coeffs(curve.q(), coeffs?).ok().filter(|l| l.genus() == curve.genus())
    }

    fn store(&self, curve: &HyperellipticCurve, l: &LPolynomial) -> Result<()> {
        let entry = CacheEntry {
            schema: CACHE_SCHEMA,
            key: Self::key_for(curve),
            modulus: curve.field().modulus().to_vec(),
            lpoly: l.coeffs().iter().map(|a| a.to_string()).collect(),
        };
        let mut map = self.map.lock().expect("cache lock");
        if map.contains_key(&entry.key) {
            return Ok(());
        }
        let mut w = self.writer.lock().expect("cache writer lock");
        writeln!(w, "{}", encode(&entry)).map_err(|e| Error::Invalid(format!("cache write: {e}")))?;
        w.flush().map_err(|e| Error::Invalid(format!("cache write: {e}")))?;
        map.insert(entry.key.clone(), entry);
        Ok(())
    }
}

impl LPolySource for LPolyCache {
    fn l_polynomial(&self, curve: &HyperellipticCurve) -> Result<LPolynomial> {
        if let Some(l) = self.lookup(curve) {
            return Ok(l);
        }
        let l = curve.l_polynomial()?;
        self.point_counts.fetch_add(curve.genus() as u64, Ordering::Relaxed);
        if self.verbose {
            eprintln!("cache miss: counted points over {} extensions", curve.genus());
        }
        self.store(curve, &l)?;
        Ok(l)
    }
}

/// Point counting with a counter and no persistence.
#[derive(Default)]
pub struct CountingSource {
    point_counts: AtomicU64,
}

impl CountingSource {
    pub fn point_counts(&self) -> u64 {
        self.point_counts.load(Ordering::Relaxed)
    }
}

impl LPolySource for CountingSource {
    fn l_polynomial(&self, curve: &HyperellipticCurve) -> Result<LPolynomial> {
        self.point_counts.fetch_add(curve.genus() as u64, Ordering::Relaxed);
        curve.l_polynomial()
    }
}
