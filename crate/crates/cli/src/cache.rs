//! Content-addressed result cache.
//!
//! A record is stored under the SHA-256 of the tool version, a section name
//! and the canonical JSON of its inputs. Each file carries the digest of its
//! payload; a record whose digest does not match is ignored and recomputed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    key: String,
    section: String,
    version: String,
    digest: String,
    payload: serde_json::Value,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
    /// Records rejected because their digest did not match.
    pub rejected: usize,
}

#[derive(Debug)]
pub struct Cache {
    dir: Option<PathBuf>,
    hits: AtomicUsize,
    misses: AtomicUsize,
    rejected: AtomicUsize,
    warnings: Mutex<Vec<String>>,
}

static TMP_COUNTER: AtomicUsize = AtomicUsize::new(0);

impl Cache {
    pub fn disabled() -> Cache {
        Cache::with_dir(None, Vec::new())
    }

    fn with_dir(dir: Option<PathBuf>, warnings: Vec<String>) -> Cache {
        Cache {
            dir,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
            rejected: AtomicUsize::new(0),
            warnings: Mutex::new(warnings),
        }
    }

    /// Opens (creating if needed) a cache directory. An unusable directory
    /// disables the cache with a warning instead of failing the run.
    pub fn open(dir: impl AsRef<Path>) -> Cache {
        let dir = dir.as_ref().to_path_buf();
        let probe = dir.join(format!(".probe-{}", std::process::id()));
        let usable = fs::create_dir_all(&dir).and_then(|_| fs::write(&probe, b"")).and_then(|_| fs::remove_file(&probe));
        match usable {
            Ok(()) => Cache::with_dir(Some(dir), Vec::new()),
            Err(e) => Cache::with_dir(
                None,
                vec![format!("cache directory {} is not writable ({e}); caching disabled", dir.display())],
            ),
        }
    }

    /// `PRESSURE_CACHE_DIR`, defaulting to `./.pressure-cache`.
    pub fn from_env() -> Cache {
        let dir = std::env::var_os("PRESSURE_CACHE_DIR").map(PathBuf::from).unwrap_or_else(|| ".pressure-cache".into());
        Cache::open(dir)
    }

    pub fn enabled(&self) -> bool {
        self.dir.is_some()
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn key(section: &str, inputs: &serde_json::Value) -> String {
        let mut text = format!("{VERSION}\n{section}\n");
        text.push_str(&serde_json::to_string(inputs).expect("json"));
        sha256_hex(text.as_bytes())
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    fn warn(&self, msg: String) {
        self.warnings.lock().expect("warnings lock").push(msg);
    }

    pub fn get(&self, key: &str) -> Option<serde_json::Value> {
        let path = self.path(key)?;
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(_) => {
                self.misses.fetch_add(1, Ordering::Relaxed);
                return None;
            }
        };
        let ok = serde_json::from_str::<Record>(&text).ok().filter(|r| {
            r.key == key
                && r.version == VERSION
                && sha256_hex(serde_json::to_string(&r.payload).expect("json").as_bytes()) == r.digest
        });
        match ok {
            Some(r) => {
                self.hits.fetch_add(1, Ordering::Relaxed);
                Some(r.payload)
            }
            None => {
                self.rejected.fetch_add(1, Ordering::Relaxed);
                self.misses.fetch_add(1, Ordering::Relaxed);
                self.warn(format!("cache record {} failed verification; recomputing", path.display()));
                None
            }
        }
    }

    /// Writes through a temporary file and a rename, so readers never see a partial record.
    pub fn put(&self, key: &str, section: &str, payload: &serde_json::Value) {
        let Some(path) = self.path(key) else { return };
        let record = Record {
            key: key.to_string(),
            section: section.to_string(),
            version: VERSION.to_string(),
            digest: sha256_hex(serde_json::to_string(payload).expect("json").as_bytes()),
            payload: payload.clone(),
        };
        let n = TMP_COUNTER.fetch_add(1, Ordering::Relaxed);
        let tmp = path.with_extension(format!("tmp-{}-{n}", std::process::id()));
        let res = fs::File::create(&tmp)
            .and_then(|mut f| {
                f.write_all(serde_json::to_string(&record).expect("json").as_bytes())?;
                f.sync_all()
            })
            .and_then(|_| fs::rename(&tmp, &path));
        if let Err(e) = res {
            let _ = fs::remove_file(&tmp);
            self.warn(format!("could not write cache record {}: {e}", path.display()));
        }
    }

    /// Cached value for `section` and `inputs`, computing and storing it on a miss.
    pub fn get_or_compute<T, E, F>(&self, section: &str, inputs: &serde_json::Value, compute: F) -> Result<(T, bool), E>
    where
        T: Serialize + for<'de> Deserialize<'de>,
        F: FnOnce() -> Result<T, E>,
    {
        let key = Cache::key(section, inputs);
        if let Some(v) = self.get(&key) {
            if let Ok(t) = serde_json::from_value::<T>(v) {
                return Ok((t, true));
            }
        }
        let t = compute()?;
        if self.enabled() {
            self.put(&key, section, &serde_json::to_value(&t).expect("json"));
        }
        Ok((t, false))
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            rejected: self.rejected.load(Ordering::Relaxed),
        }
    }

    pub fn take_warnings(&self) -> Vec<String> {
        std::mem::take(&mut *self.warnings.lock().expect("warnings lock"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn store_then_hit_then_reject_tampered_record() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path());
        let inputs = serde_json::json!({"a": 1});
        let (v, hit) = cache.get_or_compute("s", &inputs, || Ok::<_, ()>(vec![1.5, 2.5])).unwrap();
        assert_eq!((v, hit), (vec![1.5, 2.5], false));
        let (v, hit) = cache.get_or_compute("s", &inputs, || Ok::<_, ()>(vec![0.0])).unwrap();
        assert_eq!((v, hit), (vec![1.5, 2.5], true));

        let path = dir.path().join(format!("{}.json", Cache::key("s", &inputs)));
        let text = fs::read_to_string(&path).unwrap().replace("1.5", "9.5");
        fs::write(&path, text).unwrap();
        let (v, hit) = cache.get_or_compute("s", &inputs, || Ok::<_, ()>(vec![1.5, 2.5])).unwrap();
        assert_eq!((v, hit), (vec![1.5, 2.5], false));
        assert_eq!(cache.stats().rejected, 1);
        assert_eq!(cache.take_warnings().len(), 1);
        // the recomputed record replaced the tampered one
        let (_, hit) = cache.get_or_compute("s", &inputs, || Ok::<_, ()>(vec![0.0])).unwrap();
        assert!(hit);
    }

    #[test]
    fn awkward_floats_survive_a_stored_record() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path());
        let values: Vec<f64> = (1..200).map(|k| (k as f64).ln() / 7.0 + 1e-17 * k as f64).collect();
        let inputs = serde_json::json!({ "floats": 1 });
        let first = cache.get_or_compute("f", &inputs, || Ok::<_, ()>(values.clone())).unwrap();
        let second = cache.get_or_compute("f", &inputs, || Ok::<_, ()>(Vec::<f64>::new())).unwrap();
        assert!(!first.1 && second.1);
        assert_eq!(second.0, values);
        assert_eq!(cache.stats().rejected, 0);
    }

    #[test]
    fn keys_depend_on_section_and_inputs() {
        let a = serde_json::json!({"a": 1});
        let b = serde_json::json!({"a": 2});
        assert_ne!(Cache::key("s", &a), Cache::key("t", &a));
        assert_ne!(Cache::key("s", &a), Cache::key("s", &b));
        assert_eq!(Cache::key("s", &a).len(), 64);
    }

    #[test]
    fn unwritable_directory_disables_the_cache() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain-file");
        fs::write(&file, b"x").unwrap();
        let cache = Cache::open(file.join("sub"));
        assert!(!cache.enabled());
        assert_eq!(cache.take_warnings().len(), 1);
        let (v, hit) = cache.get_or_compute("s", &serde_json::json!(1), || Ok::<_, ()>(3u32)).unwrap();
        assert_eq!((v, hit), (3, false));
    }
}
