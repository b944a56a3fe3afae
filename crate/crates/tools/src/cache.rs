//! Content-addressed store of step outputs.
//!
//! ```text
//! <cache>/objects/<sha256 of bytes>
//! <cache>/entries/<fingerprint>.json
//! ```
//!
//! Every file is written to a temporary name in the same directory and then
//! renamed, so concurrent builds sharing a cache never see partial files.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::manifest::Step;

pub const DIGEST_ALG: &str = "sha256";
pub const ENTRY_VERSION: u32 = 1;

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest over the op, its keys and the digests of its inputs. Output paths
/// are included so renaming an output invalidates the entry.
pub fn fingerprint(step: &Step, input_digests: &[(String, String)]) -> String {
    let mut h = Sha256::new();
    let mut field = |tag: &str, value: &str| {
        h.update(tag.as_bytes());
        h.update((value.len() as u64).to_le_bytes());
        h.update(value.as_bytes());
    };
    field("texfm-step", &ENTRY_VERSION.to_string());
    field("op", step.op.name());
    for (k, v) in &step.keys {
        field("key", k);
        field("value", v);
    }
    for (path, d) in input_digests {
        field("in", path);
        field("digest", d);
    }
    for o in &step.outputs {
        field("out", o);
    }
    hex::encode(h.finalize())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: String,
    pub digest: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub version: u32,
    pub digest_alg: String,
    pub fingerprint: String,
    pub op: String,
    pub outputs: Vec<OutputRecord>,
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(
        ".{name}.{}.{}.tmp",
        std::process::id(),
        TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

#[derive(Clone, Debug)]
pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Cache {
        Cache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn entry_path(&self, fingerprint: &str) -> PathBuf {
        self.root.join("entries").join(format!("{fingerprint}.json"))
    }

    fn object_path(&self, digest: &str) -> PathBuf {
        self.root.join("objects").join(digest)
    }

    /// The entry for `fingerprint`, if present, readable and complete.
    pub fn lookup(&self, fingerprint: &str) -> Option<CacheEntry> {
        let text = fs::read_to_string(self.entry_path(fingerprint)).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        let usable = entry.version == ENTRY_VERSION
            && entry.digest_alg == DIGEST_ALG
            && entry.fingerprint == fingerprint
            && entry.outputs.iter().all(|o| self.object_path(&o.digest).is_file());
        usable.then_some(entry)
    }

    /// Reads an object and checks it still hashes to its name.
    pub fn object(&self, digest_hex: &str) -> io::Result<Vec<u8>> {
        let bytes = fs::read(self.object_path(digest_hex))?;
        if digest(&bytes) != digest_hex {
            return Err(io::Error::new(io::ErrorKind::InvalidData, format!("cache object {digest_hex} is corrupt")));
        }
        Ok(bytes)
    }

    pub fn store(&self, fingerprint: &str, op: &str, outputs: &[(String, Vec<u8>)]) -> io::Result<CacheEntry> {
        let mut records = Vec::new();
        for (path, bytes) in outputs {
            let d = digest(bytes);
            if self.object(&d).is_err() {
                write_atomic(&self.object_path(&d), bytes)?;
            }
            records.push(OutputRecord { path: path.clone(), digest: d });
        }
        let entry = CacheEntry {
            version: ENTRY_VERSION,
            digest_alg: DIGEST_ALG.into(),
            fingerprint: fingerprint.into(),
            op: op.into(),
            outputs: records,
        };
        let json = serde_json::to_vec_pretty(&entry).map_err(io::Error::other)?;
        write_atomic(&self.entry_path(fingerprint), &json)?;
        Ok(entry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(digest(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn store_and_lookup() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path().join("c"));
        assert!(cache.lookup("f").is_none());
        let e = cache.store("f", "ew", &[("a.tfm".into(), b"xyz".to_vec())]).unwrap();
        assert_eq!(cache.lookup("f"), Some(e.clone()));
        assert_eq!(cache.object(&e.outputs[0].digest).unwrap(), b"xyz");
        fs::write(cache.object_path(&e.outputs[0].digest), b"tampered").unwrap();
        assert!(cache.object(&e.outputs[0].digest).is_err());
        fs::remove_file(cache.object_path(&e.outputs[0].digest)).unwrap();
        assert!(cache.lookup("f").is_none());
    }
}
