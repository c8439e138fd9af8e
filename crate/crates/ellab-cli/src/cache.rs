//! On-disk cache of prime traces.
//!
//! One file per curve, named by a digest of the curve id together with the
//! module tag and format version. Layout: 4-byte magic, little-endian u32
//! version, u32 record count, then 17-byte records (u64 p, i64 ap, u8 type
//! tag), sorted by p. Files with a different magic or version are ignored
//! rather than migrated, and corrupt files read as empty.

use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

const MAGIC: [u8; 4] = *b"ELAP";
const VERSION: u32 = 1;
const RECORD: usize = 17;

/// Reduction type tags stored alongside each trace. Good reduction is 0;
/// the cache reader does not interpret the tag, it exists so a file is
/// self-describing.
pub fn type_tag(label: &str) -> u8 {
    match label {
        "split" => 1,
        "nonsplit" => 2,
        "additive" => 3,
        _ => 0,
    }
}

pub fn cache_path(dir: &Path, curve_id: &str) -> PathBuf {
    let mut h = Sha256::new();
    h.update(b"ap/1:");
    h.update(curve_id.as_bytes());
    let digest = h.finalize();
    let short: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    dir.join(format!("ap-{short}.bin"))
}

/// Traces from a cache file, or empty when the file is missing, stale, or
/// malformed. Entries violating the Hasse bound are dropped by the caller's
/// seeding step, so this only has to get the framing right.
pub fn load(path: &Path) -> Vec<(u64, i64)> {
    let Ok(bytes) = std::fs::read(path) else {
        return Vec::new();
    };
    if bytes.len() < 12 || bytes[..4] != MAGIC {
        return Vec::new();
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Vec::new();
    }
    let count = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if bytes.len() != 12 + count * RECORD {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let at = 12 + i * RECORD;
        let p = u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        let ap = i64::from_le_bytes(bytes[at + 8..at + 16].try_into().unwrap());
        out.push((p, ap));
    }
    out
}

/// Writes the full record set, replacing any previous file. Records are
/// sorted by prime, so byte content is a function of the entries alone.
pub fn store(
    path: &Path,
    entries: &[(u64, i64)],
    tags: &BTreeMap<u64, u8>,
) -> std::io::Result<()> {
    let mut sorted = entries.to_vec();
    sorted.sort_unstable_by_key(|&(p, _)| p);
    sorted.dedup_by_key(|&mut (p, _)| p);
    let mut bytes = Vec::with_capacity(12 + sorted.len() * RECORD);
    bytes.extend_from_slice(&MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(sorted.len() as u32).to_le_bytes());
    for (p, ap) in sorted {
        bytes.extend_from_slice(&p.to_le_bytes());
        bytes.extend_from_slice(&ap.to_le_bytes());
        bytes.push(tags.get(&p).copied().unwrap_or(0));
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_stale_version_handling() {
        let dir = std::env::temp_dir().join("ellab-cache-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = cache_path(&dir, "0,0,1,-1,0");
        let entries = vec![(2u64, -2i64), (3, -3), (5, -2), (7, -1)];
        let mut tags = BTreeMap::new();
        tags.insert(2u64, 0u8);
        store(&path, &entries, &tags).unwrap();
        assert_eq!(load(&path), entries);

        // Same entries, any order: identical bytes.
        let first = std::fs::read(&path).unwrap();
        let shuffled = vec![(7u64, -1i64), (2, -2), (5, -2), (3, -3)];
        store(&path, &shuffled, &tags).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), first);

        // Flip the version: the file must read as empty.
        let mut bad = first.clone();
        bad[4] ^= 1;
        std::fs::write(&path, &bad).unwrap();
        assert!(load(&path).is_empty());
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn distinct_curves_get_distinct_files() {
        let dir = Path::new("/tmp");
        assert_ne!(cache_path(dir, "0,0,1,-1,0"), cache_path(dir, "0,-1,1,-10,-20"));
    }
}
