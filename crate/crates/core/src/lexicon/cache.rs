//! Binary index cache written beside a lexicon source file.
//!
//! Layout: 8-byte magic, little-endian `u32` format version, 32-byte SHA-256
//! of the source file, little-endian `u64` payload length, JSON payload.

use std::fs;
use std::path::{Path, PathBuf};

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{read_lexicon, LexicalEntry, Lexicon, SenseContext};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"IDLXIDX\0";
pub const CACHE_FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 32 + 8;

#[derive(Serialize, Deserialize)]
struct Payload {
    extra_columns: Vec<String>,
    entries: Vec<LexicalEntry>,
    senses: Vec<SenseContext>,
}

pub fn cache_path_for(source: &Path) -> PathBuf {
    let mut name = source.file_name().unwrap_or_default().to_os_string();
    name.push(".idxcache");
    source.with_file_name(name)
}

/// Loads a lexicon, reusing the cache beside `source` when its checksum still
/// matches and refreshing it otherwise. Cache write failures are logged only.
pub fn load_with_cache(source: impl AsRef<Path>) -> Result<Lexicon> {
    let source = source.as_ref();
    let bytes = fs::read(source).map_err(|e| Error::io(source, e))?;
    let checksum: [u8; 32] = Sha256::digest(&bytes).into();
    let cache = cache_path_for(source);

    if let Ok(cached) = fs::read(&cache) {
        match decode(&cached, &checksum) {
            Some(lexicon) => {
                debug!("lexicon loaded from cache {}", cache.display());
                return Ok(lexicon);
            }
            None => debug!("stale or unreadable cache {}", cache.display()),
        }
    }

    let lexicon = read_lexicon(bytes.as_slice())?;
    if let Err(e) = fs::write(&cache, encode(&lexicon, &checksum)?) {
        warn!("could not write lexicon cache {}: {e}", cache.display());
    }
    Ok(lexicon)
}

fn encode(lexicon: &Lexicon, checksum: &[u8; 32]) -> Result<Vec<u8>> {
    let payload = serde_json::to_vec(&Payload {
        extra_columns: lexicon.extra_columns().to_vec(),
        entries: lexicon.entries().to_vec(),
        senses: lexicon.senses().to_vec(),
    })?;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&CACHE_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(checksum);
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload);
    Ok(out)
}

fn decode(bytes: &[u8], checksum: &[u8; 32]) -> Option<Lexicon> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return None;
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().ok()?);
    if version != CACHE_FORMAT_VERSION || &bytes[12..44] != checksum {
        return None;
    }
    let len = u64::from_le_bytes(bytes[44..52].try_into().ok()?) as usize;
    let payload = bytes.get(HEADER_LEN..HEADER_LEN.checked_add(len)?)?;
    let payload: Payload = serde_json::from_slice(payload).ok()?;
    Lexicon::from_parts(payload.entries, payload.senses, payload.extra_columns).ok()
}
