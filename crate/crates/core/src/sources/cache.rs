//! Disk cache for online providers.

use std::path::Path;
use std::sync::{Arc, OnceLock};

use super::{Item, Provider, SourceError};
use crate::net::DiskCache;

pub struct CachedProvider {
    inner: Arc<dyn Provider>,
    cache: DiskCache,
    pool: OnceLock<Arc<[Item]>>,
}

impl CachedProvider {
    fn key(&self, what: &str, seed: &str) -> String {
        format!("{}|{what}|{seed}", self.inner.cache_name())
    }
}

/// Wraps `provider` in a disk cache rooted at `cache_dir`. Offline providers
/// are returned unchanged, but the directory must still be writable.
pub fn cached(provider: Arc<dyn Provider>, cache_dir: &Path) -> Result<Arc<dyn Provider>, SourceError> {
    let cache = DiskCache::open(cache_dir)
        .map_err(|e| SourceError::Io { path: cache_dir.display().to_string(), reason: e.to_string() })?;
    if !provider.is_online() {
        return Ok(provider);
    }
    Ok(Arc::new(CachedProvider { inner: provider, cache, pool: OnceLock::new() }))
}

impl Provider for CachedProvider {
    fn search(&self, seed: &str) -> Result<Vec<Item>, SourceError> {
        let key = self.key("search", seed);
        if let Some(hit) = self.cache.get::<Vec<Item>>(&key) {
            return Ok(hit);
        }
        let items = self.inner.search(seed)?;
        if let Err(e) = self.cache.put(&key, &items) {
            log::warn!("cache write failed for {}: {e}", self.inner.cache_name());
        }
        Ok(items)
    }

    fn pool(&self) -> Result<Arc<[Item]>, SourceError> {
        if let Some(p) = self.pool.get() {
            return Ok(p.clone());
        }
        let key = self.key("pool", "");
        let items: Arc<[Item]> = match self.cache.get::<Vec<Item>>(&key) {
            Some(hit) => hit.into(),
            None => {
                let items = self.inner.pool()?;
                if let Err(e) = self.cache.put(&key, &items.to_vec()) {
                    log::warn!("cache write failed for {}: {e}", self.inner.cache_name());
                }
                items
            }
        };
        Ok(self.pool.get_or_init(|| items).clone())
    }

    fn is_online(&self) -> bool {
        true
    }

    fn cache_name(&self) -> &str {
        self.inner.cache_name()
    }
}
