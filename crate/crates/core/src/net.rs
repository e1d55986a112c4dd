//! Plumbing shared by the online adapters: a pluggable HTTP transport, a
//! clock for time spent waiting on remote services, and an on-disk JSON cache.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Minimal blocking GET used by online adapters. Errors are reported as text;
/// adapters map them into their own "unavailable" variants.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str) -> Result<String, String>;
}

impl<T: Transport + ?Sized> Transport for Arc<T> {
    fn get(&self, url: &str) -> Result<String, String> {
        (**self).get(url)
    }
}

/// Accumulates wall time spent inside remote calls so benchmarks can separate
/// compute time from waiting time.
#[derive(Debug, Default, Clone)]
pub struct IoClock(Arc<AtomicU64>);

impl IoClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn time<T>(&self, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0
            .fetch_add(start.elapsed().as_nanos() as u64, Ordering::Relaxed);
        out
    }

    pub fn total(&self) -> Duration {
        Duration::from_nanos(self.0.load(Ordering::Relaxed))
    }
}

/// A transport that records its waiting time on an [`IoClock`].
pub struct TimedTransport<T> {
    inner: T,
    clock: IoClock,
}

impl<T: Transport> TimedTransport<T> {
    pub fn new(inner: T, clock: IoClock) -> Self {
        TimedTransport { inner, clock }
    }
}

impl<T: Transport> Transport for TimedTransport<T> {
    fn get(&self, url: &str) -> Result<String, String> {
        self.clock.time(|| self.inner.get(url))
    }
}

#[cfg(feature = "online")]
pub struct HttpTransport {
    agent: ureq::Agent,
}

#[cfg(feature = "online")]
impl HttpTransport {
    pub fn new() -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(20)))
            .build();
        HttpTransport { agent: config.into() }
    }
}

#[cfg(feature = "online")]
impl Default for HttpTransport {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(feature = "online")]
impl Transport for HttpTransport {
    fn get(&self, url: &str) -> Result<String, String> {
        let mut resp = self.agent.get(url).call().map_err(|e| e.to_string())?;
        resp.body_mut().read_to_string().map_err(|e| e.to_string())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// JSON files keyed by the SHA-256 of a string key, written atomically
/// (temp file then rename). Concurrent writers of the same key race benignly:
/// entries are idempotent and the last rename wins.
#[derive(Debug, Clone)]
pub struct DiskCache {
    dir: PathBuf,
}

impl DiskCache {
    /// Creates the directory and probes that it is writable.
    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        let probe = dir.join(format!(".probe-{}", std::process::id()));
        std::fs::write(&probe, b"")?;
        std::fs::remove_file(&probe)?;
        Ok(DiskCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{}.json", sha256_hex(key.as_bytes())))
    }

    pub fn get<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        let bytes = std::fs::read(self.path_for(key)).ok()?;
        serde_json::from_slice(&bytes).ok()
    }

    pub fn put<T: Serialize>(&self, key: &str, value: &T) -> std::io::Result<()> {
        let target = self.path_for(key);
        let body = serde_json::to_vec(value).map_err(std::io::Error::other)?;
        let mut tmp = tempfile_in(&self.dir)?;
        tmp.1.write_all(&body)?;
        tmp.1.sync_all()?;
        drop(tmp.1);
        std::fs::rename(&tmp.0, &target)
    }
}

fn tempfile_in(dir: &Path) -> std::io::Result<(PathBuf, std::fs::File)> {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let path = dir.join(format!(".tmp-{}-{n}", std::process::id()));
    let file = std::fs::File::create(&path)?;
    Ok((path, file))
}
