//! On-disk caches: genus files keyed by (rank, level), expansion dumps keyed
//! by a content hash of (k, degree, bound).

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use siegel_core::eisenstein::eisenstein_qexp;
use siegel_core::fourier::ExpansionDump;
use siegel_core::genus::GenusCache;
use siegel_core::{Error, QExpansion, Result};

pub struct Store {
    dir: Option<PathBuf>,
}

impl Store {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Store { dir }
    }

    pub fn cached_genus_file(&self, rank: usize, level: u64) -> Option<PathBuf> {
        let path = GenusCache::path_in(self.dir.as_deref()?, rank, level);
        path.exists().then_some(path)
    }

    pub fn genus_cache(&self, rank: usize, level: u64) -> Result<GenusCache> {
        match &self.dir {
            Some(dir) => GenusCache::load_or_build(dir, rank, level),
            None => GenusCache::build(rank, level),
        }
    }

    fn expansion_path(dir: &Path, k: u64, n: usize, bound: i64) -> PathBuf {
        let digest = Sha256::digest(format!("eisenstein;k={k};degree={n};bound={bound}").as_bytes());
        dir.join(format!("eisenstein-{}.json", &hex::encode(digest)[..16]))
    }

    /// `E_k^{(n)}` on the window `bound`; unreadable cache entries are recomputed.
    pub fn eisenstein(&self, k: u64, n: usize, bound: i64) -> Result<QExpansion> {
        let compute = || eisenstein_qexp(u32::try_from(k).map_err(|_| Error::OutOfScale(format!("weight {k}")))?, n, bound);
        let Some(dir) = &self.dir else { return compute() };
        let path = Store::expansion_path(dir, k, n, bound);
        if let Some(f) = fs::read_to_string(&path)
            .ok()
            .and_then(|t| serde_json::from_str::<ExpansionDump>(&t).ok())
            .filter(|d| d.degree == n && d.bound == bound)
            .and_then(|d| QExpansion::from_dump(&d).ok())
        {
            return Ok(f);
        }
        let f = compute()?;
        fs::create_dir_all(dir)?;
        let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
        fs::write(&tmp, f.to_json()?)?;
        fs::rename(&tmp, &path)?;
        Ok(f)
    }
}
