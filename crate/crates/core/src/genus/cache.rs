use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{partition_into_genera, same_genus, ClassRecord, GenusRecord};
use crate::error::{Error, Result};
use crate::exactnum::{Rational, RationalJson};
use crate::lambda::{automorphism_count, enumerate_classes, minkowski_reduce, HalfIntegralMatrix};

/// On-disk list of the classes of one rank and level with their genus partition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusCache {
    pub rank: usize,
    pub level: u64,
    pub classes: Vec<CachedClass>,
    pub genera: Vec<CachedGenus>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CachedClass {
    #[serde(rename = "twoT")]
    pub two_t: HalfIntegralMatrix,
    pub epsilon: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CachedGenus {
    /// Indices into the class list.
    pub classes: Vec<usize>,
    pub level: u64,
    /// Discriminant of the primitive character; absent for odd rank.
    pub character: Option<i64>,
    pub mass: RationalJson,
}

impl GenusCache {
    /// Enumerates the classes with `level | level_divides` and partitions them.
    pub fn build(rank: usize, level_divides: u64) -> Result<Self> {
        let classes = enumerate_classes(rank, level_divides, u64::MAX)?;
        let genera = partition_into_genera(&classes)?;
        Ok(GenusCache::from_genera(rank, level_divides, &genera))
    }

    pub fn from_genera(rank: usize, level: u64, genera: &[GenusRecord]) -> Self {
        let mut classes: Vec<CachedClass> = genera
            .iter()
            .flat_map(|g| g.classes.iter())
            .map(|c| CachedClass { two_t: c.rep.clone(), epsilon: c.epsilon })
            .collect();
        classes.sort_by(|a, b| a.two_t.cmp(&b.two_t));
        let index = |rep: &HalfIntegralMatrix| classes.iter().position(|c| &c.two_t == rep).expect("class listed");
        let mut cached: Vec<CachedGenus> = genera
            .iter()
            .map(|g| {
                let mut idx: Vec<usize> = g.classes.iter().map(|c| index(&c.rep)).collect();
                idx.sort_unstable();
                CachedGenus {
                    classes: idx,
                    level: g.level,
                    character: g.character.map(|c| c.discriminant()),
                    mass: RationalJson::from(&g.mass),
                }
            })
            .collect();
        cached.sort_by(|a, b| a.classes.cmp(&b.classes));
        GenusCache { rank, level, classes, genera: cached }
    }

    /// The genera, after checking every stored invariant against a recomputation.
    pub fn genera(&self) -> Result<Vec<GenusRecord>> {
        let bad = |msg: String| Error::InvalidArgument(format!("genus cache: {msg}"));
        let mut used = vec![false; self.classes.len()];
        for c in &self.classes {
            if c.two_t.size() != self.rank {
                return Err(bad(format!("class {} has the wrong rank", c.two_t)));
            }
            if minkowski_reduce(&c.two_t)? != c.two_t {
                return Err(bad(format!("class {} is not canonical", c.two_t)));
            }
            if automorphism_count(&c.two_t)? != c.epsilon {
                return Err(bad(format!("class {} has a wrong automorphism count", c.two_t)));
            }
            if !self.level.is_multiple_of(c.two_t.level()?) {
                return Err(bad(format!("class {} has level not dividing {}", c.two_t, self.level)));
            }
        }
        let mut out = Vec::with_capacity(self.genera.len());
        for g in &self.genera {
            if g.classes.is_empty() {
                return Err(bad("empty genus".into()));
            }
            let mut members = Vec::with_capacity(g.classes.len());
            for &i in &g.classes {
                let c = self.classes.get(i).ok_or_else(|| bad(format!("class index {i} out of range")))?;
                if std::mem::replace(&mut used[i], true) {
                    return Err(bad(format!("class index {i} listed twice")));
                }
                members.push(ClassRecord { rep: c.two_t.clone(), epsilon: c.epsilon });
            }
            for c in &members[1..] {
                if !same_genus(&members[0].rep, &c.rep)? {
                    return Err(bad(format!("{} and {} are not in one genus", members[0].rep, c.rep)));
                }
            }
            let record = super::genus_record(members)?;
            let mass = Rational::try_from(&g.mass)?;
            if record.mass != mass || record.level != g.level || record.character.map(|c| c.discriminant()) != g.character {
                return Err(bad("stored genus invariants disagree with the classes".into()));
            }
            out.push(record);
        }
        if used.iter().any(|u| !u) {
            return Err(bad("class not assigned to a genus".into()));
        }
        for (i, a) in out.iter().enumerate() {
            for b in &out[i + 1..] {
                if same_genus(&a.classes[0].rep, &b.classes[0].rep)? {
                    return Err(bad("two stored genera coincide".into()));
                }
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("cache serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Standard file name inside a cache directory.
    pub fn file_name(rank: usize, level: u64) -> String {
        format!("genera-r{rank}-l{level}.json")
    }

    pub fn path_in(dir: &Path, rank: usize, level: u64) -> PathBuf {
        dir.join(GenusCache::file_name(rank, level))
    }

    /// Writes to a sibling temporary file, then renames over `path`.
    pub fn save_atomic(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
        fs::write(&tmp, self.to_json())?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        GenusCache::from_json(&fs::read_to_string(path)?)
    }

    /// Loads `dir/<file_name>` when present, otherwise builds and saves it.
    pub fn load_or_build(dir: &Path, rank: usize, level: u64) -> Result<Self> {
        let path = GenusCache::path_in(dir, rank, level);
        if path.exists() {
            return GenusCache::load(&path);
        }
        let cache = GenusCache::build(rank, level)?;
        cache.save_atomic(&path)?;
        Ok(cache)
    }
}
