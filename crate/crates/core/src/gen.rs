//! Seeded random instances and experiment grids.
//!
//! A single ChaCha8 stream drives every draw of one instance, in this order:
//! authorization lists (user by user), not-equals pairs, at-most scopes,
//! at-least scopes.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{serialize_instance, Constraint, StepId, StepSet, WorkflowInstance, MAX_STEPS};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("bad grid `{text}`: {reason}")]
    Grid { text: String, reason: String },
    #[error("manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub k: usize,
    pub n: usize,
    /// Percentage of all step pairs that get a not-equals constraint.
    pub d: u32,
    /// Number of at-most constraints, and also of at-least constraints.
    pub b: usize,
    pub r: u32,
    /// Scope size of the counting constraints.
    pub t: usize,
    pub seed: u64,
}

impl GenParams {
    pub fn new(k: usize, n: usize, d: u32, b: usize, seed: u64) -> Self {
        GenParams {
            k,
            n,
            d,
            b,
            r: 3,
            t: 5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: String| Err(GenError::InvalidParams(m));
        if self.k == 0 || self.k > MAX_STEPS {
            return bad(format!("steps must be in 1..={MAX_STEPS}, got {}", self.k));
        }
        if self.n == 0 {
            return bad("at least one user is required".into());
        }
        if self.d > 100 {
            return bad(format!("density is a percentage, got {}", self.d));
        }
        if self.b > 0 {
            if self.t == 0 || self.t > self.k {
                return bad(format!("scope size {} must be in 1..={}", self.t, self.k));
            }
            if self.r == 0 || self.r as usize >= self.t {
                return bad(format!("threshold {} must be in 1..{}", self.r, self.t));
            }
        }
        Ok(())
    }

    /// Largest authorization list size, `ceil(k/2)`.
    pub fn max_auth(&self) -> usize {
        self.k.div_ceil(2)
    }

    /// `d% of C(k,2)`, halves rounded up.
    pub fn not_equals_count(&self) -> usize {
        let pairs = self.k * (self.k - 1) / 2;
        (self.d as usize * pairs + 50) / 100
    }
}

fn random_subset(rng: &mut ChaCha8Rng, k: usize, size: usize) -> StepSet {
    let mut steps: Vec<u32> = (0..k as u32).collect();
    let (chosen, _) = steps.partial_shuffle(rng, size);
    chosen.iter().map(|&s| StepId(s)).collect()
}

pub fn generate(p: &GenParams) -> Result<WorkflowInstance, GenError> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let k = p.k;

    let auth: Vec<StepSet> = (0..p.n)
        .map(|_| {
            let size = rng.gen_range(1..=p.max_auth());
            random_subset(&mut rng, k, size)
        })
        .collect();

    let mut constraints = Vec::new();
    let mut pairs: Vec<(u32, u32)> = (0..k as u32)
        .flat_map(|i| (i + 1..k as u32).map(move |j| (i, j)))
        .collect();
    let (chosen, _) = pairs.partial_shuffle(&mut rng, p.not_equals_count());
    constraints.extend(
        chosen
            .iter()
            .map(|&(i, j)| Constraint::NotEquals(StepId(i), StepId(j))),
    );
    for _ in 0..p.b {
        let scope = random_subset(&mut rng, k, p.t);
        constraints.push(Constraint::AtMost { r: p.r, scope });
    }
    for _ in 0..p.b {
        let scope = random_subset(&mut rng, k, p.t);
        constraints.push(Constraint::AtLeast { r: p.r, scope });
    }

    WorkflowInstance::new(k, auth, constraints).map_err(|e| GenError::InvalidParams(e.to_string()))
}

/// Steps, densities and counting-constraint counts of an experiment grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    pub ks: Vec<usize>,
    pub ds: Vec<u32>,
    pub bs: Vec<usize>,
    pub r: u32,
    pub t: usize,
}

impl Grid {
    /// Parses `k=15:d=10,20,30:b=2..32..2`. Each list item is a number,
    /// `lo..hi` or `lo..hi..step` (inclusive). `r=` and `t=` are optional.
    pub fn parse(text: &str) -> Result<Grid, GenError> {
        let err = |reason: String| GenError::Grid {
            text: text.to_string(),
            reason,
        };
        let (mut ks, mut ds, mut bs) = (None, None, None);
        let (mut r, mut t) = (3u32, 5usize);
        for part in text.split(':') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=values, got `{part}`")))?;
            let values = parse_values(value).map_err(&err)?;
            match key.trim() {
                "k" => ks = Some(values),
                "d" => ds = Some(values),
                "b" => bs = Some(values),
                "r" | "t" => {
                    let [v] = values[..] else {
                        return Err(err(format!("`{key}` takes a single value")));
                    };
                    if key.trim() == "r" {
                        r = v as u32;
                    } else {
                        t = v as usize;
                    }
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        let need = |v: Option<Vec<u64>>, key: &str| {
            v.filter(|v| !v.is_empty())
                .ok_or_else(|| err(format!("missing `{key}=`")))
        };
        let grid = Grid {
            ks: need(ks, "k")?.into_iter().map(|v| v as usize).collect(),
            ds: need(ds, "d")?.into_iter().map(|v| v as u32).collect(),
            bs: need(bs, "b")?.into_iter().map(|v| v as usize).collect(),
            r,
            t,
        };
        for &k in &grid.ks {
            for &d in &grid.ds {
                for &b in &grid.bs {
                    let mut p = GenParams::new(k, 10 * k, d, b, 0);
                    p.r = grid.r;
                    p.t = grid.t;
                    p.validate().map_err(|e| err(e.to_string()))?;
                }
            }
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.ks.len() * self.ds.len() * self.bs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn parse_values(text: &str) -> Result<Vec<u64>, String> {
    let num = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|_| format!("`{s}` is not a number"))
    };
    let mut out = Vec::new();
    for item in text.split(',') {
        let bits: Vec<&str> = item.split("..").collect();
        match bits[..] {
            [v] => out.push(num(v)?),
            [lo, hi] | [lo, hi, _] => {
                let step = if bits.len() == 3 { num(bits[2])? } else { 1 };
                if step == 0 {
                    return Err("range step must be positive".into());
                }
                let (lo, hi) = (num(lo)?, num(hi)?);
                if lo > hi {
                    return Err(format!("empty range `{item}`"));
                }
                out.extend((lo..=hi).step_by(step as usize));
            }
            _ => return Err(format!("bad range `{item}`")),
        }
    }
    Ok(out)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of one grid cell, derived from the suite seed and the cell.
pub fn cell_seed(seed: u64, k: usize, b: usize, d: u32) -> u64 {
    [k as u64, b as u64, d as u64]
        .into_iter()
        .fold(splitmix64(seed), |acc, v| splitmix64(acc ^ v))
}

#[derive(Clone, Debug)]
pub struct SuiteEntry {
    /// `k-b.d`
    pub label: String,
    pub params: GenParams,
    pub instance: WorkflowInstance,
}

/// One instance per grid cell, ordered by `k`, then `b`, then `d`.
pub fn generate_suite(grid: &Grid, seed: u64) -> Result<Vec<SuiteEntry>, GenError> {
    if grid.is_empty() {
        return Err(GenError::Grid {
            text: format!("{grid:?}"),
            reason: "empty grid".into(),
        });
    }
    let mut out = Vec::with_capacity(grid.len());
    for &k in &grid.ks {
        for &b in &grid.bs {
            for &d in &grid.ds {
                let mut params = GenParams::new(k, 10 * k, d, b, cell_seed(seed, k, b, d));
                params.r = grid.r;
                params.t = grid.t;
                let instance = generate(&params)?;
                out.push(SuiteEntry {
                    label: format!("{k}-{b}.{d}"),
                    params,
                    instance,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestRow {
    pub label: String,
    pub k: usize,
    pub n: usize,
    pub b: usize,
    pub d: u32,
    pub seed: u64,
    pub path: PathBuf,
}

pub const MANIFEST_HEADER: &str = "label,k,n,b,d,seed,path";

/// Writes `<label>.wsp` per entry and `manifest.csv` into `dir`; returns
/// the manifest path. Paths in the manifest are relative to `dir`.
pub fn write_suite(entries: &[SuiteEntry], dir: &Path) -> Result<PathBuf, GenError> {
    fs::create_dir_all(dir)?;
    let mut manifest = String::new();
    let _ = writeln!(manifest, "{MANIFEST_HEADER}");
    for e in entries {
        let file = format!("{}.wsp", e.label);
        fs::write(dir.join(&file), serialize_instance(&e.instance))?;
        let p = &e.params;
        let _ = writeln!(
            manifest,
            "{},{},{},{},{},{},{}",
            e.label, p.k, p.n, p.b, p.d, p.seed, file
        );
    }
    let path = dir.join("manifest.csv");
    fs::write(&path, manifest)?;
    Ok(path)
}

/// Parses manifest text; relative paths are resolved against `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestRow>, GenError> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() || (line == 1 && raw == MANIFEST_HEADER) {
            continue;
        }
        let err = |reason: &str| GenError::Manifest {
            line,
            reason: reason.to_string(),
        };
        let f: Vec<&str> = raw.splitn(7, ',').collect();
        if f.len() != 7 {
            return Err(err("expected 7 fields"));
        }
        let path = PathBuf::from(f[6]);
        rows.push(ManifestRow {
            label: f[0].to_string(),
            k: f[1].parse().map_err(|_| err("bad k"))?,
            n: f[2].parse().map_err(|_| err("bad n"))?,
            b: f[3].parse().map_err(|_| err("bad b"))?,
            d: f[4].parse().map_err(|_| err("bad d"))?,
            seed: f[5].parse().map_err(|_| err("bad seed"))?,
            path: if path.is_relative() {
                base.join(path)
            } else {
                path
            },
        });
    }
    Ok(rows)
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>, GenError> {
    let text = fs::read_to_string(path)?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Small instance for oracle cross-checks: `k` steps, `n` users, each
/// user authorized for each step with probability 1/2, and up to `k + 1`
/// constraints of mixed kinds (equals only if `with_equals`).
pub fn micro_instance(seed: u64, k: usize, n: usize, with_equals: bool) -> WorkflowInstance {
    assert!(
        (1..=MAX_STEPS).contains(&k) && n >= 1,
        "micro instance needs k, n >= 1"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let auth: Vec<StepSet> = (0..n)
        .map(|_| {
            StepSet(
                (0..k)
                    .filter(|_| rng.gen_bool(0.5))
                    .fold(0, |m, s| m | 1 << s),
            )
        })
        .collect();
    let kinds = if with_equals { 4 } else { 3 };
    let mut constraints = Vec::new();
    for _ in 0..rng.gen_range(0..=k + 1) {
        let kind = rng.gen_range(0..kinds);
        if kind >= 2 && k < 2 {
            continue;
        }
        match kind {
            0 | 1 => {
                let size = rng.gen_range(2..=k.max(2)).min(k);
                if size < 2 {
                    continue;
                }
                let r = rng.gen_range(1..size as u32);
                let scope = random_subset(&mut rng, k, size);
                constraints.push(if kind == 0 {
                    Constraint::AtMost { r, scope }
                } else {
                    Constraint::AtLeast { r, scope }
                });
            }
            _ => {
                let pair = random_subset(&mut rng, k, 2);
                let (s, t) = (pair.iter().next().unwrap(), pair.iter().nth(1).unwrap());
                constraints.push(if kind == 2 {
                    Constraint::NotEquals(s, t)
                } else {
                    Constraint::Equals(s, t)
                });
            }
        }
    }
    WorkflowInstance::new(k, auth, constraints).expect("micro instances are well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_bounds() {
        let p = GenParams::new(20, 200, 10, 10, 1);
        assert_eq!(p.not_equals_count(), 19);
        assert_eq!(GenParams::new(15, 150, 10, 2, 0).max_auth(), 8);
        // 10.5 rounds up
        assert_eq!(GenParams::new(15, 1, 10, 0, 0).not_equals_count(), 11);
        let inst = generate(&p).unwrap();
        assert_eq!(inst.n(), 200);
        let ne = inst
            .constraints()
            .iter()
            .filter(|c| matches!(c, Constraint::NotEquals(..)))
            .count();
        assert_eq!(ne, 19);
        assert_eq!(inst.constraints().len(), 19 + 20);
        for u in inst.users() {
            assert!((1..=10).contains(&inst.auth(u).len()));
        }
    }

    #[test]
    fn deterministic() {
        let p = GenParams::new(12, 40, 30, 4, 99);
        assert_eq!(
            serialize_instance(&generate(&p).unwrap()),
            serialize_instance(&generate(&p).unwrap())
        );
        let q = GenParams { seed: 100, ..p };
        assert_ne!(
            serialize_instance(&generate(&p).unwrap()),
            serialize_instance(&generate(&q).unwrap())
        );
    }

    #[test]
    fn invalid_params() {
        assert!(generate(&GenParams::new(0, 1, 0, 0, 0)).is_err());
        assert!(generate(&GenParams::new(4, 1, 0, 1, 0)).is_err());
        assert!(generate(&GenParams::new(4, 1, 101, 0, 0)).is_err());
        assert!(generate(&GenParams::new(4, 0, 0, 0, 0)).is_err());
        // no counting constraints: scope size is irrelevant
        assert!(generate(&GenParams::new(4, 4, 50, 0, 0)).is_ok());
    }

    #[test]
    fn micro_instances_are_small_and_seeded() {
        for seed in 0..200 {
            let a = micro_instance(seed, 4, 3, seed % 2 == 0);
            assert_eq!(
                serialize_instance(&a),
                serialize_instance(&micro_instance(seed, 4, 3, seed % 2 == 0))
            );
            assert!(a.constraints().len() <= 5);
            if seed % 2 == 1 {
                assert!(!a.has_equals());
            }
        }
        assert_eq!(micro_instance(3, 1, 2, true).k(), 1);
    }

    #[test]
    fn grid_sizes() {
        let g = Grid::parse("k=15:d=10,20,30:b=2..32..2").unwrap();
        assert_eq!(g.bs.len(), 16);
        assert_eq!(g.len(), 48);
        assert_eq!(
            Grid::parse("k=20:d=10,20,30:b=10..38..2").unwrap().len(),
            45
        );
        assert_eq!(
            Grid::parse("k=25:d=10,20,30:b=22..36..2").unwrap().len(),
            24
        );
        let g = Grid::parse("k=6,8:d=0..20..10:b=1:r=2:t=3").unwrap();
        assert_eq!(
            (g.ks.clone(), g.ds.clone(), g.r, g.t),
            (vec![6, 8], vec![0, 10, 20], 2, 3)
        );
        assert!(Grid::parse("k=15:d=10").is_err());
        assert!(Grid::parse("k=15:d=10:b=5..1").is_err());
        assert!(Grid::parse("k=15:d=10:b=2:z=1").is_err());
        assert!(Grid::parse("k=4:d=10:b=2").is_err());
    }

    #[test]
    fn suite_labels_and_manifest_round_trip() {
        let grid = Grid::parse("k=6:d=10,20:b=1..2").unwrap();
        let suite = generate_suite(&grid, 7).unwrap();
        let labels: Vec<&str> = suite.iter().map(|e| e.label.as_str()).collect();
        assert_eq!(labels, ["6-1.10", "6-1.20", "6-2.10", "6-2.20"]);
        assert!(suite.iter().all(|e| e.instance.n() == 60));
        let dir = std::env::temp_dir().join(format!("wsp-gen-test-{}", std::process::id()));
        let manifest = write_suite(&suite, &dir).unwrap();
        let rows = read_manifest(&manifest).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[2].label, "6-2.10");
        assert_eq!(rows[2].seed, suite[2].params.seed);
        let text = fs::read_to_string(&rows[2].path).unwrap();
        assert_eq!(text, serialize_instance(&suite[2].instance));
        fs::remove_dir_all(dir).unwrap();
    }
}
