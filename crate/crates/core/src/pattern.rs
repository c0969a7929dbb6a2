//! Patterns: canonical encodings of plan equivalence classes.
//!
//! Two partial plans are equivalent when they assign the same steps and group
//! those steps into users the same way. For user-independent constraints the
//! class is all that matters, so the search stores one pattern (and one
//! representative plan) per class.
//!
//! A pattern is a min-vector `x`: `x_i = 0` iff step `i` is unassigned, and
//! nonzero labels appear in first-occurrence order `1, 2, 3, ...`.

use std::collections::btree_map::{self, BTreeMap};
use std::fmt;

use smallvec::SmallVec;

use crate::model::{Plan, StepId, StepSet};

type Entries = SmallVec<[u8; 32]>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    x: Entries,
}

impl Pattern {
    /// The zero pattern over `k` steps.
    pub fn zero(k: usize) -> Pattern {
        Pattern {
            x: SmallVec::from_elem(0, k),
        }
    }

    /// Canonicalises an arbitrary block labelling (`0` = unassigned) into a
    /// min-vector.
    pub fn from_labels(labels: &[u8]) -> Pattern {
        let mut remap = [0u8; 256];
        let mut next = 0u8;
        let x = labels
            .iter()
            .map(|&l| {
                if l == 0 {
                    0
                } else {
                    let slot = &mut remap[l as usize];
                    if *slot == 0 {
                        next += 1;
                        *slot = next;
                    }
                    *slot
                }
            })
            .collect();
        Pattern { x }
    }

    /// Wraps a vector that must already be a min-vector.
    pub fn from_min_vector(x: &[u8]) -> Option<Pattern> {
        let p = Pattern {
            x: SmallVec::from_slice(x),
        };
        p.is_well_formed().then_some(p)
    }

    pub fn k(&self) -> usize {
        self.x.len()
    }

    pub fn entries(&self) -> &[u8] {
        &self.x
    }

    /// Block label of step `s` (0 if unassigned).
    #[inline]
    pub fn label(&self, s: StepId) -> u8 {
        self.x[s.index()]
    }

    /// The assigned step set `T`.
    pub fn assigned(&self) -> StepSet {
        let mut t = StepSet::EMPTY;
        for (i, &v) in self.x.iter().enumerate() {
            if v != 0 {
                t.insert(StepId(i as u32));
            }
        }
        t
    }

    /// Number of blocks, i.e. distinct users in any representative plan.
    pub fn block_count(&self) -> usize {
        self.x.iter().copied().max().unwrap_or(0) as usize
    }

    /// Step set of each block, indexed by `label - 1`.
    pub fn blocks(&self) -> Vec<StepSet> {
        let mut blocks = vec![StepSet::EMPTY; self.block_count()];
        for (i, &v) in self.x.iter().enumerate() {
            if v != 0 {
                blocks[v as usize - 1].insert(StepId(i as u32));
            }
        }
        blocks
    }

    pub fn is_complete(&self) -> bool {
        self.x.iter().all(|&v| v != 0)
    }

    pub fn is_well_formed(&self) -> bool {
        let mut max = 0u8;
        for &v in &self.x {
            if v > max {
                if v != max + 1 {
                    return false;
                }
                max = v;
            }
        }
        self.x.len() <= u8::MAX as usize
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.x.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pattern({self})")
    }
}

/// `Enc(plan)`.
pub fn encode(plan: &Plan, k: usize) -> Pattern {
    debug_assert_eq!(plan.k(), k);
    let mut seen: SmallVec<[(u32, u8); 32]> = SmallVec::new();
    let mut next = 0u8;
    let x = plan
        .assignment()
        .iter()
        .map(|slot| match slot {
            None => 0,
            Some(u) => match seen.iter().find(|(v, _)| *v == u.0) {
                Some(&(_, label)) => label,
                None => {
                    next += 1;
                    seen.push((u.0, next));
                    next
                }
            },
        })
        .collect();
    Pattern { x }
}

/// Whether two plans lie in the same equivalence class: same assigned
/// steps, and two steps share a user in one plan iff they do in the other.
/// Checked pairwise, without going through [`encode`].
pub fn equivalent(a: &Plan, b: &Plan) -> bool {
    if a.k() != b.k() || a.assigned_steps() != b.assigned_steps() {
        return false;
    }
    let steps: Vec<_> = a.assigned_steps().iter().collect();
    steps.iter().enumerate().all(|(i, &s)| {
        steps[i + 1..]
            .iter()
            .all(|&t| (a.get(s) == a.get(t)) == (b.get(s) == b.get(t)))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Insertion {
    Inserted,
    AlreadyPresent,
}

/// Lexicographically ordered set of patterns, each with one representative.
///
/// The first representative inserted for a pattern is kept.
#[derive(Clone, Debug)]
pub struct PatternSet<R> {
    entries: BTreeMap<Pattern, R>,
}

impl<R> Default for PatternSet<R> {
    fn default() -> Self {
        PatternSet {
            entries: BTreeMap::new(),
        }
    }
}

impl<R> PatternSet<R> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, pattern: Pattern, representative: R) -> Insertion {
        match self.entries.entry(pattern) {
            btree_map::Entry::Occupied(_) => Insertion::AlreadyPresent,
            btree_map::Entry::Vacant(v) => {
                v.insert(representative);
                Insertion::Inserted
            }
        }
    }

    pub fn contains(&self, pattern: &Pattern) -> bool {
        self.entries.contains_key(pattern)
    }

    pub fn get(&self, pattern: &Pattern) -> Option<&R> {
        self.entries.get(pattern)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in lexicographic pattern order.
    pub fn iter(&self) -> impl Iterator<Item = (&Pattern, &R)> {
        self.entries.iter()
    }

    pub fn patterns(&self) -> impl Iterator<Item = &Pattern> {
        self.entries.keys()
    }

    /// Moves every entry of `other` whose pattern is not yet present.
    pub fn merge(&mut self, other: PatternSet<R>) {
        for (p, r) in other.entries {
            self.entries.entry(p).or_insert(r);
        }
    }
}
