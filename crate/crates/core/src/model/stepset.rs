use std::fmt;

use super::StepId;

/// Maximum number of steps an instance may have; step sets are 64-bit masks.
pub const MAX_STEPS: usize = 64;

/// A set of steps stored as a bitmask (bit `i` is step `s_{i+1}`).
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StepSet(pub u64);

impl StepSet {
    pub const EMPTY: StepSet = StepSet(0);

    /// The set `{s_1, ..., s_k}`.
    pub fn full(k: usize) -> StepSet {
        debug_assert!(k <= MAX_STEPS);
        if k == MAX_STEPS {
            StepSet(u64::MAX)
        } else {
            StepSet((1u64 << k) - 1)
        }
    }

    pub fn singleton(s: StepId) -> StepSet {
        StepSet(1u64 << s.index())
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn contains(self, s: StepId) -> bool {
        self.0 >> s.index() & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, s: StepId) {
        self.0 |= 1u64 << s.index();
    }

    #[inline]
    pub fn remove(&mut self, s: StepId) {
        self.0 &= !(1u64 << s.index());
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn union(self, other: StepSet) -> StepSet {
        StepSet(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: StepSet) -> StepSet {
        StepSet(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: StepSet) -> StepSet {
        StepSet(self.0 & !other.0)
    }

    #[inline]
    pub fn intersects(self, other: StepSet) -> bool {
        self.0 & other.0 != 0
    }

    #[inline]
    pub fn is_subset(self, other: StepSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Lowest-indexed step in the set.
    pub fn first(self) -> Option<StepId> {
        if self.0 == 0 {
            None
        } else {
            Some(StepId(self.0.trailing_zeros()))
        }
    }

    pub fn iter(self) -> StepSetIter {
        StepSetIter(self.0)
    }
}

impl FromIterator<StepId> for StepSet {
    fn from_iter<I: IntoIterator<Item = StepId>>(iter: I) -> Self {
        let mut set = StepSet::EMPTY;
        for s in iter {
            set.insert(s);
        }
        set
    }
}

impl IntoIterator for StepSet {
    type Item = StepId;
    type IntoIter = StepSetIter;

    fn into_iter(self) -> StepSetIter {
        self.iter()
    }
}

/// Ascending iterator over the steps of a [`StepSet`].
pub struct StepSetIter(u64);

impl Iterator for StepSetIter {
    type Item = StepId;

    #[inline]
    fn next(&mut self) -> Option<StepId> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(StepId(i))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for StepSetIter {}

impl fmt::Debug for StepSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for StepSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")
    }
}
