//! Parameter identifiers and canonical parameter sets.

use alloc::vec::Vec;
use core::fmt;

/// Dense parameter identifier, `0 <= id < q` for a universe of size `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamId(pub u32);

impl ParamId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ParamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for ParamId {
    fn from(v: u32) -> Self {
        ParamId(v)
    }
}

/// A set of parameters stored sorted by id with no duplicates.
///
/// Equality is set equality; iteration is always in ascending id order.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamSet(Vec<ParamId>);

impl ParamSet {
    pub fn new() -> Self {
        ParamSet(Vec::new())
    }

    /// Builds a set from arbitrary ids, silently dropping duplicates.
    pub fn from_ids<I, T>(ids: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<ParamId>,
    {
        let mut v: Vec<ParamId> = ids.into_iter().map(Into::into).collect();
        v.sort_unstable();
        v.dedup();
        ParamSet(v)
    }

    /// Builds a set, returning the first repeated id if any.
    pub fn try_from_ids<I, T>(ids: I) -> Result<Self, ParamId>
    where
        I: IntoIterator<Item = T>,
        T: Into<ParamId>,
    {
        let mut v: Vec<ParamId> = ids.into_iter().map(Into::into).collect();
        v.sort_unstable();
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(w[0]);
        }
        Ok(ParamSet(v))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[ParamId] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = ParamId> + '_ {
        self.0.iter().copied()
    }

    #[inline]
    pub fn contains(&self, p: ParamId) -> bool {
        self.0.binary_search(&p).is_ok()
    }

    /// The `i`-th member in ascending id order.
    #[inline]
    pub fn nth(&self, i: usize) -> Option<ParamId> {
        self.0.get(i).copied()
    }

    pub fn first(&self) -> Option<ParamId> {
        self.0.first().copied()
    }

    /// `self ⊆ other`, by a linear merge of the two sorted sequences.
    pub fn is_subset(&self, other: &ParamSet) -> bool {
        let (a, b) = (&self.0, &other.0);
        if a.len() > b.len() {
            return false;
        }
        let mut j = 0;
        for &x in a {
            while j < b.len() && b[j] < x {
                j += 1;
            }
            if j == b.len() || b[j] != x {
                return false;
            }
            j += 1;
        }
        true
    }

    pub fn insert(&mut self, p: ParamId) -> bool {
        match self.0.binary_search(&p) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, p);
                true
            }
        }
    }

    /// 64-bit FNV-1a digest of the canonical id sequence.
    pub fn fingerprint(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        for p in &self.0 {
            for byte in p.0.to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(PRIME);
            }
        }
        h
    }
}

impl<'a> IntoIterator for &'a ParamSet {
    type Item = &'a ParamId;
    type IntoIter = core::slice::Iter<'a, ParamId>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl FromIterator<ParamId> for ParamSet {
    fn from_iter<I: IntoIterator<Item = ParamId>>(iter: I) -> Self {
        ParamSet::from_ids(iter)
    }
}

impl fmt::Display for ParamSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_order_and_dedup() {
        let s = ParamSet::from_ids([5u32, 1, 3, 1]);
        assert_eq!(s.as_slice(), &[ParamId(1), ParamId(3), ParamId(5)]);
        assert_eq!(ParamSet::try_from_ids([2u32, 2]), Err(ParamId(2)));
    }

    #[test]
    fn subset_edges() {
        let empty = ParamSet::new();
        let ab = ParamSet::from_ids([0u32, 1]);
        let abc = ParamSet::from_ids([0u32, 1, 2]);
        assert!(empty.is_subset(&ab));
        assert!(ab.is_subset(&abc));
        assert!(!abc.is_subset(&ab));
        assert!(!ParamSet::from_ids([3u32]).is_subset(&abc));
    }

    proptest! {
        #[test]
        fn subset_matches_naive(a in proptest::collection::vec(0u32..20, 0..8),
                                b in proptest::collection::vec(0u32..20, 0..12)) {
            let sa = ParamSet::from_ids(a.iter().copied());
            let sb = ParamSet::from_ids(b.iter().copied());
            let naive = a.iter().all(|x| b.contains(x));
            prop_assert_eq!(sa.is_subset(&sb), naive);
        }
    }
}
