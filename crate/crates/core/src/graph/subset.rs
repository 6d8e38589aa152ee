use serde::{Deserialize, Serialize};

/// Membership bitmask over the node ids `0..universe` of a graph.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeSubset {
    universe: usize,
    words: Vec<u64>,
}

impl NodeSubset {
    pub fn empty(universe: usize) -> Self {
        NodeSubset {
            universe,
            words: vec![0; universe.div_ceil(64)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for v in 0..universe {
            s.insert(v);
        }
        s
    }

    pub fn from_nodes<I: IntoIterator<Item = usize>>(universe: usize, nodes: I) -> Self {
        let mut s = Self::empty(universe);
        for v in nodes {
            s.insert(v);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        v < self.universe && self.words[v / 64] & (1u64 << (v % 64)) != 0
    }

    /// Panics if `v` is outside the universe.
    #[inline]
    pub fn insert(&mut self, v: usize) -> bool {
        assert!(v < self.universe, "node {v} outside universe {}", self.universe);
        let mask = 1u64 << (v % 64);
        let was = self.words[v / 64] & mask != 0;
        self.words[v / 64] |= mask;
        !was
    }

    #[inline]
    pub fn remove(&mut self, v: usize) -> bool {
        if v >= self.universe {
            return false;
        }
        let mask = 1u64 << (v % 64);
        let was = self.words[v / 64] & mask != 0;
        self.words[v / 64] &= !mask;
        was
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Ascending node ids.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn is_disjoint(&self, other: &NodeSubset) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & b == 0)
    }

    pub fn union_with(&mut self, other: &NodeSubset) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn is_subset_of(&self, other: &NodeSubset) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }
}

impl std::fmt::Debug for NodeSubset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_iter() {
        let mut s = NodeSubset::empty(130);
        assert!(s.is_empty());
        s.insert(0);
        s.insert(64);
        s.insert(129);
        assert!(!s.insert(64));
        assert_eq!(s.to_vec(), vec![0, 64, 129]);
        assert_eq!(s.len(), 3);
        assert!(s.remove(64));
        assert!(!s.contains(64));
        assert!(!s.contains(500));
    }

    #[test]
    fn set_relations() {
        let a = NodeSubset::from_nodes(10, [1, 2]);
        let b = NodeSubset::from_nodes(10, [3]);
        let c = NodeSubset::from_nodes(10, [1, 2, 3]);
        assert!(a.is_disjoint(&b));
        assert!(a.is_subset_of(&c));
        let mut u = a.clone();
        u.union_with(&b);
        assert_eq!(u, c);
    }
}
