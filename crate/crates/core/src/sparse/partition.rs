use crate::error::{Error, Result};

/// Assignment of nodes to factorization partitions. Couplings between nodes
/// in different partitions are dropped by the incomplete factorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionMap {
    ids: Vec<usize>,
    parts: usize,
}

impl PartitionMap {
    pub fn single(n: usize) -> Self {
        Self { ids: vec![0; n], parts: 1 }
    }

    /// Splits `0..n` into `parts` contiguous ranges of near-equal length.
    pub fn contiguous(n: usize, parts: usize) -> Result<Self> {
        if parts == 0 || parts > n.max(1) {
            return Err(Error::Config(format!("cannot split {n} nodes into {parts} partitions")));
        }
        let ids = (0..n).map(|i| i * parts / n).collect();
        Ok(Self { ids, parts })
    }

    /// One partition per node.
    pub fn singletons(n: usize) -> Self {
        Self { ids: (0..n).collect(), parts: n }
    }

    /// Validates that ids form the contiguous range `0..P`.
    pub fn from_ids(ids: Vec<usize>) -> Result<Self> {
        let parts = ids.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; parts];
        for &p in &ids {
            seen[p] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Config("partition ids must cover 0..P-1".into()));
        }
        Ok(Self { ids, parts })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    #[inline]
    pub fn of(&self, node: usize) -> usize {
        self.ids[node]
    }

    #[inline]
    pub fn same(&self, a: usize, b: usize) -> bool {
        self.ids[a] == self.ids[b]
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contiguous_ranges_are_balanced() {
        let p = PartitionMap::contiguous(10, 4).unwrap();
        assert_eq!(p.ids(), &[0, 0, 0, 1, 1, 2, 2, 2, 3, 3]);
        assert_eq!(p.parts(), 4);
        assert!(PartitionMap::contiguous(3, 4).is_err());
    }

    #[test]
    fn from_ids_requires_contiguous_range() {
        assert!(PartitionMap::from_ids(vec![0, 2]).is_err());
        assert_eq!(PartitionMap::from_ids(vec![1, 0, 1]).unwrap().parts(), 2);
    }
}
