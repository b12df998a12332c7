//! Quasi-equivalences (preorders) and quasi-partitions (a partition plus a
//! unidirectional, transitive influence edge set between its blocks).

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PartitionError {
    #[error("relation is not reflexive at node {0}")]
    NotReflexive(usize),
    #[error("relation is not transitive: {0} ~> {1} ~> {2} but not {0} ~> {2}")]
    NotTransitive(usize, usize, usize),
    #[error("relation matrix has {got} entries, expected {expected}")]
    RelationShape { got: usize, expected: usize },
    #[error("blocks do not partition the node set: {0}")]
    NotAPartition(String),
    #[error("edge references block {block}, only {blocks} blocks exist")]
    EdgeOutOfRange { block: usize, blocks: usize },
    #[error("self-loop on block {0}")]
    SelfLoop(usize),
    #[error("unidirectionality violated: edges {0} -> {1} and {1} -> {0}")]
    Bidirectional(usize, usize),
    #[error("edge set is not transitive: {0} -> {1} -> {2} but not {0} -> {2}")]
    EdgesNotTransitive(usize, usize, usize),
}

/// A reflexive, transitive relation on `n` nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiEquivalence {
    n: usize,
    relation: Vec<bool>,
}

impl QuasiEquivalence {
    /// `relation` is row-major: entry `i * n + j` means `i ~> j`.
    pub fn new(n: usize, relation: Vec<bool>) -> Result<Self, PartitionError> {
        if relation.len() != n * n {
            return Err(PartitionError::RelationShape {
                got: relation.len(),
                expected: n * n,
            });
        }
        if let Some(i) = (0..n).find(|&i| !relation[i * n + i]) {
            return Err(PartitionError::NotReflexive(i));
        }
        for i in 0..n {
            for j in 0..n {
                if !relation[i * n + j] {
                    continue;
                }
                if let Some(k) = (0..n).find(|&k| relation[j * n + k] && !relation[i * n + k]) {
                    return Err(PartitionError::NotTransitive(i, j, k));
                }
            }
        }
        Ok(QuasiEquivalence { n, relation })
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self, PartitionError> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(PartitionError::RelationShape {
                got: r.len(),
                expected: n,
            });
        }
        Self::new(n, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let relation = (0..n * n).map(|idx| idx / n == idx % n).collect();
        QuasiEquivalence { n, relation }
    }

    pub fn full(n: usize) -> Self {
        QuasiEquivalence {
            n,
            relation: vec![true; n * n],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn relates(&self, i: usize, j: usize) -> bool {
        self.relation[i * self.n + j]
    }

    /// Blocks are the classes of mutual relation; a block edge exists when
    /// some member of one relates to some member of the other.
    pub fn to_quasi_partition(&self) -> QuasiPartition {
        let n = self.n;
        let mut block_of = vec![usize::MAX; n];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            if block_of[i] != usize::MAX {
                continue;
            }
            let members: Vec<usize> = (i..n)
                .filter(|&j| self.relates(i, j) && self.relates(j, i))
                .collect();
            for &m in &members {
                block_of[m] = blocks.len();
            }
            blocks.push(members);
        }
        let mut edges = BTreeSet::new();
        for i in 0..n {
            for j in 0..n {
                if block_of[i] != block_of[j] && self.relates(i, j) {
                    edges.insert((block_of[i], block_of[j]));
                }
            }
        }
        QuasiPartition {
            n,
            blocks,
            block_of,
            edges,
        }
    }
}

/// Partition of `0..n` into blocks plus a transitively closed DAG of
/// influence edges between blocks.
///
/// Blocks are kept in canonical order (ascending smallest member) with
/// members sorted, so the smallest member doubles as a block's stable
/// representative across resolutions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
    edges: BTreeSet<(usize, usize)>,
}

impl QuasiPartition {
    /// Canonicalizes block order and validates QP1 and QP2. `edges` index
    /// into `blocks` as given.
    pub fn new(
        n: usize,
        blocks: Vec<Vec<usize>>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, PartitionError> {
        let mut block_of = vec![usize::MAX; n];
        for (b, members) in blocks.iter().enumerate() {
            if members.is_empty() {
                return Err(PartitionError::NotAPartition(format!("block {b} is empty")));
            }
            for &m in members {
                if m >= n {
                    return Err(PartitionError::NotAPartition(format!(
                        "node {m} out of range"
                    )));
                }
                if block_of[m] != usize::MAX {
                    return Err(PartitionError::NotAPartition(format!(
                        "node {m} appears in more than one block"
                    )));
                }
                block_of[m] = b;
            }
        }
        if let Some(m) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(PartitionError::NotAPartition(format!("node {m} is uncovered")));
        }

        let mut order: Vec<usize> = (0..blocks.len()).collect();
        order.sort_by_key(|&b| blocks[b].iter().min().copied());
        let mut renumber = vec![0; blocks.len()];
        for (new, &old) in order.iter().enumerate() {
            renumber[old] = new;
        }
        let mut canonical: Vec<Vec<usize>> = order.iter().map(|&b| blocks[b].clone()).collect();
        for members in &mut canonical {
            members.sort_unstable();
        }
        for b in &mut block_of {
            *b = renumber[*b];
        }
        let mut edge_set = BTreeSet::new();
        for (from, to) in edges {
            for block in [from, to] {
                if block >= blocks.len() {
                    return Err(PartitionError::EdgeOutOfRange {
                        block,
                        blocks: blocks.len(),
                    });
                }
            }
            edge_set.insert((renumber[from], renumber[to]));
        }
        let p = QuasiPartition {
            n,
            blocks: canonical,
            block_of,
            edges: edge_set,
        };
        p.validate()?;
        Ok(p)
    }

    /// All singletons, no edges.
    pub fn discrete(n: usize) -> Self {
        QuasiPartition {
            n,
            blocks: (0..n).map(|i| vec![i]).collect(),
            block_of: (0..n).collect(),
            edges: BTreeSet::new(),
        }
    }

    fn validate(&self) -> Result<(), PartitionError> {
        for &(a, b) in &self.edges {
            if a == b {
                return Err(PartitionError::SelfLoop(a));
            }
            if self.edges.contains(&(b, a)) {
                return Err(PartitionError::Bidirectional(a.min(b), a.max(b)));
            }
        }
        for &(a, b) in &self.edges {
            for &(_, c) in self.edges.range((b, 0)..=(b, usize::MAX)) {
                if !self.edges.contains(&(a, c)) {
                    return Err(PartitionError::EdgesNotTransitive(a, b, c));
                }
            }
        }
        // QP1 together with QP2 rules out longer cycles as well.
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, node: usize) -> usize {
        self.block_of[node]
    }

    /// Smallest member of block `b`.
    pub fn representative(&self, b: usize) -> usize {
        self.blocks[b][0]
    }

    /// Transitively closed edge set.
    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    /// `x ~> x'` iff same block or an edge from `[x]` to `[x']`.
    pub fn influences(&self, x: usize, x2: usize) -> bool {
        let (a, b) = (self.block_of[x], self.block_of[x2]);
        a == b || self.edges.contains(&(a, b))
    }

    pub fn to_relation(&self) -> QuasiEquivalence {
        let n = self.n;
        let relation = (0..n * n).map(|idx| self.influences(idx / n, idx % n)).collect();
        QuasiEquivalence { n, relation }
    }

    /// Hasse diagram of the edge order: closed edges with no intermediate
    /// block.
    pub fn transitive_reduction(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .copied()
            .filter(|&(a, c)| {
                !self
                    .edges
                    .range((a, 0)..=(a, usize::MAX))
                    .any(|&(_, b)| b != c && self.edges.contains(&(b, c)))
            })
            .collect()
    }

    pub fn influence_order(&self) -> InfluenceOrder {
        InfluenceOrder::new(self)
    }
}

/// [`QuasiEquivalence::to_quasi_partition`] as a free function.
pub fn quasi_partition_from_relation(q: &QuasiEquivalence) -> QuasiPartition {
    q.to_quasi_partition()
}

/// [`QuasiPartition::to_relation`] as a free function.
pub fn relation_from_quasi_partition(p: &QuasiPartition) -> QuasiEquivalence {
    p.to_relation()
}

/// Strict partial order on the blocks of a quasi-partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceOrder {
    blocks: usize,
    dominates: Vec<bool>,
}

impl InfluenceOrder {
    pub fn new(p: &QuasiPartition) -> Self {
        let blocks = p.block_count();
        let mut dominates = vec![false; blocks * blocks];
        for &(a, b) in p.edges() {
            dominates[a * blocks + b] = true;
        }
        InfluenceOrder { blocks, dominates }
    }

    pub fn block_count(&self) -> usize {
        self.blocks
    }

    /// Block `a` has influence over block `b`.
    pub fn dominates(&self, a: usize, b: usize) -> bool {
        self.dominates[a * self.blocks + b]
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.dominates(a, b) || self.dominates(b, a)
    }

    pub fn is_total_order(&self) -> bool {
        (0..self.blocks).all(|a| (a + 1..self.blocks).all(|b| self.comparable(a, b)))
    }

    /// Blocks in an order compatible with dominance (most influential first).
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.blocks).collect();
        let below = |a: usize| (0..self.blocks).filter(|&b| self.dominates(a, b)).count();
        order.sort_by_key(|&a| std::cmp::Reverse(below(a)));
        order
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_relation_is_one_block() {
        let p = QuasiEquivalence::full(4).to_quasi_partition();
        assert_eq!(p.blocks(), &[vec![0, 1, 2, 3]]);
        assert!(p.edges().is_empty());
    }

    #[test]
    fn identity_relation_is_discrete() {
        let p = QuasiEquivalence::identity(3).to_quasi_partition();
        assert_eq!(p, QuasiPartition::discrete(3));
        assert_eq!(p.to_relation(), QuasiEquivalence::identity(3));
    }

    #[test]
    fn minimal_asymmetric_relation() {
        let q = QuasiEquivalence::from_rows(&[vec![true, true], vec![false, true]]).unwrap();
        let p = q.to_quasi_partition();
        assert_eq!(p.blocks(), &[vec![0], vec![1]]);
        assert_eq!(p.edges().iter().copied().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn relation_errors() {
        let err = QuasiEquivalence::from_rows(&[vec![true, false], vec![false, false]]);
        assert_eq!(err, Err(PartitionError::NotReflexive(1)));
        let err = QuasiEquivalence::from_rows(&[
            vec![true, true, false],
            vec![false, true, true],
            vec![false, false, true],
        ]);
        assert_eq!(err, Err(PartitionError::NotTransitive(0, 1, 2)));
    }

    fn figure_one() -> QuasiPartition {
        // Six blocks; B1 -> B3, B1 -> B4, B1 -> B5, B2 -> B3, B4 -> B5.
        QuasiPartition::new(
            9,
            vec![vec![0, 1], vec![2], vec![3, 4], vec![5], vec![6, 7], vec![8]],
            [(0, 2), (0, 3), (0, 4), (1, 2), (3, 4)],
        )
        .unwrap()
    }

    #[test]
    fn figure_one_round_trip() {
        let p = figure_one();
        let q = p.to_relation();
        assert_eq!(q.to_quasi_partition(), p);
        assert!(q.relates(0, 8) == false);
        assert!(q.relates(1, 7));
    }

    #[test]
    fn validation_failures() {
        assert_eq!(
            QuasiPartition::new(2, vec![vec![0], vec![1]], [(0, 1), (1, 0)]),
            Err(PartitionError::Bidirectional(0, 1))
        );
        assert_eq!(
            QuasiPartition::new(2, vec![vec![0], vec![1]], [(1, 1)]),
            Err(PartitionError::SelfLoop(1))
        );
        assert_eq!(
            QuasiPartition::new(3, vec![vec![0], vec![1], vec![2]], [(0, 1), (1, 2)]),
            Err(PartitionError::EdgesNotTransitive(0, 1, 2))
        );
        assert!(matches!(
            QuasiPartition::new(3, vec![vec![0], vec![1]], []),
            Err(PartitionError::NotAPartition(_))
        ));
        assert!(matches!(
            QuasiPartition::new(2, vec![vec![0, 1], vec![1]], []),
            Err(PartitionError::NotAPartition(_))
        ));
        assert!(matches!(
            QuasiPartition::new(2, vec![vec![0, 1]], [(0, 3)]),
            Err(PartitionError::EdgeOutOfRange { .. })
        ));
    }

    #[test]
    fn blocks_are_canonicalized() {
        let p = QuasiPartition::new(3, vec![vec![2], vec![1, 0]], [(0, 1)]).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1], vec![2]]);
        assert!(p.has_edge(1, 0));
        assert_eq!(p.representative(1), 2);
    }

    #[test]
    fn reduction_of_a_chain() {
        let p = QuasiPartition::new(3, vec![vec![0], vec![1], vec![2]], [(0, 1), (1, 2), (0, 2)])
            .unwrap();
        assert_eq!(p.edges().len(), 3);
        assert_eq!(p.transitive_reduction(), vec![(0, 1), (1, 2)]);
        let order = p.influence_order();
        assert!(order.dominates(0, 2));
        assert!(order.is_total_order());
        assert_eq!(order.linear_extension(), vec![0, 1, 2]);
    }

    #[test]
    fn no_edges_means_nothing_comparable() {
        let order = QuasiPartition::discrete(3).influence_order();
        for a in 0..3 {
            for b in 0..3 {
                assert!(!order.comparable(a, b));
            }
        }
        assert!(!order.is_total_order());
    }

    #[test]
    fn west_coast_shape_is_total() {
        // {CA, OR, WA} -> {AZ} -> {NV}, plus the closing {CA, OR, WA} -> {NV}.
        let p = QuasiPartition::new(
            5,
            vec![vec![0, 1, 2], vec![3], vec![4]],
            [(0, 1), (0, 2), (1, 2)],
        )
        .unwrap();
        let order = p.influence_order();
        assert!(order.dominates(0, 1) && order.dominates(0, 2));
        assert!(order.is_total_order());
    }
}
