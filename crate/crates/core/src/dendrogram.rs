//! Quasi-dendrograms stored as finite event lists, and the two maps that
//! identify them with quasi-ultrametrics.
//!
//! A quasi-dendrogram is piecewise constant and right continuous in the
//! resolution `delta`, so it is fully described by what changes at each
//! critical resolution:
//!
//! * a [`MergeEvent`] lists blocks (as of just before `delta`) that fuse;
//! * an [`EdgeEvent`] names an influence edge by the representatives
//!   (smallest members) of its endpoint blocks, recorded the first time
//!   that representative pair carries an edge.
//!
//! Edges whose endpoints later merge into larger blocks are carried forward
//! by mapping each representative to its current block, which is exactly
//! the influence hierarchy condition.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::network::{Network, NetworkError, QuasiUltrametric};
use crate::partition::{PartitionError, QuasiPartition};

/// Quasi-dendrogram conditions that a malformed event list can break.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// Boundary conditions at `delta = 0` and at the top resolution.
    D1,
    /// Blocks only ever merge.
    D2,
    /// Edges persist until their endpoints merge.
    D3,
    /// Finitely many, well-ordered events (right continuity).
    D4,
    /// Some resolution's edge set is not unidirectional.
    QP1,
    /// Some resolution's edge set is not transitive.
    QP2,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Condition::D1 => "D1 (boundary)",
            Condition::D2 => "D2 (equivalence hierarchy)",
            Condition::D3 => "D3 (influence hierarchy)",
            Condition::D4 => "D4 (right continuity)",
            Condition::QP1 => "QP1 (unidirectionality)",
            Condition::QP2 => "QP2 (transitivity)",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DendrogramError {
    #[error("invalid quasi-dendrogram, {condition} violated: {detail}")]
    Invalid { condition: Condition, detail: String },
    #[error("invalid labels: {0}")]
    Labels(String),
    #[error("internal quasi-partition violation (uncertified input?): {0}")]
    InternalQPViolation(String),
    #[error("negative resolution {0}")]
    NegativeResolution(f64),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

fn invalid(condition: Condition, detail: impl Into<String>) -> DendrogramError {
    DendrogramError::Invalid {
        condition,
        detail: detail.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeEvent {
    pub delta: f64,
    /// Blocks that fuse, each sorted, in ascending order of smallest member.
    pub blocks: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeEvent {
    pub delta: f64,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiDendrogram {
    labels: Vec<String>,
    merges: Vec<MergeEvent>,
    edges: Vec<EdgeEvent>,
    max_resolution: f64,
    strongly_connected: bool,
}

impl QuasiDendrogram {
    /// Assembles and validates a dendrogram from raw events.
    pub fn new(
        labels: Vec<String>,
        merges: Vec<MergeEvent>,
        edges: Vec<EdgeEvent>,
        max_resolution: f64,
        strongly_connected: bool,
    ) -> Result<Self, DendrogramError> {
        let d = QuasiDendrogram {
            labels,
            merges,
            edges,
            max_resolution,
            strongly_connected,
        };
        d.levels()?;
        Ok(d)
    }

    /// Builds the canonical event list from quasi-partitions sampled at
    /// strictly increasing resolutions. Consecutive identical partitions are
    /// collapsed. The state before the first level is all singletons.
    pub fn from_levels(
        labels: Vec<String>,
        levels: &[(f64, QuasiPartition)],
    ) -> Result<Self, DendrogramError> {
        check_labels(&labels)?;
        let n = labels.len();
        let mut prev = QuasiPartition::discrete(n);
        let mut prev_delta = 0.0;
        let mut merges = Vec::new();
        let mut edges = Vec::new();
        let mut top = if n <= 1 { Some(0.0) } else { None };
        for (delta, part) in levels {
            let delta = *delta;
            if part.node_count() != n {
                return Err(DendrogramError::Labels(format!(
                    "level at {delta} covers {} nodes, expected {n}",
                    part.node_count()
                )));
            }
            if !delta.is_finite() || delta < 0.0 {
                return Err(invalid(Condition::D4, format!("resolution {delta}")));
            }
            if *part == prev {
                continue;
            }
            if delta == 0.0 {
                return Err(invalid(Condition::D1, "structure at resolution 0 is not discrete"));
            }
            if delta <= prev_delta {
                return Err(invalid(
                    Condition::D4,
                    format!("resolution {delta} does not increase past {prev_delta}"),
                ));
            }
            for block in prev.blocks() {
                let target = part.block_of(block[0]);
                if block.iter().any(|&m| part.block_of(m) != target) {
                    return Err(invalid(
                        Condition::D2,
                        format!("block {block:?} splits at {delta}"),
                    ));
                }
            }
            for &(a, b) in prev.edges() {
                let (pa, pb) = (
                    part.block_of(prev.representative(a)),
                    part.block_of(prev.representative(b)),
                );
                if pa != pb && !part.has_edge(pa, pb) {
                    return Err(invalid(
                        Condition::D3,
                        format!("edge {a} -> {b} disappears at {delta}"),
                    ));
                }
            }
            for block in part.blocks() {
                let parts: BTreeSet<usize> = block.iter().map(|&m| prev.block_of(m)).collect();
                if parts.len() > 1 {
                    merges.push(MergeEvent {
                        delta,
                        blocks: parts.iter().map(|&b| prev.blocks()[b].clone()).collect(),
                    });
                }
            }
            let prev_pairs: BTreeSet<(usize, usize)> = prev
                .edges()
                .iter()
                .map(|&(a, b)| (prev.representative(a), prev.representative(b)))
                .collect();
            for &(a, b) in part.edges() {
                let pair = (part.representative(a), part.representative(b));
                if !prev_pairs.contains(&pair) {
                    edges.push(EdgeEvent {
                        delta,
                        from: pair.0,
                        to: pair.1,
                    });
                }
            }
            if top.is_none() && part.block_count() == 1 {
                top = Some(delta);
            }
            prev = part.clone();
            prev_delta = delta;
        }
        Ok(QuasiDendrogram {
            labels,
            merges,
            edges,
            max_resolution: top.unwrap_or(f64::INFINITY),
            strongly_connected: top.is_some(),
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn merges(&self) -> &[MergeEvent] {
        &self.merges
    }

    pub fn edge_events(&self) -> &[EdgeEvent] {
        &self.edges
    }

    /// Resolution at which everything is one block; `inf` if never.
    pub fn max_resolution(&self) -> f64 {
        self.max_resolution
    }

    pub fn strongly_connected(&self) -> bool {
        self.strongly_connected
    }

    /// Distinct event resolutions in ascending order.
    pub fn critical_resolutions(&self) -> Vec<f64> {
        let mut deltas: Vec<f64> = self
            .merges
            .iter()
            .map(|m| m.delta)
            .chain(self.edges.iter().map(|e| e.delta))
            .collect();
        deltas.sort_by(f64::total_cmp);
        deltas.dedup();
        deltas
    }

    /// Replays the event list, validating every condition, and returns the
    /// quasi-partition in force from each critical resolution onward.
    pub fn levels(&self) -> Result<Vec<(f64, QuasiPartition)>, DendrogramError> {
        check_labels(&self.labels)?;
        let n = self.labels.len();
        for delta in self.merges.iter().map(|m| m.delta).chain(self.edges.iter().map(|e| e.delta)) {
            if !delta.is_finite() {
                return Err(invalid(Condition::D4, format!("event at resolution {delta}")));
            }
            if delta <= 0.0 {
                return Err(invalid(Condition::D1, format!("event at resolution {delta}")));
            }
        }
        let sorted = |d: &[f64]| d.windows(2).all(|w| w[0] <= w[1]);
        let merge_deltas: Vec<f64> = self.merges.iter().map(|m| m.delta).collect();
        let edge_deltas: Vec<f64> = self.edges.iter().map(|e| e.delta).collect();
        if !sorted(&merge_deltas) || !sorted(&edge_deltas) {
            return Err(invalid(Condition::D4, "events are not in nondecreasing order"));
        }

        // rep[x] is the representative of x's current block.
        let mut rep: Vec<usize> = (0..n).collect();
        let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut levels = Vec::new();
        let (mut mi, mut ei) = (0, 0);
        for delta in self.critical_resolutions() {
            while mi < self.merges.len() && self.merges[mi].delta == delta {
                let event = &self.merges[mi];
                if event.blocks.len() < 2 {
                    return Err(invalid(Condition::D2, format!("merge at {delta} has fewer than two blocks")));
                }
                let mut fused = Vec::new();
                for block in &event.blocks {
                    if !is_current_block(&rep, block) {
                        return Err(invalid(
                            Condition::D2,
                            format!("merge at {delta} names {block:?}, which is not a current block"),
                        ));
                    }
                    fused.extend_from_slice(block);
                }
                let new_rep = *fused.iter().min().expect("nonempty");
                for &m in &fused {
                    rep[m] = new_rep;
                }
                mi += 1;
            }
            pairs = pairs
                .into_iter()
                .map(|(a, b)| (rep[a], rep[b]))
                .filter(|(a, b)| a != b)
                .collect();
            while ei < self.edges.len() && self.edges[ei].delta == delta {
                let e = &self.edges[ei];
                if e.from >= n || e.to >= n || rep[e.from] != e.from || rep[e.to] != e.to {
                    return Err(invalid(
                        Condition::D3,
                        format!("edge event {} -> {} at {delta} does not name current representatives", e.from, e.to),
                    ));
                }
                if e.from == e.to {
                    return Err(invalid(Condition::QP1, format!("self-loop at {delta}")));
                }
                pairs.insert((e.from, e.to));
                ei += 1;
            }
            levels.push((delta, partition_from_reps(&rep, &pairs, delta)?));
        }

        let single = levels.last().map_or(n <= 1, |(_, p)| p.block_count() == 1);
        let expected_top = if n <= 1 {
            Some(0.0)
        } else {
            levels.iter().find(|(_, p)| p.block_count() == 1).map(|(d, _)| *d)
        };
        match expected_top {
            Some(top) if self.strongly_connected && self.max_resolution == top => {}
            None if !self.strongly_connected && self.max_resolution == f64::INFINITY => {}
            _ => {
                return Err(invalid(
                    Condition::D1,
                    format!(
                        "max_resolution {} / strongly_connected {} disagree with the events (single block reached: {single})",
                        self.max_resolution, self.strongly_connected
                    ),
                ))
            }
        }
        Ok(levels)
    }

    /// Quasi-partition at resolution `delta`.
    pub fn at(&self, delta: f64) -> Result<QuasiPartition, DendrogramError> {
        if delta.is_nan() || delta < 0.0 {
            return Err(DendrogramError::NegativeResolution(delta));
        }
        Ok(self
            .levels()?
            .into_iter()
            .take_while(|(d, _)| *d <= delta)
            .last()
            .map(|(_, p)| p)
            .unwrap_or_else(|| QuasiPartition::discrete(self.node_count())))
    }

    /// True when the event list is the canonical one for its levels, the
    /// form produced by [`upsilon`].
    pub fn is_canonical(&self) -> bool {
        self.canonicalize().is_ok_and(|c| c == *self)
    }

    pub fn canonicalize(&self) -> Result<QuasiDendrogram, DendrogramError> {
        QuasiDendrogram::from_levels(self.labels.clone(), &self.levels()?)
    }

    /// Whether the top boundary condition (a single block at some finite
    /// resolution) holds.
    pub fn top_boundary_satisfied(&self) -> bool {
        self.strongly_connected
    }
}

fn check_labels(labels: &[String]) -> Result<(), DendrogramError> {
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(DendrogramError::Labels(format!("duplicate label {l:?}")));
        }
    }
    Ok(())
}

fn is_current_block(rep: &[usize], block: &[usize]) -> bool {
    let Some(&first) = block.first() else {
        return false;
    };
    if first >= rep.len() || rep[first] != first || block.windows(2).any(|w| w[0] >= w[1]) {
        return false;
    }
    let members: Vec<usize> = (0..rep.len()).filter(|&x| rep[x] == first).collect();
    members == block
}

fn partition_from_reps(
    rep: &[usize],
    pairs: &BTreeSet<(usize, usize)>,
    delta: f64,
) -> Result<QuasiPartition, DendrogramError> {
    let n = rep.len();
    let mut index_of_rep = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for x in 0..n {
        let r = rep[x];
        if index_of_rep[r] == usize::MAX {
            index_of_rep[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[index_of_rep[r]].push(x);
    }
    let edges = pairs.iter().map(|&(a, b)| (index_of_rep[a], index_of_rep[b]));
    QuasiPartition::new(n, blocks, edges).map_err(|e| {
        let condition = match e {
            PartitionError::EdgesNotTransitive(..) => Condition::QP2,
            _ => Condition::QP1,
        };
        invalid(condition, format!("at resolution {delta}: {e}"))
    })
}

/// Quasi-partition of a quasi-ultrametric at resolution `delta`: blocks are
/// classes of `max(u(x, x'), u(x', x)) <= delta`, and there is an edge
/// between distinct blocks when some cross pair has `u <= delta`.
pub fn cut_at(u: &QuasiUltrametric, delta: f64) -> Result<QuasiPartition, DendrogramError> {
    if delta.is_nan() || delta < 0.0 {
        return Err(DendrogramError::NegativeResolution(delta));
    }
    let (blocks, edges) = cut_parts(u, delta);
    let p = QuasiPartition::new(u.len(), blocks, edges)
        .map_err(|e| DendrogramError::InternalQPViolation(e.to_string()))?;
    let n = u.len();
    for i in 0..n {
        for j in 0..n {
            let together = u.get(i, j).max(u.get(j, i)) <= delta;
            if together != (p.block_of(i) == p.block_of(j)) {
                return Err(DendrogramError::InternalQPViolation(format!(
                    "mutual-influence relation is not transitive at ({i}, {j})"
                )));
            }
        }
    }
    Ok(p)
}

fn cut_parts(u: &QuasiUltrametric, delta: f64) -> (Vec<Vec<usize>>, BTreeSet<(usize, usize)>) {
    let n = u.len();
    let mut block_of = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if block_of[i] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = (i..n)
            .filter(|&j| block_of[j] == usize::MAX && u.get(i, j).max(u.get(j, i)) <= delta)
            .collect();
        for &m in &members {
            block_of[m] = blocks.len();
        }
        blocks.push(members);
    }
    let mut edges = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if block_of[i] != block_of[j] && u.get(i, j) <= delta {
                edges.insert((block_of[i], block_of[j]));
            }
        }
    }
    (blocks, edges)
}

/// The quasi-dendrogram equivalent to `u`, swept over its distinct finite
/// values.
pub fn upsilon(u: &QuasiUltrametric) -> QuasiDendrogram {
    let n = u.len();
    let mut deltas: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| u.get(i, j))
        .filter(|v| v.is_finite())
        .collect();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let levels: Vec<(f64, QuasiPartition)> = deltas
        .into_iter()
        .map(|delta| {
            let (blocks, edges) = cut_parts(u, delta);
            let p = QuasiPartition::new(n, blocks, edges)
                .expect("cuts of a quasi-ultrametric are quasi-partitions");
            (delta, p)
        })
        .collect();
    QuasiDendrogram::from_levels(u.labels().to_vec(), &levels)
        .expect("cuts of a quasi-ultrametric are nested")
}

/// The quasi-ultrametric equivalent to `d`: `u(x, x')` is the least
/// resolution at which `x` and `x'` share a block or an edge joins their
/// blocks. Pairs never related get `inf`.
pub fn psi(d: &QuasiDendrogram) -> Result<QuasiUltrametric, DendrogramError> {
    let levels = d.levels()?;
    let n = d.node_count();
    let mut u = vec![f64::INFINITY; n * n];
    for i in 0..n {
        u[i * n + i] = 0.0;
    }
    for (delta, p) in &levels {
        for x in 0..n {
            for x2 in 0..n {
                if u[x * n + x2] == f64::INFINITY && p.influences(x, x2) {
                    u[x * n + x2] = *delta;
                }
            }
        }
    }
    let net = Network::from_flat(d.labels().to_vec(), u)?;
    Ok(QuasiUltrametric::certify(net)?)
}
