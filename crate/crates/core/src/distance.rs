//! Correspondence-based distance between networks, plus the stability and
//! metric-axiom harnesses built on it.
//!
//! A correspondence between node sets `X` and `Y` is a relation whose two
//! projections are onto. Its distortion is the largest discrepancy
//! `|A_X(x, x') - A_Y(y, y')|` over pairs of related pairs, and the network
//! distance is half the smallest distortion. Exact evaluation enumerates
//! every subset of `X x Y`, so it is capped.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dioid::dsl;
use crate::network::Network;

/// Default cap on `|X| * |Y|` for exact enumeration.
pub const DEFAULT_EXACT_CAP: usize = 16;
/// Largest node count for exhaustive isomorphism search.
pub const ISOMORPHISM_CAP: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistanceError {
    #[error("node {index} of {side} is not covered by the correspondence")]
    NotACorrespondence { side: Side, index: usize },
    #[error("pair ({x}, {y}) is out of range for networks of sizes {nx} and {ny}")]
    PairOutOfRange { x: usize, y: usize, nx: usize, ny: usize },
    #[error("exact enumeration needs |X|*|Y| = {cells} <= {cap}")]
    SizeCapExceeded { cells: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    X,
    Y,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::X => "X",
            Side::Y => "Y",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Correspondence {
    pairs: Vec<(usize, usize)>,
}

impl Correspondence {
    pub fn new(pairs: Vec<(usize, usize)>, nx: usize, ny: usize) -> Result<Self, DistanceError> {
        let (mut cx, mut cy) = (vec![false; nx], vec![false; ny]);
        for &(x, y) in &pairs {
            if x >= nx || y >= ny {
                return Err(DistanceError::PairOutOfRange { x, y, nx, ny });
            }
            cx[x] = true;
            cy[y] = true;
        }
        if let Some(index) = cx.iter().position(|c| !c) {
            return Err(DistanceError::NotACorrespondence { side: Side::X, index });
        }
        if let Some(index) = cy.iter().position(|c| !c) {
            return Err(DistanceError::NotACorrespondence { side: Side::Y, index });
        }
        let mut pairs = pairs;
        pairs.sort_unstable();
        pairs.dedup();
        Ok(Correspondence { pairs })
    }

    /// `{(i, i)}` for two sets of equal size.
    pub fn diagonal(n: usize) -> Self {
        Correspondence {
            pairs: (0..n).map(|i| (i, i)).collect(),
        }
    }

    /// All of `X x Y`.
    pub fn full(nx: usize, ny: usize) -> Self {
        Correspondence {
            pairs: (0..nx).cartesian_product(0..ny).collect(),
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

// |a - b| extended to inf: equal infinities agree, a lone inf is infinitely far.
fn gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs()
    }
}

fn pairs_distortion(x: &Network, y: &Network, pairs: &[(usize, usize)]) -> f64 {
    let mut worst = 0.0f64;
    for &(a, b) in pairs {
        for &(a2, b2) in pairs {
            worst = worst.max(gap(x.get(a, a2), y.get(b, b2)));
        }
    }
    worst
}

pub fn distortion(x: &Network, y: &Network, r: &Correspondence) -> Result<f64, DistanceError> {
    // Re-validate against these particular networks.
    Correspondence::new(r.pairs.clone(), x.len(), y.len())?;
    Ok(pairs_distortion(x, y, &r.pairs))
}

/// Exact network distance by enumeration, with a configurable cap.
#[derive(Debug, Clone, Copy)]
pub struct ExactDistance {
    cap: usize,
}

impl Default for ExactDistance {
    fn default() -> Self {
        ExactDistance { cap: DEFAULT_EXACT_CAP }
    }
}

impl ExactDistance {
    pub fn new(cap: usize) -> Self {
        ExactDistance { cap }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Half the minimum distortion, with a minimizing correspondence.
    pub fn compute(&self, x: &Network, y: &Network) -> Result<(f64, Correspondence), DistanceError> {
        let (nx, ny) = (x.len(), y.len());
        let cells = nx * ny;
        if cells > self.cap || cells >= 63 {
            return Err(DistanceError::SizeCapExceeded { cells, cap: self.cap });
        }
        if cells == 0 {
            // Only two empty networks correspond (via the empty relation).
            let d = if nx == ny { 0.0 } else { f64::INFINITY };
            return Ok((d, Correspondence { pairs: Vec::new() }));
        }
        let cell_pair = |c: usize| (c / ny, c % ny);
        let full_x = (1u64 << nx) - 1;
        let full_y = (1u64 << ny) - 1;
        let mut best = f64::INFINITY;
        let mut best_mask = 0u64;
        let mut pairs = Vec::with_capacity(cells);
        for mask in 1u64..(1u64 << cells) {
            let (mut cx, mut cy) = (0u64, 0u64);
            for c in 0..cells {
                if mask >> c & 1 == 1 {
                    let (a, b) = cell_pair(c);
                    cx |= 1 << a;
                    cy |= 1 << b;
                }
            }
            if cx != full_x || cy != full_y {
                continue;
            }
            pairs.clear();
            pairs.extend((0..cells).filter(|c| mask >> c & 1 == 1).map(cell_pair));
            let d = pairs_distortion(x, y, &pairs);
            if d < best || best_mask == 0 {
                best = d;
                best_mask = mask;
            }
        }
        let r = Correspondence {
            pairs: (0..cells).filter(|c| best_mask >> c & 1 == 1).map(cell_pair).collect(),
        };
        Ok((best / 2.0, r))
    }

    pub fn distance(&self, x: &Network, y: &Network) -> Result<f64, DistanceError> {
        self.compute(x, y).map(|(d, _)| d)
    }
}

/// Exact network distance with the default cap.
pub fn network_distance_exact(x: &Network, y: &Network) -> Result<f64, DistanceError> {
    ExactDistance::default().distance(x, y)
}

/// Upper bound on the network distance from sampled correspondences: the
/// full product, the diagonal when sizes agree, and `tries` randomized
/// greedy correspondences. Deterministic for fixed inputs.
pub fn network_distance_upper(x: &Network, y: &Network, tries: usize) -> f64 {
    network_distance_upper_seeded(x, y, tries, 0x5eed)
}

pub fn network_distance_upper_seeded(x: &Network, y: &Network, tries: usize, seed: u64) -> f64 {
    let (nx, ny) = (x.len(), y.len());
    if nx == 0 || ny == 0 {
        return if nx == ny { 0.0 } else { f64::INFINITY };
    }
    let mut best = pairs_distortion(x, y, Correspondence::full(nx, ny).pairs());
    if nx == ny {
        best = best.min(pairs_distortion(x, y, Correspondence::diagonal(nx).pairs()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..tries {
        let pairs = greedy_correspondence(x, y, &mut rng);
        best = best.min(pairs_distortion(x, y, &pairs));
    }
    best / 2.0
}

// Visit X in random order, attaching each node to the Y node that keeps the
// running distortion smallest (random tie breaks), then attach any Y node
// left uncovered the same way.
fn greedy_correspondence(x: &Network, y: &Network, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let (nx, ny) = (x.len(), y.len());
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(nx + ny);
    let added_cost = |pairs: &[(usize, usize)], a: usize, b: usize| {
        let mut worst = gap(x.get(a, a), y.get(b, b));
        for &(a2, b2) in pairs {
            worst = worst.max(gap(x.get(a, a2), y.get(b, b2)));
            worst = worst.max(gap(x.get(a2, a), y.get(b2, b)));
        }
        worst
    };
    let mut order: Vec<usize> = (0..nx).collect();
    order.shuffle(rng);
    for a in order {
        let mut candidates: Vec<usize> = (0..ny).collect();
        candidates.shuffle(rng);
        let b = candidates
            .into_iter()
            .min_by(|&b1, &b2| added_cost(&pairs, a, b1).total_cmp(&added_cost(&pairs, a, b2)))
            .expect("ny > 0");
        pairs.push((a, b));
    }
    let mut covered = vec![false; ny];
    for &(_, b) in &pairs {
        covered[b] = true;
    }
    let mut missing: Vec<usize> = (0..ny).filter(|&b| !covered[b]).collect();
    missing.shuffle(rng);
    for b in missing {
        let offset = rng.gen_range(0..nx);
        let a = (0..nx)
            .map(|k| (k + offset) % nx)
            .min_by(|&a1, &a2| added_cost(&pairs, a1, b).total_cmp(&added_cost(&pairs, a2, b)))
            .expect("nx > 0");
        pairs.push((a, b));
    }
    pairs
}

/// Exhaustive search for a node bijection carrying one matrix onto the other.
pub fn find_isomorphism(x: &Network, y: &Network) -> Result<Option<Vec<usize>>, DistanceError> {
    let n = x.len();
    if n != y.len() {
        return Ok(None);
    }
    if n > ISOMORPHISM_CAP {
        return Err(DistanceError::SizeCapExceeded {
            cells: n,
            cap: ISOMORPHISM_CAP,
        });
    }
    Ok((0..n).permutations(n).find(|perm| {
        (0..n).all(|i| (0..n).all(|j| x.get(i, j) == y.get(perm[i], perm[j])))
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityOutcome {
    /// Distance between the inputs.
    pub input_distance: f64,
    /// Distance between the DSL outputs.
    pub output_distance: f64,
}

impl StabilityOutcome {
    pub fn holds(&self) -> bool {
        self.output_distance <= self.input_distance
    }
}

/// Evaluates both sides of `d(dsl(X), dsl(Y)) <= d(X, Y)` exactly.
pub fn stability_check(x: &Network, y: &Network) -> Result<StabilityOutcome, DistanceError> {
    stability_check_with(ExactDistance::default(), x, y)
}

pub fn stability_check_with(
    exact: ExactDistance,
    x: &Network,
    y: &Network,
) -> Result<StabilityOutcome, DistanceError> {
    let input_distance = exact.distance(x, y)?;
    let output_distance =
        exact.distance(dsl(x).as_network(), dsl(y).as_network())?;
    Ok(StabilityOutcome {
        input_distance,
        output_distance,
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricReport {
    pub pairs_checked: usize,
    pub triples_checked: usize,
    pub symmetry_failures: Vec<(usize, usize)>,
    pub negativity_failures: Vec<(usize, usize)>,
    /// Pairs where `d == 0` disagrees with the isomorphism verdict.
    pub identity_failures: Vec<(usize, usize)>,
    pub triangle_failures: Vec<(usize, usize, usize)>,
    /// Pairs found isomorphic.
    pub isomorphic_pairs: Vec<(usize, usize)>,
}

impl MetricReport {
    pub fn all_hold(&self) -> bool {
        self.symmetry_failures.is_empty()
            && self.negativity_failures.is_empty()
            && self.identity_failures.is_empty()
            && self.triangle_failures.is_empty()
    }
}

/// Checks symmetry, non-negativity, identity of indiscernibles up to
/// isomorphism, and the triangle inequality over every ordered triple.
pub fn metric_axiom_suite(nets: &[Network]) -> Result<MetricReport, DistanceError> {
    metric_axiom_suite_with(ExactDistance::default(), nets)
}

pub fn metric_axiom_suite_with(
    exact: ExactDistance,
    nets: &[Network],
) -> Result<MetricReport, DistanceError> {
    let m = nets.len();
    let mut d = vec![0.0; m * m];
    let mut report = MetricReport::default();
    for i in 0..m {
        for j in 0..m {
            d[i * m + j] = exact.distance(&nets[i], &nets[j])?;
            report.pairs_checked += 1;
            if d[i * m + j] < 0.0 {
                report.negativity_failures.push((i, j));
            }
        }
    }
    for i in 0..m {
        for j in i..m {
            if d[i * m + j] != d[j * m + i] {
                report.symmetry_failures.push((i, j));
            }
            let iso = find_isomorphism(&nets[i], &nets[j])?.is_some();
            if iso {
                report.isomorphic_pairs.push((i, j));
            }
            if iso != (d[i * m + j] == 0.0) {
                report.identity_failures.push((i, j));
            }
        }
    }
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                report.triples_checked += 1;
                if d[i * m + k] > d[i * m + j] + d[j * m + k] {
                    report.triangle_failures.push((i, j, k));
                }
            }
        }
    }
    Ok(report)
}
