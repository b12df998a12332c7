//! Random instance generators for property checks.
//!
//! Entries mix a small discrete grid with continuous draws so that ties,
//! which stress every tie-breaking path, show up often.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dendrogram::QuasiDendrogram;
use crate::network::{default_labels, Network};
use crate::partition::{QuasiEquivalence, QuasiPartition};

/// Half the time an integer in `1..=5`, otherwise uniform in `[0.1, 10)`.
pub fn mixed_entry<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.gen_bool(0.5) {
        rng.gen_range(1..=5) as f64
    } else {
        rng.gen_range(0.1..10.0)
    }
}

/// Complete network with mixed entries.
pub fn random_network<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Network {
    random_sparse_network(rng, n, 0.0)
}

/// Like [`random_network`], with each off-diagonal entry missing (`inf`)
/// with probability `p_missing`.
pub fn random_sparse_network<R: Rng + ?Sized>(rng: &mut R, n: usize, p_missing: f64) -> Network {
    let dissim = (0..n * n)
        .map(|idx| {
            if idx / n == idx % n {
                0.0
            } else if p_missing > 0.0 && rng.gen_bool(p_missing) {
                f64::INFINITY
            } else {
                mixed_entry(rng)
            }
        })
        .collect();
    Network::from_parts_unchecked(default_labels(n), dissim)
}

pub fn random_permutation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// Same nodes, with a random subset of entries lowered (never to zero).
/// The identity map from `net` onto the result is dissimilarity reducing.
pub fn random_reduction<R: Rng + ?Sized>(rng: &mut R, net: &Network) -> Network {
    let n = net.len();
    let dissim = (0..n * n)
        .map(|idx| {
            let v = net.as_slice()[idx];
            if idx / n == idx % n || !rng.gen_bool(0.5) {
                v
            } else if v.is_infinite() {
                mixed_entry(rng)
            } else if rng.gen_bool(0.3) {
                // Snap down to an integer grid value to create ties.
                let snapped = v.floor();
                if snapped > 0.0 {
                    snapped
                } else {
                    v
                }
            } else {
                v * rng.gen_range(0.1..1.0)
            }
        })
        .collect();
    Network::from_parts_unchecked(net.labels().to_vec(), dissim)
}

/// A surjection `phi` of `net`'s nodes onto `k` blocks, with the quotient
/// network that makes `phi` dissimilarity reducing: each quotient entry is
/// the minimum over the preimages, sometimes lowered further.
pub fn random_quotient<R: Rng + ?Sized>(
    rng: &mut R,
    net: &Network,
    k: usize,
) -> (Network, Vec<usize>) {
    let n = net.len();
    assert!(k >= 1 && k <= n, "need 1 <= k <= n");
    let mut phi: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.gen_range(0..k) }).collect();
    phi.shuffle(rng);
    let mut dissim = vec![f64::INFINITY; k * k];
    for i in 0..k {
        dissim[i * k + i] = 0.0;
    }
    for x in 0..n {
        for x2 in 0..n {
            let (a, b) = (phi[x], phi[x2]);
            if a != b {
                dissim[a * k + b] = dissim[a * k + b].min(net.get(x, x2));
            }
        }
    }
    for idx in 0..k * k {
        if idx / k != idx % k && rng.gen_bool(0.25) {
            let v = dissim[idx];
            dissim[idx] = if v.is_finite() { v * rng.gen_range(0.5..1.0) } else { mixed_entry(rng) };
        }
    }
    let labels = (1..=k).map(|i| format!("y{i}")).collect();
    (Network::from_parts_unchecked(labels, dissim), phi)
}

fn close_transitively(rel: &mut [bool], n: usize) {
    for k in 0..n {
        for i in 0..n {
            if rel[i * n + k] {
                for j in 0..n {
                    if rel[k * n + j] {
                        rel[i * n + j] = true;
                    }
                }
            }
        }
    }
}

/// Quasi-partition induced by the transitive closure of random pairs.
pub fn random_quasi_partition<R: Rng + ?Sized>(rng: &mut R, n: usize) -> QuasiPartition {
    let mut rel: Vec<bool> = (0..n * n).map(|idx| idx / n == idx % n).collect();
    let density = rng.gen_range(0.0..0.4);
    for idx in 0..n * n {
        if rng.gen_bool(density) {
            rel[idx] = true;
        }
    }
    close_transitively(&mut rel, n);
    QuasiEquivalence::new(n, rel)
        .expect("closure of a reflexive relation is a preorder")
        .to_quasi_partition()
}

/// Random canonical quasi-dendrogram, grown as an increasing family of
/// preorders: each step adds a few random related pairs and takes the
/// transitive closure. With `complete`, growth continues until everything
/// is one block.
pub fn random_quasi_dendrogram<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    complete: bool,
) -> QuasiDendrogram {
    let mut rel: Vec<bool> = (0..n * n).map(|idx| idx / n == idx % n).collect();
    let mut delta = 0.0;
    let mut levels = Vec::new();
    let max_steps = if complete { usize::MAX } else { rng.gen_range(1..=2 * n.max(1)) };
    let mut steps = 0;
    while n > 1 && rel.iter().any(|r| !r) && steps < max_steps {
        steps += 1;
        delta += if rng.gen_bool(0.5) {
            [0.5, 1.0][rng.gen_range(0..2)]
        } else {
            rng.gen_range(0.01..1.0)
        };
        for _ in 0..rng.gen_range(1..=2) {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            rel[i * n + j] = true;
        }
        close_transitively(&mut rel, n);
        let p = QuasiEquivalence::new(n, rel.clone())
            .expect("closure of a reflexive relation is a preorder")
            .to_quasi_partition();
        levels.push((delta, p));
    }
    QuasiDendrogram::from_levels(default_labels(n), &levels)
        .expect("growing preorders give nested quasi-partitions")
}
