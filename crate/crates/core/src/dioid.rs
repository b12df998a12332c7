//! Matrix algebra over the (min, max) dioid on `[0, inf]`, and the directed
//! single linkage (DSL) method built on it.
//!
//! In this dioid `a ⊕ b = min(a, b)` and `a ⊗ b = max(a, b)`. Both are exact
//! on floating point values, so every kernel here is bit-reproducible no
//! matter how the work is scheduled.

use rayon::prelude::*;
use thiserror::Error;

use crate::network::{Network, QuasiUltrametric};

/// Default node-count cap for [`ChainOracle`].
pub const DEFAULT_ORACLE_CAP: usize = 8;

// Below this size the rayon fork/join overhead dominates a row of work.
const PARALLEL_THRESHOLD: usize = 128;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DioidError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("invalid dioid matrix: {0}")]
    InvalidMatrix(String),
    #[error("dioid power must be at least 1")]
    ZeroPower,
    #[error("chain oracle is capped at {cap} nodes, network has {n}")]
    OracleSizeExceeded { n: usize, cap: usize },
    #[error("node index {index} out of range for {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },
    #[error("node map has length {got}, expected {expected}")]
    MapLength { got: usize, expected: usize },
    #[error("map is not dissimilarity reducing at ({x}, {x2}): {source_value} < {target_value}")]
    NotDissimilarityReducing {
        x: usize,
        x2: usize,
        source_value: f64,
        target_value: f64,
    },
}

/// Square matrix over `[0, inf]` with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DioidMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DioidMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self, DioidError> {
        if entries.len() != n * n {
            return Err(DioidError::InvalidMatrix(format!(
                "{} entries for dimension {n}",
                entries.len()
            )));
        }
        for (idx, &v) in entries.iter().enumerate() {
            let (i, j) = (idx / n, idx % n);
            if v.is_nan() || v < 0.0 {
                return Err(DioidError::InvalidMatrix(format!("entry ({i}, {j}) = {v}")));
            }
            if i == j && v != 0.0 {
                return Err(DioidError::InvalidMatrix(format!("diagonal ({i}, {i}) = {v}")));
            }
        }
        Ok(DioidMatrix { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, DioidError> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(DioidError::DimensionMismatch { left: n, right: r.len() });
        }
        Self::new(n, rows.concat())
    }

    /// Multiplicative identity: zero diagonal, `inf` elsewhere.
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![f64::INFINITY; n * n];
        for i in 0..n {
            entries[i * n + i] = 0.0;
        }
        DioidMatrix { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// `self ⊗ other`.
    pub fn product(&self, other: &DioidMatrix) -> Result<DioidMatrix, DioidError> {
        dioid_product(self, other)
    }

    pub fn square(&self) -> DioidMatrix {
        multiply(self, self)
    }

    pub fn power(&self, k: u32) -> Result<DioidMatrix, DioidError> {
        dioid_power(self, k)
    }
}

impl From<&Network> for DioidMatrix {
    fn from(net: &Network) -> Self {
        DioidMatrix {
            n: net.len(),
            entries: net.as_slice().to_vec(),
        }
    }
}

/// `out[i][j] = min_k max(a[i][k], b[k][j])`.
pub fn dioid_product(a: &DioidMatrix, b: &DioidMatrix) -> Result<DioidMatrix, DioidError> {
    if a.n != b.n {
        return Err(DioidError::DimensionMismatch { left: a.n, right: b.n });
    }
    Ok(multiply(a, b))
}

fn multiply(a: &DioidMatrix, b: &DioidMatrix) -> DioidMatrix {
    let n = a.n;
    let mut entries = vec![f64::INFINITY; n * n];
    if n == 0 {
        return DioidMatrix { n, entries };
    }
    let row_kernel = |(i, out): (usize, &mut [f64])| {
        let a_row = &a.entries[i * n..(i + 1) * n];
        for (k, &aik) in a_row.iter().enumerate() {
            if aik == f64::INFINITY {
                continue;
            }
            let b_row = &b.entries[k * n..(k + 1) * n];
            for (o, &bkj) in out.iter_mut().zip(b_row) {
                let m = if aik > bkj { aik } else { bkj };
                if m < *o {
                    *o = m;
                }
            }
        }
    };
    if n >= PARALLEL_THRESHOLD {
        entries.par_chunks_mut(n).enumerate().for_each(row_kernel);
    } else {
        entries.chunks_mut(n).enumerate().for_each(row_kernel);
    }
    DioidMatrix { n, entries }
}

/// `k`-th dioid power by binary exponentiation.
pub fn dioid_power(a: &DioidMatrix, k: u32) -> Result<DioidMatrix, DioidError> {
    if k == 0 {
        return Err(DioidError::ZeroPower);
    }
    let mut result: Option<DioidMatrix> = None;
    let mut base = a.clone();
    let mut e = k;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => multiply(&r, &base),
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = multiply(&base, &base);
    }
    Ok(result.expect("k >= 1 sets at least one bit"))
}

/// Directed single linkage: the minimum over chains of the maximum link
/// dissimilarity, computed as the `(n-1)`-st dioid power of the input.
///
/// Uses repeated squaring. Since the diagonal is zero the powers are
/// nonincreasing and stabilize by `n - 1`, so the first square that leaves
/// the matrix unchanged ends the loop early.
pub fn dsl(net: &Network) -> QuasiUltrametric {
    let n = net.len();
    let mut current = DioidMatrix::from(net);
    let mut reached = 1usize;
    while reached + 1 < n {
        let next = current.square();
        reached *= 2;
        if next == current {
            break;
        }
        current = next;
    }
    QuasiUltrametric::certify(Network::from_parts_unchecked(
        net.labels().to_vec(),
        current.entries,
    ))
    .expect("dioid closure satisfies the strong triangle inequality")
}

/// Minimum chain cost by exhaustive enumeration of simple chains.
///
/// Independent of the dioid kernel. Restricting to simple chains loses
/// nothing: deleting a cycle from a chain removes links and so cannot raise
/// the maximum link cost.
#[derive(Debug, Clone, Copy)]
pub struct ChainOracle {
    cap: usize,
}

impl Default for ChainOracle {
    fn default() -> Self {
        ChainOracle { cap: DEFAULT_ORACLE_CAP }
    }
}

impl ChainOracle {
    pub fn new(cap: usize) -> Self {
        ChainOracle { cap }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn cost(&self, net: &Network, from: usize, to: usize) -> Result<f64, DioidError> {
        let n = net.len();
        if n > self.cap {
            return Err(DioidError::OracleSizeExceeded { n, cap: self.cap });
        }
        for index in [from, to] {
            if index >= n {
                return Err(DioidError::NodeOutOfRange { index, n });
            }
        }
        if from == to {
            return Ok(0.0);
        }
        let mut visited = vec![false; n];
        visited[from] = true;
        let mut best = f64::INFINITY;
        enumerate_chains(net, from, to, 0.0, &mut visited, &mut best);
        Ok(best)
    }

    /// Oracle value for every ordered pair.
    pub fn matrix(&self, net: &Network) -> Result<Vec<Vec<f64>>, DioidError> {
        let n = net.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.cost(net, i, j)).collect())
            .collect()
    }
}

fn enumerate_chains(
    net: &Network,
    at: usize,
    target: usize,
    cost_so_far: f64,
    visited: &mut [bool],
    best: &mut f64,
) {
    for next in 0..net.len() {
        if visited[next] {
            continue;
        }
        let cost = cost_so_far.max(net.get(at, next));
        // Extensions never lower the cost, so this branch cannot improve.
        if cost >= *best {
            continue;
        }
        if next == target {
            *best = cost;
            continue;
        }
        visited[next] = true;
        enumerate_chains(net, next, target, cost, visited, best);
        visited[next] = false;
    }
}

/// [`ChainOracle::cost`] with the default cap.
pub fn chain_cost_oracle(net: &Network, from: usize, to: usize) -> Result<f64, DioidError> {
    ChainOracle::default().cost(net, from, to)
}

/// Outcome of a transformation-axiom check.
#[derive(Debug, Clone, PartialEq)]
pub enum AxiomOutcome {
    Pass,
    /// `u_X(x, x2) < u_Y(phi(x), phi(x2))`.
    Fail {
        x: usize,
        x2: usize,
        source_value: f64,
        target_value: f64,
    },
}

impl AxiomOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, AxiomOutcome::Pass)
    }
}

/// Checks that a dissimilarity-reducing map `phi: X -> Y` does not increase
/// any DSL output value: `u_X(x, x') >= u_Y(phi(x), phi(x'))`.
pub fn axiom_a2_check(
    net_x: &Network,
    net_y: &Network,
    phi: &[usize],
) -> Result<AxiomOutcome, DioidError> {
    let n = net_x.len();
    if phi.len() != n {
        return Err(DioidError::MapLength { got: phi.len(), expected: n });
    }
    if let Some(&index) = phi.iter().find(|&&p| p >= net_y.len()) {
        return Err(DioidError::NodeOutOfRange { index, n: net_y.len() });
    }
    for x in 0..n {
        for x2 in 0..n {
            let (source_value, target_value) = (net_x.get(x, x2), net_y.get(phi[x], phi[x2]));
            if source_value < target_value {
                return Err(DioidError::NotDissimilarityReducing {
                    x,
                    x2,
                    source_value,
                    target_value,
                });
            }
        }
    }
    let (ux, uy) = (dsl(net_x), dsl(net_y));
    for x in 0..n {
        for x2 in 0..n {
            let (source_value, target_value) = (ux.get(x, x2), uy.get(phi[x], phi[x2]));
            if source_value < target_value {
                return Ok(AxiomOutcome::Fail {
                    x,
                    x2,
                    source_value,
                    target_value,
                });
            }
        }
    }
    Ok(AxiomOutcome::Pass)
}

/// True when DSL returns the two-node network `(alpha, beta)` unchanged.
pub fn axiom_a1_holds(alpha: f64, beta: f64) -> bool {
    match Network::two_node(alpha, beta) {
        Ok(net) => dsl(&net).as_network().same_matrix(&net),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    fn fig2() -> Network {
        Network::from_rows(vec![
            vec![0.0, 1.0, 3.0],
            vec![2.0, 0.0, 3.0],
            vec![2.0, 1.0, 0.0],
        ])
        .unwrap()
    }

    fn three_node() -> Network {
        Network::from_rows(vec![
            vec![0.0, 5.0, 10.0],
            vec![1.0, 0.0, 2.0],
            vec![3.0, 7.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let a = DioidMatrix::from(&three_node());
        let id = DioidMatrix::identity(3);
        assert_eq!(a.product(&id).unwrap(), a);
        assert_eq!(id.product(&a).unwrap(), a);
    }

    #[test]
    fn fig2_is_idempotent_under_squaring() {
        let a = DioidMatrix::from(&fig2());
        assert_eq!(a.square(), a);
        for k in 1..6 {
            assert_eq!(a.power(k).unwrap(), a);
        }
    }

    #[test]
    fn hand_expanded_product_entry() {
        // min(max(0,10), max(5,2), max(10,0)) = 5
        let a = DioidMatrix::from(&three_node());
        assert_eq!(a.square().get(0, 2), 5.0);
    }

    #[test]
    fn product_dimension_mismatch() {
        let err = dioid_product(&DioidMatrix::identity(2), &DioidMatrix::identity(3)).unwrap_err();
        assert_eq!(err, DioidError::DimensionMismatch { left: 2, right: 3 });
    }

    #[test]
    fn first_power_is_input() {
        let a = DioidMatrix::from(&three_node());
        assert_eq!(a.power(1).unwrap(), a);
        assert_eq!(a.power(0), Err(DioidError::ZeroPower));
    }

    #[test]
    fn rejects_malformed_matrices() {
        assert!(DioidMatrix::new(2, vec![0.0, -1.0, 1.0, 0.0]).is_err());
        assert!(DioidMatrix::new(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(DioidMatrix::new(2, vec![0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn dsl_fixes_two_node_networks() {
        let net = Network::two_node(3.0, 7.0).unwrap();
        assert_eq!(dsl(&net).into_network(), net);
        assert!(axiom_a1_holds(3.0, 7.0));
    }

    #[test]
    fn dsl_takes_cheaper_chain() {
        let u = dsl(&three_node());
        assert_eq!(u.get(0, 2), 5.0);
        assert_eq!(chain_cost_oracle(&three_node(), 0, 2).unwrap(), 5.0);
    }

    #[test]
    fn dsl_of_quasi_ultrametric_is_itself() {
        assert_eq!(dsl(&fig2()).into_network(), fig2());
    }

    #[test]
    fn dsl_keeps_unreachable_pairs_infinite() {
        let net = Network::from_rows(vec![
            vec![0.0, 1.0, INF],
            vec![INF, 0.0, 4.0],
            vec![INF, INF, 0.0],
        ])
        .unwrap();
        let u = dsl(&net);
        assert_eq!(u.get(0, 2), 4.0);
        assert_eq!(u.get(2, 0), INF);
        assert_eq!(u.get(1, 0), INF);
    }

    #[test]
    fn oracle_diagonal_and_caps() {
        let net = three_node();
        assert_eq!(chain_cost_oracle(&net, 1, 1).unwrap(), 0.0);
        assert_eq!(
            ChainOracle::new(2).cost(&net, 0, 1),
            Err(DioidError::OracleSizeExceeded { n: 3, cap: 2 })
        );
        assert_eq!(
            chain_cost_oracle(&net, 0, 3),
            Err(DioidError::NodeOutOfRange { index: 3, n: 3 })
        );
    }

    #[test]
    fn a2_identity_map_with_reduced_entry() {
        let x = three_node();
        let mut rows = x.to_rows();
        rows[2][1] = 0.5;
        let y = Network::from_rows(rows).unwrap();
        assert!(axiom_a2_check(&x, &y, &[0, 1, 2]).unwrap().passed());
    }

    #[test]
    fn a2_rejects_non_reducing_map() {
        let x = three_node();
        let mut rows = x.to_rows();
        rows[0][1] = 6.0;
        let y = Network::from_rows(rows).unwrap();
        let err = axiom_a2_check(&x, &y, &[0, 1, 2]).unwrap_err();
        assert_eq!(
            err,
            DioidError::NotDissimilarityReducing {
                x: 0,
                x2: 1,
                source_value: 5.0,
                target_value: 6.0
            }
        );
    }

    #[test]
    fn a2_map_shape_errors() {
        let x = three_node();
        assert!(matches!(
            axiom_a2_check(&x, &x, &[0, 1]),
            Err(DioidError::MapLength { .. })
        ));
        assert!(matches!(
            axiom_a2_check(&x, &x, &[0, 1, 5]),
            Err(DioidError::NodeOutOfRange { .. })
        ));
    }

    #[test]
    fn parallel_kernel_matches_sequential() {
        use rand::{Rng, SeedableRng};
        let n = PARALLEL_THRESHOLD + 3;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let entries: Vec<f64> = (0..n * n)
            .map(|idx| if idx / n == idx % n { 0.0 } else { rng.gen_range(1..50) as f64 })
            .collect();
        let a = DioidMatrix::new(n, entries).unwrap();
        let fast = a.square();
        for i in (0..n).step_by(17) {
            for j in 0..n {
                let slow = (0..n)
                    .map(|k| a.get(i, k).max(a.get(k, j)))
                    .fold(INF, f64::min);
                assert_eq!(fast.get(i, j), slow);
            }
        }
    }
}
