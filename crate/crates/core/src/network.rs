//! Networks: a finite labeled node set with an asymmetric dissimilarity
//! matrix, plus the elementary functionals defined on them.
//!
//! Dissimilarities are non-negative extended reals. `f64::INFINITY` marks a
//! missing link (for example an ordered pair absent from an edge list); it is
//! the additive identity of the (min, max) dioid and is absorbing for `max`.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// A single violated network invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("negative dissimilarity {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("nonzero diagonal entry {value} at index {index}")]
    NonzeroDiagonal { index: usize, value: f64 },
    #[error("zero off-diagonal dissimilarity at ({row}, {col})")]
    ZeroOffDiagonal { row: usize, col: usize },
    #[error("NaN dissimilarity at ({row}, {col})")]
    NotANumber { row: usize, col: usize },
    #[error("duplicate label {label:?} at indices {first} and {second}")]
    DuplicateLabel {
        label: String,
        first: usize,
        second: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("dimension mismatch: {labels} labels but matrix has {rows} rows (row {bad_row} has {bad_len} entries)")]
    DimensionMismatch {
        labels: usize,
        rows: usize,
        bad_row: usize,
        bad_len: usize,
    },
    #[error("invalid network: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("strong triangle inequality violated: u({i},{j}) = {direct} > max(u({i},{k}) = {first}, u({k},{j}) = {second})")]
    StrongTriangleViolation {
        i: usize,
        k: usize,
        j: usize,
        direct: f64,
        first: f64,
        second: f64,
    },
    #[error("separation is undefined for a network with fewer than two nodes")]
    SingletonNetwork,
    #[error("invalid scale function: {0}")]
    InvalidScaleSpec(String),
    #[error("scale function maps positive dissimilarity {value} to zero")]
    ScaleUnderflow { value: f64 },
    #[error("invalid permutation of {n} nodes")]
    InvalidPermutation { n: usize },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// A validated network `(X, A_X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    labels: Vec<String>,
    dissim: Vec<f64>,
}

impl Network {
    /// Validates `rows` against `labels`. Every violated invariant is
    /// reported, not only the first one.
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, NetworkError> {
        let n = labels.len();
        if rows.len() != n {
            return Err(NetworkError::DimensionMismatch {
                labels: n,
                rows: rows.len(),
                bad_row: rows.len().min(n),
                bad_len: 0,
            });
        }
        if let Some((bad_row, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(NetworkError::DimensionMismatch {
                labels: n,
                rows: rows.len(),
                bad_row,
                bad_len: row.len(),
            });
        }
        Self::from_flat(labels, rows.into_iter().flatten().collect())
    }

    /// Builds a network from a row-major `n*n` buffer.
    pub fn from_flat(labels: Vec<String>, dissim: Vec<f64>) -> Result<Self, NetworkError> {
        let n = labels.len();
        if dissim.len() != n * n {
            return Err(NetworkError::DimensionMismatch {
                labels: n,
                rows: if n == 0 { 0 } else { dissim.len() / n.max(1) },
                bad_row: 0,
                bad_len: dissim.len(),
            });
        }
        let mut violations = Vec::new();
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (idx, label) in labels.iter().enumerate() {
            if let Some(&first) = seen.get(label.as_str()) {
                violations.push(Violation::DuplicateLabel {
                    label: label.clone(),
                    first,
                    second: idx,
                });
            } else {
                seen.insert(label, idx);
            }
        }
        for row in 0..n {
            for col in 0..n {
                let value = dissim[row * n + col];
                if value.is_nan() {
                    violations.push(Violation::NotANumber { row, col });
                } else if value < 0.0 {
                    violations.push(Violation::NegativeEntry { row, col, value });
                } else if row == col && value != 0.0 {
                    violations.push(Violation::NonzeroDiagonal { index: row, value });
                } else if row != col && value == 0.0 {
                    violations.push(Violation::ZeroOffDiagonal { row, col });
                }
            }
        }
        if violations.is_empty() {
            Ok(Network { labels, dissim })
        } else {
            Err(NetworkError::Invalid(violations))
        }
    }

    /// Network with default labels `x1, ..., xn`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, NetworkError> {
        Self::new(default_labels(rows.len()), rows)
    }

    /// Two-node network with `A(p, q) = alpha` and `A(q, p) = beta`.
    pub fn two_node(alpha: f64, beta: f64) -> Result<Self, NetworkError> {
        Self::new(
            vec!["p".to_string(), "q".to_string()],
            vec![vec![0.0, alpha], vec![beta, 0.0]],
        )
    }

    /// Skips validation. Callers must uphold every invariant.
    pub(crate) fn from_parts_unchecked(labels: Vec<String>, dissim: Vec<f64>) -> Self {
        debug_assert_eq!(labels.len() * labels.len(), dissim.len());
        Network { labels, dissim }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dissim[i * self.len() + j]
    }

    /// Row-major view of the `n*n` matrix.
    pub fn as_slice(&self) -> &[f64] {
        &self.dissim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.dissim[i * n..(i + 1) * n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (i + 1..n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// True when every node reaches every other node through finite links.
    pub fn strongly_connected(&self) -> bool {
        let n = self.len();
        if n <= 1 {
            return true;
        }
        let forward = self.reachable_from(0, false);
        let backward = self.reachable_from(0, true);
        forward.iter().all(|&r| r) && backward.iter().all(|&r| r)
    }

    /// Nodes reachable from `start` along finite links (reversed if `reverse`).
    pub fn reachable_from(&self, start: usize, reverse: bool) -> Vec<bool> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for w in 0..n {
                let value = if reverse { self.get(w, v) } else { self.get(v, w) };
                if !seen[w] && value.is_finite() {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Relabels nodes so that node `i` of `self` becomes node `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Network, NetworkError> {
        let n = self.len();
        if !is_permutation(perm, n) {
            return Err(NetworkError::InvalidPermutation { n });
        }
        let mut labels = vec![String::new(); n];
        let mut dissim = vec![0.0; n * n];
        for i in 0..n {
            labels[perm[i]] = self.labels[i].clone();
            for j in 0..n {
                dissim[perm[i] * n + perm[j]] = self.get(i, j);
            }
        }
        Ok(Network { labels, dissim })
    }

    /// Restriction of the network to `nodes`, in the given order.
    pub fn restrict(&self, nodes: &[usize]) -> Result<Network, NetworkError> {
        let labels = nodes.iter().map(|&i| self.labels[i].clone()).collect();
        let dissim = nodes
            .iter()
            .flat_map(|&i| nodes.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        Network::from_flat(labels, dissim)
    }

    /// Rounds every finite entry to `digits` decimal places.
    ///
    /// Intended for ingestion only. Rounding can collapse a small positive
    /// entry to zero, in which case validation rejects the result.
    pub fn quantize(&self, digits: u32) -> Result<Network, NetworkError> {
        let scale = 10f64.powi(digits as i32);
        let dissim = self
            .dissim
            .iter()
            .map(|&v| if v.is_finite() { (v * scale).round() / scale } else { v })
            .collect();
        Network::from_flat(self.labels.clone(), dissim)
    }

    /// Structural equality ignoring labels.
    pub fn same_matrix(&self, other: &Network) -> bool {
        self.len() == other.len()
            && self
                .dissim
                .iter()
                .zip(&other.dissim)
                .all(|(a, b)| a.to_bits() == b.to_bits() || a == b)
    }
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            write!(f, "{}:", self.labels[i])?;
            for v in self.row(i) {
                write!(f, " {v}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

pub(crate) fn is_permutation(perm: &[usize], n: usize) -> bool {
    if perm.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    perm.iter().all(|&p| p < n && !std::mem::replace(&mut seen[p], true))
}

/// A network whose matrix satisfies the strong triangle inequality
/// `u(i, j) <= max(u(i, k), u(k, j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiUltrametric(Network);

impl QuasiUltrametric {
    pub fn certify(net: Network) -> Result<Self, NetworkError> {
        check_strong_triangle(&net)?;
        Ok(QuasiUltrametric(net))
    }

    pub(crate) fn certified_unchecked(net: Network) -> Self {
        debug_assert!(check_strong_triangle(&net).is_ok());
        QuasiUltrametric(net)
    }

    pub fn as_network(&self) -> &Network {
        &self.0
    }

    pub fn into_network(self) -> Network {
        self.0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        self.0.labels()
    }

    /// Maximal symmetrization `s(i, j) = max(u(i, j), u(j, i))`.
    ///
    /// The result is an ultrametric, hence itself a quasi-ultrametric.
    pub fn max_symmetrize(&self) -> QuasiUltrametric {
        let n = self.len();
        let mut dissim = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dissim[i * n + j] = self.get(i, j).max(self.get(j, i));
            }
        }
        QuasiUltrametric::certified_unchecked(Network::from_parts_unchecked(
            self.labels().to_vec(),
            dissim,
        ))
    }
}

/// Certifies `net` as a quasi-ultrametric, or names the first violating
/// triple in `(i, j, k)` scan order.
pub fn check_quasi_ultrametric(net: Network) -> Result<QuasiUltrametric, NetworkError> {
    QuasiUltrametric::certify(net)
}

fn check_strong_triangle(net: &Network) -> Result<(), NetworkError> {
    let n = net.len();
    for i in 0..n {
        for j in 0..n {
            let direct = net.get(i, j);
            for k in 0..n {
                let (first, second) = (net.get(i, k), net.get(k, j));
                if direct > first.max(second) {
                    return Err(NetworkError::StrongTriangleViolation {
                        i,
                        k,
                        j,
                        direct,
                        first,
                        second,
                    });
                }
            }
        }
    }
    Ok(())
}

/// `max_symmetrize` as a free function.
pub fn max_symmetrize(u: &QuasiUltrametric) -> QuasiUltrametric {
    u.max_symmetrize()
}

/// Minimum positive dissimilarity. An all-`inf` network yields `inf`.
pub fn separation(net: &Network) -> Result<f64, NetworkError> {
    let n = net.len();
    if n < 2 {
        return Err(NetworkError::SingletonNetwork);
    }
    Ok((0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| net.get(i, j))
        .fold(f64::INFINITY, f64::min))
}

/// Change-of-scale functions with monotonicity certified by construction.
///
/// Every member is nondecreasing on `[0, inf]` and maps `0` to `0` and
/// positive values to positive values (barring floating point underflow,
/// which `scale_transform` rejects).
#[derive(Debug, Clone, PartialEq)]
pub enum ScaleFn {
    Identity,
    /// `a * x` with `a > 0`.
    Linear(f64),
    /// `x^p` with `p > 0`.
    Power(f64),
    /// `outer(inner(x))`.
    Compose(Box<ScaleFn>, Box<ScaleFn>),
    /// Pointwise sum of the terms, e.g. `x + x^3`.
    Sum(Vec<ScaleFn>),
}

impl ScaleFn {
    pub fn validate(&self) -> Result<(), NetworkError> {
        match self {
            ScaleFn::Identity => Ok(()),
            ScaleFn::Linear(a) if a.is_finite() && *a > 0.0 => Ok(()),
            ScaleFn::Linear(a) => Err(NetworkError::InvalidScaleSpec(format!(
                "linear coefficient must be positive and finite, got {a}"
            ))),
            ScaleFn::Power(p) if p.is_finite() && *p > 0.0 => Ok(()),
            ScaleFn::Power(p) => Err(NetworkError::InvalidScaleSpec(format!(
                "exponent must be positive and finite, got {p}"
            ))),
            ScaleFn::Compose(outer, inner) => {
                outer.validate()?;
                inner.validate()
            }
            ScaleFn::Sum(terms) if terms.is_empty() => Err(NetworkError::InvalidScaleSpec(
                "sum needs at least one term".to_string(),
            )),
            ScaleFn::Sum(terms) => terms.iter().try_for_each(ScaleFn::validate),
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        match self {
            ScaleFn::Identity => x,
            ScaleFn::Linear(a) => a * x,
            ScaleFn::Power(p) => power(x, *p),
            ScaleFn::Compose(outer, inner) => outer.apply(inner.apply(x)),
            ScaleFn::Sum(terms) => terms.iter().map(|t| t.apply(x)).sum(),
        }
    }

    /// Parses `id`, `linear:A`, `power:P`, `sum:F+G+...`, or `F|G`
    /// (composition, outer first). Example: `sum:power:1+power:3`.
    pub fn parse(spec: &str) -> Result<ScaleFn, NetworkError> {
        let spec = spec.trim();
        if let Some((outer, inner)) = spec.split_once('|') {
            let f = ScaleFn::Compose(Box::new(Self::parse(outer)?), Box::new(Self::parse(inner)?));
            f.validate()?;
            return Ok(f);
        }
        let bad = || NetworkError::InvalidScaleSpec(format!("cannot parse {spec:?}"));
        let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        let f = if spec == "id" || spec == "identity" {
            ScaleFn::Identity
        } else if let Some(rest) = spec.strip_prefix("linear:") {
            ScaleFn::Linear(number(rest)?)
        } else if let Some(rest) = spec.strip_prefix("power:") {
            ScaleFn::Power(number(rest)?)
        } else if let Some(rest) = spec.strip_prefix("sum:") {
            ScaleFn::Sum(rest.split('+').map(Self::parse).collect::<Result<_, _>>()?)
        } else {
            return Err(bad());
        };
        f.validate()?;
        Ok(f)
    }
}

// Integer exponents use repeated multiplication: each correctly rounded
// product of non-negative values is monotone, so the composite is too.
fn power(x: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && (1.0..=64.0).contains(&p) {
        let mut acc = x;
        for _ in 1..p as u32 {
            acc *= x;
        }
        acc
    } else {
        x.powf(p)
    }
}

/// Applies `psi` entrywise.
pub fn scale_transform(net: &Network, psi: &ScaleFn) -> Result<Network, NetworkError> {
    psi.validate()?;
    let mut dissim = Vec::with_capacity(net.as_slice().len());
    for &v in net.as_slice() {
        let w = psi.apply(v);
        if v > 0.0 && w <= 0.0 {
            return Err(NetworkError::ScaleUnderflow { value: v });
        }
        dissim.push(w);
    }
    Network::from_flat(net.labels().to_vec(), dissim)
}

/// Largest pointwise-dominated matrix satisfying the directed triangle
/// inequality: all-pairs shortest path sums (Floyd-Warshall, min-plus).
///
/// Rounded sums depend on association order, so one pass can leave a
/// triangle violated by an ulp; passes repeat until nothing changes, which
/// makes the closure exactly idempotent.
pub fn metric_closure(net: &Network) -> Network {
    let n = net.len();
    let mut d = net.as_slice().to_vec();
    loop {
        let mut changed = false;
        for k in 0..n {
            for i in 0..n {
                let dik = d[i * n + k];
                if dik == f64::INFINITY {
                    continue;
                }
                for j in 0..n {
                    let via = dik + d[k * n + j];
                    if via < d[i * n + j] {
                        d[i * n + j] = via;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    Network::from_parts_unchecked(net.labels().to_vec(), d)
}
