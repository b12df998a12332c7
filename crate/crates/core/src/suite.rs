//! Randomized property suite behind `check-axioms`.
//!
//! Every check draws fresh instances from a seeded ChaCha stream, so a
//! report is reproducible from `(seed, trials)`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dendrogram::{psi, upsilon};
use crate::dioid::{axiom_a1_holds, axiom_a2_check, dsl, ChainOracle, DioidMatrix};
use crate::distance::{stability_check_with, ExactDistance};
use crate::network::{metric_closure, scale_transform, Network, QuasiUltrametric, ScaleFn};
use crate::random::{
    mixed_entry, random_network, random_permutation, random_quasi_dendrogram, random_quotient,
    random_reduction, random_sparse_network,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub oracle_cap: usize,
    pub exact_cap: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            trials: 100,
            oracle_cap: crate::dioid::DEFAULT_ORACLE_CAP,
            exact_cap: crate::distance::DEFAULT_EXACT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
    /// Description of the first failing instance.
    pub first_failure: Option<String>,
}

impl CheckResult {
    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckResult::ok)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "property suite (seed {})", self.seed)?;
        for c in &self.checks {
            let tag = if c.ok() { "PASS" } else { "FAIL" };
            writeln!(f, "{tag} {:<20} {}/{}", c.name, c.passed, c.total)?;
            if let Some(msg) = &c.first_failure {
                writeln!(f, "     first failure: {msg}")?;
            }
        }
        Ok(())
    }
}

fn run_check(
    name: &'static str,
    trials: usize,
    rng: &mut ChaCha8Rng,
    mut trial: impl FnMut(&mut ChaCha8Rng) -> Result<(), String>,
) -> CheckResult {
    let mut passed = 0;
    let mut first_failure = None;
    for _ in 0..trials {
        match trial(rng) {
            Ok(()) => passed += 1,
            Err(msg) if first_failure.is_none() => first_failure = Some(msg),
            Err(_) => {}
        }
    }
    CheckResult {
        name,
        passed,
        total: trials,
        first_failure,
    }
}

fn describe(net: &Network) -> String {
    format!("{:?}", net.to_rows())
}

fn same_output(a: &QuasiUltrametric, b: &QuasiUltrametric) -> bool {
    a.as_network().same_matrix(b.as_network())
}

pub fn run_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let trials = cfg.trials;
    let oracle_max = cfg.oracle_cap.clamp(2, 7);
    let exact = ExactDistance::new(cfg.exact_cap);
    let mut checks = Vec::new();

    checks.push(run_check("a1-two-node", trials, &mut rng, |rng| {
        let (a, b) = (mixed_entry(rng), mixed_entry(rng));
        axiom_a1_holds(a, b).then_some(()).ok_or(format!("alpha={a}, beta={b}"))
    }));

    checks.push(run_check("a2-reduction", trials, &mut rng, |rng| {
        let n = rng.gen_range(2..=6);
        let x = random_network(rng, n);
        let y = random_reduction(rng, &x);
        let phi: Vec<usize> = (0..n).collect();
        match axiom_a2_check(&x, &y, &phi) {
            Ok(o) if o.passed() => Ok(()),
            other => Err(format!("{other:?} on {}", describe(&x))),
        }
    }));

    checks.push(run_check("a2-quotient", trials, &mut rng, |rng| {
        let n = rng.gen_range(2..=6);
        let x = random_network(rng, n);
        let (y, phi) = random_quotient(rng, &x, 2);
        match axiom_a2_check(&x, &y, &phi) {
            Ok(o) if o.passed() => Ok(()),
            other => Err(format!("{other:?} on {}", describe(&x))),
        }
    }));

    checks.push(run_check("chain-oracle", trials, &mut rng, |rng| {
        let n = rng.gen_range(2..=oracle_max);
        let net = random_sparse_network(rng, n, 0.2);
        let oracle = ChainOracle::new(cfg.oracle_cap)
            .matrix(&net)
            .map_err(|e| e.to_string())?;
        (dsl(&net).as_network().to_rows() == oracle)
            .then_some(())
            .ok_or_else(|| describe(&net))
    }));

    checks.push(run_check("fixed-point", trials, &mut rng, |rng| {
        let n = rng.gen_range(2..=7);
        let net = random_network(rng, n);
        let candidate = if rng.gen_bool(0.5) { dsl(&net).into_network() } else { net };
        let m = DioidMatrix::from(&candidate);
        let is_fixed = m.square() == m;
        let is_qu = QuasiUltrametric::certify(candidate.clone()).is_ok();
        (is_fixed == is_qu)
            .then_some(())
            .ok_or_else(|| format!("fixed={is_fixed}, certified={is_qu} on {}", describe(&candidate)))
    }));

    checks.push(run_check("psi-upsilon", trials, &mut rng, |rng| {
        let n = rng.gen_range(1..=8);
        let u = dsl(&random_sparse_network(rng, n, 0.15));
        let back = psi(&upsilon(&u)).map_err(|e| e.to_string())?;
        same_output(&u, &back).then_some(()).ok_or_else(|| describe(u.as_network()))
    }));

    checks.push(run_check("upsilon-psi", trials, &mut rng, |rng| {
        let n = rng.gen_range(1..=8);
        let complete = rng.gen_bool(0.7);
        let d = random_quasi_dendrogram(rng, n, complete);
        let back = upsilon(&psi(&d).map_err(|e| e.to_string())?);
        (back == d).then_some(()).ok_or_else(|| format!("{d:?}"))
    }));

    checks.push(run_check("stability", trials, &mut rng, |rng| {
        let (nx, ny) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
        let (x, y) = (random_network(rng, nx), random_network(rng, ny));
        let out = stability_check_with(exact, &x, &y).map_err(|e| e.to_string())?;
        out.holds().then_some(()).ok_or_else(|| {
            format!(
                "d_out={} > d_in={} for {} vs {}",
                out.output_distance,
                out.input_distance,
                describe(&x),
                describe(&y)
            )
        })
    }));

    let scales = [
        ScaleFn::Linear(2.0),
        ScaleFn::Power(2.0),
        ScaleFn::Sum(vec![ScaleFn::Identity, ScaleFn::Power(3.0)]),
    ];
    checks.push(run_check("scale-invariance", trials, &mut rng, |rng| {
        let n = rng.gen_range(2..=6);
        let net = random_network(rng, n);
        let psi_fn = &scales[rng.gen_range(0..scales.len())];
        let lhs = dsl(&scale_transform(&net, psi_fn).map_err(|e| e.to_string())?);
        let rhs = scale_transform(dsl(&net).as_network(), psi_fn).map_err(|e| e.to_string())?;
        lhs.as_network()
            .same_matrix(&rhs)
            .then_some(())
            .ok_or_else(|| format!("{psi_fn:?} on {}", describe(&net)))
    }));

    checks.push(run_check("permutation", trials, &mut rng, |rng| {
        let n = rng.gen_range(2..=7);
        let net = random_sparse_network(rng, n, 0.2);
        let perm = random_permutation(rng, n);
        let lhs = dsl(&net.permute(&perm).map_err(|e| e.to_string())?);
        let rhs = dsl(&net).into_network().permute(&perm).map_err(|e| e.to_string())?;
        lhs.as_network()
            .same_matrix(&rhs)
            .then_some(())
            .ok_or_else(|| format!("{perm:?} on {}", describe(&net)))
    }));

    checks.push(run_check("metric-closure", trials, &mut rng, |rng| {
        let n = rng.gen_range(2..=7);
        let net = random_sparse_network(rng, n, 0.2);
        same_output(&dsl(&net), &dsl(&metric_closure(&net)))
            .then_some(())
            .ok_or_else(|| describe(&net))
    }));

    checks.push(run_check("idempotence", trials, &mut rng, |rng| {
        let n = rng.gen_range(1..=8);
        let u = dsl(&random_sparse_network(rng, n, 0.2));
        same_output(&u, &dsl(u.as_network()))
            .then_some(())
            .ok_or_else(|| describe(u.as_network()))
    }));

    SuiteReport {
        seed: cfg.seed,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes_and_is_reproducible() {
        let cfg = SuiteConfig {
            seed: 7,
            trials: 10,
            ..SuiteConfig::default()
        };
        let a = run_suite(&cfg);
        assert!(a.all_passed(), "{a}");
        assert_eq!(a, run_suite(&cfg));
    }
}
