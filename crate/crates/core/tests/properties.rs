use std::collections::BTreeSet;

use proptest::prelude::*;

use quasiclust::dendrogram::{cut_at, psi, upsilon};
use quasiclust::dioid::{dioid_power, dsl, ChainOracle, DioidMatrix};
use quasiclust::distance::{network_distance_exact, network_distance_upper};
use quasiclust::export::{dendrogram_from_json, dendrogram_to_json};
use quasiclust::io::{read_matrix_csv, transform_flow, write_matrix_csv, FlowTable};
use quasiclust::network::{
    check_quasi_ultrametric, max_symmetrize, metric_closure, scale_transform, Network,
    QuasiUltrametric, ScaleFn,
};
use quasiclust::partition::{QuasiEquivalence, QuasiPartition};
use quasiclust::random::random_quasi_dendrogram;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const INF: f64 = f64::INFINITY;

fn entry() -> impl Strategy<Value = f64> {
    prop_oneof![
        4 => (1u8..=5).prop_map(f64::from),
        4 => 0.1f64..10.0,
        1 => Just(INF),
    ]
}

fn network(max_n: usize) -> impl Strategy<Value = Network> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(entry(), n * n).prop_map(move |mut flat| {
            for i in 0..n {
                flat[i * n + i] = 0.0;
            }
            Network::from_flat((1..=n).map(|i| format!("x{i}")).collect(), flat).unwrap()
        })
    })
}

fn symmetric_network(max_n: usize) -> impl Strategy<Value = Network> {
    network(max_n).prop_map(|net| {
        let n = net.len();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| net.get(i.min(j), i.max(j))).collect())
            .collect();
        Network::new(net.labels().to_vec(), rows).unwrap()
    })
}

fn scale_fn() -> impl Strategy<Value = ScaleFn> {
    let leaf = prop_oneof![
        Just(ScaleFn::Identity),
        (0.25f64..4.0).prop_map(ScaleFn::Linear),
        (1u8..=4).prop_map(|p| ScaleFn::Power(f64::from(p))),
    ];
    leaf.prop_recursive(2, 6, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ScaleFn::Compose(Box::new(a), Box::new(b))),
            prop::collection::vec(inner, 1..=3).prop_map(ScaleFn::Sum),
        ]
    })
}

fn leq(a: &Network, b: &Network) -> bool {
    a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x <= y)
}

#[test]
fn frozen_four_cycle() {
    // Values worked out by hand from the chain definition.
    let net = Network::from_rows(vec![
        vec![0.0, 1.0, 10.0, 10.0],
        vec![10.0, 0.0, 2.0, 10.0],
        vec![10.0, 10.0, 0.0, 3.0],
        vec![4.0, 10.0, 10.0, 0.0],
    ])
    .unwrap();
    let expected = vec![
        vec![0.0, 1.0, 2.0, 3.0],
        vec![4.0, 0.0, 2.0, 3.0],
        vec![4.0, 4.0, 0.0, 3.0],
        vec![4.0, 4.0, 4.0, 0.0],
    ];
    assert_eq!(dsl(&net).as_network().to_rows(), expected);
    assert_eq!(ChainOracle::default().matrix(&net).unwrap(), expected);
}

#[test]
fn frozen_disconnected() {
    let net = Network::from_rows(vec![
        vec![0.0, 2.0, INF],
        vec![1.0, 0.0, INF],
        vec![5.0, INF, 0.0],
    ])
    .unwrap();
    let u = dsl(&net);
    assert_eq!(
        u.as_network().to_rows(),
        vec![vec![0.0, 2.0, INF], vec![1.0, 0.0, INF], vec![5.0, 5.0, 0.0]]
    );
    let d = upsilon(&u);
    assert!(!d.strongly_connected());
    assert_eq!(d.max_resolution(), INF);
    assert!(psi(&d).unwrap().as_network().same_matrix(u.as_network()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn matrix_csv_round_trip_is_bit_exact(net in network(7)) {
        let text = write_matrix_csv(&net);
        let back = read_matrix_csv(&text).unwrap();
        prop_assert!(back.as_slice().iter().zip(net.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert_eq!(back.labels(), net.labels());
        prop_assert_eq!(write_matrix_csv(&back), text);
    }

    #[test]
    fn validation_matches_definition(
        n in 1usize..=4,
        raw in prop::collection::vec(prop_oneof![Just(-1.0), Just(0.0), Just(f64::NAN), Just(INF), 0.5f64..3.0], 16),
    ) {
        let flat: Vec<f64> = raw[..n * n].to_vec();
        let valid = (0..n * n).all(|idx| {
            let v = flat[idx];
            if idx / n == idx % n { v == 0.0 } else { v > 0.0 }
        });
        let labels = (0..n).map(|i| format!("x{i}")).collect();
        prop_assert_eq!(Network::from_flat(labels, flat).is_ok(), valid);
    }

    #[test]
    fn certification_iff_fixed_point(net in network(6), use_dsl in any::<bool>()) {
        let m_net = if use_dsl { dsl(&net).into_network() } else { net };
        let m = DioidMatrix::from(&m_net);
        prop_assert_eq!(m.square() == m, check_quasi_ultrametric(m_net).is_ok());
    }

    #[test]
    fn metric_closure_idempotent_and_dominated(net in network(7)) {
        let c = metric_closure(&net);
        prop_assert!(leq(&c, &net));
        prop_assert!(metric_closure(&c).same_matrix(&c));
    }

    #[test]
    fn max_symmetrization_is_an_ultrametric(net in network(7)) {
        let s = max_symmetrize(&dsl(&net));
        prop_assert!(s.as_network().is_symmetric());
        prop_assert!(QuasiUltrametric::certify(s.into_network()).is_ok());
    }

    #[test]
    fn scale_commutes_with_dsl(net in network(6), f in scale_fn()) {
        let lhs = dsl(&scale_transform(&net, &f).unwrap());
        let rhs = scale_transform(dsl(&net).as_network(), &f).unwrap();
        prop_assert!(lhs.as_network().same_matrix(&rhs));
    }

    #[test]
    fn dsl_matches_oracle_is_idempotent_and_dominated(net in network(7)) {
        let u = dsl(&net);
        prop_assert_eq!(u.as_network().to_rows(), ChainOracle::new(7).matrix(&net).unwrap());
        prop_assert!(dsl(u.as_network()).as_network().same_matrix(u.as_network()));
        prop_assert!(leq(u.as_network(), &net));
    }

    #[test]
    fn powers_decrease_and_stabilize(net in network(6)) {
        let a = DioidMatrix::from(&net);
        let n = net.len() as u32;
        let mut prev = a.clone();
        for k in 2..=n.max(2) {
            let next = dioid_power(&a, k).unwrap();
            prop_assert!(next.as_slice().iter().zip(prev.as_slice()).all(|(x, y)| x <= y));
            prev = next;
        }
        let stable = dioid_power(&a, n.saturating_sub(1).max(1)).unwrap();
        prop_assert_eq!(&dioid_power(&a, n + 1).unwrap(), &stable);
        let u = dsl(&net);
        prop_assert_eq!(stable.as_slice(), u.as_network().as_slice());
    }

    #[test]
    fn two_node_networks_are_fixed(a in entry(), b in entry()) {
        let net = Network::two_node(a, b).unwrap();
        prop_assert!(dsl(&net).as_network().same_matrix(&net));
    }

    #[test]
    fn cuts_are_valid_and_nested(net in network(7), d1 in 0.0f64..11.0, d2 in 0.0f64..11.0) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let u = dsl(&net);
        let (p, q) = (cut_at(&u, lo).unwrap(), cut_at(&u, hi).unwrap());
        for cut in [&p, &q] {
            // Rebuilding from parts re-runs QP1 and QP2 validation.
            let again = QuasiPartition::new(cut.node_count(), cut.blocks().to_vec(), cut.edges().iter().copied());
            prop_assert!(again.is_ok());
            prop_assert_eq!(cut.influence_order().linear_extension().len(), cut.block_count());
        }
        for block in p.blocks() {
            let target = q.block_of(block[0]);
            prop_assert!(block.iter().all(|&x| q.block_of(x) == target));
        }
        for &(a, b) in p.edges() {
            let (qa, qb) = (q.block_of(p.representative(a)), q.block_of(p.representative(b)));
            prop_assert!(qa == qb || q.has_edge(qa, qb));
        }
    }

    #[test]
    fn symmetric_inputs_have_no_edges(net in symmetric_network(7)) {
        let d = upsilon(&dsl(&net));
        prop_assert!(d.edge_events().is_empty());
    }

    #[test]
    fn dendrogram_json_round_trip(seed in any::<u64>(), n in 1usize..=8, complete in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_quasi_dendrogram(&mut rng, n, complete);
        prop_assert_eq!(dendrogram_from_json(&dendrogram_to_json(&d)).unwrap(), d.clone());
        prop_assert_eq!(upsilon(&psi(&d).unwrap()), d);
    }

    #[test]
    fn psi_upsilon_round_trip(net in network(8)) {
        let u = dsl(&net);
        prop_assert!(psi(&upsilon(&u)).unwrap().as_network().same_matrix(u.as_network()));
    }

    #[test]
    fn relation_round_trip(n in 1usize..=6, bits in prop::collection::vec(any::<bool>(), 36)) {
        let mut rel: Vec<bool> = (0..n * n).map(|idx| idx / n == idx % n || bits[idx]).collect();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if rel[i * n + k] && rel[k * n + j] {
                        rel[i * n + j] = true;
                    }
                }
            }
        }
        let q = QuasiEquivalence::new(n, rel).unwrap();
        prop_assert_eq!(q.to_quasi_partition().to_relation(), q);
    }

    #[test]
    fn upper_bound_dominates_exact(x in network(3), y in network(3)) {
        let exact = network_distance_exact(&x, &y).unwrap();
        prop_assert!(network_distance_upper(&x, &y, 50) >= exact);
        prop_assert_eq!(network_distance_exact(&y, &x).unwrap(), exact);
    }

    #[test]
    fn flow_columns_are_substochastic(
        n in 2usize..=5,
        raw in prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..100.0], 25),
        zero_diagonal in any::<bool>(),
    ) {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j && zero_diagonal { 0.0 } else { raw[i * n + j] }).collect())
            .collect();
        let labels = (0..n).map(|i| format!("s{i}")).collect();
        let table = FlowTable::new(labels, rows.clone()).unwrap();
        let out = transform_flow(&table).unwrap();
        for t in 0..n {
            let column: Vec<f64> = (0..n).filter(|&s| s != t).map(|s| out.network.get(s, t)).collect();
            if column.iter().all(|v| v.is_infinite()) {
                continue;
            }
            prop_assert!(column.iter().all(|&v| v > 0.0 && v <= 1.0));
            let share: f64 = column.iter().map(|v| 1.0 - v).sum();
            prop_assert!(share <= 1.0 + 1e-9);
            let clamped = (0..n).any(|s| s != t && rows[s][t] > 0.0 && (0..n).all(|i| i == s || rows[i][t] == 0.0));
            if zero_diagonal && !clamped {
                prop_assert!((share - 1.0).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn quasi_partition_edges_form_a_dag() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=7 {
        for _ in 0..20 {
            let p = quasiclust::random::random_quasi_partition(&mut rng, n);
            let order = p.influence_order().linear_extension();
            let position: Vec<usize> = {
                let mut pos = vec![0; order.len()];
                for (i, &b) in order.iter().enumerate() {
                    pos[b] = i;
                }
                pos
            };
            let edges: BTreeSet<(usize, usize)> = p.edges().clone();
            assert!(edges.iter().all(|&(a, b)| position[a] < position[b]));
        }
    }
}
