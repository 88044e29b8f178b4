use dnsprior::admm::{admm_solve, x_update, AdmmConfig, Method};
use dnsprior::eval::evaluate_predictions;
use dnsprior::io::{read_table, write_table};
use dnsprior::model::{rank_row, Dataset, EdgeSet, SquareMatrix, SymmetricMatrix};
use dnsprior::oracle::{brute_partition, lemma3_gap, partition_property_violations};
use dnsprior::partition::{
    is_stable, ordered_objective, ordered_partition, ordered_partition_sequential, solve_ordered,
};
use dnsprior::prior::{
    dynamic_prior, log_degree_score, lovasz_weight_sequence, node_scores, rank_weight_sequence,
    rewire_equal_degree, PenaltySchedule,
};
use dnsprior::synth::{ba_generate, precision_from_graph, sample_gaussian, GeneratorSpec, Rng};
use dnsprior::ystep::{
    solve_node_ranking, solve_symmetric, RankingSolverState, SymmetrySolverState,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn ranked_problem(max_len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max_len).prop_flat_map(|m| {
        (
            prop::collection::vec(0.0..6.0f64, m),
            prop::collection::vec(0.0..2.0f64, m),
        )
            .prop_map(|(mut b, g)| {
                b.sort_by(|x, y| y.total_cmp(x));
                (b, g)
            })
    })
}

fn symmetric(p: usize) -> impl Strategy<Value = SymmetricMatrix> {
    prop::collection::vec(-2.0..2.0f64, p * p)
        .prop_map(move |v| SymmetricMatrix::symmetrize(&DMatrix::from_row_slice(p, p, &v)))
}

fn graph(max_p: usize) -> impl Strategy<Value = EdgeSet> {
    (3..=max_p).prop_flat_map(|p| {
        prop::collection::vec(any::<bool>(), p * (p - 1) / 2).prop_map(move |keep| {
            let pairs = (0..p).flat_map(|u| ((u + 1)..p).map(move |v| (u, v)));
            EdgeSet::new(p, pairs.zip(keep).filter(|(_, k)| *k).map(|(e, _)| e)).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ranked_row_scatters_back(v in prop::collection::vec(-3.0..3.0f64, 2..30), owner_seed in any::<usize>()) {
        let p = v.len();
        let m = SquareMatrix::new(DMatrix::from_fn(p, p, |i, j| v[(i + j) % p] * if i < j { 1.0 } else { -0.5 })).unwrap();
        let i = owner_seed % p;
        let row = rank_row(&m, i).unwrap();
        prop_assert!(row.magnitudes.windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(row.scatter(&row.magnitudes, m.get(i, i)), m.row(i));
    }

    #[test]
    fn degrees_sum_to_twice_the_edges(g in graph(12)) {
        prop_assert_eq!(g.degree_sequence().iter().sum::<usize>(), 2 * g.len());
    }

    #[test]
    fn covariance_is_symmetric_and_psd(n in 2usize..20, p in 1usize..8, v in prop::collection::vec(-5.0..5.0f64, 160)) {
        let d = Dataset::from_rows(n, p, &v[..n * p]).unwrap();
        let s = d.empirical_covariance();
        let m = s.as_matrix();
        prop_assert_eq!(m, &m.transpose());
        prop_assert!(m.clone().symmetric_eigen().eigenvalues.min() >= -1e-10);
    }

    #[test]
    fn node_penalties_are_ordered(p in 3usize..300, gamma in 1.5..3.5f64, alpha in 0.25..3.0f64, frac in 0.0..1.0f64) {
        let max_edges = p * (p - 1) / 2;
        let target = 1 + (frac * (max_edges - 1) as f64) as usize;
        let s = PenaltySchedule::build(p, gamma, alpha, target).unwrap();
        prop_assert!(s.expected_degrees().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(s.node_penalties().windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(s.rank_weights().windows(2).all(|w| w[0] <= w[1]));
        for v in 0..p {
            prop_assert!(s.row_penalties(v, 0.3).windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn dynamic_prior_ignores_labels(x in symmetric(6), perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle()) {
        let sched = PenaltySchedule::build(6, 2.5, 1.0, 6).unwrap();
        let scores = node_scores(&x, sched.lovasz_weights(), &[0.0; 6]);
        let mut sorted = scores.clone();
        sorted.sort_by(f64::total_cmp);
        // ties are broken by label, which a relabeling changes
        prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] > 1e-9));
        let a = dynamic_prior(&x, &sched).unwrap();
        let b = dynamic_prior(&x.permuted(&perm), &sched).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn rewiring_keeps_lowering_the_score(g in graph(10)) {
        let mut cur = g;
        for _ in 0..200 {
            match rewire_equal_degree(&cur) {
                Ok(r) => {
                    prop_assert!(log_degree_score(&r.edges) < log_degree_score(&cur));
                    prop_assert_eq!(r.edges.len(), cur.len());
                    cur = r.edges;
                }
                Err(_) => break,
            }
        }
    }

    #[test]
    fn bisection_and_sequential_merging_agree((b, g) in ranked_problem(300)) {
        let fast = ordered_partition(&b, &g).unwrap().values();
        let seq = ordered_partition_sequential(&b, &g).unwrap().values();
        prop_assert_eq!(fast.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), seq.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn partitions_are_stable_and_well_formed((b, g) in ranked_problem(300)) {
        let part = ordered_partition(&b, &g).unwrap();
        prop_assert!(is_stable(&part.values(), &b, &g));
        let (p1, p2) = partition_property_violations(&part);
        prop_assert!(p1 <= 1e-8 && p2 <= 1e-8, "{} {}", p1, p2);
    }

    #[test]
    fn exhaustive_partition_agrees((b, g) in ranked_problem(8)) {
        let brute = brute_partition(&b, &g).unwrap();
        prop_assert!(is_stable(&brute, &b, &g));
        let fast = solve_ordered(&b, &g).unwrap();
        let gap = ordered_objective(&fast, &b, &g) - ordered_objective(&brute, &b, &g);
        prop_assert!(gap.abs() <= 1e-9);
    }

    #[test]
    fn raising_a_penalty_never_raises_a_value((b, g) in ranked_problem(60), k_seed in any::<usize>(), bump in 0.0..1.0f64) {
        let k = k_seed % g.len();
        let before = solve_ordered(&b, &g).unwrap();
        let mut g2 = g.clone();
        g2[k] += bump;
        let after = solve_ordered(&b, &g2).unwrap();
        for (x, y) in before.iter().zip(&after) {
            prop_assert!(*y <= x + 1e-12);
        }
    }

    #[test]
    fn lemma3_gap_is_non_negative(
        raw_x in prop::collection::vec(0.0..5.0f64, 2..12),
        raw_d in prop::collection::vec(0.0..1.0f64, 12),
        s_seed in any::<usize>(),
    ) {
        let mut x = raw_x;
        x.sort_by(|a, b| b.total_cmp(a));
        let n = x.len();
        let s = 1 + s_seed % (n - 1);
        let mut delta = raw_d[..n].to_vec();
        let head: f64 = delta[..s].iter().sum();
        let tail: f64 = delta[s..].iter().sum();
        prop_assume!(tail > 0.0);
        if head < tail {
            // shrink the tail so the shifts balance, with room for rounding
            let c = head / tail * (1.0 - 1e-9);
            prop_assume!(c > 0.0);
            delta[s..].iter_mut().for_each(|d| *d *= c);
        }
        prop_assert!(lemma3_gap(&x, &delta, s).unwrap() >= -1e-12);
    }

    #[test]
    fn symmetric_solve_is_exactly_symmetric(a in symmetric(5), c in 0.01..0.5f64) {
        let h = rank_weight_sequence(4, 1.0);
        let pen: Vec<Vec<f64>> = (0..5).map(|v| h.iter().map(|x| c * (1.0 + v as f64 * 0.2) * x).collect()).collect();
        let y = solve_symmetric(&a, &pen, &mut SymmetrySolverState::new(5)).unwrap().y;
        let m = y.as_matrix();
        prop_assert_eq!(m, &m.transpose());
    }

    #[test]
    fn x_update_is_positive_definite(y in symmetric(6), u in symmetric(6), rho in 0.05..20.0f64, raw in prop::collection::vec(-1.0..1.0f64, 60)) {
        let z = DMatrix::from_row_slice(10, 6, &raw);
        let s = SymmetricMatrix::symmetrize(&(z.transpose() * &z / 10.0));
        let x = x_update(&s, &y, &u, rho).unwrap();
        prop_assert!(x.as_matrix().clone().symmetric_eigen().eigenvalues.min() > 0.0);
    }

    #[test]
    fn curves_never_decrease(g in graph(10), order in prop::collection::vec(any::<u32>(), 45)) {
        let p = g.order();
        let mut pairs: Vec<(usize, usize)> = (0..p).flat_map(|u| ((u + 1)..p).map(move |v| (u, v))).collect();
        let mut keyed: Vec<(u32, (usize, usize))> = order.into_iter().zip(pairs.drain(..)).collect();
        keyed.sort();
        let ranked: Vec<(usize, usize)> = keyed.into_iter().map(|(_, e)| e).collect();
        let ks: Vec<usize> = (0..=ranked.len()).collect();
        let curve = evaluate_predictions(&ranked, &g, &ks).unwrap();
        prop_assert!(curve.windows(2).all(|w| w[0].1 <= w[1].1));
        let recount = ranked.iter().filter(|&&(u, v)| g.contains(u, v)).count();
        prop_assert_eq!(curve.last().unwrap().1, recount);
    }

    #[test]
    fn csv_round_trip(v in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL, 12)) {
        let m = DMatrix::from_row_slice(3, 4, &v);
        let mut buf = Vec::new();
        write_table(&mut buf, &m, None).unwrap();
        prop_assert_eq!(read_table(buf.as_slice()).unwrap(), m);
    }
}

#[test]
fn lovasz_and_rank_weights_on_a_spot_grid() {
    for m in [1usize, 2, 10, 1000, 100_000, 999_999] {
        let h = lovasz_weight_sequence(m);
        let big = rank_weight_sequence(m, 1.0);
        assert!(h.windows(2).all(|w| w[1] < w[0]), "h at {m}");
        assert!(big.windows(2).all(|w| w[1] >= w[0]), "H at {m}");
    }
}

#[test]
fn uniform_schedule_matches_soft_thresholding() {
    let inst = GeneratorSpec {
        p: 15,
        n_samples: 40,
        seed: 11,
        ..Default::default()
    }
    .generate()
    .unwrap();
    let s = inst.data.empirical_covariance();
    let zero = SymmetricMatrix::zeros(15);
    let a = x_update(&s, &zero, &zero, 1.0).unwrap();
    let sched = PenaltySchedule::uniform(15);
    let lambda = 0.05;
    let y = solve_node_ranking(&a, lambda, &sched, &mut RankingSolverState::new(&sched))
        .unwrap()
        .y;
    for i in 0..15 {
        for j in 0..15 {
            let v = a.get(i, j);
            let expect = if i == j {
                v
            } else {
                v.signum() * (v.abs() - lambda).max(0.0)
            };
            assert!((y.get(i, j) - expect).abs() <= 1e-8);
        }
    }
}

#[test]
fn zero_beta_recovers_the_inverse_covariance() {
    let mut rng = Rng::new(12);
    let z = DMatrix::from_fn(400, 5, |_, _| rng.normal());
    let s = Dataset::new(z).unwrap().empirical_covariance();
    for method in [Method::L1, Method::Dns] {
        let config = AdmmConfig {
            beta: 0.0,
            method,
            primal_tol: 1e-10,
            dual_tol: 1e-10,
            max_outer: 2000,
            ..Default::default()
        };
        let r = admm_solve(&s, &config).unwrap();
        assert!(
            r.converged,
            "{method:?}: {} iterations, residuals {:.2e} {:.2e}",
            r.iterations, r.primal_residual, r.dual_residual
        );
        let inv = s.as_matrix().clone().try_inverse().unwrap();
        let err = (r.x.as_matrix() - &inv).norm() / inv.norm();
        assert!(err < 1e-6, "{method:?}: relative error {err:.2e}");
    }
}

#[test]
fn generation_is_deterministic() {
    let spec = GeneratorSpec {
        p: 30,
        n_samples: 20,
        seed: 5,
        ..Default::default()
    };
    assert_eq!(spec.generate().unwrap(), spec.generate().unwrap());
}

#[test]
fn precision_pattern_is_the_graph() {
    for seed in 0..5 {
        let g = ba_generate(40, 2, seed).unwrap();
        let omega = precision_from_graph(&g, 0.3, 0.2).unwrap();
        for i in 0..40 {
            for j in (i + 1)..40 {
                assert_eq!(omega.get(i, j) != 0.0, g.contains(i, j));
            }
        }
    }
}

#[test]
fn sample_covariance_approaches_the_truth() {
    let chain = EdgeSet::new(3, [(0, 1), (1, 2)]).unwrap();
    for (omega, seed) in [
        (SymmetricMatrix::identity(5), 9),
        (precision_from_graph(&chain, 0.3, 0.2).unwrap(), 10),
    ] {
        let sigma = omega.as_matrix().clone().try_inverse().unwrap();
        let s = sample_gaussian(&omega, 50_000, seed)
            .unwrap()
            .empirical_covariance();
        let scale = sigma.amax();
        let worst = (s.as_matrix() - &sigma).amax();
        assert!(
            worst <= 0.05 * scale,
            "worst entry error {worst:.4} against scale {scale:.4}"
        );
    }
}
