use dnsprior::admm::{admm_solve, beta_search, AdmmConfig, BetaSearch, Method};
use dnsprior::eval::{degree_histogram, regression_slope};
use dnsprior::model::{edges_from_matrix, DEFAULT_EDGE_THRESHOLD};
use dnsprior::prior::PenaltySchedule;
use dnsprior::synth::{ba_generate, precision_from_graph, GeneratorSpec};
use dnsprior::ystep::{solve_node_ranking, RankingSolverState};
use dnsprior::Error;

#[test]
fn beta_search_hits_a_target_edge_count() {
    let inst = GeneratorSpec {
        p: 40,
        n_samples: 80,
        seed: 3,
        ..Default::default()
    }
    .generate()
    .unwrap();
    let s = inst.data.empirical_covariance();
    for method in [Method::L1, Method::Dns] {
        let config = AdmmConfig {
            method,
            ..Default::default()
        };
        let (_, r) = beta_search(&s, &config, 60, 3, &BetaSearch::default()).unwrap();
        let edges = r.edge_count();
        assert!((57..=63).contains(&edges), "{method:?}: {edges} edges");
    }
}

#[test]
fn zero_target_returns_an_empty_graph() {
    let inst = GeneratorSpec {
        p: 20,
        n_samples: 40,
        seed: 1,
        ..Default::default()
    }
    .generate()
    .unwrap();
    let s = inst.data.empirical_covariance();
    let config = AdmmConfig {
        method: Method::L1,
        ..Default::default()
    };
    let (beta, r) = beta_search(&s, &config, 0, 0, &BetaSearch::default()).unwrap();
    assert_eq!(r.edge_count(), 0);
    assert!(beta > config.beta);
}

#[test]
fn unreachable_density_is_a_bracket_failure() {
    let inst = GeneratorSpec {
        p: 20,
        n_samples: 40,
        seed: 2,
        ..Default::default()
    }
    .generate()
    .unwrap();
    let s = inst.data.empirical_covariance();
    let config = AdmmConfig {
        method: Method::L1,
        ..Default::default()
    };
    let bounds = BetaSearch {
        beta_min: 0.05,
        ..Default::default()
    };
    match beta_search(&s, &config, 190, 0, &bounds) {
        Err(Error::Bracket { target: 190, .. }) => {}
        Ok((_, r)) => assert_eq!(r.edge_count(), 190),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn top_k_ranking_gives_the_same_edges() {
    let inst = GeneratorSpec {
        p: 50,
        n_samples: 100,
        seed: 4,
        ..Default::default()
    }
    .generate()
    .unwrap();
    let s = inst.data.empirical_covariance();
    let base = AdmmConfig {
        target_edges: Some(inst.edges.len()),
        ..Default::default()
    };
    let full = admm_solve(&s, &base).unwrap();
    let fast = admm_solve(
        &s,
        &AdmmConfig {
            top_k: Some(10),
            ..base
        },
    )
    .unwrap();
    assert!(full.converged && fast.converged);
    let a = edges_from_matrix(&full.y, DEFAULT_EDGE_THRESHOLD).unwrap();
    let b = edges_from_matrix(&fast.y, DEFAULT_EDGE_THRESHOLD).unwrap();
    assert_eq!(a, b);
    assert_eq!(full.iterations, fast.iterations);
}

#[test]
fn ranking_output_is_exactly_symmetric() {
    let inst = GeneratorSpec {
        p: 25,
        n_samples: 50,
        seed: 8,
        ..Default::default()
    }
    .generate()
    .unwrap();
    let a = inst.data.empirical_covariance();
    let sched = PenaltySchedule::build(25, 2.5, 1.0, inst.edges.len()).unwrap();
    let y = solve_node_ranking(&a, 0.05, &sched, &mut RankingSolverState::new(&sched))
        .unwrap()
        .y;
    let m = y.as_matrix();
    assert_eq!(m, &m.transpose());
}

#[test]
fn ba_graphs_have_the_counted_edges_and_heavy_tails() {
    let mut over_five_medians = 0;
    for seed in 0..20 {
        let g = ba_generate(500, 2, seed).unwrap();
        assert_eq!(g.len(), 997);
        let mut d = g.degree_sequence();
        d.sort_unstable();
        if d[499] > 5 * d[250] {
            over_five_medians += 1;
        }
        assert!(regression_slope(&degree_histogram(&g).pairs).unwrap() < 0.0);
        if seed < 3 {
            let omega = precision_from_graph(&g, 0.3, 0.2).unwrap();
            let lmin = omega
                .as_matrix()
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .min();
            assert!(lmin >= 0.2 - 1e-9, "{lmin}");
        }
    }
    assert_eq!(over_five_medians, 20);
    let small = ba_generate(100, 2, 0)
        .unwrap()
        .degree_sequence()
        .into_iter()
        .max()
        .unwrap();
    let large = ba_generate(2000, 2, 0)
        .unwrap()
        .degree_sequence()
        .into_iter()
        .max()
        .unwrap();
    assert!(large > small);
}
