use proptest::prelude::*;

use consensus_spectra::bounds::{
    alpha, analytic_gram_bound, beta_b, beta_ds, kappa_bound, kappa_tilde_bound,
    reversible_rate_bound, small_variation_rate_bound, SupportGeometry,
};
use consensus_spectra::graphs::random::{random_connected, random_strongly_connected, rng};
use consensus_spectra::graphs::{
    bottleneck_measure, diameter, disjoint_path_family, edge_connectivity, geodesic_degree_sum_check,
    geodesic_family, make_family, normalized_diameter, GeodesicStrategy,
};
use consensus_spectra::matrices::{
    equal_neighbor, fixed_weight, gram, lazy_metropolis, metropolis, perron, MatrixDump,
};
use consensus_spectra::sim::{random_x0, simulate};
use consensus_spectra::spectral::{cheeger, mu, reversible_spectrum, second_singular, seminorm};
use consensus_spectra::{
    DirectedGraph, Family, GraphSchedule, PiGeometry, Rule, RuleParams, StochasticMatrix, Tolerances,
};

fn connected() -> impl Strategy<Value = DirectedGraph> {
    (3usize..=10, any::<u64>(), 0.0f64..0.6)
        .prop_map(|(n, seed, p)| random_connected(n, p, &mut rng(seed)))
}

fn strongly_connected() -> impl Strategy<Value = DirectedGraph> {
    (2usize..=9, any::<u64>(), 0.0f64..0.5)
        .prop_map(|(n, seed, p)| random_strongly_connected(n, p, &mut rng(seed)))
}

fn reversible_rule() -> impl Strategy<Value = Rule> {
    prop_oneof![
        Just(Rule::Metropolis),
        Just(Rule::LazyMetropolis),
        Just(Rule::EqualNeighbor),
    ]
}

fn family_case() -> impl Strategy<Value = (Family, usize)> {
    prop_oneof![
        (1usize..=6).prop_map(|m| (Family::Ring, 2 * m + 1)),
        (1usize..=4).prop_map(|p| (Family::Hypercube, p)),
        (3usize..=12).prop_map(|n| (Family::Star, n)),
        (3usize..=6).prop_map(|h| (Family::TwoStar, 2 * h)),
        (2usize..=4).prop_map(|p| (Family::BinaryTree, p)),
        (1usize..=3).prop_map(|h| (Family::Grid, 2 * h)),
        (2usize..=4).prop_map(|p| (Family::Barbell, p)),
        (3usize..=6).prop_map(|m| (Family::Butterfly, m)),
        (2usize..=8).prop_map(|n| (Family::Complete, n)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn family_graphs_are_connected_with_loops((f, s) in family_case()) {
        let g = make_family(f, s).unwrap();
        prop_assert!(g.is_strongly_connected());
        prop_assert!((0..g.n()).all(|i| g.has_edge(i, i)));
        prop_assert_eq!(g.is_bidirectional(), f != Family::Butterfly);
    }

    #[test]
    fn metric_sandwiches(g in connected()) {
        let n = g.n();
        let tau = edge_connectivity(&g).unwrap();
        let nd = normalized_diameter(&g).unwrap();
        prop_assert!(nd.value() <= diameter(&g).unwrap() as f64);
        prop_assert!(nd.value() <= (n - 1) as f64 / tau as f64 + 1e-12);
        let fam = geodesic_family(&g, GeodesicStrategy::CongestionReroute).unwrap();
        let b = bottleneck_measure(&g, &fam).unwrap();
        prop_assert!(b.sandwich_holds());
        prop_assert!(b.congestion <= n * n);
        let ds = geodesic_degree_sum_check(&g).unwrap();
        prop_assert!(ds.max_sum <= ds.limit);
    }

    #[test]
    fn disjoint_families_share_no_arc(g in strongly_connected(), k in 1usize..=3) {
        let k = k.min(edge_connectivity(&g).unwrap());
        let fam = disjoint_path_family(&g, k).unwrap();
        prop_assert!(fam.edge_disjoint);
        fam.validate(&g).unwrap();
        for (_, _, paths) in fam.pairs() {
            prop_assert_eq!(paths.len(), k);
            let mut seen = std::collections::HashSet::new();
            for p in paths {
                for w in p.windows(2) {
                    prop_assert!(seen.insert((w[0], w[1])));
                }
            }
        }
    }

    #[test]
    fn rule_matrices_are_stochastic(g in connected()) {
        let m = metropolis(&g).unwrap();
        prop_assert!(m.max_row_sum_error() <= 1e-12);
        prop_assert_eq!(m.max_asymmetry(), 0.0);
        for a in [lazy_metropolis(&g).unwrap(), equal_neighbor(&g).unwrap()] {
            prop_assert!(a.max_row_sum_error() <= 1e-12);
            let pi = perron(&a).unwrap();
            prop_assert!(a.detailed_balance_residual(&pi) <= 1e-12);
        }
        let d = g.degrees();
        let fw = fixed_weight(&g, &d).unwrap();
        let en = equal_neighbor(&g).unwrap();
        prop_assert_eq!(fw.data(), en.data());
    }

    #[test]
    fn adjoint_and_gram(g in strongly_connected()) {
        let a = equal_neighbor(&g).unwrap();
        let pi = perron(&a).unwrap();
        let adj = a.adjoint(&pi);
        prop_assert!(adj.max_row_sum_error() <= 1e-12);
        let back = adj.adjoint(&pi);
        for (x, y) in a.data().iter().zip(back.data()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        let (h, hpi) = gram(&a).unwrap();
        let s = reversible_spectrum(&h, &hpi).unwrap();
        prop_assert!(s.lambda_n >= -1e-10);
        prop_assert!(s.lambda2 <= analytic_gram_bound(&a, &pi) + 1e-9);
    }

    #[test]
    fn dump_round_trips(g in strongly_connected()) {
        let a = equal_neighbor(&g).unwrap();
        let dump = MatrixDump::new(&a, Some(Rule::EqualNeighbor), None);
        let text = serde_json::to_string(&dump).unwrap();
        let back: MatrixDump = serde_json::from_str(&text).unwrap();
        let m = back.matrix(1e-12).unwrap();
        prop_assert_eq!(m.data(), a.data());
    }

    #[test]
    fn spectrum_is_consistent(g in connected(), rule in reversible_rule(), seed in any::<u64>()) {
        let a = rule.matrix(&g, &RuleParams::default()).unwrap();
        let pi = perron(&a).unwrap();
        let s = reversible_spectrum(&a, &pi).unwrap();
        let trace: f64 = (0..a.n()).map(|i| a.get(i, i)).sum();
        let eig_sum: f64 = s.eigenvalues.iter().sum();
        prop_assert!((trace - eig_sum).abs() <= 1e-10);
        prop_assert!((s.eigenvalues[0] - 1.0).abs() <= 1e-10);
        // random directions never beat the spectral gap
        let geo = PiGeometry::new(&pi);
        let mut r = rng(seed);
        for _ in 0..50 {
            let x = geo.project_out_constants(&random_x0(a.n(), &mut r));
            let q = consensus_spectra::spectral::quadratic_form(&a, &pi, &x);
            prop_assert!(q / geo.inner(&x, &x) >= 1.0 - s.lambda2 - 1e-9);
            prop_assert!(seminorm(&x).unwrap() >= 2f64.sqrt() * geo.norm(&x) - 1e-12);
        }
    }

    #[test]
    fn bounds_are_sound_and_ordered(g in connected(), rule in reversible_rule()) {
        let tol = Tolerances::default();
        let a = rule.matrix(&g, &RuleParams::default()).unwrap();
        let pi = perron(&a).unwrap();
        let l2 = reversible_spectrum(&a, &pi).unwrap().lambda2;
        let geo = SupportGeometry::of(a.support()).unwrap();
        let disjoint = disjoint_path_family(a.support(), geo.normalized.k).unwrap();
        let kb = kappa_bound(&a, &pi, &disjoint, &tol).unwrap();
        let kt = kappa_tilde_bound(&a, &pi, &geo.geodesics, &tol).unwrap();
        let bb = beta_b(&a, &pi, &geo);
        let bds = beta_ds(&a, &pi, &geo);
        for bound in [kb, kt, bb, bds] {
            prop_assert!(l2 <= bound + 1e-9);
        }
        prop_assert!(bb >= kb - 1e-12);
        prop_assert!(bds >= kt - 1e-12);
        let c = cheeger(&a, &pi).unwrap();
        prop_assert!(c.lower <= l2 + 1e-9 && l2 <= c.upper + 1e-9);
        prop_assert!(mu(&a, &pi).unwrap().value <= c.h / 2.0 + 1e-12);
        prop_assert!(alpha(&a, &pi) > 0.0);
    }

    #[test]
    fn gram_bound_on_random_irreducible(g in strongly_connected(), seed in any::<u64>()) {
        use rand::Rng;
        let n = g.n();
        let mut r = rng(seed);
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            w[i * n + i] = r.gen_range(0.05..1.0);
            for &j in g.in_neighbors(i) {
                w[i * n + j] = r.gen_range(0.05..1.0);
            }
            let s: f64 = w[i * n..(i + 1) * n].iter().sum();
            w[i * n..(i + 1) * n].iter_mut().for_each(|v| *v /= s);
        }
        let a = StochasticMatrix::from_dense(n, w, 1e-12).unwrap();
        let pi = perron(&a).unwrap();
        let sigma = second_singular(&a).unwrap();
        prop_assert!(sigma * sigma <= analytic_gram_bound(&a, &pi) + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn trajectories_contract(seed in any::<u64>(), n in 4usize..=10, rule in reversible_rule()) {
        let tol = Tolerances::default();
        let s = GraphSchedule::generated(n, seed, 60, 0.2).unwrap();
        let x0 = random_x0(n, &mut rng(seed ^ 1));
        let t = simulate(&s, rule, &RuleParams::default(), &x0, 60, &tol).unwrap();
        for w in t.snapshots.windows(2) {
            prop_assert!(w[1].n <= w[0].n + 1e-12);
        }
        if rule != Rule::EqualNeighbor {
            prop_assert!(t.pi_constant);
            for w in t.snapshots.windows(2) {
                prop_assert!(w[1].v <= w[0].v + 1e-12);
            }
            let norm = x0.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!(t.conservation_error.unwrap() <= 1e-10 * norm.max(1.0));
        }
    }

    #[test]
    fn rate_bound_dominates_observed_rate(g in connected(), rule in reversible_rule(), seed in any::<u64>()) {
        let tol = Tolerances::default();
        let s = GraphSchedule::constant(g.clone());
        let b = reversible_rate_bound(&s, rule, &RuleParams::default(), &tol).unwrap();
        let x0 = random_x0(g.n(), &mut rng(seed));
        let t = simulate(&s, rule, &RuleParams::default(), &x0, 3000, &tol).unwrap();
        for bound in [b.corollary, b.theorem, b.algorithm] {
            if bound < 1.0 {
                prop_assert!(t.rho_hat() <= bound + 5e-3, "rho {} bound {}", t.rho_hat(), bound);
            }
        }
        let sv = small_variation_rate_bound(&s, rule, &RuleParams::default(), &tol).unwrap();
        prop_assert!((sv.nu - 1.0).abs() <= 1e-12);
        prop_assert!((sv.bound - b.theorem).abs() <= 1e-9);
    }
}
