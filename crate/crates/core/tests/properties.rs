use liftlab::gadget::{compose, make_gadget, tuple_power, verify_rank_lemma, GadgetSpec, RankField};
use liftlab::lifting::{
    bs_reduction, extract_rectangle_from_cover, synthesize_protocol, ExtractionTrace, SynthesisOptions,
};
use liftlab::protocol::{random_tree, verify_protocol};
use liftlab::rectcover::{
    biased_color, biased_rectangle, cover_number, density_bound_holds, enumerate_maximal_mono_rectangles, CoverMode,
};
use liftlab::suite::{run_suite, SuiteConfig, SuiteName};
use liftlab::{Budget, CheckStatus, GadgetMatrix, Rational, TruthTable};
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn budget() -> Budget {
    Budget { nodes: 200_000, ..Budget::default() }
}

fn gadget() -> impl Strategy<Value = GadgetMatrix> {
    (any::<u64>(), 2usize..=3, 2usize..=3, prop_oneof![Just(0.5), Just(0.9)]).prop_filter_map(
        "constant gadget",
        |(seed, rows, cols, bias)| {
            let g = make_gadget(&GadgetSpec::Random { seed, rows, cols, bias }, &budget()).ok()?;
            (g.colors().len() == 2).then_some(g)
        },
    )
}

fn function(max_arity: usize) -> impl Strategy<Value = TruthTable> {
    (1..=max_arity).prop_flat_map(|n| (0..1u64 << (1 << n)).prop_map(move |k| TruthTable::from_index(n, k)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn distinct_rows_bounded_by_rank(g in gadget(), f in function(2)) {
        let m = compose(&f, &g, &budget()).unwrap();
        let rk = m.rank_q().unwrap();
        prop_assert!(m.distinct_rows() <= 1 << rk);
        prop_assert!(rk <= m.rows().min(m.cols()));
        prop_assert!(m.rank_f2().unwrap() <= m.rows().min(m.cols()));
    }

    #[test]
    fn compose_agrees_with_tuple_power(g in gadget(), f in function(2)) {
        let m = compose(&f, &g, &budget()).unwrap();
        let t = tuple_power(&g, f.arity(), &budget()).unwrap();
        let applied = t.map_symbols(2, |z| u32::from(f.eval(z as usize)));
        prop_assert_eq!(m.entries(), applied.entries());
        let id = compose(&TruthTable::dictator(1, 0), &g, &budget()).unwrap();
        prop_assert_eq!(id.entries(), g.entries());
    }

    #[test]
    fn rank_lemma_on_random_gadgets(g in gadget(), f in function(2)) {
        let r = verify_rank_lemma(&f, &g, &budget()).unwrap();
        prop_assert_ne!(r.status, CheckStatus::Fail);
    }

    #[test]
    fn cover_bounds(g in gadget(), f in function(2)) {
        let m = compose(&f, &g, &budget()).unwrap();
        let exact = cover_number(&m, CoverMode::Exact, &budget()).unwrap();
        prop_assume!(exact.exact);
        let greedy = cover_number(&m, CoverMode::Greedy, &budget()).unwrap();
        prop_assert!(exact.cover.validate(&m).is_ok());
        prop_assert!(greedy.cover.validate(&m).is_ok());
        prop_assert!(greedy.size >= exact.size);
        prop_assert!(exact.size >= m.colors().len());
        prop_assert!(exact.size <= enumerate_maximal_mono_rectangles(&m).len());
        prop_assert!(exact.cover.rectangles.iter().all(|r| r.is_monochromatic_in(&m)));
    }

    #[test]
    fn biased_rectangles_are_dense(g in gadget()) {
        let rk = g.rank_q().unwrap().max(1);
        prop_assume!(biased_color(&g, rk).unwrap().is_some());
        let r = biased_rectangle(&g).unwrap();
        prop_assert!(r.is_monochromatic_in(&g));
        prop_assert!(r.density() >= Rational::new(BigInt::from(1), BigInt::from(4)));
        prop_assert!(density_bound_holds(&r.density(), 1, 1, rk).unwrap());
    }

    #[test]
    fn extractor_meets_the_density_bound(g in gadget(), f in function(2)) {
        prop_assume!(f.sensitivity() >= 1);
        let m = compose(&f, &g, &budget()).unwrap();
        let c = cover_number(&m, CoverMode::Exact, &budget()).unwrap();
        prop_assume!(c.exact);
        let (rect, trace) = extract_rectangle_from_cover(&f, &g, &c.cover, &budget()).unwrap();
        prop_assert!(rect.is_monochromatic_in(&g));
        let rk = g.rank_q().unwrap().max(1);
        prop_assert!(density_bound_holds(&rect.density(), c.size as u64, f.sensitivity(), rk).unwrap());
        prop_assert!(trace.bound_holds);
        let text = trace.to_text();
        prop_assert_eq!(ExtractionTrace::parse(&text).unwrap().to_text(), text);
    }

    #[test]
    fn synthesized_protocols_compute_g(g in gadget(), f in function(2), gf2 in any::<bool>()) {
        prop_assume!(f.sensitivity() >= 1);
        let m = compose(&f, &g, &budget()).unwrap();
        let c = cover_number(&m, CoverMode::Exact, &budget()).unwrap();
        prop_assume!(c.exact);
        let field = if gf2 { RankField::Gf2 } else { RankField::Rational };
        let opts = SynthesisOptions { field, finish_rank: 3, budget: budget() };
        let r = synthesize_protocol(&f, &g, &c.cover, &opts).unwrap();
        prop_assert!(verify_protocol(&r.tree, &g));
        prop_assert!(verify_protocol(&r.rebalanced, &g));
        prop_assert!(r.stats.all_steps_ok());
    }

    #[test]
    fn bs_reduction_preserves_block_sensitivity(f in function(4)) {
        let g = make_gadget(&GadgetSpec::Xor1, &budget()).unwrap();
        let red = bs_reduction(&f, &g).unwrap();
        prop_assert_eq!(red.b, f.block_sensitivity().value);
        prop_assert!(red.verify(&f, &g, &budget()).unwrap().pass());
    }

    #[test]
    fn tree_depth_at_least_log_leaves(seed in any::<u64>(), leaves in 1usize..=40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t, m) = random_tree(&mut rng, 8, 8, leaves).unwrap();
        prop_assert!(1usize << t.depth() >= t.leaf_count());
        prop_assert!(verify_protocol(&t, &m));
    }
}

#[test]
fn reports_are_deterministic() {
    let cfg = SuiteConfig { seed: 11, workers: 2, ..SuiteConfig::default() };
    for suite in [SuiteName::Rebalance, SuiteName::BsReduction, SuiteName::Info] {
        let mut a = run_suite(suite, &cfg).unwrap();
        let mut b = run_suite(suite, &SuiteConfig { workers: 1, ..cfg }).unwrap();
        a.wall_ms = 0;
        b.wall_ms = 0;
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
