mod common;

use std::sync::OnceLock;

use num_rational::Ratio;
use proptest::prelude::*;

use cobra::context::Context;
use cobra::dsl::{gen_ccp, gen_mastermind, MastermindVariant};
use cobra::formula::{Valuation, Var};
use cobra::satcore::SatCore;
use cobra::symmetry::{canonical_form, canonical_key, Label, LabeledGraph};
use cobra::synth::{build_optimal_tree, build_ranking_tree, Mode, RankingKind, SynthOptions};
use common::{arb_formula, check_partition, truth_table};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn canonicalization_preserves_semantics(f in arb_formula(5)) {
        let c = f.canonicalize();
        prop_assert_eq!(truth_table(&f, 5), truth_table(&c, 5));
        prop_assert_eq!(c.canonicalize(), c);
    }

    #[test]
    fn model_count_matches_truth_table(f in arb_formula(12)) {
        let want = truth_table(&f, 12).into_iter().filter(|&b| b).count() as u64;
        let core = SatCore::new(12);
        prop_assert_eq!(core.count_models(&f).unwrap().0, want);
        prop_assert_eq!(core.is_satisfiable(&f), want > 0);
    }

    #[test]
    fn fixed_variables_are_those_constant_over_models(f in arb_formula(6)) {
        let models: Vec<Valuation> = Valuation::all(6).filter(|v| f.evaluate(v).unwrap()).collect();
        let fixed = SatCore::new(6).fixed_variables(&f);
        if models.is_empty() {
            prop_assert!(fixed.is_vacuous());
            prop_assert_eq!(fixed.len(), 6);
        } else {
            for x in (0..6).map(Var) {
                let vals: Vec<bool> = models.iter().map(|m| m.get(x).unwrap()).collect();
                let constant = vals.iter().all(|&b| b == vals[0]);
                prop_assert_eq!(fixed.get(x), constant.then_some(vals[0]));
            }
        }
    }
}

fn arb_graph() -> impl Strategy<Value = LabeledGraph> {
    (2usize..12).prop_flat_map(|n| {
        (
            prop::collection::vec(0u32..3, n),
            prop::collection::vec((0..n as u32, 0..n as u32), 0..n * 2),
        )
            .prop_map(|(labels, edges)| {
                let mut g = LabeledGraph::new();
                for l in labels {
                    g.add_vertex(if l == 0 { Label::Var } else { Label::Attr(l) });
                }
                for (u, v) in edges {
                    g.add_edge(u, v);
                }
                g
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_key_ignores_vertex_names(g in arb_graph(), seeds in prop::collection::vec(any::<u64>(), 16)) {
        let key = canonical_key(&g);
        for seed in seeds {
            let mut perm: Vec<u32> = (0..g.len() as u32).collect();
            let mut s = seed;
            for i in (1..perm.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            prop_assert_eq!(&canonical_key(&g.permuted(&perm)), &key);
        }
        for a in canonical_form(&g).automorphisms {
            prop_assert!(g.is_automorphism(&a));
        }
    }
}

struct Case {
    name: &'static str,
    ctx: Context,
    worst: u64,
    avg: Ratio<u64>,
}

fn cases() -> &'static [Case] {
    static CASES: OnceLock<Vec<Case>> = OnceLock::new();
    CASES.get_or_init(|| {
        let games = vec![
            ("ccp:3", gen_ccp(3).unwrap()),
            ("ccp:5", gen_ccp(5).unwrap()),
            ("ccp:6", gen_ccp(6).unwrap()),
            ("mm:2:3", gen_mastermind(2, 3, MastermindVariant::Classic).unwrap()),
            ("mm:3:2", gen_mastermind(3, 2, MastermindVariant::Classic).unwrap()),
            ("mm:2:4:col", gen_mastermind(2, 4, MastermindVariant::Color).unwrap()),
            ("mm:2:4:pos", gen_mastermind(2, 4, MastermindVariant::Position).unwrap()),
        ];
        games
            .into_iter()
            .map(|(name, g)| {
                let ctx = Context::new(g).unwrap();
                let (_, worst) = build_optimal_tree(&ctx, Mode::Worst, SynthOptions::default()).unwrap();
                let (_, total) = build_optimal_tree(&ctx, Mode::Avg, SynthOptions::default()).unwrap();
                let avg = Ratio::new(total, ctx.space().len() as u64);
                Case { name, ctx, worst, avg }
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn ranking_trees_partition_and_are_no_better_than_optimal(
        i in 0..7usize,
        kind in prop::sample::select(RankingKind::ALL.to_vec()),
    ) {
        let case = &cases()[i];
        let ctx = &case.ctx;
        let r = build_ranking_tree(ctx, kind, 20, SynthOptions::default()).unwrap();
        prop_assert_eq!(check_partition(ctx, &r.tree), Ok(()));
        let c = r.tree.complexity(ctx).unwrap();
        prop_assert!(c.worst >= case.worst, "{} {}: {} < {}", case.name, kind, c.worst, case.worst);
        prop_assert!(c.avg >= case.avg, "{} {}: {} < {}", case.name, kind, c.avg, case.avg);
        prop_assert!(c.avg <= Ratio::from_integer(c.worst));

        // per-secret plays aggregate to the same figures
        let lengths: Vec<u64> = ctx
            .space()
            .codes()
            .iter()
            .map(|v| r.tree.simulate(ctx.game(), v).unwrap().len() as u64)
            .collect();
        prop_assert_eq!(lengths.iter().copied().max().unwrap(), c.worst);
        prop_assert_eq!(Ratio::new(lengths.iter().sum::<u64>(), lengths.len() as u64), c.avg);
    }

    #[test]
    fn optimal_trees_partition_and_attain_their_cost(i in 0..7usize, avg in any::<bool>()) {
        let case = &cases()[i];
        let ctx = &case.ctx;
        let mode = if avg { Mode::Avg } else { Mode::Worst };
        let (t, _) = build_optimal_tree(ctx, mode, SynthOptions::default()).unwrap();
        prop_assert_eq!(check_partition(ctx, &t), Ok(()));
        let c = t.complexity(ctx).unwrap();
        if avg {
            prop_assert_eq!(c.avg, case.avg);
        } else {
            prop_assert_eq!(c.worst, case.worst);
        }
    }
}
