//! Strategy synthesis: ranking strategies, optimal search and evaluation.

mod optimal;
mod rank;
mod tree;

use std::collections::HashSet;

use rayon::prelude::*;
use thiserror::Error;

pub use optimal::{avg_lower_bound, build_optimal_tree, worst_lower_bound, Mode, OptimalSolver, SearchStats};
pub use rank::{rank, Rank, RankingKind};
pub use tree::{format_decimal, ComplexityReport, DecisionTree, Node, NodeId};

use crate::context::{Context, Knowledge};
use crate::game::ExperimentInstance;
use crate::satcore::CodeSet;
use crate::symmetry::{self, GraphEncoding};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("strategy does not terminate within depth {0}")]
    DepthExceeded(usize),
    #[error("{0} is undefined when every update is unsatisfiable")]
    UndefinedRank(RankingKind),
    #[error("no sequence of experiments identifies the secret code")]
    Unsolvable,
    #[error("malformed decision tree: {0}")]
    MalformedTree(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthOptions {
    pub encoding: GraphEncoding,
    /// Merge isomorphic experiments; off leaves only dominance pruning.
    pub phase2: bool,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            encoding: GraphEncoding::Models,
            phase2: true,
        }
    }
}

/// `S¹` and `S` sizes observed at one tree node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeReduction {
    pub depth: usize,
    pub phase1: usize,
    pub phase2: usize,
}

/// Per-round averages of `|S¹_φ|` and `|S_φ|` over the internal nodes at
/// each depth; round 1 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundStats {
    pub round: usize,
    pub nodes: usize,
    pub phase1_avg: f64,
    pub phase2_avg: f64,
}

pub fn round_stats(samples: &[NodeReduction]) -> Vec<RoundStats> {
    let depth = samples.iter().map(|s| s.depth + 1).max().unwrap_or(0);
    (0..depth)
        .filter_map(|d| {
            let at: Vec<_> = samples.iter().filter(|s| s.depth == d).collect();
            (!at.is_empty()).then(|| RoundStats {
                round: d + 1,
                nodes: at.len(),
                phase1_avg: at.iter().map(|s| s.phase1 as f64).sum::<f64>() / at.len() as f64,
                phase2_avg: at.iter().map(|s| s.phase2 as f64).sum::<f64>() / at.len() as f64,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RankingResult {
    pub tree: DecisionTree,
    pub reductions: Vec<NodeReduction>,
    /// Nodes whose chosen experiment did not shrink the model set.
    pub uninformative: usize,
}

/// Candidate experiments at `k`: representatives in `⪯` order.
pub fn candidates(ctx: &Context, k: &Knowledge, opts: SynthOptions) -> symmetry::Reduction {
    let p1 = symmetry::phase1(ctx, k);
    let p2 = if opts.phase2 {
        symmetry::phase2(ctx, k, &p1, opts.encoding)
    } else {
        p1.clone()
    };
    symmetry::Reduction { phase1: p1, phase2: p2 }
}

/// Drops experiments that do not split `k` and those whose nonempty parts
/// coincide with an earlier one's; each kept entry carries its parts.
pub(crate) fn informative(
    ctx: &Context,
    k: &Knowledge,
    exps: Vec<ExperimentInstance>,
) -> Vec<(ExperimentInstance, Vec<CodeSet>)> {
    let mut seen: HashSet<Vec<CodeSet>> = HashSet::new();
    let mut out = Vec::new();
    for e in exps {
        let mut parts: Vec<CodeSet> = ctx.partition(k, &e).into_iter().filter(|p| !p.is_empty()).collect();
        if parts.len() < 2 {
            continue;
        }
        parts.sort();
        if seen.insert(parts.clone()) {
            out.push((e, parts));
        }
    }
    out
}

enum Expansion {
    Leaf(crate::formula::Valuation),
    Split {
        experiment: ExperimentInstance,
        reduction: NodeReduction,
        children: Vec<(usize, Knowledge)>,
        informative: bool,
    },
}

fn select(
    ctx: &Context,
    k: &Knowledge,
    kind: RankingKind,
    depth: usize,
    opts: SynthOptions,
) -> Result<Expansion, SynthError> {
    if let Some(v) = ctx.solution(k) {
        return Ok(Expansion::Leaf(v.clone()));
    }
    let red = candidates(ctx, k, opts);
    let ranks: Vec<Result<Rank, SynthError>> = red
        .phase2
        .par_iter()
        .map(|e| rank(ctx, kind, &ctx.partition(k, e)))
        .collect();
    let mut best: Option<(usize, Rank)> = None;
    for (i, r) in ranks.into_iter().enumerate() {
        let r = r?;
        if best.as_ref().is_none_or(|(_, b)| r < *b) {
            best = Some((i, r));
        }
    }
    let (i, _) = best.ok_or(SynthError::Unsolvable)?;
    let experiment = red.phase2[i].clone();
    let children: Vec<(usize, Knowledge)> = ctx
        .updates(k, &experiment)
        .into_iter()
        .enumerate()
        .filter(|(_, u)| u.is_satisfiable())
        .collect();
    let informative = children.len() > 1;
    Ok(Expansion::Split {
        experiment,
        reduction: NodeReduction {
            depth,
            phase1: red.phase1.len(),
            phase2: red.phase2.len(),
        },
        children,
        informative,
    })
}

/// The experiment the ranking strategy plays at `k`, or `None` once the
/// secret is known.
pub fn next_experiment(
    ctx: &Context,
    k: &Knowledge,
    kind: RankingKind,
    opts: SynthOptions,
) -> Result<Option<ExperimentInstance>, SynthError> {
    Ok(match select(ctx, k, kind, 0, opts)? {
        Expansion::Leaf(_) => None,
        Expansion::Split { experiment, .. } => Some(experiment),
    })
}

/// `Tree_{τ[r,⪯]}`, built breadth-first; nodes of one depth are expanded
/// in parallel.
pub fn build_ranking_tree(
    ctx: &Context,
    kind: RankingKind,
    max_depth: usize,
    opts: SynthOptions,
) -> Result<RankingResult, SynthError> {
    expand_levels(ctx, kind, max_depth, None, opts)
}

/// Reductions at the nodes of the first `rounds` levels of the ranking
/// tree, without building the rest.
pub fn ranking_reductions(
    ctx: &Context,
    kind: RankingKind,
    rounds: usize,
    opts: SynthOptions,
) -> Result<Vec<NodeReduction>, SynthError> {
    Ok(expand_levels(ctx, kind, usize::MAX, Some(rounds), opts)?.reductions)
}

fn expand_levels(
    ctx: &Context,
    kind: RankingKind,
    max_depth: usize,
    rounds: Option<usize>,
    opts: SynthOptions,
) -> Result<RankingResult, SynthError> {
    let mut nodes: Vec<tree::Node> = Vec::new();
    let mut reductions = Vec::new();
    let mut uninformative = 0;
    // (knowledge, parent id and outcome)
    let mut frontier: Vec<(Knowledge, Option<(NodeId, usize)>)> = vec![(ctx.initial(), None)];
    let mut depth = 0;
    while !frontier.is_empty() && rounds.is_none_or(|r| depth < r) {
        let expanded: Vec<Result<Expansion, SynthError>> = frontier
            .par_iter()
            .map(|(k, _)| {
                if depth >= max_depth && k.count() > 1 {
                    return Err(SynthError::DepthExceeded(max_depth));
                }
                select(ctx, k, kind, depth, opts)
            })
            .collect();
        let mut next = Vec::new();
        for ((_, parent), x) in frontier.into_iter().zip(expanded) {
            let id = nodes.len();
            if let Some((p, o)) = parent {
                if let tree::Node::Internal { children, .. } = &mut nodes[p] {
                    children.push((o, id));
                }
            }
            match x? {
                Expansion::Leaf(valuation) => nodes.push(tree::Node::Leaf { valuation }),
                Expansion::Split {
                    experiment,
                    reduction,
                    children,
                    informative,
                } => {
                    nodes.push(tree::Node::Internal {
                        experiment,
                        children: Vec::new(),
                    });
                    reductions.push(reduction);
                    if !informative {
                        uninformative += 1;
                    }
                    next.extend(children.into_iter().map(|(o, k)| (k, Some((id, o)))));
                }
            }
        }
        frontier = next;
        depth += 1;
    }
    Ok(RankingResult {
        tree: DecisionTree::from_nodes(nodes, 0),
        reductions,
        uninformative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{gen_ccp, parse};
    use crate::formula::{Valuation, Var};
    use crate::game::Param;
    use num_rational::Ratio;

    fn ccp4() -> Context {
        Context::new(gen_ccp(4).unwrap()).unwrap()
    }

    fn inst(t: usize, ps: &[u32]) -> ExperimentInstance {
        ExperimentInstance {
            experiment: t,
            params: ps.iter().map(|&p| Param(p - 1)).collect(),
        }
    }

    /// coin `i` (1-based) counterfeit, heavier iff `heavy`
    fn code(i: usize, heavy: bool) -> Valuation {
        let mut v = vec![false; 5];
        v[i - 1] = true;
        v[4] = heavy;
        Valuation::new(v)
    }

    // pan balance by hand: left minus right weight of the odd coin
    fn weigh(left: &[usize], right: &[usize], secret: (usize, bool)) -> usize {
        let w = if secret.1 { 1 } else { -1 };
        let d = if left.contains(&secret.0) {
            w
        } else if right.contains(&secret.0) {
            -w
        } else {
            0
        };
        // outcome order is "<", "=", ">"
        (d + 1) as usize
    }

    #[test]
    fn update_counts_follow_the_balance() {
        let ctx = ccp4();
        let k = ctx.initial();
        for (e, left, right) in [
            (inst(0, &[1, 2]), vec![1], vec![2]),
            (inst(1, &[1, 2, 3, 4]), vec![1, 2], vec![3, 4]),
        ] {
            let mut want = [0u64; 3];
            for i in 1..=4 {
                for h in [false, true] {
                    want[weigh(&left, &right, (i, h))] += 1;
                }
            }
            let got: Vec<u64> = ctx.updates(&k, &e).iter().map(|u| u.count()).collect();
            assert_eq!(got, want.to_vec());
        }
        let counts = |e| ctx.updates(&k, &e).iter().map(|u| u.count()).collect::<Vec<_>>();
        assert_eq!(counts(inst(0, &[1, 2])), vec![2, 4, 2]);
        assert_eq!(counts(inst(1, &[1, 2, 3, 4])), vec![4, 0, 4]);
    }

    #[test]
    fn ranking_values_on_two_weighings() {
        let ctx = ccp4();
        let k = ctx.initial();
        let r = |kind, e| rank(&ctx, kind, &ctx.partition(&k, &e)).unwrap();
        let int = |n: i128| Rank::Exact(Ratio::from_integer(n));
        let e1 = inst(0, &[1, 2]);
        let e2 = inst(1, &[1, 2, 3, 4]);
        assert_eq!(r(RankingKind::MaxModels, e1.clone()), int(4));
        assert_eq!(r(RankingKind::MaxModels, e2.clone()), int(4));
        assert_eq!(r(RankingKind::ExpModels, e1.clone()), int(3));
        assert_eq!(r(RankingKind::ExpModels, e2.clone()), int(4));
        assert_eq!(r(RankingKind::Parts, e1.clone()), int(-3));
        assert_eq!(r(RankingKind::Parts, e2.clone()), int(-2));
        assert_eq!(r(RankingKind::MinFixed, e1.clone()), int(-2));
        let ent = r(RankingKind::EntModels, e1).to_f64();
        let want = 2.0 * 0.25 * 0.25f64.ln() + 0.5 * 0.5f64.ln();
        assert!((ent - want).abs() < 1e-12);
    }

    #[test]
    fn model_weighted_ranks_reject_empty_updates() {
        let ctx = ccp4();
        let empty = vec![CodeSet::empty(ctx.space().len()); 3];
        for kind in [RankingKind::ExpModels, RankingKind::EntModels, RankingKind::ExpFixed] {
            assert_eq!(rank(&ctx, kind, &empty), Err(SynthError::UndefinedRank(kind)));
        }
        assert!(rank(&ctx, RankingKind::MaxModels, &empty).is_ok());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in RankingKind::ALL {
            assert_eq!(k.name().parse::<RankingKind>(), Ok(k));
        }
        assert!("entropy".parse::<RankingKind>().is_err());
    }

    /// The hand-drawn strategy for four coins.
    fn figure_tree() -> DecisionTree {
        use Node::*;
        let leaf = |i, h| Leaf { valuation: code(i, h) };
        let nodes = vec![
            Internal {
                experiment: inst(0, &[1, 2]),
                children: vec![(0, 1), (1, 2), (2, 3)],
            },
            Internal {
                experiment: inst(0, &[1, 3]),
                children: vec![(0, 4), (1, 5)],
            },
            Internal {
                experiment: inst(0, &[1, 3]),
                children: vec![(0, 6), (1, 7), (2, 8)],
            },
            Internal {
                experiment: inst(0, &[2, 4]),
                children: vec![(0, 9), (1, 10)],
            },
            leaf(1, false),
            leaf(2, true),
            leaf(3, true),
            Internal {
                experiment: inst(0, &[1, 4]),
                children: vec![(0, 11), (2, 12)],
            },
            leaf(3, false),
            leaf(2, false),
            leaf(1, true),
            leaf(4, true),
            leaf(4, false),
        ];
        DecisionTree::from_nodes(nodes, 0)
    }

    #[test]
    fn figure_tree_complexity() {
        let ctx = ccp4();
        let r = figure_tree().complexity(&ctx).unwrap();
        assert_eq!(r.worst, 3);
        assert_eq!(r.avg, Ratio::new(18, 8));
    }

    #[test]
    fn figure_tree_plays() {
        let ctx = ccp4();
        let g = ctx.game();
        let t = figure_tree();
        let path = t.simulate(g, &code(4, true)).unwrap();
        let exps: Vec<_> = path.iter().map(|e| e.instance.clone()).collect();
        assert_eq!(exps, vec![inst(0, &[1, 2]), inst(0, &[1, 3]), inst(0, &[1, 4])]);
        assert_eq!(t.simulate(g, &code(1, false)).unwrap().len(), 2);
    }

    #[test]
    fn missing_branch_is_malformed() {
        let ctx = ccp4();
        let mut nodes = figure_tree().nodes().to_vec();
        if let Node::Internal { children, .. } = &mut nodes[7] {
            children.pop();
        }
        let t = DecisionTree::from_nodes(nodes, 0);
        assert!(matches!(
            t.simulate(ctx.game(), &code(4, false)),
            Err(SynthError::MalformedTree(_))
        ));
        assert!(matches!(t.complexity(&ctx), Err(SynthError::MalformedTree(_))));
    }

    #[test]
    fn ranking_tree_for_four_coins() {
        let ctx = ccp4();
        for kind in RankingKind::ALL {
            let r = build_ranking_tree(&ctx, kind, 10, SynthOptions::default()).unwrap();
            let c = r.tree.complexity(&ctx).unwrap();
            assert_eq!(c.worst, 3, "{kind}");
            assert_eq!(r.uninformative, 0);
        }
    }

    #[test]
    fn depth_cap_is_reported() {
        let ctx = ccp4();
        assert_eq!(
            build_ranking_tree(&ctx, RankingKind::MaxModels, 2, SynthOptions::default()).unwrap_err(),
            SynthError::DepthExceeded(2)
        );
    }

    #[test]
    fn solved_game_is_a_single_leaf() {
        let g = parse(
            "VARS a b\nCONSTRAINT a & !b\nPARAMS p\nATTR f { p -> a }\nEXPERIMENT t(1) INSTANCES all\n  OUTCOME f($1)\n  OUTCOME !f($1)\n",
        )
        .unwrap();
        let ctx = Context::new(g).unwrap();
        let r = build_ranking_tree(&ctx, RankingKind::Parts, 5, SynthOptions::default()).unwrap();
        assert_eq!(r.tree.len(), 1);
        let c = r.tree.complexity(&ctx).unwrap();
        assert_eq!((c.worst, c.avg), (0, Ratio::from_integer(0)));
        let (t, cost) = build_optimal_tree(&ctx, Mode::Avg, SynthOptions::default()).unwrap();
        assert_eq!((t.len(), cost), (1, 0));
        assert!(matches!(t.node(0), Node::Leaf { valuation } if valuation.get(Var(0)) == Some(true)));
    }

    #[test]
    fn optimal_four_coins() {
        let ctx = ccp4();
        let (t, cost) = build_optimal_tree(&ctx, Mode::Worst, SynthOptions::default()).unwrap();
        assert_eq!(cost, 3);
        assert_eq!(t.complexity(&ctx).unwrap().worst, 3);
        let (t, cost) = build_optimal_tree(&ctx, Mode::Avg, SynthOptions::default()).unwrap();
        assert_eq!(t.complexity(&ctx).unwrap().avg, Ratio::new(cost, 8));
        assert_eq!(cost, 18);
    }

    #[test]
    fn exports_name_experiments_and_outcomes() {
        let ctx = ccp4();
        let t = figure_tree();
        let dot = t.to_dot(ctx.game());
        assert!(dot.contains("t1(coin1,coin2)"));
        assert!(dot.contains("label=\"=\""));
        let json: serde_json::Value = serde_json::from_str(&t.to_json(ctx.game())).unwrap();
        let nodes = json["nodes"].as_array().unwrap();
        assert_eq!(nodes.len(), 13);
        assert_eq!(nodes[0]["kind"], "experiment");
        assert_eq!(nodes[0]["params"], serde_json::json!(["coin1", "coin2"]));
        assert_eq!(nodes[0]["children"]["="], 2);
        assert_eq!(nodes[4]["valuation"], serde_json::json!(["x1"]));
    }

    #[test]
    fn round_stats_average_per_depth() {
        let s = [
            NodeReduction {
                depth: 0,
                phase1: 4,
                phase2: 2,
            },
            NodeReduction {
                depth: 1,
                phase1: 3,
                phase2: 1,
            },
            NodeReduction {
                depth: 1,
                phase1: 5,
                phase2: 2,
            },
        ];
        let r = round_stats(&s);
        assert_eq!(r.len(), 2);
        assert_eq!((r[1].round, r[1].nodes), (2, 2));
        assert_eq!((r[1].phase1_avg, r[1].phase2_avg), (4.0, 1.5));
    }
}
