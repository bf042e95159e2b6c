//! Experiment equivalence: dominance-pruned generation (phase 1) and
//! merging by isomorphism of experiment graphs (phase 2).

mod base;
pub mod canon;
mod swap;

use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;

pub use base::BaseGraph;
pub use canon::{canonical_form, canonical_key, CanonicalKey, Label, LabeledGraph};
pub use swap::{CodeMap, SwapCache, SwapPermutation};

use crate::context::{Context, Knowledge};
use crate::formula::Formula;
use crate::game::{Atom, ExperimentInstance, InstanceKind, Param, ParameterizedExperiment, Template};
use crate::satcore::Reduced;

/// How knowledge and outcomes are attached to the base graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GraphEncoding {
    /// One `Code` vertex per model, joined to its true variables; each
    /// outcome is an `Out` vertex joined to the models it keeps.
    #[default]
    Models,
    /// Syntax trees of the formulae with fixed variables removed, under
    /// `acc` and `out` roots.
    Syntax,
}

fn attach_models(g: &mut LabeledGraph, ctx: &Context, k: &Knowledge) -> Vec<u32> {
    let space = ctx.space();
    let mut vertex = vec![u32::MAX; space.len()];
    for i in k.models.iter() {
        let cv = g.add_vertex(Label::Code);
        for v in space.code(i).true_vars() {
            g.add_edge(cv, v.0);
        }
        vertex[i] = cv;
    }
    vertex
}

fn attach_syntax(g: &mut LabeledGraph, root: Label, r: &Reduced) {
    let rv = g.add_vertex(root);
    let top = base::attach_tree(g, &r.normalized());
    g.add_edge(rv, top);
}

/// The knowledge graph used as cache key: base graph plus `φ`.
pub fn knowledge_graph(ctx: &Context, k: &Knowledge, enc: GraphEncoding) -> LabeledGraph {
    let mut g = ctx.base().graph().clone();
    match enc {
        GraphEncoding::Models => {
            attach_models(&mut g, ctx, k);
        }
        GraphEncoding::Syntax => {
            let r = ctx.space().reduce(&k.formula, &k.models);
            attach_syntax(&mut g, Label::Acc, &r);
        }
    }
    g
}

/// `B_{φ,e}`.
pub fn experiment_graph(ctx: &Context, k: &Knowledge, e: &ExperimentInstance, enc: GraphEncoding) -> LabeledGraph {
    let mut g = ctx.base().graph().clone();
    let parts = ctx.partition(k, e);
    match enc {
        GraphEncoding::Models => {
            let vertex = attach_models(&mut g, ctx, k);
            let mut empty = false;
            for part in &parts {
                if part.is_empty() {
                    empty = true;
                    continue;
                }
                let ov = g.add_vertex(Label::Out);
                for i in part.iter() {
                    g.add_edge(ov, vertex[i]);
                }
            }
            if empty {
                g.add_vertex(Label::Empty);
            }
        }
        GraphEncoding::Syntax => {
            let space = ctx.space();
            attach_syntax(&mut g, Label::Acc, &space.reduce(&k.formula, &k.models));
            for (xi, part) in ctx.game().outcomes(e).iter().zip(&parts) {
                attach_syntax(&mut g, Label::Out, &space.reduce(xi, part));
            }
        }
    }
    g
}

pub fn knowledge_key(ctx: &Context, k: &Knowledge, enc: GraphEncoding) -> CanonicalKey {
    canonical_key(&knowledge_graph(ctx, k, enc))
}

pub fn experiment_key(ctx: &Context, k: &Knowledge, e: &ExperimentInstance, enc: GraphEncoding) -> CanonicalKey {
    canonical_key(&experiment_graph(ctx, k, e, enc))
}

/// Sufficient test for `e1 ∼φ e2`; `false` does not certify inequivalence.
pub fn are_equivalent(
    ctx: &Context,
    k: &Knowledge,
    e1: &ExperimentInstance,
    e2: &ExperimentInstance,
    enc: GraphEncoding,
) -> bool {
    e1 == e2 || experiment_key(ctx, k, e1, enc) == experiment_key(ctx, k, e2, enc)
}

fn swap_preserves(ctx: &Context, k: &Knowledge, a: Param, b: Param, attrs: BTreeSet<crate::game::AttrId>) -> bool {
    let pi = SwapPermutation { a, b, attrs };
    match ctx.swaps().get(ctx.game(), ctx.space(), &pi) {
        Some(map) => map.preserves(&k.models),
        None => false,
    }
}

/// Whether `b` is dominated by `a` at position `|u|` of experiment `t`.
///
/// Two sufficient rules, each requiring a swap `π̂` that lifts to a game
/// symmetry and maps the models of `φ` onto themselves:
/// * for faithful `t`, the swap of `F_m` (and `F_m ∪ F_j` for every
///   compatible later position `j` that may hold `a`);
/// * for any `t`, when neither `a` nor `b` occurs in `u`, the swap of all
///   attributes, which maps `u b v` to `u a v[a↔b]`.
///
/// Expects `u a` to be feasible.
pub fn is_dominated(ctx: &Context, k: &Knowledge, t: usize, u: &[Param], a: Param, b: Param) -> bool {
    let game = ctx.game();
    let exp = game.experiment(t);
    let mut ub = u.to_vec();
    ub.push(b);
    if !exp.feasible_prefix(&ub, game.num_params()) {
        return true;
    }
    if a == b {
        return true;
    }
    let m = u.len();
    if !u.contains(&a) && !u.contains(&b) {
        let all: BTreeSet<_> = (0..game.attributes().len() as u32).map(crate::game::AttrId).collect();
        if swap_preserves(ctx, k, a, b, all) {
            return true;
        }
    }
    if ctx.is_faithful(t) {
        let fm = exp.position_attrs(m).clone();
        if !swap_preserves(ctx, k, a, b, fm.clone()) {
            return false;
        }
        for j in m + 1..exp.arity {
            if exp.compatible(m, j) {
                let f: BTreeSet<_> = fm.union(exp.position_attrs(j)).copied().collect();
                if !swap_preserves(ctx, k, a, b, f) {
                    return false;
                }
            }
        }
        return true;
    }
    false
}

/// Position pairs `i < j` of `t` whose transposition maps the outcome
/// template set onto itself; such instances coincide up to outcome order.
pub fn interchangeable_positions(t: &ParameterizedExperiment) -> Vec<(usize, usize)> {
    let original: BTreeSet<Template> = t.outcomes.iter().map(|o| o.template.canonicalize()).collect();
    let mut out = Vec::new();
    for i in 0..t.arity {
        for j in i + 1..t.arity {
            let image: BTreeSet<Template> = t
                .outcomes
                .iter()
                .map(|o| {
                    o.template.substitute(&|a: &Atom| {
                        Formula::Atom(match *a {
                            Atom::Attr { attr, pos } if pos == i => Atom::Attr { attr, pos: j },
                            Atom::Attr { attr, pos } if pos == j => Atom::Attr { attr, pos: i },
                            other => other,
                        })
                    })
                })
                .collect();
            if image == original {
                out.push((i, j));
            }
        }
    }
    out
}

/// `S¹_φ`: lexicographic generation skipping dominated parameters.
pub fn phase1(ctx: &Context, k: &Knowledge) -> Vec<ExperimentInstance> {
    let game = ctx.game();
    let s = game.num_params();
    let mut out = Vec::new();
    for t in 0..game.experiments().len() {
        let exp = game.experiment(t);
        if !exp.feasible_prefix(&[], s) {
            continue;
        }
        let mut gen = Phase1 {
            ctx,
            k,
            t,
            s,
            memo: HashMap::new(),
            out: &mut out,
        };
        gen.rec(&mut Vec::with_capacity(exp.arity));
    }
    out
}

struct Phase1<'a> {
    ctx: &'a Context,
    k: &'a Knowledge,
    t: usize,
    s: usize,
    // past feasibility, `is_dominated` depends on `u` only through `|u|`
    // and whether `a` or `b` occur in it
    memo: HashMap<(usize, Param, Param, bool), bool>,
    out: &'a mut Vec<ExperimentInstance>,
}

impl Phase1<'_> {
    fn dominated(&mut self, u: &[Param], a: Param, b: Param) -> bool {
        let key = (u.len(), a, b, u.contains(&a) || u.contains(&b));
        if let Some(&d) = self.memo.get(&key) {
            return d;
        }
        let d = is_dominated(self.ctx, self.k, self.t, u, a, b);
        self.memo.insert(key, d);
        d
    }

    fn rec(&mut self, prefix: &mut Vec<Param>) {
        let exp = self.ctx.game().experiment(self.t);
        if prefix.len() == exp.arity {
            self.out.push(ExperimentInstance {
                experiment: self.t,
                params: prefix.clone(),
            });
            return;
        }
        let mut last: Option<Param> = None;
        for b in (0..self.s as u32).map(Param) {
            // only ascending values over interchangeable positions
            let m = prefix.len();
            if self
                .ctx
                .interchangeable(self.t)
                .iter()
                .any(|&(i, j)| j == m && (prefix[i] > b || (prefix[i] == b && exp.kind == InstanceKind::Distinct)))
            {
                continue;
            }
            prefix.push(b);
            let feasible = exp.feasible_prefix(prefix, self.s);
            prefix.pop();
            if !feasible {
                continue;
            }
            if let Some(a) = last {
                if self.dominated(prefix, a, b) {
                    continue;
                }
            }
            prefix.push(b);
            self.rec(prefix);
            prefix.pop();
            last = Some(b);
        }
    }
}

/// Keeps the `⪯`-least member of each group of instances with isomorphic
/// experiment graphs.
pub fn phase2(ctx: &Context, k: &Knowledge, s1: &[ExperimentInstance], enc: GraphEncoding) -> Vec<ExperimentInstance> {
    let mut sorted = s1.to_vec();
    sorted.sort();
    sorted.dedup();
    let keys: Vec<CanonicalKey> = sorted.par_iter().map(|e| experiment_key(ctx, k, e, enc)).collect();
    let mut seen = HashSet::new();
    sorted
        .into_iter()
        .zip(keys)
        .filter(|(_, key)| seen.insert(key.clone()))
        .map(|(e, _)| e)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub phase1: Vec<ExperimentInstance>,
    pub phase2: Vec<ExperimentInstance>,
}

/// `Experiments(φ)`: both phases, result ordered by `⪯`.
pub fn experiments_for(ctx: &Context, k: &Knowledge, enc: GraphEncoding) -> Reduction {
    let p1 = phase1(ctx, k);
    let p2 = phase2(ctx, k, &p1, enc);
    Reduction { phase1: p1, phase2: p2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::gen_ccp;
    use crate::formula::{Formula, Var};

    fn restrict(ctx: &Context, extra: Formula<Var>) -> Knowledge {
        let formula = Formula::and([ctx.game().constraint().clone(), extra]);
        let models = ctx.space().models(&formula);
        Knowledge { formula, models }
    }

    #[test]
    fn symmetric_coins_dominate() {
        let ctx = Context::new(gen_ccp(4).unwrap()).unwrap();
        let k = ctx.initial();
        assert!(is_dominated(&ctx, &k, 0, &[], Param(0), Param(1)));
        assert_eq!(phase1(&ctx, &k).iter().filter(|e| e.experiment == 0).count(), 1);
    }

    #[test]
    fn known_genuine_coins_only_dominate_each_other() {
        let ctx = Context::new(gen_ccp(4).unwrap()).unwrap();
        let k = restrict(&ctx, Formula::not(Formula::or([Formula::var(0), Formula::var(1)])));
        assert!(is_dominated(&ctx, &k, 0, &[], Param(0), Param(1)));
        assert!(!is_dominated(&ctx, &k, 0, &[], Param(0), Param(2)));
    }

    #[test]
    fn repeated_parameter_is_dominated() {
        let ctx = Context::new(gen_ccp(4).unwrap()).unwrap();
        let k = restrict(&ctx, Formula::var(2));
        assert!(is_dominated(&ctx, &k, 0, &[Param(0)], Param(1), Param(0)));
    }

    #[test]
    fn pan_positions_are_interchangeable() {
        let g = gen_ccp(4).unwrap();
        // swapping pans exchanges "<" and ">"
        assert_eq!(interchangeable_positions(g.experiment(0)), vec![(0, 1)]);
        assert_eq!(interchangeable_positions(g.experiment(1)), vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn first_round_representatives_for_four_coins() {
        let ctx = Context::new(gen_ccp(4).unwrap()).unwrap();
        for enc in [GraphEncoding::Models, GraphEncoding::Syntax] {
            let r = experiments_for(&ctx, &ctx.initial(), enc);
            let names: Vec<String> = r.phase2.iter().map(|e| ctx.game().instance_name(e)).collect();
            assert_eq!(names, ["t1(coin1,coin2)", "t2(coin1,coin2,coin3,coin4)"]);
        }
    }
}
