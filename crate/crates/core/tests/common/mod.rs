#![allow(dead_code)]

use proptest::prelude::*;

use cobra::context::Context;
use cobra::formula::{Formula, Valuation, Var};
use cobra::satcore::CodeSet;
use cobra::synth::{DecisionTree, Node};

pub fn arb_formula(nvars: u32) -> impl Strategy<Value = Formula<Var>> {
    let leaf = (0..nvars).prop_map(Formula::var);
    leaf.prop_recursive(4, 24, 4, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            prop::collection::vec(inner.clone(), 0..4).prop_map(Formula::and),
            prop::collection::vec(inner.clone(), 0..4).prop_map(Formula::or),
            (0usize..3, prop::collection::vec(inner, 0..4)).prop_map(|(k, cs)| Formula::exactly(k, cs)),
        ]
    })
}

pub fn truth_table(f: &Formula<Var>, n: usize) -> Vec<bool> {
    Valuation::all(n).map(|v| f.evaluate(&v).unwrap()).collect()
}

/// Walks the tree with the model set of each node, checking that children
/// match the satisfiable outcomes exactly and leaves hold the last model.
pub fn check_partition(ctx: &Context, t: &DecisionTree) -> Result<(), String> {
    let mut stack = vec![(t.root(), ctx.space().all())];
    while let Some((id, models)) = stack.pop() {
        match t.node(id) {
            Node::Leaf { valuation } => {
                if models.count() != 1 || ctx.space().code(models.first().unwrap()) != valuation {
                    return Err(format!("leaf {id} does not hold the unique model"));
                }
            }
            Node::Internal { experiment, children } => {
                let parts: Vec<CodeSet> = ctx.outcome_models(experiment).iter().map(|m| m.and(&models)).collect();
                let nonempty: Vec<usize> = (0..parts.len()).filter(|&o| !parts[o].is_empty()).collect();
                let outs: Vec<usize> = children.iter().map(|&(o, _)| o).collect();
                if outs != nonempty {
                    return Err(format!("node {id} has children {outs:?}, satisfiable {nonempty:?}"));
                }
                let total: u64 = nonempty.iter().map(|&o| parts[o].count()).sum();
                if total != models.count() {
                    return Err(format!("node {id} loses models"));
                }
                for &(o, c) in children {
                    stack.push((c, parts[o].clone()));
                }
            }
        }
    }
    Ok(())
}
