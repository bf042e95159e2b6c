use std::collections::BTreeSet;

use super::canon::{Label, LabeledGraph};
use crate::formula::{Formula, Permutation, Var};
use crate::game::{Atom, AttrId, DeductiveGame, Template};

/// Attaches the syntax tree of `f` below a fresh vertex and returns the
/// vertex of its topmost operator (or the variable vertex for an atom).
/// Variable leaves are the vertices `0..num_vars`.
pub(crate) fn attach_tree(g: &mut LabeledGraph, f: &Formula<Var>) -> u32 {
    match f {
        Formula::Atom(v) => v.0,
        Formula::Not(c) => {
            let me = g.add_vertex(Label::Not);
            let cv = attach_tree(g, c);
            g.add_edge(me, cv);
            me
        }
        Formula::And(cs) | Formula::Or(cs) | Formula::Exactly(_, cs) => {
            let label = match f {
                Formula::And(_) => Label::And,
                Formula::Or(_) => Label::Or,
                Formula::Exactly(k, _) => Label::Exactly(*k as u32),
                _ => unreachable!(),
            };
            let me = g.add_vertex(label);
            let mut i = 0;
            while i < cs.len() {
                let c = cs[i..].iter().filter(|x| **x == cs[i]).count();
                if cs[..i].contains(&cs[i]) {
                    i += 1;
                    continue;
                }
                let cv = attach_tree(g, &cs[i]);
                if c > 1 {
                    let m = g.add_vertex(Label::Mult(c as u32));
                    g.add_edge(me, m);
                    g.add_edge(m, cv);
                } else {
                    g.add_edge(me, cv);
                }
                i += 1;
            }
            me
        }
    }
}

/// Vertices `X ∪ F` (variables first) plus one gadget per parameterless
/// experiment: an `Experiment` vertex joined to a `Template` root above
/// the syntax tree of each of its outcomes.
#[derive(Debug, Clone)]
pub struct BaseGraph {
    graph: LabeledGraph,
    num_vars: usize,
    attr_class: Vec<u32>,
}

fn swap_attrs(t: &Template, f: AttrId, g: AttrId, rho: &[usize]) -> Template {
    t.substitute(&|a: &Atom| {
        Formula::Atom(match *a {
            Atom::Attr { attr, pos } => Atom::Attr {
                attr: if attr == f {
                    g
                } else if attr == g {
                    f
                } else {
                    attr
                },
                pos: rho[pos],
            },
            v => v,
        })
    })
}

/// Whether some renumbering `ρ` of positions makes the outcome set of `t`
/// invariant under exchanging attributes `f` and `g`.
fn transposition_preserves(templates: &[Template], arity: usize, f: AttrId, g: AttrId) -> bool {
    let original: BTreeSet<Template> = templates.iter().map(|t| t.canonicalize()).collect();
    let sig = |i: usize, swap: bool| -> BTreeSet<AttrId> {
        let mut s = BTreeSet::new();
        for t in templates {
            t.visit_atoms(&mut |a| {
                if let Atom::Attr { attr, pos } = *a {
                    if pos == i {
                        s.insert(if !swap {
                            attr
                        } else if attr == f {
                            g
                        } else if attr == g {
                            f
                        } else {
                            attr
                        });
                    }
                }
            });
        }
        s
    };
    let swapped: Vec<_> = (0..arity).map(|i| sig(i, true)).collect();
    let plain: Vec<_> = (0..arity).map(|i| sig(i, false)).collect();
    let mut rho = vec![usize::MAX; arity];
    let mut used = vec![false; arity];
    fn rec(
        i: usize,
        rho: &mut Vec<usize>,
        used: &mut Vec<bool>,
        swapped: &[BTreeSet<AttrId>],
        plain: &[BTreeSet<AttrId>],
        check: &dyn Fn(&[usize]) -> bool,
    ) -> bool {
        if i == rho.len() {
            return check(rho);
        }
        for j in 0..rho.len() {
            if !used[j] && swapped[i] == plain[j] {
                used[j] = true;
                rho[i] = j;
                if rec(i + 1, rho, used, swapped, plain, check) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    let check = |rho: &[usize]| {
        let image: BTreeSet<Template> = templates.iter().map(|t| swap_attrs(t, f, g, rho)).collect();
        image == original
    };
    rec(0, &mut rho, &mut used, &swapped, &plain, &check)
}

impl BaseGraph {
    pub fn build(game: &DeductiveGame) -> Self {
        let n = game.num_vars();
        let nattr = game.attributes().len();
        let mut named = vec![false; n];
        for t in game.experiments().iter().filter(|t| t.arity > 0) {
            for v in t.raw_vars() {
                named[v.index()] = true;
            }
        }

        // interchangeable attributes: connected by valid transpositions
        let mut class: Vec<u32> = (0..nattr as u32).collect();
        for f in 0..nattr {
            for g in f + 1..nattr {
                if class[f] == class[g] {
                    continue;
                }
                let (fa, ga) = (AttrId(f as u32), AttrId(g as u32));
                let touches_named = game
                    .attribute(fa)
                    .mapping
                    .iter()
                    .chain(&game.attribute(ga).mapping)
                    .any(|v| named[v.index()]);
                let ok = !touches_named
                    && game.experiments().iter().filter(|t| t.arity > 0).all(|t| {
                        let ts: Vec<Template> = t.outcomes.iter().map(|o| o.template.clone()).collect();
                        transposition_preserves(&ts, t.arity, fa, ga)
                    });
                if ok {
                    let (old, new) = (class[g].max(class[f]), class[g].min(class[f]));
                    for c in class.iter_mut() {
                        if *c == old {
                            *c = new;
                        }
                    }
                }
            }
        }

        let mut graph = LabeledGraph::new();
        for (i, &is_named) in named.iter().enumerate() {
            graph.add_vertex(if is_named { Label::Named(i as u32) } else { Label::Var });
        }
        for (a, attr) in game.attributes().iter().enumerate() {
            let av = graph.add_vertex(Label::Attr(class[a]));
            for v in &attr.mapping {
                graph.add_edge(av, v.0);
            }
        }
        for t in game.experiments().iter().filter(|t| t.arity > 0) {
            for o in &t.outcomes {
                for i in 0..t.arity {
                    let mut at_i = BTreeSet::new();
                    o.template.visit_atoms(&mut |a| {
                        if let Atom::Attr { attr, pos } = *a {
                            if pos == i {
                                at_i.insert(attr);
                            }
                        }
                    });
                    let at_i: Vec<AttrId> = at_i.into_iter().collect();
                    for (x, &f) in at_i.iter().enumerate() {
                        for &g in &at_i[x + 1..] {
                            let (mf, mg) = (&game.attribute(f).mapping, &game.attribute(g).mapping);
                            for p in 0..game.num_params() {
                                graph.add_edge(mf[p].0, mg[p].0);
                            }
                        }
                    }
                }
            }
        }
        for t in game.experiments().iter().filter(|t| t.arity == 0) {
            let ev = graph.add_vertex(Label::Experiment);
            for o in &t.outcomes {
                let root = graph.add_vertex(Label::Template);
                graph.add_edge(ev, root);
                let f = game.instantiate(&o.template, &[]);
                let top = attach_tree(&mut graph, &f);
                graph.add_edge(root, top);
            }
        }
        BaseGraph {
            graph,
            num_vars: n,
            attr_class: class,
        }
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn attr_vertex(&self, a: AttrId) -> u32 {
        (self.num_vars + a.0 as usize) as u32
    }

    /// Class id of each attribute; equal ids may be exchanged.
    pub fn attribute_classes(&self) -> &[u32] {
        &self.attr_class
    }

    /// Restriction of a base-graph automorphism to the variables.
    pub fn automorphism_to_symmetry(&self, perm: &[u32]) -> Option<Permutation> {
        if perm.len() != self.graph.len() || !self.graph.is_automorphism(perm) {
            return None;
        }
        let image: Vec<Var> = perm[..self.num_vars].iter().map(|&v| Var(v)).collect();
        if image.iter().any(|v| v.index() >= self.num_vars) {
            return None;
        }
        Permutation::new(image).ok()
    }
}
