use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, RwLock};

use crate::formula::{Formula, Valuation, Var};
use crate::game::{Atom, AttrId, DeductiveGame, InstanceKind, Param, Template};
use crate::satcore::{CodeSet, CodeSpace};

/// `π̂`: exchanges `f(a)` and `f(b)` for every `f` in `attrs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SwapPermutation {
    pub a: Param,
    pub b: Param,
    pub attrs: BTreeSet<AttrId>,
}

impl SwapPermutation {
    pub fn apply(&self, game: &DeductiveGame, v: Var) -> Var {
        match game.owner(v) {
            Some((f, p)) if self.attrs.contains(&f) => {
                let m = &game.attribute(f).mapping;
                if p == self.a {
                    m[self.b.0 as usize]
                } else if p == self.b {
                    m[self.a.0 as usize]
                } else {
                    v
                }
            }
            _ => v,
        }
    }

    /// Whether `π̂` maps every experiment instance to one with the same
    /// outcome set, for the two supported instance kinds.
    pub fn lifts(&self, game: &DeductiveGame) -> bool {
        for t in game.experiments() {
            let mut swapped = false;
            let mut fixed = false;
            for i in 0..t.arity {
                let fi = t.position_attrs(i);
                if fi.is_empty() {
                    continue;
                }
                if fi.is_subset(&self.attrs) {
                    swapped = true;
                } else if fi.is_disjoint(&self.attrs) {
                    fixed = true;
                } else {
                    return false;
                }
            }
            if swapped && fixed && t.kind == InstanceKind::Distinct {
                return false;
            }
            let raw = t.raw_vars();
            if raw.iter().any(|&v| self.apply(game, v) != v) {
                let original: BTreeSet<Template> = t.outcomes.iter().map(|o| o.template.canonicalize()).collect();
                let image: BTreeSet<Template> = t
                    .outcomes
                    .iter()
                    .map(|o| {
                        o.template.substitute(&|x: &Atom| {
                            Formula::Atom(match *x {
                                Atom::Var(v) => Atom::Var(self.apply(game, v)),
                                other => other,
                            })
                        })
                    })
                    .collect();
                if image != original {
                    return false;
                }
            }
        }
        true
    }
}

/// Code-index permutation induced by a swap, `None` where the image of a
/// code leaves `Val(φ0)`.
#[derive(Debug)]
pub struct CodeMap(Vec<Option<u32>>);

impl CodeMap {
    fn build(space: &CodeSpace, game: &DeductiveGame, pi: &SwapPermutation) -> CodeMap {
        let n = space.num_vars();
        let image: Vec<Var> = (0..n as u32).map(|v| pi.apply(game, Var(v))).collect();
        CodeMap(
            space
                .codes()
                .iter()
                .map(|c| {
                    let mut out = vec![false; n];
                    for v in c.true_vars() {
                        out[image[v.index()].index()] = true;
                    }
                    space.index_of(&Valuation::new(out)).map(|i| i as u32)
                })
                .collect(),
        )
    }

    /// Whether the permutation maps `set` onto itself.
    pub fn preserves(&self, set: &CodeSet) -> bool {
        set.iter()
            .all(|i| matches!(self.0[i], Some(j) if set.contains(j as usize)))
    }
}

#[derive(Debug, Default)]
pub struct SwapCache {
    entries: RwLock<HashMap<SwapPermutation, Option<Arc<CodeMap>>>>,
}

impl SwapCache {
    /// The code map of `pi` if it lifts to a game symmetry.
    pub fn get(&self, game: &DeductiveGame, space: &CodeSpace, pi: &SwapPermutation) -> Option<Arc<CodeMap>> {
        if let Some(e) = self.entries.read().expect("swap cache").get(pi) {
            return e.clone();
        }
        let v = pi.lifts(game).then(|| Arc::new(CodeMap::build(space, game, pi)));
        self.entries
            .write()
            .expect("swap cache")
            .entry(pi.clone())
            .or_insert(v)
            .clone()
    }
}
