use crate::formula::{Formula, Valuation, Var};

use super::{CodeSet, FixedSet, ModelCount, Reduced, SatCore, SatError};

/// The models of an initial constraint, enumerated once, with one column
/// bitset per variable.
///
/// Queries are exact for formulae that imply the constraint the space was
/// built from; for other formulae they answer relative to the code space.
#[derive(Debug, Clone)]
pub struct CodeSpace {
    codes: Vec<Valuation>,
    columns: Vec<CodeSet>,
    num_vars: usize,
}

impl CodeSpace {
    pub fn enumerate(core: &SatCore, constraint: &Formula<Var>) -> Result<Self, SatError> {
        let mut codes = core.enumerate_models(constraint)?;
        codes.sort();
        Ok(Self::from_codes(codes, core.num_vars()))
    }

    pub fn from_codes(codes: Vec<Valuation>, num_vars: usize) -> Self {
        let mut columns = vec![CodeSet::empty(codes.len()); num_vars];
        for (i, c) in codes.iter().enumerate() {
            for v in c.true_vars() {
                columns[v.index()].insert(i);
            }
        }
        CodeSpace {
            codes,
            columns,
            num_vars,
        }
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn codes(&self) -> &[Valuation] {
        &self.codes
    }

    pub fn code(&self, i: usize) -> &Valuation {
        &self.codes[i]
    }

    pub fn index_of(&self, v: &Valuation) -> Option<usize> {
        self.codes.binary_search(v).ok()
    }

    pub fn all(&self) -> CodeSet {
        CodeSet::full(self.codes.len())
    }

    pub fn column(&self, v: Var) -> &CodeSet {
        &self.columns[v.index()]
    }

    /// The codes satisfying `f`, evaluated bit-parallel.
    pub fn models(&self, f: &Formula<Var>) -> CodeSet {
        self.models_with(f, &|v: &Var| *v)
    }

    /// As [`models`](Self::models), reading each atom through `var`.
    pub fn models_with<A>(&self, f: &Formula<A>, var: &impl Fn(&A) -> Var) -> CodeSet {
        match f {
            Formula::Atom(a) => self.columns[var(a).index()].clone(),
            Formula::Not(c) => self.models_with(c, var).complement(),
            Formula::And(cs) => {
                let mut acc = self.all();
                for c in cs {
                    acc = acc.and(&self.models_with(c, var));
                    if acc.is_empty() {
                        break;
                    }
                }
                acc
            }
            Formula::Or(cs) => {
                let mut acc = CodeSet::empty(self.len());
                for c in cs {
                    acc = acc.or(&self.models_with(c, var));
                }
                acc
            }
            Formula::Exactly(k, cs) => {
                // at_least[j]: codes where at least j+1 children seen so far hold
                let width = k + 1;
                let mut at_least = vec![CodeSet::empty(self.len()); width];
                for c in cs {
                    let m = self.models_with(c, var);
                    for j in (0..width).rev() {
                        let carry = if j == 0 { m.clone() } else { at_least[j - 1].and(&m) };
                        at_least[j] = at_least[j].or(&carry);
                    }
                }
                let ge_k = if *k == 0 { self.all() } else { at_least[k - 1].clone() };
                ge_k.and_not(&at_least[*k])
            }
        }
    }

    pub fn count(&self, set: &CodeSet) -> ModelCount {
        ModelCount(set.count())
    }

    pub fn fixed_in(&self, set: &CodeSet) -> FixedSet {
        if set.is_empty() {
            return FixedSet::vacuous(self.num_vars);
        }
        FixedSet::from_values(
            self.columns
                .iter()
                .map(|col| {
                    if set.is_subset(col) {
                        Some(true)
                    } else if !set.intersects(col) {
                        Some(false)
                    } else {
                        None
                    }
                })
                .collect(),
        )
    }

    pub fn reduce(&self, f: &Formula<Var>, set: &CodeSet) -> Reduced {
        Reduced::from_fixed(f, self.fixed_in(set))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitset_evaluation_matches_pointwise() {
        let x = |i| Formula::var(i);
        let core = SatCore::new(4);
        let space = CodeSpace::enumerate(&core, &Formula::top()).unwrap();
        assert_eq!(space.len(), 16);
        let fs = [
            Formula::Exactly(2, vec![x(0), x(1), x(2), x(3)]),
            Formula::Or(vec![x(0), Formula::Not(Box::new(x(3)))]),
            Formula::Exactly(0, vec![x(1), x(2)]),
            Formula::Exactly(1, vec![x(1), x(1), x(2)]),
        ];
        for f in &fs {
            let m = space.models(f);
            for (i, c) in space.codes().iter().enumerate() {
                assert_eq!(m.contains(i), f.evaluate(c).unwrap(), "{f:?}");
            }
        }
    }
}
