//! Tseitin translation with full gate equivalences. `exactly_k` nodes are
//! compiled through a sequential counter whose register bits are defined
//! (not merely implied), so every model of the original variables has a
//! unique extension to the auxiliary ones.

use crate::formula::{Formula, Var};

use super::solver::Lit;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gate {
    Const(bool),
    Lit(Lit),
}

impl std::ops::Not for Gate {
    type Output = Gate;
    fn not(self) -> Gate {
        match self {
            Gate::Const(b) => Gate::Const(!b),
            Gate::Lit(l) => Gate::Lit(!l),
        }
    }
}

/// Clause set over original variables `0..num_original` plus auxiliaries.
#[derive(Debug, Clone, Default)]
pub struct Cnf {
    pub clauses: Vec<Vec<Lit>>,
    pub num_original: usize,
    pub num_vars: usize,
}

impl Cnf {
    /// Compiles `f` over at least `num_original` original variables; the
    /// result is satisfiable exactly by extensions of models of `f`.
    pub fn from_formula(f: &Formula<Var>, num_original: usize) -> Cnf {
        let n = num_original.max(f.var_bound());
        let mut cnf = Cnf {
            clauses: Vec::new(),
            num_original: n,
            num_vars: n,
        };
        match cnf.encode(f) {
            Gate::Const(true) => {}
            Gate::Const(false) => cnf.clauses.push(Vec::new()),
            Gate::Lit(l) => cnf.clauses.push(vec![l]),
        }
        cnf
    }

    fn fresh(&mut self) -> Lit {
        let v = self.num_vars as u32;
        self.num_vars += 1;
        Lit::new(v, true)
    }

    fn and_gate(&mut self, inputs: Vec<Gate>) -> Gate {
        let mut lits = Vec::new();
        for g in inputs {
            match g {
                Gate::Const(false) => return Gate::Const(false),
                Gate::Const(true) => {}
                Gate::Lit(l) => lits.push(l),
            }
        }
        match lits.len() {
            0 => Gate::Const(true),
            1 => Gate::Lit(lits[0]),
            _ => {
                let g = self.fresh();
                let mut big = vec![g];
                for &l in &lits {
                    self.clauses.push(vec![!g, l]);
                    big.push(!l);
                }
                self.clauses.push(big);
                Gate::Lit(g)
            }
        }
    }

    fn or_gate(&mut self, inputs: Vec<Gate>) -> Gate {
        !self.and_gate(inputs.into_iter().map(|g| !g).collect())
    }

    fn encode(&mut self, f: &Formula<Var>) -> Gate {
        match f {
            Formula::Atom(v) => Gate::Lit(Lit::new(v.0, true)),
            Formula::Not(c) => !self.encode(c),
            Formula::And(cs) => {
                let gs = cs.iter().map(|c| self.encode(c)).collect();
                self.and_gate(gs)
            }
            Formula::Or(cs) => {
                let gs = cs.iter().map(|c| self.encode(c)).collect();
                self.or_gate(gs)
            }
            Formula::Exactly(k, cs) => {
                let gs: Vec<Gate> = cs.iter().map(|c| self.encode(c)).collect();
                self.exactly_gate(*k, &gs)
            }
        }
    }

    /// Sequential counter: `reg[j]` after input `i` means "at least `j+1`
    /// of the first `i` inputs are true", for `j <= k`.
    fn exactly_gate(&mut self, k: usize, inputs: &[Gate]) -> Gate {
        if k > inputs.len() {
            return Gate::Const(false);
        }
        let width = k + 1;
        let mut reg = vec![Gate::Const(false); width];
        for &x in inputs {
            let mut next = Vec::with_capacity(width);
            for j in 0..width {
                let carry = if j == 0 { x } else { self.and_gate(vec![reg[j - 1], x]) };
                next.push(self.or_gate(vec![reg[j], carry]));
            }
            reg = next;
        }
        let at_least_k = if k == 0 { Gate::Const(true) } else { reg[k - 1] };
        self.and_gate(vec![at_least_k, !reg[k]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Valuation;
    use crate::satcore::solver::{SolveResult, Solver};

    fn projected_models(f: &Formula<Var>, n: usize) -> Vec<Valuation> {
        let cnf = Cnf::from_formula(f, n);
        let mut s = Solver::new();
        s.ensure_vars(cnf.num_vars);
        for c in &cnf.clauses {
            s.add_clause(c);
        }
        let mut out = Vec::new();
        while s.solve(&[]) == SolveResult::Sat {
            let m = s.model()[..n].to_vec();
            s.add_clause(
                &m.iter()
                    .enumerate()
                    .map(|(i, &b)| Lit::new(i as u32, !b))
                    .collect::<Vec<_>>(),
            );
            out.push(Valuation::new(m));
        }
        out.sort();
        out
    }

    #[test]
    fn single_variable() {
        let cnf = Cnf::from_formula(&Formula::var(0), 1);
        assert_eq!(cnf.clauses, vec![vec![Lit::new(0, true)]]);
    }

    #[test]
    fn exactly_one_of_two() {
        let f = Formula::Exactly(1, vec![Formula::var(0), Formula::var(1)]);
        let got = projected_models(&f, 2);
        assert_eq!(
            got,
            vec![Valuation::new(vec![false, true]), Valuation::new(vec![true, false])]
        );
    }

    #[test]
    fn exactly_k_matches_truth_table() {
        let xs: Vec<_> = (0..5).map(Formula::var).collect();
        for k in 0..=6 {
            let f = Formula::Exactly(k, xs.clone());
            let mut want: Vec<_> = Valuation::all(5).filter(|v| f.evaluate(v).unwrap()).collect();
            want.sort();
            assert_eq!(projected_models(&f, 5), want, "k = {k}");
        }
    }
}
