//! Satisfiability services: SAT decision, exact projected model counting,
//! fixed-variable detection and removal.
//!
//! [`SatCore`] answers every query from scratch with the bundled CDCL
//! solver. [`CodeSpace`] is the second backend: it enumerates the models
//! of an initial constraint once and then answers the same queries for any
//! formula that implies that constraint with bitset arithmetic.

mod cnf;
mod codeset;
mod codespace;
pub mod solver;

use thiserror::Error;

use crate::formula::{Formula, Valuation, Var};

pub use cnf::Cnf;
pub use codeset::CodeSet;
pub use codespace::CodeSpace;
use solver::{Lit, SolveResult, Solver};

/// Default bound on enumerated models.
pub const DEFAULT_MODEL_CAP: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SatError {
    #[error("model count exceeds the configured cap of {0}")]
    ModelCapExceeded(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModelCount(pub u64);

/// Variables taking the same value in every model.
///
/// For an unsatisfiable formula every variable counts as fixed
/// (`vacuous`), and no particular value is recorded.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FixedSet {
    values: Vec<Option<bool>>,
    vacuous: bool,
}

impl FixedSet {
    pub fn none(n: usize) -> Self {
        FixedSet {
            values: vec![None; n],
            vacuous: false,
        }
    }

    pub fn vacuous(n: usize) -> Self {
        FixedSet {
            values: vec![None; n],
            vacuous: true,
        }
    }

    pub fn from_values(values: Vec<Option<bool>>) -> Self {
        FixedSet { values, vacuous: false }
    }

    pub fn is_vacuous(&self) -> bool {
        self.vacuous
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    /// `|Fix|`.
    pub fn len(&self) -> usize {
        if self.vacuous {
            self.values.len()
        } else {
            self.values.iter().filter(|v| v.is_some()).count()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, v: Var) -> Option<bool> {
        self.values.get(v.index()).copied().flatten()
    }

    pub fn is_fixed(&self, v: Var) -> bool {
        self.vacuous || self.get(v).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|b| (Var(i as u32), b)))
    }
}

/// A formula with its fixed variables substituted away.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduced {
    pub residual: Formula<Var>,
    pub fixed: FixedSet,
}

impl Reduced {
    pub fn from_fixed(f: &Formula<Var>, fixed: FixedSet) -> Self {
        let residual = if fixed.is_vacuous() {
            Formula::bottom()
        } else {
            f.assign(&|v| fixed.get(v))
        };
        Reduced { residual, fixed }
    }

    /// `residual ∧ fixed literals`, semantically equivalent to the input.
    pub fn normalized(&self) -> Formula<Var> {
        if self.fixed.is_vacuous() {
            return Formula::bottom();
        }
        Formula::and(std::iter::once(self.residual.clone()).chain(self.fixed.iter().map(|(v, b)| Formula::lit(v, b))))
    }
}

/// Reference backend over all valuations of `num_vars` variables.
#[derive(Debug, Clone)]
pub struct SatCore {
    num_vars: usize,
    model_cap: u64,
}

impl SatCore {
    pub fn new(num_vars: usize) -> Self {
        SatCore {
            num_vars,
            model_cap: DEFAULT_MODEL_CAP,
        }
    }

    pub fn with_model_cap(mut self, cap: u64) -> Self {
        self.model_cap = cap;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn model_cap(&self) -> u64 {
        self.model_cap
    }

    fn solver_for(&self, f: &Formula<Var>) -> (Solver, usize) {
        let cnf = Cnf::from_formula(f, self.num_vars);
        let mut s = Solver::new();
        s.ensure_vars(cnf.num_vars);
        for c in &cnf.clauses {
            s.add_clause(c);
        }
        (s, cnf.num_original)
    }

    pub fn is_satisfiable(&self, f: &Formula<Var>) -> bool {
        self.solver_for(f).0.solve(&[]) == SolveResult::Sat
    }

    /// Some model of `f`, restricted to the original variables.
    pub fn find_model(&self, f: &Formula<Var>) -> Option<Valuation> {
        let (mut s, n) = self.solver_for(f);
        (s.solve(&[]) == SolveResult::Sat).then(|| Valuation::new(s.model()[..n].to_vec()))
    }

    /// Enumerates all models over the original variables with blocking
    /// clauses, in solver order.
    pub fn enumerate_models(&self, f: &Formula<Var>) -> Result<Vec<Valuation>, SatError> {
        let (mut s, n) = self.solver_for(f);
        let mut out = Vec::new();
        while s.solve(&[]) == SolveResult::Sat {
            if out.len() as u64 >= self.model_cap {
                return Err(SatError::ModelCapExceeded(self.model_cap));
            }
            let m = s.model()[..n].to_vec();
            let block: Vec<Lit> = m.iter().enumerate().map(|(i, &b)| Lit::new(i as u32, !b)).collect();
            out.push(Valuation::new(m));
            if block.is_empty() {
                break;
            }
            s.add_clause(&block);
        }
        Ok(out)
    }

    pub fn count_models(&self, f: &Formula<Var>) -> Result<ModelCount, SatError> {
        self.enumerate_models(f).map(|m| ModelCount(m.len() as u64))
    }

    pub fn fixed_variables(&self, f: &Formula<Var>) -> FixedSet {
        let (mut s, n) = self.solver_for(f);
        if s.solve(&[]) == SolveResult::Unsat {
            return FixedSet::vacuous(n);
        }
        let reference: Vec<bool> = s.model()[..n].to_vec();
        let mut candidate = vec![true; n];
        for i in 0..n {
            if !candidate[i] {
                continue;
            }
            let flip = Lit::new(i as u32, !reference[i]);
            if s.solve(&[flip]) == SolveResult::Sat {
                let m = s.model();
                for j in i..n {
                    if m[j] != reference[j] {
                        candidate[j] = false;
                    }
                }
            }
        }
        FixedSet::from_values((0..n).map(|i| candidate[i].then_some(reference[i])).collect())
    }

    pub fn remove_fixed(&self, f: &Formula<Var>) -> Reduced {
        Reduced::from_fixed(f, self.fixed_variables(f))
    }
}
