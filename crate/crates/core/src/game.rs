//! Deductive games: variables, initial constraint, parameters, attributes
//! and parameterized experiments whose outcomes are templates over
//! attribute atoms `f($j)`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::formula::{Formula, Valuation, Var};
use crate::satcore::SatCore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Param(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttrId(pub u32);

/// Atom of an outcome template: a game variable, or `attr($pos)` with a
/// zero-based parameter position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(Var),
    Attr { attr: AttrId, pos: usize },
}

pub type Template = Formula<Atom>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("attribute `{0}` maps {1} parameters, expected {2}")]
    AttributeArity(String, usize, usize),
    #[error("attribute `{0}` is not injective")]
    AttributeNotInjective(String),
    #[error("attributes `{0}` and `{1}` have overlapping images")]
    AttributeOverlap(String, String),
    #[error("variable index {0} out of range")]
    UnknownVariable(u32),
    #[error("experiment `{0}` references attribute index {1} which does not exist")]
    UnknownAttribute(String, u32),
    #[error("experiment `{0}` references parameter position ${1} beyond its arity {2}")]
    PositionOutOfRange(String, usize, usize),
    #[error("experiment `{0}` has no outcomes")]
    NoOutcomes(String),
    #[error("initial constraint is unsatisfiable")]
    UnsatisfiableConstraint,
    #[error("instance {0} is not admissible")]
    InadmissibleInstance(String),
    #[error("ill-formed game: {count} outcomes of {instance} hold for the secret code")]
    IllFormed { instance: String, count: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    /// `mapping[a]` is the variable encoding this attribute of parameter `a`.
    pub mapping: Vec<Var>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstanceKind {
    /// `Σ^k`
    All,
    /// `Σ^(k)`: pairwise different components
    Distinct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub label: String,
    pub template: Template,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterizedExperiment {
    pub name: String,
    pub arity: usize,
    pub kind: InstanceKind,
    pub outcomes: Vec<Outcome>,
    position_attrs: Vec<BTreeSet<AttrId>>,
    compatible: Vec<Vec<bool>>,
}

impl ParameterizedExperiment {
    pub fn new(name: impl Into<String>, arity: usize, kind: InstanceKind, outcomes: Vec<Outcome>) -> Self {
        let mut position_attrs = vec![BTreeSet::new(); arity];
        for o in &outcomes {
            o.template.visit_atoms(&mut |a| {
                if let Atom::Attr { attr, pos } = a {
                    if *pos < arity {
                        position_attrs[*pos].insert(*attr);
                    }
                }
            });
        }
        let compatible = (0..arity)
            .map(|i| {
                (0..arity)
                    .map(|j| i != j && !position_attrs[i].is_disjoint(&position_attrs[j]))
                    .collect()
            })
            .collect();
        ParameterizedExperiment {
            name: name.into(),
            arity,
            kind,
            outcomes,
            position_attrs,
            compatible,
        }
    }

    /// `F_i`: attributes occurring at position `i` in some outcome.
    pub fn position_attrs(&self, i: usize) -> &BTreeSet<AttrId> {
        &self.position_attrs[i]
    }

    pub fn compatible(&self, i: usize, j: usize) -> bool {
        self.compatible[i][j]
    }

    /// Variables occurring literally in some outcome template.
    pub fn raw_vars(&self) -> BTreeSet<Var> {
        let mut s = BTreeSet::new();
        for o in &self.outcomes {
            o.template.visit_atoms(&mut |a| {
                if let Atom::Var(v) = a {
                    s.insert(*v);
                }
            });
        }
        s
    }

    pub fn admits(&self, params: &[Param]) -> bool {
        params.len() == self.arity
            && match self.kind {
                InstanceKind::All => true,
                InstanceKind::Distinct => all_distinct(params),
            }
    }

    /// Whether `prefix` extends to an admissible instance over `num_params` parameters.
    pub fn feasible_prefix(&self, prefix: &[Param], num_params: usize) -> bool {
        if prefix.len() > self.arity || prefix.iter().any(|p| p.0 as usize >= num_params) {
            return false;
        }
        match self.kind {
            InstanceKind::All => num_params > 0 || self.arity == 0,
            InstanceKind::Distinct => all_distinct(prefix) && self.arity <= num_params,
        }
    }
}

fn all_distinct(params: &[Param]) -> bool {
    let mut seen = BTreeSet::new();
    params.iter().all(|p| seen.insert(*p))
}

/// `(t, p⃗)`; the derived order is the experiment order `⪯`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExperimentInstance {
    pub experiment: usize,
    pub params: Vec<Param>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EvaluatedExperiment {
    pub instance: ExperimentInstance,
    pub outcome: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WellFormedReport {
    Ok,
    Counterexample {
        valuation: Valuation,
        instance: ExperimentInstance,
        true_outcomes: Vec<usize>,
    },
}

#[derive(Debug, Clone)]
pub struct DeductiveGame {
    vars: Vec<String>,
    constraint: Formula<Var>,
    params: Vec<String>,
    attributes: Vec<Attribute>,
    experiments: Vec<ParameterizedExperiment>,
    var_owner: Vec<Option<(AttrId, Param)>>,
    var_lookup: HashMap<String, Var>,
}

impl DeductiveGame {
    pub fn new(
        vars: Vec<String>,
        constraint: Formula<Var>,
        params: Vec<String>,
        attributes: Vec<Attribute>,
        experiments: Vec<ParameterizedExperiment>,
    ) -> Result<Self, GameError> {
        let n = vars.len();
        let check_var = |v: Var| {
            if v.index() < n {
                Ok(())
            } else {
                Err(GameError::UnknownVariable(v.0))
            }
        };
        let mut bad = None;
        constraint.visit_atoms(&mut |v| {
            if check_var(*v).is_err() {
                bad = Some(*v);
            }
        });
        if let Some(v) = bad {
            return Err(GameError::UnknownVariable(v.0));
        }
        let mut var_owner: Vec<Option<(AttrId, Param)>> = vec![None; n];
        for (ai, a) in attributes.iter().enumerate() {
            if a.mapping.len() != params.len() {
                return Err(GameError::AttributeArity(a.name.clone(), a.mapping.len(), params.len()));
            }
            let mut seen = BTreeSet::new();
            for (pi, &v) in a.mapping.iter().enumerate() {
                check_var(v)?;
                if !seen.insert(v) {
                    return Err(GameError::AttributeNotInjective(a.name.clone()));
                }
                if let Some((other, _)) = var_owner[v.index()] {
                    return Err(GameError::AttributeOverlap(
                        attributes[other.0 as usize].name.clone(),
                        a.name.clone(),
                    ));
                }
                var_owner[v.index()] = Some((AttrId(ai as u32), Param(pi as u32)));
            }
        }
        for t in &experiments {
            if t.outcomes.is_empty() {
                return Err(GameError::NoOutcomes(t.name.clone()));
            }
            for o in &t.outcomes {
                let mut err = None;
                o.template.visit_atoms(&mut |a| match *a {
                    Atom::Var(v) if v.index() >= n => err = Some(GameError::UnknownVariable(v.0)),
                    Atom::Attr { attr, .. } if attr.0 as usize >= attributes.len() => {
                        err = Some(GameError::UnknownAttribute(t.name.clone(), attr.0))
                    }
                    Atom::Attr { pos, .. } if pos >= t.arity => {
                        err = Some(GameError::PositionOutOfRange(t.name.clone(), pos + 1, t.arity))
                    }
                    _ => {}
                });
                if let Some(e) = err {
                    return Err(e);
                }
            }
        }
        if !SatCore::new(n).is_satisfiable(&constraint) {
            return Err(GameError::UnsatisfiableConstraint);
        }
        let var_lookup = vars
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), Var(i as u32)))
            .collect();
        Ok(DeductiveGame {
            vars,
            constraint: constraint.canonicalize(),
            params,
            attributes,
            experiments,
            var_owner,
            var_lookup,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_name(&self, v: Var) -> &str {
        &self.vars[v.index()]
    }

    pub fn var_names(&self) -> &[String] {
        &self.vars
    }

    pub fn var_by_name(&self, name: &str) -> Option<Var> {
        self.var_lookup.get(name).copied()
    }

    pub fn constraint(&self) -> &Formula<Var> {
        &self.constraint
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn param_name(&self, p: Param) -> &str {
        &self.params[p.0 as usize]
    }

    pub fn param_names(&self) -> &[String] {
        &self.params
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn attribute(&self, a: AttrId) -> &Attribute {
        &self.attributes[a.0 as usize]
    }

    pub fn experiments(&self) -> &[ParameterizedExperiment] {
        &self.experiments
    }

    pub fn experiment(&self, i: usize) -> &ParameterizedExperiment {
        &self.experiments[i]
    }

    /// The attribute and parameter whose attribute value `v` encodes.
    pub fn owner(&self, v: Var) -> Option<(AttrId, Param)> {
        self.var_owner[v.index()]
    }

    /// `Out`: the largest number of outcomes of any experiment.
    pub fn max_outcomes(&self) -> usize {
        self.experiments.iter().map(|t| t.outcomes.len()).max().unwrap_or(1)
    }

    pub fn sat(&self) -> SatCore {
        SatCore::new(self.num_vars())
    }

    /// `ψ(p⃗)`: substitutes `f($j)` by `f(p⃗_j)`, canonicalized.
    pub fn instantiate(&self, template: &Template, params: &[Param]) -> Formula<Var> {
        template.substitute(&|a: &Atom| match *a {
            Atom::Var(v) => Formula::Atom(v),
            Atom::Attr { attr, pos } => Formula::Atom(self.attributes[attr.0 as usize].mapping[params[pos].0 as usize]),
        })
    }

    /// `Φ(e)` in outcome order.
    pub fn outcomes(&self, e: &ExperimentInstance) -> Vec<Formula<Var>> {
        self.experiments[e.experiment]
            .outcomes
            .iter()
            .map(|o| self.instantiate(&o.template, &e.params))
            .collect()
    }

    pub fn instance(&self, experiment: usize, params: Vec<Param>) -> Result<ExperimentInstance, GameError> {
        let e = ExperimentInstance { experiment, params };
        if experiment < self.experiments.len()
            && self.experiments[experiment].admits(&e.params)
            && e.params.iter().all(|p| (p.0 as usize) < self.params.len())
        {
            Ok(e)
        } else {
            Err(GameError::InadmissibleInstance(format!("{e:?}")))
        }
    }

    /// All instances of experiment `t`, lexicographically.
    pub fn instances_of(&self, t: usize) -> Vec<ExperimentInstance> {
        let exp = &self.experiments[t];
        let s = self.params.len();
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(exp.arity);
        fn rec(
            exp: &ParameterizedExperiment,
            s: usize,
            t: usize,
            cur: &mut Vec<Param>,
            out: &mut Vec<ExperimentInstance>,
        ) {
            if cur.len() == exp.arity {
                if exp.admits(cur) {
                    out.push(ExperimentInstance {
                        experiment: t,
                        params: cur.clone(),
                    });
                }
                return;
            }
            for p in 0..s as u32 {
                cur.push(Param(p));
                if exp.feasible_prefix(cur, s) {
                    rec(exp, s, t, cur, out);
                }
                cur.pop();
            }
        }
        rec(exp, s, t, &mut cur, &mut out);
        out
    }

    /// `E`, in `⪯` order.
    pub fn all_instances(&self) -> Vec<ExperimentInstance> {
        (0..self.experiments.len()).flat_map(|t| self.instances_of(t)).collect()
    }

    /// Outcome realized by the secret code `v`.
    pub fn evaluate_experiment(&self, e: &ExperimentInstance, v: &Valuation) -> Result<EvaluatedExperiment, GameError> {
        let holding: Vec<usize> = self
            .outcomes(e)
            .iter()
            .enumerate()
            .filter(|(_, f)| f.eval_with(&|x: &Var| v.get(*x).unwrap_or(false)))
            .map(|(i, _)| i)
            .collect();
        if holding.len() == 1 {
            Ok(EvaluatedExperiment {
                instance: e.clone(),
                outcome: holding[0],
            })
        } else {
            Err(GameError::IllFormed {
                instance: self.instance_name(e),
                count: holding.len(),
            })
        }
    }

    /// For every representative, checks that `φ0 ∧ ¬exactly_1(Φ(e))` is
    /// unsatisfiable.
    pub fn check_well_formed(&self, reps: &[ExperimentInstance]) -> WellFormedReport {
        let core = self.sat();
        for e in reps {
            let outs = self.outcomes(e);
            let bad = Formula::and([
                self.constraint.clone(),
                Formula::not(Formula::exactly(1, outs.iter().cloned())),
            ]);
            if let Some(v) = core.find_model(&bad) {
                let true_outcomes = outs
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| f.evaluate(&v).unwrap_or(false))
                    .map(|(i, _)| i)
                    .collect();
                return WellFormedReport::Counterexample {
                    valuation: v,
                    instance: e.clone(),
                    true_outcomes,
                };
            }
        }
        WellFormedReport::Ok
    }

    /// `X_t`: variables `f(p⃗_i)` for `f ∈ F_i` over all admissible instances.
    pub fn attribute_vars_of(&self, t: usize) -> BTreeSet<Var> {
        let exp = &self.experiments[t];
        let s = self.params.len();
        let has_instances = match exp.kind {
            InstanceKind::All => s > 0 || exp.arity == 0,
            InstanceKind::Distinct => exp.arity <= s,
        };
        let mut out = BTreeSet::new();
        if !has_instances {
            return out;
        }
        for i in 0..exp.arity {
            for f in exp.position_attrs(i) {
                out.extend(self.attribute(*f).mapping.iter().copied());
            }
        }
        out
    }

    /// The four closure conditions enabling dominance pruning, decided
    /// analytically for the two supported instance kinds.
    pub fn is_faithful(&self, t: usize) -> bool {
        let exp = &self.experiments[t];
        let s = self.params.len();
        let nonempty = match exp.kind {
            InstanceKind::All => s > 0 || exp.arity == 0,
            InstanceKind::Distinct => exp.arity <= s,
        };
        if !self.attribute_vars_of(t).is_disjoint(&exp.raw_vars()) {
            return false;
        }
        if !nonempty {
            return true;
        }
        let pairs = (0..exp.arity).flat_map(|i| (0..exp.arity).map(move |j| (i, j)));
        match exp.kind {
            // compatible positions must differ, impossible once Σ^k contains repeats
            InstanceKind::All => !pairs.clone().any(|(i, j)| exp.compatible(i, j)),
            // replacing a component by another instance's value at an
            // incompatible position leaves Σ^(k)
            InstanceKind::Distinct => !pairs.clone().any(|(i, j)| i != j && !exp.compatible(i, j)),
        }
    }

    pub fn instance_name(&self, e: &ExperimentInstance) -> String {
        let ps: Vec<&str> = e.params.iter().map(|p| self.param_name(*p)).collect();
        format!("{}({})", self.experiments[e.experiment].name, ps.join(","))
    }

    pub fn outcome_label(&self, e: &EvaluatedExperiment) -> &str {
        &self.experiments[e.instance.experiment].outcomes[e.outcome].label
    }

    pub fn describe_valuation(&self, v: &Valuation) -> String {
        let on: Vec<&str> = v.true_vars().map(|x| self.var_name(x)).collect();
        if on.is_empty() {
            "{}".into()
        } else {
            on.join(" ")
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Var(v) => write!(f, "x{}", v.0),
            Atom::Attr { attr, pos } => write!(f, "f{}(${})", attr.0, pos + 1),
        }
    }
}
