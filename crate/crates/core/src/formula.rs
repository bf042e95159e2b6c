//! Propositional formulae with commutative connectives only.
//!
//! A [`Formula`] is generic over its atom type so the same machinery serves
//! both ground formulae over game variables and outcome templates that still
//! contain parameter atoms. Canonical forms are produced by the smart
//! constructors [`Formula::and`], [`Formula::or`], [`Formula::not`] and
//! [`Formula::exactly`], which assume canonical children.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// A propositional variable, identified by its index in the game's variable table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("variable {0} is outside the valuation domain of {1} variables")]
    UnknownVariable(u32, usize),
    #[error("permutation is not a bijection on {0} variables")]
    NotBijective(usize),
}

/// Formula node. The derived ordering (Atom < Not < And < Or < Exactly,
/// then atoms, then child lists) is the structural order used by
/// canonicalization.
///
/// `And(vec![])` is the constant true and `Or(vec![])` the constant false.
/// Otherwise canonical `And`/`Or` nodes have at least two children.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula<A> {
    Atom(A),
    Not(Box<Formula<A>>),
    And(Vec<Formula<A>>),
    Or(Vec<Formula<A>>),
    Exactly(usize, Vec<Formula<A>>),
}

impl<A> Formula<A> {
    pub fn top() -> Self {
        Formula::And(Vec::new())
    }

    pub fn bottom() -> Self {
        Formula::Or(Vec::new())
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Formula::And(c) if c.is_empty())
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Formula::Or(c) if c.is_empty())
    }

    pub fn constant(&self) -> Option<bool> {
        match self {
            Formula::And(c) if c.is_empty() => Some(true),
            Formula::Or(c) if c.is_empty() => Some(false),
            _ => None,
        }
    }

    /// Number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) => 1,
            Formula::Not(c) => 1 + c.size(),
            Formula::And(cs) | Formula::Or(cs) | Formula::Exactly(_, cs) => {
                1 + cs.iter().map(Formula::size).sum::<usize>()
            }
        }
    }

    pub fn atoms(&self) -> Vec<&A> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| out.push(a));
        out
    }

    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a A)) {
        match self {
            Formula::Atom(a) => f(a),
            Formula::Not(c) => c.visit_atoms(f),
            Formula::And(cs) | Formula::Or(cs) | Formula::Exactly(_, cs) => {
                for c in cs {
                    c.visit_atoms(f);
                }
            }
        }
    }

    /// Evaluates under an arbitrary atom assignment.
    pub fn eval_with(&self, val: &impl Fn(&A) -> bool) -> bool {
        match self {
            Formula::Atom(a) => val(a),
            Formula::Not(c) => !c.eval_with(val),
            Formula::And(cs) => cs.iter().all(|c| c.eval_with(val)),
            Formula::Or(cs) => cs.iter().any(|c| c.eval_with(val)),
            Formula::Exactly(k, cs) => cs.iter().filter(|c| c.eval_with(val)).count() == *k,
        }
    }

    /// Replaces atoms structurally without canonicalizing.
    pub fn map_atoms<B>(&self, f: &impl Fn(&A) -> B) -> Formula<B> {
        match self {
            Formula::Atom(a) => Formula::Atom(f(a)),
            Formula::Not(c) => Formula::Not(Box::new(c.map_atoms(f))),
            Formula::And(cs) => Formula::And(cs.iter().map(|c| c.map_atoms(f)).collect()),
            Formula::Or(cs) => Formula::Or(cs.iter().map(|c| c.map_atoms(f)).collect()),
            Formula::Exactly(k, cs) => Formula::Exactly(*k, cs.iter().map(|c| c.map_atoms(f)).collect()),
        }
    }
}

impl<A: Ord + Clone> Formula<A> {
    pub fn atom(a: A) -> Self {
        Formula::Atom(a)
    }

    /// Canonical negation of a canonical formula.
    pub fn not(f: Formula<A>) -> Self {
        match f {
            Formula::Not(inner) => *inner,
            Formula::And(c) if c.is_empty() => Formula::bottom(),
            Formula::Or(c) if c.is_empty() => Formula::top(),
            other => Formula::Not(Box::new(other)),
        }
    }

    /// Canonical conjunction of canonical formulae.
    pub fn and(children: impl IntoIterator<Item = Formula<A>>) -> Self {
        let mut flat = Vec::new();
        for c in children {
            match c {
                Formula::And(inner) => flat.extend(inner),
                Formula::Or(inner) if inner.is_empty() => return Formula::bottom(),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Formula::And(flat)
        }
    }

    /// Canonical disjunction of canonical formulae.
    pub fn or(children: impl IntoIterator<Item = Formula<A>>) -> Self {
        let mut flat = Vec::new();
        for c in children {
            match c {
                Formula::Or(inner) => flat.extend(inner),
                Formula::And(inner) if inner.is_empty() => return Formula::top(),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Formula::Or(flat)
        }
    }

    /// Canonical `exactly_k` of canonical formulae. Children form a
    /// multiset: duplicates are kept and each occurrence counts.
    pub fn exactly(k: usize, children: impl IntoIterator<Item = Formula<A>>) -> Self {
        let mut rest = Vec::new();
        let mut forced = 0usize;
        for c in children {
            match c.constant() {
                Some(true) => forced += 1,
                Some(false) => {}
                None => rest.push(c),
            }
        }
        if forced > k {
            return Formula::bottom();
        }
        let k = k - forced;
        if k > rest.len() {
            return Formula::bottom();
        }
        if k == 0 {
            return Formula::and(rest.into_iter().map(Formula::not));
        }
        if k == rest.len() {
            return Formula::and(rest);
        }
        rest.sort();
        Formula::Exactly(k, rest)
    }

    /// `at least k` expressed with the available connectives.
    pub fn at_least(k: usize, children: Vec<Formula<A>>) -> Self {
        let m = children.len();
        if k == 0 {
            return Formula::top();
        }
        if k > m {
            return Formula::bottom();
        }
        if k == 1 {
            return Formula::or(children);
        }
        if k == m {
            return Formula::and(children);
        }
        // fewer exactly-nodes on whichever side is shorter
        if m - k < k {
            Formula::or((k..=m).map(|i| Formula::exactly(i, children.clone())))
        } else {
            Formula::not(Formula::or((0..k).map(|i| Formula::exactly(i, children.clone()))))
        }
    }

    /// Rebuilds the formula bottom-up through the canonical constructors.
    pub fn canonicalize(&self) -> Self {
        match self {
            Formula::Atom(a) => Formula::Atom(a.clone()),
            Formula::Not(c) => Formula::not(c.canonicalize()),
            Formula::And(cs) => Formula::and(cs.iter().map(Formula::canonicalize)),
            Formula::Or(cs) => Formula::or(cs.iter().map(Formula::canonicalize)),
            Formula::Exactly(k, cs) => Formula::exactly(*k, cs.iter().map(Formula::canonicalize)),
        }
    }

    /// Substitutes every atom by a formula and canonicalizes the result.
    pub fn substitute<B: Ord + Clone>(&self, f: &impl Fn(&A) -> Formula<B>) -> Formula<B> {
        match self {
            Formula::Atom(a) => f(a),
            Formula::Not(c) => Formula::not(c.substitute(f)),
            Formula::And(cs) => Formula::and(cs.iter().map(|c| c.substitute(f))),
            Formula::Or(cs) => Formula::or(cs.iter().map(|c| c.substitute(f))),
            Formula::Exactly(k, cs) => Formula::exactly(*k, cs.iter().map(|c| c.substitute(f))),
        }
    }

    pub fn atom_set(&self) -> BTreeSet<A> {
        let mut s = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            s.insert(a.clone());
        });
        s
    }
}

/// Total assignment of truth values to the variables `0..len`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Valuation(Vec<bool>);

impl Valuation {
    pub fn new(values: Vec<bool>) -> Self {
        Valuation(values)
    }

    pub fn all_false(n: usize) -> Self {
        Valuation(vec![false; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: Var) -> Option<bool> {
        self.0.get(v.index()).copied()
    }

    pub fn set(&mut self, v: Var, value: bool) {
        self.0[v.index()] = value;
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }

    pub fn true_vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| Var(i as u32))
    }

    /// Enumerates all `2^n` valuations in binary counting order.
    pub fn all(n: usize) -> impl Iterator<Item = Valuation> {
        assert!(n < 31, "truth-table enumeration limited to 30 variables");
        (0u32..(1u32 << n)).map(move |bits| Valuation((0..n).map(|i| bits >> i & 1 == 1).collect()))
    }
}

impl Formula<Var> {
    pub fn var(v: u32) -> Self {
        Formula::Atom(Var(v))
    }

    pub fn lit(v: Var, positive: bool) -> Self {
        if positive {
            Formula::Atom(v)
        } else {
            Formula::Not(Box::new(Formula::Atom(v)))
        }
    }

    pub fn evaluate(&self, v: &Valuation) -> Result<bool, FormulaError> {
        let mut bad = None;
        self.visit_atoms(&mut |a: &Var| {
            if a.index() >= v.len() && bad.is_none() {
                bad = Some(a.0);
            }
        });
        if let Some(b) = bad {
            return Err(FormulaError::UnknownVariable(b, v.len()));
        }
        Ok(self.eval_with(&|a: &Var| v.0[a.index()]))
    }

    /// Largest variable index plus one.
    pub fn var_bound(&self) -> usize {
        let mut m = 0;
        self.visit_atoms(&mut |a: &Var| m = m.max(a.index() + 1));
        m
    }

    pub fn apply_permutation(&self, pi: &Permutation) -> Formula<Var> {
        self.map_atoms(&|a: &Var| pi.apply(*a))
    }

    /// Replaces the given variables by constants, folding the result.
    pub fn assign(&self, fixed: &impl Fn(Var) -> Option<bool>) -> Formula<Var> {
        self.substitute(&|a: &Var| match fixed(*a) {
            Some(true) => Formula::top(),
            Some(false) => Formula::bottom(),
            None => Formula::Atom(*a),
        })
    }
}

/// Bijection on the variables `0..len`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<Var>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n as u32).map(Var).collect())
    }

    pub fn new(image: Vec<Var>) -> Result<Self, FormulaError> {
        let n = image.len();
        let mut seen = vec![false; n];
        for v in &image {
            if v.index() >= n || std::mem::replace(&mut seen[v.index()], true) {
                return Err(FormulaError::NotBijective(n));
            }
        }
        Ok(Permutation(image))
    }

    pub fn transpositions(n: usize, pairs: &[(Var, Var)]) -> Self {
        let mut p = Self::identity(n);
        for &(a, b) in pairs {
            p.0.swap(a.index(), b.index());
        }
        p
    }

    #[inline]
    pub fn apply(&self, v: Var) -> Var {
        self.0.get(v.index()).copied().unwrap_or(v)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![Var(0); self.0.len()];
        for (i, v) in self.0.iter().enumerate() {
            inv[v.index()] = Var(i as u32);
        }
        Permutation(inv)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, v)| v.index() == i)
    }

    pub fn image(&self) -> &[Var] {
        &self.0
    }

    /// `v ∘ π`: the valuation assigning `v(π(x))` to each `x`.
    pub fn pull_back(&self, v: &Valuation) -> Valuation {
        Valuation((0..v.len()).map(|i| v.0[self.apply(Var(i as u32)).index()]).collect())
    }
}

/// Pretty printer using caller-supplied atom names.
pub struct Display<'a, A, F: Fn(&A) -> String> {
    pub formula: &'a Formula<A>,
    pub name: F,
}

impl<A, F: Fn(&A) -> String> fmt::Display for Display<'_, A, F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self.formula, &self.name, f, false)
    }
}

fn write_formula<A>(
    node: &Formula<A>,
    name: &impl Fn(&A) -> String,
    f: &mut fmt::Formatter<'_>,
    nested: bool,
) -> fmt::Result {
    match node {
        Formula::Atom(a) => write!(f, "{}", name(a)),
        Formula::Not(c) => {
            write!(f, "!")?;
            write_formula(c, name, f, true)
        }
        Formula::And(cs) if cs.is_empty() => write!(f, "true"),
        Formula::Or(cs) if cs.is_empty() => write!(f, "false"),
        Formula::And(cs) | Formula::Or(cs) => {
            let op = if matches!(node, Formula::And(_)) { " & " } else { " | " };
            if nested {
                write!(f, "(")?;
            }
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    write!(f, "{op}")?;
                }
                write_formula(c, name, f, true)?;
            }
            if nested {
                write!(f, ")")?;
            }
            Ok(())
        }
        Formula::Exactly(k, cs) => {
            write!(f, "exactly<{k}>(")?;
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_formula(c, name, f, false)?;
            }
            write!(f, ")")
        }
    }
}
