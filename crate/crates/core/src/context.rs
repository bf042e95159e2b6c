//! A game together with its enumerated code space and per-instance caches.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::formula::{Formula, Valuation, Var};
use crate::game::{DeductiveGame, ExperimentInstance};
use crate::satcore::{CodeSet, CodeSpace, FixedSet, SatCore, SatError, DEFAULT_MODEL_CAP};
use crate::symmetry::{interchangeable_positions, BaseGraph, SwapCache};

/// Accumulated knowledge `φ0 ∧ ξ1 ∧ … ∧ ξn` with its model set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Knowledge {
    pub formula: Formula<Var>,
    pub models: CodeSet,
}

impl Knowledge {
    pub fn count(&self) -> u64 {
        self.models.count()
    }

    pub fn is_satisfiable(&self) -> bool {
        !self.models.is_empty()
    }
}

pub struct Context {
    game: DeductiveGame,
    space: CodeSpace,
    base: BaseGraph,
    faithful: Vec<bool>,
    interchangeable: Vec<Vec<(usize, usize)>>,
    swaps: SwapCache,
    outcome_models: RwLock<HashMap<ExperimentInstance, Arc<Vec<CodeSet>>>>,
}

impl Context {
    pub fn new(game: DeductiveGame) -> Result<Self, SatError> {
        Self::with_model_cap(game, DEFAULT_MODEL_CAP)
    }

    pub fn with_model_cap(game: DeductiveGame, cap: u64) -> Result<Self, SatError> {
        let core = SatCore::new(game.num_vars()).with_model_cap(cap);
        let space = CodeSpace::enumerate(&core, game.constraint())?;
        let base = BaseGraph::build(&game);
        let faithful = (0..game.experiments().len()).map(|t| game.is_faithful(t)).collect();
        let interchangeable = game.experiments().iter().map(interchangeable_positions).collect();
        Ok(Context {
            game,
            space,
            base,
            faithful,
            interchangeable,
            swaps: SwapCache::default(),
            outcome_models: RwLock::new(HashMap::new()),
        })
    }

    pub fn game(&self) -> &DeductiveGame {
        &self.game
    }

    pub fn space(&self) -> &CodeSpace {
        &self.space
    }

    pub fn base(&self) -> &BaseGraph {
        &self.base
    }

    pub fn is_faithful(&self, t: usize) -> bool {
        self.faithful[t]
    }

    /// See [`interchangeable_positions`].
    pub fn interchangeable(&self, t: usize) -> &[(usize, usize)] {
        &self.interchangeable[t]
    }

    pub fn swaps(&self) -> &SwapCache {
        &self.swaps
    }

    pub fn initial(&self) -> Knowledge {
        Knowledge {
            formula: self.game.constraint().clone(),
            models: self.space.all(),
        }
    }

    /// Models in `Val(φ0)` of each outcome of `e`.
    pub fn outcome_models(&self, e: &ExperimentInstance) -> Arc<Vec<CodeSet>> {
        if let Some(v) = self.outcome_models.read().expect("cache lock").get(e) {
            return v.clone();
        }
        let sets = Arc::new(self.compute_outcome_models(e));
        self.outcome_models
            .write()
            .expect("cache lock")
            .entry(e.clone())
            .or_insert(sets)
            .clone()
    }

    /// Uncached [`outcome_models`](Self::outcome_models).
    pub fn compute_outcome_models(&self, e: &ExperimentInstance) -> Vec<CodeSet> {
        // instantiation simplifies repeated parameters away, which pays off
        // over evaluating the templates directly
        self.game.outcomes(e).iter().map(|f| self.space.models(f)).collect()
    }

    /// The parts `Val(φ ∧ ξ)` cut out of `k` by each outcome of `e`.
    pub fn partition(&self, k: &Knowledge, e: &ExperimentInstance) -> Vec<CodeSet> {
        self.outcome_models(e).iter().map(|m| m.and(&k.models)).collect()
    }

    /// `Updates[φ, e]`, unsatisfiable members included.
    pub fn updates(&self, k: &Knowledge, e: &ExperimentInstance) -> Vec<Knowledge> {
        let outs = self.game.outcomes(e);
        self.partition(k, e)
            .into_iter()
            .zip(outs)
            .map(|(models, xi)| Knowledge {
                formula: Formula::and([k.formula.clone(), xi]),
                models,
            })
            .collect()
    }

    pub fn update(&self, k: &Knowledge, e: &ExperimentInstance, outcome: usize) -> Knowledge {
        let xi = self.game.outcomes(e).swap_remove(outcome);
        Knowledge {
            formula: Formula::and([k.formula.clone(), xi]),
            models: k.models.and(&self.outcome_models(e)[outcome]),
        }
    }

    pub fn fixed(&self, k: &Knowledge) -> FixedSet {
        self.space.fixed_in(&k.models)
    }

    /// The unique model of a solved knowledge state.
    pub fn solution(&self, k: &Knowledge) -> Option<&Valuation> {
        (k.count() == 1).then(|| self.space.code(k.models.first().expect("one model")))
    }
}
