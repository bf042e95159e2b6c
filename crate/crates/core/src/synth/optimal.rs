use std::collections::HashMap;
use std::sync::Arc;

use super::{informative, DecisionTree, Node, SynthError, SynthOptions};
use crate::context::{Context, Knowledge};
use crate::formula::Formula;
use crate::game::ExperimentInstance;
use crate::satcore::CodeSet;
use crate::symmetry::{knowledge_key, CanonicalKey, GraphEncoding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Worst,
    Avg,
}

/// `⌈log_q n⌉`: no tree with out-degree `q` separates `n` codes in fewer
/// rounds.
pub fn worst_lower_bound(n: u64, q: u64) -> u64 {
    if n <= 1 {
        return 0;
    }
    if q < 2 {
        return u64::MAX;
    }
    let (mut d, mut reach) = (0, 1u64);
    while reach < n {
        reach = reach.saturating_mul(q);
        d += 1;
    }
    d
}

/// Minimum external path length of a tree with `n` leaves and out-degree
/// at most `q`.
pub fn avg_lower_bound(n: u64, q: u64) -> u64 {
    if n <= 1 {
        return 0;
    }
    if q < 2 {
        return u64::MAX;
    }
    let d = worst_lower_bound(n, q);
    let full = q.pow(d as u32 - 1);
    let expanded = (n - full).div_ceil(q - 1);
    (d - 1) * (full - expanded) + d * (n - full + expanded)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Entry {
    Exact(u64),
    /// Cost is at least this.
    AtLeast(u64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub calls: u64,
    pub set_hits: u64,
    pub key_hits: u64,
    pub keys: u64,
}

type Candidates = Arc<Vec<(ExperimentInstance, Vec<CodeSet>)>>;

/// Branch-and-bound search for cost-optimal strategies.
///
/// Costs are integers: for `Worst` the number of experiments in the worst
/// case, for `Avg` the sum of play lengths over the models, so the average
/// is the cost divided by the model count. Bounds are inclusive.
pub struct OptimalSolver<'a> {
    ctx: &'a Context,
    mode: Mode,
    opts: SynthOptions,
    out: u64,
    by_set: HashMap<CodeSet, Entry>,
    by_key: HashMap<CanonicalKey, Entry>,
    set_key: HashMap<CodeSet, CanonicalKey>,
    cands: HashMap<CodeSet, Candidates>,
    stats: SearchStats,
}

impl<'a> OptimalSolver<'a> {
    /// Knowledge is tracked by model set alone, so the models encoding is
    /// used whatever `opts.encoding` says.
    pub fn new(ctx: &'a Context, mode: Mode, opts: SynthOptions) -> Self {
        let opts = SynthOptions {
            encoding: GraphEncoding::Models,
            ..opts
        };
        OptimalSolver {
            ctx,
            mode,
            opts,
            out: ctx.game().max_outcomes() as u64,
            by_set: HashMap::new(),
            by_key: HashMap::new(),
            set_key: HashMap::new(),
            cands: HashMap::new(),
            stats: SearchStats::default(),
        }
    }

    pub fn stats(&self) -> SearchStats {
        self.stats
    }

    fn lower(&self, n: u64) -> u64 {
        match self.mode {
            Mode::Worst => worst_lower_bound(n, self.out),
            Mode::Avg => avg_lower_bound(n, self.out),
        }
    }

    fn experiment_lower(&self, n: u64, parts: &[CodeSet]) -> u64 {
        match self.mode {
            Mode::Worst => 1 + parts.iter().map(|p| self.lower(p.count())).max().unwrap_or(0),
            Mode::Avg => n + parts.iter().map(|p| self.lower(p.count())).sum::<u64>(),
        }
    }

    fn knowledge(models: CodeSet) -> Knowledge {
        // the models encoding reads only the model set
        Knowledge {
            formula: Formula::top(),
            models,
        }
    }

    fn candidates(&mut self, models: &CodeSet) -> Candidates {
        if let Some(c) = self.cands.get(models) {
            return c.clone();
        }
        let k = Self::knowledge(models.clone());
        let p1 = crate::symmetry::phase1(self.ctx, &k);
        let kept: Vec<ExperimentInstance> = informative(self.ctx, &k, p1).into_iter().map(|(e, _)| e).collect();
        let reps = if self.opts.phase2 && kept.len() > 1 {
            crate::symmetry::phase2(self.ctx, &k, &kept, self.opts.encoding)
        } else {
            kept
        };
        let c: Candidates = Arc::new(
            reps.into_iter()
                .map(|e| {
                    let mut parts: Vec<CodeSet> = self
                        .ctx
                        .partition(&k, &e)
                        .into_iter()
                        .filter(|p| !p.is_empty())
                        .collect();
                    parts.sort_by_key(|p| std::cmp::Reverse(p.count()));
                    (e, parts)
                })
                .collect(),
        );
        self.cands.insert(models.clone(), c.clone());
        c
    }

    fn lookup(&mut self, models: &CodeSet) -> Option<Entry> {
        if let Some(e) = self.by_set.get(models) {
            self.stats.set_hits += 1;
            return Some(*e);
        }
        let key = self.key(models);
        let e = self.by_key.get(&key).copied();
        if e.is_some() {
            self.stats.key_hits += 1;
        }
        e
    }

    fn key(&mut self, models: &CodeSet) -> CanonicalKey {
        if let Some(k) = self.set_key.get(models) {
            return k.clone();
        }
        self.stats.keys += 1;
        let key = knowledge_key(self.ctx, &Self::knowledge(models.clone()), self.opts.encoding);
        self.set_key.insert(models.clone(), key.clone());
        key
    }

    fn store(&mut self, models: &CodeSet, e: Entry) {
        let merged = match (self.by_set.get(models), e) {
            (Some(Entry::AtLeast(a)), Entry::AtLeast(b)) => Entry::AtLeast((*a).max(b)),
            (Some(Entry::Exact(c)), _) => Entry::Exact(*c),
            _ => e,
        };
        self.by_set.insert(models.clone(), merged);
        let key = self.key(models);
        self.by_key.insert(key, merged);
    }

    /// The optimal cost of `models` if it is at most `upper`.
    pub fn solve(&mut self, models: &CodeSet, upper: u64) -> Option<u64> {
        self.stats.calls += 1;
        let n = models.count();
        if n <= 1 {
            return Some(0);
        }
        let lb = self.lower(n);
        if lb > upper {
            return None;
        }
        match self.lookup(models) {
            Some(Entry::Exact(c)) => return (c <= upper).then_some(c),
            Some(Entry::AtLeast(b)) if b > upper => return None,
            _ => {}
        }
        let cands = self.candidates(models);
        let mut order: Vec<(u64, usize, usize)> = cands
            .iter()
            .enumerate()
            .map(|(i, (_, parts))| (self.experiment_lower(n, parts), parts[0].count() as usize, i))
            .collect();
        order.sort_unstable();
        let mut bound = upper;
        let mut best = None;
        for (elb, _, i) in order {
            if elb > bound {
                break;
            }
            if let Some(v) = self.evaluate(n, &cands[i].1, bound) {
                best = Some(v);
                if v <= lb || v == 0 {
                    break;
                }
                bound = v - 1;
            }
        }
        self.store(
            models,
            match best {
                Some(v) => Entry::Exact(v),
                None => Entry::AtLeast(upper.saturating_add(1)),
            },
        );
        best
    }

    /// Cost of playing an experiment with the given parts next, if at most
    /// `bound`.
    fn evaluate(&mut self, n: u64, parts: &[CodeSet], bound: u64) -> Option<u64> {
        match self.mode {
            Mode::Worst => {
                let child = bound.checked_sub(1)?;
                let mut val = 0;
                for p in parts {
                    val = val.max(1 + self.solve(p, child)?);
                }
                Some(val)
            }
            Mode::Avg => {
                let mut rest: u64 = parts.iter().map(|p| self.lower(p.count())).sum();
                let mut acc = n;
                for p in parts {
                    let plb = self.lower(p.count());
                    rest -= plb;
                    let child = bound.checked_sub(acc)?.checked_sub(rest)?;
                    acc += self.solve(p, child)?;
                }
                (acc <= bound).then_some(acc)
            }
        }
    }

    /// The optimal cost of the whole game.
    pub fn optimal_cost(&mut self) -> Result<u64, SynthError> {
        let all = self.ctx.space().all();
        self.solve(&all, u64::MAX - 1).ok_or(SynthError::Unsolvable)
    }

    /// The `⪯`-least optimal experiment at `models` and its cost.
    pub fn choose(&mut self, models: &CodeSet) -> Result<Option<(ExperimentInstance, u64)>, SynthError> {
        if models.count() <= 1 {
            return Ok(None);
        }
        let c = self.solve(models, u64::MAX - 1).ok_or(SynthError::Unsolvable)?;
        let n = models.count();
        let cands = self.candidates(models);
        for (e, parts) in cands.iter() {
            if self.experiment_lower(n, parts) > c {
                continue;
            }
            if self.evaluate(n, parts, c) == Some(c) {
                return Ok(Some((e.clone(), c)));
            }
        }
        Err(SynthError::MalformedTree(
            "no experiment attains the cached optimum".into(),
        ))
    }

    /// Expands optimal choices into a full tree.
    pub fn build_tree(&mut self) -> Result<DecisionTree, SynthError> {
        let mut nodes = Vec::new();
        let root = self.expand(&self.ctx.space().all(), &mut nodes)?;
        Ok(DecisionTree::from_nodes(nodes, root))
    }

    fn expand(&mut self, models: &CodeSet, nodes: &mut Vec<Node>) -> Result<usize, SynthError> {
        let id = nodes.len();
        match self.choose(models)? {
            None => {
                let i = models.first().ok_or(SynthError::Unsolvable)?;
                nodes.push(Node::Leaf {
                    valuation: self.ctx.space().code(i).clone(),
                });
            }
            Some((e, _)) => {
                nodes.push(Node::Internal {
                    experiment: e.clone(),
                    children: Vec::new(),
                });
                let outs = self.ctx.outcome_models(&e);
                let mut children = Vec::new();
                for (o, m) in outs.iter().enumerate() {
                    let part = m.and(models);
                    if !part.is_empty() {
                        children.push((o, self.expand(&part, nodes)?));
                    }
                }
                if let Node::Internal { children: c, .. } = &mut nodes[id] {
                    *c = children;
                }
            }
        }
        Ok(id)
    }
}

/// Optimal strategy tree and its cost for the whole game.
pub fn build_optimal_tree(ctx: &Context, mode: Mode, opts: SynthOptions) -> Result<(DecisionTree, u64), SynthError> {
    let mut s = OptimalSolver::new(ctx, mode, opts);
    let cost = s.optimal_cost()?;
    Ok((s.build_tree()?, cost))
}
