//! Small CDCL solver: two watched literals, first-UIP learning,
//! activity-based branching and assumption literals.

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn new(var: u32, positive: bool) -> Lit {
        Lit(var << 1 | (!positive) as u32)
    }
    #[inline]
    pub fn var(self) -> u32 {
        self.0 >> 1
    }
    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }
    #[inline]
    fn code(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    True,
    False,
    Unassigned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveResult {
    Sat,
    Unsat,
}

#[derive(Debug, Default, Clone)]
pub struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    assigns: Vec<Value>,
    level: Vec<usize>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    bump: f64,
    seen: Vec<bool>,
    model: Vec<bool>,
    // set when a clause is empty or contradicts level-0 facts
    inconsistent: bool,
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            bump: 1.0,
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn new_var(&mut self) -> u32 {
        let v = self.assigns.len() as u32;
        self.assigns.push(Value::Unassigned);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        v
    }

    pub fn ensure_vars(&mut self, n: usize) {
        while self.assigns.len() < n {
            self.new_var();
        }
    }

    #[inline]
    fn value(&self, l: Lit) -> Value {
        match self.assigns[l.var() as usize] {
            Value::Unassigned => Value::Unassigned,
            Value::True if l.is_positive() => Value::True,
            Value::False if !l.is_positive() => Value::True,
            _ => Value::False,
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    /// Adds a clause permanently. Must be called at decision level 0.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        if self.inconsistent {
            return;
        }
        self.cancel_until(0);
        let max_var = lits.iter().map(|l| l.var() as usize + 1).max().unwrap_or(0);
        self.ensure_vars(max_var);
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort();
        c.dedup();
        // tautology or already satisfied at level 0
        if c.windows(2).any(|w| w[0] == !w[1]) || c.iter().any(|&l| self.value(l) == Value::True) {
            return;
        }
        c.retain(|&l| self.value(l) != Value::False);
        match c.len() {
            0 => self.inconsistent = true,
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.inconsistent = true;
                }
            }
            _ => {
                let idx = self.clauses.len();
                self.watches[(!c[0]).code()].push(idx);
                self.watches[(!c[1]).code()].push(idx);
                self.clauses.push(c);
            }
        }
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = l.var() as usize;
        self.assigns[v] = if l.is_positive() { Value::True } else { Value::False };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation; returns a conflicting clause index.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            // clauses watching !p are now falsified on that watch
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let mut i = 0;
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                let false_lit = !p;
                {
                    let c = &mut self.clauses[ci];
                    if c[0] == false_lit {
                        c.swap(0, 1);
                    }
                }
                let first = self.clauses[ci][0];
                if self.value(first) == Value::True {
                    i += 1;
                    continue;
                }
                let len = self.clauses[ci].len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[ci][k];
                    if self.value(l) != Value::False {
                        self.clauses[ci].swap(1, k);
                        self.watches[(!l).code()].push(ci);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                if self.value(first) == Value::False {
                    conflict = Some(ci);
                    break;
                }
                self.enqueue(first, Some(ci));
                i += 1;
            }
            let rest = std::mem::take(&mut self.watches[p.code()]);
            ws.extend(rest);
            self.watches[p.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let start = self.trail_lim[lvl];
        for l in self.trail.drain(start..) {
            let v = l.var() as usize;
            self.assigns[v] = Value::Unassigned;
            self.reason[v] = None;
        }
        self.trail_lim.truncate(lvl);
        self.qhead = self.trail.len();
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.bump;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.bump *= 1e-100;
        }
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, usize) {
        let mut learnt = vec![Lit(0)];
        let mut pending = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level();
        loop {
            let clause = self.clauses[confl].clone();
            for &q in clause.iter() {
                if Some(q) == p {
                    continue;
                }
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            // next literal on the trail to resolve on
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var() as usize] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            self.seen[lit.var() as usize] = false;
            pending -= 1;
            if pending == 0 {
                learnt[0] = !lit;
                break;
            }
            confl = self.reason[lit.var() as usize].expect("implied literal has a reason");
        }
        for l in &learnt[1..] {
            self.seen[l.var() as usize] = false;
        }
        let mut back = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var() as usize] > self.level[learnt[max_i].var() as usize] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            back = self.level[learnt[1].var() as usize];
        }
        self.bump *= 1.05;
        (learnt, back)
    }

    fn pick_branch(&self) -> Option<u32> {
        let mut best: Option<usize> = None;
        for v in 0..self.assigns.len() {
            if self.assigns[v] == Value::Unassigned && best.is_none_or(|b| self.activity[v] > self.activity[b]) {
                best = Some(v);
            }
        }
        best.map(|v| v as u32)
    }

    /// Solves under the given assumption literals. Learnt clauses are kept.
    pub fn solve(&mut self, assumptions: &[Lit]) -> SolveResult {
        if self.inconsistent {
            return SolveResult::Unsat;
        }
        let max_var = assumptions.iter().map(|l| l.var() as usize + 1).max().unwrap_or(0);
        self.ensure_vars(max_var);
        self.cancel_until(0);
        if self.propagate().is_some() {
            self.inconsistent = true;
            return SolveResult::Unsat;
        }
        loop {
            if let Some(confl) = self.propagate() {
                if self.decision_level() == 0 {
                    self.inconsistent = true;
                    return SolveResult::Unsat;
                }
                let (learnt, back) = self.analyze(confl);
                self.cancel_until(back);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let idx = self.clauses.len();
                    self.watches[(!learnt[0]).code()].push(idx);
                    self.watches[(!learnt[1]).code()].push(idx);
                    let asserting = learnt[0];
                    self.clauses.push(learnt);
                    self.enqueue(asserting, Some(idx));
                }
                continue;
            }
            let lvl = self.decision_level();
            if lvl < assumptions.len() {
                let a = assumptions[lvl];
                match self.value(a) {
                    Value::True => {
                        // keep levels aligned with assumption indices
                        self.trail_lim.push(self.trail.len());
                    }
                    Value::False => {
                        self.cancel_until(0);
                        return SolveResult::Unsat;
                    }
                    Value::Unassigned => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(a, None);
                    }
                }
                continue;
            }
            match self.pick_branch() {
                None => {
                    self.model = self.assigns.iter().map(|a| *a == Value::True).collect();
                    self.cancel_until(0);
                    return SolveResult::Sat;
                }
                Some(v) => {
                    self.trail_lim.push(self.trail.len());
                    self.enqueue(Lit::new(v, false), None);
                }
            }
        }
    }

    /// Model of the last satisfiable call.
    pub fn model(&self) -> &[bool] {
        &self.model
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(v: i32) -> Lit {
        Lit::new(v.unsigned_abs() - 1, v > 0)
    }

    fn brute(n: u32, cls: &[Vec<i32>]) -> bool {
        (0..1u32 << n).any(|m| {
            cls.iter()
                .all(|c| c.iter().any(|&x| ((m >> (x.unsigned_abs() - 1)) & 1 == 1) == (x > 0)))
        })
    }

    #[test]
    fn trivial_cases() {
        let mut s = Solver::new();
        s.add_clause(&[l(1)]);
        assert_eq!(s.solve(&[]), SolveResult::Sat);
        assert_eq!(s.solve(&[l(-1)]), SolveResult::Unsat);
        assert_eq!(s.solve(&[]), SolveResult::Sat);
        s.add_clause(&[l(-1)]);
        assert_eq!(s.solve(&[]), SolveResult::Unsat);
    }

    #[test]
    fn pigeonhole_three_into_two_is_unsat() {
        let mut s = Solver::new();
        // p(i,h) = var 2*i + h + 1
        let p = |i: i32, h: i32| 2 * i + h + 1;
        for i in 0..3 {
            s.add_clause(&[l(p(i, 0)), l(p(i, 1))]);
        }
        for h in 0..2 {
            for i in 0..3 {
                for j in i + 1..3 {
                    s.add_clause(&[l(-p(i, h)), l(-p(j, h))]);
                }
            }
        }
        assert_eq!(s.solve(&[]), SolveResult::Unsat);
    }

    #[test]
    fn random_3sat_agrees_with_brute_force() {
        let mut seed = 0x2545F4914F6CDD1Du64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..300 {
            let n = 3 + (next() % 8) as u32;
            let m = (next() % (5 * n as u64)) as usize;
            let cls: Vec<Vec<i32>> = (0..m)
                .map(|_| {
                    (0..3)
                        .map(|_| {
                            let v = (next() % n as u64) as i32 + 1;
                            if next() & 1 == 0 {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            let mut s = Solver::new();
            s.ensure_vars(n as usize);
            for c in &cls {
                s.add_clause(&c.iter().map(|&x| l(x)).collect::<Vec<_>>());
            }
            let r = s.solve(&[]);
            assert_eq!(r == SolveResult::Sat, brute(n, &cls), "{cls:?}");
            if r == SolveResult::Sat {
                let m = s.model();
                assert!(cls
                    .iter()
                    .all(|c| c.iter().any(|&x| m[(x.unsigned_abs() - 1) as usize] == (x > 0))));
            }
        }
    }
}
