use thiserror::Error;

use super::Diagnostic;
use crate::formula::{Formula, Var};
use crate::game::{
    Atom, AttrId, Attribute, DeductiveGame, GameError, InstanceKind, Outcome, ParameterizedExperiment, Template,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("a counterfeit-coin game needs at least one coin")]
    NoCoins,
    #[error("Mastermind needs at least one peg and one colour")]
    EmptyMastermind,
    #[error("Mastermind with {0} pegs is too large for the marker encoding")]
    TooManyPegs(usize),
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MastermindVariant {
    Classic,
    /// adds a query for every position holding a given colour
    Color,
    /// adds a query for the colour of each peg
    Position,
}

fn d(pos: usize) -> Template {
    Formula::Atom(Atom::Attr { attr: AttrId(0), pos })
}

/// `N` coins, one of which is lighter or heavier; `y` means heavier.
/// Experiment `t_m` weighs coins `$1..$m` against `$m+1..$2m`.
pub fn gen_ccp(n: usize) -> Result<DeductiveGame, GenError> {
    if n == 0 {
        return Err(GenError::NoCoins);
    }
    let mut vars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    vars.push("y".into());
    let y: Template = Formula::Atom(Atom::Var(Var(n as u32)));
    let not_y = Formula::not(y.clone());
    let constraint = Formula::exactly(1, (0..n as u32).map(Formula::var));
    let params = (1..=n).map(|i| format!("coin{i}")).collect();
    let attrs = vec![Attribute {
        name: "d".into(),
        mapping: (0..n as u32).map(Var).collect(),
    }];
    let experiments = (1..=n / 2)
        .map(|m| {
            let left = || Formula::or((0..m).map(d));
            let right = || Formula::or((m..2 * m).map(d));
            let lighter = Formula::or([
                Formula::and([left(), not_y.clone()]),
                Formula::and([right(), y.clone()]),
            ]);
            let balanced = Formula::and((0..2 * m).map(|i| Formula::not(d(i))));
            let heavier = Formula::or([
                Formula::and([left(), y.clone()]),
                Formula::and([right(), not_y.clone()]),
            ]);
            ParameterizedExperiment::new(
                format!("t{m}"),
                2 * m,
                InstanceKind::Distinct,
                vec![
                    Outcome {
                        label: "<".into(),
                        template: lighter,
                    },
                    Outcome {
                        label: "=".into(),
                        template: balanced,
                    },
                    Outcome {
                        label: ">".into(),
                        template: heavier,
                    },
                ],
            )
        })
        .collect();
    Ok(DeductiveGame::new(vars, constraint, params, attrs, experiments)?)
}

/// Fewer than three coins cannot be solved by any number of weighings.
pub fn ccp_warning(n: usize) -> Option<Diagnostic> {
    (n < 3).then(|| {
        Diagnostic::warning(
            0,
            0,
            format!("CCP with {n} coins has no solving strategy; at least 3 coins are needed"),
        )
    })
}

pub fn color_name(c: usize, j: usize) -> String {
    if c <= 26 {
        ((b'A' + j as u8) as char).to_string()
    } else {
        format!("c{}", j + 1)
    }
}

fn peg(i: usize, pos: usize) -> Template {
    Formula::Atom(Atom::Attr {
        attr: AttrId(i as u32),
        pos,
    })
}

/// At least `t` colour matches between code and guess, counting
/// multiplicities: the bipartite "same colour" graph between code pegs
/// and guess positions has a matching of size `t`. By the deficiency form
/// of Hall's theorem this holds iff every set `S` of guess positions has
/// at least `|S| - (n - t)` code pegs matching some position in `S`.
fn at_least_matches(n: usize, t: usize) -> Template {
    if t == 0 {
        return Formula::top();
    }
    if t > n {
        return Formula::bottom();
    }
    let mut conds = Vec::new();
    for mask in 1u32..(1 << n) {
        let s: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
        if s.len() + t <= n {
            continue;
        }
        let need = s.len() + t - n;
        let hits: Vec<Template> = (0..n).map(|i| Formula::or(s.iter().map(|&j| peg(i, j)))).collect();
        conds.push(Formula::at_least(need, hits));
    }
    Formula::and(conds)
}

/// Marker pairs `(black, white)` that the scoring rule can produce.
pub fn marker_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for b in 0..=n {
        for w in 0..=n - b {
            if !(b + 1 == n && w == 1) {
                out.push((b, w));
            }
        }
    }
    out
}

pub fn marker_label(b: usize, w: usize) -> String {
    format!("{b}B{w}W")
}

/// `n` pegs, `c` colours; `x{i}_{j}` means peg `i` has colour `j`.
pub fn gen_mastermind(n: usize, c: usize, variant: MastermindVariant) -> Result<DeductiveGame, GenError> {
    if n == 0 || c == 0 {
        return Err(GenError::EmptyMastermind);
    }
    if n > 12 {
        return Err(GenError::TooManyPegs(n));
    }
    let var = |i: usize, j: usize| Var((i * c + j) as u32);
    let mut vars = Vec::new();
    for i in 0..n {
        for j in 0..c {
            vars.push(format!("x{}_{}", i + 1, j + 1));
        }
    }
    let constraint = Formula::and((0..n).map(|i| Formula::exactly(1, (0..c).map(|j| Formula::Atom(var(i, j))))));
    let params = (0..c).map(|j| color_name(c, j)).collect();
    let attrs = (0..n)
        .map(|i| Attribute {
            name: format!("peg{}", i + 1),
            mapping: (0..c).map(|j| var(i, j)).collect(),
        })
        .collect();

    let geq: Vec<Template> = (0..=n + 1).map(|t| at_least_matches(n, t)).collect();
    let guess_outcomes = marker_pairs(n)
        .into_iter()
        .map(|(b, w)| {
            let t = b + w;
            let template = Formula::and([
                Formula::exactly(b, (0..n).map(|i| peg(i, i))),
                geq[t].clone(),
                Formula::not(geq[t + 1].clone()),
            ]);
            Outcome {
                label: marker_label(b, w),
                template,
            }
        })
        .collect();
    let mut experiments = vec![ParameterizedExperiment::new(
        "guess",
        n,
        InstanceKind::All,
        guess_outcomes,
    )];

    match variant {
        MastermindVariant::Classic => {}
        MastermindVariant::Color => {
            let outcomes = (0u32..1 << n)
                .map(|mask| {
                    let hit: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                    let label = if hit.is_empty() {
                        "none".to_string()
                    } else {
                        hit.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
                    };
                    let template = Formula::and((0..n).map(|i| {
                        if mask >> i & 1 == 1 {
                            peg(i, 0)
                        } else {
                            Formula::not(peg(i, 0))
                        }
                    }));
                    Outcome { label, template }
                })
                .collect();
            experiments.push(ParameterizedExperiment::new("col", 1, InstanceKind::All, outcomes));
        }
        MastermindVariant::Position => {
            for i in 0..n {
                let outcomes = (0..c)
                    .map(|j| Outcome {
                        label: color_name(c, j),
                        template: Formula::Atom(Atom::Var(var(i, j))),
                    })
                    .collect();
                experiments.push(ParameterizedExperiment::new(
                    format!("pos{}", i + 1),
                    0,
                    InstanceKind::All,
                    outcomes,
                ));
            }
        }
    }
    Ok(DeductiveGame::new(vars, constraint, params, attrs, experiments)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Valuation;
    use crate::game::{ExperimentInstance, Param};

    /// Standard scoring: blacks are exact matches, whites the remaining
    /// colour matches counted with multiplicity.
    fn score(code: &[usize], guess: &[usize], c: usize) -> (usize, usize) {
        let b = code.iter().zip(guess).filter(|(a, b)| a == b).count();
        let total: usize = (0..c)
            .map(|col| {
                let x = code.iter().filter(|&&v| v == col).count();
                let y = guess.iter().filter(|&&v| v == col).count();
                x.min(y)
            })
            .sum();
        (b, total - b)
    }

    fn all_codes(n: usize, c: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|p| (0..c).map(move |j| [p.clone(), vec![j]].concat()))
                .collect();
        }
        out
    }

    fn valuation(code: &[usize], c: usize) -> Valuation {
        let mut v = Valuation::all_false(code.len() * c);
        for (i, &j) in code.iter().enumerate() {
            v.set(Var((i * c + j) as u32), true);
        }
        v
    }

    #[test]
    fn marker_outcomes_match_scoring() {
        for (n, c) in [(2, 3), (3, 3), (4, 2), (3, 4)] {
            let g = gen_mastermind(n, c, MastermindVariant::Classic).unwrap();
            let pairs = marker_pairs(n);
            for guess in all_codes(n, c) {
                let e = ExperimentInstance {
                    experiment: 0,
                    params: guess.iter().map(|&j| Param(j as u32)).collect(),
                };
                for code in all_codes(n, c) {
                    let got = g.evaluate_experiment(&e, &valuation(&code, c)).unwrap();
                    assert_eq!(pairs[got.outcome], score(&code, &guess, c), "{code:?} {guess:?}");
                }
            }
        }
    }

    #[test]
    fn classic_example_guess() {
        // code BACC, guess CCAC
        let g = gen_mastermind(4, 6, MastermindVariant::Classic).unwrap();
        let e = ExperimentInstance {
            experiment: 0,
            params: [2, 2, 0, 2].map(Param).to_vec(),
        };
        let got = g.evaluate_experiment(&e, &valuation(&[1, 0, 2, 2], 6)).unwrap();
        assert_eq!(g.outcome_label(&got), "1B2W");
        assert_eq!(g.experiment(0).outcomes.len(), 14);
    }

    #[test]
    fn ccp_sizes() {
        assert_eq!(gen_ccp(4).unwrap().experiments().len(), 2);
        assert_eq!(gen_ccp(26).unwrap().experiments().len(), 13);
        assert_eq!(gen_ccp(50).unwrap().experiments().len(), 25);
        assert!(ccp_warning(2).is_some());
        assert!(ccp_warning(3).is_none());
    }

    #[test]
    fn variant_outcome_counts() {
        let col = gen_mastermind(3, 4, MastermindVariant::Color).unwrap();
        assert_eq!(col.experiment(1).outcomes.len(), 8);
        let pos = gen_mastermind(2, 8, MastermindVariant::Position).unwrap();
        assert_eq!(pos.experiments().len(), 3);
        assert_eq!(pos.experiment(2).outcomes.len(), 8);
    }
}
