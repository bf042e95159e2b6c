use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use super::SynthError;
use crate::context::Context;
use crate::satcore::CodeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RankingKind {
    MaxModels,
    ExpModels,
    EntModels,
    Parts,
    MinFixed,
    ExpFixed,
}

impl RankingKind {
    pub const ALL: [RankingKind; 6] = [
        RankingKind::MaxModels,
        RankingKind::ExpModels,
        RankingKind::EntModels,
        RankingKind::Parts,
        RankingKind::MinFixed,
        RankingKind::ExpFixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RankingKind::MaxModels => "max-models",
            RankingKind::ExpModels => "exp-models",
            RankingKind::EntModels => "ent-models",
            RankingKind::Parts => "parts",
            RankingKind::MinFixed => "min-fixed",
            RankingKind::ExpFixed => "exp-fixed",
        }
    }
}

impl fmt::Display for RankingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RankingKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        RankingKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown ranking function `{s}`"))
    }
}

/// A rank value; lower is better. Every kind but `ent-models` is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rank {
    Exact(Ratio<i128>),
    Real(f64),
}

impl Rank {
    pub fn to_f64(self) -> f64 {
        match self {
            Rank::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Rank::Real(x) => x,
        }
    }
}

impl PartialOrd for Rank {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Rank::Exact(a), Rank::Exact(b)) => Some(a.cmp(b)),
            (Rank::Real(a), Rank::Real(b)) => a.partial_cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

/// `r(Updates[φ, e])` given the model sets of the updates.
pub fn rank(ctx: &Context, kind: RankingKind, parts: &[CodeSet]) -> Result<Rank, SynthError> {
    let counts: Vec<i128> = parts.iter().map(|p| p.count() as i128).collect();
    let total: i128 = counts.iter().sum();
    let fixed = || -> Vec<i128> { parts.iter().map(|p| ctx.space().fixed_in(p).len() as i128).collect() };
    let exact = |n: i128| Rank::Exact(Ratio::from_integer(n));
    Ok(match kind {
        RankingKind::MaxModels => exact(counts.iter().copied().max().unwrap_or(0)),
        RankingKind::Parts => exact(-(counts.iter().filter(|&&c| c > 0).count() as i128)),
        RankingKind::MinFixed => exact(-fixed().into_iter().min().unwrap_or(0)),
        RankingKind::ExpModels => {
            if total == 0 {
                return Err(SynthError::UndefinedRank(kind));
            }
            Rank::Exact(Ratio::new(counts.iter().map(|c| c * c).sum(), total))
        }
        RankingKind::ExpFixed => {
            if total == 0 {
                return Err(SynthError::UndefinedRank(kind));
            }
            let weighted: i128 = counts.iter().zip(fixed()).map(|(c, f)| c * f).sum();
            Rank::Exact(Ratio::new(-weighted, total))
        }
        RankingKind::EntModels => {
            if total == 0 {
                return Err(SynthError::UndefinedRank(kind));
            }
            // summed in a fixed order so equal multisets give equal floats
            let mut sorted = counts.clone();
            sorted.sort_unstable();
            let n = total as f64;
            Rank::Real(
                sorted
                    .iter()
                    .filter(|&&c| c > 0)
                    .map(|&c| {
                        let p = c as f64 / n;
                        p * p.ln()
                    })
                    .sum(),
            )
        }
    })
}
