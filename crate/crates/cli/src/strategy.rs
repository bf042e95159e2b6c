use std::fmt;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use cobra::context::{Context, Knowledge};
use cobra::game::ExperimentInstance;
use cobra::symmetry::GraphEncoding;
use cobra::synth::{
    build_optimal_tree, build_ranking_tree, next_experiment, DecisionTree, Mode, OptimalSolver, RankingKind,
    SynthError, SynthOptions,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategySpec {
    Ranking(RankingKind),
    Optimal(Mode),
}

impl FromStr for StrategySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "optimal-worst" => Ok(StrategySpec::Optimal(Mode::Worst)),
            "optimal-avg" => Ok(StrategySpec::Optimal(Mode::Avg)),
            _ => s.parse().map(StrategySpec::Ranking).map_err(|_| {
                let kinds: Vec<&str> = RankingKind::ALL.iter().map(|k| k.name()).collect();
                format!(
                    "unknown strategy `{s}` (expected {}, optimal-worst or optimal-avg)",
                    kinds.join(", ")
                )
            }),
        }
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategySpec::Ranking(k) => write!(f, "{k}"),
            StrategySpec::Optimal(Mode::Worst) => f.write_str("optimal-worst"),
            StrategySpec::Optimal(Mode::Avg) => f.write_str("optimal-avg"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Encoding {
    Models,
    Syntax,
}

impl From<Encoding> for GraphEncoding {
    fn from(e: Encoding) -> Self {
        match e {
            Encoding::Models => GraphEncoding::Models,
            Encoding::Syntax => GraphEncoding::Syntax,
        }
    }
}

#[derive(Debug, Args)]
pub struct StrategyArgs {
    /// Ranking function name, `optimal-worst` or `optimal-avg`
    #[arg(long, short, default_value = "max-models")]
    pub strategy: StrategySpec,
    /// Graph encoding used for symmetry detection
    #[arg(long, value_enum, default_value_t = Encoding::Models)]
    pub encoding: Encoding,
    /// Skip the isomorphism phase of the symmetry reduction
    #[arg(long)]
    pub no_phase2: bool,
    /// Give up on ranking strategies deeper than this
    #[arg(long, default_value_t = 64)]
    pub depth_cap: usize,
}

impl StrategyArgs {
    pub fn options(&self) -> SynthOptions {
        SynthOptions {
            encoding: self.encoding.into(),
            phase2: !self.no_phase2,
        }
    }

    pub fn build(&self, ctx: &Context) -> Result<DecisionTree, CliError> {
        match self.strategy {
            StrategySpec::Ranking(kind) => {
                let r = build_ranking_tree(ctx, kind, self.depth_cap, self.options()).map_err(synth_error)?;
                if r.uninformative > 0 {
                    eprintln!(
                        "warning: {} node(s) play an experiment that cannot split the remaining codes",
                        r.uninformative
                    );
                }
                Ok(r.tree)
            }
            StrategySpec::Optimal(mode) => Ok(build_optimal_tree(ctx, mode, self.options()).map_err(synth_error)?.0),
        }
    }

    pub fn stepper<'a>(&self, ctx: &'a Context) -> Stepper<'a> {
        match self.strategy {
            StrategySpec::Ranking(kind) => Stepper::Ranking(kind, self.options()),
            StrategySpec::Optimal(mode) => Stepper::Optimal(Box::new(OptimalSolver::new(ctx, mode, self.options()))),
        }
    }
}

/// Chooses experiments one at a time for the interactive player.
pub enum Stepper<'a> {
    Ranking(RankingKind, SynthOptions),
    Optimal(Box<OptimalSolver<'a>>),
}

impl Stepper<'_> {
    pub fn next(&mut self, ctx: &Context, k: &Knowledge) -> Result<Option<ExperimentInstance>, CliError> {
        match self {
            Stepper::Ranking(kind, opts) => next_experiment(ctx, k, *kind, *opts).map_err(synth_error),
            Stepper::Optimal(s) => Ok(s.choose(&k.models).map_err(synth_error)?.map(|(e, _)| e)),
        }
    }
}

pub fn synth_error(e: SynthError) -> CliError {
    match e {
        SynthError::DepthExceeded(_) => CliError::Resource(e.to_string()),
        _ => CliError::Domain(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_names_round_trip() {
        for kind in RankingKind::ALL {
            let s = StrategySpec::Ranking(kind);
            assert_eq!(s.to_string().parse::<StrategySpec>(), Ok(s));
        }
        for s in ["optimal-worst", "optimal-avg"] {
            assert_eq!(s.parse::<StrategySpec>().unwrap().to_string(), s);
        }
        assert!("fastest".parse::<StrategySpec>().is_err());
    }
}
