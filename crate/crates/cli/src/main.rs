//! `cobra`: check deductive games, synthesize codebreaker strategies and
//! play them.
//!
//! Exit status: 0 success, 1 the game or strategy fails (ill-formed game,
//! unsolvable game), 2 bad input (unreadable file, parse errors, bad flags,
//! unknown secret), 3 a resource limit was hit (model cap, depth cap).

mod play;
mod source;
mod strategy;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cobra::context::Context;
use cobra::formula::Valuation;
use cobra::game::WellFormedReport;
use cobra::symmetry::{experiment_graph, experiments_for, knowledge_graph, GraphEncoding};
use cobra::synth::{format_decimal, ranking_reductions, round_stats, DecisionTree};

use source::Source;
use strategy::{synth_error, Encoding, StrategyArgs, StrategySpec};

#[derive(Debug)]
pub enum CliError {
    /// exit 1
    Domain(String),
    /// exit 2
    Input(String),
    /// exit 3
    Resource(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Input(_) => 2,
            CliError::Resource(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Domain(m) | CliError::Input(m) | CliError::Resource(m) => m,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cobra",
    version,
    about = "Deductive games: well-formedness, symmetry reduction, strategy synthesis"
)]
struct Cli {
    /// Write the base graph and the first-round experiment graphs as DOT
    /// files into this directory
    #[arg(long, global = true, value_name = "DIR")]
    dump_graphs: Option<PathBuf>,
    /// Print timings and sizes to stderr
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that every experiment has exactly one true outcome per code
    Check {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = Encoding::Models)]
        encoding: Encoding,
    },
    /// Synthesize a strategy and report its worst and average case
    Solve {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        strategy: StrategyArgs,
        #[command(flatten)]
        output: Output,
        /// Write the decision tree in DOT format
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
        /// Write the decision tree as JSON
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Average number of experiments left after each reduction phase, per round
    Bench {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        strategy: StrategyArgs,
        /// Number of rounds to expand
        #[arg(long, default_value_t = 2)]
        rounds: usize,
        /// Emit CSV instead of a table
        #[arg(long)]
        csv: bool,
    },
    /// Interactive assistant: proposes experiments, reads the outcomes
    Play {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        strategy: StrategyArgs,
    },
    /// Play the synthesized strategy against secret codes
    Simulate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        strategy: StrategyArgs,
        #[command(flatten)]
        output: Output,
        /// The secret: names of its true variables, separated by spaces or commas
        #[arg(long, conflicts_with = "sample")]
        secret: Option<String>,
        /// Play against this many randomly chosen secrets instead of all
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct Output {
    /// Print averages as exact fractions
    #[arg(long)]
    exact: bool,
}

impl Output {
    fn avg(&self, r: Ratio<u64>) -> String {
        if self.exact {
            r.to_string()
        } else {
            format_decimal(r, 5)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn load(cli: &Cli, source: &Source, enc: Encoding) -> Result<Context, CliError> {
    let t = Instant::now();
    let ctx = source.context()?;
    if cli.verbose {
        let g = ctx.game();
        eprintln!(
            "{} variables, {} codes, {} experiment types, {} instances [{:.2?}]",
            g.num_vars(),
            ctx.space().len(),
            g.experiments().len(),
            g.all_instances().len(),
            t.elapsed()
        );
    }
    if let Some(dir) = &cli.dump_graphs {
        dump_graphs(&ctx, dir, enc.into())?;
    }
    Ok(ctx)
}

fn dump_graphs(ctx: &Context, dir: &Path, enc: GraphEncoding) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Input(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let k = ctx.initial();
    std::fs::write(dir.join("base.dot"), ctx.base().graph().to_dot("base")).map_err(io)?;
    std::fs::write(
        dir.join("knowledge.dot"),
        knowledge_graph(ctx, &k, enc).to_dot("knowledge"),
    )
    .map_err(io)?;
    for (i, e) in experiments_for(ctx, &k, enc).phase2.iter().enumerate() {
        let name = ctx.game().instance_name(e);
        let g = experiment_graph(ctx, &k, e, enc);
        std::fs::write(dir.join(format!("experiment{i}.dot")), g.to_dot(&name)).map_err(io)?;
    }
    Ok(())
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Check { source, encoding } => check(cli, source, *encoding),
        Command::Solve {
            source,
            strategy,
            output,
            dot,
            json,
        } => {
            let ctx = load(cli, source, strategy.encoding)?;
            let t = Instant::now();
            let tree = strategy.build(&ctx)?;
            let c = tree.complexity(&ctx).map_err(synth_error)?;
            if cli.verbose {
                eprintln!("{} nodes [{:.2?}]", tree.len(), t.elapsed());
            }
            println!("avg {} worst {}", output.avg(c.avg), c.worst);
            if let Some(p) = dot {
                write_file(p, &tree.to_dot(ctx.game()))?;
            }
            if let Some(p) = json {
                write_file(p, &tree.to_json(ctx.game()))?;
            }
            Ok(0)
        }
        Command::Bench {
            source,
            strategy,
            rounds,
            csv,
        } => {
            let StrategySpec::Ranking(kind) = strategy.strategy else {
                return Err(CliError::Input("bench needs a ranking strategy".into()));
            };
            let ctx = load(cli, source, strategy.encoding)?;
            let red = ranking_reductions(&ctx, kind, *rounds, strategy.options()).map_err(synth_error)?;
            let stats = round_stats(&red);
            if *csv {
                println!("round,phase1_avg,phase2_avg");
                for r in &stats {
                    println!("{},{:.2},{:.2}", r.round, r.phase1_avg, r.phase2_avg);
                }
            } else {
                println!(
                    "{:>5} {:>7} {:>12} {:>12}",
                    "round", "nodes", "phase1_avg", "phase2_avg"
                );
                for r in &stats {
                    println!(
                        "{:>5} {:>7} {:>12.2} {:>12.2}",
                        r.round, r.nodes, r.phase1_avg, r.phase2_avg
                    );
                }
            }
            Ok(0)
        }
        Command::Play { source, strategy } => {
            let ctx = load(cli, source, strategy.encoding)?;
            let stdin = std::io::stdin();
            let mut out = std::io::stdout().lock();
            play::run(&ctx, strategy.stepper(&ctx), stdin.lock(), &mut out)
                .map_err(|e| CliError::Input(e.to_string()))??;
            Ok(0)
        }
        Command::Simulate {
            source,
            strategy,
            output,
            secret,
            sample: n,
            seed,
        } => {
            let ctx = load(cli, source, strategy.encoding)?;
            let secrets: Vec<usize> = match (secret, n) {
                (Some(s), _) => vec![parse_secret(&ctx, s)?],
                (None, Some(n)) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    let mut idx = sample(&mut rng, ctx.space().len(), (*n).min(ctx.space().len())).into_vec();
                    idx.sort_unstable();
                    idx
                }
                (None, None) => (0..ctx.space().len()).collect(),
            };
            let tree = strategy.build(&ctx)?;
            simulate(&ctx, &tree, &secrets, secret.is_some(), output)?;
            Ok(0)
        }
    }
}

fn check(cli: &Cli, source: &Source, encoding: Encoding) -> Result<u8, CliError> {
    let ctx = load(cli, source, encoding)?;
    let g = ctx.game();
    let red = experiments_for(&ctx, &ctx.initial(), encoding.into());
    println!(
        "{} codes; {} of {} first-round experiments after symmetry reduction",
        ctx.space().len(),
        red.phase2.len(),
        g.all_instances().len()
    );
    match g.check_well_formed(&red.phase2) {
        WellFormedReport::Ok => {
            println!("well-formed");
            Ok(0)
        }
        WellFormedReport::Counterexample {
            valuation,
            instance,
            true_outcomes,
        } => {
            let labels: Vec<&str> = true_outcomes
                .iter()
                .map(|&o| g.experiment(instance.experiment).outcomes[o].label.as_str())
                .collect();
            println!(
                "ill-formed: {} on code {{{}}} has {} true outcomes{}",
                g.instance_name(&instance),
                g.describe_valuation(&valuation),
                true_outcomes.len(),
                if labels.is_empty() {
                    String::new()
                } else {
                    format!(" ({})", labels.join(", "))
                }
            );
            Ok(1)
        }
    }
}

fn parse_secret(ctx: &Context, s: &str) -> Result<usize, CliError> {
    let g = ctx.game();
    let mut v = Valuation::all_false(g.num_vars());
    for name in s
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
    {
        let x = g
            .var_by_name(name)
            .ok_or_else(|| CliError::Input(format!("unknown variable `{name}` in secret")))?;
        v.set(x, true);
    }
    ctx.space().index_of(&v).ok_or_else(|| {
        CliError::Input(format!(
            "{{{}}} does not satisfy the game constraint",
            g.describe_valuation(&v)
        ))
    })
}

fn simulate(
    ctx: &Context,
    tree: &DecisionTree,
    secrets: &[usize],
    transcript: bool,
    output: &Output,
) -> Result<(), CliError> {
    let g = ctx.game();
    let mut out = std::io::stdout().lock();
    let mut lengths = Vec::with_capacity(secrets.len());
    for &i in secrets {
        let code = ctx.space().code(i);
        let play = tree.simulate(g, code).map_err(synth_error)?;
        if transcript {
            for (step, ev) in play.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{} {} {}",
                    step + 1,
                    g.instance_name(&ev.instance),
                    g.outcome_label(ev)
                );
            }
        }
        let _ = writeln!(out, "{}\t{}", g.describe_valuation(code), play.len());
        lengths.push(play.len() as u64);
    }
    let max = lengths.iter().copied().max().unwrap_or(0);
    let mean = Ratio::new(lengths.iter().sum::<u64>(), lengths.len().max(1) as u64);
    let _ = writeln!(out, "secrets {} max {} mean {}", lengths.len(), max, output.avg(mean));
    Ok(())
}
