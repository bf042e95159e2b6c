use std::io::{self, BufRead, Write};

use cobra::context::{Context, Knowledge};
use cobra::game::ExperimentInstance;

use crate::strategy::Stepper;
use crate::CliError;

/// Reads one answer per line. Besides outcome labels or indices it accepts
/// `undo`, `models` and `quit`.
pub fn run<R: BufRead, W: Write>(
    ctx: &Context,
    mut stepper: Stepper<'_>,
    input: R,
    out: &mut W,
) -> io::Result<Result<(), CliError>> {
    let g = ctx.game();
    // knowledge after each answer; the first entry is the initial one
    let mut states: Vec<Knowledge> = vec![ctx.initial()];
    let mut proposal: Option<ExperimentInstance> = None;
    let mut lines = input.lines();
    writeln!(out, "{} codes possible", ctx.space().len())?;
    loop {
        let k = states.last().expect("initial state");
        if let Some(v) = ctx.solution(k) {
            writeln!(
                out,
                "secret: {} after {} experiments",
                g.describe_valuation(v),
                states.len() - 1
            )?;
            return Ok(Ok(()));
        }
        let e = match &proposal {
            Some(e) => e.clone(),
            None => match stepper.next(ctx, k) {
                Ok(Some(e)) => e,
                Ok(None) => {
                    return Ok(Err(CliError::Domain(
                        "strategy stopped before the secret was known".into(),
                    )))
                }
                Err(err) => return Ok(Err(err)),
            },
        };
        proposal = Some(e.clone());
        let outcomes = &g.experiment(e.experiment).outcomes;
        let menu: Vec<String> = outcomes
            .iter()
            .enumerate()
            .map(|(i, o)| format!("[{i}] {}", o.label))
            .collect();
        writeln!(out, "play {}: {}", g.instance_name(&e), menu.join("  "))?;
        write!(out, "> ")?;
        out.flush()?;
        let Some(line) = lines.next() else {
            writeln!(out)?;
            return Ok(Ok(()));
        };
        let answer = line?;
        let answer = answer.trim();
        match answer {
            "" => continue,
            "quit" | "q" => return Ok(Ok(())),
            "models" => {
                writeln!(out, "{} codes remaining", k.count())?;
                continue;
            }
            "undo" => {
                if states.len() > 1 {
                    states.pop();
                    proposal = None;
                    writeln!(out, "{} codes remaining", states.last().expect("initial state").count())?;
                } else {
                    writeln!(out, "nothing to undo")?;
                }
                continue;
            }
            _ => {}
        }
        let o = match outcomes.iter().position(|o| o.label == answer) {
            Some(o) => o,
            None => match answer.parse::<usize>() {
                Ok(i) if i < outcomes.len() => i,
                _ => {
                    writeln!(out, "unknown outcome `{answer}`")?;
                    continue;
                }
            },
        };
        let next = ctx.update(k, &e, o);
        if !next.is_satisfiable() {
            writeln!(out, "inconsistent with previous answers")?;
            continue;
        }
        states.push(next);
        proposal = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cobra::dsl::gen_ccp;
    use cobra::synth::{RankingKind, SynthOptions};

    fn session(script: &str) -> String {
        let ctx = Context::new(gen_ccp(4).unwrap()).unwrap();
        let stepper = Stepper::Ranking(RankingKind::MaxModels, SynthOptions::default());
        let mut out = Vec::new();
        run(&ctx, stepper, script.as_bytes(), &mut out).unwrap().unwrap();
        String::from_utf8(out).unwrap()
    }

    #[test]
    fn undo_restores_the_initial_count() {
        let t = session("=\nundo\nquit\n");
        assert!(t.contains("8 codes remaining"), "{t}");
    }

    #[test]
    fn contradictions_are_rejected() {
        let t = session("=\n<\n<\n");
        assert!(!t.contains("inconsistent"), "{t}");
        // two balances leave coin4; balancing it against coin1 is impossible
        let t = session("=\nmodels\n=\n=\n");
        assert!(t.contains("4 codes remaining"), "{t}");
        assert!(t.contains("inconsistent with previous answers"), "{t}");
    }
}
