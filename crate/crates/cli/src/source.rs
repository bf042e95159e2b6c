use std::path::PathBuf;

use clap::Args;
use cobra::context::Context;
use cobra::dsl::{ccp_warning, gen_ccp, gen_mastermind, parse, MastermindVariant};
use cobra::game::DeductiveGame;
use cobra::satcore::{SatError, DEFAULT_MODEL_CAP};

use crate::CliError;

pub const MODEL_CAP_VAR: &str = "COBRA_MODEL_CAP";

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Game description file
    pub file: Option<PathBuf>,
    /// Built-in generator: `ccp:N` or `mm:P:C[:col|:pos]`
    #[arg(long = "gen", value_name = "SPEC", value_parser = parse_gen_spec)]
    pub generator: Option<GenSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenSpec {
    Ccp(usize),
    Mastermind(usize, usize, MastermindVariant),
}

pub fn parse_gen_spec(s: &str) -> Result<GenSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| {
        p.parse::<usize>()
            .map_err(|_| format!("`{p}` is not a count in generator spec `{s}`"))
    };
    match parts.as_slice() {
        ["ccp", n] => Ok(GenSpec::Ccp(num(n)?)),
        ["mm", p, c] => Ok(GenSpec::Mastermind(num(p)?, num(c)?, MastermindVariant::Classic)),
        ["mm", p, c, v] => {
            let variant = match *v {
                "col" => MastermindVariant::Color,
                "pos" => MastermindVariant::Position,
                _ => return Err(format!("unknown Mastermind variant `{v}` (expected col or pos)")),
            };
            Ok(GenSpec::Mastermind(num(p)?, num(c)?, variant))
        }
        _ => Err(format!(
            "bad generator spec `{s}` (expected ccp:N or mm:P:C[:col|:pos])"
        )),
    }
}

impl Source {
    pub fn load(&self) -> Result<DeductiveGame, CliError> {
        match (&self.file, self.generator) {
            (_, Some(GenSpec::Ccp(n))) => {
                if let Some(w) = ccp_warning(n) {
                    eprintln!("{}", w.message);
                }
                gen_ccp(n).map_err(|e| CliError::Input(e.to_string()))
            }
            (_, Some(GenSpec::Mastermind(p, c, v))) => {
                gen_mastermind(p, c, v).map_err(|e| CliError::Input(e.to_string()))
            }
            (Some(path), None) => {
                let src =
                    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                parse(&src).map_err(|diags| {
                    let lines: Vec<String> = diags.iter().map(|d| format!("{}:{d}", path.display())).collect();
                    CliError::Input(lines.join("\n"))
                })
            }
            (None, None) => Err(CliError::Input("no game given".into())),
        }
    }

    pub fn context(&self) -> Result<Context, CliError> {
        let game = self.load()?;
        Context::with_model_cap(game, model_cap()?).map_err(|e| match e {
            SatError::ModelCapExceeded(_) => CliError::Resource(format!("{e} (set {MODEL_CAP_VAR} to raise it)")),
        })
    }
}

fn model_cap() -> Result<u64, CliError> {
    match std::env::var(MODEL_CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("{MODEL_CAP_VAR}={v} is not a count"))),
        Err(_) => Ok(DEFAULT_MODEL_CAP),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_specs() {
        assert_eq!(parse_gen_spec("ccp:12"), Ok(GenSpec::Ccp(12)));
        assert_eq!(
            parse_gen_spec("mm:4:6"),
            Ok(GenSpec::Mastermind(4, 6, MastermindVariant::Classic))
        );
        assert_eq!(
            parse_gen_spec("mm:2:8:pos"),
            Ok(GenSpec::Mastermind(2, 8, MastermindVariant::Position))
        );
        assert!(parse_gen_spec("mm:2:8:foo").is_err());
        assert!(parse_gen_spec("ccp").is_err());
        assert!(parse_gen_spec("ccp:x").is_err());
        assert!(parse_gen_spec("go:3").is_err());
    }
}
