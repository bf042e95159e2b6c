use std::collections::{BTreeSet, HashMap};

use super::lexer::{lex, Tok, Token};
use super::Diagnostic;
use crate::formula::{Formula, Var};
use crate::game::{
    Atom, AttrId, Attribute, DeductiveGame, GameError, InstanceKind, Outcome, ParameterizedExperiment, Template,
};

const KEYWORDS: &[&str] = &[
    "VARS",
    "CONSTRAINT",
    "PARAMS",
    "ATTR",
    "EXPERIMENT",
    "INSTANCES",
    "OUTCOME",
    "exactly",
    "true",
    "false",
];

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    vars: HashMap<String, Var>,
    params: HashMap<String, u32>,
    attrs: HashMap<String, AttrId>,
}

/// Formula context: the constraint admits plain variables only, outcomes
/// also admit `attr($j)` for `1 <= j <= arity`.
#[derive(Clone, Copy)]
enum Ctx {
    Constraint,
    Outcome { arity: usize },
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> Diagnostic {
        let t = self.peek();
        Diagnostic::error(t.line, t.column, msg)
    }

    fn expect(&mut self, want: Tok) -> PResult<Token> {
        if self.peek().tok == want {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&want.describe()))
        }
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        match &self.peek().tok {
            Tok::Implication(s) => self.err_here(format!("implication not allowed (`{s}`)")),
            other => self.err_here(format!("expected {wanted}, found {}", other.describe())),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<Token> {
        if self.is_keyword(kw) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(kw))
        }
    }

    fn at_section_start(&self) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s.chars().all(|c| c.is_ascii_uppercase()) && KEYWORDS.contains(&s.as_str()))
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Token)> {
        match &self.peek().tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                Ok((s, self.bump()))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn int(&mut self) -> PResult<usize> {
        match self.peek().tok {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    /// `ident+` up to the next section keyword.
    fn ident_list(&mut self, what: &str) -> PResult<Vec<(String, Token)>> {
        let mut out = vec![self.ident(what)?];
        while !self.at_section_start() && self.peek().tok != Tok::Eof {
            out.push(self.ident(what)?);
        }
        Ok(out)
    }

    fn formula(&mut self, ctx: Ctx) -> PResult<Template> {
        let mut parts = vec![self.conj(ctx)?];
        while self.peek().tok == Tok::Pipe {
            self.bump();
            parts.push(self.conj(ctx)?);
        }
        self.reject_implication()?;
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::or(parts)
        })
    }

    fn reject_implication(&self) -> PResult<()> {
        match &self.peek().tok {
            Tok::Arrow => Err(self.err_here("implication not allowed (`->`)")),
            Tok::Implication(s) => Err(self.err_here(format!("implication not allowed (`{s}`)"))),
            _ => Ok(()),
        }
    }

    fn conj(&mut self, ctx: Ctx) -> PResult<Template> {
        let mut parts = vec![self.unary(ctx)?];
        while self.peek().tok == Tok::Amp {
            self.bump();
            parts.push(self.unary(ctx)?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::and(parts)
        })
    }

    fn unary(&mut self, ctx: Ctx) -> PResult<Template> {
        if self.peek().tok == Tok::Bang {
            self.bump();
            return Ok(Formula::not(self.unary(ctx)?));
        }
        self.primary(ctx)
    }

    fn primary(&mut self, ctx: Ctx) -> PResult<Template> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::LParen => {
                self.bump();
                let f = self.formula(ctx)?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Formula::top())
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Formula::bottom())
            }
            Tok::Ident(s) if s == "exactly" => {
                self.bump();
                self.expect(Tok::Lt)?;
                let k = self.int()?;
                self.expect(Tok::Gt)?;
                self.expect(Tok::LParen)?;
                let mut cs = vec![self.formula(ctx)?];
                while self.peek().tok == Tok::Comma {
                    self.bump();
                    cs.push(self.formula(ctx)?);
                }
                self.expect(Tok::RParen)?;
                if k > cs.len() {
                    self.diags.push(Diagnostic::error(
                        t.line,
                        t.column,
                        format!("exactly<{k}> has only {} arguments", cs.len()),
                    ));
                }
                Ok(Formula::exactly(k, cs))
            }
            Tok::Ident(_) => {
                let (name, tok) = self.ident("a variable or attribute")?;
                if self.peek().tok == Tok::LParen {
                    self.bump();
                    self.expect(Tok::Dollar)?;
                    let jt = self.peek().clone();
                    let j = self.int()?;
                    self.expect(Tok::RParen)?;
                    let attr = match self.attrs.get(&name) {
                        Some(a) => *a,
                        None => {
                            self.diags.push(Diagnostic::error(
                                tok.line,
                                tok.column,
                                format!("undeclared attribute `{name}`"),
                            ));
                            AttrId(0)
                        }
                    };
                    match ctx {
                        Ctx::Constraint => {
                            self.diags.push(Diagnostic::error(
                                tok.line,
                                tok.column,
                                "parameter atoms are not allowed in the constraint",
                            ));
                            Ok(Formula::top())
                        }
                        Ctx::Outcome { arity } => {
                            if j == 0 || j > arity {
                                self.diags.push(Diagnostic::error(
                                    jt.line,
                                    jt.column,
                                    format!("parameter position ${j} exceeds arity {arity}"),
                                ));
                                return Ok(Formula::top());
                            }
                            Ok(Formula::Atom(Atom::Attr { attr, pos: j - 1 }))
                        }
                    }
                } else {
                    match self.vars.get(&name) {
                        Some(v) => Ok(Formula::Atom(Atom::Var(*v))),
                        None => {
                            self.diags.push(Diagnostic::error(
                                tok.line,
                                tok.column,
                                format!("undeclared variable `{name}`"),
                            ));
                            Ok(Formula::top())
                        }
                    }
                }
            }
            _ => Err(self.unexpected("a formula")),
        }
    }

    fn declare<T: Copy>(
        diags: &mut Vec<Diagnostic>,
        map: &mut HashMap<String, T>,
        name: &str,
        tok: &Token,
        value: T,
        what: &str,
    ) {
        if map.insert(name.to_string(), value).is_some() {
            diags.push(Diagnostic::error(
                tok.line,
                tok.column,
                format!("duplicate {what} `{name}`"),
            ));
        }
    }

    fn game(&mut self) -> PResult<DeductiveGame> {
        self.keyword("VARS")?;
        let vars = self.ident_list("a variable name")?;
        for (i, (name, tok)) in vars.iter().enumerate() {
            Self::declare(&mut self.diags, &mut self.vars, name, tok, Var(i as u32), "variable");
        }

        self.keyword("CONSTRAINT")?;
        let constraint = self.formula(Ctx::Constraint)?;
        let constraint: Formula<Var> = constraint.map_atoms(&|a| match a {
            Atom::Var(v) => *v,
            Atom::Attr { .. } => unreachable!("rejected by the constraint context"),
        });

        let params_tok = self.keyword("PARAMS")?;
        let params = self.ident_list("a parameter name")?;
        for (i, (name, tok)) in params.iter().enumerate() {
            Self::declare(&mut self.diags, &mut self.params, name, tok, i as u32, "parameter");
        }

        let mut attributes = Vec::new();
        let mut attr_toks = Vec::new();
        while self.is_keyword("ATTR") {
            let kw = self.bump();
            let (name, tok) = self.ident("an attribute name")?;
            let id = AttrId(attributes.len() as u32);
            Self::declare(&mut self.diags, &mut self.attrs, &name, &tok, id, "attribute");
            self.expect(Tok::LBrace)?;
            let mut mapping: Vec<Option<Var>> = vec![None; params.len()];
            while self.peek().tok != Tok::RBrace {
                let (p, pt) = self.ident("a parameter name")?;
                self.expect(Tok::Arrow)?;
                let (v, vt) = self.ident("a variable name")?;
                let pi = self.params.get(&p).copied();
                let vi = self.vars.get(&v).copied();
                if pi.is_none() {
                    self.diags.push(Diagnostic::error(
                        pt.line,
                        pt.column,
                        format!("undeclared parameter `{p}`"),
                    ));
                }
                if vi.is_none() {
                    self.diags.push(Diagnostic::error(
                        vt.line,
                        vt.column,
                        format!("undeclared variable `{v}`"),
                    ));
                }
                if let (Some(pi), Some(vi)) = (pi, vi) {
                    if mapping[pi as usize].replace(vi).is_some() {
                        self.diags.push(Diagnostic::error(
                            pt.line,
                            pt.column,
                            format!("parameter `{p}` mapped twice by `{name}`"),
                        ));
                    }
                }
            }
            self.expect(Tok::RBrace)?;
            let missing: Vec<&str> = mapping
                .iter()
                .zip(&params)
                .filter(|(m, _)| m.is_none())
                .map(|(_, (p, _))| p.as_str())
                .collect();
            if !missing.is_empty() {
                self.diags.push(Diagnostic::error(
                    kw.line,
                    kw.column,
                    format!("attribute `{name}` does not map {}", missing.join(", ")),
                ));
            }
            attributes.push(Attribute {
                name,
                mapping: mapping.into_iter().map(|m| m.unwrap_or(Var(0))).collect(),
            });
            attr_toks.push(kw);
        }

        let mut experiments = Vec::new();
        let mut exp_toks = Vec::new();
        let mut exp_names = HashMap::new();
        if !self.is_keyword("EXPERIMENT") {
            return Err(self.unexpected("EXPERIMENT"));
        }
        while self.is_keyword("EXPERIMENT") {
            let kw = self.bump();
            let (name, tok) = self.ident("an experiment name")?;
            Self::declare(&mut self.diags, &mut exp_names, &name, &tok, (), "experiment");
            self.expect(Tok::LParen)?;
            let arity = self.int()?;
            self.expect(Tok::RParen)?;
            self.keyword("INSTANCES")?;
            let kind = match &self.peek().tok {
                Tok::Ident(s) if s == "distinct" => InstanceKind::Distinct,
                Tok::Ident(s) if s == "all" => InstanceKind::All,
                _ => return Err(self.unexpected("`distinct` or `all`")),
            };
            self.bump();
            let mut outcomes = Vec::new();
            if !self.is_keyword("OUTCOME") {
                return Err(self.unexpected("OUTCOME"));
            }
            while self.is_keyword("OUTCOME") {
                self.bump();
                let label = match &self.peek().tok {
                    Tok::Str(s) => {
                        let s = s.clone();
                        self.bump();
                        s
                    }
                    _ => (outcomes.len() + 1).to_string(),
                };
                let template = self.formula(Ctx::Outcome { arity })?;
                outcomes.push(Outcome { label, template });
            }
            experiments.push(ParameterizedExperiment::new(name, arity, kind, outcomes));
            exp_toks.push(kw);
        }
        if self.peek().tok != Tok::Eof {
            return Err(self.unexpected("EXPERIMENT or end of input"));
        }
        if !self.diags.is_empty() {
            return Err(self.diags[0].clone());
        }

        let names = |v: &[(String, Token)]| v.iter().map(|(s, _)| s.clone()).collect::<Vec<_>>();
        let game =
            DeductiveGame::new(names(&vars), constraint, names(&params), attributes, experiments).map_err(|e| {
                let at = match &e {
                    GameError::AttributeOverlap(_, b) | GameError::AttributeNotInjective(b) => self
                        .attrs
                        .get(b)
                        .map(|id| &attr_toks[id.0 as usize])
                        .unwrap_or(&params_tok),
                    _ => &self.toks[0],
                };
                Diagnostic::error(at.line, at.column, e.to_string())
            })?;
        for (t, kw) in exp_toks.iter().enumerate() {
            let overlap: BTreeSet<Var> = game
                .attribute_vars_of(t)
                .intersection(&game.experiment(t).raw_vars())
                .copied()
                .collect();
            if let Some(v) = overlap.first() {
                self.diags.push(Diagnostic::error(
                    kw.line,
                    kw.column,
                    format!(
                        "outcome of `{}` mentions `{}` directly, which is also an attribute value of a parameter",
                        game.experiment(t).name,
                        game.var_name(*v)
                    ),
                ));
            }
        }
        if !self.diags.is_empty() {
            return Err(self.diags[0].clone());
        }
        Ok(game)
    }
}

/// Parses a game definition. On failure returns every diagnostic found
/// before the first unrecoverable syntax error.
pub fn parse(src: &str) -> Result<DeductiveGame, Vec<Diagnostic>> {
    let toks = lex(src).map_err(|d| vec![d])?;
    let mut p = Parser {
        toks,
        pos: 0,
        diags: Vec::new(),
        vars: HashMap::new(),
        params: HashMap::new(),
        attrs: HashMap::new(),
    };
    match p.game() {
        Ok(g) => Ok(g),
        Err(first) => {
            let mut all = p.diags;
            if !all.contains(&first) {
                all.push(first);
            }
            all.sort_by_key(|d| (d.line, d.column));
            Err(all)
        }
    }
}
