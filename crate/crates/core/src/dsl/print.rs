use std::fmt::{self, Write};

use crate::formula::{Formula, Var};
use crate::game::{Atom, DeductiveGame, InstanceKind, Template};

/// Renders a template in the surface syntax with the game's names.
pub struct TemplateDisplay<'a> {
    pub game: &'a DeductiveGame,
    pub template: &'a Template,
}

fn write_formula<A>(
    f: &mut impl Write,
    phi: &Formula<A>,
    atom: &impl Fn(&mut dyn Write, &A) -> fmt::Result,
    prec: u8,
) -> fmt::Result {
    // precedence: 0 = or, 1 = and, 2 = unary
    match phi {
        Formula::Atom(a) => atom(f, a),
        Formula::And(cs) if cs.is_empty() => f.write_str("true"),
        Formula::Or(cs) if cs.is_empty() => f.write_str("false"),
        Formula::Not(c) => {
            f.write_char('!')?;
            write_formula(f, c, atom, 2)
        }
        Formula::And(cs) | Formula::Or(cs) => {
            let (op, my) = if matches!(phi, Formula::And(_)) {
                (" & ", 1)
            } else {
                (" | ", 0)
            };
            let paren = prec > my || cs.len() == 1 && prec == 2;
            if paren {
                f.write_char('(')?;
            }
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    f.write_str(op)?;
                }
                write_formula(f, c, atom, my + 1)?;
            }
            if paren {
                f.write_char(')')?;
            }
            Ok(())
        }
        Formula::Exactly(k, cs) => {
            write!(f, "exactly<{k}>(")?;
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_formula(f, c, atom, 0)?;
            }
            f.write_char(')')
        }
    }
}

impl fmt::Display for TemplateDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.game;
        let mut s = String::new();
        write_formula(
            &mut s,
            self.template,
            &|w: &mut dyn Write, a: &Atom| match a {
                Atom::Var(v) => w.write_str(g.var_name(*v)),
                Atom::Attr { attr, pos } => write!(w, "{}(${})", g.attribute(*attr).name, pos + 1),
            },
            0,
        )?;
        f.write_str(&s)
    }
}

/// Renders a formula over game variables with the game's names.
pub fn formula_source(g: &DeductiveGame, phi: &Formula<Var>) -> String {
    let mut s = String::new();
    write_formula(
        &mut s,
        phi,
        &|w: &mut dyn Write, v: &Var| w.write_str(g.var_name(*v)),
        0,
    )
    .expect("writing to a string");
    s
}

fn quote(label: &str) -> String {
    label.replace('"', "'")
}

/// Serializes a game so that [`super::parse`] reads it back.
pub fn to_source(g: &DeductiveGame) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "VARS {}", g.var_names().join(" "));
    let _ = writeln!(out, "CONSTRAINT {}", formula_source(g, g.constraint()));
    let _ = writeln!(out, "PARAMS {}", g.param_names().join(" "));
    for a in g.attributes() {
        let maps: Vec<String> = a
            .mapping
            .iter()
            .enumerate()
            .map(|(p, v)| format!("{} -> {}", g.param_names()[p], g.var_name(*v)))
            .collect();
        let _ = writeln!(out, "ATTR {} {{ {} }}", a.name, maps.join(" "));
    }
    for t in g.experiments() {
        let kind = match t.kind {
            InstanceKind::All => "all",
            InstanceKind::Distinct => "distinct",
        };
        let _ = writeln!(out, "EXPERIMENT {}({}) INSTANCES {}", t.name, t.arity, kind);
        for o in &t.outcomes {
            let _ = writeln!(
                out,
                "  OUTCOME \"{}\" {}",
                quote(&o.label),
                TemplateDisplay {
                    game: g,
                    template: &o.template
                }
            );
        }
    }
    out
}
