use super::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(usize),
    Str(String),
    Dollar,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Bang,
    Amp,
    Pipe,
    Lt,
    Gt,
    Arrow,
    Implication(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Dollar => "`$`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Implication(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut push = |tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token {
                tok,
                line: l0,
                column: c0,
            });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '$' => push(Tok::Dollar, 1, &mut i, &mut col),
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            '{' => push(Tok::LBrace, 1, &mut i, &mut col),
            '}' => push(Tok::RBrace, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '!' | '~' => push(Tok::Bang, 1, &mut i, &mut col),
            '&' => push(Tok::Amp, 1, &mut i, &mut col),
            '|' => push(Tok::Pipe, 1, &mut i, &mut col),
            '>' => push(Tok::Gt, 1, &mut i, &mut col),
            '-' if chars.get(i + 1) == Some(&'>') => push(Tok::Arrow, 2, &mut i, &mut col),
            '=' if chars.get(i + 1) == Some(&'>') => push(Tok::Implication("=>"), 2, &mut i, &mut col),
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                push(Tok::Implication("<->"), 3, &mut i, &mut col)
            }
            '<' => push(Tok::Lt, 1, &mut i, &mut col),
            '"' => {
                let mut j = i + 1;
                let mut s = String::new();
                while j < chars.len() && chars[j] != '"' && chars[j] != '\n' {
                    s.push(chars[j]);
                    j += 1;
                }
                if chars.get(j) != Some(&'"') {
                    return Err(Diagnostic::error(l0, c0, "unterminated string"));
                }
                let len = j + 1 - i;
                push(Tok::Str(s), len, &mut i, &mut col);
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                let n = text
                    .parse()
                    .map_err(|_| Diagnostic::error(l0, c0, format!("integer `{text}` out of range")))?;
                push(Tok::Int(n), j - i, &mut i, &mut col);
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                push(Tok::Ident(text), j - i, &mut i, &mut col);
            }
            other => return Err(Diagnostic::error(l0, c0, format!("unexpected character `{other}`"))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_and_comments() {
        let toks = lex("VARS a # note\n  b -> c").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| (&t.tok, t.line, t.column)).collect();
        assert_eq!(kinds[0], (&Tok::Ident("VARS".into()), 1, 1));
        assert_eq!(kinds[2], (&Tok::Ident("b".into()), 2, 3));
        assert_eq!(kinds[3], (&Tok::Arrow, 2, 5));
    }

    #[test]
    fn exactly_brackets() {
        let toks = lex("exactly<2>(a,b)").unwrap();
        assert_eq!(toks[1].tok, Tok::Lt);
        assert_eq!(toks[2].tok, Tok::Int(2));
        assert_eq!(toks[3].tok, Tok::Gt);
    }
}
