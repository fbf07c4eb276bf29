use super::diagnostics::{codes, Location, SourceDiagnostic};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Number(f64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Colon,
    Arrow,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(x) => format!("number `{x}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub loc: Location,
    /// First token on its line; used to resynchronise after an error.
    pub line_start: bool,
}

/// Splits the input into tokens. Comments run from `#` to end of line.
/// Lexical errors are collected and the offending character skipped.
pub(crate) fn tokenize(text: &str) -> (Vec<Token>, Vec<SourceDiagnostic>) {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut line_start = true;
    let mut last_loc = Location::default();

    while i < chars.len() {
        let c = chars[i];
        let loc = Location::new(line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            line_start = true;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_lowercase() {
            i += 1;
            loop {
                while i < chars.len() && (chars[i].is_ascii_lowercase() || chars[i].is_ascii_digit()) {
                    i += 1;
                }
                if i + 1 < chars.len()
                    && chars[i] == '-'
                    && (chars[i + 1].is_ascii_lowercase() || chars[i + 1].is_ascii_digit())
                {
                    i += 1;
                    continue;
                }
                break;
            }
            Some(Tok::Ident(chars[start..i].iter().collect()))
        } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let raw: String = chars[start..i].iter().collect();
            raw.parse().ok().map(Tok::Number)
        } else {
            let next = chars.get(i + 1).copied();
            let (tok, width) = match (c, next) {
                ('-', Some('>')) => (Some(Tok::Arrow), 2),
                ('!', Some('=')) => (Some(Tok::Ne), 2),
                ('<', Some('=')) => (Some(Tok::Le), 2),
                ('>', Some('=')) => (Some(Tok::Ge), 2),
                ('{', _) => (Some(Tok::LBrace), 1),
                ('}', _) => (Some(Tok::RBrace), 1),
                ('(', _) => (Some(Tok::LParen), 1),
                (')', _) => (Some(Tok::RParen), 1),
                (';', _) => (Some(Tok::Semi), 1),
                (',', _) => (Some(Tok::Comma), 1),
                (':', _) => (Some(Tok::Colon), 1),
                ('=', _) => (Some(Tok::Eq), 1),
                ('<', _) => (Some(Tok::Lt), 1),
                ('>', _) => (Some(Tok::Gt), 1),
                _ => (None, 1),
            };
            i += width;
            tok
        };
        col += i - start;
        match tok {
            Some(tok) => {
                tokens.push(Token {
                    tok,
                    loc,
                    line_start,
                });
                last_loc = loc;
                line_start = false;
            }
            None => {
                let hint = if c.is_ascii_uppercase() || c == '_' {
                    " (identifiers are lowercase kebab-case)"
                } else {
                    ""
                };
                diags.push(SourceDiagnostic::error(
                    loc,
                    codes::SYNTAX_ERROR,
                    format!("unexpected character `{c}`{hint}"),
                ));
            }
        }
    }
    tokens.push(Token {
        tok: Tok::Eof,
        loc: last_loc,
        line_start: true,
    });
    (tokens, diags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str) -> Vec<Tok> {
        let (t, d) = tokenize(text);
        assert!(d.is_empty(), "{d:?}");
        t.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn kebab_identifiers_and_arrows() {
        assert_eq!(
            toks("link a-b->c-d # note"),
            vec![
                Tok::Ident("link".into()),
                Tok::Ident("a-b".into()),
                Tok::Arrow,
                Tok::Ident("c-d".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn numbers_and_comparators() {
        assert_eq!(
            toks("young < 40, x <= -2.5 != >="),
            vec![
                Tok::Ident("young".into()),
                Tok::Lt,
                Tok::Number(40.0),
                Tok::Comma,
                Tok::Ident("x".into()),
                Tok::Le,
                Tok::Number(-2.5),
                Tok::Ne,
                Tok::Ge,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn bad_characters_are_located() {
        let (_, d) = tokenize("finding\n  Age");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].location, Location::new(2, 3));
        assert!(d[0].message.contains("kebab-case"));
    }
}
