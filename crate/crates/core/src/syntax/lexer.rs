use super::ast::Span;
use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Int(i) => i.to_string(),
            Tok::Str(s) => format!("{:?}", s),
            Tok::Sym(s) => s.to_string(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

// longest first
const SYMBOLS: &[&str] = &[
    "==>", "::", "->", "-o", "=>", "==", "!=", "<=", ">=", "&&", "||", "**", "(", ")", "{", "}",
    "[", "]", ",", ";", ":", ".", "=", "<", ">", "+", "-", "*", "/", "!", "|", "^",
];

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let span = Span { line, col };
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                bump!();
            }
            let v = s.parse::<i64>().map_err(|_| ParseError::at(span, "integer literal out of range"))?;
            out.push(Token { tok: Tok::Int(v), span });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                s.push(chars[i]);
                bump!();
            }
            out.push(Token { tok: Tok::Ident(s), span });
            continue;
        }
        if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err(ParseError::at(span, "unterminated string literal")),
                    Some('"') => {
                        bump!();
                        break;
                    }
                    Some('\\') => {
                        bump!();
                        match chars.get(i) {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            _ => return Err(ParseError::at(Span { line, col }, "unsupported escape")),
                        }
                        bump!();
                    }
                    Some(&ch) => {
                        s.push(ch);
                        bump!();
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), span });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                for _ in 0..sym.len() {
                    bump!();
                }
                out.push(Token { tok: Tok::Sym(sym), span });
            }
            None => return Err(ParseError::at(span, format!("unexpected character '{}'", c))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_symbols_longest_first() {
        let toks: Vec<Tok> = lex("a -o b -> c ==> d :: e").unwrap().into_iter().map(|t| t.tok).collect();
        assert_eq!(toks[1], Tok::Sym("-o"));
        assert_eq!(toks[3], Tok::Sym("->"));
        assert_eq!(toks[5], Tok::Sym("==>"));
        assert_eq!(toks[7], Tok::Sym("::"));
    }

    #[test]
    fn string_escapes_and_comments() {
        let toks = lex("\"a\\\"b\\\\\" // trailing\n 3").unwrap();
        assert_eq!(toks[0].tok, Tok::Str("a\"b\\".into()));
        assert_eq!(toks[1].tok, Tok::Int(3));
        assert_eq!(toks[1].span, Span { line: 2, col: 2 });
    }

    #[test]
    fn rejects_unknown_escape() {
        assert!(lex("\"\\n\"").is_err());
    }
}
