use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    IriRef(String),
    /// `prefix:local`, split at the first colon.
    PName(String, String),
    Var(String),
    Str(String),
    /// Numeric literal text and its XSD datatype local name.
    Number(String, &'static str),
    LangTag(String),
    Word(String),
    Punct(&'static str),
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

const PUNCT: [&str; 18] = [
    "&&", "||", "!=", "<=", ">=", "^^", "{", "}", "(", ")", ".", ",", ";", "*", "=", "<", ">", "!",
];

pub fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut lexer = Lexer {
        chars,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    while let Some(token) = lexer.next_token()? {
        out.push(token);
    }
    Ok(out)
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

impl Lexer {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            line: self.line,
            column: self.column,
            message: message.into(),
        })
    }

    fn peek(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek(0)?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek(0) {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// `<` starts an IRI only when a `>` follows without whitespace or
    /// other excluded characters in between.
    fn iri_ahead(&self) -> Option<usize> {
        let mut i = 1;
        loop {
            match self.peek(i)? {
                '>' => return Some(i),
                c if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => return None,
                _ => i += 1,
            }
        }
    }

    fn next_token(&mut self) -> Result<Option<Token>> {
        self.skip_ws();
        let (line, column) = (self.line, self.column);
        let Some(c) = self.peek(0) else {
            return Ok(None);
        };
        let tok = if c == '<' && self.iri_ahead().is_some() {
            let len = self.iri_ahead().unwrap();
            self.bump();
            let iri: String = (1..len).filter_map(|_| self.bump()).collect();
            self.bump();
            Tok::IriRef(iri)
        } else if c == '?' || c == '$' {
            self.bump();
            let mut name = String::new();
            while let Some(c) = self.peek(0).filter(|c| c.is_alphanumeric() || *c == '_') {
                name.push(c);
                self.bump();
            }
            if name.is_empty() {
                return self.err("empty variable name");
            }
            Tok::Var(name)
        } else if c == '"' || c == '\'' {
            Tok::Str(self.string()?)
        } else if c == '@' {
            self.bump();
            let mut tag = String::new();
            while let Some(c) = self.peek(0).filter(|c| c.is_ascii_alphanumeric() || *c == '-') {
                tag.push(c);
                self.bump();
            }
            if tag.is_empty() {
                return self.err("empty language tag");
            }
            Tok::LangTag(tag)
        } else if c.is_ascii_digit()
            || ((c == '+' || c == '-') && self.peek(1).is_some_and(|d| d.is_ascii_digit() || d == '.'))
            || (c == '.' && self.peek(1).is_some_and(|d| d.is_ascii_digit()))
        {
            self.number()?
        } else if c.is_alphabetic() || c == '_' || c == ':' {
            self.name()?
        } else {
            let rest: String = self.chars[self.pos..].iter().take(2).collect();
            let Some(p) = PUNCT.iter().find(|p| rest.starts_with(**p)) else {
                return self.err(format!("unexpected character '{c}'"));
            };
            for _ in 0..p.len() {
                self.bump();
            }
            Tok::Punct(p)
        };
        Ok(Some(Token { tok, line, column }))
    }

    fn name(&mut self) -> Result<Tok> {
        let mut prefix = String::new();
        while let Some(c) = self.peek(0) {
            if is_name_char(c) || (c == '.' && self.peek(1).is_some_and(is_name_char)) {
                prefix.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if self.peek(0) != Some(':') {
            return Ok(Tok::Word(prefix));
        }
        self.bump();
        let mut local = String::new();
        while let Some(c) = self.peek(0) {
            if is_name_char(c) || c == ':' || (c == '.' && self.peek(1).is_some_and(|n| is_name_char(n) || n == ':')) {
                local.push(c);
                self.bump();
            } else if c == '%' && self.peek(1).is_some_and(|h| h.is_ascii_hexdigit()) && self.peek(2).is_some_and(|h| h.is_ascii_hexdigit()) {
                for _ in 0..3 {
                    local.push(self.bump().unwrap());
                }
            } else if c == '\\' && self.peek(1).is_some_and(|e| "_~.-!$&'()*+,;=/?#@%".contains(e)) {
                self.bump();
                local.push(self.bump().unwrap());
            } else {
                break;
            }
        }
        Ok(Tok::PName(prefix, local))
    }

    fn number(&mut self) -> Result<Tok> {
        let mut text = String::new();
        if let Some(c @ ('+' | '-')) = self.peek(0) {
            text.push(c);
            self.bump();
        }
        while let Some(c) = self.peek(0).filter(char::is_ascii_digit) {
            text.push(c);
            self.bump();
        }
        let mut datatype = "integer";
        if self.peek(0) == Some('.') && self.peek(1).is_some_and(|c| c.is_ascii_digit()) {
            text.push('.');
            self.bump();
            while let Some(c) = self.peek(0).filter(char::is_ascii_digit) {
                text.push(c);
                self.bump();
            }
            datatype = "decimal";
        }
        if matches!(self.peek(0), Some('e' | 'E')) {
            text.push('e');
            self.bump();
            if let Some(c @ ('+' | '-')) = self.peek(0) {
                text.push(c);
                self.bump();
            }
            let before = text.len();
            while let Some(c) = self.peek(0).filter(char::is_ascii_digit) {
                text.push(c);
                self.bump();
            }
            if text.len() == before {
                return self.err("malformed exponent");
            }
            datatype = "double";
        }
        Ok(Tok::Number(text, datatype))
    }

    fn string(&mut self) -> Result<String> {
        let quote = self.bump().unwrap();
        let long = self.peek(0) == Some(quote) && self.peek(1) == Some(quote);
        if long {
            self.bump();
            self.bump();
        }
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return self.err("unterminated string"),
                Some(c) if c == quote => {
                    if !long {
                        return Ok(out);
                    }
                    if self.peek(0) == Some(quote) && self.peek(1) == Some(quote) {
                        self.bump();
                        self.bump();
                        while self.peek(0) == Some(quote) {
                            out.push(quote);
                            self.bump();
                        }
                        return Ok(out);
                    }
                    out.push(c);
                }
                Some('\\') => match self.bump() {
                    Some('t') => out.push('\t'),
                    Some('b') => out.push('\u{8}'),
                    Some('n') => out.push('\n'),
                    Some('r') => out.push('\r'),
                    Some('f') => out.push('\u{c}'),
                    Some('"') => out.push('"'),
                    Some('\'') => out.push('\''),
                    Some('\\') => out.push('\\'),
                    Some(u @ ('u' | 'U')) => {
                        let len = if u == 'u' { 4 } else { 8 };
                        let hex: String = (0..len).filter_map(|_| self.bump()).collect();
                        match u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32) {
                            Some(c) => out.push(c),
                            None => return self.err("invalid unicode escape"),
                        }
                    }
                    _ => return self.err("invalid string escape"),
                },
                Some('\n' | '\r') if !long => return self.err("newline in string"),
                Some(c) => out.push(c),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn iri_versus_less_than() {
        assert_eq!(toks("<http://x>"), vec![Tok::IriRef("http://x".into())]);
        assert_eq!(
            toks("?a<3"),
            vec![Tok::Var("a".into()), Tok::Punct("<"), Tok::Number("3".into(), "integer")]
        );
        assert_eq!(
            toks("?a <= ?b"),
            vec![Tok::Var("a".into()), Tok::Punct("<="), Tok::Var("b".into())]
        );
    }

    #[test]
    fn prefixed_names_and_trailing_dot() {
        assert_eq!(
            toks("testconfig:Test ."),
            vec![Tok::PName("testconfig".into(), "Test".into()), Tok::Punct(".")]
        );
        assert_eq!(toks("t:a."), vec![Tok::PName("t".into(), "a".into()), Tok::Punct(".")]);
        assert_eq!(toks(":x"), vec![Tok::PName("".into(), "x".into())]);
    }

    #[test]
    fn literals() {
        assert_eq!(
            toks(r#""a\"b"@en 1.5 -2 3e4"#),
            vec![
                Tok::Str("a\"b".into()),
                Tok::LangTag("en".into()),
                Tok::Number("1.5".into(), "decimal"),
                Tok::Number("-2".into(), "integer"),
                Tok::Number("3e4".into(), "double"),
            ]
        );
    }
}
