use crate::vocab::{rdf, xsd};
use crate::{BlankNode, Error, Graph, Iri, Literal, PrefixMap, Result, Term, Triple};

/// Parses a Turtle document into a graph.
pub fn parse_turtle(text: &str, base: Option<&str>) -> Result<Graph> {
    parse_turtle_with_prefixes(text, base).map(|(g, _)| g)
}

/// Like [`parse_turtle`], also returning the prefixes the document declared.
pub fn parse_turtle_with_prefixes(text: &str, base: Option<&str>) -> Result<(Graph, PrefixMap)> {
    let mut parser = Parser {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        column: 1,
        base: base.map(str::to_string),
        prefixes: PrefixMap::new(),
        graph: Graph::new(),
        anon: 0,
    };
    parser.document()?;
    Ok((parser.graph, parser.prefixes))
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    base: Option<String>,
    prefixes: PrefixMap,
    graph: Graph,
    anon: usize,
}

fn is_pn_chars_base(c: char) -> bool {
    c.is_ascii_alphabetic()
        || matches!(c as u32,
            0xC0..=0xD6 | 0xD8..=0xF6 | 0xF8..=0x2FF | 0x370..=0x37D | 0x37F..=0x1FFF
            | 0x200C..=0x200D | 0x2070..=0x218F | 0x2C00..=0x2FEF | 0x3001..=0xD7FF
            | 0xF900..=0xFDCF | 0xFDF0..=0xFFFD | 0x10000..=0xEFFFF)
}

fn is_pn_chars_u(c: char) -> bool {
    is_pn_chars_base(c) || c == '_'
}

fn is_pn_chars(c: char) -> bool {
    is_pn_chars_u(c)
        || c == '-'
        || c.is_ascii_digit()
        || c == '\u{B7}'
        || matches!(c as u32, 0x300..=0x36F | 0x203F..=0x2040)
}

impl Parser {
    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            line: self.line,
            column: self.column,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
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
        while let Some(c) = self.peek() {
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

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            match self.peek() {
                Some(found) => self.error(format!("expected '{c}', found '{found}'")),
                None => self.error(format!("expected '{c}', found end of input")),
            }
        }
    }

    fn starts_with_keyword(&self, keyword: &str, case_insensitive: bool) -> bool {
        let n = keyword.chars().count();
        let slice: String = self.chars[self.pos..].iter().take(n).collect();
        let matches = if case_insensitive {
            slice.eq_ignore_ascii_case(keyword)
        } else {
            slice == keyword
        };
        matches && !self.peek_at(n).is_some_and(|c| is_pn_chars(c) || c == ':')
    }

    fn advance(&mut self, n: usize) {
        for _ in 0..n {
            self.bump();
        }
    }

    fn document(&mut self) -> Result<()> {
        loop {
            self.skip_ws();
            if self.peek().is_none() {
                return Ok(());
            }
            self.statement()?;
        }
    }

    fn statement(&mut self) -> Result<()> {
        if self.peek() == Some('@') {
            if self.starts_with_keyword("@prefix", false) {
                self.advance(7);
                self.prefix_decl()?;
                return self.expect('.');
            }
            if self.starts_with_keyword("@base", false) {
                self.advance(5);
                self.base_decl()?;
                return self.expect('.');
            }
            return self.error("unknown directive");
        }
        if self.starts_with_keyword("PREFIX", true) {
            self.advance(6);
            return self.prefix_decl();
        }
        if self.starts_with_keyword("BASE", true) {
            self.advance(4);
            return self.base_decl();
        }
        self.triples()?;
        self.expect('.')
    }

    fn prefix_decl(&mut self) -> Result<()> {
        self.skip_ws();
        let mut label = String::new();
        while let Some(c) = self.peek() {
            if c == ':' {
                break;
            }
            if !(is_pn_chars(c) || c == '.') {
                return self.error(format!("invalid prefix label character '{c}'"));
            }
            label.push(c);
            self.bump();
        }
        self.expect(':')?;
        self.skip_ws();
        let iri = self.iri_ref()?;
        self.prefixes.insert(label, iri.as_str());
        Ok(())
    }

    fn base_decl(&mut self) -> Result<()> {
        self.skip_ws();
        let iri = self.iri_ref()?;
        self.base = Some(iri.as_str().to_string());
        Ok(())
    }

    fn triples(&mut self) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some('[') {
            let subject = self.blank_node_property_list()?;
            self.skip_ws();
            if self.peek() != Some('.') {
                self.predicate_object_list(&subject)?;
            }
            return Ok(());
        }
        let subject = self.subject()?;
        self.predicate_object_list(&subject)
    }

    fn subject(&mut self) -> Result<Term> {
        self.skip_ws();
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri_ref()?)),
            Some('_') if self.peek_at(1) == Some(':') => Ok(Term::BlankNode(self.blank_label()?)),
            Some('(') => self.collection(),
            Some(_) => Ok(Term::Iri(self.prefixed_name()?)),
            None => self.error("unexpected end of input"),
        }
    }

    fn predicate_object_list(&mut self, subject: &Term) -> Result<()> {
        loop {
            let predicate = self.verb()?;
            self.object_list(subject, &predicate)?;
            self.skip_ws();
            if self.peek() != Some(';') {
                return Ok(());
            }
            while self.peek() == Some(';') {
                self.bump();
                self.skip_ws();
            }
            if matches!(self.peek(), Some('.') | Some(']') | None) {
                return Ok(());
            }
        }
    }

    fn verb(&mut self) -> Result<Iri> {
        self.skip_ws();
        if self.peek() == Some('a')
            && !self.peek_at(1).is_some_and(|c| is_pn_chars(c) || c == ':' || c == '.')
        {
            self.bump();
            return Ok(Iri::new_unchecked(rdf::TYPE));
        }
        if self.peek() == Some('<') {
            return self.iri_ref();
        }
        self.prefixed_name()
    }

    fn object_list(&mut self, subject: &Term, predicate: &Iri) -> Result<()> {
        loop {
            let object = self.object()?;
            self.emit(subject.clone(), predicate.clone(), object)?;
            self.skip_ws();
            if self.peek() == Some(',') {
                self.bump();
            } else {
                return Ok(());
            }
        }
    }

    fn emit(&mut self, s: Term, p: Iri, o: Term) -> Result<()> {
        match Triple::new(s, p, o) {
            Ok(t) => {
                self.graph.insert(t);
                Ok(())
            }
            Err(e) => self.error(e.to_string()),
        }
    }

    fn fresh_blank(&mut self) -> BlankNode {
        self.anon += 1;
        BlankNode::new(format!("anon{}", self.anon))
    }

    fn object(&mut self) -> Result<Term> {
        self.skip_ws();
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri_ref()?)),
            Some('_') if self.peek_at(1) == Some(':') => Ok(Term::BlankNode(self.blank_label()?)),
            Some('[') => self.blank_node_property_list(),
            Some('(') => self.collection(),
            Some('"') | Some('\'') => self.rdf_literal(),
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' || c == '.' => self.numeric_literal(),
            Some(_) if self.starts_with_keyword("true", false) => {
                self.advance(4);
                Ok(Literal::typed("true", Iri::new_unchecked(xsd::BOOLEAN)).into())
            }
            Some(_) if self.starts_with_keyword("false", false) => {
                self.advance(5);
                Ok(Literal::typed("false", Iri::new_unchecked(xsd::BOOLEAN)).into())
            }
            Some(_) => Ok(Term::Iri(self.prefixed_name()?)),
            None => self.error("unexpected end of input"),
        }
    }

    fn blank_node_property_list(&mut self) -> Result<Term> {
        self.expect('[')?;
        let node = Term::BlankNode(self.fresh_blank());
        self.skip_ws();
        if self.peek() != Some(']') {
            self.predicate_object_list(&node)?;
        }
        self.expect(']')?;
        Ok(node)
    }

    fn collection(&mut self) -> Result<Term> {
        self.expect('(')?;
        let mut items = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(')') => {
                    self.bump();
                    break;
                }
                None => return self.error("unterminated collection"),
                _ => items.push(self.object()?),
            }
        }
        let mut head = Term::Iri(Iri::new_unchecked(rdf::NIL));
        for item in items.into_iter().rev() {
            let cell = Term::BlankNode(self.fresh_blank());
            self.emit(cell.clone(), Iri::new_unchecked(rdf::FIRST), item)?;
            self.emit(cell.clone(), Iri::new_unchecked(rdf::REST), head)?;
            head = cell;
        }
        Ok(head)
    }

    fn blank_label(&mut self) -> Result<BlankNode> {
        self.advance(2);
        let mut label = String::new();
        match self.peek() {
            Some(c) if is_pn_chars_u(c) || c.is_ascii_digit() => {
                label.push(c);
                self.bump();
            }
            _ => return self.error("invalid blank node label"),
        }
        while let Some(c) = self.peek() {
            if is_pn_chars(c) || (c == '.' && self.peek_at(1).is_some_and(|n| is_pn_chars(n) || n == '.')) {
                label.push(c);
                self.bump();
            } else {
                break;
            }
        }
        Ok(BlankNode::new(label))
    }

    fn resolve(&self, raw: String) -> Result<Iri> {
        if let Ok(iri) = Iri::new(raw.clone()) {
            return Ok(iri);
        }
        let Some(base) = &self.base else {
            return self.error(format!("relative IRI <{raw}> without base"));
        };
        let base = match url::Url::parse(base) {
            Ok(b) => b,
            Err(e) => return self.error(format!("invalid base IRI: {e}")),
        };
        match base.join(&raw) {
            Ok(u) => Ok(Iri::new_unchecked(String::from(u))),
            Err(e) => self.error(format!("cannot resolve <{raw}>: {e}")),
        }
    }

    fn iri_ref(&mut self) -> Result<Iri> {
        if self.peek() != Some('<') {
            return self.error("expected IRI");
        }
        self.bump();
        let mut raw = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => raw.push(self.unicode_escape()?),
                Some(c) if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    return self.error(format!("invalid character '{c}' in IRI"));
                }
                Some(c) => raw.push(c),
                None => return self.error("unterminated IRI"),
            }
        }
        self.resolve(raw)
    }

    fn unicode_escape(&mut self) -> Result<char> {
        let len = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return self.error("invalid escape"),
        };
        let hex: String = (0..len).filter_map(|_| self.bump()).collect();
        u32::from_str_radix(&hex, 16)
            .ok()
            .and_then(char::from_u32)
            .map_or_else(|| self.error(format!("invalid unicode escape \\u{hex}")), Ok)
    }

    fn prefixed_name(&mut self) -> Result<Iri> {
        let mut label = String::new();
        while let Some(c) = self.peek() {
            if c == ':' {
                break;
            }
            if is_pn_chars(c) || (c == '.' && !label.is_empty()) {
                label.push(c);
                self.bump();
            } else {
                return match self.peek() {
                    Some(c) => self.error(format!("unexpected character '{c}'")),
                    None => self.error("unexpected end of input"),
                };
            }
        }
        if self.peek() != Some(':') {
            return self.error("expected prefixed name");
        }
        self.bump();
        let mut local = String::new();
        while let Some(c) = self.peek() {
            if is_pn_chars(c) || c == ':' {
                local.push(c);
                self.bump();
            } else if c == '.' {
                // a trailing '.' ends the statement
                if self.peek_at(1).is_some_and(|n| is_pn_chars(n) || n == ':' || n == '.' || n == '%' || n == '\\') {
                    local.push(c);
                    self.bump();
                } else {
                    break;
                }
            } else if c == '%' {
                let h1 = self.peek_at(1);
                let h2 = self.peek_at(2);
                if !(h1.is_some_and(|h| h.is_ascii_hexdigit()) && h2.is_some_and(|h| h.is_ascii_hexdigit())) {
                    return self.error("invalid percent escape");
                }
                local.extend([c, h1.unwrap(), h2.unwrap()]);
                self.advance(3);
            } else if c == '\\' {
                match self.peek_at(1) {
                    Some(e) if "_~.-!$&'()*+,;=/?#@%".contains(e) => {
                        local.push(e);
                        self.advance(2);
                    }
                    _ => return self.error("invalid local name escape"),
                }
            } else {
                break;
            }
        }
        let Some(ns) = self.prefixes.get(&label) else {
            return self.error(format!("undeclared prefix '{label}:'"));
        };
        self.resolve(format!("{ns}{local}"))
    }

    fn rdf_literal(&mut self) -> Result<Term> {
        let lexical = self.string()?;
        match self.peek() {
            Some('@') => {
                self.bump();
                let mut lang = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == '-' {
                        lang.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if lang.is_empty() {
                    return self.error("empty language tag");
                }
                Ok(Literal::lang(lexical, lang).into())
            }
            Some('^') if self.peek_at(1) == Some('^') => {
                self.advance(2);
                let datatype = if self.peek() == Some('<') {
                    self.iri_ref()?
                } else {
                    self.prefixed_name()?
                };
                Ok(Literal::typed(lexical, datatype).into())
            }
            _ => Ok(Literal::string(lexical).into()),
        }
    }

    fn string(&mut self) -> Result<String> {
        let quote = self.bump().unwrap();
        let long = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if long {
            self.advance(2);
        }
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return self.error("unterminated string"),
                Some(c) if c == quote => {
                    if !long {
                        return Ok(out);
                    }
                    if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                        self.advance(2);
                        // up to two extra quotes may precede the closing delimiter
                        while self.peek() == Some(quote) {
                            out.push(quote);
                            self.bump();
                        }
                        return Ok(out);
                    }
                    out.push(c);
                }
                Some('\\') => {
                    let c = match self.peek() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') | Some('U') => {
                            out.push(self.unicode_escape()?);
                            continue;
                        }
                        _ => return self.error("invalid string escape"),
                    };
                    self.bump();
                    out.push(c);
                }
                Some(c @ ('\n' | '\r')) if !long => {
                    let _ = c;
                    return self.error("newline in short string");
                }
                Some(c) => out.push(c),
            }
        }
    }

    fn numeric_literal(&mut self) -> Result<Term> {
        let mut text = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            text.push(c);
            self.bump();
        }
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            text.push(c);
            self.bump();
        }
        let mut datatype = xsd::INTEGER;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            text.push('.');
            self.bump();
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                text.push(c);
                self.bump();
            }
            datatype = xsd::DECIMAL;
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            text.push('e');
            self.bump();
            if let Some(c @ ('+' | '-')) = self.peek() {
                text.push(c);
                self.bump();
            }
            let start = text.len();
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                text.push(c);
                self.bump();
            }
            if text.len() == start {
                return self.error("malformed exponent");
            }
            datatype = xsd::DOUBLE;
        }
        if !text.chars().any(|c| c.is_ascii_digit()) {
            return self.error("malformed number");
        }
        Ok(Literal::typed(text, Iri::new_unchecked(datatype)).into())
    }
}
