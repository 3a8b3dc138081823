use ontoquery_rdf::vocab::{rdf, xsd};
use ontoquery_rdf::{BlankNode, Iri, Literal, Term, Triple};

use crate::ast::*;
use crate::lexer::{tokenize, Tok, Token};
use crate::{Error, Result};

/// Parses one query or update in the supported subset.
///
/// Constructs outside the subset (UNION, MINUS, BIND, GRAPH patterns,
/// aggregates other than `COUNT(*)`, ...) fail with [`Error::Unsupported`].
pub fn parse_query(text: &str) -> Result<Query> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        prefixes: Vec::new(),
    };
    let query = p.query()?;
    if let Some(t) = p.tokens.get(p.pos) {
        return Err(Error::Syntax {
            line: t.line,
            column: t.column,
            message: format!("trailing input {:?}", t.tok),
        });
    }
    Ok(query)
}

const UNSUPPORTED_WORDS: [&str; 20] = [
    "UNION", "MINUS", "BIND", "SERVICE", "GRAPH", "GROUP", "HAVING", "OFFSET", "EXISTS", "NOT", "DESCRIBE",
    "LOAD", "CLEAR", "DROP", "CREATE", "USING", "NAMED", "REDUCED", "BASE", "MOVE",
];

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    prefixes: Vec<(String, String)>,
}

impl Parser {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, column) = match self.tokens.get(self.pos).or_else(|| self.tokens.last()) {
            Some(t) => (t.line, t.column),
            None => (1, 1),
        };
        Err(Error::Syntax {
            line,
            column,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn is_word(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(word))
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if self.is_word(word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, word: &str) -> Result<()> {
        if self.eat_word(word) {
            Ok(())
        } else {
            self.unexpected(&format!("expected {word}"))
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::Punct(q)) if *q == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.unexpected(&format!("expected '{p}'"))
        }
    }

    /// Syntax error, or an unsupported-construct error when the offending
    /// token is a keyword outside the subset.
    fn unexpected<T>(&self, message: &str) -> Result<T> {
        match self.peek() {
            Some(Tok::Word(w)) if UNSUPPORTED_WORDS.iter().any(|u| u.eq_ignore_ascii_case(w)) => {
                Err(Error::Unsupported(w.to_ascii_uppercase()))
            }
            Some(t) => self.err(format!("{message}, found {t:?}")),
            None => self.err(format!("{message}, found end of input")),
        }
    }

    fn query(&mut self) -> Result<Query> {
        loop {
            if self.eat_word("PREFIX") {
                let Some(Tok::PName(label, local)) = self.next() else {
                    self.pos -= 1;
                    return self.unexpected("expected prefix label");
                };
                if !local.is_empty() {
                    return self.err("prefix label must end with ':'");
                }
                let Some(Tok::IriRef(ns)) = self.next() else {
                    self.pos -= 1;
                    return self.unexpected("expected namespace IRI");
                };
                self.prefixes.retain(|(l, _)| l != &label);
                self.prefixes.push((label, ns));
            } else if self.is_word("BASE") {
                return Err(Error::Unsupported("BASE".into()));
            } else {
                break;
            }
        }
        let form = if self.eat_word("SELECT") {
            QueryForm::Select(self.select_rest(true)?)
        } else if self.eat_word("ASK") {
            let from = self.dataset_clauses()?;
            self.eat_word("WHERE");
            let pattern = self.group()?;
            QueryForm::Ask { from, pattern }
        } else if self.eat_word("CONSTRUCT") {
            self.construct_rest()?
        } else if self.eat_word("INSERT") {
            if !self.eat_word("DATA") {
                return Err(Error::Unsupported("INSERT without DATA".into()));
            }
            self.insert_data_rest()?
        } else if self.is_word("WITH") || self.is_word("DELETE") {
            self.delete_rest()?
        } else {
            return self.unexpected("expected SELECT, ASK, CONSTRUCT, INSERT DATA or DELETE");
        };
        Ok(Query {
            prefixes: std::mem::take(&mut self.prefixes),
            form,
        })
    }

    fn dataset_clauses(&mut self) -> Result<Vec<Iri>> {
        let mut from = Vec::new();
        while self.eat_word("FROM") {
            if self.is_word("NAMED") {
                return Err(Error::Unsupported("FROM NAMED".into()));
            }
            from.push(self.iri()?);
        }
        Ok(from)
    }

    fn select_rest(&mut self, top_level: bool) -> Result<SelectQuery> {
        let distinct = self.eat_word("DISTINCT");
        let projection = if self.eat_punct("*") {
            Projection::Star
        } else if self.eat_punct("(") {
            if !self.eat_word("COUNT") {
                return Err(Error::Unsupported("projection expressions other than COUNT(*)".into()));
            }
            self.expect_punct("(")?;
            if !self.eat_punct("*") {
                return Err(Error::Unsupported("COUNT over expressions".into()));
            }
            self.expect_punct(")")?;
            self.expect_word("AS")?;
            let var = self.var()?;
            self.expect_punct(")")?;
            Projection::CountAll(var)
        } else {
            let mut vars = Vec::new();
            while let Some(Tok::Var(v)) = self.peek() {
                vars.push(v.clone());
                self.pos += 1;
            }
            if vars.is_empty() {
                return self.unexpected("expected projection");
            }
            Projection::Vars(vars)
        };
        let from = if top_level { self.dataset_clauses()? } else { Vec::new() };
        self.eat_word("WHERE");
        let pattern = self.group()?;
        let mut order_by = Vec::new();
        if self.eat_word("ORDER") {
            self.expect_word("BY")?;
            loop {
                if self.eat_word("ASC") || self.is_punct("(") {
                    order_by.push(OrderKey {
                        descending: false,
                        expr: self.bracketted_expression()?,
                    });
                } else if self.eat_word("DESC") {
                    order_by.push(OrderKey {
                        descending: true,
                        expr: self.bracketted_expression()?,
                    });
                } else if let Some(Tok::Var(v)) = self.peek() {
                    order_by.push(OrderKey {
                        descending: false,
                        expr: Expression::Var(v.clone()),
                    });
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if order_by.is_empty() {
                return self.unexpected("expected order key");
            }
        }
        let limit = self.limit()?;
        if self.is_word("OFFSET") || self.is_word("GROUP") || self.is_word("HAVING") {
            return self.unexpected("");
        }
        Ok(SelectQuery {
            distinct,
            projection,
            from,
            pattern,
            order_by,
            limit,
        })
    }

    fn limit(&mut self) -> Result<Option<usize>> {
        if !self.eat_word("LIMIT") {
            return Ok(None);
        }
        match self.next() {
            Some(Tok::Number(n, "integer")) => match n.parse() {
                Ok(v) => Ok(Some(v)),
                Err(_) => self.err("invalid LIMIT"),
            },
            _ => {
                self.pos -= 1;
                self.unexpected("expected integer after LIMIT")
            }
        }
    }

    fn construct_rest(&mut self) -> Result<QueryForm> {
        self.expect_punct("{")?;
        let template = self.triples_template()?;
        let from = self.dataset_clauses()?;
        self.expect_word("WHERE")?;
        let pattern = self.group()?;
        let limit = self.limit()?;
        Ok(QueryForm::Construct {
            template,
            from,
            pattern,
            limit,
        })
    }

    /// Triple patterns up to and including the closing brace.
    fn triples_template(&mut self) -> Result<Vec<TriplePattern>> {
        let mut out = Vec::new();
        loop {
            if self.eat_punct("}") {
                return Ok(out);
            }
            if self.eat_punct(".") {
                continue;
            }
            self.triples_same_subject(&mut out)?;
        }
    }

    fn insert_data_rest(&mut self) -> Result<QueryForm> {
        self.expect_punct("{")?;
        let (graph, patterns) = if self.eat_word("GRAPH") {
            let g = self.iri()?;
            self.expect_punct("{")?;
            let patterns = self.triples_template()?;
            while self.eat_punct(".") {}
            self.expect_punct("}")?;
            (Some(g), patterns)
        } else {
            (None, self.triples_template()?)
        };
        let mut triples = Vec::with_capacity(patterns.len());
        for tp in patterns {
            let ground = |t: TermPattern| match t {
                TermPattern::Term(t) => Ok(t),
                TermPattern::Var(v) => Err(Error::Syntax {
                    line: 0,
                    column: 0,
                    message: format!("variable ?{v} in INSERT DATA"),
                }),
            };
            let s = ground(tp.subject)?;
            let Term::Iri(p) = ground(tp.predicate)? else {
                return self.err("predicate must be an IRI");
            };
            let o = ground(tp.object)?;
            match Triple::new(s, p, o) {
                Ok(t) => triples.push(t),
                Err(e) => return self.err(e.to_string()),
            }
        }
        Ok(QueryForm::InsertData { graph, triples })
    }

    fn delete_rest(&mut self) -> Result<QueryForm> {
        let with = if self.eat_word("WITH") { Some(self.iri()?) } else { None };
        self.expect_word("DELETE")?;
        if self.is_word("DATA") || self.is_word("WHERE") {
            return Err(Error::Unsupported(format!(
                "DELETE {}",
                if self.is_word("DATA") { "DATA" } else { "WHERE shorthand" }
            )));
        }
        self.expect_punct("{")?;
        let template = self.triples_template()?;
        if self.is_word("INSERT") || self.is_word("USING") {
            return Err(Error::Unsupported("DELETE/INSERT and USING".into()));
        }
        self.expect_word("WHERE")?;
        let pattern = self.group()?;
        Ok(QueryForm::DeleteWhere {
            with,
            template,
            pattern,
        })
    }

    fn group(&mut self) -> Result<GroupPattern> {
        self.expect_punct("{")?;
        if self.eat_word("SELECT") {
            let sub = self.select_rest(false)?;
            self.expect_punct("}")?;
            return Ok(GroupPattern {
                elements: vec![PatternElement::SubSelect(Box::new(sub))],
            });
        }
        let mut elements = Vec::new();
        loop {
            if self.eat_punct("}") {
                break;
            }
            if self.eat_punct(".") {
                continue;
            }
            if self.eat_word("OPTIONAL") {
                elements.push(PatternElement::Optional(self.group()?));
            } else if self.eat_word("FILTER") {
                elements.push(PatternElement::Filter(self.constraint()?));
            } else if self.eat_word("VALUES") {
                elements.push(PatternElement::Values(self.values()?));
            } else if self.is_punct("{") {
                let inner = self.group()?;
                if self.is_word("UNION") || self.is_word("MINUS") {
                    return self.unexpected("");
                }
                match inner.elements.as_slice() {
                    [PatternElement::SubSelect(_)] => elements.extend(inner.elements),
                    _ => elements.push(PatternElement::Group(inner)),
                }
            } else if matches!(self.peek(), Some(Tok::Word(w)) if !w.eq_ignore_ascii_case("a")
                && !w.eq_ignore_ascii_case("true") && !w.eq_ignore_ascii_case("false"))
            {
                return self.unexpected("expected triple pattern");
            } else {
                let mut triples = Vec::new();
                self.triples_same_subject(&mut triples)?;
                elements.extend(triples.into_iter().map(PatternElement::Triple));
            }
        }
        Ok(GroupPattern { elements })
    }

    fn triples_same_subject(&mut self, out: &mut Vec<TriplePattern>) -> Result<()> {
        let subject = self.term_pattern(false)?;
        loop {
            let predicate = self.verb()?;
            loop {
                let object = self.term_pattern(true)?;
                out.push(TriplePattern::new(subject.clone(), predicate.clone(), object));
                if !self.eat_punct(",") {
                    break;
                }
            }
            if !self.eat_punct(";") {
                break;
            }
            while self.eat_punct(";") {}
            if self.is_punct(".") || self.is_punct("}") {
                break;
            }
        }
        Ok(())
    }

    fn verb(&mut self) -> Result<TermPattern> {
        if self.eat_word("a") {
            return Ok(TermPattern::Term(Term::Iri(Iri::new_unchecked(rdf::TYPE))));
        }
        match self.peek() {
            Some(Tok::Var(_)) => self.term_pattern(false),
            Some(Tok::IriRef(_)) | Some(Tok::PName(..)) => Ok(TermPattern::Term(Term::Iri(self.iri()?))),
            _ => self.unexpected("expected predicate"),
        }
    }

    fn term_pattern(&mut self, allow_literal: bool) -> Result<TermPattern> {
        if let Some(Tok::Var(v)) = self.peek() {
            let v = v.clone();
            self.pos += 1;
            return Ok(TermPattern::Var(v));
        }
        let term = self.term()?;
        if term.is_literal() && !allow_literal {
            return self.err("literal not allowed here");
        }
        Ok(TermPattern::Term(term))
    }

    fn term(&mut self) -> Result<Term> {
        match self.peek().cloned() {
            Some(Tok::IriRef(_)) => Ok(Term::Iri(self.iri()?)),
            Some(Tok::PName(prefix, local)) if prefix == "_" => {
                self.pos += 1;
                Ok(Term::BlankNode(BlankNode::new(local)))
            }
            Some(Tok::PName(..)) => Ok(Term::Iri(self.iri()?)),
            Some(Tok::Str(_)) | Some(Tok::Number(..)) => Ok(Term::Literal(self.literal()?)),
            Some(Tok::Word(w)) if w == "true" || w == "false" => {
                self.pos += 1;
                Ok(Term::Literal(Literal::typed(w, Iri::new_unchecked(xsd::BOOLEAN))))
            }
            _ => self.unexpected("expected term"),
        }
    }

    fn literal(&mut self) -> Result<Literal> {
        match self.next() {
            Some(Tok::Number(text, dt)) => Ok(Literal::typed(
                text,
                Iri::new_unchecked(format!("{}{dt}", ontoquery_rdf::vocab::XSD)),
            )),
            Some(Tok::Str(s)) => {
                if let Some(Tok::LangTag(tag)) = self.peek() {
                    let tag = tag.clone();
                    self.pos += 1;
                    return Ok(Literal::lang(s, tag));
                }
                if self.eat_punct("^^") {
                    let dt = self.iri()?;
                    return Ok(Literal::typed(s, dt));
                }
                Ok(Literal::string(s))
            }
            _ => {
                self.pos -= 1;
                self.unexpected("expected literal")
            }
        }
    }

    fn iri(&mut self) -> Result<Iri> {
        match self.next() {
            Some(Tok::IriRef(s)) => match Iri::new(s.clone()) {
                Ok(iri) => Ok(iri),
                Err(_) => {
                    self.pos -= 1;
                    self.err(format!("relative IRI <{s}>"))
                }
            },
            Some(Tok::PName(prefix, local)) => {
                let Some((_, ns)) = self.prefixes.iter().find(|(l, _)| *l == prefix) else {
                    self.pos -= 1;
                    return self.err(format!("undeclared prefix '{prefix}:'"));
                };
                Ok(Iri::new_unchecked(format!("{ns}{}", unescape_local(&local))))
            }
            _ => {
                self.pos -= 1;
                self.unexpected("expected IRI")
            }
        }
    }

    fn var(&mut self) -> Result<String> {
        match self.next() {
            Some(Tok::Var(v)) => Ok(v),
            _ => {
                self.pos -= 1;
                self.unexpected("expected variable")
            }
        }
    }

    fn values(&mut self) -> Result<ValuesBlock> {
        if let Some(Tok::Var(_)) = self.peek() {
            let var = self.var()?;
            self.expect_punct("{")?;
            let mut rows = Vec::new();
            while !self.eat_punct("}") {
                rows.push(vec![self.data_value()?]);
            }
            return Ok(ValuesBlock { vars: vec![var], rows });
        }
        self.expect_punct("(")?;
        let mut vars = Vec::new();
        while !self.eat_punct(")") {
            vars.push(self.var()?);
        }
        self.expect_punct("{")?;
        let mut rows = Vec::new();
        while !self.eat_punct("}") {
            self.expect_punct("(")?;
            let mut row = Vec::new();
            while !self.eat_punct(")") {
                row.push(self.data_value()?);
            }
            if row.len() != vars.len() {
                return self.err(format!("VALUES row has {} values for {} variables", row.len(), vars.len()));
            }
            rows.push(row);
        }
        Ok(ValuesBlock { vars, rows })
    }

    fn data_value(&mut self) -> Result<Option<Term>> {
        if self.eat_word("UNDEF") {
            return Ok(None);
        }
        let t = self.term()?;
        if matches!(t, Term::BlankNode(_)) {
            return self.err("blank node in VALUES");
        }
        Ok(Some(t))
    }

    fn constraint(&mut self) -> Result<Expression> {
        if self.is_punct("(") {
            return self.bracketted_expression();
        }
        self.builtin_call()
    }

    fn bracketted_expression(&mut self) -> Result<Expression> {
        self.expect_punct("(")?;
        let e = self.expression()?;
        self.expect_punct(")")?;
        Ok(e)
    }

    fn expression(&mut self) -> Result<Expression> {
        let mut left = self.and_expression()?;
        while self.eat_punct("||") {
            let right = self.and_expression()?;
            left = Expression::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and_expression(&mut self) -> Result<Expression> {
        let mut left = self.relational()?;
        while self.eat_punct("&&") {
            let right = self.relational()?;
            left = Expression::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn relational(&mut self) -> Result<Expression> {
        let left = self.unary()?;
        let op = match self.peek() {
            Some(Tok::Punct("=")) => CompareOp::Eq,
            Some(Tok::Punct("!=")) => CompareOp::Ne,
            Some(Tok::Punct("<")) => CompareOp::Lt,
            Some(Tok::Punct("<=")) => CompareOp::Le,
            Some(Tok::Punct(">")) => CompareOp::Gt,
            Some(Tok::Punct(">=")) => CompareOp::Ge,
            Some(Tok::Word(w)) if w.eq_ignore_ascii_case("IN") || w.eq_ignore_ascii_case("NOT") => {
                return Err(Error::Unsupported(w.to_ascii_uppercase()));
            }
            _ => return Ok(left),
        };
        self.pos += 1;
        let right = self.unary()?;
        Ok(Expression::Compare(op, Box::new(left), Box::new(right)))
    }

    fn unary(&mut self) -> Result<Expression> {
        if self.eat_punct("!") {
            return Ok(Expression::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expression> {
        match self.peek().cloned() {
            Some(Tok::Punct("(")) => self.bracketted_expression(),
            Some(Tok::Var(v)) => {
                self.pos += 1;
                Ok(Expression::Var(v))
            }
            Some(Tok::Word(w)) if w != "true" && w != "false" => self.builtin_call(),
            Some(Tok::Punct(p)) if p == "+" || p == "-" || p == "*" => Err(Error::Unsupported("arithmetic".into())),
            _ => Ok(Expression::Term(self.term()?)),
        }
    }

    fn builtin_call(&mut self) -> Result<Expression> {
        let Some(Tok::Word(name)) = self.peek().cloned() else {
            return self.unexpected("expected function call");
        };
        self.pos += 1;
        match name.to_ascii_lowercase().as_str() {
            "regex" => {
                self.expect_punct("(")?;
                let text = self.expression()?;
                self.expect_punct(",")?;
                let pattern = self.expression()?;
                let flags = if self.eat_punct(",") {
                    Some(Box::new(self.expression()?))
                } else {
                    None
                };
                self.expect_punct(")")?;
                Ok(Expression::Regex {
                    text: Box::new(text),
                    pattern: Box::new(pattern),
                    flags,
                })
            }
            "str" => Ok(Expression::Str(Box::new(self.bracketted_expression()?))),
            "bound" => {
                self.expect_punct("(")?;
                let v = self.var()?;
                self.expect_punct(")")?;
                Ok(Expression::Bound(v))
            }
            "exists" | "not" => Err(Error::Unsupported("EXISTS".into())),
            _ => Err(Error::Unsupported(format!("function {name}"))),
        }
    }
}

fn unescape_local(local: &str) -> String {
    // backslash escapes are already removed by the lexer; %XX stays encoded
    local.to_string()
}
