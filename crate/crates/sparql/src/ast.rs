//! Syntax tree for the supported SPARQL subset.
//!
//! IRIs are stored expanded. The prologue is kept so that serializing and
//! re-parsing is a fixpoint; `Display` writes every IRI in full.

use std::fmt::{self, Write};

use ontoquery_rdf::vocab::rdf;
use ontoquery_rdf::{Iri, Literal, Term, Triple};

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub prefixes: Vec<(String, String)>,
    pub form: QueryForm,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QueryForm {
    Select(SelectQuery),
    Ask {
        from: Vec<Iri>,
        pattern: GroupPattern,
    },
    Construct {
        template: Vec<TriplePattern>,
        from: Vec<Iri>,
        pattern: GroupPattern,
        limit: Option<usize>,
    },
    InsertData {
        graph: Option<Iri>,
        triples: Vec<Triple>,
    },
    DeleteWhere {
        with: Option<Iri>,
        template: Vec<TriplePattern>,
        pattern: GroupPattern,
    },
}

impl QueryForm {
    pub fn is_update(&self) -> bool {
        matches!(self, QueryForm::InsertData { .. } | QueryForm::DeleteWhere { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    Star,
    Vars(Vec<String>),
    /// `(COUNT(*) AS ?var)`
    CountAll(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectQuery {
    pub distinct: bool,
    pub projection: Projection,
    pub from: Vec<Iri>,
    pub pattern: GroupPattern,
    pub order_by: Vec<OrderKey>,
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderKey {
    pub descending: bool,
    pub expr: Expression,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroupPattern {
    pub elements: Vec<PatternElement>,
}

impl GroupPattern {
    /// Every triple pattern in the group, including inside OPTIONAL and
    /// nested groups (not sub-selects).
    pub fn triple_patterns(&self) -> Vec<&TriplePattern> {
        let mut out = Vec::new();
        self.collect_triples(&mut out);
        out
    }

    fn collect_triples<'a>(&'a self, out: &mut Vec<&'a TriplePattern>) {
        for el in &self.elements {
            match el {
                PatternElement::Triple(t) => out.push(t),
                PatternElement::Optional(g) | PatternElement::Group(g) => g.collect_triples(out),
                PatternElement::SubSelect(s) => s.pattern.collect_triples(out),
                _ => {}
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PatternElement {
    Triple(TriplePattern),
    Optional(GroupPattern),
    Group(GroupPattern),
    Filter(Expression),
    Values(ValuesBlock),
    SubSelect(Box<SelectQuery>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValuesBlock {
    pub vars: Vec<String>,
    /// `None` is `UNDEF`.
    pub rows: Vec<Vec<Option<Term>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TermPattern {
    Var(String),
    Term(Term),
}

impl TermPattern {
    pub fn var(name: &str) -> Self {
        TermPattern::Var(name.trim_start_matches(['?', '$']).to_string())
    }

    pub fn iri(iri: &Iri) -> Self {
        TermPattern::Term(Term::Iri(iri.clone()))
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            TermPattern::Var(v) => Some(v),
            TermPattern::Term(_) => None,
        }
    }
}

impl From<Term> for TermPattern {
    fn from(t: Term) -> Self {
        TermPattern::Term(t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: TermPattern,
    pub predicate: TermPattern,
    pub object: TermPattern,
}

impl TriplePattern {
    pub fn new(subject: TermPattern, predicate: TermPattern, object: TermPattern) -> Self {
        Self {
            subject,
            predicate,
            object,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Var(String),
    Term(Term),
    Or(Box<Expression>, Box<Expression>),
    And(Box<Expression>, Box<Expression>),
    Not(Box<Expression>),
    Compare(CompareOp, Box<Expression>, Box<Expression>),
    Regex {
        text: Box<Expression>,
        pattern: Box<Expression>,
        flags: Option<Box<Expression>>,
    },
    Str(Box<Expression>),
    Bound(String),
}

impl Expression {
    pub fn var(name: &str) -> Self {
        Expression::Var(name.trim_start_matches(['?', '$']).to_string())
    }

    pub fn compare(op: CompareOp, left: Expression, right: Expression) -> Self {
        Expression::Compare(op, Box::new(left), Box::new(right))
    }

    pub fn and(left: Expression, right: Expression) -> Self {
        Expression::And(Box::new(left), Box::new(right))
    }

    /// Conjunction of all expressions; `None` for an empty list.
    pub fn and_all(exprs: impl IntoIterator<Item = Expression>) -> Option<Self> {
        exprs.into_iter().reduce(Expression::and)
    }
}

// ---------------------------------------------------------------------------
// serialization

fn write_term(f: &mut impl Write, term: &Term) -> fmt::Result {
    match term {
        Term::Literal(l) => write_literal(f, l),
        other => write!(f, "{other}"),
    }
}

fn write_literal(f: &mut impl Write, l: &Literal) -> fmt::Result {
    write!(f, "{l}")
}

impl fmt::Display for TermPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermPattern::Var(v) => write!(f, "?{v}"),
            TermPattern::Term(Term::Iri(i)) if i == rdf::TYPE => f.write_str("a"),
            TermPattern::Term(t) => write_term(f, t),
        }
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

fn precedence(e: &Expression) -> u8 {
    match e {
        Expression::Or(..) => 1,
        Expression::And(..) => 2,
        Expression::Compare(..) => 3,
        Expression::Not(..) => 4,
        _ => 5,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expression, min: u8) -> fmt::Result {
    if precedence(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Var(v) => write!(f, "?{v}"),
            Expression::Term(t) => write_term(f, t),
            Expression::Or(a, b) => {
                write_operand(f, a, 1)?;
                f.write_str(" || ")?;
                write_operand(f, b, 2)
            }
            Expression::And(a, b) => {
                write_operand(f, a, 2)?;
                f.write_str(" && ")?;
                write_operand(f, b, 3)
            }
            Expression::Compare(op, a, b) => {
                write_operand(f, a, 4)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, b, 4)
            }
            Expression::Not(e) => {
                f.write_str("!")?;
                write_operand(f, e, 5)
            }
            Expression::Regex { text, pattern, flags } => {
                write!(f, "regex({text}, {pattern}")?;
                if let Some(flags) = flags {
                    write!(f, ", {flags}")?;
                }
                f.write_str(")")
            }
            Expression::Str(e) => write!(f, "str({e})"),
            Expression::Bound(v) => write!(f, "bound(?{v})"),
        }
    }
}

struct Indent(usize);

impl fmt::Display for Indent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for _ in 0..self.0 {
            f.write_str("  ")?;
        }
        Ok(())
    }
}

impl GroupPattern {
    fn write(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        f.write_str("{\n")?;
        for el in &self.elements {
            let pad = Indent(depth + 1);
            match el {
                PatternElement::Triple(t) => writeln!(f, "{pad}{t}")?,
                PatternElement::Optional(g) => {
                    write!(f, "{pad}OPTIONAL ")?;
                    g.write(f, depth + 1)?;
                    f.write_str("\n")?;
                }
                PatternElement::Group(g) => {
                    write!(f, "{pad}")?;
                    g.write(f, depth + 1)?;
                    f.write_str("\n")?;
                }
                PatternElement::Filter(e) => writeln!(f, "{pad}FILTER({e})")?,
                PatternElement::Values(v) => {
                    write!(f, "{pad}VALUES (")?;
                    for (i, var) in v.vars.iter().enumerate() {
                        if i > 0 {
                            f.write_str(" ")?;
                        }
                        write!(f, "?{var}")?;
                    }
                    f.write_str(") {")?;
                    for row in &v.rows {
                        f.write_str(" (")?;
                        for (i, cell) in row.iter().enumerate() {
                            if i > 0 {
                                f.write_str(" ")?;
                            }
                            match cell {
                                Some(t) => write_term(f, t)?,
                                None => f.write_str("UNDEF")?,
                            }
                        }
                        f.write_str(")")?;
                    }
                    f.write_str(" }\n")?;
                }
                PatternElement::SubSelect(s) => {
                    writeln!(f, "{pad}{{")?;
                    s.write(f, depth + 2)?;
                    writeln!(f, "{pad}}}")?;
                }
            }
        }
        write!(f, "{}}}", Indent(depth))
    }
}

fn write_from(f: &mut fmt::Formatter<'_>, from: &[Iri], pad: &Indent) -> fmt::Result {
    for g in from {
        writeln!(f, "{pad}FROM {g}")?;
    }
    Ok(())
}

impl SelectQuery {
    fn write(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        let pad = Indent(depth);
        write!(f, "{pad}SELECT ")?;
        if self.distinct {
            f.write_str("DISTINCT ")?;
        }
        match &self.projection {
            Projection::Star => f.write_str("*")?,
            Projection::Vars(vars) => {
                for (i, v) in vars.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "?{v}")?;
                }
            }
            Projection::CountAll(v) => write!(f, "(COUNT(*) AS ?{v})")?,
        }
        f.write_str("\n")?;
        write_from(f, &self.from, &pad)?;
        write!(f, "{pad}WHERE ")?;
        self.pattern.write(f, depth)?;
        f.write_str("\n")?;
        if !self.order_by.is_empty() {
            write!(f, "{pad}ORDER BY")?;
            for key in &self.order_by {
                if key.descending {
                    write!(f, " DESC({})", key.expr)?;
                } else {
                    write!(f, " ASC({})", key.expr)?;
                }
            }
            f.write_str("\n")?;
        }
        if let Some(limit) = self.limit {
            writeln!(f, "{pad}LIMIT {limit}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, ns) in &self.prefixes {
            writeln!(f, "PREFIX {label}: <{ns}>")?;
        }
        let root = Indent(0);
        match &self.form {
            QueryForm::Select(s) => s.write(f, 0),
            QueryForm::Ask { from, pattern } => {
                f.write_str("ASK\n")?;
                write_from(f, from, &root)?;
                f.write_str("WHERE ")?;
                pattern.write(f, 0)?;
                f.write_str("\n")
            }
            QueryForm::Construct {
                template,
                from,
                pattern,
                limit,
            } => {
                f.write_str("CONSTRUCT {\n")?;
                for t in template {
                    writeln!(f, "  {t}")?;
                }
                f.write_str("}\n")?;
                write_from(f, from, &root)?;
                f.write_str("WHERE ")?;
                pattern.write(f, 0)?;
                f.write_str("\n")?;
                if let Some(limit) = limit {
                    writeln!(f, "LIMIT {limit}")?;
                }
                Ok(())
            }
            QueryForm::InsertData { graph, triples } => {
                f.write_str("INSERT DATA {\n")?;
                let inner = match graph {
                    Some(g) => {
                        writeln!(f, "  GRAPH {g} {{")?;
                        2
                    }
                    None => 1,
                };
                for t in triples {
                    write!(f, "{}", Indent(inner))?;
                    write_term(f, t.subject())?;
                    write!(f, " {} ", t.predicate())?;
                    write_term(f, t.object())?;
                    f.write_str(" .\n")?;
                }
                if graph.is_some() {
                    f.write_str("  }\n")?;
                }
                f.write_str("}\n")
            }
            QueryForm::DeleteWhere {
                with,
                template,
                pattern,
            } => {
                if let Some(g) = with {
                    writeln!(f, "WITH {g}")?;
                }
                f.write_str("DELETE {\n")?;
                for t in template {
                    writeln!(f, "  {t}")?;
                }
                f.write_str("}\nWHERE ")?;
                pattern.write(f, 0)?;
                f.write_str("\n")
            }
        }
    }
}
