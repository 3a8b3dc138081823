use std::fmt::Write;

use crate::term::escape_string;
use crate::vocab::{rdf, xsd};
use crate::{Graph, Iri, PrefixMap, Term};

fn write_iri(out: &mut String, iri: &Iri, prefixes: &PrefixMap) {
    match prefixes.abbreviate(iri) {
        Some(curie) => out.push_str(&curie),
        None => {
            out.push('<');
            for c in iri.as_str().chars() {
                match c {
                    '>' | '\\' | '"' | '{' | '}' | '|' | '^' | '`' | '<' => {
                        let _ = write!(out, "\\u{:04X}", c as u32);
                    }
                    c if c as u32 <= 0x20 => {
                        let _ = write!(out, "\\u{:04X}", c as u32);
                    }
                    c => out.push(c),
                }
            }
            out.push('>');
        }
    }
}

fn write_term(out: &mut String, term: &Term, prefixes: &PrefixMap) {
    match term {
        Term::Iri(iri) => write_iri(out, iri, prefixes),
        Term::BlankNode(b) => {
            out.push_str("_:");
            // labels minted elsewhere may carry characters Turtle rejects
            for c in b.label().chars() {
                out.push(if c.is_alphanumeric() || c == '_' || c == '-' { c } else { '_' });
            }
        }
        Term::Literal(l) => {
            out.push('"');
            out.push_str(&escape_string(l.lexical()));
            out.push('"');
            if let Some(lang) = l.language() {
                out.push('@');
                out.push_str(lang);
            } else if l.datatype() != xsd::STRING {
                out.push_str("^^");
                write_iri(out, l.datatype(), prefixes);
            }
        }
    }
}

/// Writes prefix declarations followed by one statement per subject, using
/// `;` and `,` lists.
pub fn serialize_turtle(graph: &Graph, prefixes: &PrefixMap) -> String {
    let mut out = String::new();
    for (label, ns) in prefixes.iter() {
        let _ = writeln!(out, "@prefix {label}: <{ns}> .");
    }
    if !graph.is_empty() && !prefixes.is_empty() {
        out.push('\n');
    }

    let mut triples = graph.iter().peekable();
    while let Some(first) = triples.next() {
        let subject = first.subject();
        write_term(&mut out, subject, prefixes);
        let mut predicate = first.predicate();
        out.push(' ');
        write_predicate(&mut out, predicate, prefixes);
        out.push(' ');
        write_term(&mut out, first.object(), prefixes);
        while let Some(next) = triples.next_if(|t| t.subject() == subject) {
            if next.predicate() == predicate {
                out.push_str(", ");
            } else {
                predicate = next.predicate();
                out.push_str(" ;\n    ");
                write_predicate(&mut out, predicate, prefixes);
                out.push(' ');
            }
            write_term(&mut out, next.object(), prefixes);
        }
        out.push_str(" .\n");
    }
    out
}

fn write_predicate(out: &mut String, predicate: &Iri, prefixes: &PrefixMap) {
    if predicate == rdf::TYPE {
        out.push('a');
    } else {
        write_iri(out, predicate, prefixes);
    }
}
