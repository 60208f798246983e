//! N-Triples reader and writer.
//!
//! One statement per line, terminated by `" ."`. Output lines are sorted so equal graphs
//! serialize to identical bytes.

use super::graph::Graph;
use super::term::{BlankNode, Iri, Literal, Term, Triple};
use super::RdfError;

pub fn parse_ntriples(text: &str) -> Result<Graph, RdfError> {
    let mut graph = Graph::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let triple = LineParser::new(trimmed)
            .statement()
            .map_err(|message| RdfError::Syntax { line: line_no, message })?;
        graph.insert(triple);
    }
    Ok(graph)
}

pub fn serialize_ntriples(graph: &Graph) -> String {
    let mut lines: Vec<String> = graph.iter().map(|t| t.to_string()).collect();
    lines.sort();
    let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

struct LineParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> LineParser<'a> {
    fn new(src: &'a str) -> Self {
        LineParser { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    fn statement(mut self) -> Result<Triple, String> {
        let subject = self.term()?;
        self.skip_ws();
        let predicate = self.term()?;
        self.skip_ws();
        let object = self.term()?;
        self.skip_ws();
        if self.bump() != Some('.') {
            return Err(format!("expected terminal '.' at column {}", self.pos + 1));
        }
        self.skip_ws();
        match self.peek() {
            None | Some('#') => {}
            Some(c) => return Err(format!("unexpected {c:?} after '.' at column {}", self.pos + 1)),
        }
        Triple::new(subject, predicate, object).map_err(|e| e.to_string())
    }

    fn term(&mut self) -> Result<Term, String> {
        match self.peek() {
            Some('<') => self.iri().map(Term::Iri),
            Some('"') => self.literal().map(Term::Literal),
            Some('_') => self.blank().map(Term::BlankNode),
            Some(c) => Err(format!("unexpected {c:?} at column {}", self.pos + 1)),
            None => Err("unexpected end of line".into()),
        }
    }

    fn iri(&mut self) -> Result<Iri, String> {
        self.bump();
        let mut value = String::new();
        loop {
            match self.bump() {
                None => return Err("unterminated IRI".into()),
                Some('>') => break,
                Some('\\') => value.push(self.unicode_escape()?),
                Some(c) => value.push(c),
            }
        }
        Iri::new(value).map_err(|e| e.to_string())
    }

    fn blank(&mut self) -> Result<BlankNode, String> {
        if !self.rest().starts_with("_:") {
            return Err(format!("expected '_:' at column {}", self.pos + 1));
        }
        self.pos += 2;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        // A trailing '.' belongs to the statement terminator.
        while self.pos > start && self.src[..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        BlankNode::new(&self.src[start..self.pos]).map_err(|e| e.to_string())
    }

    fn literal(&mut self) -> Result<Literal, String> {
        self.bump();
        let mut lexical = String::new();
        loop {
            match self.bump() {
                None => return Err("unterminated literal".into()),
                Some('"') => break,
                Some('\\') => {
                    let c = match self.peek() {
                        Some('u') | Some('U') => self.unicode_escape()?,
                        _ => match self.bump() {
                            Some('t') => '\t',
                            Some('b') => '\u{8}',
                            Some('n') => '\n',
                            Some('r') => '\r',
                            Some('f') => '\u{c}',
                            Some('"') => '"',
                            Some('\'') => '\'',
                            Some('\\') => '\\',
                            other => return Err(format!("bad escape {other:?} in literal")),
                        },
                    };
                    lexical.push(c);
                }
                Some(c) => lexical.push(c),
            }
        }
        if self.rest().starts_with("^^") {
            self.pos += 2;
            if self.peek() != Some('<') {
                return Err(format!("expected datatype IRI at column {}", self.pos + 1));
            }
            let dt = self.iri()?;
            Ok(Literal::typed(lexical, dt))
        } else if self.peek() == Some('@') {
            self.bump();
            let start = self.pos;
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == '-' {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            Literal::lang(lexical, &self.src[start..self.pos]).map_err(|e| e.to_string())
        } else {
            Ok(Literal::string(lexical))
        }
    }

    /// Reads `uXXXX` or `UXXXXXXXX` after a consumed backslash.
    fn unicode_escape(&mut self) -> Result<char, String> {
        let len = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            other => return Err(format!("bad escape {other:?}")),
        };
        let digits = self.rest().get(..len).ok_or("truncated unicode escape")?;
        let code = u32::from_str_radix(digits, 16).map_err(|_| format!("bad unicode escape {digits:?}"))?;
        self.pos += len;
        char::from_u32(code).ok_or_else(|| format!("invalid code point {code:X}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::vocab::{XSD_DECIMAL, XSD_STRING};
    use proptest::prelude::*;

    #[test]
    fn empty_input_gives_empty_graph() {
        assert!(parse_ntriples("").unwrap().is_empty());
        assert!(parse_ntriples("# comment only\n\n").unwrap().is_empty());
        assert_eq!(serialize_ntriples(&Graph::new()), "");
    }

    #[test]
    fn typed_literal_keeps_datatype() {
        let g = parse_ntriples(
            "<http://w3id.org/energy/c1> <http://w3id.org/energy/measure> \"320\"^^<http://www.w3.org/2001/XMLSchema#decimal> .\n",
        )
        .unwrap();
        assert_eq!(g.len(), 1);
        let t = g.iter().next().unwrap();
        let lit = t.object().as_literal().unwrap();
        assert_eq!(lit.lexical(), "320");
        assert_eq!(lit.datatype().as_str(), XSD_DECIMAL);
    }

    #[test]
    fn missing_terminal_dot_names_line() {
        let text = "<http://e/a> <http://e/p> <http://e/b> .\n<http://e/a> <http://e/p> \"x\"\n";
        match parse_ntriples(text) {
            Err(RdfError::Syntax { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains('.'), "{message}");
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn literal_subject_is_rejected() {
        assert!(parse_ntriples("\"x\" <http://e/p> <http://e/b> .").is_err());
    }

    #[test]
    fn blank_nodes_lang_and_escapes_round_trip() {
        let text = "_:b1 <http://e/p> \"tab\\there \\\"q\\\" \\u00E9\"@sr-Latn .\n_:b1 <http://e/q> _:b2.\n";
        let g = parse_ntriples(text).unwrap();
        assert_eq!(g.len(), 2);
        let again = parse_ntriples(&serialize_ntriples(&g)).unwrap();
        assert_eq!(g, again);
        let plain = parse_ntriples("<http://e/a> <http://e/p> \"v\" .").unwrap();
        let lit = plain.iter().next().unwrap().object().as_literal().unwrap().clone();
        assert_eq!(lit.datatype().as_str(), XSD_STRING);
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        prop_oneof![
            "[a-z]{1,6}".prop_map(|s| Term::iri(format!("http://e/{s}")).unwrap()),
            any::<String>().prop_map(Term::string),
            (
                "[0-9]{1,4}",
                prop::sample::select(vec![XSD_DECIMAL, "http://www.w3.org/2001/XMLSchema#integer"])
            )
                .prop_map(|(s, dt)| Term::typed(s, Iri::new(dt).unwrap())),
            ("[a-z ]{0,5}", "[a-z]{2}").prop_map(|(s, l)| Term::Literal(Literal::lang(s, l).unwrap())),
            "[a-z][a-z0-9]{0,4}".prop_map(|s| Term::BlankNode(BlankNode::new(s).unwrap())),
        ]
    }

    fn arb_triple() -> impl Strategy<Value = Triple> {
        (arb_term(), "[a-z]{1,4}", arb_term()).prop_filter_map("literal subject", |(s, p, o)| {
            Triple::new(s, Term::iri(format!("http://e/{p}")).unwrap(), o).ok()
        })
    }

    proptest! {
        #[test]
        fn round_trip_fixpoint(triples in proptest::collection::vec(arb_triple(), 0..40)) {
            let g: Graph = triples.into_iter().collect();
            let text = serialize_ntriples(&g);
            let parsed = parse_ntriples(&text).unwrap();
            prop_assert_eq!(&parsed, &g);
            prop_assert_eq!(serialize_ntriples(&parsed), text);
        }
    }
}
