//! Recursive-descent parser for the supported SELECT subset.
//!
//! ```text
//! query    := ('PREFIX' PNAME_NS IRIREF)* 'SELECT' 'DISTINCT'? (var+ | '*')
//!             'WHERE'? '{' (triples | filter) ('.'? (triples | filter))* '.'? '}' ('LIMIT' INTEGER)?
//! triples  := subject predicate object (',' object)* (';' predicate object (',' object)*)*
//! filter   := 'FILTER' '(' compare ('&&' compare)* ')'
//! compare  := var op constant | constant op var
//! ```

use std::collections::HashMap;

use super::ast::{CompareOp, Filter, Query, TermPattern, TriplePattern, Variable};
use super::SparqlError;
use crate::rdf::vocab::{RDF_TYPE, XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER};
use crate::rdf::{Iri, Literal, Term};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Iri(String),
    PName(String, String),
    Var(String),
    Str(String),
    Number(String),
    Word(String),
    Punct(char),
    Op(CompareOp),
    And,
    DoubleCaret,
    LangTag(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Iri(i) => format!("IRI <{i}>"),
            Tok::PName(p, l) => format!("prefixed name {p}:{l}"),
            Tok::Var(v) => format!("variable ?{v}"),
            Tok::Str(_) => "string literal".into(),
            Tok::Number(n) => format!("number {n}"),
            Tok::Word(w) => format!("'{w}'"),
            Tok::Punct(c) => format!("'{c}'"),
            Tok::Op(op) => format!("'{}'", op.symbol()),
            Tok::And => "'&&'".into(),
            Tok::DoubleCaret => "'^^'".into(),
            Tok::LangTag(l) => format!("language tag @{l}"),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, SparqlError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            lx.skip_trivia();
            let start = lx.pos;
            let tok = lx.next_tok()?;
            let done = tok == Tok::Eof;
            out.push((tok, start));
            if done {
                return Ok(out);
            }
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn err(&self, at: usize, expected: &str, found: &str) -> SparqlError {
        syntax_error(self.src, at, expected, found)
    }

    fn skip_trivia(&mut self) {
        loop {
            let Some(c) = self.peek() else { return };
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else if c == '#' {
                match self.rest().find('\n') {
                    Some(n) => self.pos += n + 1,
                    None => self.pos = self.src.len(),
                }
            } else {
                return;
            }
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if f(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.src[start..self.pos]
    }

    fn next_tok(&mut self) -> Result<Tok, SparqlError> {
        let start = self.pos;
        let Some(c) = self.peek() else { return Ok(Tok::Eof) };
        match c {
            '<' => {
                if let Some(iri) = self.try_iri() {
                    return Ok(Tok::Iri(iri));
                }
                self.pos += 1;
                if self.peek() == Some('=') {
                    self.pos += 1;
                    Ok(Tok::Op(CompareOp::Le))
                } else {
                    Ok(Tok::Op(CompareOp::Lt))
                }
            }
            '>' => {
                self.pos += 1;
                if self.peek() == Some('=') {
                    self.pos += 1;
                    Ok(Tok::Op(CompareOp::Ge))
                } else {
                    Ok(Tok::Op(CompareOp::Gt))
                }
            }
            '=' => {
                self.pos += 1;
                Ok(Tok::Op(CompareOp::Eq))
            }
            '!' if self.rest().starts_with("!=") => {
                self.pos += 2;
                Ok(Tok::Op(CompareOp::Ne))
            }
            '&' if self.rest().starts_with("&&") => {
                self.pos += 2;
                Ok(Tok::And)
            }
            '^' if self.rest().starts_with("^^") => {
                self.pos += 2;
                Ok(Tok::DoubleCaret)
            }
            '?' | '$' => {
                self.pos += 1;
                let name = self.take_while(|c| c.is_alphanumeric() || c == '_');
                if name.is_empty() {
                    return Err(self.err(start, "variable name", "empty variable"));
                }
                Ok(Tok::Var(name.to_owned()))
            }
            '"' | '\'' => self.string(c).map(Tok::Str),
            '@' => {
                self.pos += 1;
                let tag = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                if tag.is_empty() {
                    return Err(self.err(start, "language tag", "'@'"));
                }
                Ok(Tok::LangTag(tag.to_owned()))
            }
            '{' | '}' | '(' | ')' | '*' | ',' | ';' => {
                self.pos += 1;
                Ok(Tok::Punct(c))
            }
            '.' => {
                if self.rest()[1..].starts_with(|d: char| d.is_ascii_digit()) {
                    self.number()
                } else {
                    self.pos += 1;
                    Ok(Tok::Punct('.'))
                }
            }
            '+' | '-' | '0'..='9' => self.number(),
            c if c.is_alphabetic() || c == '_' || c == ':' => self.word_or_pname(),
            other => Err(self.err(start, "a token", &format!("{other:?}"))),
        }
    }

    fn try_iri(&mut self) -> Option<String> {
        let body = &self.rest()[1..];
        let end = body.find(|c: char| {
            c == '>' || c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
        })?;
        if !body[end..].starts_with('>') {
            return None;
        }
        let iri = body[..end].to_owned();
        self.pos += end + 2;
        Some(iri)
    }

    fn string(&mut self, quote: char) -> Result<String, SparqlError> {
        let start = self.pos;
        self.pos += 1;
        let mut out = String::new();
        loop {
            let Some(c) = self.peek() else {
                return Err(self.err(start, "closing quote", "end of input"));
            };
            self.pos += c.len_utf8();
            match c {
                c if c == quote => return Ok(out),
                '\n' | '\r' => return Err(self.err(start, "closing quote", "line break")),
                '\\' => {
                    let Some(e) = self.peek() else {
                        return Err(self.err(start, "escape", "end of input"));
                    };
                    self.pos += e.len_utf8();
                    out.push(match e {
                        't' => '\t',
                        'n' => '\n',
                        'r' => '\r',
                        'b' => '\u{8}',
                        'f' => '\u{c}',
                        '"' => '"',
                        '\'' => '\'',
                        '\\' => '\\',
                        'u' | 'U' => {
                            let len = if e == 'u' { 4 } else { 8 };
                            let digits = self
                                .rest()
                                .get(..len)
                                .ok_or_else(|| self.err(start, "unicode escape", "end of input"))?;
                            let ch = u32::from_str_radix(digits, 16)
                                .ok()
                                .and_then(char::from_u32)
                                .ok_or_else(|| self.err(start, "unicode escape", digits))?;
                            self.pos += len;
                            ch
                        }
                        other => return Err(self.err(start, "escape sequence", &format!("\\{other}"))),
                    });
                }
                c => out.push(c),
            }
        }
    }

    fn number(&mut self) -> Result<Tok, SparqlError> {
        let start = self.pos;
        if matches!(self.peek(), Some('+' | '-')) {
            self.pos += 1;
        }
        let int = self.take_while(|c| c.is_ascii_digit());
        let mut frac = "";
        if self.peek() == Some('.') && self.rest()[1..].starts_with(|c: char| c.is_ascii_digit()) {
            self.pos += 1;
            frac = self.take_while(|c| c.is_ascii_digit());
        }
        if int.is_empty() && frac.is_empty() {
            return Err(self.err(start, "number", &self.src[start..self.pos]));
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            if self.take_while(|c| c.is_ascii_digit()).is_empty() {
                return Err(self.err(start, "exponent digits", &self.src[start..self.pos]));
            }
        }
        Ok(Tok::Number(self.src[start..self.pos].to_owned()))
    }

    fn word_or_pname(&mut self) -> Result<Tok, SparqlError> {
        let prefix = self.take_while(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'));
        if self.peek() != Some(':') {
            if let Some(word) = prefix.strip_suffix('.') {
                self.pos -= 1;
                return Ok(Tok::Word(word.to_owned()));
            }
            return Ok(Tok::Word(prefix.to_owned()));
        }
        self.pos += 1;
        let mut local = self
            .take_while(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':' | '%'))
            .to_owned();
        while local.ends_with('.') {
            local.pop();
            self.pos -= 1;
        }
        Ok(Tok::PName(prefix.to_owned(), local))
    }
}

fn syntax_error(src: &str, at: usize, expected: &str, found: &str) -> SparqlError {
    let before = &src[..at.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    SparqlError::Syntax {
        line,
        column,
        expected: expected.to_owned(),
        found: found.to_owned(),
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    idx: usize,
    prefixes: HashMap<String, String>,
}

pub fn parse_query(text: &str) -> Result<Query, SparqlError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser {
        src: text,
        toks,
        idx: 0,
        prefixes: HashMap::new(),
    };
    p.query()
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].0
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.idx].0.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> SparqlError {
        let (tok, at) = &self.toks[self.idx];
        syntax_error(self.src, *at, expected, &tok.describe())
    }

    fn is_word(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn expect_word(&mut self, kw: &str) -> Result<(), SparqlError> {
        if self.is_word(kw) {
            self.advance();
            Ok(())
        } else {
            Err(self.error(&format!("'{kw}'")))
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<(), SparqlError> {
        if self.peek() == &Tok::Punct(c) {
            self.advance();
            Ok(())
        } else {
            Err(self.error(&format!("'{c}'")))
        }
    }

    fn query(&mut self) -> Result<Query, SparqlError> {
        let mut q = Query::default();
        while self.is_word("PREFIX") {
            self.advance();
            let label = match self.advance() {
                Tok::PName(label, local) if local.is_empty() => label,
                _ => {
                    self.idx -= 1;
                    return Err(self.error("prefix label ending in ':'"));
                }
            };
            let iri = match self.advance() {
                Tok::Iri(iri) => iri,
                _ => {
                    self.idx -= 1;
                    return Err(self.error("prefix IRI"));
                }
            };
            self.prefixes.insert(label.clone(), iri.clone());
            q.prefixes.retain(|(l, _)| l != &label);
            q.prefixes.push((label, iri));
        }
        self.expect_word("SELECT")?;
        if self.is_word("DISTINCT") {
            self.advance();
            q.distinct = true;
        }
        let mut star = false;
        if self.peek() == &Tok::Punct('*') {
            self.advance();
            star = true;
        } else {
            while let Tok::Var(name) = self.peek() {
                let v = Variable::new(name.clone());
                if !q.projection.contains(&v) {
                    q.projection.push(v);
                }
                self.advance();
            }
            if q.projection.is_empty() {
                return Err(self.error("projected variable or '*'"));
            }
        }
        if self.is_word("WHERE") {
            self.advance();
        }
        self.expect_punct('{')?;
        self.group(&mut q)?;
        self.expect_punct('}')?;
        if self.is_word("LIMIT") {
            self.advance();
            match self.advance() {
                Tok::Number(n) if n.chars().all(|c| c.is_ascii_digit()) => {
                    q.limit = Some(n.parse().map_err(|_| {
                        self.idx -= 1;
                        self.error("LIMIT count")
                    })?);
                }
                _ => {
                    self.idx -= 1;
                    return Err(self.error("non-negative integer after LIMIT"));
                }
            }
        }
        if self.peek() != &Tok::Eof {
            return Err(self.error("end of query"));
        }
        if star {
            q.projection = q.pattern_variables();
        }
        Ok(q)
    }

    fn group(&mut self, q: &mut Query) -> Result<(), SparqlError> {
        loop {
            match self.peek() {
                Tok::Punct('}') => return Ok(()),
                Tok::Word(w) if w.eq_ignore_ascii_case("FILTER") => {
                    self.advance();
                    self.filter(q)?;
                    if self.peek() == &Tok::Punct('.') {
                        self.advance();
                    }
                }
                _ => {
                    self.triples(q)?;
                    match self.peek() {
                        Tok::Punct('.') => {
                            self.advance();
                        }
                        Tok::Punct('}') => {}
                        Tok::Word(w) if w.eq_ignore_ascii_case("FILTER") => {}
                        _ => return Err(self.error("'.' or '}'")),
                    }
                }
            }
        }
    }

    fn triples(&mut self, q: &mut Query) -> Result<(), SparqlError> {
        let subject = self.node(Position::Subject)?;
        loop {
            let predicate = self.node(Position::Predicate)?;
            loop {
                let object = self.node(Position::Object)?;
                q.patterns.push(TriplePattern {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if self.peek() == &Tok::Punct(',') {
                    self.advance();
                } else {
                    break;
                }
            }
            if self.peek() == &Tok::Punct(';') {
                self.advance();
                // Trailing ';' before '.' or '}'.
                if matches!(self.peek(), Tok::Punct('.') | Tok::Punct('}')) {
                    return Ok(());
                }
            } else {
                return Ok(());
            }
        }
    }

    fn node(&mut self, pos: Position) -> Result<TermPattern, SparqlError> {
        let expected = match pos {
            Position::Subject => "subject (variable or IRI)",
            Position::Predicate => "predicate (variable, IRI or 'a')",
            Position::Object => "object (variable, IRI or literal)",
        };
        match self.peek().clone() {
            Tok::Var(name) => {
                self.advance();
                Ok(TermPattern::Variable(Variable::new(name)))
            }
            Tok::Iri(_) | Tok::PName(..) => Ok(TermPattern::Term(Term::Iri(self.iri()?))),
            Tok::Word(w) if w == "a" && pos == Position::Predicate => {
                self.advance();
                Ok(TermPattern::Term(Term::Iri(Iri::from_static(RDF_TYPE))))
            }
            Tok::Str(_) | Tok::Number(_) | Tok::Word(_) if pos == Position::Object => match self.constant() {
                Ok(t) => Ok(TermPattern::Term(t)),
                Err(_) => Err(self.error(expected)),
            },
            _ => Err(self.error(expected)),
        }
    }

    fn iri(&mut self) -> Result<Iri, SparqlError> {
        let at = self.idx;
        let full = match self.advance() {
            Tok::Iri(iri) => iri,
            Tok::PName(prefix, local) => {
                let base = self
                    .prefixes
                    .get(&prefix)
                    .ok_or_else(|| SparqlError::UndeclaredPrefix(prefix.clone()))?;
                format!("{base}{local}")
            }
            _ => {
                self.idx = at;
                return Err(self.error("IRI"));
            }
        };
        Iri::new(full).map_err(|e| {
            let (_, offset) = self.toks[at];
            syntax_error(self.src, offset, "valid IRI", &e.to_string())
        })
    }

    fn constant(&mut self) -> Result<Term, SparqlError> {
        match self.peek().clone() {
            Tok::Iri(_) | Tok::PName(..) => Ok(Term::Iri(self.iri()?)),
            Tok::Str(s) => {
                self.advance();
                match self.peek().clone() {
                    Tok::DoubleCaret => {
                        self.advance();
                        let dt = self.iri()?;
                        Ok(Term::Literal(Literal::typed(s, dt)))
                    }
                    Tok::LangTag(tag) => {
                        let at = self.toks[self.idx].1;
                        self.advance();
                        Literal::lang(s, tag)
                            .map(Term::Literal)
                            .map_err(|e| syntax_error(self.src, at, "language tag", &e.to_string()))
                    }
                    _ => Ok(Term::string(s)),
                }
            }
            Tok::Number(n) => {
                self.advance();
                let dt = if n.contains(['e', 'E']) {
                    XSD_DOUBLE
                } else if n.contains('.') {
                    XSD_DECIMAL
                } else {
                    XSD_INTEGER
                };
                Ok(Term::typed(n, Iri::from_static(dt)))
            }
            Tok::Word(w) if w == "true" || w == "false" => {
                self.advance();
                Ok(Term::typed(w, Iri::from_static(XSD_BOOLEAN)))
            }
            _ => Err(self.error("constant (IRI, literal or number)")),
        }
    }

    fn filter(&mut self, q: &mut Query) -> Result<(), SparqlError> {
        self.expect_punct('(')?;
        loop {
            let f = self.comparison()?;
            q.filters.push(f);
            if self.peek() == &Tok::And {
                self.advance();
            } else {
                break;
            }
        }
        self.expect_punct(')')
    }

    fn comparison(&mut self) -> Result<Filter, SparqlError> {
        if let Tok::Var(name) = self.peek().clone() {
            self.advance();
            let op = self.op()?;
            let value = self.constant()?;
            Ok(Filter {
                variable: Variable::new(name),
                op,
                value,
            })
        } else {
            let value = self.constant()?;
            let op = self.op()?;
            match self.advance() {
                Tok::Var(name) => Ok(Filter {
                    variable: Variable::new(name),
                    op: op.flipped(),
                    value,
                }),
                _ => {
                    self.idx -= 1;
                    Err(self.error("variable"))
                }
            }
        }
    }

    fn op(&mut self) -> Result<CompareOp, SparqlError> {
        match self.peek() {
            Tok::Op(op) => {
                let op = *op;
                self.advance();
                Ok(op)
            }
            _ => Err(self.error("comparison operator")),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Position {
    Subject,
    Predicate,
    Object,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keyword_a_is_rdf_type() {
        let q = parse_query("SELECT ?x WHERE { ?x a <http://e/C> }").unwrap();
        assert_eq!(
            q.patterns[0].predicate,
            TermPattern::Term(Term::Iri(Iri::from_static(RDF_TYPE)))
        );
    }

    #[test]
    fn dollar_and_question_mark_are_same_variable() {
        let q = parse_query("SELECT $x WHERE { ?x <http://e/p> $y . }").unwrap();
        assert_eq!(q.projection, vec![Variable::new("x")]);
        assert_eq!(q.patterns[0].subject, TermPattern::Variable(Variable::new("x")));
    }

    #[test]
    fn undeclared_prefix_is_named() {
        let err = parse_query("SELECT ?x WHERE { ?x foo:bar ?y }").unwrap_err();
        assert_eq!(err, SparqlError::UndeclaredPrefix("foo".into()));
    }

    #[test]
    fn syntax_error_reports_position_and_expectation() {
        let err = parse_query("SELECT ?x\nWHERE { ?x <http://e/p> }").unwrap_err();
        match err {
            SparqlError::Syntax {
                line, column, expected, ..
            } => {
                assert_eq!(line, 2);
                assert_eq!(column, 25);
                assert!(expected.contains("object"), "{expected}");
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_query("SELECT WHERE { ?x ?p ?o }").is_err());
        assert!(parse_query("SELECT ?x WHERE { ?x ?p ?o } LIMIT -1").is_err());
        assert!(parse_query("SELECT ?x WHERE { ?x ?p ?o } extra").is_err());
    }

    #[test]
    fn filters_literals_and_limit() {
        let q = parse_query(
            r#"PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>
            SELECT ?s WHERE { ?s <http://e/m> ?m ; <http://e/l> "x"@en , "y"^^xsd:string .
              FILTER(?m >= 10.5 && 20 > ?m) } LIMIT 3"#,
        )
        .unwrap();
        assert_eq!(q.patterns.len(), 3);
        assert_eq!(q.filters.len(), 2);
        assert_eq!(q.filters[1].op, CompareOp::Lt);
        assert_eq!(q.limit, Some(3));
        assert_eq!(q.filters[0].value, Term::typed("10.5", Iri::from_static(XSD_DECIMAL)));
    }

    #[test]
    fn star_projects_pattern_variables() {
        let q = parse_query("SELECT * { ?a <http://e/p> ?b . ?b <http://e/q> ?a }").unwrap();
        assert_eq!(q.projection, vec![Variable::new("a"), Variable::new("b")]);
    }
}
