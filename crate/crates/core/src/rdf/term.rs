use std::fmt;

use super::vocab::{RDF_LANG_STRING, XSD_STRING};
use super::RdfError;

/// An absolute IRI.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, RdfError> {
        let value = value.into();
        validate_iri(&value)?;
        Ok(Iri(value))
    }

    /// Builds an IRI from a string known to be valid (vocabulary constants).
    ///
    /// Panics on an invalid value.
    pub fn from_static(value: &'static str) -> Self {
        Iri::new(value).unwrap_or_else(|e| panic!("invalid IRI constant {value:?}: {e}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

fn validate_iri(value: &str) -> Result<(), RdfError> {
    let scheme_end = value
        .find(':')
        .ok_or_else(|| RdfError::InvalidIri(value.to_owned(), "missing scheme separator".into()))?;
    let scheme = &value[..scheme_end];
    let scheme_ok = scheme.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && scheme
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    if !scheme_ok {
        return Err(RdfError::InvalidIri(value.to_owned(), "malformed scheme".into()));
    }
    if let Some(bad) = value.chars().find(|c| {
        c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
    }) {
        return Err(RdfError::InvalidIri(
            value.to_owned(),
            format!("forbidden character {bad:?}"),
        ));
    }
    Ok(())
}

/// A literal: lexical form, datatype and optional language tag.
///
/// Equality is purely syntactic; `"01"^^xsd:integer` and `"1"^^xsd:integer` differ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    lexical: String,
    datatype: Iri,
    language: Option<String>,
}

impl Literal {
    /// A plain string literal (`xsd:string`).
    pub fn string(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: Iri::from_static(XSD_STRING),
            language: None,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype,
            language: None,
        }
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Result<Self, RdfError> {
        let language = language.into();
        let valid = !language.is_empty()
            && language
                .split('-')
                .all(|part| !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric()))
            && language.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
        if !valid {
            return Err(RdfError::InvalidLiteral(format!("bad language tag {language:?}")));
        }
        Ok(Literal {
            lexical: lexical.into(),
            datatype: Iri::from_static(RDF_LANG_STRING),
            language: Some(language),
        })
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &Iri {
        &self.datatype
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    pub fn is_plain_string(&self) -> bool {
        self.language.is_none() && self.datatype.as_str() == XSD_STRING
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("\"")?;
        write_escaped(f, &self.lexical)?;
        f.write_str("\"")?;
        if let Some(lang) = &self.language {
            write!(f, "@{lang}")
        } else if self.datatype.as_str() == XSD_STRING {
            Ok(())
        } else {
            write!(f, "^^{}", self.datatype)
        }
    }
}

fn write_escaped(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\r' => f.write_str("\\r")?,
            '\t' => f.write_str("\\t")?,
            c if c.is_control() => write!(f, "\\u{:04X}", c as u32)?,
            c => write!(f, "{c}")?,
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlankNode(String);

impl BlankNode {
    pub fn new(label: impl Into<String>) -> Result<Self, RdfError> {
        let label = label.into();
        let ok = !label.is_empty()
            && label
                .chars()
                .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
            && !label.ends_with('.');
        if !ok {
            return Err(RdfError::InvalidBlankNode(label));
        }
        Ok(BlankNode(label))
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BlankNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_:{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
    BlankNode(BlankNode),
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Result<Self, RdfError> {
        Iri::new(value).map(Term::Iri)
    }

    pub fn string(lexical: impl Into<String>) -> Self {
        Term::Literal(Literal::string(lexical))
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        Term::Literal(Literal::typed(lexical, datatype))
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    /// IRI string, literal lexical form, or blank node label.
    pub fn value(&self) -> &str {
        match self {
            Term::Iri(iri) => iri.as_str(),
            Term::Literal(lit) => lit.lexical(),
            Term::BlankNode(b) => b.label(),
        }
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

impl From<BlankNode> for Term {
    fn from(b: BlankNode) -> Self {
        Term::BlankNode(b)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => iri.fmt(f),
            Term::Literal(lit) => lit.fmt(f),
            Term::BlankNode(b) => b.fmt(f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    subject: Term,
    predicate: Term,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self, RdfError> {
        if subject.is_literal() {
            return Err(RdfError::InvalidTriple(format!(
                "subject must not be a literal: {subject}"
            )));
        }
        if !predicate.is_iri() {
            return Err(RdfError::InvalidTriple(format!(
                "predicate must be an IRI: {predicate}"
            )));
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iri_requires_scheme_and_no_whitespace() {
        assert!(Iri::new("http://w3id.org/energy/x").is_ok());
        assert!(Iri::new("urn:x").is_ok());
        assert!(Iri::new("no-scheme").is_err());
        assert!(Iri::new("http://a b").is_err());
        assert!(Iri::new(":x").is_err());
    }

    #[test]
    fn literal_typing_is_syntactic() {
        let s = Literal::string("2020");
        let i = Literal::typed("2020", Iri::from_static(super::super::vocab::XSD_INTEGER));
        assert_ne!(Term::from(s.clone()), Term::from(i));
        assert_eq!(s.datatype().as_str(), XSD_STRING);
        let l = Literal::lang("Wind", "en").unwrap();
        assert_eq!(l.datatype().as_str(), RDF_LANG_STRING);
        assert!(Literal::lang("x", "").is_err());
    }

    #[test]
    fn triple_rejects_literal_subject_and_non_iri_predicate() {
        let iri = Term::iri("http://e/x").unwrap();
        assert!(Triple::new(Term::string("s"), iri.clone(), iri.clone()).is_err());
        let b = Term::BlankNode(BlankNode::new("b0").unwrap());
        assert!(Triple::new(iri.clone(), b.clone(), iri.clone()).is_err());
        assert!(Triple::new(b, iri.clone(), Term::string("o")).is_ok());
    }

    #[test]
    fn display_escapes_literals() {
        let t = Term::string("a \"q\"\n\\");
        assert_eq!(t.to_string(), r#""a \"q\"\n\\""#);
    }
}
