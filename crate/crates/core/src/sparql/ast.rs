use std::collections::BTreeSet;
use std::fmt;

use crate::rdf::vocab::is_numeric_datatype;
use crate::rdf::Term;

/// A query variable, stored without its `?`/`$` sigil.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable(String);

impl Variable {
    pub fn new(name: impl Into<String>) -> Self {
        Variable(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermPattern {
    Term(Term),
    Variable(Variable),
}

impl TermPattern {
    pub fn as_variable(&self) -> Option<&Variable> {
        match self {
            TermPattern::Variable(v) => Some(v),
            TermPattern::Term(_) => None,
        }
    }

    pub fn as_term(&self) -> Option<&Term> {
        match self {
            TermPattern::Term(t) => Some(t),
            TermPattern::Variable(_) => None,
        }
    }
}

impl From<Term> for TermPattern {
    fn from(t: Term) -> Self {
        TermPattern::Term(t)
    }
}

impl From<Variable> for TermPattern {
    fn from(v: Variable) -> Self {
        TermPattern::Variable(v)
    }
}

impl fmt::Display for TermPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermPattern::Term(t) => t.fmt(f),
            TermPattern::Variable(v) => v.fmt(f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriplePattern {
    pub subject: TermPattern,
    pub predicate: TermPattern,
    pub object: TermPattern,
}

impl TriplePattern {
    pub fn new(
        subject: impl Into<TermPattern>,
        predicate: impl Into<TermPattern>,
        object: impl Into<TermPattern>,
    ) -> Self {
        TriplePattern {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }

    pub fn positions(&self) -> [&TermPattern; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.positions().into_iter().filter_map(TermPattern::as_variable)
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
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

    /// The operator with its operands swapped (`a < b` iff `b > a`).
    pub fn flipped(self) -> Self {
        match self {
            CompareOp::Lt => CompareOp::Gt,
            CompareOp::Le => CompareOp::Ge,
            CompareOp::Gt => CompareOp::Lt,
            CompareOp::Ge => CompareOp::Le,
            other => other,
        }
    }

    fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CompareOp::Eq => ord == Equal,
            CompareOp::Ne => ord != Equal,
            CompareOp::Lt => ord == Less,
            CompareOp::Le => ord != Greater,
            CompareOp::Gt => ord == Greater,
            CompareOp::Ge => ord != Less,
        }
    }
}

/// `?variable <op> constant`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Filter {
    pub variable: Variable,
    pub op: CompareOp,
    pub value: Term,
}

impl Filter {
    /// Numeric XSD literals compare by value, everything else by term identity (`=`, `!=`)
    /// or lexical order within the same kind of term.
    pub fn accepts(&self, bound: &Term) -> bool {
        if let (Some(a), Some(b)) = (numeric_value(bound), numeric_value(&self.value)) {
            return a.partial_cmp(&b).is_some_and(|ord| self.op.holds(ord));
        }
        match self.op {
            CompareOp::Eq => bound == &self.value,
            CompareOp::Ne => bound != &self.value,
            op => {
                // Ordering is defined between literals of one datatype and language.
                let comparable = match (bound, &self.value) {
                    (Term::Literal(a), Term::Literal(b)) => {
                        a.datatype() == b.datatype() && a.language() == b.language()
                    }
                    _ => false,
                };
                comparable && op.holds(bound.value().cmp(self.value.value()))
            }
        }
    }
}

fn numeric_value(term: &Term) -> Option<f64> {
    let lit = term.as_literal()?;
    if is_numeric_datatype(lit.datatype().as_str()) {
        lit.lexical().trim().parse::<f64>().ok()
    } else {
        None
    }
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FILTER({} {} {})", self.variable, self.op.symbol(), self.value)
    }
}

/// A parsed SELECT query with all prefixed names expanded.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Query {
    /// Declared prefixes in declaration order, kept for printing only.
    pub prefixes: Vec<(String, String)>,
    pub projection: Vec<Variable>,
    pub distinct: bool,
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<Filter>,
    pub limit: Option<usize>,
}

impl Query {
    /// Variables of the triple patterns in first-appearance order.
    pub fn pattern_variables(&self) -> Vec<Variable> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for v in self.patterns.iter().flat_map(TriplePattern::variables) {
            if seen.insert(v) {
                out.push(v.clone());
            }
        }
        out
    }

    /// Projected variables that no pattern or filter mentions; they are always unbound.
    pub fn unbound_projections(&self) -> Vec<Variable> {
        let mentioned: BTreeSet<&Variable> = self
            .patterns
            .iter()
            .flat_map(TriplePattern::variables)
            .chain(self.filters.iter().map(|f| &f.variable))
            .collect();
        self.projection
            .iter()
            .filter(|v| !mentioned.contains(v))
            .cloned()
            .collect()
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, iri) in &self.prefixes {
            writeln!(f, "PREFIX {label}: <{iri}>")?;
        }
        f.write_str("SELECT ")?;
        if self.distinct {
            f.write_str("DISTINCT ")?;
        }
        if self.projection.is_empty() {
            f.write_str("*")?;
        } else {
            let vars: Vec<String> = self.projection.iter().map(|v| v.to_string()).collect();
            f.write_str(&vars.join(" "))?;
        }
        f.write_str("\nWHERE {\n")?;
        for p in &self.patterns {
            writeln!(f, "  {p}")?;
        }
        for filter in &self.filters {
            writeln!(f, "  {filter}")?;
        }
        f.write_str("}")?;
        if let Some(limit) = self.limit {
            write!(f, "\nLIMIT {limit}")?;
        }
        f.write_str("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::vocab::{XSD_DECIMAL, XSD_INTEGER};
    use crate::rdf::Iri;

    fn filter(op: CompareOp, value: Term) -> Filter {
        Filter {
            variable: Variable::new("x"),
            op,
            value,
        }
    }

    #[test]
    fn numeric_filters_compare_by_value() {
        let ten = Term::typed("10", Iri::from_static(XSD_INTEGER));
        let nine_dec = Term::typed("9.50", Iri::from_static(XSD_DECIMAL));
        assert!(filter(CompareOp::Gt, nine_dec.clone()).accepts(&ten));
        assert!(!filter(CompareOp::Lt, nine_dec).accepts(&ten));
        let ten_dec = Term::typed("10.0", Iri::from_static(XSD_DECIMAL));
        assert!(filter(CompareOp::Eq, ten_dec).accepts(&ten));
    }

    #[test]
    fn non_numeric_filters_are_lexical() {
        let s = Term::string("2020");
        assert!(filter(CompareOp::Eq, Term::string("2020")).accepts(&s));
        assert!(!filter(CompareOp::Eq, Term::typed("2020", Iri::from_static(XSD_INTEGER))).accepts(&s));
        assert!(filter(CompareOp::Lt, Term::string("2021")).accepts(&s));
        // "10" < "9" lexically for plain strings.
        assert!(filter(CompareOp::Lt, Term::string("9")).accepts(&Term::string("10")));
        let iri = Term::iri("http://e/a").unwrap();
        assert!(!filter(CompareOp::Lt, Term::string("z")).accepts(&iri));
    }
}
