use std::fmt;

use serde::{Deserialize, Serialize};

use super::StoreError;

/// An RDF term: an IRI or a (possibly language-tagged) literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Iri(String),
    Literal { lexical: String, lang: Option<String> },
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Self {
        Term::Iri(iri.into())
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Term::Literal { lexical: lexical.into(), lang: None }
    }

    pub fn lang_literal(lexical: impl Into<String>, lang: impl Into<String>) -> Self {
        Term::Literal { lexical: lexical.into(), lang: Some(lang.into()) }
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(s) => Some(s),
            Term::Literal { .. } => None,
        }
    }

    /// The IRI string or the literal's lexical form.
    pub fn lexical(&self) -> &str {
        match self {
            Term::Iri(s) => s,
            Term::Literal { lexical, .. } => lexical,
        }
    }

    pub fn lang(&self) -> Option<&str> {
        match self {
            Term::Literal { lang, .. } => lang.as_deref(),
            Term::Iri(_) => None,
        }
    }

    /// Last path segment of an IRI (after `/` or `#`), or the lexical form.
    pub fn local_name(&self) -> &str {
        match self {
            Term::Iri(s) => s.rsplit(['/', '#']).next().unwrap_or(s),
            Term::Literal { lexical, .. } => lexical,
        }
    }

    pub fn validate(&self) -> Result<(), StoreError> {
        match self {
            Term::Iri(s) if s.is_empty() => Err(StoreError::EmptyIri),
            Term::Iri(s) if s.chars().any(char::is_whitespace) => Err(StoreError::WhitespaceInIri(s.clone())),
            Term::Literal { lang: Some(l), .. }
                if l.is_empty() || !l.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') =>
            {
                Err(StoreError::BadLanguageTag(l.clone()))
            }
            _ => Ok(()),
        }
    }
}

/// Escapes a lexical form for double-quoted output.
pub(crate) fn escape_lexical(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(s) => write!(f, "<{s}>"),
            Term::Literal { lexical, lang: None } => write!(f, "\"{}\"", escape_lexical(lexical)),
            Term::Literal { lexical, lang: Some(l) } => {
                write!(f, "\"{}\"@{l}", escape_lexical(lexical))
            }
        }
    }
}

/// A (subject, predicate, object) statement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Self {
        Triple { subject, predicate, object }
    }

    pub fn validate(&self) -> Result<(), StoreError> {
        if !self.subject.is_iri() {
            return Err(StoreError::NonIriPosition("subject"));
        }
        if !self.predicate.is_iri() {
            return Err(StoreError::NonIriPosition("predicate"));
        }
        self.subject.validate()?;
        self.predicate.validate()?;
        self.object.validate()
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}
