//! A small graph-query language: SELECT / ASK / COUNT(DISTINCT) over basic
//! graph patterns with UNION, regex FILTER and fixed-length property paths.

mod ast;
mod eval;
mod parser;
mod prefixes;

pub use ast::*;
pub use eval::{evaluate, explain, EvalOptions, Evaluator, ExplainedRow, Explanation, ResultSet, Witness};
pub use parser::parse_query;
pub use prefixes::PrefixTable;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unsupported construct at {line}:{column}: {construct}")]
    Unsupported { line: usize, column: usize, construct: String },
    #[error("invalid query: {0}")]
    Invalid(String),
    #[error("FILTER variable ?{0} is not bound by any triple pattern")]
    UnboundFilterVariable(String),
    #[error("bad regex {pattern:?}: {message}")]
    BadRegex { pattern: String, message: String },
}

impl QueryError {
    /// Source position, for errors that carry one.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            QueryError::Syntax { line, column, .. } | QueryError::Unsupported { line, column, .. } => {
                Some((*line, *column))
            }
            _ => None,
        }
    }
}

/// Parses with the default prefix table and evaluates.
pub fn run_query(text: &str, graph: &crate::store::Graph) -> Result<ResultSet, QueryError> {
    evaluate(&parse_query(text, &PrefixTable::default())?, graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{Graph, Term, Triple};
    use crate::vocab;

    fn r(s: &str) -> Term {
        Term::iri(vocab::resource(s))
    }

    fn graph() -> Graph {
        let mut g = Graph::new();
        let add = |g: &mut Graph, s: Term, p: &str, o: Term| {
            g.insert(Triple::new(s, Term::iri(p), o)).unwrap();
        };
        add(&mut g, r("Zebra"), vocab::LABEL, Term::lang_literal("Zebra", "en"));
        add(&mut g, r("Giraffe"), vocab::LABEL, Term::lang_literal("Giraffe", "en"));
        add(&mut g, r("Zebra"), vocab::SUBJECT, r("Category:Equus"));
        add(&mut g, r("Category:Equus"), vocab::BROADER, r("Category:Mammals"));
        add(&mut g, r("Giraffe"), vocab::SUBJECT, r("Category:Mammals"));
        add(&mut g, r("Zebra"), vocab::WIKI_LINK, r("Savanna"));
        add(&mut g, r("Giraffe"), vocab::WIKI_LINK, r("Savanna"));
        g
    }

    fn q(text: &str) -> QueryPlan {
        parse_query(text, &PrefixTable::default()).unwrap()
    }

    #[test]
    fn select_and_ask() {
        let g = graph();
        let res = evaluate(&q("SELECT ?x WHERE { ?x WikiLink KB:Savanna . }"), &g).unwrap();
        let mut xs: Vec<_> = res.column("x").into_iter().cloned().collect();
        xs.sort();
        assert_eq!(xs, vec![r("Giraffe"), r("Zebra")]);
        assert_eq!(evaluate(&q("ASK { KB:Zebra WikiLink KB:Savanna }"), &g).unwrap().as_bool(), Some(true));
        assert_eq!(evaluate(&q("ASK { KB:Zebra WikiLink KB:Nowhere }"), &g).unwrap().as_bool(), Some(false));
    }

    #[test]
    fn count_distinct() {
        let g = graph();
        let res = evaluate(&q("SELECT COUNT(DISTINCT ?m) WHERE { KB:Zebra WikiLink ?m . KB:Giraffe WikiLink ?m }"), &g)
            .unwrap();
        assert_eq!(res.as_count(), Some(1));
    }

    #[test]
    fn paths_with_optional_steps() {
        let g = graph();
        let res = explain(&q("SELECT ?c WHERE { KB:Zebra subject/broader? ?c }"), &g).unwrap();
        let mut cs: Vec<_> = res.result.column("c").into_iter().cloned().collect();
        cs.sort();
        assert_eq!(cs, vec![r("Category:Equus"), r("Category:Mammals")]);
        let long = res.rows.iter().find(|row| row.values[0] == r("Category:Mammals")).unwrap();
        assert_eq!(long.witnesses[0].triples.len(), 2);
        assert_eq!(long.witnesses[0].triples[1].predicate, Term::iri(vocab::BROADER));

        // backward: object bound
        let res = evaluate(&q("SELECT ?x WHERE { ?x subject/broader? KB:Category:Mammals }"), &g).unwrap();
        let mut xs: Vec<_> = res.column("x").into_iter().cloned().collect();
        xs.sort();
        assert_eq!(xs, vec![r("Giraffe"), r("Zebra")]);
    }

    #[test]
    fn filter_and_union() {
        let g = graph();
        let res = evaluate(
            &q(r#"SELECT DISTINCT ?x WHERE { { ?x label ?n } UNION { ?x subject ?n } . FILTER regex(?n, "^zeb", "i") }"#),
            &g,
        )
        .unwrap();
        assert_eq!(res.rows(), &[vec![r("Zebra")]]);
    }

    #[test]
    fn filter_never_matches_iris() {
        let g = graph();
        let res = evaluate(&q(r#"SELECT ?c WHERE { ?x subject ?c . FILTER regex(?c, "Equus") }"#), &g).unwrap();
        assert!(res.is_empty());
    }

    #[test]
    fn bad_regex_is_reported() {
        let g = graph();
        let err = evaluate(&q(r#"SELECT ?n WHERE { ?x label ?n . FILTER regex(?n, "(") }"#), &g).unwrap_err();
        assert!(matches!(err, QueryError::BadRegex { .. }));
    }

    #[test]
    fn plain_select_keeps_duplicates() {
        let g = graph();
        let res = evaluate(&q("SELECT ?m WHERE { ?x WikiLink ?m }"), &g).unwrap();
        assert_eq!(res.rows().len(), 2);
        let res = evaluate(&q("SELECT DISTINCT ?m WHERE { ?x WikiLink ?m }"), &g).unwrap();
        assert_eq!(res.rows().len(), 1);
    }

    #[test]
    fn reorder_does_not_change_results() {
        let g = graph();
        let plan = q("SELECT ?x ?c WHERE { ?x subject ?c . ?x WikiLink KB:Savanna . ?x label ?l }");
        let sort = |rs: ResultSet| {
            let mut rows = rs.rows().to_vec();
            rows.sort();
            rows
        };
        let a = Evaluator::with_options(&g, EvalOptions { reorder: true }).evaluate(&plan).unwrap();
        let b = Evaluator::with_options(&g, EvalOptions { reorder: false }).evaluate(&plan).unwrap();
        assert_eq!(sort(a), sort(b));
    }

    #[test]
    fn constants_outside_graph_match_zero_length_paths() {
        let g = graph();
        let res = evaluate(&q("ASK { KB:Unknown broader? KB:Unknown }"), &g).unwrap();
        assert_eq!(res.as_bool(), Some(true));
    }
}
