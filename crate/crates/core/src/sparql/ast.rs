use std::collections::BTreeSet;
use std::fmt::{self, Write};

use super::PrefixTable;
use crate::store::{escape_lexical, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    All,
    Vars(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryForm {
    Select { distinct: bool, projection: Projection },
    Ask,
    CountDistinct { var: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodePattern {
    Var(String),
    Term(Term),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathStep {
    pub predicate: Term,
    /// `p?`: zero or one edge.
    pub optional: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredicatePattern {
    Var(String),
    Term(Term),
    /// `/`-joined steps; only produced when the text has `/` or `?`.
    Path(Vec<PathStep>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: NodePattern,
    pub predicate: PredicatePattern,
    pub object: NodePattern,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegexFilter {
    pub var: String,
    pub pattern: String,
    pub flags: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternElement {
    Triple(TriplePattern),
    /// One or more `{ ... }` groups joined by `UNION`. A single branch is a
    /// plain nested group.
    Union(Vec<GroupPattern>),
    Filter(RegexFilter),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupPattern {
    pub elements: Vec<PatternElement>,
}

/// A parsed query in the supported fragment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryPlan {
    pub form: QueryForm,
    pub pattern: GroupPattern,
}

impl TriplePattern {
    pub fn vars(&self) -> impl Iterator<Item = &str> {
        let s = match &self.subject {
            NodePattern::Var(v) => Some(v.as_str()),
            NodePattern::Term(_) => None,
        };
        let p = match &self.predicate {
            PredicatePattern::Var(v) => Some(v.as_str()),
            _ => None,
        };
        let o = match &self.object {
            NodePattern::Var(v) => Some(v.as_str()),
            NodePattern::Term(_) => None,
        };
        [s, p, o].into_iter().flatten()
    }
}

impl GroupPattern {
    /// Variables bound by triple patterns in this group and nested groups,
    /// in order of first appearance.
    pub fn pattern_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        for el in &self.elements {
            match el {
                PatternElement::Triple(t) => {
                    for v in t.vars() {
                        if !out.iter().any(|x| x == v) {
                            out.push(v.to_string());
                        }
                    }
                }
                PatternElement::Union(branches) => {
                    for b in branches {
                        b.collect_vars(out);
                    }
                }
                PatternElement::Filter(_) => {}
            }
        }
    }

    pub fn var_set(&self) -> BTreeSet<String> {
        self.pattern_vars().into_iter().collect()
    }

    /// Triple patterns in textual (pre-order) order.
    pub fn triple_patterns(&self) -> Vec<&TriplePattern> {
        let mut out = Vec::new();
        self.collect_triples(&mut out);
        out
    }

    fn collect_triples<'a>(&'a self, out: &mut Vec<&'a TriplePattern>) {
        for el in &self.elements {
            match el {
                PatternElement::Triple(t) => out.push(t),
                PatternElement::Union(bs) => bs.iter().for_each(|b| b.collect_triples(out)),
                PatternElement::Filter(_) => {}
            }
        }
    }
}

impl QueryPlan {
    /// Variables in the result, in order.
    pub fn result_vars(&self) -> Vec<String> {
        match &self.form {
            QueryForm::Select { projection: Projection::Vars(v), .. } => v.clone(),
            QueryForm::Select { projection: Projection::All, .. } => self.pattern.pattern_vars(),
            QueryForm::CountDistinct { var } => vec![var.clone()],
            QueryForm::Ask => Vec::new(),
        }
    }

    /// Query text using the compact names of `prefixes`. Parsing the output
    /// with the same table yields an equal plan.
    pub fn to_text(&self, prefixes: &PrefixTable) -> String {
        let mut out = String::new();
        match &self.form {
            QueryForm::Select { distinct, projection } => {
                out.push_str("SELECT ");
                if *distinct {
                    out.push_str("DISTINCT ");
                }
                match projection {
                    Projection::All => out.push('*'),
                    Projection::Vars(vs) => {
                        let vs: Vec<String> = vs.iter().map(|v| format!("?{v}")).collect();
                        out.push_str(&vs.join(" "));
                    }
                }
                out.push_str(" WHERE ");
            }
            QueryForm::Ask => out.push_str("ASK "),
            QueryForm::CountDistinct { var } => {
                let _ = write!(out, "SELECT COUNT(DISTINCT ?{var}) WHERE ");
            }
        }
        write_group(&mut out, &self.pattern, prefixes, 1);
        out
    }
}

fn write_node(out: &mut String, n: &NodePattern, prefixes: &PrefixTable) {
    match n {
        NodePattern::Var(v) => {
            let _ = write!(out, "?{v}");
        }
        NodePattern::Term(t) => out.push_str(&prefixes.compact(t)),
    }
}

fn write_group(out: &mut String, g: &GroupPattern, prefixes: &PrefixTable, depth: usize) {
    let indent = "  ".repeat(depth);
    out.push_str("{\n");
    for el in &g.elements {
        out.push_str(&indent);
        match el {
            PatternElement::Triple(t) => {
                write_node(out, &t.subject, prefixes);
                out.push(' ');
                match &t.predicate {
                    PredicatePattern::Var(v) => {
                        let _ = write!(out, "?{v}");
                    }
                    PredicatePattern::Term(p) => out.push_str(&prefixes.compact(p)),
                    PredicatePattern::Path(steps) => {
                        let parts: Vec<String> = steps
                            .iter()
                            .map(|s| {
                                let mut p = prefixes.compact(&s.predicate);
                                if s.optional {
                                    p.push('?');
                                }
                                p
                            })
                            .collect();
                        out.push_str(&parts.join("/"));
                    }
                }
                out.push(' ');
                write_node(out, &t.object, prefixes);
                out.push_str(" .\n");
            }
            PatternElement::Union(branches) => {
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" UNION ");
                    }
                    write_group(out, b, prefixes, depth + 1);
                }
                out.push_str(" .\n");
            }
            PatternElement::Filter(f) => {
                let _ = write!(out, "FILTER regex(?{}, \"{}\"", f.var, escape_lexical(&f.pattern));
                if let Some(flags) = &f.flags {
                    let _ = write!(out, ", \"{}\"", escape_lexical(flags));
                }
                out.push_str(") .\n");
            }
        }
    }
    out.push_str(&"  ".repeat(depth - 1));
    out.push('}');
}

impl fmt::Display for QueryPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text(&PrefixTable::empty()))
    }
}
