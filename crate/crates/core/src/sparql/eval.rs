//! Nested-loop evaluation over the graph indexes, with optional witness
//! tracking for reason traces.

use std::collections::{HashMap, HashSet};

use regex::{Regex, RegexBuilder};

use super::ast::*;
use super::QueryError;
use crate::store::{Graph, IdTriple, Term, TermId, Triple};

/// Outcome of evaluating a plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResultSet {
    Select { vars: Vec<String>, rows: Vec<Vec<Term>> },
    Ask(bool),
    Count(usize),
}

impl ResultSet {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            ResultSet::Ask(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_count(&self) -> Option<usize> {
        match self {
            ResultSet::Count(n) => Some(*n),
            _ => None,
        }
    }

    pub fn rows(&self) -> &[Vec<Term>] {
        match self {
            ResultSet::Select { rows, .. } => rows,
            _ => &[],
        }
    }

    /// Values of one projected variable, in row order.
    pub fn column(&self, var: &str) -> Vec<&Term> {
        match self {
            ResultSet::Select { vars, rows } => match vars.iter().position(|v| v == var) {
                Some(i) => rows.iter().map(|r| &r[i]).collect(),
                None => Vec::new(),
            },
            _ => Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            ResultSet::Select { rows, .. } => rows.is_empty(),
            ResultSet::Ask(b) => !b,
            ResultSet::Count(n) => *n == 0,
        }
    }
}

/// Triples that satisfied one triple pattern (several for a property path,
/// in traversal order; none for a zero-length path).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub pattern: usize,
    pub triples: Vec<Triple>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplainedRow {
    pub values: Vec<Term>,
    pub witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Explanation {
    pub result: ResultSet,
    /// One entry per SELECT row, per distinct COUNT value, or the first
    /// solution of a true ASK.
    pub rows: Vec<ExplainedRow>,
}

impl Explanation {
    /// All witness triples of all rows, deduplicated, in first-seen order.
    pub fn all_triples(&self) -> Vec<Triple> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for row in &self.rows {
            for w in &row.witnesses {
                for t in &w.triples {
                    if seen.insert(t.clone()) {
                        out.push(t.clone());
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    /// Evaluate the most-bound pattern first instead of textual order.
    pub reorder: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { reorder: true }
    }
}

pub fn evaluate(plan: &QueryPlan, graph: &Graph) -> Result<ResultSet, QueryError> {
    Evaluator::new(graph).evaluate(plan)
}

pub fn explain(plan: &QueryPlan, graph: &Graph) -> Result<Explanation, QueryError> {
    Evaluator::new(graph).explain(plan)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Val(u32);

enum CNode {
    Var(usize),
    Const(Val),
}

enum CPred {
    Var(usize),
    Const(Val),
    Path(Vec<(Val, bool)>),
}

struct CTriple {
    s: CNode,
    p: CPred,
    o: CNode,
    index: usize,
}

enum CElem {
    Triple(CTriple),
    Union(Vec<CGroup>),
    Filter { var: usize, re: Regex },
}

struct CGroup {
    elems: Vec<CElem>,
}

#[derive(Clone)]
struct Sol {
    vals: Vec<Option<Val>>,
    witness: Vec<(usize, Vec<IdTriple>)>,
}

/// Query constants absent from the graph get ids past the graph's term table.
struct Scope<'g> {
    graph: &'g Graph,
    extras: Vec<Term>,
    extra_ids: HashMap<Term, u32>,
}

impl<'g> Scope<'g> {
    fn val(&mut self, term: &Term) -> Val {
        if let Some(id) = self.graph.term_id(term) {
            return Val(id.0);
        }
        let base = self.graph.term_count() as u32;
        if let Some(i) = self.extra_ids.get(term) {
            return Val(base + i);
        }
        let i = self.extras.len() as u32;
        self.extras.push(term.clone());
        self.extra_ids.insert(term.clone(), i);
        Val(base + i)
    }

    fn gid(&self, v: Val) -> Option<TermId> {
        ((v.0 as usize) < self.graph.term_count()).then_some(TermId(v.0))
    }

    fn term(&self, v: Val) -> &Term {
        match self.gid(v) {
            Some(id) => self.graph.term(id),
            None => &self.extras[v.0 as usize - self.graph.term_count()],
        }
    }

    fn all_vals(&self) -> impl Iterator<Item = Val> {
        (0..(self.graph.term_count() + self.extras.len()) as u32).map(Val)
    }
}

pub struct Evaluator<'g> {
    graph: &'g Graph,
    options: EvalOptions,
}

impl<'g> Evaluator<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        Evaluator { graph, options: EvalOptions::default() }
    }

    pub fn with_options(graph: &'g Graph, options: EvalOptions) -> Self {
        Evaluator { graph, options }
    }

    pub fn evaluate(&self, plan: &QueryPlan) -> Result<ResultSet, QueryError> {
        Ok(self.run(plan, false)?.result)
    }

    pub fn explain(&self, plan: &QueryPlan) -> Result<Explanation, QueryError> {
        self.run(plan, true)
    }

    fn run(&self, plan: &QueryPlan, track: bool) -> Result<Explanation, QueryError> {
        let vars = plan.pattern.pattern_vars();
        let mut scope = Scope { graph: self.graph, extras: Vec::new(), extra_ids: HashMap::new() };
        let mut counter = 0;
        let group = compile_group(&plan.pattern, &vars, &mut scope, &mut counter)?;
        let result_vars = plan.result_vars();
        let cols: Vec<usize> = result_vars
            .iter()
            .map(|v| {
                vars.iter()
                    .position(|x| x == v)
                    .ok_or_else(|| QueryError::Invalid(format!("?{v} does not occur in any triple pattern")))
            })
            .collect::<Result<_, _>>()?;

        let seed = Sol { vals: vec![None; vars.len()], witness: Vec::new() };
        let ctx = Ctx { graph: self.graph, scope: &scope, track, reorder: self.options.reorder };
        let sols = ctx.eval_group(&group, vec![seed])?;

        let project = |sol: &Sol| -> Result<Vec<Term>, QueryError> {
            cols.iter()
                .map(|&c| {
                    sol.vals[c]
                        .map(|v| scope.term(v).clone())
                        .ok_or_else(|| QueryError::Invalid(format!("?{} left unbound", vars[c])))
                })
                .collect()
        };
        let explained = |sol: &Sol, values: Vec<Term>| {
            let mut witness = sol.witness.clone();
            witness.sort_by_key(|(i, _)| *i);
            ExplainedRow {
                values,
                witnesses: witness
                    .into_iter()
                    .map(|(pattern, ts)| Witness {
                        pattern,
                        triples: ts.into_iter().map(|t| self.graph.to_triple(t)).collect(),
                    })
                    .collect(),
            }
        };

        let mut rows = Vec::new();
        let result = match &plan.form {
            QueryForm::Ask => {
                if let Some(first) = sols.first() {
                    rows.push(explained(first, Vec::new()));
                }
                ResultSet::Ask(!sols.is_empty())
            }
            QueryForm::Select { distinct, .. } => {
                let mut seen = HashSet::new();
                let mut out = Vec::new();
                for sol in &sols {
                    let values = project(sol)?;
                    if *distinct && !seen.insert(values.clone()) {
                        continue;
                    }
                    rows.push(explained(sol, values.clone()));
                    out.push(values);
                }
                ResultSet::Select { vars: result_vars.clone(), rows: out }
            }
            QueryForm::CountDistinct { .. } => {
                let mut seen = HashSet::new();
                for sol in &sols {
                    let values = project(sol)?;
                    if seen.insert(values.clone()) {
                        rows.push(explained(sol, values));
                    }
                }
                ResultSet::Count(seen.len())
            }
        };
        if !track {
            rows.clear();
        }
        Ok(Explanation { result, rows })
    }
}

fn compile_node(n: &NodePattern, vars: &[String], scope: &mut Scope<'_>) -> CNode {
    match n {
        NodePattern::Var(v) => CNode::Var(vars.iter().position(|x| x == v).expect("collected var")),
        NodePattern::Term(t) => CNode::Const(scope.val(t)),
    }
}

fn compile_group(
    g: &GroupPattern,
    vars: &[String],
    scope: &mut Scope<'_>,
    counter: &mut usize,
) -> Result<CGroup, QueryError> {
    let mut elems = Vec::new();
    for el in &g.elements {
        elems.push(match el {
            PatternElement::Triple(t) => {
                let index = *counter;
                *counter += 1;
                let p = match &t.predicate {
                    PredicatePattern::Var(v) => CPred::Var(vars.iter().position(|x| x == v).expect("collected var")),
                    PredicatePattern::Term(p) => CPred::Const(scope.val(p)),
                    PredicatePattern::Path(steps) => {
                        CPred::Path(steps.iter().map(|s| (scope.val(&s.predicate), s.optional)).collect())
                    }
                };
                CElem::Triple(CTriple {
                    s: compile_node(&t.subject, vars, scope),
                    p,
                    o: compile_node(&t.object, vars, scope),
                    index,
                })
            }
            PatternElement::Union(branches) => {
                CElem::Union(branches.iter().map(|b| compile_group(b, vars, scope, counter)).collect::<Result<_, _>>()?)
            }
            PatternElement::Filter(f) => {
                let var = vars
                    .iter()
                    .position(|x| *x == f.var)
                    .ok_or_else(|| QueryError::UnboundFilterVariable(f.var.clone()))?;
                let mut builder = RegexBuilder::new(&f.pattern);
                for flag in f.flags.as_deref().unwrap_or("").chars() {
                    match flag {
                        'i' => builder.case_insensitive(true),
                        'm' => builder.multi_line(true),
                        's' => builder.dot_matches_new_line(true),
                        'x' => builder.ignore_whitespace(true),
                        other => {
                            return Err(QueryError::BadRegex {
                                pattern: f.pattern.clone(),
                                message: format!("unsupported flag {other:?}"),
                            })
                        }
                    };
                }
                let re = builder
                    .build()
                    .map_err(|e| QueryError::BadRegex { pattern: f.pattern.clone(), message: e.to_string() })?;
                CElem::Filter { var, re }
            }
        });
    }
    Ok(CGroup { elems })
}

struct Ctx<'a> {
    graph: &'a Graph,
    scope: &'a Scope<'a>,
    track: bool,
    reorder: bool,
}

fn elem_vars(e: &CElem, out: &mut Vec<usize>) {
    match e {
        CElem::Triple(t) => {
            if let CNode::Var(i) = t.s {
                out.push(i);
            }
            if let CPred::Var(i) = t.p {
                out.push(i);
            }
            if let CNode::Var(i) = t.o {
                out.push(i);
            }
        }
        CElem::Union(bs) => {
            for b in bs {
                b.elems.iter().for_each(|e| elem_vars(e, out));
            }
        }
        CElem::Filter { .. } => {}
    }
}

fn boundness(e: &CElem, bound: &HashSet<usize>) -> usize {
    let node = |n: &CNode| match n {
        CNode::Const(_) => 2,
        CNode::Var(i) => 2 * usize::from(bound.contains(i)),
    };
    match e {
        CElem::Triple(t) => {
            let p = match &t.p {
                CPred::Var(i) => 2 * usize::from(bound.contains(i)),
                _ => 2,
            };
            node(&t.s) + p + node(&t.o)
        }
        CElem::Union(_) => {
            let mut vs = Vec::new();
            elem_vars(e, &mut vs);
            usize::from(vs.iter().any(|v| bound.contains(v)))
        }
        CElem::Filter { .. } => 0,
    }
}

impl Ctx<'_> {
    fn eval_group(&self, g: &CGroup, seeds: Vec<Sol>) -> Result<Vec<Sol>, QueryError> {
        let mut others: Vec<&CElem> = Vec::new();
        let mut filters = Vec::new();
        for e in &g.elems {
            match e {
                CElem::Filter { var, re } => filters.push((*var, re)),
                _ => others.push(e),
            }
        }
        if self.reorder {
            let mut bound: HashSet<usize> =
                seeds.first().map(|s| (0..s.vals.len()).filter(|i| s.vals[*i].is_some()).collect()).unwrap_or_default();
            let mut ordered = Vec::with_capacity(others.len());
            while !others.is_empty() {
                let best = (0..others.len())
                    .max_by_key(|&i| (boundness(others[i], &bound), std::cmp::Reverse(i)))
                    .expect("non-empty");
                let e = others.remove(best);
                let mut vs = Vec::new();
                elem_vars(e, &mut vs);
                bound.extend(vs);
                ordered.push(e);
            }
            others = ordered;
        }

        let mut sols = seeds;
        for e in others {
            let mut next = Vec::new();
            for sol in &sols {
                match e {
                    CElem::Triple(t) => self.extend_triple(t, sol, &mut next),
                    CElem::Union(branches) => {
                        for b in branches {
                            next.extend(self.eval_group(b, vec![sol.clone()])?);
                        }
                    }
                    CElem::Filter { .. } => unreachable!(),
                }
            }
            sols = dedupe(next);
            if sols.is_empty() {
                break;
            }
        }
        for (var, re) in filters {
            let mut kept = Vec::with_capacity(sols.len());
            for sol in sols {
                let v = sol.vals[var].ok_or_else(|| QueryError::UnboundFilterVariable(format!("#{var}")))?;
                let keep = match self.scope.term(v) {
                    Term::Literal { lexical, .. } => re.is_match(lexical),
                    Term::Iri(_) => false,
                };
                if keep {
                    kept.push(sol);
                }
            }
            sols = kept;
        }
        Ok(sols)
    }

    fn node_val(&self, n: &CNode, sol: &Sol) -> Option<Val> {
        match n {
            CNode::Const(v) => Some(*v),
            CNode::Var(i) => sol.vals[*i],
        }
    }

    fn bind(n: &CNode, v: Val, sol: &mut Sol) -> bool {
        match n {
            CNode::Const(c) => *c == v,
            CNode::Var(i) => match sol.vals[*i] {
                Some(x) => x == v,
                None => {
                    sol.vals[*i] = Some(v);
                    true
                }
            },
        }
    }

    fn extend_triple(&self, t: &CTriple, sol: &Sol, out: &mut Vec<Sol>) {
        let s = self.node_val(&t.s, sol);
        let o = self.node_val(&t.o, sol);
        let p = match &t.p {
            CPred::Path(steps) => return self.extend_path(t, steps, s, o, sol, out),
            CPred::Const(v) => Some(*v),
            CPred::Var(i) => sol.vals[*i],
        };
        // Constants outside the graph never occur in a triple.
        let to_gid = |v: Option<Val>| match v {
            None => Some(None),
            Some(v) => self.scope.gid(v).map(Some),
        };
        let (Some(gs), Some(gp), Some(go)) = (to_gid(s), to_gid(p), to_gid(o)) else {
            return;
        };
        for (a, b, c) in self.graph.match_ids(gs, gp, go) {
            let mut new = sol.clone();
            let ok = Self::bind(&t.s, Val(a.0), &mut new)
                && match &t.p {
                    CPred::Var(i) => Self::bind(&CNode::Var(*i), Val(b.0), &mut new),
                    _ => true,
                }
                && Self::bind(&t.o, Val(c.0), &mut new);
            if ok {
                if self.track {
                    new.witness.push((t.index, vec![(a, b, c)]));
                }
                out.push(new);
            }
        }
    }

    fn forward(&self, start: Val, steps: &[(Val, bool)]) -> Vec<(Val, Vec<IdTriple>)> {
        let mut states = vec![(start, Vec::new())];
        for &(pred, optional) in steps {
            let mut next: Vec<(Val, Vec<IdTriple>)> = if optional { states.clone() } else { Vec::new() };
            let mut seen: HashSet<Val> = next.iter().map(|(v, _)| *v).collect();
            if let Some(p) = self.scope.gid(pred) {
                for (node, path) in &states {
                    let Some(n) = self.scope.gid(*node) else { continue };
                    for obj in self.graph.objects(n, p) {
                        if seen.insert(Val(obj.0)) {
                            let mut path = path.clone();
                            path.push((n, p, obj));
                            next.push((Val(obj.0), path));
                        }
                    }
                }
            }
            states = next;
            if states.is_empty() {
                break;
            }
        }
        states
    }

    fn backward(&self, end: Val, steps: &[(Val, bool)]) -> Vec<(Val, Vec<IdTriple>)> {
        let mut states = vec![(end, Vec::new())];
        for &(pred, optional) in steps.iter().rev() {
            let mut next: Vec<(Val, Vec<IdTriple>)> = if optional { states.clone() } else { Vec::new() };
            let mut seen: HashSet<Val> = next.iter().map(|(v, _)| *v).collect();
            if let Some(p) = self.scope.gid(pred) {
                for (node, path) in &states {
                    let Some(n) = self.scope.gid(*node) else { continue };
                    for subj in self.graph.subjects(p, n) {
                        if seen.insert(Val(subj.0)) {
                            let mut path = path.clone();
                            path.insert(0, (subj, p, n));
                            next.push((Val(subj.0), path));
                        }
                    }
                }
            }
            states = next;
            if states.is_empty() {
                break;
            }
        }
        states
    }

    fn extend_path(
        &self,
        t: &CTriple,
        steps: &[(Val, bool)],
        s: Option<Val>,
        o: Option<Val>,
        sol: &Sol,
        out: &mut Vec<Sol>,
    ) {
        let mut pairs: Vec<(Val, Val, Vec<IdTriple>)> = Vec::new();
        match (s, o) {
            (Some(sv), _) => {
                for (end, path) in self.forward(sv, steps) {
                    if o.is_none_or(|ov| ov == end) {
                        pairs.push((sv, end, path));
                    }
                }
            }
            (None, Some(ov)) => {
                for (start, path) in self.backward(ov, steps) {
                    pairs.push((start, ov, path));
                }
            }
            (None, None) => {
                let starts: Vec<Val> = match steps.first() {
                    Some(&(p, false)) => match self.scope.gid(p) {
                        Some(p) => {
                            let mut seen = HashSet::new();
                            self.graph
                                .match_ids(None, Some(p), None)
                                .into_iter()
                                .map(|(s, _, _)| Val(s.0))
                                .filter(|v| seen.insert(*v))
                                .collect()
                        }
                        None => Vec::new(),
                    },
                    _ => self.scope.all_vals().collect(),
                };
                for start in starts {
                    for (end, path) in self.forward(start, steps) {
                        pairs.push((start, end, path));
                    }
                }
            }
        }
        for (start, end, path) in pairs {
            let mut new = sol.clone();
            if Self::bind(&t.s, start, &mut new) && Self::bind(&t.o, end, &mut new) {
                if self.track {
                    new.witness.push((t.index, path));
                }
                out.push(new);
            }
        }
    }
}

fn dedupe(sols: Vec<Sol>) -> Vec<Sol> {
    let mut seen = HashSet::new();
    sols.into_iter().filter(|s| seen.insert(s.vals.clone())).collect()
}
