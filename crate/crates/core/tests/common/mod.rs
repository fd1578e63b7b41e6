//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;
use vkbqa::sparql::{
    GroupPattern, NodePattern, PatternElement, PredicatePattern, PrefixTable, QueryForm, QueryPlan, ResultSet,
};
use vkbqa::store::{Graph, Term};
use vkbqa::vocab;

pub const NODES: usize = 8;
pub const PREDS: usize = 4;
pub const LITS: usize = 5;

pub fn node(i: usize) -> Term {
    Term::iri(vocab::resource(&format!("n{i}")))
}

pub fn pred(i: usize) -> Term {
    Term::iri(vocab::resource(&format!("p{i}")))
}

pub fn lit(i: usize) -> Term {
    if i == LITS - 1 {
        Term::lang_literal(format!("l{i}"), "en")
    } else {
        Term::literal(format!("l{i}"))
    }
}

/// Up to `max` random triples over a small vocabulary, so joins hit often.
pub fn random_graph(rng: &mut StdRng, max: usize) -> Graph {
    let mut g = Graph::new();
    let n = rng.gen_range(max / 4..=max);
    for _ in 0..n {
        let s = node(rng.gen_range(0..NODES));
        let p = pred(rng.gen_range(0..PREDS));
        let o = if rng.gen_bool(0.75) { node(rng.gen_range(0..NODES)) } else { lit(rng.gen_range(0..LITS)) };
        g.insert_terms(s, p, o).unwrap();
    }
    g
}

fn const_text(t: &Term) -> String {
    match t {
        Term::Iri(iri) => format!("KB:{}", iri.strip_prefix(vocab::RESOURCE_NS).unwrap()),
        other => other.to_string(),
    }
}

// Constants occasionally fall outside what the graph uses.
fn rand_node(rng: &mut StdRng) -> String {
    let i = if rng.gen_bool(0.05) { NODES } else { rng.gen_range(0..NODES) };
    const_text(&node(i))
}

fn rand_object(rng: &mut StdRng) -> String {
    if rng.gen_bool(0.2) {
        const_text(&lit(rng.gen_range(0..LITS)))
    } else {
        rand_node(rng)
    }
}

fn rand_pred(rng: &mut StdRng) -> String {
    let i = if rng.gen_bool(0.05) { PREDS } else { rng.gen_range(0..PREDS) };
    const_text(&pred(i))
}

fn rand_path(rng: &mut StdRng) -> String {
    let steps = rng.gen_range(1..=3);
    let mut parts = Vec::new();
    for _ in 0..steps {
        let mut s = rand_pred(rng);
        if rng.gen_bool(0.5) {
            s.push('?');
        }
        parts.push(s);
    }
    // A lone mandatory step is written as a path anyway.
    if parts.len() == 1 && !parts[0].ends_with('?') {
        parts.push(format!("{}?", rand_pred(rng)));
    }
    parts.join("/")
}

/// One triple whose variables are exactly `vars` (0-2 of them, subject/object
/// positions only).
fn triple_with_vars(rng: &mut StdRng, vars: &[&str]) -> String {
    let p = if rng.gen_bool(0.35) { rand_path(rng) } else { rand_pred(rng) };
    let (s, o) = match vars {
        [] => (rand_node(rng), rand_object(rng)),
        [v] if rng.gen_bool(0.5) => (format!("?{v}"), rand_object(rng)),
        [v] => (rand_node(rng), format!("?{v}")),
        [a, b] if rng.gen_bool(0.5) => (format!("?{a}"), format!("?{b}")),
        [a, b] => (format!("?{b}"), format!("?{a}")),
        _ => unreachable!(),
    };
    format!("{s} {p} {o}")
}

/// A random query in the supported fragment over variables ?a ?b ?c.
/// Every UNION branch binds the same variables, so each solution binds all
/// pattern variables.
pub fn random_query(rng: &mut StdRng) -> String {
    const VARS: [&str; 3] = ["a", "b", "c"];
    let mut used: BTreeSet<&str> = BTreeSet::new();
    let mut elems = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let k: u8 = rng.gen_range(0..10);
        if k < 5 {
            let pick = |rng: &mut StdRng| -> String {
                match rng.gen_range(0..4) {
                    0 | 1 => format!("?{}", VARS[rng.gen_range(0..3)]),
                    2 => rand_node(rng),
                    _ => rand_object(rng),
                }
            };
            let s = if rng.gen_bool(0.7) { format!("?{}", VARS[rng.gen_range(0..3)]) } else { rand_node(rng) };
            let p = match rng.gen_range(0..10) {
                0 => format!("?{}", VARS[rng.gen_range(0..3)]),
                1..=3 => rand_path(rng),
                _ => rand_pred(rng),
            };
            let o = pick(rng);
            for t in [&s, &p, &o] {
                if let Some(v) = t.strip_prefix('?') {
                    used.insert(VARS.iter().find(|x| **x == v).unwrap());
                }
            }
            elems.push(format!("{s} {p} {o} ."));
        } else if k < 8 {
            let mut vs: Vec<&str> = VARS.to_vec();
            vs.shuffle(rng);
            vs.truncate(rng.gen_range(0..=2).max(rng.gen_range(0..=2)));
            used.extend(vs.iter().copied());
            let branches: Vec<String> =
                (0..rng.gen_range(2..=3)).map(|_| format!("{{ {} }}", triple_with_vars(rng, &vs))).collect();
            elems.push(format!("{} .", branches.join(" UNION ")));
        } else {
            let v = VARS[rng.gen_range(0..3)];
            used.insert(v);
            elems.push(format!("?{v} {} {} .", rand_pred(rng), rand_object(rng)));
        }
    }
    if !used.is_empty() && rng.gen_bool(0.3) {
        let v: Vec<&&str> = used.iter().collect();
        let v = v[rng.gen_range(0..v.len())];
        let pat = ["^l[0-2]$", "l", "[34]", "^n", "L1"][rng.gen_range(0..5)];
        let flags = if rng.gen_bool(0.2) { ", \"i\"" } else { "" };
        elems.push(format!("FILTER regex(?{v}, \"{pat}\"{flags})"));
    }
    let body = elems.join("\n  ");
    let used: Vec<&str> = used.into_iter().collect();
    let form = if used.is_empty() { 0 } else { rng.gen_range(0..5) };
    let mut proj: Vec<&str> = used.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
    if proj.is_empty() && !used.is_empty() {
        proj.push(used[0]);
    }
    let proj_text = proj.iter().map(|v| format!("?{v}")).collect::<Vec<_>>().join(" ");
    match form {
        0 => format!("ASK {{\n  {body}\n}}"),
        1 => format!("SELECT DISTINCT {proj_text} WHERE {{\n  {body}\n}}"),
        2 => format!("SELECT {proj_text} WHERE {{\n  {body}\n}}"),
        3 => format!("SELECT * WHERE {{\n  {body}\n}}"),
        _ => format!("SELECT COUNT(DISTINCT ?{}) WHERE {{\n  {body}\n}}", used[rng.gen_range(0..used.len())]),
    }
}

fn plan_constants(g: &GroupPattern, out: &mut BTreeSet<Term>) {
    for el in &g.elements {
        match el {
            PatternElement::Triple(t) => {
                for n in [&t.subject, &t.object] {
                    if let NodePattern::Term(t) = n {
                        out.insert(t.clone());
                    }
                }
                match &t.predicate {
                    PredicatePattern::Term(p) => {
                        out.insert(p.clone());
                    }
                    PredicatePattern::Path(steps) => out.extend(steps.iter().map(|s| s.predicate.clone())),
                    PredicatePattern::Var(_) => {}
                }
            }
            PatternElement::Union(bs) => bs.iter().for_each(|b| plan_constants(b, out)),
            PatternElement::Filter(_) => {}
        }
    }
}

struct Oracle<'a> {
    vars: Vec<String>,
    domain: Vec<Term>,
    index: HashMap<&'a Term, usize>,
    triples: HashSet<(usize, usize, usize)>,
    out_edges: HashMap<(usize, usize), Vec<usize>>,
    reach: HashMap<(usize, PathKey), BTreeSet<usize>>,
    regexes: HashMap<(String, Option<String>), Regex>,
}

impl Oracle<'_> {
    fn id(&self, t: &Term) -> usize {
        self.index[t]
    }

    fn node(&self, n: &NodePattern, a: &[usize]) -> usize {
        match n {
            NodePattern::Var(v) => a[self.vars.iter().position(|x| x == v).unwrap()],
            NodePattern::Term(t) => self.id(t),
        }
    }

    fn reach(&mut self, start: usize, steps: Vec<(usize, bool)>) -> BTreeSet<usize> {
        if let Some(r) = self.reach.get(&(start, steps.clone())) {
            return r.clone();
        }
        let mut set = BTreeSet::from([start]);
        for &(p, optional) in &steps {
            let mut next = if optional { set.clone() } else { BTreeSet::new() };
            for s in &set {
                if let Some(os) = self.out_edges.get(&(*s, p)) {
                    next.extend(os.iter().copied());
                }
            }
            set = next;
        }
        self.reach.insert((start, steps), set.clone());
        set
    }

    fn holds(&mut self, g: &GroupPattern, a: &[usize]) -> bool {
        g.elements.iter().all(|el| match el {
            PatternElement::Triple(t) => {
                let (s, o) = (self.node(&t.subject, a), self.node(&t.object, a));
                match &t.predicate {
                    PredicatePattern::Var(v) => {
                        let p = a[self.vars.iter().position(|x| x == v).unwrap()];
                        self.triples.contains(&(s, p, o))
                    }
                    PredicatePattern::Term(p) => self.triples.contains(&(s, self.id(p), o)),
                    PredicatePattern::Path(steps) => {
                        let steps: Vec<(usize, bool)> =
                            steps.iter().map(|st| (self.id(&st.predicate), st.optional)).collect();
                        self.reach(s, steps).contains(&o)
                    }
                }
            }
            PatternElement::Union(bs) => bs.iter().any(|b| self.holds(b, a)),
            PatternElement::Filter(f) => {
                let v = a[self.vars.iter().position(|x| *x == f.var).unwrap()];
                let key = (f.pattern.clone(), f.flags.clone());
                let re = self.regexes.entry(key).or_insert_with(|| {
                    let prefix = if f.flags.as_deref().unwrap_or("").contains('i') { "(?i)" } else { "" };
                    Regex::new(&format!("{prefix}{}", f.pattern)).unwrap()
                });
                match &self.domain[v] {
                    Term::Literal { lexical, .. } => re.is_match(lexical),
                    Term::Iri(_) => false,
                }
            }
        })
    }
}

/// Evaluates by trying every assignment of graph terms (plus query constants)
/// to the pattern variables.
// Path steps as (predicate index, optional).
type PathKey = Vec<(usize, bool)>;

pub fn oracle(plan: &QueryPlan, graph: &Graph) -> ResultSet {
    let mut constants = BTreeSet::new();
    plan_constants(&plan.pattern, &mut constants);
    let mut domain: Vec<Term> = graph.terms().map(|(_, t)| t.clone()).collect();
    for c in constants {
        if graph.term_id(&c).is_none() {
            domain.push(c);
        }
    }
    let index: HashMap<&Term, usize> = domain.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let triples: HashSet<(usize, usize, usize)> =
        graph.triples().map(|t| (index[&t.subject], index[&t.predicate], index[&t.object])).collect();
    let mut out_edges: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for &(s, p, o) in &triples {
        out_edges.entry((s, p)).or_default().push(o);
    }
    let vars = plan.pattern.pattern_vars();
    let mut o = Oracle {
        vars: vars.clone(),
        domain: domain.clone(),
        index,
        triples,
        out_edges,
        reach: HashMap::new(),
        regexes: HashMap::new(),
    };
    let n = domain.len();
    let mut solutions = Vec::new();
    let mut a = vec![0usize; vars.len()];
    loop {
        if o.holds(&plan.pattern, &a) {
            solutions.push(a.clone());
        }
        // next assignment, odometer style
        let mut i = 0;
        while i < a.len() {
            a[i] += 1;
            if a[i] < n {
                break;
            }
            a[i] = 0;
            i += 1;
        }
        if i == a.len() || n == 0 {
            break;
        }
    }
    let result_vars = plan.result_vars();
    let cols: Vec<usize> = result_vars.iter().map(|v| vars.iter().position(|x| x == v).unwrap()).collect();
    let project = |s: &Vec<usize>| -> Vec<Term> { cols.iter().map(|&c| domain[s[c]].clone()).collect() };
    match &plan.form {
        QueryForm::Ask => ResultSet::Ask(!solutions.is_empty()),
        QueryForm::CountDistinct { .. } => {
            ResultSet::Count(solutions.iter().map(project).collect::<BTreeSet<_>>().len())
        }
        QueryForm::Select { distinct, .. } => {
            let rows: Vec<Vec<Term>> = if *distinct {
                solutions.iter().map(project).collect::<BTreeSet<_>>().into_iter().collect()
            } else {
                solutions.iter().map(project).collect()
            };
            ResultSet::Select { vars: result_vars, rows }
        }
    }
}

/// Row order is not part of the contract; sort rows for comparison.
pub fn canonical(r: ResultSet) -> ResultSet {
    match r {
        ResultSet::Select { vars, mut rows } => {
            rows.sort();
            ResultSet::Select { vars, rows }
        }
        other => other,
    }
}

/// Category DAG: `broader` edges only go from lower to higher indices.
/// Entities `E0..` carry 1-3 `subject` edges.
pub struct CategoryDag {
    pub graph: Graph,
    pub entities: Vec<Term>,
    pub subject: HashMap<Term, Vec<Term>>,
    pub broader: HashMap<Term, Vec<Term>>,
}

pub fn category(i: usize) -> Term {
    Term::iri(vocab::resource(&format!("Category:C{i}")))
}

pub fn random_dag(rng: &mut StdRng, nodes: usize, entities: usize) -> CategoryDag {
    let (sub, br) = (Term::iri(vocab::SUBJECT), Term::iri(vocab::BROADER));
    let mut graph = Graph::new();
    let mut subject: HashMap<Term, Vec<Term>> = HashMap::new();
    let mut broader: HashMap<Term, Vec<Term>> = HashMap::new();
    for i in 0..nodes {
        for _ in 0..rng.gen_range(0..=3) {
            // mostly short hops so chains get deep
            let j = i + rng.gen_range(1..=20);
            if j < nodes && graph.insert_terms(category(i), br.clone(), category(j)).unwrap() {
                broader.entry(category(i)).or_default().push(category(j));
            }
        }
    }
    let mut ents = Vec::new();
    for e in 0..entities {
        let ent = Term::iri(vocab::resource(&format!("E{e}")));
        for _ in 0..rng.gen_range(1..=3) {
            let c = category(rng.gen_range(0..nodes));
            if graph.insert_terms(ent.clone(), sub.clone(), c.clone()).unwrap() {
                subject.entry(ent.clone()).or_default().push(c);
            }
        }
        ents.push(ent);
    }
    CategoryDag { graph, entities: ents, subject, broader }
}

impl CategoryDag {
    /// Level-by-level expansion: level 1 is the subject categories, each
    /// further level the broader parents of the previous one.
    pub fn bfs(&self, entity: &Term, depth: usize) -> BTreeSet<Term> {
        let mut all = BTreeSet::new();
        if depth == 0 {
            return all;
        }
        let mut frontier: BTreeSet<Term> = self.subject.get(entity).into_iter().flatten().cloned().collect();
        all.extend(frontier.iter().cloned());
        for _ in 1..depth {
            frontier = frontier.iter().flat_map(|c| self.broader.get(c).into_iter().flatten().cloned()).collect();
            all.extend(frontier.iter().cloned());
        }
        all
    }
}

/// One entry of the query corpus file.
pub struct CorpusEntry {
    pub name: String,
    pub query: String,
    pub expected: Vec<String>,
}

pub fn read_corpus(text: &str) -> Vec<CorpusEntry> {
    let mut out: Vec<CorpusEntry> = Vec::new();
    for line in text.lines() {
        if let Some(name) = line.strip_prefix("## ") {
            out.push(CorpusEntry { name: name.trim().into(), query: String::new(), expected: Vec::new() });
        } else if line.starts_with('#') || out.is_empty() {
            continue;
        } else if let Some(v) = line.strip_prefix("=> ") {
            out.last_mut().unwrap().expected.push(v.trim().into());
        } else if !line.trim().is_empty() {
            let q = &mut out.last_mut().unwrap().query;
            q.push_str(line);
            q.push('\n');
        }
    }
    out
}

/// Compares a result with the corpus expectations; `Err` explains a mismatch.
pub fn check_corpus_result(entry: &CorpusEntry, result: &ResultSet, prefixes: &PrefixTable) -> Result<(), String> {
    let got: Vec<String> = match result {
        ResultSet::Ask(b) => vec![b.to_string()],
        ResultSet::Count(n) => vec![n.to_string()],
        ResultSet::Select { rows, .. } => {
            rows.iter().map(|r| r.iter().map(|t| prefixes.compact(t)).collect::<Vec<_>>().join(" ")).collect()
        }
    };
    let mut sorted_got = got.clone();
    sorted_got.sort();
    let mut want = entry.expected.clone();
    want.sort();
    if sorted_got == want {
        Ok(())
    } else {
        Err(format!("{}: expected {:?}, got {:?}", entry.name, entry.expected, got))
    }
}
