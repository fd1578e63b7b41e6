use std::collections::{BTreeSet, HashMap};
use std::ops::Bound;

use super::{StoreError, Term, Triple};

/// Interned term handle. Only meaningful for the graph that issued it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub(crate) u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A triple of interned ids, `(subject, predicate, object)`.
pub type IdTriple = (TermId, TermId, TermId);

type Key = (u32, u32, u32);

/// In-memory triple store with SPO / POS / OSP orderings and a literal index.
///
/// Terms are interned once; all three orderings hold every triple, so any
/// pattern with at least one bound position is served by a range scan.
#[derive(Debug, Default, Clone)]
pub struct Graph {
    terms: Vec<Term>,
    ids: HashMap<Term, TermId>,
    spo: BTreeSet<Key>,
    pos: BTreeSet<Key>,
    osp: BTreeSet<Key>,
    literals: HashMap<(TermId, String), Vec<(TermId, TermId)>>,
    literals_folded: HashMap<(TermId, String), Vec<(TermId, TermId)>>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct triples.
    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    /// Number of interned terms. Every interned term occurs in some triple.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Inserts a triple. Returns `Ok(false)` if it was already present.
    pub fn insert(&mut self, triple: Triple) -> Result<bool, StoreError> {
        triple.validate()?;
        if let (Some(s), Some(p), Some(o)) =
            (self.term_id(&triple.subject), self.term_id(&triple.predicate), self.term_id(&triple.object))
        {
            if self.spo.contains(&(s.0, p.0, o.0)) {
                return Ok(false);
            }
        }
        let s = self.intern(triple.subject);
        let p = self.intern(triple.predicate);
        let o = self.intern(triple.object);
        self.spo.insert((s.0, p.0, o.0));
        self.pos.insert((p.0, o.0, s.0));
        self.osp.insert((o.0, s.0, p.0));
        if let Term::Literal { lexical, .. } = &self.terms[o.index()] {
            let folded = lexical.to_lowercase();
            let lexical = lexical.clone();
            self.literals.entry((p, lexical)).or_default().push((s, o));
            self.literals_folded.entry((p, folded)).or_default().push((s, o));
        }
        Ok(true)
    }

    pub fn insert_terms(&mut self, s: Term, p: Term, o: Term) -> Result<bool, StoreError> {
        self.insert(Triple::new(s, p, o))
    }

    fn intern(&mut self, term: Term) -> TermId {
        if let Some(id) = self.ids.get(&term) {
            return *id;
        }
        let id = TermId(u32::try_from(self.terms.len()).expect("term table overflow"));
        self.terms.push(term.clone());
        self.ids.insert(term, id);
        id
    }

    pub fn term_id(&self, term: &Term) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub fn iri_id(&self, iri: &str) -> Option<TermId> {
        self.term_id(&Term::iri(iri))
    }

    pub fn term(&self, id: TermId) -> &Term {
        &self.terms[id.index()]
    }

    pub fn terms(&self) -> impl Iterator<Item = (TermId, &Term)> {
        self.terms.iter().enumerate().map(|(i, t)| (TermId(i as u32), t))
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        match (self.term_id(&triple.subject), self.term_id(&triple.predicate), self.term_id(&triple.object)) {
            (Some(s), Some(p), Some(o)) => self.contains_ids((s, p, o)),
            _ => false,
        }
    }

    pub fn contains_ids(&self, (s, p, o): IdTriple) -> bool {
        self.spo.contains(&(s.0, p.0, o.0))
    }

    pub fn to_triple(&self, (s, p, o): IdTriple) -> Triple {
        Triple::new(self.term(s).clone(), self.term(p).clone(), self.term(o).clone())
    }

    /// All triples in SPO order.
    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().map(|&(s, p, o)| self.to_triple((TermId(s), TermId(p), TermId(o))))
    }

    /// Triples matching the bound positions; `None` is a wildcard.
    pub fn match_ids(&self, s: Option<TermId>, p: Option<TermId>, o: Option<TermId>) -> Vec<IdTriple> {
        let id = |k: u32| TermId(k);
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                if self.contains_ids((s, p, o)) {
                    vec![(s, p, o)]
                } else {
                    Vec::new()
                }
            }
            (Some(s), Some(p), None) => prefix2(&self.spo, s.0, p.0).map(|(s, p, o)| (id(s), id(p), id(o))).collect(),
            (Some(s), None, None) => prefix1(&self.spo, s.0).map(|(s, p, o)| (id(s), id(p), id(o))).collect(),
            (None, Some(p), Some(o)) => prefix2(&self.pos, p.0, o.0).map(|(p, o, s)| (id(s), id(p), id(o))).collect(),
            (None, Some(p), None) => prefix1(&self.pos, p.0).map(|(p, o, s)| (id(s), id(p), id(o))).collect(),
            (Some(s), None, Some(o)) => prefix2(&self.osp, o.0, s.0).map(|(o, s, p)| (id(s), id(p), id(o))).collect(),
            (None, None, Some(o)) => prefix1(&self.osp, o.0).map(|(o, s, p)| (id(s), id(p), id(o))).collect(),
            (None, None, None) => self.spo.iter().map(|&(s, p, o)| (id(s), id(p), id(o))).collect(),
        }
    }

    /// Term-level pattern match. A concrete term that was never inserted
    /// matches nothing.
    pub fn matches(&self, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>) -> Vec<Triple> {
        let resolve = |t: Option<&Term>| match t {
            None => Some(None),
            Some(t) => self.term_id(t).map(Some),
        };
        match (resolve(s), resolve(p), resolve(o)) {
            (Some(s), Some(p), Some(o)) => self.match_ids(s, p, o).into_iter().map(|t| self.to_triple(t)).collect(),
            _ => Vec::new(),
        }
    }

    /// Objects of `(s, p, ?)`.
    pub fn objects(&self, s: TermId, p: TermId) -> impl Iterator<Item = TermId> + '_ {
        prefix2(&self.spo, s.0, p.0).map(|(_, _, o)| TermId(o))
    }

    /// Subjects of `(?, p, o)`.
    pub fn subjects(&self, p: TermId, o: TermId) -> impl Iterator<Item = TermId> + '_ {
        prefix2(&self.pos, p.0, o.0).map(|(_, _, s)| TermId(s))
    }

    /// `(subject, literal)` pairs whose literal under `predicate` has the
    /// given lexical form. Language tags are not filtered here.
    pub fn literal_subjects(&self, predicate: TermId, lexical: &str, case_insensitive: bool) -> &[(TermId, TermId)] {
        let found = if case_insensitive {
            self.literals_folded.get(&(predicate, lexical.to_lowercase()))
        } else {
            self.literals.get(&(predicate, lexical.to_string()))
        };
        found.map(Vec::as_slice).unwrap_or(&[])
    }

    /// True when the term occurs as a subject or object of some triple.
    pub fn is_node(&self, id: TermId) -> bool {
        prefix1(&self.spo, id.0).next().is_some() || prefix1(&self.osp, id.0).next().is_some()
    }
}

fn prefix1(set: &BTreeSet<Key>, a: u32) -> impl Iterator<Item = Key> + '_ {
    set.range((Bound::Included((a, 0, 0)), Bound::Included((a, u32::MAX, u32::MAX)))).copied()
}

fn prefix2(set: &BTreeSet<Key>, a: u32, b: u32) -> impl Iterator<Item = Key> + '_ {
    set.range((Bound::Included((a, b, 0)), Bound::Included((a, b, u32::MAX)))).copied()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn t(s: &str, p: &str, o: Term) -> Triple {
        Triple::new(Term::iri(s), Term::iri(p), o)
    }

    #[test]
    fn insert_into_empty_graph() {
        let mut g = Graph::new();
        assert!(g.insert(t("A", "p", Term::iri("B"))).unwrap());
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn insert_is_idempotent() {
        let mut g = Graph::new();
        g.insert(t("A", "p", Term::iri("B"))).unwrap();
        assert!(!g.insert(t("A", "p", Term::iri("B"))).unwrap());
        assert_eq!(g.len(), 1);
        assert_eq!(g.term_count(), 3);
    }

    #[test]
    fn malformed_terms_rejected_without_side_effects() {
        let mut g = Graph::new();
        assert!(matches!(g.insert(t("", "p", Term::iri("B"))), Err(StoreError::EmptyIri)));
        assert!(g.insert(t("A", "p", Term::iri("has space"))).is_err());
        assert!(g.is_empty());
        assert_eq!(g.term_count(), 0);
    }

    #[test]
    fn wildcard_returns_all_three() {
        let mut g = Graph::new();
        g.insert(t("A", "p", Term::iri("B"))).unwrap();
        g.insert(t("A", "q", Term::literal("x"))).unwrap();
        g.insert(t("C", "p", Term::iri("A"))).unwrap();
        let all = g.matches(None, None, None);
        let scan: Vec<Triple> = g.triples().collect();
        assert_eq!(all.len(), 3);
        assert_eq!(all, scan);
    }

    #[test]
    fn literal_index_case_modes() {
        let mut g = Graph::new();
        g.insert(t("A", "label", Term::lang_literal("Religion", "en"))).unwrap();
        let p = g.iri_id("label").unwrap();
        assert_eq!(g.literal_subjects(p, "Religion", false).len(), 1);
        assert_eq!(g.literal_subjects(p, "religion", false).len(), 0);
        assert_eq!(g.literal_subjects(p, "religion", true).len(), 1);
    }

    fn random_graph(rng: &mut StdRng, n: usize) -> Graph {
        let mut g = Graph::new();
        while g.len() < n {
            let s = format!("n{}", rng.gen_range(0..30));
            let p = format!("p{}", rng.gen_range(0..5));
            let o = if rng.gen_bool(0.2) {
                Term::literal(format!("l{}", rng.gen_range(0..10)))
            } else {
                Term::iri(format!("n{}", rng.gen_range(0..30)))
            };
            g.insert(t(&s, &p, o)).unwrap();
        }
        g
    }

    #[test]
    fn index_lookup_equals_linear_scan() {
        let mut rng = StdRng::seed_from_u64(7);
        let g = random_graph(&mut rng, 500);
        let all: Vec<Triple> = g.triples().collect();
        let pick = |rng: &mut StdRng, f: fn(&Triple) -> &Term| -> Option<Term> {
            if rng.gen_bool(0.5) {
                Some(f(&all[rng.gen_range(0..all.len())]).clone())
            } else {
                None
            }
        };
        for _ in 0..100 {
            let s = pick(&mut rng, |t| &t.subject);
            let p = pick(&mut rng, |t| &t.predicate);
            let o = pick(&mut rng, |t| &t.object);
            let mut got = g.matches(s.as_ref(), p.as_ref(), o.as_ref());
            let mut want: Vec<Triple> = all
                .iter()
                .filter(|t| s.as_ref().is_none_or(|x| *x == t.subject))
                .filter(|t| p.as_ref().is_none_or(|x| *x == t.predicate))
                .filter(|t| o.as_ref().is_none_or(|x| *x == t.object))
                .cloned()
                .collect();
            got.sort();
            want.sort();
            assert_eq!(got, want, "pattern {s:?} {p:?} {o:?}");
        }
    }
}
