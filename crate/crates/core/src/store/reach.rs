//! Bounded category closure and WikiLink neighbourhood queries.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{Graph, IdTriple, Term, TermId};
use crate::vocab;

impl Graph {
    /// Categories reachable from `entity` by one `subject` edge followed by
    /// at most `max_steps - 1` `broader` edges.
    pub fn transitive_categories(&self, entity: &Term, max_steps: usize) -> BTreeSet<Term> {
        let Some(id) = self.term_id(entity) else {
            return BTreeSet::new();
        };
        self.category_paths(id, max_steps).into_keys().map(|c| self.term(c).clone()).collect()
    }

    /// Like [`Graph::transitive_categories`], keyed by category id with a
    /// shortest witness path (first found, in index order) for each.
    pub fn category_paths(&self, entity: TermId, max_steps: usize) -> BTreeMap<TermId, Vec<IdTriple>> {
        let mut out: BTreeMap<TermId, Vec<IdTriple>> = BTreeMap::new();
        if max_steps == 0 {
            return out;
        }
        let (Some(subject), broader) = (self.iri_id(vocab::SUBJECT), self.iri_id(vocab::BROADER)) else {
            return out;
        };
        let mut queue = VecDeque::new();
        for cat in self.objects(entity, subject) {
            if let std::collections::btree_map::Entry::Vacant(e) = out.entry(cat) {
                e.insert(vec![(entity, subject, cat)]);
                queue.push_back((cat, 1usize));
            }
        }
        let Some(broader) = broader else {
            return out;
        };
        while let Some((cat, depth)) = queue.pop_front() {
            if depth >= max_steps {
                continue;
            }
            let base = out[&cat].clone();
            for parent in self.objects(cat, broader) {
                if out.contains_key(&parent) {
                    continue;
                }
                let mut path = base.clone();
                path.push((cat, broader, parent));
                out.insert(parent, path);
                queue.push_back((parent, depth + 1));
            }
        }
        out
    }

    /// True iff a WikiLink edge joins `a` and `b` in either direction.
    pub fn wikilink_direct(&self, a: &Term, b: &Term) -> bool {
        match (self.term_id(a), self.term_id(b)) {
            (Some(a), Some(b)) => self.wikilink_edge(a, b).is_some(),
            _ => false,
        }
    }

    /// The WikiLink triple joining `a` and `b`, preferring `a -> b`.
    pub fn wikilink_edge(&self, a: TermId, b: TermId) -> Option<IdTriple> {
        let link = self.iri_id(vocab::WIKI_LINK)?;
        [(a, link, b), (b, link, a)].into_iter().find(|t| self.contains_ids(*t))
    }

    /// Entities WikiLink-adjacent to `a` in either direction.
    pub fn wikilink_neighbors(&self, a: TermId) -> BTreeSet<TermId> {
        let Some(link) = self.iri_id(vocab::WIKI_LINK) else {
            return BTreeSet::new();
        };
        self.objects(a, link).chain(self.subjects(link, a)).collect()
    }

    /// Distinct intermediates adjacent to both `a` and `b`, excluding `a` and `b`.
    pub fn two_step_intermediates(&self, a: TermId, b: TermId) -> Vec<TermId> {
        let na = self.wikilink_neighbors(a);
        let nb = self.wikilink_neighbors(b);
        na.intersection(&nb).copied().filter(|x| *x != a && *x != b).collect()
    }

    /// Number of distinct entities `x` with a WikiLink (either direction) to
    /// both `a` and `b`.
    pub fn two_step_path_count(&self, a: &Term, b: &Term) -> usize {
        match (self.term_id(a), self.term_id(b)) {
            (Some(a), Some(b)) => self.two_step_intermediates(a, b).len(),
            _ => 0,
        }
    }
}
