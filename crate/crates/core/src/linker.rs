//! Slot phrases to entities: object slots to detected objects, concept slots
//! to KB entities.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::image::{DetectedObject, ImageHandle};
use crate::kb::{lookup_by_label, resolve_redirect};
use crate::question::{lemma_phrase, HeadClass, Location, SizeQualifier, SlotKind, SlotPhrase};
use crate::store::{Graph, Term};
use crate::vocab::{self, TaxonomyRank};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinkError {
    #[error("no such object found: {0:?}")]
    UnresolvedObject(String),
    #[error("concept not in knowledge base: {0:?}")]
    UnresolvedConcept(String),
    #[error("not a taxonomy rank: {0:?}")]
    NotTaxonomy(String),
}

/// How a label lookup succeeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchMode {
    Exact,
    CaseInsensitive,
    Normalized,
    Lemma,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConceptResolution {
    pub entity: Term,
    pub phrase: String,
    pub mode: MatchMode,
    /// Redirects followed from the matched entity, ending at `entity`.
    pub redirects: Vec<Term>,
    /// Set when several entities survived and one was preferred.
    pub note: Option<String>,
}

fn label_candidates(graph: &Graph, phrase: &str) -> Option<(BTreeSet<Term>, MatchMode)> {
    let phrase = phrase.trim();
    if phrase.is_empty() {
        return None;
    }
    let exact = lookup_by_label(graph, phrase, false);
    if !exact.is_empty() {
        return Some((exact, MatchMode::Exact));
    }
    let ci = lookup_by_label(graph, phrase, true);
    if !ci.is_empty() {
        return Some((ci, MatchMode::CaseInsensitive));
    }
    let spaced = phrase.replace('_', " ").split_whitespace().collect::<Vec<_>>().join(" ");
    for variant in [spaced.clone(), spaced.replace(' ', "_")] {
        let found = lookup_by_label(graph, &variant, true);
        if !found.is_empty() {
            return Some((found, MatchMode::Normalized));
        }
    }
    let lemma = lemma_phrase(&spaced);
    if lemma != spaced.to_lowercase() {
        let found = lookup_by_label(graph, &lemma, true);
        if !found.is_empty() {
            return Some((found, MatchMode::Lemma));
        }
    }
    None
}

/// Finds the KB entity a phrase names: label match (exact, then ignoring
/// case, then with `_`/space folded, then by lemma), redirects followed, and
/// non-category entities preferred over categories.
pub fn resolve_concept_phrase(graph: &Graph, phrase: &str) -> Option<ConceptResolution> {
    let (found, mode) = label_candidates(graph, phrase)?;
    let resolved: Vec<(Term, Vec<Term>)> = found
        .iter()
        .map(|t| {
            let r = resolve_redirect(graph, t);
            (r.target, r.chain)
        })
        .collect();
    let distinct: BTreeSet<&Term> = resolved.iter().map(|(t, _)| t).collect();
    let is_cat = |t: &Term| t.as_iri().is_some_and(vocab::is_category);
    let best = distinct.iter().min_by_key(|t| (is_cat(t), t.lexical().to_string())).copied().cloned()?;
    let redirects = resolved.iter().find(|(t, _)| *t == best).map(|(_, c)| c.clone()).unwrap_or_default();
    let note = (distinct.len() > 1)
        .then(|| format!("{} entities match {phrase:?}; chose {}", distinct.len(), best.local_name()));
    Some(ConceptResolution { entity: best, phrase: phrase.trim().to_string(), mode, redirects, note })
}

/// Resolves a concept slot, trying the written phrase before its lemma form.
/// A sentence-final period may have been an abbreviation's ("Relig."), so
/// that form is tried too.
/// A plural that only names a category ("animals") gives way to an entity
/// found for the lemma form ("animal").
pub fn resolve_concept_slot(graph: &Graph, slot: &SlotPhrase) -> Result<ConceptResolution, LinkError> {
    let is_cat = |r: &ConceptResolution| r.entity.as_iri().is_some_and(vocab::is_category);
    let mut first = None;
    for phrase in [slot.text.clone(), format!("{}.", slot.text), slot.lemmas.clone()] {
        if let Some(r) = resolve_concept_phrase(graph, &phrase) {
            if !is_cat(&r) {
                return Ok(r);
            }
            first.get_or_insert(r);
        }
    }
    first.ok_or_else(|| LinkError::UnresolvedConcept(slot.text.clone()))
}

pub fn resolve_taxonomy_slot(slot: &SlotPhrase) -> Result<TaxonomyRank, LinkError> {
    if slot.kind != SlotKind::Taxonomy {
        return Err(LinkError::NotTaxonomy(slot.text.clone()));
    }
    slot.lemmas.parse().map_err(|_| LinkError::NotTaxonomy(slot.text.clone()))
}

/// A detected object and its graph entity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectRef {
    pub id: u32,
    pub term: Term,
    pub label: String,
    pub supercategory: String,
    pub area: u64,
}

impl ObjectRef {
    fn new(handle: &ImageHandle, o: &DetectedObject) -> Self {
        ObjectRef {
            id: o.id,
            term: handle.object_term(o.id).cloned().expect("handle covers every object"),
            label: o.label.to_lowercase(),
            supercategory: o.supercategory.to_lowercase(),
            area: o.area(),
        }
    }

    /// `image#id` form used in answers.
    pub fn reference(&self, image_id: &str) -> String {
        format!("{image_id}#{}", self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectResolution {
    pub objects: Vec<ObjectRef>,
    /// What each filter did, in order.
    pub notes: Vec<String>,
}

impl ObjectResolution {
    /// One referent: the largest object, lowest id on ties.
    pub fn unique(&self) -> (&ObjectRef, Option<String>) {
        let best =
            self.objects.iter().min_by_key(|o| (std::cmp::Reverse(o.area), o.id)).expect("resolution is never empty");
        let note = (self.objects.len() > 1)
            .then(|| format!("{} candidates; chose the largest (object {})", self.objects.len(), best.id));
        (best, note)
    }
}

fn third(pos: f64, extent: u32) -> u8 {
    let f = pos / extent as f64;
    if f < 1.0 / 3.0 {
        0
    } else if f < 2.0 / 3.0 {
        1
    } else {
        2
    }
}

/// Horizontal and vertical third (0, 1, 2) of an object's bbox centre.
pub fn thirds(o: &DetectedObject, width: u32, height: u32) -> (u8, u8) {
    let (cx, cy) = o.center();
    (third(cx, width), third(cy, height))
}

fn in_location(loc: Location, (h, v): (u8, u8)) -> bool {
    match loc {
        Location::Left => h == 0,
        Location::Right => h == 2,
        Location::Top => v == 0,
        Location::Bottom => v == 2,
        Location::Center => h == 1 && v == 1,
    }
}

/// Sort key that puts the most extreme object for a location first.
fn extremity(loc: Location, o: &DetectedObject, width: u32, height: u32) -> f64 {
    let (cx, cy) = o.center();
    match loc {
        Location::Left => cx,
        Location::Right => -cx,
        Location::Top => cy,
        Location::Bottom => -cy,
        Location::Center => (cx - width as f64 / 2.0).hypot(cy - height as f64 / 2.0),
    }
}

fn head_matches(o: &DetectedObject, head: &HeadClass, head_lemmas: &str, classes_sup: Option<&str>) -> bool {
    match head {
        HeadClass::Any => true,
        HeadClass::Class(c) => o.label.eq_ignore_ascii_case(c) || lemma_phrase(&o.label) == lemma_phrase(c),
        HeadClass::Superclass(s) => classes_sup.unwrap_or(&o.supercategory).eq_ignore_ascii_case(s),
        HeadClass::Unknown => lemma_phrase(&o.label) == head_lemmas,
    }
}

/// Filters an image's objects by the slot's head noun, then location, then
/// size.
pub fn resolve_object_slot(
    handle: &ImageHandle,
    slot: &SlotPhrase,
    classes: &crate::image::ClassRegistry,
) -> Result<ObjectResolution, LinkError> {
    let ann = &handle.annotation;
    let mut notes = Vec::new();
    let mut cands: Vec<&DetectedObject> = ann
        .objects
        .iter()
        .filter(|o| head_matches(o, &slot.head_class, &slot.head, classes.supercategory(&o.label)))
        .collect();
    if cands.is_empty() {
        return Err(LinkError::UnresolvedObject(slot.text.clone()));
    }
    notes.push(format!("{} object(s) named {:?}", cands.len(), slot.head_text));
    if let Some(loc) = slot.location {
        let inside: Vec<_> =
            cands.iter().copied().filter(|o| in_location(loc, thirds(o, ann.width, ann.height))).collect();
        if inside.is_empty() {
            let extreme = *cands
                .iter()
                .min_by(|a, b| {
                    extremity(loc, a, ann.width, ann.height)
                        .total_cmp(&extremity(loc, b, ann.width, ann.height))
                        .then(a.id.cmp(&b.id))
                })
                .expect("non-empty");
            notes.push(format!("none in the {loc} third; took the {loc}most (object {})", extreme.id));
            cands = vec![extreme];
        } else {
            notes.push(format!("{} in the {loc} third", inside.len()));
            cands = inside;
        }
    }
    if let Some(size) = slot.size {
        let target = match size {
            SizeQualifier::Large => cands.iter().map(|o| o.area()).max(),
            SizeQualifier::Small => cands.iter().map(|o| o.area()).min(),
        }
        .expect("non-empty");
        cands.retain(|o| o.area() == target);
        let word = match size {
            SizeQualifier::Large => "largest",
            SizeQualifier::Small => "smallest",
        };
        notes.push(format!("kept the {word} by area ({target})"));
    }
    Ok(ObjectResolution { objects: cands.into_iter().map(|o| ObjectRef::new(handle, o)).collect(), notes })
}

/// KB entity linked to an object's class node, if any.
pub fn object_entity(graph: &Graph, object: &Term) -> Option<Term> {
    let (o, name, same) = (graph.term_id(object)?, graph.iri_id(vocab::NAME)?, graph.iri_id(vocab::SAME_CONCEPT)?);
    graph
        .objects(o, name)
        .filter(|c| graph.term(*c).is_iri())
        .flat_map(|c| graph.objects(c, same))
        .map(|e| graph.term(e).clone())
        .min()
}

/// KB entity linked to a category node (object class, attribute or scene).
pub fn category_entity(graph: &Graph, node: &Term) -> Option<Term> {
    let (n, same) = (graph.term_id(node)?, graph.iri_id(vocab::SAME_CONCEPT)?);
    graph.objects(n, same).map(|e| graph.term(e).clone()).min()
}

/// An entity-valued slot resolved either through an object in the image or
/// directly in the KB.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntityResolution {
    pub entity: Term,
    pub object: Option<ObjectRef>,
    pub notes: Vec<String>,
}

/// Resolves slots that may name either a visible object ("the right animal")
/// or a KB concept ("zebra"). Qualified or generic phrases go through the
/// image; bare names try the KB first, then the image.
pub fn resolve_entity_slot(
    graph: &Graph,
    handle: Option<&ImageHandle>,
    slot: &SlotPhrase,
    classes: &crate::image::ClassRegistry,
) -> Result<EntityResolution, LinkError> {
    let via_object = |handle: &ImageHandle| -> Result<EntityResolution, LinkError> {
        let res = resolve_object_slot(handle, slot, classes)?;
        let (obj, note) = res.unique();
        let mut notes = res.notes.clone();
        notes.extend(note);
        let entity = object_entity(graph, &obj.term).ok_or_else(|| LinkError::UnresolvedConcept(obj.label.clone()))?;
        Ok(EntityResolution { entity, object: Some(obj.clone()), notes })
    };
    let generic = slot.has_qualifiers() || matches!(slot.head_class, HeadClass::Superclass(_) | HeadClass::Any);
    if let (true, Some(h)) = (generic, handle) {
        return via_object(h);
    }
    match resolve_concept_slot(graph, slot) {
        Ok(c) => Ok(EntityResolution { entity: c.entity, object: None, notes: c.note.into_iter().collect() }),
        Err(e) => match handle {
            Some(h) => via_object(h).map_err(|oe| if slot.kind.is_visual() { oe } else { e }),
            None => Err(e),
        },
    }
}
