//! One plan per template.

use std::collections::{BTreeMap, BTreeSet};

use super::trace::{describe_chain, node_name};
use super::{AnswerError, Ctx, Engine, Payload, ReasonTrace, StepKind};
use crate::image::{category_name, ImageHandle};
use crate::linker::{
    category_entity, object_entity, resolve_concept_slot, resolve_entity_slot, resolve_object_slot,
    resolve_taxonomy_slot, ObjectRef,
};
use crate::question::{lemma_phrase, ParsedQuestion, SlotPhrase, TemplateId};
use crate::store::{Term, Triple};
use crate::vocab::{self, TaxonomyRank};

type Outcome = (Payload, String, ReasonTrace);

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

fn list_text(names: &[String], empty: &str) -> String {
    if names.is_empty() {
        empty.to_string()
    } else {
        names.join(", ")
    }
}

fn slot<'q>(q: &'q ParsedQuestion, name: &str) -> &'q SlotPhrase {
    q.slot(name).unwrap_or_else(|| panic!("{} is missing slot {name}", q.template))
}

/// An object that passed (or failed) an is-a check, with its evidence.
struct Checked {
    object: ObjectRef,
    pass: bool,
    reflexive: bool,
    link: Vec<Triple>,
    path: Vec<Triple>,
}

/// A visual concept of an image that is linked to the KB.
struct VisualConcept {
    name: String,
    entity: Term,
    link: Vec<Triple>,
}

impl<'g> Engine<'g> {
    pub(crate) fn dispatch(
        &self,
        ctx: &mut Ctx,
        q: &ParsedQuestion,
        images: &[&ImageHandle],
    ) -> Result<Outcome, AnswerError> {
        use TemplateId::*;
        let img = images[0];
        match q.template {
            IsThereAny => self.is_there_any(ctx, img, slot(q, "concept")),
            HowMany => self.how_many(ctx, img, slot(q, "concept")),
            IsTheA => self.is_the_a(ctx, img, slot(q, "obj"), slot(q, "concept")),
            AreAllThe => self.are_all_the(ctx, img, slot(q, "obj"), slot(q, "concept")),
            LargestObj => {
                let smallest = q.flag("extreme") == Some("smallest");
                self.largest_obj(ctx, img, slot(q, "concept"), smallest)
            }
            IsImgRelate => self.is_img_relate(ctx, img, slot(q, "concept")),
            MostRelObj => self.most_rel_obj(ctx, img, slot(q, "obj"), slot(q, "concept")),
            MostRelatedImage => self.most_related_image(ctx, images, slot(q, "concept")),
            TwoImageCommon => self.two_image_common(ctx, images[0], images[1]),
            WhatIs => self.what_is(ctx, img, slot(q, "obj")),
            ColorOf => self.color_of(ctx, img, slot(q, "obj")),
            IsSameThing => self.is_same_thing(ctx, img, slot(q, "obj1"), slot(q, "obj2")),
            ListObj => self.list_obj(ctx, img),
            ImgScene => self.img_scene(ctx, img),
            ObjAction => self.obj_action(ctx, img, slot(q, "obj")),
            SportEquip => self.sport_equip(ctx, img),
            CommProp => self.comm_prop(ctx, img, slot(q, "obj1"), slot(q, "obj2")),
            LocIntro => self.loc_intro(ctx, img, slot(q, "obj")),
            YearIntro => self.year_intro(ctx, img, slot(q, "obj")),
            FirstIntro => self.first_intro(ctx, img, slot(q, "obj1"), slot(q, "obj2")),
            ListSameYear => self.list_same_year(ctx, img, slot(q, "obj")),
            FoodIngredient => self.food_ingredient(ctx, img, slot(q, "food")),
            AnimalClass => self.animal_class(ctx, img, slot(q, "animal"), slot(q, "taxonomy")),
            AnimalRelative => self.animal_relative(ctx, img, slot(q, "animal")),
            AnimalSame => self.animal_same(ctx, img, slot(q, "animal1"), slot(q, "animal2"), slot(q, "taxonomy")),
        }
    }

    // ----- linking helpers -----

    fn concept(&self, ctx: &mut Ctx, s: &SlotPhrase) -> Result<Term, AnswerError> {
        let c = resolve_concept_slot(self.graph, s)?;
        ctx.notes.extend(c.note);
        if c.entity.as_iri().is_some_and(vocab::is_category) {
            ctx.notes.push(format!("{:?} resolves only to a category; checking against it directly", s.text));
        }
        Ok(c.entity)
    }

    fn candidates(&self, ctx: &mut Ctx, img: &ImageHandle, s: &SlotPhrase) -> Result<Vec<ObjectRef>, AnswerError> {
        let r = resolve_object_slot(img, s, self.classes)?;
        ctx.notes.extend(r.notes.iter().cloned());
        Ok(r.objects)
    }

    fn unique(&self, ctx: &mut Ctx, img: &ImageHandle, s: &SlotPhrase) -> Result<ObjectRef, AnswerError> {
        let r = resolve_object_slot(img, s, self.classes)?;
        ctx.notes.extend(r.notes.iter().cloned());
        let (o, note) = r.unique();
        ctx.notes.extend(note);
        Ok(o.clone())
    }

    /// Entity for a slot that may name a visible object or a KB concept,
    /// plus the visual evidence when it came through the image.
    fn entity(
        &self,
        ctx: &mut Ctx,
        img: &ImageHandle,
        s: &SlotPhrase,
        trace: &mut ReasonTrace,
    ) -> Result<Term, AnswerError> {
        let e = resolve_entity_slot(self.graph, Some(img), s, self.classes)?;
        ctx.notes.extend(e.notes.iter().cloned());
        if let Some(o) = &e.object {
            let (_, link) = self.object_link(img, &o.term);
            trace.push(
                StepKind::VisualEvidence,
                format!(
                    "\"{}\" is the {} {} linked to {}",
                    s.text,
                    o.label,
                    o.reference(img.id()),
                    self.name(&e.entity)
                ),
                link,
            );
        }
        Ok(e.entity)
    }

    /// `Img contain Obj`, `Obj name ObjCat`, `ObjCat same-concept KB` triples.
    fn object_link(&self, img: &ImageHandle, obj: &Term) -> (Option<Term>, Vec<Triple>) {
        let mut triples = vec![Triple::new(img.image.clone(), Term::iri(vocab::CONTAIN), obj.clone())];
        let entity = object_entity(self.graph, obj);
        let cat = self
            .graph
            .term_id(obj)
            .zip(self.graph.iri_id(vocab::NAME))
            .and_then(|(o, n)| self.graph.objects(o, n).map(|c| self.graph.term(c).clone()).find(Term::is_iri));
        if let Some(cat) = cat {
            triples.push(Triple::new(obj.clone(), Term::iri(vocab::NAME), cat.clone()));
            if let Some(e) = &entity {
                triples.push(Triple::new(cat, Term::iri(vocab::SAME_CONCEPT), e.clone()));
            }
        }
        (entity, triples)
    }

    fn check_objects(
        &self,
        ctx: &mut Ctx,
        img: &ImageHandle,
        objects: &[ObjectRef],
        concept: &Term,
    ) -> Result<Vec<Checked>, AnswerError> {
        let concept_name = lemma_phrase(&self.name(concept));
        let mut out = Vec::with_capacity(objects.len());
        for o in objects {
            let (entity, link) = self.object_link(img, &o.term);
            let (pass, reflexive, path) = match entity {
                Some(e) => {
                    let h = self.hyponymy(ctx, &e, concept)?;
                    (h.pass, h.reflexive, h.path)
                }
                None if lemma_phrase(&o.label) == concept_name => (true, true, Vec::new()),
                None => (false, false, Vec::new()),
            };
            out.push(Checked { object: o.clone(), pass, reflexive, link, path });
        }
        Ok(out)
    }

    fn trace_checked(&self, img: &ImageHandle, c: &Checked, concept: &Term, trace: &mut ReasonTrace) {
        let who = format!("{} {}", c.object.label, c.object.reference(img.id()));
        if c.reflexive {
            trace.push(StepKind::VisualEvidence, format!("{who} is named {}", self.name(concept)), c.link.clone());
        } else if c.pass {
            trace.push(StepKind::VisualEvidence, format!("{who} is detected in the image"), c.link.clone());
            trace.push(StepKind::KbEdge, describe_chain(self.graph, &c.path), c.path.clone());
        }
    }

    fn all_objects(&self, img: &ImageHandle) -> Vec<ObjectRef> {
        let everything = SlotPhrase {
            kind: crate::question::SlotKind::Obj,
            text: "object".into(),
            lemmas: "object".into(),
            size: None,
            location: None,
            head: "object".into(),
            head_text: "object".into(),
            head_class: crate::question::HeadClass::Any,
        };
        resolve_object_slot(img, &everything, self.classes).map(|r| r.objects).unwrap_or_default()
    }

    // ----- hyponymy templates -----

    fn count_passing(
        &self,
        ctx: &mut Ctx,
        img: &ImageHandle,
        s: &SlotPhrase,
    ) -> Result<(Term, Vec<Checked>), AnswerError> {
        let concept = self.concept(ctx, s)?;
        let objects = self.all_objects(img);
        let checked = self.check_objects(ctx, img, &objects, &concept)?;
        Ok((concept, checked))
    }

    fn is_there_any(&self, ctx: &mut Ctx, img: &ImageHandle, s: &SlotPhrase) -> Result<Outcome, AnswerError> {
        let (concept, checked) = self.count_passing(ctx, img, s)?;
        let mut trace = ReasonTrace::default();
        let passing: Vec<&Checked> = checked.iter().filter(|c| c.pass).collect();
        for c in &passing {
            self.trace_checked(img, c, &concept, &mut trace);
        }
        trace.push(
            StepKind::Aggregation,
            format!("{} of {} detected objects are {}", passing.len(), checked.len(), self.name(&concept)),
            Vec::new(),
        );
        let any = !passing.is_empty();
        Ok((Payload::Boolean(any), yes_no(any), trace))
    }

    fn how_many(&self, ctx: &mut Ctx, img: &ImageHandle, s: &SlotPhrase) -> Result<Outcome, AnswerError> {
        let (concept, checked) = self.count_passing(ctx, img, s)?;
        let passing: Vec<&Checked> = checked.iter().filter(|c| c.pass).collect();
        let mut trace = ReasonTrace::default();
        // Counting objects by their own name needs no reason.
        if passing.is_empty() || passing.iter().any(|c| !c.reflexive) {
            for c in &passing {
                self.trace_checked(img, c, &concept, &mut trace);
            }
            trace.push(
                StepKind::Aggregation,
                format!("{} of {} detected objects are {}", passing.len(), checked.len(), self.name(&concept)),
                Vec::new(),
            );
        }
        Ok((Payload::Count(passing.len()), passing.len().to_string(), trace))
    }

    fn is_the_a(
        &self,
        ctx: &mut Ctx,
        img: &ImageHandle,
        o: &SlotPhrase,
        s: &SlotPhrase,
    ) -> Result<Outcome, AnswerError> {
        let obj = self.unique(ctx, img, o)?;
        let concept = self.concept(ctx, s)?;
        let checked = self.check_objects(ctx, img, std::slice::from_ref(&obj), &concept)?;
        let c = &checked[0];
        let mut trace = ReasonTrace::default();
        self.trace_checked(img, c, &concept, &mut trace);
        if !c.pass {
            trace.push(
                StepKind::Aggregation,
                format!(
                    "no category chain of at most {} steps leads from the {} to {}",
                    self.config.depth,
                    obj.label,
                    self.name(&concept)
                ),
                c.link.clone(),
            );
        }
        Ok((Payload::Boolean(c.pass), yes_no(c.pass), trace))
    }

    fn are_all_the(
        &self,
        ctx: &mut Ctx,
        img: &ImageHandle,
        o: &SlotPhrase,
        s: &SlotPhrase,
    ) -> Result<Outcome, AnswerError> {
        let objects = self.candidates(ctx, img, o)?;
        let concept = self.concept(ctx, s)?;
        let checked = self.check_objects(ctx, img, &objects, &concept)?;
        let mut trace = ReasonTrace::default();
        for c in &checked {
            self.trace_checked(img, c, &concept, &mut trace);
        }
        let passing = checked.iter().filter(|c| c.pass).count();
        trace.push(
            StepKind::Aggregation,
            format!("{passing} of {} {} are {}", checked.len(), o.head_text, self.name(&concept)),
            Vec::new(),
        );
        let all = passing == checked.len();
        Ok((Payload::Boolean(all), yes_no(all), trace))
    }

    fn largest_obj(
        &self,
        ctx: &mut Ctx,
        img: &ImageHandle,
        s: &SlotPhrase,
        smallest: bool,
    ) -> Result<Outcome, AnswerError> {
        let (concept, checked) = self.count_passing(ctx, img, s)?;
        let pick = checked.iter().filter(|c| c.pass).min_by_key(|c| {
            let area = if smallest { c.object.area as i128 } else { -(c.object.area as i128) };
            (area, c.object.id)
        });
        let Some(best) = pick else { return Err(AnswerError::NoneFound) };
        let mut trace = ReasonTrace::default();
        self.trace_checked(img, best, &concept, &mut trace);
        let passing = checked.iter().filter(|c| c.pass).count();
        trace.push(
            StepKind::Aggregation,
            format!(
                "the {} of {passing} {} by area is the {} ({} px)",
                if smallest { "smallest" } else { "largest" },
                self.name(&concept),
                best.object.label,
                best.object.area
            ),
            Vec::new(),
        );
        let r = best.object.reference(img.id());
        Ok((Payload::EntityRef(r.clone()), format!("the {} ({r})", best.object.label), trace))
    }

    // ----- correlation templates -----

    fn visual_concepts(&self, img: &ImageHandle) -> Vec<VisualConcept> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for node in &img.categories {
            let (Some(entity), Some(name)) = (category_entity(self.graph, node), category_name(self.graph, node))
            else {
                continue;
            };
            if seen.insert(entity.clone()) {
                let link = vec![Triple::new(node.clone(), Term::iri(vocab::SAME_CONCEPT), entity.clone())];
                out.push(VisualConcept { name, entity, link });
            }
        }
        out
    }

    fn score_line(&self, name: &str, concept: &Term, c: &super::Correlation) -> String {
        let s = &c.score;
        let mut line = format!("score({name}, {}) = {}*{} + {} = {}", self.name(concept), s.alpha, s.f1, s.f2, s.total);
        if !c.intermediates.is_empty() {
            let names: Vec<String> = c.intermediates.iter().take(5).map(|t| node_name(self.graph, t)).collect();
            line.push_str(&format!(
                " (shared links: {}{})",
                names.join(", "),
                if c.intermediates.len() > 5 { ", ..." } else { "" }
            ));
        }
        line
    }

    fn is_img_relate(&self, ctx: &mut Ctx, img: &ImageHandle, s: &SlotPhrase) -> Result<Outcome, AnswerError> {
        let concept = self.concept(ctx, s)?;
        let mut best: Option<(VisualConcept, super::Correlation)> = None;
        for vc in self.visual_concepts(img) {
            let c = self.correlation(ctx, &vc.entity, &concept)?;
            let better = best.as_ref().is_none_or(|(_, b)| c.score.total > b.score.total);
            if better {
                best = Some((vc, c));
            }
        }
        let mut trace = ReasonTrace::default();
        let related = match &best {
            Some((vc, c)) => {
                let related = self.is_related(&c.score);
                trace.push(
                    StepKind::VisualEvidence,
                    format!("the image shows {} ({})", vc.name, self.name(&vc.entity)),
                    vc.link.clone(),
                );
                if !c.direct.is_empty() {
                    trace.push(StepKind::KbEdge, describe_chain(self.graph, &c.direct), c.direct.clone());
                }
                trace.push(
                    StepKind::Score,
                    format!(
                        "{}; highest over the image, {} {}",
                        self.score_line(&vc.name, &concept, c),
                        if related { "above" } else { "not above" },
                        self.config.threshold
                    ),
                    Vec::new(),
                );
                related
            }
            None => {
                trace.push(
                    StepKind::Aggregation,
                    "no visual concept of the image is in the knowledge base",
                    Vec::new(),
                );
                false
            }
        };
        Ok((Payload::Boolean(related), yes_no(related), trace))
    }

    fn most_rel_obj(
        &self,
        ctx: &mut Ctx,
        img: &ImageHandle,
        o: &SlotPhrase,
        s: &SlotPhrase,
    ) -> Result<Outcome, AnswerError> {
        let objects = self.candidates(ctx, img, o)?;
        let concept = self.concept(ctx, s)?;
        let mut trace = ReasonTrace::default();
        let mut scored = Vec::new();
        for obj in &objects {
            let (entity, link) = self.object_link(img, &obj.term);
            let total = match entity {
                Some(e) => {
                    let c = self.correlation(ctx, &e, &concept)?;
                    if !c.direct.is_empty() {
                        trace.push(StepKind::KbEdge, describe_chain(self.graph, &c.direct), c.direct.clone());
                    }
                    trace.push(StepKind::Score, self.score_line(&obj.label, &concept, &c), link);
                    c.score.total
                }
                None => {
                    trace.push(
                        StepKind::Score,
                        format!("{} is not linked to the knowledge base; score 0", obj.label),
                        link,
                    );
                    0.0
                }
            };
            scored.push((obj, total));
        }
        let (best, total) = scored
            .iter()
            .max_by(|(a, x), (b, y)| x.total_cmp(y).then(a.area.cmp(&b.area)).then(b.id.cmp(&a.id)))
            .expect("resolution is never empty");
        let r = best.reference(img.id());
        trace.push(
            StepKind::Aggregation,
            format!("the {} {r} scores highest ({total}) of {} candidates", best.label, scored.len()),
            Vec::new(),
        );
        Ok((Payload::EntityRef(r.clone()), format!("the {} ({r})", best.label), trace))
    }

    fn most_related_image(
        &self,
        ctx: &mut Ctx,
        images: &[&ImageHandle],
        s: &SlotPhrase,
    ) -> Result<Outcome, AnswerError> {
        let concept = self.concept(ctx, s)?;
        let mut trace = ReasonTrace::default();
        let mut best: Option<(&ImageHandle, f64)> = None;
        for img in images {
            let mut totals = Vec::new();
            for vc in self.visual_concepts(img) {
                let c = self.correlation(ctx, &vc.entity, &concept)?;
                totals.push((vc, c));
            }
            totals.sort_by(|(a, x), (b, y)| y.score.total.total_cmp(&x.score.total).then(a.name.cmp(&b.name)));
            let mean = super::top3_mean(&totals.iter().map(|(_, c)| c.score.total).collect::<Vec<_>>());
            let top: Vec<String> =
                totals.iter().take(3).map(|(vc, c)| format!("{} ({})", vc.name, c.score.total)).collect();
            let mut witnesses = Vec::new();
            for (vc, c) in totals.iter().take(3) {
                witnesses.extend(vc.link.iter().cloned());
                witnesses.extend(c.direct.iter().cloned());
            }
            trace.push(
                StepKind::Score,
                format!(
                    "image {}: top concepts {}; mean {:.2}",
                    img.id(),
                    if top.is_empty() { "none".to_string() } else { top.join(", ") },
                    mean
                ),
                witnesses,
            );
            if best.is_none_or(|(_, m)| mean > m) {
                best = Some((img, mean));
            }
        }
        let (img, mean) = best.expect("at least two images");
        trace.push(
            StepKind::Aggregation,
            format!("image {} is most related to {} (mean {:.2})", img.id(), self.name(&concept), mean),
            Vec::new(),
        );
        Ok((Payload::ImageRef(img.id().to_string()), img.id().to_string(), trace))
    }

    // ----- category-sharing templates -----

    /// Transitive categories of a set of entities, each with one witness chain.
    fn closure(&self, ctx: &mut Ctx, entities: &[Term]) -> Result<BTreeMap<Term, Vec<Triple>>, AnswerError> {
        if entities.is_empty() {
            return Ok(BTreeMap::new());
        }
        let path = self.category_path();
        let branches: Vec<String> = entities.iter().map(|e| format!("{} {path} ?cat", self.term(e))).collect();
        let ex = self.run(ctx, format!("SELECT DISTINCT ?cat WHERE {{\n{}}}", Self::union_text(&branches)))?;
        Ok(ex
            .rows
            .into_iter()
            .map(|r| (r.values[0].clone(), r.witnesses.into_iter().flat_map(|w| w.triples).collect()))
            .collect())
    }

    fn two_image_common(&self, ctx: &mut Ctx, a: &ImageHandle, b: &ImageHandle) -> Result<Outcome, AnswerError> {
        let mut trace = ReasonTrace::default();
        let mut closures = Vec::new();
        for img in [a, b] {
            let vcs = self.visual_concepts(img);
            let names: Vec<&str> = vcs.iter().map(|v| v.name.as_str()).collect();
            trace.push(
                StepKind::VisualEvidence,
                format!(
                    "image {} shows {}",
                    img.id(),
                    if names.is_empty() { "nothing linked".into() } else { names.join(", ") }
                ),
                vcs.iter().flat_map(|v| v.link.clone()).collect(),
            );
            let entities: Vec<Term> = vcs.into_iter().map(|v| v.entity).collect();
            closures.push(self.closure(ctx, &entities)?);
        }
        let mut names = BTreeSet::new();
        for (cat, wa) in &closures[0] {
            if let Some(wb) = closures[1].get(cat) {
                let mut w = wa.clone();
                w.extend(wb.iter().cloned());
                trace.push(
                    StepKind::KbEdge,
                    format!("{} | {}", describe_chain(self.graph, wa), describe_chain(self.graph, wb)),
                    w,
                );
                names.insert(self.name(cat));
            }
        }
        let names: Vec<String> = names.into_iter().collect();
        if names.is_empty() {
            trace.push(StepKind::Aggregation, "the two images share no category", Vec::new());
        }
        let text = list_text(&names, "nothing in common");
        Ok((Payload::NameList(names), text, trace))
    }

    fn comm_prop(
        &self,
        ctx: &mut Ctx,
        img: &ImageHandle,
        a: &SlotPhrase,
        b: &SlotPhrase,
    ) -> Result<Outcome, AnswerError> {
        let mut trace = ReasonTrace::default();
        let ea = self.entity(ctx, img, a, &mut trace)?;
        let eb = self.entity(ctx, img, b, &mut trace)?;
        let path = self.category_path();
        let ex = self.run(
            ctx,
            format!(
                "SELECT DISTINCT ?cat WHERE {{\n  {} {path} ?cat .\n  {} {path} ?cat .\n}}",
                self.term(&ea),
                self.term(&eb)
            ),
        )?;
        let mut names = BTreeSet::new();
        for row in &ex.rows {
            let w: Vec<Triple> = row.witnesses.iter().flat_map(|w| w.triples.clone()).collect();
            trace.push(StepKind::KbEdge, describe_chain(self.graph, &w), w);
            names.insert(self.name(&row.values[0]));
        }
        let names: Vec<String> = names.into_iter().collect();
        if names.is_empty() {
            trace.push(
                StepKind::Aggregation,
                format!(
                    "{} and {} share no category within {} steps",
                    self.name(&ea),
                    self.name(&eb),
                    self.config.depth
                ),
                Vec::new(),
            );
        }
        let text = list_text(&names, "no common properties");
        Ok((Payload::NameList(names), text, trace))
    }

    // ----- visual templates -----

    fn what_is(&self, ctx: &mut Ctx, img: &ImageHandle, o: &SlotPhrase) -> Result<Outcome, AnswerError> {
        let obj = self.unique(ctx, img, o)?;
        let (entity, _) = self.object_link(img, &obj.term);
        let mut text = None;
        if let Some(e) = entity {
            let ex = self.run(ctx, format!("SELECT ?desc WHERE {{\n  {} comment ?desc .\n}}", self.term(&e)))?;
            let descs: Vec<&Term> = ex.result.column("desc");
            text =
                descs.iter().filter(|t| matches!(t.lang(), None | Some("en"))).map(|t| t.lexical().to_string()).min();
        }
        let text = text.unwrap_or_else(|| format!("a {}", obj.label));
        Ok((Payload::Text(text.clone()), text, ReasonTrace::default()))
    }

    fn color_of(&self, ctx: &mut Ctx, img: &ImageHandle, o: &SlotPhrase) -> Result<Outcome, AnswerError> {
        let obj = self.unique(ctx, img, o)?;
        let ex = self.run(
            ctx,
            format!("SELECT DISTINCT ?obj_color WHERE {{\n  {} color ?obj_color .\n}}", self.term(&obj.term)),
        )?;
        let color =
            ex.result.column("obj_color").first().map(|t| t.lexical().to_string()).ok_or(AnswerError::ColorUnknown)?;
        Ok((Payload::Text(color.clone()), color, ReasonTrace::default()))
    }

    fn is_same_thing(
        &self,
        ctx: &mut Ctx,
        img: &ImageHandle,
        a: &SlotPhrase,
        b: &SlotPhrase,
    ) -> Result<Outcome, AnswerError> {
        let oa = self.unique(ctx, img, a)?;
        let ob = self.unique(ctx, img, b)?;
        let ex = self.run(
            ctx,
            format!("ASK {{\n  {} name ?obj_nm .\n  {} name ?obj_nm .\n}}", self.term(&oa.term), self.term(&ob.term)),
        )?;
        let same = ex.result.as_bool().unwrap_or(false);
        Ok((Payload::Boolean(same), yes_no(same), ReasonTrace::default()))
    }

    fn list_obj(&self, ctx: &mut Ctx, img: &ImageHandle) -> Result<Outcome, AnswerError> {
        let ex = self.run(
            ctx,
            format!(
                "SELECT DISTINCT ?obj_nm WHERE {{\n  {} contain ?obj .\n  ?obj name ?cat .\n  ?cat name ?obj_nm .\n}}",
                self.term(&img.image)
            ),
        )?;
        let names: BTreeSet<String> = ex.result.column("obj_nm").iter().map(|t| t.lexical().to_string()).collect();
        let names: Vec<String> = names.into_iter().collect();
        let text = list_text(&names, "no objects found");
        Ok((Payload::NameList(names), text, ReasonTrace::default()))
    }

    /// Attribute names of one super-category, in annotation (score) order.
    fn attribute_names(&self, ctx: &mut Ctx, img: &ImageHandle, kind: &str) -> Result<Vec<String>, AnswerError> {
        let ex = self.run(
            ctx,
            format!(
                "SELECT DISTINCT ?att_nm WHERE {{\n  {} img-att ?att .\n  ?att supercat-name {} .\n  ?att name ?att_nm .\n}}",
                self.term(&img.image),
                Term::literal(kind)
            ),
        )?;
        let found: BTreeSet<String> = ex.result.column("att_nm").iter().map(|t| t.lexical().to_string()).collect();
        Ok(img.annotation.attributes.iter().map(|a| a.label.trim().to_lowercase()).filter(|l| found.contains(l)).fold(
            Vec::new(),
            |mut v, l| {
                if !v.contains(&l) {
                    v.push(l);
                }
                v
            },
        ))
    }

    fn img_scene(&self, ctx: &mut Ctx, img: &ImageHandle) -> Result<Outcome, AnswerError> {
        let mut names = self.attribute_names(ctx, img, "scene")?;
        if names.is_empty() {
            let ex = self.run(
                ctx,
                format!(
                    "SELECT DISTINCT ?scn_nm WHERE {{\n  {} img-scn ?scn .\n  ?scn name ?scn_nm .\n}}",
                    self.term(&img.image)
                ),
            )?;
            let found: BTreeSet<String> = ex.result.column("scn_nm").iter().map(|t| t.lexical().to_string()).collect();
            names = img
                .annotation
                .scenes
                .iter()
                .map(|s| s.label.trim().to_lowercase())
                .filter(|l| found.contains(l))
                .collect();
        }
        let text = list_text(&names, "none found");
        Ok((Payload::NameList(names), text, ReasonTrace::default()))
    }

    fn obj_action(&self, ctx: &mut Ctx, img: &ImageHandle, o: &SlotPhrase) -> Result<Outcome, AnswerError> {
        self.candidates(ctx, img, o)?;
        let names = self.attribute_names(ctx, img, "action")?;
        let text = list_text(&names, "none found");
        Ok((Payload::NameList(names), text, ReasonTrace::default()))
    }

    // ----- KB lookups -----

    fn sport_equip(&self, ctx: &mut Ctx, img: &ImageHandle) -> Result<Outcome, AnswerError> {
        let mut trace = ReasonTrace::default();
        let sports = self.attribute_names(ctx, img, "sport")?;
        let mut names = BTreeSet::new();
        for sport in &sports {
            let pattern = format!("^{} equipment$", regex::escape(sport));
            let ex = self.run(
                ctx,
                format!(
                    "SELECT DISTINCT ?equip WHERE {{\n  ?equip subject ?cat .\n  ?cat label ?cat_nm .\n  FILTER regex(?cat_nm, {}, \"i\")\n}}",
                    Term::literal(pattern)
                ),
            )?;
            if !ex.rows.is_empty() {
                trace.push(StepKind::VisualEvidence, format!("the image shows the sport {sport}"), Vec::new());
            }
            for row in &ex.rows {
                let w: Vec<Triple> = row.witnesses.iter().flat_map(|w| w.triples.clone()).collect();
                trace.push(StepKind::KbEdge, describe_chain(self.graph, &w), w);
                names.insert(self.name(&row.values[0]));
            }
        }
        if names.is_empty() {
            let detected: BTreeSet<Term> = img.objects.iter().filter_map(|o| object_entity(self.graph, o)).collect();
            let ex = self.run(
                ctx,
                format!(
                    "SELECT DISTINCT ?equip WHERE {{\n  {} contain ?obj .\n  ?obj name ?oc .\n  ?oc same-concept ?e .\n  ?e subject ?cat .\n  ?equip subject ?cat .\n  ?cat broader/broader? {} .\n}}",
                    self.term(&img.image),
                    self.term(&Term::iri(vocab::resource("Category:Sports_equipment")))
                ),
            )?;
            for row in &ex.rows {
                let equip = &row.values[0];
                if detected.contains(equip) {
                    continue;
                }
                let w: Vec<Triple> = row.witnesses.iter().flat_map(|w| w.triples.clone()).collect();
                trace.push(StepKind::KbEdge, describe_chain(self.graph, &w), w);
                names.insert(self.name(equip));
            }
        }
        if names.is_empty() {
            return Err(AnswerError::NoEquipment);
        }
        let names: Vec<String> = names.into_iter().collect();
        let text = names.join(", ");
        Ok((Payload::NameList(names), text, trace))
    }

    /// Labels of the entity's categories matching a regex, with witnesses.
    fn category_labels(&self, ctx: &mut Ctx, e: &Term, regex: &str) -> Result<Vec<(String, Vec<Triple>)>, AnswerError> {
        let ex = self.run(
            ctx,
            format!(
                "SELECT DISTINCT ?cat_nm WHERE {{\n  {} subject ?cat .\n  ?cat label ?cat_nm .\n  FILTER regex(?cat_nm, {})\n}}",
                self.term(e),
                Term::literal(regex)
            ),
        )?;
        let mut out: Vec<(String, Vec<Triple>)> = ex
            .rows
            .into_iter()
            .map(|r| (r.values[0].lexical().to_string(), r.witnesses.into_iter().flat_map(|w| w.triples).collect()))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }

    const INVENTIONS: &'static str = "^[a-z|A-z]+ inventions$";
    const INTRODUCTIONS: &'static str = "^[0-9]+ introductions$";

    fn loc_intro(&self, ctx: &mut Ctx, img: &ImageHandle, o: &SlotPhrase) -> Result<Outcome, AnswerError> {
        let mut trace = ReasonTrace::default();
        let e = self.entity(ctx, img, o, &mut trace)?;
        let found = self.category_labels(ctx, &e, Self::INVENTIONS)?;
        let Some((label, w)) = found.into_iter().next() else {
            return Err(AnswerError::NotRecorded(format!("where {} was invented", self.name(&e))));
        };
        trace.push(StepKind::KbEdge, describe_chain(self.graph, &w), w);
        let place = label.trim_end_matches(" inventions").to_string();
        Ok((Payload::Text(place.clone()), place, trace))
    }

    fn year_of(&self, ctx: &mut Ctx, e: &Term) -> Result<Option<(i64, Vec<Triple>)>, AnswerError> {
        Ok(self
            .category_labels(ctx, e, Self::INTRODUCTIONS)?
            .into_iter()
            .filter_map(|(l, w)| l.split_whitespace().next().and_then(|y| y.parse().ok()).map(|y| (y, w)))
            .min_by_key(|(y, _)| *y))
    }

    fn year_intro(&self, ctx: &mut Ctx, img: &ImageHandle, o: &SlotPhrase) -> Result<Outcome, AnswerError> {
        let mut trace = ReasonTrace::default();
        let e = self.entity(ctx, img, o, &mut trace)?;
        let Some((year, w)) = self.year_of(ctx, &e)? else {
            return Err(AnswerError::NotRecorded(format!("when {} was introduced", self.name(&e))));
        };
        trace.push(StepKind::KbEdge, describe_chain(self.graph, &w), w);
        Ok((Payload::Text(year.to_string()), year.to_string(), trace))
    }

    fn first_intro(
        &self,
        ctx: &mut Ctx,
        img: &ImageHandle,
        a: &SlotPhrase,
        b: &SlotPhrase,
    ) -> Result<Outcome, AnswerError> {
        let mut trace = ReasonTrace::default();
        let ea = self.entity(ctx, img, a, &mut trace)?;
        let eb = self.entity(ctx, img, b, &mut trace)?;
        let mut years = Vec::new();
        for e in [&ea, &eb] {
            let Some((y, w)) = self.year_of(ctx, e)? else {
                return Err(AnswerError::NotRecorded(format!("when {} was introduced", self.name(e))));
            };
            trace.push(StepKind::KbEdge, describe_chain(self.graph, &w), w);
            years.push(y);
        }
        let answer = match years[0].cmp(&years[1]) {
            std::cmp::Ordering::Less => self.name(&ea),
            std::cmp::Ordering::Greater => self.name(&eb),
            std::cmp::Ordering::Equal => "same year".to_string(),
        };
        trace.push(
            StepKind::Aggregation,
            format!("{} ({}) vs {} ({})", self.name(&ea), years[0], self.name(&eb), years[1]),
            Vec::new(),
        );
        Ok((Payload::Text(answer.clone()), answer, trace))
    }

    fn list_same_year(&self, ctx: &mut Ctx, img: &ImageHandle, o: &SlotPhrase) -> Result<Outcome, AnswerError> {
        let mut trace = ReasonTrace::default();
        let e = self.entity(ctx, img, o, &mut trace)?;
        if self.year_of(ctx, &e)?.is_none() {
            return Err(AnswerError::NotRecorded(format!("when {} was introduced", self.name(&e))));
        }
        let ex = self.run(
            ctx,
            format!(
                "SELECT DISTINCT ?thing ?thing_nm WHERE {{\n  ?thing subject ?cat .\n  ?thing label ?thing_nm .\n  {} subject ?cat .\n  ?cat label ?cat_nm .\n  FILTER regex(?cat_nm, {})\n}}",
                self.term(&e),
                Term::literal(Self::INTRODUCTIONS)
            ),
        )?;
        let mut names = BTreeSet::new();
        for row in &ex.rows {
            if row.values[0] == e {
                continue;
            }
            let w: Vec<Triple> = row.witnesses.iter().flat_map(|w| w.triples.clone()).collect();
            trace.push(StepKind::KbEdge, describe_chain(self.graph, &w), w);
            names.insert(row.values[1].lexical().to_string());
        }
        let names: Vec<String> = names.into_iter().collect();
        if names.is_empty() {
            trace.push(
                StepKind::Aggregation,
                format!("nothing else shares {}'s introduction year", self.name(&e)),
                Vec::new(),
            );
        }
        let text = list_text(&names, "none found");
        Ok((Payload::NameList(names), text, trace))
    }

    fn food_ingredient(&self, ctx: &mut Ctx, img: &ImageHandle, f: &SlotPhrase) -> Result<Outcome, AnswerError> {
        let mut trace = ReasonTrace::default();
        let e = self.entity(ctx, img, f, &mut trace)?;
        let ex = self.run(
            ctx,
            format!(
                "SELECT DISTINCT ?Ingrd_nm WHERE {{\n  {} ingredient ?Ingrd .\n  ?Ingrd label ?Ingrd_nm .\n}}",
                self.term(&e)
            ),
        )?;
        let mut names = BTreeSet::new();
        for row in &ex.rows {
            let w: Vec<Triple> = row.witnesses.iter().flat_map(|w| w.triples.clone()).collect();
            trace.push(StepKind::KbEdge, describe_chain(self.graph, &w), w);
            names.insert(row.values[0].lexical().to_string());
        }
        if names.is_empty() {
            return Err(AnswerError::NotRecorded(format!("ingredients of {}", self.name(&e))));
        }
        let names: Vec<String> = names.into_iter().collect();
        let text = names.join(", ");
        Ok((Payload::NameList(names), text, trace))
    }

    fn rank_name(rank: TaxonomyRank) -> &'static str {
        vocab::bare_name(rank.predicate()).expect("taxonomy predicates have bare names")
    }

    fn animal_class(
        &self,
        ctx: &mut Ctx,
        img: &ImageHandle,
        a: &SlotPhrase,
        t: &SlotPhrase,
    ) -> Result<Outcome, AnswerError> {
        let rank = resolve_taxonomy_slot(t)?;
        let mut trace = ReasonTrace::default();
        let e = self.entity(ctx, img, a, &mut trace)?;
        let ex = self.run(
            ctx,
            format!(
                "SELECT DISTINCT ?class_nm WHERE {{\n  {} {} ?class .\n  ?class label ?class_nm .\n}}",
                self.term(&e),
                Self::rank_name(rank)
            ),
        )?;
        let Some(row) = ex.rows.iter().min_by(|a, b| a.values[0].lexical().cmp(b.values[0].lexical())) else {
            return Err(AnswerError::NotRecorded(format!("the {rank} of {}", self.name(&e))));
        };
        let w: Vec<Triple> = row.witnesses.iter().flat_map(|w| w.triples.clone()).collect();
        trace.push(StepKind::KbEdge, describe_chain(self.graph, &w), w);
        let name = row.values[0].lexical().to_string();
        Ok((Payload::Text(name.clone()), name, trace))
    }

    fn animal_relative(&self, ctx: &mut Ctx, img: &ImageHandle, a: &SlotPhrase) -> Result<Outcome, AnswerError> {
        let mut trace = ReasonTrace::default();
        let e = self.entity(ctx, img, a, &mut trace)?;
        // Most specific rank first.
        for rank in TaxonomyRank::ALL.iter().rev() {
            let p = Self::rank_name(*rank);
            let ex = self.run(
                ctx,
                format!(
                    "SELECT DISTINCT ?relative ?relative_nm WHERE {{\n  {} {p} ?class .\n  ?relative {p} ?class .\n  ?relative label ?relative_nm .\n}}",
                    self.term(&e)
                ),
            )?;
            let rows: Vec<_> = ex.rows.iter().filter(|r| r.values[0] != e).collect();
            if rows.is_empty() {
                continue;
            }
            let mut names = BTreeSet::new();
            for row in rows {
                let w: Vec<Triple> = row.witnesses.iter().flat_map(|w| w.triples.clone()).collect();
                trace.push(StepKind::KbEdge, describe_chain(self.graph, &w), w);
                names.insert(row.values[1].lexical().to_string());
            }
            trace.push(StepKind::Aggregation, format!("relatives share the same {rank}"), Vec::new());
            let names: Vec<String> = names.into_iter().collect();
            let text = names.join(", ");
            return Ok((Payload::NameList(names), text, trace));
        }
        Err(AnswerError::NotRecorded(format!("relatives of {}", self.name(&e))))
    }

    fn animal_same(
        &self,
        ctx: &mut Ctx,
        img: &ImageHandle,
        a: &SlotPhrase,
        b: &SlotPhrase,
        t: &SlotPhrase,
    ) -> Result<Outcome, AnswerError> {
        let rank = resolve_taxonomy_slot(t)?;
        let mut trace = ReasonTrace::default();
        let ea = self.entity(ctx, img, a, &mut trace)?;
        let eb = self.entity(ctx, img, b, &mut trace)?;
        let p = Self::rank_name(rank);
        let ex =
            self.run(ctx, format!("ASK {{\n  {} {p} ?class .\n  {} {p} ?class .\n}}", self.term(&ea), self.term(&eb)))?;
        let same = ex.result.as_bool().unwrap_or(false);
        if same {
            let w = ex.all_triples();
            trace.push(StepKind::KbEdge, describe_chain(self.graph, &w), w);
        } else {
            let pred = self.graph.iri_id(rank.predicate());
            for e in [&ea, &eb] {
                let value = pred.zip(self.graph.term_id(e)).and_then(|(p, id)| self.graph.objects(id, p).next());
                let Some(v) = value else {
                    return Err(AnswerError::NotRecorded(format!("the {rank} of {}", self.name(e))));
                };
                let w = vec![Triple::new(e.clone(), Term::iri(rank.predicate()), self.graph.term(v).clone())];
                trace.push(StepKind::KbEdge, describe_chain(self.graph, &w), w);
            }
        }
        Ok((Payload::Boolean(same), yes_no(same), trace))
    }
}
