//! Per-template answer plans: query generation, KB reasoning, scoring and
//! reason traces.

mod plans;
mod trace;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use trace::{render_reason, ReasonStep, ReasonTrace, StepKind};

use crate::image::{ClassRegistry, ImageHandle};
use crate::kb::label_of;
use crate::linker::LinkError;
use crate::question::{lemma_phrase, ParsedQuestion, TemplateId};
use crate::sparql::{parse_query, Evaluator, Explanation, PrefixTable, QueryError};
use crate::store::{Graph, Term, Triple};
use crate::vocab;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnswerError {
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error("color unknown")]
    ColorUnknown,
    #[error("no equipment found")]
    NoEquipment,
    #[error("not recorded in knowledge base: {0}")]
    NotRecorded(String),
    #[error("none found")]
    NoneFound,
    #[error("{template} needs {needed} image(s), got {got}")]
    ImageCount { template: TemplateId, needed: usize, got: usize },
    #[error("generated query failed: {0}")]
    Query(#[from] QueryError),
}

/// Tunables of the answer plans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Weight of the direct-relation term in the correlation score.
    pub alpha: f64,
    /// A correlation total strictly above this relates a concept to an image.
    pub threshold: f64,
    /// Category hops: one `subject` edge plus `depth - 1` optional `broader` edges.
    pub depth: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { alpha: 50.0, threshold: 50.0, depth: 3 }
    }
}

/// Answer value; the variant is fixed per template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Payload {
    Boolean(bool),
    Count(usize),
    Text(String),
    NameList(Vec<String>),
    /// `image#object`.
    EntityRef(String),
    ImageRef(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayloadKind {
    Boolean,
    Count,
    Text,
    NameList,
    EntityRef,
    ImageRef,
}

impl Payload {
    pub fn kind(&self) -> PayloadKind {
        match self {
            Payload::Boolean(_) => PayloadKind::Boolean,
            Payload::Count(_) => PayloadKind::Count,
            Payload::Text(_) => PayloadKind::Text,
            Payload::NameList(_) => PayloadKind::NameList,
            Payload::EntityRef(_) => PayloadKind::EntityRef,
            Payload::ImageRef(_) => PayloadKind::ImageRef,
        }
    }
}

/// Payload variant each template answers with.
pub fn payload_kind(template: TemplateId) -> PayloadKind {
    use TemplateId::*;
    match template {
        IsThereAny | IsImgRelate | IsSameThing | IsTheA | AreAllThe | AnimalSame => PayloadKind::Boolean,
        HowMany => PayloadKind::Count,
        WhatIs | ColorOf | AnimalClass | LocIntro | YearIntro | FirstIntro => PayloadKind::Text,
        ImgScene | ObjAction | ListObj | SportEquip | FoodIngredient | CommProp | AnimalRelative | ListSameYear
        | TwoImageCommon => PayloadKind::NameList,
        MostRelObj | LargestObj => PayloadKind::EntityRef,
        MostRelatedImage => PayloadKind::ImageRef,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Answer {
    pub template: TemplateId,
    pub payload: Payload,
    /// Templated answer sentence.
    pub text: String,
    pub trace: ReasonTrace,
    /// Whether this answer is expected to carry a reason.
    pub reason_bearing: bool,
    /// Executed queries, in query-language text.
    pub queries: Vec<String>,
    /// Linking notes (ambiguities, fallbacks).
    pub notes: Vec<String>,
}

impl Answer {
    pub fn reason_lines(&self) -> Vec<String> {
        render_reason(&self.trace)
    }
}

/// f = alpha * f1 + f2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationScore {
    pub f1: u8,
    pub f2: usize,
    pub alpha: f64,
    pub total: f64,
}

impl CorrelationScore {
    pub fn new(f1: bool, f2: usize, alpha: f64) -> Self {
        let f1 = u8::from(f1);
        CorrelationScore { f1, f2, alpha, total: alpha * f1 as f64 + f2 as f64 }
    }
}

/// Outcome of an is-a check between two entities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyponymy {
    pub pass: bool,
    /// Passed because the two entities carry the same name.
    pub reflexive: bool,
    /// Category chain that proved it.
    pub path: Vec<Triple>,
}

/// Correlation score with the triples behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlation {
    pub score: CorrelationScore,
    pub direct: Vec<Triple>,
    pub intermediates: Vec<Term>,
}

/// Collects executed query texts while answering one question.
#[derive(Debug, Default)]
pub(crate) struct Ctx {
    pub queries: Vec<String>,
    pub notes: Vec<String>,
}

/// Answers parsed questions against a merged KB + image graph.
#[derive(Debug, Clone)]
pub struct Engine<'g> {
    pub(crate) graph: &'g Graph,
    pub(crate) classes: &'g ClassRegistry,
    pub(crate) config: EngineConfig,
    pub(crate) prefixes: PrefixTable,
}

impl<'g> Engine<'g> {
    pub fn new(graph: &'g Graph, classes: &'g ClassRegistry, config: EngineConfig) -> Self {
        Engine { graph, classes, config, prefixes: PrefixTable::default() }
    }

    pub fn config(&self) -> EngineConfig {
        self.config
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    /// Answers one question; `images` holds one handle, or two or more for
    /// multi-image templates.
    pub fn answer(&self, question: &ParsedQuestion, images: &[&ImageHandle]) -> Result<Answer, AnswerError> {
        let template = question.template;
        let needed = if template.is_multi_image() { 2 } else { 1 };
        let enough = if template == TemplateId::MostRelatedImage { images.len() >= 2 } else { images.len() == needed };
        if !enough {
            return Err(AnswerError::ImageCount { template, needed, got: images.len() });
        }
        let mut ctx = Ctx::default();
        let (payload, text, trace) = self.dispatch(&mut ctx, question, images)?;
        debug_assert_eq!(payload.kind(), payload_kind(template));
        let reason_bearing = template.is_reason_bearing() && !(template == TemplateId::HowMany && trace.is_empty());
        Ok(Answer { template, payload, text, trace, reason_bearing, queries: ctx.queries, notes: ctx.notes })
    }

    pub(crate) fn term(&self, t: &Term) -> String {
        self.prefixes.compact(t)
    }

    /// `subject/broader?/...` for the configured depth.
    pub(crate) fn category_path(&self) -> String {
        let mut p = String::from("subject");
        for _ in 1..self.config.depth.max(1) {
            p.push_str("/broader?");
        }
        p
    }

    pub(crate) fn run(&self, ctx: &mut Ctx, text: String) -> Result<Explanation, AnswerError> {
        let plan = parse_query(&text, &self.prefixes)?;
        log::debug!("query:\n{text}");
        ctx.queries.push(text);
        Ok(Evaluator::new(self.graph).explain(&plan)?)
    }

    /// Human name for an entity: English label, else a readable local name.
    pub(crate) fn name(&self, t: &Term) -> String {
        crate::kb::display_name(self.graph, t)
    }

    fn same_name(&self, a: &Term, b: &Term) -> bool {
        let norm = |t: &Term| lemma_phrase(&self.name(t));
        a == b || norm(a) == norm(b)
    }

    /// Categories standing for the same notion as a non-category concept:
    /// label-identical categories and the `Category:<Name>` / plural forms.
    pub(crate) fn twins(&self, concept: &Term) -> Vec<Term> {
        let Some(iri) = concept.as_iri() else { return Vec::new() };
        if vocab::is_category(iri) {
            return Vec::new();
        }
        let mut out = BTreeSet::new();
        if let Some(label) = label_of(self.graph, concept) {
            out.extend(
                crate::kb::lookup_by_label(self.graph, &label, true)
                    .into_iter()
                    .filter(|t| t.as_iri().is_some_and(vocab::is_category)),
            );
        }
        let local = concept.local_name();
        for suffix in ["", "s", "es"] {
            let t = Term::iri(vocab::resource(&format!("{}{local}{suffix}", vocab::CATEGORY_PREFIX)));
            if self.graph.term_id(&t).is_some_and(|id| self.graph.is_node(id)) {
                out.insert(t);
            }
        }
        out.into_iter().collect()
    }

    fn union_text(branches: &[String]) -> String {
        if branches.len() == 1 {
            format!("  {} .\n", branches[0])
        } else {
            let parts: Vec<String> = branches.iter().map(|b| format!("{{ {b} }}")).collect();
            format!("  {} .\n", parts.join(" UNION\n  "))
        }
    }

    /// Is `concept` a transitive category of `obj` (or the same thing by name)?
    pub(crate) fn hyponymy(&self, ctx: &mut Ctx, obj: &Term, concept: &Term) -> Result<Hyponymy, AnswerError> {
        if self.same_name(obj, concept) {
            return Ok(Hyponymy { pass: true, reflexive: true, path: Vec::new() });
        }
        let path = self.category_path();
        let mut targets = vec![concept.clone()];
        targets.extend(self.twins(concept));
        let branches: Vec<String> =
            targets.iter().map(|t| format!("{} {path} {}", self.term(obj), self.term(t))).collect();
        let ex = self.run(ctx, format!("ASK {{\n{}}}", Self::union_text(&branches)))?;
        let pass = ex.result.as_bool().unwrap_or(false);
        Ok(Hyponymy { pass, reflexive: false, path: if pass { ex.all_triples() } else { Vec::new() } })
    }

    /// Correlation between a visual concept's entity and a question concept.
    pub(crate) fn correlation(&self, ctx: &mut Ctx, a: &Term, b: &Term) -> Result<Correlation, AnswerError> {
        let (ta, tb) = (self.term(a), self.term(b));
        let path = self.category_path();
        let reflexive = self.same_name(a, b);
        let mut branches = vec![format!("{ta} WikiLink {tb}"), format!("{tb} WikiLink {ta}")];
        for t in std::iter::once(b.clone()).chain(self.twins(b)) {
            branches.push(format!("{ta} {path} {}", self.term(&t)));
        }
        for t in std::iter::once(a.clone()).chain(self.twins(a)) {
            branches.push(format!("{tb} {path} {}", self.term(&t)));
        }
        let f1_ex = self.run(ctx, format!("ASK {{\n{}}}", Self::union_text(&branches)))?;
        let f1 = reflexive || f1_ex.result.as_bool().unwrap_or(false);
        let f2_ex = self.run(
            ctx,
            format!(
                "SELECT COUNT(DISTINCT ?x) WHERE {{\n  {{ {ta} WikiLink ?x }} UNION {{ ?x WikiLink {ta} }} .\n  {{ {tb} WikiLink ?x }} UNION {{ ?x WikiLink {tb} }} .\n}}"
            ),
        )?;
        let intermediates: Vec<Term> =
            f2_ex.rows.iter().map(|r| r.values[0].clone()).filter(|x| x != a && x != b).collect();
        Ok(Correlation {
            score: CorrelationScore::new(f1, intermediates.len(), self.config.alpha),
            direct: f1_ex.all_triples(),
            intermediates,
        })
    }

    /// Is-a check between two KB entities, outside of any question.
    pub fn hyponymy_check(&self, obj: &Term, concept: &Term) -> Result<Hyponymy, AnswerError> {
        self.hyponymy(&mut Ctx::default(), obj, concept)
    }

    /// Correlation score between two KB entities, outside of any question.
    pub fn correlation_score(&self, a: &Term, b: &Term) -> Result<CorrelationScore, AnswerError> {
        Ok(self.correlation(&mut Ctx::default(), a, b)?.score)
    }

    /// An image counts as related when some score is strictly above the threshold.
    pub fn is_related(&self, score: &CorrelationScore) -> bool {
        score.total > self.config.threshold
    }
}

/// Mean of the three largest totals (all of them when fewer).
pub fn top3_mean(totals: &[f64]) -> f64 {
    let mut v = totals.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v.truncate(3);
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}
