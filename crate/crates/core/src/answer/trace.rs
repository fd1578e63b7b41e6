//! Reason traces: the evidence and KB paths behind an answer.

use serde::Serialize;

use crate::store::{Graph, Term, Triple};
use crate::vocab;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    VisualEvidence,
    KbEdge,
    Score,
    Aggregation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReasonStep {
    pub kind: StepKind,
    pub text: String,
    pub witnesses: Vec<Triple>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReasonTrace {
    pub steps: Vec<ReasonStep>,
}

impl ReasonTrace {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, kind: StepKind, text: impl Into<String>, witnesses: Vec<Triple>) {
        self.steps.push(ReasonStep { kind, text: text.into(), witnesses });
    }

    /// Witness triples of all KB-edge steps.
    pub fn kb_witnesses(&self) -> impl Iterator<Item = &Triple> {
        self.steps.iter().filter(|s| s.kind == StepKind::KbEdge).flat_map(|s| &s.witnesses)
    }

    pub fn witnesses(&self) -> impl Iterator<Item = &Triple> {
        self.steps.iter().flat_map(|s| &s.witnesses)
    }
}

/// One line per step.
pub fn render_reason(trace: &ReasonTrace) -> Vec<String> {
    trace.steps.iter().map(|s| s.text.clone()).collect()
}

/// Short name of a node for reason sentences.
pub(crate) fn node_name(graph: &Graph, t: &Term) -> String {
    match t.as_iri() {
        Some(iri) if iri.starts_with(vocab::RESOURCE_NS) => {
            let local = t.local_name();
            match crate::kb::label_of(graph, t) {
                Some(l) if vocab::is_category(iri) => format!("category \"{l}\""),
                Some(l) => l,
                None => local.replace('_', " "),
            }
        }
        Some(_) => t.local_name().to_string(),
        None => format!("\"{}\"", t.lexical()),
    }
}

/// "A -subject-> B -broader-> C" for a chain of triples.
pub(crate) fn describe_chain(graph: &Graph, triples: &[Triple]) -> String {
    let mut out = String::new();
    let mut last: Option<&Term> = None;
    for t in triples {
        if last != Some(&t.subject) {
            if !out.is_empty() {
                out.push_str("; ");
            }
            out.push_str(&node_name(graph, &t.subject));
        }
        let pred = t.predicate.as_iri().and_then(vocab::bare_name).unwrap_or_else(|| t.predicate.local_name());
        out.push_str(&format!(" -{pred}-> {}", node_name(graph, &t.object)));
        last = Some(&t.object);
    }
    out
}
