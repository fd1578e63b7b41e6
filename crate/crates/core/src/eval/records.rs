//! Question and answer records, and the batch runner.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::answer::{AnswerError, Payload};
use crate::linker::LinkError;
use crate::question::TemplateId;
use crate::session::{AskError, Session};
use crate::store::Triple;

/// How much outside knowledge a question needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KnowledgeLevel {
    Visual,
    CommonSense,
    KbKnowledge,
}

impl KnowledgeLevel {
    pub const ALL: [KnowledgeLevel; 3] =
        [KnowledgeLevel::Visual, KnowledgeLevel::CommonSense, KnowledgeLevel::KbKnowledge];

    pub fn as_str(self) -> &'static str {
        match self {
            KnowledgeLevel::Visual => "visual",
            KnowledgeLevel::CommonSense => "common-sense",
            KnowledgeLevel::KbKnowledge => "kb-knowledge",
        }
    }
}

impl fmt::Display for KnowledgeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KnowledgeLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        KnowledgeLevel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown knowledge level {s:?}"))
    }
}

/// Expected outcome: an answer payload, or a structured failure code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Gold {
    Boolean(bool),
    Count(usize),
    Text(String),
    NameList(Vec<String>),
    EntityRef(String),
    ImageRef(String),
    Failure(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub qid: String,
    pub images: Vec<String>,
    pub question: String,
    pub level: KnowledgeLevel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<Gold>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_reason: Option<String>,
}

/// A structured failure in an answer record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub code: String,
    pub message: String,
}

impl ErrorRecord {
    pub fn from_ask(e: &AskError) -> Self {
        let code = match e {
            AskError::Parse(_) => "unrecognized-question",
            AskError::UnknownImage(_) => "unknown-image",
            AskError::NoImage => "no-image",
            AskError::Answer(a) => match a {
                AnswerError::Link(LinkError::UnresolvedObject(_)) => "unresolved-object",
                AnswerError::Link(LinkError::UnresolvedConcept(_)) => "unresolved-concept",
                AnswerError::Link(LinkError::NotTaxonomy(_)) => "not-taxonomy",
                AnswerError::ColorUnknown => "color-unknown",
                AnswerError::NoEquipment => "no-equipment",
                AnswerError::NotRecorded(_) => "not-recorded",
                AnswerError::NoneFound => "none-found",
                AnswerError::ImageCount { .. } => "image-count",
                AnswerError::Query(_) => "query",
            },
        };
        ErrorRecord { code: code.into(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub qid: String,
    pub images: Vec<String>,
    pub question: String,
    pub level: KnowledgeLevel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<TemplateId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Payload>,
    pub text: String,
    pub reasons: Vec<String>,
    pub reason_bearing: bool,
    /// KB triples cited by the reason.
    pub witnesses: Vec<Triple>,
    pub queries: Vec<String>,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
}

/// Answers one question record; failures become error records.
pub fn answer_record(session: &Session, q: &QuestionRecord) -> AnswerRecord {
    let mut rec = AnswerRecord {
        qid: q.qid.clone(),
        images: q.images.clone(),
        question: q.question.clone(),
        level: q.level,
        template: session.parse(&q.question).ok().map(|p| p.template),
        payload: None,
        text: String::new(),
        reasons: Vec::new(),
        reason_bearing: false,
        witnesses: Vec::new(),
        queries: Vec::new(),
        notes: Vec::new(),
        error: None,
    };
    match session.ask(&q.images, &q.question) {
        Ok(a) => {
            rec.reasons = a.reason_lines();
            rec.witnesses = a.trace.kb_witnesses().cloned().collect();
            rec.payload = Some(a.payload);
            rec.text = a.text;
            rec.reason_bearing = a.reason_bearing;
            rec.queries = a.queries;
            rec.notes = a.notes;
        }
        Err(e) => {
            let err = ErrorRecord::from_ask(&e);
            rec.text = err.message.clone();
            rec.error = Some(err);
        }
    }
    rec
}

/// One record per question, in input order.
#[cfg(feature = "parallel")]
pub fn run_batch(session: &Session, questions: &[QuestionRecord]) -> Vec<AnswerRecord> {
    use rayon::prelude::*;
    questions.par_iter().map(|q| answer_record(session, q)).collect()
}

/// One record per question, in input order.
#[cfg(not(feature = "parallel"))]
pub fn run_batch(session: &Session, questions: &[QuestionRecord]) -> Vec<AnswerRecord> {
    run_batch_sequential(session, questions)
}

pub fn run_batch_sequential(session: &Session, questions: &[QuestionRecord]) -> Vec<AnswerRecord> {
    questions.iter().map(|q| answer_record(session, q)).collect()
}

/// Reads JSON-lines records; blank lines and `#` comments are skipped.
pub fn read_jsonl<T: for<'de> Deserialize<'de>, R: BufRead>(input: R) -> Result<Vec<T>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(serde_json::from_str(line).map_err(|e| EvalError::Record { line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize, W: Write>(records: &[T], mut out: W) -> Result<(), EvalError> {
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| EvalError::Record { line: 0, message: e.to_string() })?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Question records, checking that ids are unique and images present.
pub fn read_questions<R: BufRead>(input: R) -> Result<Vec<QuestionRecord>, EvalError> {
    let qs: Vec<QuestionRecord> = read_jsonl(input)?;
    let mut seen = std::collections::BTreeSet::new();
    for q in &qs {
        if !seen.insert(q.qid.as_str()) {
            return Err(EvalError::DuplicateQuestion(q.qid.clone()));
        }
        if q.images.is_empty() || q.images.len() > 2 {
            return Err(EvalError::Invalid(format!("{}: expected one or two images, got {}", q.qid, q.images.len())));
        }
    }
    Ok(qs)
}
