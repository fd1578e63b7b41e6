//! Automatic comparison of answers against gold answers.

use std::collections::BTreeSet;

use serde::Serialize;

use super::records::{AnswerRecord, Gold, QuestionRecord};
use crate::answer::Payload;
use crate::question::lemma_phrase;

/// How a gold name list is compared with an answer list.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ListMode {
    /// Every gold name appears in the answer.
    #[default]
    Subset,
    /// Same set of names.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub qid: String,
    pub pass: bool,
    /// Why a record failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

fn name_set(names: &[String]) -> BTreeSet<String> {
    names.iter().map(|n| normalize(n)).collect()
}

/// Does a payload satisfy the gold answer?
pub fn payload_matches(payload: &Payload, gold: &Gold, mode: ListMode) -> bool {
    match (payload, gold) {
        (Payload::Boolean(a), Gold::Boolean(g)) => a == g,
        (Payload::Count(a), Gold::Count(g)) => a == g,
        (Payload::EntityRef(a), Gold::EntityRef(g)) | (Payload::ImageRef(a), Gold::ImageRef(g)) => a == g,
        (Payload::NameList(a), Gold::NameList(g)) => {
            let (a, g) = (name_set(a), name_set(g));
            match mode {
                ListMode::Subset => g.is_subset(&a),
                ListMode::Exact => a == g,
            }
        }
        (Payload::Text(a), Gold::Text(g)) => {
            let (a, g) = (normalize(a), normalize(g));
            a.contains(&g) || lemma_phrase(&a).contains(&lemma_phrase(&g))
        }
        _ => false,
    }
}

/// Checks each answer record against its question's gold answer. Records
/// without a question or without gold fail.
pub fn auto_check(answers: &[AnswerRecord], questions: &[QuestionRecord], mode: ListMode) -> Vec<CheckOutcome> {
    answers
        .iter()
        .map(|a| {
            let gold = questions.iter().find(|q| q.qid == a.qid).and_then(|q| q.gold.as_ref());
            let (pass, detail) = match (gold, &a.payload, &a.error) {
                (None, _, _) => (false, Some("no gold answer".to_string())),
                (Some(Gold::Failure(code)), _, Some(err)) => {
                    (err.code == *code, Some(format!("expected failure {code}, got {}", err.code)))
                }
                (Some(g), Some(p), _) => {
                    (payload_matches(p, g, mode), Some(format!("expected {}, got {}", gold_text(g), a.text)))
                }
                (Some(g), None, err) => (
                    false,
                    Some(format!(
                        "expected {}, got error {}",
                        gold_text(g),
                        err.as_ref().map_or("?", |e| e.code.as_str())
                    )),
                ),
            };
            CheckOutcome { qid: a.qid.clone(), pass, detail: if pass { None } else { detail } }
        })
        .collect()
}

fn gold_text(g: &Gold) -> String {
    serde_json::to_string(g).unwrap_or_default()
}
