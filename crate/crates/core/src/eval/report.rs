//! Accuracy aggregation over examiner scores.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::records::{AnswerRecord, KnowledgeLevel, QuestionRecord};
use super::scoring::ScoreEntry;
use super::EvalError;
use crate::question::TemplateId;

/// Accuracy and mean correctness over a group of questions.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GroupStats {
    pub questions: usize,
    pub right: usize,
    pub accuracy: f64,
    pub mean_correctness: f64,
}

impl GroupStats {
    fn from_means(means: &[f64]) -> Self {
        let right = means.iter().filter(|m| **m > 3.0).count();
        let n = means.len();
        GroupStats {
            questions: n,
            right,
            accuracy: if n == 0 { 0.0 } else { right as f64 / n as f64 },
            mean_correctness: if n == 0 { 0.0 } else { means.iter().sum::<f64>() / n as f64 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub overall: GroupStats,
    pub by_template: BTreeMap<String, GroupStats>,
    pub by_level: BTreeMap<String, GroupStats>,
    /// Count of individual scores at each level 1..=5.
    pub histogram: [usize; 5],
    /// Accuracy over questions whose answer carries a reason.
    pub reason: GroupStats,
}

/// Per-question mean over examiners, then accuracy = #(mean > 3) / total.
/// `answers` supplies templates and reason-bearing flags when available.
pub fn aggregate(
    scores: &[ScoreEntry],
    questions: &[QuestionRecord],
    answers: &[AnswerRecord],
) -> Result<EvaluationReport, EvalError> {
    let level_of: BTreeMap<&str, KnowledgeLevel> = questions.iter().map(|q| (q.qid.as_str(), q.level)).collect();
    let mut per_q: BTreeMap<&str, Vec<u8>> = BTreeMap::new();
    let mut histogram = [0usize; 5];
    for s in scores {
        if !level_of.contains_key(s.qid.as_str()) {
            return Err(EvalError::UnknownQuestion(s.qid.clone()));
        }
        per_q.entry(s.qid.as_str()).or_default().push(s.score.value());
        histogram[s.score.value() as usize - 1] += 1;
    }
    let answer_of: BTreeMap<&str, &AnswerRecord> = answers.iter().map(|a| (a.qid.as_str(), a)).collect();
    let mut all = Vec::new();
    let mut by_template: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut by_level: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut reason = Vec::new();
    for (qid, vals) in &per_q {
        let mean = vals.iter().map(|v| *v as f64).sum::<f64>() / vals.len() as f64;
        all.push(mean);
        by_level.entry(level_of[qid].to_string()).or_default().push(mean);
        let answer = answer_of.get(qid);
        let template = answer.and_then(|a| a.template).map_or("unrecognized", TemplateId::as_str);
        by_template.entry(template.to_string()).or_default().push(mean);
        if answer.is_some_and(|a| a.reason_bearing) {
            reason.push(mean);
        }
    }
    let stats = |m: BTreeMap<String, Vec<f64>>| m.into_iter().map(|(k, v)| (k, GroupStats::from_means(&v))).collect();
    Ok(EvaluationReport {
        overall: GroupStats::from_means(&all),
        by_template: stats(by_template),
        by_level: stats(by_level),
        histogram,
        reason: GroupStats::from_means(&reason),
    })
}

impl EvaluationReport {
    /// Plain-text table: one row per template, then per level and overall.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let row = |s: &mut String, name: &str, g: &GroupStats| {
            let _ = writeln!(
                s,
                "{name:<20} {:>5} {:>5} {:>8.1}% {:>6.2}",
                g.questions,
                g.right,
                g.accuracy * 100.0,
                g.mean_correctness
            );
        };
        let _ = writeln!(s, "{:<20} {:>5} {:>5} {:>9} {:>6}", "group", "n", "right", "accuracy", "mean");
        for (t, g) in &self.by_template {
            row(&mut s, t, g);
        }
        let _ = writeln!(s);
        for (l, g) in &self.by_level {
            row(&mut s, l, g);
        }
        let _ = writeln!(s);
        row(&mut s, "overall", &self.overall);
        row(&mut s, "with reasons", &self.reason);
        let _ = writeln!(s);
        let hist: Vec<String> = self.histogram.iter().enumerate().map(|(i, n)| format!("{}:{n}", i + 1)).collect();
        let _ = writeln!(s, "scores {}", hist.join(" "));
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
