//! Dataset records, batch answering, gold checks, examiner scoring and
//! accuracy reports.

mod check;
mod records;
mod report;
mod scoring;

use std::io;

use thiserror::Error;

pub use check::{auto_check, payload_matches, CheckOutcome, ListMode};
pub use records::{
    answer_record, read_jsonl, read_questions, run_batch, run_batch_sequential, write_jsonl, AnswerRecord, ErrorRecord,
    Gold, KnowledgeLevel, QuestionRecord,
};
pub use report::{aggregate, EvaluationReport, GroupStats};
pub use scoring::{read_score_log, score_interactive, CorrectnessScore, Rubric, ScoreEntry};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Record { line: usize, message: String },
    #[error("duplicate question id {0}")]
    DuplicateQuestion(String),
    #[error("score for unknown question {0}")]
    UnknownQuestion(String),
    #[error("score {0} outside 1-5")]
    ScoreRange(String),
    #[error("{0}")]
    Invalid(String),
}
