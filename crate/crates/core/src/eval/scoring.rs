//! The 1-5 correctness rubric, the score log and interactive scoring.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::records::AnswerRecord;
use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rubric {
    TotallyWrong,
    SlightlyWrong,
    Borderline,
    Ok,
    Perfect,
}

impl Rubric {
    pub fn as_str(self) -> &'static str {
        match self {
            Rubric::TotallyWrong => "totally-wrong",
            Rubric::SlightlyWrong => "slightly-wrong",
            Rubric::Borderline => "borderline",
            Rubric::Ok => "ok",
            Rubric::Perfect => "perfect",
        }
    }
}

/// An examiner's 1-5 score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct CorrectnessScore(u8);

impl CorrectnessScore {
    pub fn new(value: u8) -> Result<Self, EvalError> {
        if (1..=5).contains(&value) {
            Ok(CorrectnessScore(value))
        } else {
            Err(EvalError::ScoreRange(value.to_string()))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn rubric(self) -> Rubric {
        [Rubric::TotallyWrong, Rubric::SlightlyWrong, Rubric::Borderline, Rubric::Ok, Rubric::Perfect]
            [self.0 as usize - 1]
    }

    /// Only scores above "borderline" count as right.
    pub fn is_right(self) -> bool {
        self.0 > 3
    }
}

impl TryFrom<u8> for CorrectnessScore {
    type Error = EvalError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        CorrectnessScore::new(v)
    }
}

impl From<CorrectnessScore> for u8 {
    fn from(s: CorrectnessScore) -> u8 {
        s.0
    }
}

impl fmt::Display for CorrectnessScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.0, self.rubric().as_str())
    }
}

/// One line of the score log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub qid: String,
    pub examiner: String,
    pub score: CorrectnessScore,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl ScoreEntry {
    /// `qid<TAB>examiner<TAB>score<TAB>timestamp`.
    pub fn to_line(&self) -> String {
        format!("{}\t{}\t{}\t{}", self.qid, self.examiner, self.score.value(), self.timestamp)
    }

    pub fn parse_line(line: &str) -> Result<Self, String> {
        let cols: Vec<&str> = line.split('\t').collect();
        let [qid, examiner, score, ts] = cols[..] else {
            return Err(format!("expected 4 tab-separated columns, got {}", cols.len()));
        };
        let score = score.trim().parse::<u8>().map_err(|_| format!("bad score {score:?}"))?;
        Ok(ScoreEntry {
            qid: qid.trim().to_string(),
            examiner: examiner.trim().to_string(),
            score: CorrectnessScore::new(score).map_err(|e| e.to_string())?,
            timestamp: ts.trim().parse().map_err(|_| format!("bad timestamp {ts:?}"))?,
        })
    }
}

/// Reads a score log; blank lines and `#` comments are skipped.
pub fn read_score_log<R: BufRead>(input: R) -> Result<Vec<ScoreEntry>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(ScoreEntry::parse_line(&line).map_err(|message| EvalError::Record { line: i + 1, message })?);
    }
    Ok(out)
}

/// Asks the examiner for a 1-5 score per answer, showing only the question,
/// the answer and its reason. Answers this examiner already scored are
/// skipped, so an interrupted session can be resumed; `q` stops early.
/// Each new entry is handed to `record` as soon as it is given.
pub fn score_interactive<R: BufRead, W: Write>(
    answers: &[AnswerRecord],
    existing: &[ScoreEntry],
    examiner: &str,
    mut input: R,
    mut out: W,
    mut now: impl FnMut() -> u64,
    mut record: impl FnMut(&ScoreEntry) -> Result<(), EvalError>,
) -> Result<Vec<ScoreEntry>, EvalError> {
    let done: BTreeSet<&str> = existing.iter().filter(|e| e.examiner == examiner).map(|e| e.qid.as_str()).collect();
    let todo: Vec<&AnswerRecord> = answers.iter().filter(|a| !done.contains(a.qid.as_str())).collect();
    let mut scored = Vec::new();
    'records: for (i, a) in todo.iter().enumerate() {
        writeln!(out, "[{}/{}] {}", i + 1, todo.len(), a.qid)?;
        writeln!(out, "question: {}", a.question)?;
        writeln!(out, "answer: {}", a.text)?;
        for r in &a.reasons {
            writeln!(out, "reason: {r}")?;
        }
        loop {
            write!(out, "score 1-5 (q to stop): ")?;
            out.flush()?;
            let mut line = String::new();
            if input.read_line(&mut line)? == 0 {
                break 'records;
            }
            let line = line.trim();
            if line == "q" {
                break 'records;
            }
            match line.parse::<u8>().ok().and_then(|v| CorrectnessScore::new(v).ok()) {
                Some(score) => {
                    let entry =
                        ScoreEntry { qid: a.qid.clone(), examiner: examiner.to_string(), score, timestamp: now() };
                    record(&entry)?;
                    scored.push(entry);
                    break;
                }
                None => writeln!(out, "please enter a whole number from 1 to 5")?,
            }
        }
    }
    Ok(scored)
}
