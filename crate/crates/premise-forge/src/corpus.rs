//! Question records and JSONL corpus IO.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{ForgeError, Result};
use crate::premise::Premise;

/// Provenance carried by generated questions merged into a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source_question_id: u64,
    pub premise: Premise,
}

/// A visual question, optionally labeled with an answer and a split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub question_id: u64,
    pub image_id: u64,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl Question {
    pub fn new(question_id: u64, image_id: u64, text: impl Into<String>) -> Question {
        Question {
            question_id,
            image_id,
            text: text.into(),
            answer: None,
            split: None,
            provenance: None,
        }
    }

    pub fn with_answer(mut self, answer: impl Into<String>) -> Question {
        self.answer = Some(answer.into());
        self
    }

    pub fn with_split(mut self, split: impl Into<String>) -> Question {
        self.split = Some(split.into());
        self
    }
}

/// Reads a JSONL file, reporting the line number of any malformed record.
pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| ForgeError::io(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| ForgeError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(&line)
            .map_err(|e| ForgeError::parse(path, idx + 1, e.to_string()))?;
        out.push(record);
    }
    Ok(out)
}

/// Writes records as JSONL with stable key order.
pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, records: &[T]) -> Result<()> {
    let path = path.as_ref();
    let mut file = std::fs::File::create(path).map_err(|e| ForgeError::io(path, e))?;
    for record in records {
        let line = serde_json::to_string(record)
            .map_err(|e| ForgeError::parse(path, 0, e.to_string()))?;
        writeln!(file, "{}", line).map_err(|e| ForgeError::io(path, e))?;
    }
    Ok(())
}

/// Reads a question corpus, preserving order and validating that every
/// record carries non-empty text.
pub fn read_questions(path: impl AsRef<Path>) -> Result<Vec<Question>> {
    let path = path.as_ref();
    let questions: Vec<Question> = read_jsonl(path)?;
    for (idx, q) in questions.iter().enumerate() {
        if q.text.trim().is_empty() {
            return Err(ForgeError::parse(path, idx + 1, "empty question text"));
        }
    }
    Ok(questions)
}

pub fn write_questions(path: impl AsRef<Path>, questions: &[Question]) -> Result<()> {
    write_jsonl(path, questions)
}
