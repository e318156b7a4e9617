//! Augmentation strategies merging generated premise questions into a
//! source training set, plus answer-type distributions.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{Provenance, Question};
use crate::error::{ForgeError, Result};
use crate::qgen::{classify_answer, AnswerType, QAPair};

/// Which subset of generated pairs joins the training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Baseline,
    All,
    OnlyBinary,
    NoOther,
    NoBinary,
    CommOther,
    Top1kA,
}

impl Strategy {
    pub fn parse(s: &str) -> Result<Strategy> {
        Ok(match s.to_lowercase().as_str() {
            "baseline" => Strategy::Baseline,
            "all" => Strategy::All,
            "only-binary" | "onlybinary" => Strategy::OnlyBinary,
            "no-other" | "noother" => Strategy::NoOther,
            "no-binary" | "nobinary" => Strategy::NoBinary,
            "comm-other" | "commother" => Strategy::CommOther,
            "top1k-a" | "top1ka" => Strategy::Top1kA,
            other => return Err(ForgeError::Invalid(format!("unknown strategy {:?}", other))),
        })
    }

    pub const ALL: [Strategy; 7] = [
        Strategy::Baseline,
        Strategy::All,
        Strategy::OnlyBinary,
        Strategy::NoOther,
        Strategy::NoBinary,
        Strategy::CommOther,
        Strategy::Top1kA,
    ];
}

/// Answer multiset of a source training set.
#[derive(Debug, Clone, Default)]
pub struct AnswerPool {
    counts: HashMap<String, usize>,
}

impl AnswerPool {
    pub fn from_questions(questions: &[Question]) -> AnswerPool {
        let mut counts = HashMap::new();
        for q in questions {
            if let Some(answer) = &q.answer {
                *counts.entry(answer.trim().to_lowercase()).or_insert(0) += 1;
            }
        }
        AnswerPool { counts }
    }

    pub fn contains(&self, answer: &str) -> bool {
        self.counts.contains_key(&answer.trim().to_lowercase())
    }

    /// The k most frequent answers; frequency ties break lexicographically.
    pub fn top_k(&self, k: usize) -> HashSet<String> {
        let mut ranked: Vec<(&String, usize)> =
            self.counts.iter().map(|(a, c)| (a, *c)).collect();
        ranked.sort_by(|(aa, ca), (ab, cb)| cb.cmp(ca).then(aa.cmp(ab)));
        ranked.into_iter().take(k).map(|(a, _)| a.clone()).collect()
    }
}

fn is_binary(pair: &QAPair) -> bool {
    matches!(pair.answer_type, AnswerType::Yes | AnswerType::No)
}

/// Filters generated pairs per the strategy definitions.
pub fn apply_strategy(
    generated: &[QAPair],
    source_answers: &AnswerPool,
    strategy: Strategy,
) -> Vec<QAPair> {
    let top1k = match strategy {
        Strategy::Top1kA => Some(source_answers.top_k(1000)),
        _ => None,
    };
    generated
        .iter()
        .filter(|pair| match strategy {
            Strategy::Baseline => false,
            Strategy::All => true,
            Strategy::OnlyBinary => is_binary(pair),
            Strategy::NoOther => pair.answer_type != AnswerType::Other,
            Strategy::NoBinary => !is_binary(pair),
            Strategy::CommOther => {
                is_binary(pair)
                    || (matches!(pair.answer_type, AnswerType::Other | AnswerType::Number)
                        && source_answers.contains(&pair.answer))
            }
            Strategy::Top1kA => {
                is_binary(pair)
                    || (pair.answer_type == AnswerType::Other
                        && top1k
                            .as_ref()
                            .map(|set| set.contains(&pair.answer.trim().to_lowercase()))
                            .unwrap_or(false))
            }
        })
        .cloned()
        .collect()
}

/// Counts per answer type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerTypeDistribution {
    pub other: usize,
    pub number: usize,
    pub yes: usize,
    pub no: usize,
    pub total: usize,
}

pub fn answer_type_distribution(pairs: &[QAPair]) -> AnswerTypeDistribution {
    let mut dist = AnswerTypeDistribution {
        other: 0,
        number: 0,
        yes: 0,
        no: 0,
        total: pairs.len(),
    };
    for pair in pairs {
        match pair.answer_type {
            AnswerType::Other => dist.other += 1,
            AnswerType::Number => dist.number += 1,
            AnswerType::Yes => dist.yes += 1,
            AnswerType::No => dist.no += 1,
        }
    }
    dist
}

/// Same counts over plain answer strings (for source question sets).
pub fn answer_distribution_of_questions(questions: &[Question]) -> AnswerTypeDistribution {
    let mut dist = AnswerTypeDistribution {
        other: 0,
        number: 0,
        yes: 0,
        no: 0,
        total: 0,
    };
    for q in questions {
        if let Some(answer) = &q.answer {
            dist.total += 1;
            match classify_answer(answer) {
                AnswerType::Other => dist.other += 1,
                AnswerType::Number => dist.number += 1,
                AnswerType::Yes => dist.yes += 1,
                AnswerType::No => dist.no += 1,
            }
        }
    }
    dist
}

impl fmt::Display for AnswerTypeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<8} {:>10}", "type", "count")?;
        writeln!(f, "{:<8} {:>10}", "Other", self.other)?;
        writeln!(f, "{:<8} {:>10}", "Number", self.number)?;
        writeln!(f, "{:<8} {:>10}", "Yes", self.yes)?;
        writeln!(f, "{:<8} {:>10}", "No", self.no)?;
        write!(f, "{:<8} {:>10}", "Total", self.total)
    }
}

/// Merges generated pairs into the source set, assigning fresh question ids
/// and recording provenance.
pub fn merge_training_set(source: &[Question], augment: &[QAPair]) -> Result<Vec<Question>> {
    let mut seen = HashSet::new();
    for q in source {
        if !seen.insert(q.question_id) {
            return Err(ForgeError::IdCollision(q.question_id));
        }
    }
    let mut merged: Vec<Question> = source.to_vec();
    let mut next_id = source.iter().map(|q| q.question_id).max().map(|m| m + 1).unwrap_or(0);
    for pair in augment {
        merged.push(Question {
            question_id: next_id,
            image_id: pair.image_id,
            text: pair.question_text.clone(),
            answer: Some(pair.answer.clone()),
            split: None,
            provenance: Some(Provenance {
                source_question_id: pair.source_question_id,
                premise: pair.source_premise.clone(),
            }),
        });
        next_id += 1;
    }
    Ok(merged)
}
