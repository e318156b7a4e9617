//! Templated QA-pair generation from premises, with tuple-similarity
//! deduplication against the source question.

use serde::{Deserialize, Serialize};

use crate::corpus::Question;
use crate::error::{ForgeError, Result};
use crate::lexicon::{Tag, TagLexicon};
use crate::premise::{
    classify_question, extract_premises, extract_premises_raw, Premise, PremiseOrder,
    QuestionClass, Stoplist,
};
use crate::spice::spice_f1;

/// Answer type of a QA pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerType {
    Yes,
    No,
    Number,
    Other,
}

const NUMBER_WORDS: &[&str] = &[
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
    "nineteen", "twenty",
];

/// Classifies an answer string: "yes"/"no", numerals and small number
/// words, else other.
pub fn classify_answer(answer: &str) -> AnswerType {
    let a = answer.trim().to_lowercase();
    if a == "yes" {
        AnswerType::Yes
    } else if a == "no" {
        AnswerType::No
    } else if !a.is_empty()
        && (a.chars().all(|c| c.is_ascii_digit())
            || a.parse::<f64>().is_ok()
            || NUMBER_WORDS.contains(&a.as_str()))
    {
        AnswerType::Number
    } else {
        AnswerType::Other
    }
}

/// A generated question-answer pair with its source premise.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QAPair {
    #[serde(rename = "question")]
    pub question_text: String,
    pub answer: String,
    pub answer_type: AnswerType,
    #[serde(rename = "premise")]
    pub source_premise: Premise,
    pub source_question_id: u64,
    pub image_id: u64,
}

impl QAPair {
    fn new(question_text: String, answer: impl Into<String>, premise: &Premise) -> QAPair {
        let answer = answer.into();
        QAPair {
            question_text,
            answer_type: classify_answer(&answer),
            answer,
            source_premise: premise.clone(),
            source_question_id: 0,
            image_id: 0,
        }
    }
}

fn fnv1a64(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn article(word: &str) -> &'static str {
    match word.chars().next() {
        Some('a') | Some('e') | Some('i') | Some('o') | Some('u') => "an",
        _ => "a",
    }
}

fn copula(lexicon: &TagLexicon, lemma: &str) -> &'static str {
    if lexicon.is_plural_lemma(lemma) {
        "are"
    } else {
        "is"
    }
}

fn existential(premise: &Premise, lemma: &str, lexicon: &TagLexicon) -> QAPair {
    let text = if lexicon.is_plural_lemma(lemma) {
        format!("Can you see {} in the image?", lemma)
    } else if fnv1a64(&premise.canonical()).count_ones() % 2 == 0 {
        format!("Is there {} {}?", article(lemma), lemma)
    } else {
        format!("Is there {} {} in the image?", article(lemma), lemma)
    };
    QAPair::new(text, "yes", premise)
}

fn is_existential_template(text: &str) -> bool {
    let t = text.to_lowercase();
    t.starts_with("is there ") || t.starts_with("can you see ")
}

/// Instantiates the question templates for one premise.
///
/// First order gives an existential question. Second order picks a template
/// by attribute kind: color, verbal, noun modifier, or plain yes/no. Third
/// order gives a pair of wh-questions with the subject and object answered
/// respectively.
pub fn generate_qa(premise: &Premise, lexicon: &TagLexicon) -> Result<Vec<QAPair>> {
    let order = premise
        .order()
        .ok_or_else(|| ForgeError::BadPremiseArity(premise.canonical()))?;
    if premise.parts().iter().any(|p| p.trim().is_empty()) {
        return Err(ForgeError::BadPremiseArity(premise.canonical()));
    }
    let parts = premise.parts();
    Ok(match order {
        PremiseOrder::First => vec![existential(premise, &parts[0], lexicon)],
        PremiseOrder::Second => {
            let (object, attribute) = (parts[0].as_str(), parts[1].as_str());
            let be = copula(lexicon, object);
            if lexicon.is_color(attribute) {
                vec![QAPair::new(
                    format!("What is the color of the {}?", object),
                    attribute,
                    premise,
                )]
            } else {
                match lexicon.resolve(attribute).1 {
                    Tag::Verb => vec![QAPair::new(
                        format!("What {} the {} doing?", be, object),
                        attribute,
                        premise,
                    )],
                    Tag::Noun => vec![QAPair::new(
                        format!("Is there {} {} {}?", article(attribute), attribute, object),
                        "yes",
                        premise,
                    )],
                    _ => vec![QAPair::new(
                        format!(
                            "{} the {} {}?",
                            if be == "are" { "Are" } else { "Is" },
                            object,
                            attribute
                        ),
                        "yes",
                        premise,
                    )],
                }
            }
        }
        PremiseOrder::Third => {
            let (subject, relation, object) = (parts[0].as_str(), parts[1].as_str(), parts[2].as_str());
            if relation == "has" {
                let second = if lexicon.is_animate(subject) {
                    QAPair::new(
                        format!("Who has {} {}?", article(object), object),
                        subject,
                        premise,
                    )
                } else {
                    QAPair::new(
                        format!("What has {} {}?", article(object), object),
                        subject,
                        premise,
                    )
                };
                vec![
                    QAPair::new(
                        format!("What does the {} have?", subject),
                        object,
                        premise,
                    ),
                    second,
                ]
            } else {
                let first = QAPair::new(
                    format!("What {} the {} {}?", copula(lexicon, subject), subject, relation),
                    object,
                    premise,
                );
                let second = if lexicon.is_animate(subject) {
                    QAPair::new(format!("Who is {} the {}?", relation, object), subject, premise)
                } else {
                    QAPair::new(format!("What is {} the {}?", relation, object), subject, premise)
                };
                vec![first, second]
            }
        }
    })
}

/// Generates QA pairs for every premise of a question (non-strict
/// extraction), dropping near-duplicates of the source question.
///
/// A pair is dropped when its text equals the source text case-insensitively,
/// or when it is an existential rewrite of an already-existential source
/// whose tuple F1 against the source premises reaches the threshold.
pub fn generate_for_question(
    question: &Question,
    lexicon: &TagLexicon,
    stoplist: &Stoplist,
    threshold: f64,
) -> Result<Vec<QAPair>> {
    let premises = extract_premises(&question.text, lexicon, stoplist, false)?;
    let source_raw = extract_premises_raw(&question.text, lexicon, stoplist)?;
    let tokens = crate::lexicon::tokenize_and_tag(&question.text, lexicon)?;
    let source_existential = classify_question(&tokens) == QuestionClass::Existential;

    let mut out = Vec::new();
    for premise in &premises {
        for pair in generate_qa(premise, lexicon)? {
            if pair.question_text.eq_ignore_ascii_case(question.text.trim()) {
                continue;
            }
            if source_existential && is_existential_template(&pair.question_text) {
                let gen_premises = extract_premises_raw(&pair.question_text, lexicon, stoplist)?;
                if spice_f1(&gen_premises, &source_raw) >= threshold {
                    continue;
                }
            }
            let mut pair = pair;
            pair.source_question_id = question.question_id;
            pair.image_id = question.image_id;
            out.push(pair);
        }
    }
    Ok(out)
}

/// Generates pairs for a whole corpus, in question order.
pub fn generate_for_corpus(
    questions: &[Question],
    lexicon: &TagLexicon,
    stoplist: &Stoplist,
    threshold: f64,
) -> Result<Vec<QAPair>> {
    let per_question = crate::par::maybe_par_try_map(questions, |q| {
        generate_for_question(q, lexicon, stoplist, threshold)
    })?;
    Ok(per_question.into_iter().flatten().collect())
}
