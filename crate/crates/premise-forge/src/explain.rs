//! Templated natural-language explanations for false premises.

use serde::{Deserialize, Serialize};

use crate::annotations::{AnnotationStore, TruthValue};
use crate::error::{ForgeError, Result};
use crate::lexicon::TagLexicon;
use crate::nn::{fpd_predict, EncodingSpec, MlpModel};
use crate::premise::{extract_premises, Premise, PremiseOrder, Stoplist};

/// A false premise with its explanation sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub premise: Premise,
    pub sentence: String,
}

/// Renders the explanation template for an order-1 or order-2 premise.
pub fn explain_premise(premise: &Premise) -> Result<Explanation> {
    let parts = premise.parts();
    let sentence = match premise.order() {
        Some(PremiseOrder::First) => format!("There is no {} in the image.", parts[0]),
        Some(PremiseOrder::Second) => format!("The {} is not {}.", parts[0], parts[1]),
        _ => return Err(ForgeError::UnsupportedPremiseOrder(premise.canonical())),
    };
    Ok(Explanation {
        premise: premise.clone(),
        sentence,
    })
}

/// Relevance verdict for one question against one image.
#[derive(Debug, Clone, PartialEq)]
pub enum RelevanceOutcome {
    Relevant,
    FalsePremises(Vec<Explanation>),
}

fn checkable(premises: &[Premise]) -> impl Iterator<Item = &Premise> {
    premises.iter().filter(|p| {
        matches!(
            p.order(),
            Some(PremiseOrder::First) | Some(PremiseOrder::Second)
        )
    })
}

fn outcome_from_flags(premises_with_flags: Vec<(&Premise, bool)>) -> Result<RelevanceOutcome> {
    let mut explanations = Vec::new();
    for (premise, is_false) in premises_with_flags {
        if is_false {
            explanations.push(explain_premise(premise)?);
        }
    }
    Ok(if explanations.is_empty() {
        RelevanceOutcome::Relevant
    } else {
        RelevanceOutcome::FalsePremises(explanations)
    })
}

/// Evaluates each order-1/2 premise with the false-premise detector and
/// explains the false ones, in premise order.
pub fn explain_question_with_model(
    question_text: &str,
    image_feature: &[f64],
    model: &MlpModel,
    spec: &EncodingSpec,
    lexicon: &TagLexicon,
    stoplist: &Stoplist,
) -> Result<RelevanceOutcome> {
    let premises = extract_premises(question_text, lexicon, stoplist, true)?;
    let mut flagged = Vec::new();
    for premise in checkable(&premises) {
        let grounded = fpd_predict(model, spec, premise, image_feature, lexicon)?;
        flagged.push((premise, !grounded));
    }
    outcome_from_flags(flagged)
}

/// Same, but judging premises against annotation ground truth; only an
/// explicit False counts as a false premise.
pub fn explain_question_with_store(
    question_text: &str,
    image_id: u64,
    store: &AnnotationStore,
    lexicon: &TagLexicon,
    stoplist: &Stoplist,
) -> Result<RelevanceOutcome> {
    let premises = extract_premises(question_text, lexicon, stoplist, true)?;
    let mut flagged = Vec::new();
    for premise in checkable(&premises) {
        let truth = store.premise_holds(premise, image_id)?;
        flagged.push((premise, truth == TruthValue::False));
    }
    outcome_from_flags(flagged)
}
