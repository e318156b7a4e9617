//! Input encodings: bag-of-words or mean-embedding questions, multi-hot
//! premise vectors, and per-kind feature layouts.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{ForgeError, Result};
use crate::features::EmbeddingTable;
use crate::lexicon::{tokenize_and_tag, TagLexicon};
use crate::premise::{extract_premises, Premise, PremiseOrder, Stoplist};

/// How a text (question or caption) becomes a vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TextMode {
    BagOfWords { vocab: Vec<String> },
    MeanEmbedding { dim: usize },
}

impl TextMode {
    pub fn dim(&self) -> usize {
        match self {
            TextMode::BagOfWords { vocab } => vocab.len(),
            TextMode::MeanEmbedding { dim } => *dim,
        }
    }
}

/// Which inputs a model consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Question + image.
    RelQ,
    /// Question + premises + image.
    RelQP,
    /// Question + caption.
    CapQC,
    /// Premises + caption.
    CapPC,
    /// Question + premises + caption.
    CapQPC,
    /// Single premise + image (false-premise detection).
    Fpd,
}

impl ModelKind {
    pub fn parse(s: &str) -> Result<ModelKind> {
        Ok(match s.to_lowercase().as_str() {
            "relq" | "rel-q" => ModelKind::RelQ,
            "relqp" | "rel-qp" => ModelKind::RelQP,
            "qc-sim" | "capqc" | "qc" => ModelKind::CapQC,
            "pc-sim" | "cappc" | "pc" => ModelKind::CapPC,
            "qpc-sim" | "capqpc" | "qpc" => ModelKind::CapQPC,
            "fpd" => ModelKind::Fpd,
            other => return Err(ForgeError::Invalid(format!("unknown model kind {:?}", other))),
        })
    }

    pub fn uses_question(self) -> bool {
        matches!(self, ModelKind::RelQ | ModelKind::RelQP | ModelKind::CapQC | ModelKind::CapQPC)
    }

    pub fn uses_premises(self) -> bool {
        matches!(self, ModelKind::RelQP | ModelKind::CapPC | ModelKind::CapQPC | ModelKind::Fpd)
    }

    pub fn uses_image(self) -> bool {
        matches!(self, ModelKind::RelQ | ModelKind::RelQP | ModelKind::Fpd)
    }

    pub fn uses_caption(self) -> bool {
        matches!(self, ModelKind::CapQC | ModelKind::CapPC | ModelKind::CapQPC)
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelKind::RelQ => "relq",
            ModelKind::RelQP => "relqp",
            ModelKind::CapQC => "qc-sim",
            ModelKind::CapPC => "pc-sim",
            ModelKind::CapQPC => "qpc-sim",
            ModelKind::Fpd => "fpd",
        };
        f.write_str(s)
    }
}

/// Fixed vocabularies and dimensions shared by training and inference.
///
/// Vocabularies are binary-searched and must be sorted and deduplicated;
/// [`EncodingSpec::normalized`] enforces that for hand-built specs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub question_mode: TextMode,
    pub premise_vocab_1: Vec<String>,
    pub premise_vocab_2: Vec<(String, String)>,
    pub image_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption_mode: Option<TextMode>,
}

fn strictly_sorted<T: Ord>(items: &[T]) -> bool {
    items.windows(2).all(|w| w[0] < w[1])
}

/// One training or evaluation example with concrete inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub question_text: String,
    pub premises: Vec<Premise>,
    pub image_feature: Vec<f64>,
    pub caption: Option<String>,
    pub label: f64,
    pub falsified_order: Option<u8>,
}

impl EncodingSpec {
    /// Derives vocabularies from a question corpus: sorted token lemmas and
    /// sorted order-1/order-2 premises.
    pub fn from_corpus(
        texts: &[String],
        image_dim: usize,
        lexicon: &TagLexicon,
        stoplist: &Stoplist,
    ) -> Result<EncodingSpec> {
        let mut vocab: BTreeSet<String> = BTreeSet::new();
        let mut vocab1: BTreeSet<String> = BTreeSet::new();
        let mut vocab2: BTreeSet<(String, String)> = BTreeSet::new();
        for text in texts {
            for token in tokenize_and_tag(text, lexicon)? {
                vocab.insert(token.lemma);
            }
            for premise in extract_premises(text, lexicon, stoplist, false)? {
                match premise.order() {
                    Some(PremiseOrder::First) => {
                        vocab1.insert(premise.parts()[0].clone());
                    }
                    Some(PremiseOrder::Second) => {
                        vocab2.insert((premise.parts()[0].clone(), premise.parts()[1].clone()));
                    }
                    _ => {}
                }
            }
        }
        Ok(EncodingSpec {
            question_mode: TextMode::BagOfWords {
                vocab: vocab.into_iter().collect(),
            },
            premise_vocab_1: vocab1.into_iter().collect(),
            premise_vocab_2: vocab2.into_iter().collect(),
            image_dim,
            caption_mode: None,
        })
    }

    /// Sorts and deduplicates every vocabulary.
    pub fn normalized(mut self) -> EncodingSpec {
        if let TextMode::BagOfWords { vocab } = &mut self.question_mode {
            vocab.sort();
            vocab.dedup();
        }
        if let Some(TextMode::BagOfWords { vocab }) = &mut self.caption_mode {
            vocab.sort();
            vocab.dedup();
        }
        self.premise_vocab_1.sort();
        self.premise_vocab_1.dedup();
        self.premise_vocab_2.sort();
        self.premise_vocab_2.dedup();
        self
    }

    /// Rejects specs whose vocabularies are not sorted and unique.
    pub fn ensure_sorted(&self) -> Result<()> {
        let text_ok = |mode: &TextMode| match mode {
            TextMode::BagOfWords { vocab } => strictly_sorted(vocab),
            TextMode::MeanEmbedding { .. } => true,
        };
        let ok = text_ok(&self.question_mode)
            && self.caption_mode.as_ref().map(text_ok).unwrap_or(true)
            && strictly_sorted(&self.premise_vocab_1)
            && strictly_sorted(&self.premise_vocab_2);
        if ok {
            Ok(())
        } else {
            Err(ForgeError::Invalid(
                "encoding vocabularies must be sorted and unique; build the spec with \
                 from_corpus or call normalized()"
                    .into(),
            ))
        }
    }

    pub fn question_dim(&self) -> usize {
        self.question_mode.dim()
    }

    pub fn premise_dim(&self) -> usize {
        self.premise_vocab_1.len() + self.premise_vocab_2.len()
    }

    pub fn caption_dim(&self) -> usize {
        self.caption_mode.as_ref().map(TextMode::dim).unwrap_or(0)
    }

    /// Input width for a model of the given kind.
    pub fn input_dim(&self, kind: ModelKind) -> usize {
        let mut dim = 0;
        if kind.uses_question() {
            dim += self.question_dim();
        }
        if kind.uses_premises() {
            dim += self.premise_dim();
        }
        if kind.uses_image() {
            dim += self.image_dim;
        }
        if kind.uses_caption() {
            dim += self.caption_dim();
        }
        dim
    }

    fn encode_text(
        &self,
        mode: &TextMode,
        text: &str,
        lexicon: &TagLexicon,
        embeddings: Option<&EmbeddingTable>,
    ) -> Result<Vec<f64>> {
        let tokens = tokenize_and_tag(text, lexicon)?;
        match mode {
            TextMode::BagOfWords { vocab } => {
                let mut counts = vec![0.0; vocab.len()];
                for token in &tokens {
                    if let Ok(idx) = vocab.binary_search(&token.lemma) {
                        counts[idx] += 1.0;
                    }
                }
                Ok(counts)
            }
            TextMode::MeanEmbedding { dim } => {
                let table = embeddings.ok_or_else(|| {
                    ForgeError::Invalid("mean-embedding encoding needs an embedding table".into())
                })?;
                if table.dim() != *dim {
                    return Err(ForgeError::DimMismatch {
                        expected: *dim,
                        got: table.dim(),
                    });
                }
                Ok(table.mean_embedding(&tokens))
            }
        }
    }

    /// Question text to vector under the spec's question mode.
    pub fn encode_question(
        &self,
        text: &str,
        lexicon: &TagLexicon,
        embeddings: Option<&EmbeddingTable>,
    ) -> Result<Vec<f64>> {
        self.encode_text(&self.question_mode, text, lexicon, embeddings)
    }

    /// Multi-hot over the first-order vocabulary concatenated with multi-hot
    /// over the pair vocabulary. Premises outside the vocabularies are
    /// dropped; third-order premises contribute their component first-order
    /// entries only.
    pub fn encode_premises(&self, premises: &[Premise]) -> Vec<f64> {
        let mut v1 = vec![0.0; self.premise_vocab_1.len()];
        let mut v2 = vec![0.0; self.premise_vocab_2.len()];
        let mark1 = |lemma: &String, v1: &mut Vec<f64>| {
            if let Ok(idx) = self.premise_vocab_1.binary_search(lemma) {
                v1[idx] = 1.0;
            }
        };
        for premise in premises {
            match premise.order() {
                Some(PremiseOrder::First) => mark1(&premise.parts()[0], &mut v1),
                Some(PremiseOrder::Second) => {
                    let key = (premise.parts()[0].clone(), premise.parts()[1].clone());
                    if let Ok(idx) = self.premise_vocab_2.binary_search(&key) {
                        v2[idx] = 1.0;
                    }
                }
                Some(PremiseOrder::Third) => {
                    mark1(&premise.parts()[0], &mut v1);
                    mark1(&premise.parts()[2], &mut v1);
                }
                None => {}
            }
        }
        v1.extend(v2);
        v1
    }

    /// Concatenates the example's parts in the fixed order
    /// question | premises | image | caption, per the model kind.
    pub fn encode_example(
        &self,
        kind: ModelKind,
        example: &LabeledExample,
        lexicon: &TagLexicon,
        embeddings: Option<&EmbeddingTable>,
    ) -> Result<Vec<f64>> {
        let mut input = Vec::with_capacity(self.input_dim(kind));
        if kind.uses_question() {
            input.extend(self.encode_question(&example.question_text, lexicon, embeddings)?);
        }
        if kind.uses_premises() {
            input.extend(self.encode_premises(&example.premises));
        }
        if kind.uses_image() {
            if example.image_feature.len() != self.image_dim {
                return Err(ForgeError::DimMismatch {
                    expected: self.image_dim,
                    got: example.image_feature.len(),
                });
            }
            input.extend(&example.image_feature);
        }
        if kind.uses_caption() {
            let mode = self.caption_mode.as_ref().ok_or_else(|| {
                ForgeError::Invalid("model kind needs a caption mode in the encoding spec".into())
            })?;
            let caption = example
                .caption
                .as_deref()
                .ok_or(ForgeError::MissingCaption(0))?;
            input.extend(self.encode_text(mode, caption, lexicon, embeddings)?);
        }
        Ok(input)
    }
}
