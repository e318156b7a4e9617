//! Premise extraction from visual questions, relevance-dataset construction,
//! templated question generation, and small feed-forward relevance models.
//!
//! A question like "What brand of racket is the man holding?" implies that a
//! relevant image contains a man, a racket, and that the man is holding the
//! racket. This crate extracts those implied facts as canonical tuples and
//! builds everything downstream of them: balanced question-relevance tuples
//! mined from annotation corpora, templated QA pairs for data augmentation,
//! classifiers over precomputed image features, and natural-language
//! explanations for questions whose premises do not hold.

pub mod annotations;
pub mod augment;
pub mod config;
pub mod corpus;
pub mod error;
pub mod explain;
pub mod features;
pub mod graph;
pub mod lexicon;
pub mod nn;
pub mod premise;
pub mod qgen;
pub mod qrpe;
pub mod spice;

mod par;

pub use annotations::{AnnotationStore, ExclusionLexicon, TruthValue};
pub use corpus::Question;
pub use error::{ForgeError, Result};
pub use features::{EmbeddingTable, FeatureStore};
pub use lexicon::{Tag, TagLexicon, Token};
pub use premise::{Premise, PremiseOrder, QuestionClass, Stoplist};
pub use qgen::{AnswerType, QAPair};
pub use qrpe::QrpeTuple;
