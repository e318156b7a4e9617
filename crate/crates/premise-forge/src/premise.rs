//! Premises: canonical semantic tuples extracted from questions.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ForgeError, Result};
use crate::graph::{parse_scene_graphs, SceneGraph};
use crate::lexicon::{tokenize_and_tag, TagLexicon, Token};

/// Premise complexity: object presence, object attribute, or
/// subject-relation-object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PremiseOrder {
    First,
    Second,
    Third,
}

/// A canonical semantic tuple of one, two, or three lowercase lemmas.
///
/// The text form is `<a>`, `<a, b>`, or `<a, b, c>` with a single
/// comma+space separator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Premise {
    parts: Vec<String>,
}

impl Premise {
    pub fn first(object: impl Into<String>) -> Premise {
        Premise {
            parts: vec![object.into()],
        }
    }

    pub fn second(object: impl Into<String>, attribute: impl Into<String>) -> Premise {
        Premise {
            parts: vec![object.into(), attribute.into()],
        }
    }

    pub fn third(
        subject: impl Into<String>,
        relation: impl Into<String>,
        object: impl Into<String>,
    ) -> Premise {
        Premise {
            parts: vec![subject.into(), relation.into(), object.into()],
        }
    }

    /// Builds a premise from raw parts without arity validation;
    /// [`Premise::order`] reports `None` for invalid arities.
    pub fn from_parts(parts: Vec<String>) -> Premise {
        Premise { parts }
    }

    pub fn order(&self) -> Option<PremiseOrder> {
        match self.parts.len() {
            1 => Some(PremiseOrder::First),
            2 => Some(PremiseOrder::Second),
            3 => Some(PremiseOrder::Third),
            _ => None,
        }
    }

    pub fn parts(&self) -> &[String] {
        &self.parts
    }

    /// The object lemma: first part for orders 1 and 2, subject for order 3.
    pub fn object(&self) -> &str {
        self.parts.first().map(String::as_str).unwrap_or("")
    }

    pub fn canonical(&self) -> String {
        self.to_string()
    }

    /// Whether any part equals the given lemma.
    pub fn mentions(&self, lemma: &str) -> bool {
        self.parts.iter().any(|p| p == lemma)
    }
}

impl fmt::Display for Premise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.parts.join(", "))
    }
}

impl FromStr for Premise {
    type Err = ForgeError;

    fn from_str(s: &str) -> Result<Premise> {
        let inner = s
            .trim()
            .strip_prefix('<')
            .and_then(|s| s.strip_suffix('>'))
            .ok_or_else(|| ForgeError::BadPremiseArity(s.to_string()))?;
        let parts: Vec<String> = inner.split(", ").map(str::to_string).collect();
        if parts.is_empty() || parts.len() > 3 || parts.iter().any(|p| p.is_empty()) {
            return Err(ForgeError::BadPremiseArity(s.to_string()));
        }
        Ok(Premise { parts })
    }
}

impl Serialize for Premise {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Premise {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Premise, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Coarse question type used by the strict extraction filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuestionClass {
    Existential,
    Counting,
    Other,
}

/// Classifies a question from its tokens.
///
/// Existential: opens with a copular yes/no pattern (is/are/was/were, or
/// "can you see"). Counting: opens with "how many" or "how much".
pub fn classify_question(tokens: &[Token]) -> QuestionClass {
    let lemma = |i: usize| tokens.get(i).map(|t| t.lemma.as_str());
    match lemma(0) {
        Some("is") | Some("are") | Some("was") | Some("were") => QuestionClass::Existential,
        Some("can") if lemma(1) == Some("you") && lemma(2) == Some("see") => {
            QuestionClass::Existential
        }
        Some("how") if matches!(lemma(1), Some("many") | Some("much")) => QuestionClass::Counting,
        _ => QuestionClass::Other,
    }
}

/// Lemmas that refer to the image rather than its content.
#[derive(Debug, Clone)]
pub struct Stoplist {
    lemmas: HashSet<String>,
}

impl Stoplist {
    pub fn bundled() -> Stoplist {
        Stoplist::from_text(include_str!("../data/stoplist.txt"))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Stoplist> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ForgeError::io(path, e))?;
        Ok(Stoplist::from_text(&text))
    }

    fn from_text(text: &str) -> Stoplist {
        Stoplist {
            lemmas: text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        }
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.lemmas.contains(lemma)
    }
}

/// Removes premises containing a stoplist lemma, then duplicates,
/// preserving first occurrence.
pub fn filter_premises(premises: Vec<Premise>, stoplist: &Stoplist) -> Vec<Premise> {
    let mut seen = HashSet::new();
    premises
        .into_iter()
        .filter(|p| !p.parts().iter().any(|part| stoplist.contains(part)))
        .filter(|p| seen.insert(p.clone()))
        .collect()
}

fn graph_premises(graph: &SceneGraph) -> Vec<Premise> {
    let mut out = Vec::new();
    for object in &graph.objects {
        out.push(Premise::first(object.clone()));
    }
    for (obj, attr) in &graph.attributes {
        out.push(Premise::second(graph.objects[*obj].clone(), attr.clone()));
    }
    for (s, rel, o) in &graph.relations {
        out.push(Premise::third(
            graph.objects[*s].clone(),
            rel.clone(),
            graph.objects[*o].clone(),
        ));
    }
    out
}

/// Runs the full extraction pipeline on a question.
///
/// Tokenize, classify, parse, convert graph nodes to premises by order,
/// then filter image-referring lemmas and duplicates. In strict mode,
/// existential and counting questions yield no premises at all.
pub fn extract_premises(
    text: &str,
    lexicon: &TagLexicon,
    stoplist: &Stoplist,
    strict: bool,
) -> Result<Vec<Premise>> {
    let tokens = tokenize_and_tag(text, lexicon)?;
    let class = classify_question(&tokens);
    if strict && class != QuestionClass::Other {
        return Ok(Vec::new());
    }
    let (filtered, _) = parse_scene_graphs(&tokens, lexicon, class);
    Ok(filter_premises(graph_premises(&filtered), stoplist))
}

/// Unfiltered premise set including answer-dependent predicates; used for
/// duplicate detection between generated and source questions.
pub fn extract_premises_raw(
    text: &str,
    lexicon: &TagLexicon,
    stoplist: &Stoplist,
) -> Result<Vec<Premise>> {
    let tokens = tokenize_and_tag(text, lexicon)?;
    let class = classify_question(&tokens);
    let (_, raw) = parse_scene_graphs(&tokens, lexicon, class);
    Ok(filter_premises(graph_premises(&raw), stoplist))
}

/// Extracts premises for a batch of question texts.
pub fn extract_premises_batch(
    texts: &[String],
    lexicon: &TagLexicon,
    stoplist: &Stoplist,
    strict: bool,
) -> Result<Vec<Vec<Premise>>> {
    crate::par::maybe_par_try_map(texts, |t| extract_premises(t, lexicon, stoplist, strict))
}

/// Sequential twin of [`extract_premises_batch`].
pub fn extract_premises_batch_seq(
    texts: &[String],
    lexicon: &TagLexicon,
    stoplist: &Stoplist,
    strict: bool,
) -> Result<Vec<Vec<Premise>>> {
    crate::par::seq_try_map(texts, |t| extract_premises(t, lexicon, stoplist, strict))
}
