//! Tag lexicon, tokenizer, and word lists.
//!
//! Tags come from a bundled lexicon with suffix-rule fallback: unknown
//! surfaces ending in -s/-es are treated as noun plurals, -ing/-ed forms
//! as verbs. Verbs keep their inflected surface as the lemma; only noun
//! plurals are stripped.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use crate::error::{ForgeError, Result};

/// Part-of-speech tag assigned to each token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Noun,
    Adj,
    Verb,
    Prep,
    Det,
    Wh,
    Num,
    Poss,
    Other,
}

impl Tag {
    fn parse(s: &str) -> Option<Tag> {
        Some(match s {
            "noun" => Tag::Noun,
            "adj" => Tag::Adj,
            "verb" => Tag::Verb,
            "prep" => Tag::Prep,
            "det" => Tag::Det,
            "wh" => Tag::Wh,
            "num" => Tag::Num,
            "poss" => Tag::Poss,
            "other" => Tag::Other,
            _ => None?,
        })
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tag::Noun => "noun",
            Tag::Adj => "adj",
            Tag::Verb => "verb",
            Tag::Prep => "prep",
            Tag::Det => "det",
            Tag::Wh => "wh",
            Tag::Num => "num",
            Tag::Poss => "poss",
            Tag::Other => "other",
        };
        f.write_str(s)
    }
}

/// A tagged token with its surface form and lemma.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub tag: Tag,
}

impl Token {
    fn new(surface: &str, lemma: impl Into<String>, tag: Tag) -> Token {
        Token {
            surface: surface.to_string(),
            lemma: lemma.into(),
            tag,
        }
    }
}

/// Irregular plural forms the suffix rules cannot reach.
const IRREGULAR_PLURALS: &[(&str, &str)] = &[
    ("men", "man"),
    ("women", "woman"),
    ("children", "child"),
    ("feet", "foot"),
    ("teeth", "tooth"),
    ("mice", "mouse"),
    ("geese", "goose"),
    ("oxen", "ox"),
    ("knives", "knife"),
    ("wives", "wife"),
    ("leaves", "leaf"),
    ("loaves", "loaf"),
    ("shelves", "shelf"),
    ("wolves", "wolf"),
    ("calves", "calf"),
    ("scarves", "scarf"),
];

/// Copular and auxiliary verb lemmas; never emitted as relations.
const COPULAS: &[&str] = &["is", "are", "was", "were", "am", "be", "been", "being"];

/// Dummy verbs that carry no premise content of their own.
const DUMMY_VERBS: &[&str] = &[
    "do", "does", "did", "doing", "done", "have", "has", "had", "having", "can", "could", "will",
    "would", "shall", "should", "may", "might", "must", "get", "gets", "got", "gotten", "called",
    "named", "make", "makes", "made", "let", "lets", "say", "says", "said", "go", "goes", "gone",
    "went", "want", "wants",
];

/// Wh-target abstraction nouns: when one of these is the first noun after a
/// question-initial wh word, it names the asked-for quality rather than an
/// object in the image.
const ABSTRACTION_NOUNS: &[&str] = &[
    "brand", "color", "colour", "kind", "type", "sort", "time", "number", "name", "size", "shape",
    "material", "breed", "style", "variety", "species",
];

/// Multi-token prepositions merged into a single token before parsing.
const COMPOUND_PREPS: &[&[&str]] = &[
    &["on", "top", "of"],
    &["in", "front", "of"],
    &["in", "back", "of"],
    &["next", "to"],
    &["close", "to"],
    &["out", "of"],
    &["far", "from"],
];

/// Lemmas that take plural verb agreement in templates.
const PLURAL_LEMMAS: &[&str] = &["people", "pants", "jeans", "shorts", "scissors", "glasses", "clothes"];

/// The tag lexicon plus the auxiliary word lists used across the pipeline.
#[derive(Debug, Clone)]
pub struct TagLexicon {
    tags: HashMap<String, Tag>,
    irregular_plurals: HashMap<String, String>,
    copulas: HashSet<String>,
    dummy_verbs: HashSet<String>,
    abstraction_nouns: HashSet<String>,
    animate: HashSet<String>,
    colors: HashSet<String>,
    plural_lemmas: HashSet<String>,
}

impl TagLexicon {
    /// The lexicon compiled into the binary.
    pub fn bundled() -> TagLexicon {
        let mut lex = TagLexicon::empty();
        lex.extend_from_str(include_str!("../data/lexicon.tsv"), "bundled lexicon")
            .expect("bundled lexicon is well formed");
        lex.animate = parse_word_list(include_str!("../data/animate.txt"));
        lex.colors = parse_word_list(include_str!("../data/colors.txt"));
        lex
    }

    fn empty() -> TagLexicon {
        TagLexicon {
            tags: HashMap::new(),
            irregular_plurals: IRREGULAR_PLURALS
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
            copulas: COPULAS.iter().map(|s| s.to_string()).collect(),
            dummy_verbs: DUMMY_VERBS.iter().map(|s| s.to_string()).collect(),
            abstraction_nouns: ABSTRACTION_NOUNS.iter().map(|s| s.to_string()).collect(),
            animate: HashSet::new(),
            colors: HashSet::new(),
            plural_lemmas: PLURAL_LEMMAS.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Loads a lexicon file, starting from the bundled word lists.
    pub fn load(path: impl AsRef<Path>) -> Result<TagLexicon> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ForgeError::io(path, e))?;
        let mut lex = TagLexicon::bundled();
        lex.tags.clear();
        lex.extend_from_str(&text, path.to_string_lossy().as_ref())?;
        Ok(lex)
    }

    fn extend_from_str(&mut self, text: &str, source: &str) -> Result<()> {
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.splitn(2, '\t');
            let lemma = parts.next().unwrap_or("").trim().to_lowercase();
            let tag = parts.next().map(str::trim).unwrap_or("");
            let tag = Tag::parse(tag).ok_or_else(|| {
                ForgeError::parse(source, idx + 1, format!("unknown tag {:?}", tag))
            })?;
            if lemma.is_empty() {
                return Err(ForgeError::parse(source, idx + 1, "empty lemma"));
            }
            // first entry wins so overrides can be prepended
            self.tags.entry(lemma).or_insert(tag);
        }
        Ok(())
    }

    /// Replaces the animate-noun list from a file.
    pub fn set_animate_from_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ForgeError::io(path, e))?;
        self.animate = parse_word_list(&text);
        Ok(())
    }

    /// Resolves the (lemma, tag) of a lowercased surface form.
    pub fn resolve(&self, surface: &str) -> (String, Tag) {
        if let Some(tag) = self.tags.get(surface) {
            return (surface.to_string(), *tag);
        }
        if let Some(singular) = self.irregular_plurals.get(surface) {
            return (singular.clone(), Tag::Noun);
        }
        if surface.chars().all(|c| c.is_ascii_digit()) && !surface.is_empty() {
            return (surface.to_string(), Tag::Num);
        }
        // -ies plural: cities -> city
        if let Some(stem) = surface.strip_suffix("ies") {
            if stem.len() >= 2 {
                let candidate = format!("{}y", stem);
                match self.tags.get(candidate.as_str()) {
                    Some(Tag::Noun) | None => return (candidate, Tag::Noun),
                    Some(tag) => return (candidate, *tag),
                }
            }
        }
        // -es plural: buses -> bus, dresses -> dress
        if let Some(stem) = surface.strip_suffix("es") {
            if let Some(tag) = self.tags.get(stem) {
                return (stem.to_string(), *tag);
            }
        }
        // -s plural or third person: giraffes -> giraffe, holds -> hold
        if let Some(stem) = surface.strip_suffix('s') {
            if !stem.ends_with('s') && stem.len() >= 2 {
                match self.tags.get(stem) {
                    Some(tag) => return (stem.to_string(), *tag),
                    None => return (stem.to_string(), Tag::Noun),
                }
            }
        }
        // verbal inflections keep their surface as the lemma
        if surface.len() >= 5 && surface.ends_with("ing") {
            return (surface.to_string(), Tag::Verb);
        }
        if surface.len() >= 4 && surface.ends_with("ed") {
            return (surface.to_string(), Tag::Verb);
        }
        (surface.to_string(), Tag::Noun)
    }

    pub fn is_copula(&self, lemma: &str) -> bool {
        self.copulas.contains(lemma)
    }

    pub fn is_dummy_verb(&self, lemma: &str) -> bool {
        self.dummy_verbs.contains(lemma)
    }

    pub fn is_abstraction_noun(&self, lemma: &str) -> bool {
        self.abstraction_nouns.contains(lemma)
    }

    pub fn is_animate(&self, lemma: &str) -> bool {
        self.animate.contains(lemma)
    }

    pub fn is_color(&self, lemma: &str) -> bool {
        self.colors.contains(lemma)
    }

    pub fn is_plural_lemma(&self, lemma: &str) -> bool {
        self.plural_lemmas.contains(lemma)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

fn parse_word_list(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// Splits question text into tagged tokens.
///
/// Units are whitespace-delimited with surrounding punctuation stripped;
/// a possessive marker ('s) becomes its own token.
pub fn tokenize_and_tag(text: &str, lexicon: &TagLexicon) -> Result<Vec<Token>> {
    if text.trim().is_empty() {
        return Err(ForgeError::EmptyQuestion);
    }
    let mut tokens = Vec::new();
    for raw in text.split_whitespace() {
        for piece in raw.split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '-')) {
            let word = piece
                .trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase();
            if word.is_empty() {
                continue;
            }
            let (word, possessive) = match word.strip_suffix("'s") {
                Some(stem) if !stem.is_empty() => (stem.to_string(), true),
                _ => (word.trim_matches('\'').to_string(), false),
            };
            if word.is_empty() {
                continue;
            }
            let (lemma, tag) = lexicon.resolve(&word);
            tokens.push(Token::new(&word, lemma, tag));
            if possessive {
                tokens.push(Token::new("'s", "'s", Tag::Poss));
            }
        }
    }
    if tokens.is_empty() {
        return Err(ForgeError::EmptyQuestion);
    }
    Ok(merge_compound_preps(tokens))
}

fn merge_compound_preps(tokens: Vec<Token>) -> Vec<Token> {
    let mut out: Vec<Token> = Vec::with_capacity(tokens.len());
    let mut i = 0;
    'outer: while i < tokens.len() {
        for compound in COMPOUND_PREPS {
            if i + compound.len() <= tokens.len()
                && compound
                    .iter()
                    .zip(&tokens[i..])
                    .all(|(w, t)| t.surface == *w)
            {
                let lemma = compound.join(" ");
                out.push(Token::new(&lemma, lemma.clone(), Tag::Prep));
                i += compound.len();
                continue 'outer;
            }
        }
        out.push(tokens[i].clone());
        i += 1;
    }
    out
}
