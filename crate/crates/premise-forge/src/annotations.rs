//! Object-presence and attribute annotations plus the mutual-exclusion
//! lexicon, answering premise-truth queries per image.
//!
//! Evidence is asymmetric by design: a missing class annotation falsifies a
//! first-order premise (presence annotation is exhaustive over the class
//! vocabulary), while a second-order premise is only falsified by an
//! explicitly annotated attribute that is mutually exclusive with it.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::Deserialize;

use crate::error::{ForgeError, Result};
use crate::premise::{Premise, PremiseOrder};

/// Three-valued truth for premise queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruthValue {
    True,
    False,
    Unknown,
}

#[derive(Debug, Deserialize)]
struct ObjectsRecord {
    image_id: u64,
    classes: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct AttributesRecord {
    image_id: u64,
    pairs: Vec<(String, String)>,
}

/// Class-presence annotations over a fixed class vocabulary.
#[derive(Debug, Clone, Default)]
pub struct ObjectAnnotations {
    class_vocab: Vec<String>,
    class_index: HashMap<String, usize>,
    presence: HashMap<u64, HashSet<usize>>,
}

impl ObjectAnnotations {
    fn class_id(&mut self, class: &str) -> usize {
        if let Some(&i) = self.class_index.get(class) {
            return i;
        }
        self.class_vocab.push(class.to_string());
        self.class_index.insert(class.to_string(), self.class_vocab.len() - 1);
        self.class_vocab.len() - 1
    }

    pub fn class_vocab(&self) -> &[String] {
        &self.class_vocab
    }

    pub fn presence(&self, image_id: u64) -> impl Iterator<Item = &str> {
        self.presence
            .get(&image_id)
            .into_iter()
            .flatten()
            .map(|i| self.class_vocab[*i].as_str())
    }
}

/// Per-image (object, attribute) pairs.
#[derive(Debug, Clone, Default)]
pub struct AttributeAnnotations {
    pairs: HashMap<u64, HashSet<(String, String)>>,
}

/// Antonym pairs and taxonomic sister groups.
#[derive(Debug, Clone, Default)]
pub struct ExclusionLexicon {
    antonyms: HashSet<(String, String)>,
    sisters: Vec<HashSet<String>>,
}

impl ExclusionLexicon {
    pub fn bundled() -> ExclusionLexicon {
        ExclusionLexicon::from_text(include_str!("../data/exclusions.txt"), "bundled exclusions")
            .expect("bundled exclusion lexicon is well formed")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ExclusionLexicon> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ForgeError::io(path, e))?;
        ExclusionLexicon::from_text(&text, path.to_string_lossy().as_ref())
    }

    fn from_text(text: &str, source: &str) -> Result<ExclusionLexicon> {
        let mut lexicon = ExclusionLexicon::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace().map(str::to_lowercase);
            let keyword = parts.next().unwrap_or_default();
            let rest: Vec<String> = parts.collect();
            match keyword.as_str() {
                "antonym" => {
                    if rest.len() != 2 {
                        return Err(ForgeError::parse(source, idx + 1, "ANTONYM needs two lemmas"));
                    }
                    if rest[0] == rest[1] {
                        return Err(ForgeError::parse(source, idx + 1, "lemma paired with itself"));
                    }
                    lexicon.add_antonym(&rest[0], &rest[1]);
                }
                "sister" => {
                    if rest.len() < 2 {
                        return Err(ForgeError::parse(source, idx + 1, "SISTER needs two or more lemmas"));
                    }
                    lexicon.sisters.push(rest.into_iter().collect());
                }
                other => {
                    return Err(ForgeError::parse(source, idx + 1, format!("unknown keyword {:?}", other)));
                }
            }
        }
        Ok(lexicon)
    }

    pub fn add_antonym(&mut self, a: &str, b: &str) {
        let (a, b) = (a.to_lowercase(), b.to_lowercase());
        let pair = if a <= b { (a, b) } else { (b, a) };
        self.antonyms.insert(pair);
    }

    pub fn add_sister_group(&mut self, lemmas: impl IntoIterator<Item = String>) {
        self.sisters.push(lemmas.into_iter().map(|s| s.to_lowercase()).collect());
    }

    /// True iff the lemmas are an antonym pair or share a sister group;
    /// a lemma is never exclusive with itself.
    pub fn mutually_exclusive(&self, a: &str, b: &str) -> bool {
        if a == b {
            return false;
        }
        let pair = if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        if self.antonyms.contains(&pair) {
            return true;
        }
        self.sisters
            .iter()
            .any(|group| group.contains(a) && group.contains(b))
    }
}

/// Immutable store over object, attribute, alias, and exclusion data.
#[derive(Debug, Clone)]
pub struct AnnotationStore {
    objects: ObjectAnnotations,
    attributes: AttributeAnnotations,
    exclusions: ExclusionLexicon,
    aliases: HashMap<String, String>,
}

impl AnnotationStore {
    /// Loads the store from JSONL object/attribute files and an exclusion
    /// lexicon file. Lemmas are lowercased; unknown JSON fields are ignored.
    pub fn load(
        objects_path: impl AsRef<Path>,
        attributes_path: impl AsRef<Path>,
        lexicon_path: impl AsRef<Path>,
    ) -> Result<AnnotationStore> {
        let exclusions = ExclusionLexicon::load(lexicon_path)?;
        AnnotationStore::load_with_exclusions(objects_path, attributes_path, exclusions)
    }

    /// Like [`AnnotationStore::load`] but with the compiled-in exclusion
    /// lexicon.
    pub fn load_with_bundled_exclusions(
        objects_path: impl AsRef<Path>,
        attributes_path: impl AsRef<Path>,
    ) -> Result<AnnotationStore> {
        AnnotationStore::load_with_exclusions(
            objects_path,
            attributes_path,
            ExclusionLexicon::bundled(),
        )
    }

    fn load_with_exclusions(
        objects_path: impl AsRef<Path>,
        attributes_path: impl AsRef<Path>,
        exclusions: ExclusionLexicon,
    ) -> Result<AnnotationStore> {
        let mut store = AnnotationStore::empty(exclusions);
        let object_records: Vec<ObjectsRecord> = crate::corpus::read_jsonl(objects_path)?;
        for record in object_records {
            store.add_object_record(record.image_id, &record.classes);
        }
        let attr_records: Vec<AttributesRecord> = crate::corpus::read_jsonl(attributes_path)?;
        for record in attr_records {
            store.add_attribute_record(record.image_id, &record.pairs);
        }
        Ok(store)
    }

    pub fn empty(exclusions: ExclusionLexicon) -> AnnotationStore {
        AnnotationStore {
            objects: ObjectAnnotations::default(),
            attributes: AttributeAnnotations::default(),
            exclusions,
            aliases: HashMap::new(),
        }
    }

    pub fn add_object_record(&mut self, image_id: u64, classes: &[String]) {
        let mut ids = Vec::new();
        for class in classes {
            let class = class.trim().to_lowercase();
            if !class.is_empty() {
                ids.push(self.objects.class_id(&class));
            }
        }
        self.objects.presence.entry(image_id).or_default().extend(ids);
    }

    pub fn add_attribute_record(&mut self, image_id: u64, pairs: &[(String, String)]) {
        let entry = self.attributes.pairs.entry(image_id).or_default();
        for (obj, attr) in pairs {
            entry.insert((obj.trim().to_lowercase(), attr.trim().to_lowercase()));
        }
    }

    /// Loads "alias canonical" lines mapping question lemmas onto the class
    /// vocabulary.
    pub fn load_aliases(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ForgeError::io(path, e))?;
        self.add_aliases_from_text(&text, path.to_string_lossy().as_ref())
    }

    pub fn bundled_aliases(&mut self) {
        self.add_aliases_from_text(include_str!("../data/aliases.txt"), "bundled aliases")
            .expect("bundled alias file is well formed");
    }

    fn add_aliases_from_text(&mut self, text: &str, source: &str) -> Result<()> {
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.splitn(2, char::is_whitespace);
            let alias = parts.next().unwrap_or("").trim().to_lowercase();
            let canonical = parts.next().unwrap_or("").trim().to_lowercase();
            if alias.is_empty() || canonical.is_empty() {
                return Err(ForgeError::parse(source, idx + 1, "expected: alias canonical"));
            }
            self.aliases.insert(alias, canonical);
        }
        Ok(())
    }

    fn resolve<'a>(&'a self, lemma: &'a str) -> &'a str {
        self.aliases.get(lemma).map(String::as_str).unwrap_or(lemma)
    }

    pub fn exclusions(&self) -> &ExclusionLexicon {
        &self.exclusions
    }

    pub fn class_vocab(&self) -> &[String] {
        self.objects.class_vocab()
    }

    /// All image ids mentioned by either annotation file, in ascending order.
    pub fn image_ids(&self) -> BTreeSet<u64> {
        self.objects
            .presence
            .keys()
            .chain(self.attributes.pairs.keys())
            .copied()
            .collect()
    }

    fn attribute_pairs(&self, image_id: u64) -> impl Iterator<Item = &(String, String)> {
        self.attributes.pairs.get(&image_id).into_iter().flatten()
    }

    /// Evaluates an order-1 or order-2 premise against one image.
    pub fn premise_holds(&self, premise: &Premise, image_id: u64) -> Result<TruthValue> {
        match premise.order() {
            Some(PremiseOrder::First) => {
                let class = self.resolve(premise.object());
                let Some(&idx) = self.objects.class_index.get(class) else {
                    return Ok(TruthValue::Unknown);
                };
                let present = self
                    .objects
                    .presence
                    .get(&image_id)
                    .map(|set| set.contains(&idx))
                    .unwrap_or(false);
                Ok(if present { TruthValue::True } else { TruthValue::False })
            }
            Some(PremiseOrder::Second) => {
                let object = premise.parts()[0].as_str();
                let attribute = premise.parts()[1].as_str();
                let alias = self.resolve(object);
                let matches_object = |o: &str| o == object || o == alias;
                if self
                    .attribute_pairs(image_id)
                    .any(|(o, a)| matches_object(o) && a == attribute)
                {
                    return Ok(TruthValue::True);
                }
                let falsified = self.attribute_pairs(image_id).any(|(o, a)| {
                    matches_object(o) && self.exclusions.mutually_exclusive(attribute, a)
                });
                Ok(if falsified { TruthValue::False } else { TruthValue::Unknown })
            }
            _ => Err(ForgeError::UnsupportedPremiseOrder(premise.to_string())),
        }
    }
}
