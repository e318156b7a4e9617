//! Shallow rule-based scene-graph parsing of question token streams.
//!
//! Noun phrases become object nodes, adjectives and noun modifiers become
//! attributes, and verbs/prepositions/possessives linking two objects become
//! relations. Predicates whose truth depends on the answer of a yes/no or
//! counting question (predicative adjectives, trailing gerunds) are kept in
//! a separate raw graph used only for duplicate detection.

use crate::lexicon::{Tag, TagLexicon, Token};
use crate::premise::QuestionClass;

/// Objects, attribute edges, and relation edges parsed from one question.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SceneGraph {
    /// Object lemmas, unique, in token order of first occurrence.
    pub objects: Vec<String>,
    /// (object index, attribute lemma) in token order.
    pub attributes: Vec<(usize, String)>,
    /// (subject index, relation lemma, object index) in token order.
    pub relations: Vec<(usize, String, usize)>,
}

#[derive(Debug, Clone)]
struct Edge<T> {
    pos: usize,
    payload: T,
    answer_dependent: bool,
}

struct Parser<'a> {
    tokens: &'a [Token],
    lexicon: &'a TagLexicon,
    class: QuestionClass,
    skip: Vec<bool>,
    objects: Vec<String>,
    /// (token position of head, node index), in token order.
    occurrences: Vec<(usize, usize)>,
    attributes: Vec<Edge<(usize, String)>>,
    relations: Vec<Edge<(usize, String, usize)>>,
    consumed_preps: Vec<bool>,
}

/// Parses tokens into a scene graph, excluding answer-dependent predicates.
pub fn parse_scene_graph(tokens: &[Token], lexicon: &TagLexicon) -> SceneGraph {
    let class = crate::premise::classify_question(tokens);
    parse_scene_graphs(tokens, lexicon, class).0
}

/// Parses tokens into (filtered, raw) graphs. The raw graph additionally
/// carries answer-dependent predicates and is used for duplicate detection.
pub(crate) fn parse_scene_graphs(
    tokens: &[Token],
    lexicon: &TagLexicon,
    class: QuestionClass,
) -> (SceneGraph, SceneGraph) {
    let n = tokens.len();
    let mut p = Parser {
        tokens,
        lexicon,
        class,
        skip: vec![false; n],
        objects: Vec::new(),
        occurrences: Vec::new(),
        attributes: Vec::new(),
        relations: Vec::new(),
        consumed_preps: vec![false; n],
    };
    p.mark_wh_abstraction();
    p.collect_objects();
    p.attach_adjectives();
    p.link_verbs();
    p.link_possessives();
    p.link_prepositions();
    p.finish()
}

impl<'a> Parser<'a> {
    /// The first noun after a question-initial wh word names the asked-for
    /// quality rather than an object when it is an abstraction noun sitting
    /// right after the wh word ("what color is ...") or heading an of-phrase
    /// ("what is the color of ..."). Concrete wh-adjacent nouns are kept.
    fn mark_wh_abstraction(&mut self) {
        if self.tokens.first().map(|t| t.tag) != Some(Tag::Wh) {
            return;
        }
        if let Some(i) = self.tokens.iter().position(|t| t.tag == Tag::Noun) {
            let adjacent = i == 1;
            let of_phrase = self.tokens.get(i + 1).map(|t| t.lemma.as_str()) == Some("of");
            if (adjacent || of_phrase) && self.lexicon.is_abstraction_noun(&self.tokens[i].lemma) {
                self.skip[i] = true;
            }
        }
    }

    fn is_object_noun(&self, i: usize) -> bool {
        self.tokens[i].tag == Tag::Noun && !self.skip[i]
    }

    /// Head position of the noun run containing position `i`.
    fn run_head(&self, i: usize) -> usize {
        let mut h = i;
        while h + 1 < self.tokens.len() && self.is_object_noun(h + 1) {
            h += 1;
        }
        h
    }

    fn intern(&mut self, lemma: &str) -> usize {
        match self.objects.iter().position(|o| o == lemma) {
            Some(idx) => idx,
            None => {
                self.objects.push(lemma.to_string());
                self.objects.len() - 1
            }
        }
    }

    /// Maximal noun runs become objects; run modifiers attach to the head
    /// ("safety jacket" -> jacket with attribute safety).
    fn collect_objects(&mut self) {
        let n = self.tokens.len();
        let mut i = 0;
        while i < n {
            if !self.is_object_noun(i) {
                i += 1;
                continue;
            }
            let head = self.run_head(i);
            let node = self.intern(&self.tokens[head].lemma.clone());
            self.occurrences.push((head, node));
            for k in i..head {
                let lemma = self.tokens[k].lemma.clone();
                if lemma != self.objects[node] {
                    self.attributes.push(Edge {
                        pos: k,
                        payload: (node, lemma),
                        answer_dependent: false,
                    });
                }
            }
            i = head + 1;
        }
    }

    fn node_at(&self, pos: usize) -> Option<usize> {
        self.occurrences
            .iter()
            .find(|(p, _)| *p == pos)
            .map(|(_, n)| *n)
    }

    fn last_occurrence_before(&self, pos: usize) -> Option<(usize, usize)> {
        self.occurrences
            .iter()
            .rev()
            .find(|(p, _)| *p < pos)
            .copied()
    }

    /// Next object head strictly after `pos`, skipping determiners,
    /// adjectives, and numerals.
    fn object_after(&self, pos: usize) -> Option<(usize, usize)> {
        let mut j = pos + 1;
        while j < self.tokens.len() {
            match self.tokens[j].tag {
                Tag::Det | Tag::Adj | Tag::Num => j += 1,
                Tag::Noun if !self.skip[j] => {
                    let h = self.run_head(j);
                    return self.node_at(h).map(|n| (h, n));
                }
                _ => return None,
            }
        }
        None
    }

    fn binary_question(&self) -> bool {
        matches!(
            self.class,
            QuestionClass::Existential | QuestionClass::Counting
        )
    }

    fn attach_adjectives(&mut self) {
        let n = self.tokens.len();
        for i in 0..n {
            if self.tokens[i].tag != Tag::Adj {
                continue;
            }
            let mut j = i + 1;
            while j < n && self.tokens[j].tag == Tag::Adj {
                j += 1;
            }
            if j < n && self.is_object_noun(j) {
                let h = self.run_head(j);
                if let Some(node) = self.node_at(h) {
                    self.attributes.push(Edge {
                        pos: i,
                        payload: (node, self.tokens[i].lemma.clone()),
                        answer_dependent: false,
                    });
                }
            } else if let Some((_, node)) = self.last_occurrence_before(i) {
                // predicative: "Is the dog old?" is only answered by the image
                self.attributes.push(Edge {
                    pos: i,
                    payload: (node, self.tokens[i].lemma.clone()),
                    answer_dependent: self.binary_question(),
                });
            }
        }
    }

    fn link_verbs(&mut self) {
        let n = self.tokens.len();
        for i in 0..n {
            let t = &self.tokens[i];
            if t.tag != Tag::Verb
                || self.lexicon.is_copula(&t.lemma)
                || self.lexicon.is_dummy_verb(&t.lemma)
            {
                continue;
            }
            let subject = self.last_occurrence_before(i);
            // an immediately following preposition may be part of the
            // relation ("looking at", "swing at")
            let prep = match self.tokens.get(i + 1) {
                Some(p) if p.tag == Tag::Prep => Some((i + 1, p.lemma.clone())),
                _ => None,
            };
            let scan_from = prep.as_ref().map(|(j, _)| *j).unwrap_or(i);
            let object = self.object_after(scan_from);

            match (subject, object) {
                (Some((_, s)), Some((_, o))) if s != o => {
                    let lemma = match &prep {
                        Some((j, p)) => {
                            self.consumed_preps[*j] = true;
                            format!("{} {}", t.lemma, p)
                        }
                        None => t.lemma.clone(),
                    };
                    self.relations.push(Edge {
                        pos: i,
                        payload: (s, lemma, o),
                        answer_dependent: false,
                    });
                }
                (Some((spos, s)), _) => {
                    // no object to the right; a wh-moved object may sit
                    // before the copula ("What brand of racket is the man
                    // holding?")
                    let fronted = self
                        .tokens
                        .iter()
                        .enumerate()
                        .position(|(j, tk)| {
                            j < spos && tk.tag == Tag::Verb && self.lexicon.is_copula(&tk.lemma)
                        })
                        .and_then(|cop| self.last_occurrence_before(cop));
                    match fronted {
                        Some((_, o)) if o != s => {
                            self.relations.push(Edge {
                                pos: i,
                                payload: (s, t.lemma.clone(), o),
                                answer_dependent: false,
                            });
                        }
                        _ => {
                            // intransitive in context: an attribute, except in
                            // a wh-question with the verb's object extracted
                            // ("What is the man holding?")
                            let wh_extracted = self.tokens[0].tag == Tag::Wh && prep.is_none();
                            if !wh_extracted {
                                self.attributes.push(Edge {
                                    pos: i,
                                    payload: (s, t.lemma.clone()),
                                    answer_dependent: self.binary_question(),
                                });
                            }
                        }
                    }
                }
                _ => {}
            }
        }
    }

    /// NOUN's NOUN yields both objects plus a `has` relation.
    fn link_possessives(&mut self) {
        for i in 0..self.tokens.len() {
            if self.tokens[i].tag != Tag::Poss || i == 0 {
                continue;
            }
            let owner = self.node_at(i - 1).or_else(|| {
                self.last_occurrence_before(i).map(|(_, n)| n)
            });
            if let (Some(s), Some((_, o))) = (owner, self.object_after(i)) {
                if s != o {
                    self.relations.push(Edge {
                        pos: i,
                        payload: (s, "has".to_string(), o),
                        answer_dependent: false,
                    });
                }
            }
        }
    }

    fn link_prepositions(&mut self) {
        for i in 0..self.tokens.len() {
            if self.tokens[i].tag != Tag::Prep || self.consumed_preps[i] {
                continue;
            }
            let left = self.last_occurrence_before(i);
            let right = self.object_after(i);
            if let (Some((_, s)), Some((_, o))) = (left, right) {
                if s != o {
                    self.relations.push(Edge {
                        pos: i,
                        payload: (s, self.tokens[i].lemma.clone(), o),
                        answer_dependent: false,
                    });
                }
            }
        }
    }

    fn finish(mut self) -> (SceneGraph, SceneGraph) {
        self.attributes.sort_by_key(|e| e.pos);
        self.relations.sort_by_key(|e| e.pos);

        let mut filtered = SceneGraph {
            objects: self.objects.clone(),
            ..Default::default()
        };
        let mut raw = filtered.clone();

        for edge in &self.attributes {
            if !raw.attributes.contains(&edge.payload) {
                raw.attributes.push(edge.payload.clone());
            }
            if !edge.answer_dependent && !filtered.attributes.contains(&edge.payload) {
                filtered.attributes.push(edge.payload.clone());
            }
        }
        for edge in &self.relations {
            if !raw.relations.contains(&edge.payload) {
                raw.relations.push(edge.payload.clone());
            }
            if !edge.answer_dependent && !filtered.relations.contains(&edge.payload) {
                filtered.relations.push(edge.payload.clone());
            }
        }
        (filtered, raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::tokenize_and_tag;

    fn parse(text: &str) -> SceneGraph {
        let lex = TagLexicon::bundled();
        let tokens = tokenize_and_tag(text, &lex).unwrap();
        parse_scene_graph(&tokens, &lex)
    }

    #[test]
    fn attributes_attach_to_merged_object() {
        let g = parse("What kind of building is the large white building?");
        assert_eq!(g.objects, vec!["building"]);
        assert_eq!(
            g.attributes,
            vec![(0, "large".to_string()), (0, "white".to_string())]
        );
        assert!(g.relations.is_empty());
    }

    #[test]
    fn wh_moved_object_becomes_relation() {
        let g = parse("What brand of racket is the man holding?");
        assert_eq!(g.objects, vec!["racket", "man"]);
        assert!(g.attributes.is_empty());
        assert_eq!(g.relations, vec![(1, "holding".to_string(), 0)]);
    }

    #[test]
    fn possessive_yields_has_relation() {
        let g = parse("What color is the cat's tie?");
        assert_eq!(g.objects, vec!["cat", "tie"]);
        assert_eq!(g.relations, vec![(0, "has".to_string(), 1)]);
    }

    #[test]
    fn trailing_gerund_in_binary_question_is_raw_only() {
        let lex = TagLexicon::bundled();
        let tokens = tokenize_and_tag("Is the little girl moving?", &lex).unwrap();
        let class = crate::premise::classify_question(&tokens);
        let (filtered, raw) = parse_scene_graphs(&tokens, &lex, class);
        assert_eq!(filtered.objects, vec!["girl"]);
        assert_eq!(filtered.attributes, vec![(0, "little".to_string())]);
        assert_eq!(
            raw.attributes,
            vec![(0, "little".to_string()), (0, "moving".to_string())]
        );
    }

    #[test]
    fn gerund_with_dangling_preposition_is_kept_in_wh_question() {
        let g = parse("What is the child sitting on?");
        assert_eq!(g.objects, vec!["child"]);
        assert_eq!(g.attributes, vec![(0, "sitting".to_string())]);
        assert!(g.relations.is_empty());
    }

    #[test]
    fn wh_extracted_verb_object_yields_no_edge() {
        let g = parse("What is the man holding?");
        assert_eq!(g.objects, vec!["man"]);
        assert!(g.attributes.is_empty());
        assert!(g.relations.is_empty());
    }

    #[test]
    fn verb_preposition_combinations_merge() {
        let g = parse("Why is the man looking at the lady?");
        assert_eq!(g.objects, vec!["man", "lady"]);
        assert_eq!(g.relations, vec![(0, "looking at".to_string(), 1)]);
    }

    #[test]
    fn preposition_links_two_objects() {
        let g = parse("Is the cat on top of the box?");
        assert_eq!(g.objects, vec!["cat", "box"]);
        assert_eq!(g.relations, vec![(0, "on top of".to_string(), 1)]);
    }

    #[test]
    fn noun_modifiers_become_attributes() {
        let g = parse("How many people are wearing safety jackets?");
        assert_eq!(g.objects, vec!["people", "jacket"]);
        assert_eq!(g.attributes, vec![(1, "safety".to_string())]);
        assert_eq!(g.relations, vec![(0, "wearing".to_string(), 1)]);
    }

    #[test]
    fn indices_are_in_range() {
        for text in [
            "What player number is about to swing at the ball?",
            "Is there a hat in the image?",
            "Can you see people in the image?",
            "Where is the pink hat?",
        ] {
            let g = parse(text);
            for (o, _) in &g.attributes {
                assert!(*o < g.objects.len());
            }
            for (s, _, o) in &g.relations {
                assert!(*s < g.objects.len() && *o < g.objects.len());
            }
        }
    }
}
