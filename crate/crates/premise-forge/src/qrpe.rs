//! Construction of (positive image, question, falsified premise, negative
//! image) relevance tuples, dataset statistics, and corpus-comparison
//! utilities over feature distances and question embeddings.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::annotations::{AnnotationStore, TruthValue};
use crate::corpus::Question;
use crate::error::{ForgeError, Result};
use crate::features::{cosine, EmbeddingTable, FeatureStore};
use crate::lexicon::{tokenize_and_tag, TagLexicon};
use crate::premise::{extract_premises, Premise, PremiseOrder, Stoplist};

/// One relevance tuple: the question is relevant to `pos_image` and
/// irrelevant to `neg_image` because `premise` is false there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QrpeTuple {
    pub pos_image: u64,
    pub question_id: u64,
    pub premise: Premise,
    pub neg_image: u64,
    pub distance: f64,
}

/// Images on which the target premise is false while every other checked
/// premise of the question remains true.
///
/// Second-order targets additionally require the bare object to be present
/// (the image shows a matching object with a different, exclusive
/// attribute). For a first-order target `<x>`, other premises mentioning
/// `x` are exempt from the all-others-true test: they cannot hold once `x`
/// is absent. Third-order premises are never checked.
pub fn find_candidates(
    store: &AnnotationStore,
    question_premises: &[Premise],
    target: &Premise,
) -> Result<BTreeSet<u64>> {
    let target_order = match target.order() {
        Some(PremiseOrder::First) => PremiseOrder::First,
        Some(PremiseOrder::Second) => PremiseOrder::Second,
        _ => return Err(ForgeError::UnsupportedPremiseOrder(target.canonical())),
    };
    let mut candidates = BTreeSet::new();
    'images: for image_id in store.image_ids() {
        if store.premise_holds(target, image_id)? != TruthValue::False {
            continue;
        }
        if target_order == PremiseOrder::Second {
            let object = Premise::first(target.parts()[0].clone());
            if store.premise_holds(&object, image_id)? != TruthValue::True {
                continue;
            }
        }
        for premise in question_premises {
            if premise == target {
                continue;
            }
            match premise.order() {
                Some(PremiseOrder::Third) | None => continue,
                _ => {}
            }
            if target_order == PremiseOrder::First && premise.mentions(target.object()) {
                continue;
            }
            if store.premise_holds(premise, image_id)? != TruthValue::True {
                continue 'images;
            }
        }
        candidates.insert(image_id);
    }
    Ok(candidates)
}

/// Nearest candidate to the positive image by Euclidean feature distance;
/// ties break toward the smallest image id.
pub fn select_negative(
    candidates: &BTreeSet<u64>,
    pos_image: u64,
    features: &FeatureStore,
) -> Result<(u64, f64)> {
    if candidates.is_empty() {
        return Err(ForgeError::NoNegativeFound);
    }
    let pos = features.require(pos_image)?;
    let mut best: Option<(u64, f64)> = None;
    for &candidate in candidates {
        let vector = features.require(candidate)?;
        let distance = crate::features::euclidean(pos, vector);
        // strict improvement keeps the smallest id on ties
        if best.map(|(_, d)| distance < d).unwrap_or(true) {
            best = Some((candidate, distance));
        }
    }
    Ok(best.expect("candidates checked non-empty"))
}

fn tuples_for_question(
    question: &Question,
    store: &AnnotationStore,
    features: &FeatureStore,
    lexicon: &TagLexicon,
    stoplist: &Stoplist,
) -> Result<Vec<QrpeTuple>> {
    let premises = extract_premises(&question.text, lexicon, stoplist, true)?;
    let mut out = Vec::new();
    for premise in &premises {
        if !matches!(
            premise.order(),
            Some(PremiseOrder::First) | Some(PremiseOrder::Second)
        ) {
            continue;
        }
        let mut candidates = find_candidates(store, &premises, premise)?;
        candidates.remove(&question.image_id);
        match select_negative(&candidates, question.image_id, features) {
            Ok((neg_image, distance)) => out.push(QrpeTuple {
                pos_image: question.image_id,
                question_id: question.question_id,
                premise: premise.clone(),
                neg_image,
                distance,
            }),
            Err(ForgeError::NoNegativeFound) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn sorted_by_id(questions: &[Question]) -> Vec<&Question> {
    let mut refs: Vec<&Question> = questions.iter().collect();
    refs.sort_by_key(|q| q.question_id);
    refs
}

/// Builds the full tuple set: for each question and each order-1/2 premise,
/// at most one tuple. Output order is canonical (question id, then premise
/// extraction order) regardless of thread count.
pub fn build_dataset(
    questions: &[Question],
    store: &AnnotationStore,
    features: &FeatureStore,
    lexicon: &TagLexicon,
    stoplist: &Stoplist,
) -> Result<Vec<QrpeTuple>> {
    let refs = sorted_by_id(questions);
    let per_question = crate::par::maybe_par_try_map(&refs, |q| {
        tuples_for_question(q, store, features, lexicon, stoplist)
    })?;
    Ok(per_question.into_iter().flatten().collect())
}

/// Sequential twin of [`build_dataset`].
pub fn build_dataset_seq(
    questions: &[Question],
    store: &AnnotationStore,
    features: &FeatureStore,
    lexicon: &TagLexicon,
    stoplist: &Stoplist,
) -> Result<Vec<QrpeTuple>> {
    let refs = sorted_by_id(questions);
    let per_question = crate::par::seq_try_map(&refs, |q| {
        tuples_for_question(q, store, features, lexicon, stoplist)
    })?;
    Ok(per_question.into_iter().flatten().collect())
}

/// A labeled classification example derived from tuples: one relevant and
/// one irrelevant row per tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceExample {
    pub question_id: u64,
    pub image_id: u64,
    pub label: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub falsified_order: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption: Option<String>,
}

/// Expands tuples into a balanced classification dataset.
pub fn to_relevance_examples(tuples: &[QrpeTuple]) -> Vec<RelevanceExample> {
    let mut out = Vec::with_capacity(tuples.len() * 2);
    for tuple in tuples {
        let order = match tuple.premise.order() {
            Some(PremiseOrder::First) => 1,
            Some(PremiseOrder::Second) => 2,
            _ => continue,
        };
        out.push(RelevanceExample {
            question_id: tuple.question_id,
            image_id: tuple.pos_image,
            label: 1,
            falsified_order: None,
            caption: None,
        });
        out.push(RelevanceExample {
            question_id: tuple.question_id,
            image_id: tuple.neg_image,
            label: 0,
            falsified_order: Some(order),
            caption: None,
        });
    }
    out
}

/// Summary counts over a tuple set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub total: usize,
    pub unique_premises: usize,
    pub unique_questions: usize,
    pub first_order: usize,
    pub second_order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val: Option<usize>,
}

/// Computes dataset statistics; train/val counts appear when split labels
/// are provided for the tuple questions.
pub fn dataset_stats(tuples: &[QrpeTuple], splits: &HashMap<u64, String>) -> DatasetStats {
    let unique_premises: BTreeSet<String> =
        tuples.iter().map(|t| t.premise.canonical()).collect();
    let unique_questions: BTreeSet<u64> = tuples.iter().map(|t| t.question_id).collect();
    let first_order = tuples
        .iter()
        .filter(|t| t.premise.order() == Some(PremiseOrder::First))
        .count();
    let second_order = tuples
        .iter()
        .filter(|t| t.premise.order() == Some(PremiseOrder::Second))
        .count();
    let count_split = |name: &str| {
        tuples
            .iter()
            .filter(|t| splits.get(&t.question_id).map(String::as_str) == Some(name))
            .count()
    };
    let (train, val) = if splits.is_empty() {
        (None, None)
    } else {
        (Some(count_split("train")), Some(count_split("val")))
    };
    DatasetStats {
        total: tuples.len(),
        unique_premises: unique_premises.len(),
        unique_questions: unique_questions.len(),
        first_order,
        second_order,
        train,
        val,
    }
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tuples           {}", self.total)?;
        writeln!(f, "unique premises  {}", self.unique_premises)?;
        writeln!(f, "unique questions {}", self.unique_questions)?;
        writeln!(f, "first order      {}", self.first_order)?;
        write!(f, "second order     {}", self.second_order)?;
        if let (Some(train), Some(val)) = (self.train, self.val) {
            write!(f, "\ntrain            {}\nval              {}", train, val)?;
        }
        Ok(())
    }
}

/// Bucketed Euclidean distances over image pairs, with the mean.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceHistogram {
    pub bucket_width: f64,
    pub counts: Vec<u64>,
    pub mean: f64,
    pub n: usize,
}

impl fmt::Display for DistanceHistogram {
    /// Plot-ready text: a comment header, then `bucket_start<TAB>count`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# pairs={} mean={:.6} bucket_width={}",
            self.n, self.mean, self.bucket_width
        )?;
        for (i, count) in self.counts.iter().enumerate() {
            writeln!(f, "{:.3}\t{}", i as f64 * self.bucket_width, count)?;
        }
        Ok(())
    }
}

/// Histograms the pairwise distances of relevant/irrelevant image pairs.
pub fn pair_distance_histogram(
    pairs: &[(u64, u64)],
    features: &FeatureStore,
    bucket_width: f64,
) -> Result<DistanceHistogram> {
    if bucket_width <= 0.0 {
        return Err(ForgeError::Invalid("bucket width must be positive".into()));
    }
    let missing: BTreeSet<u64> = pairs
        .iter()
        .flat_map(|(a, b)| [*a, *b])
        .filter(|id| features.get(*id).is_none())
        .collect();
    if let Some(&id) = missing.iter().next() {
        return Err(ForgeError::MissingFeature(id));
    }
    // distances are computed per pair (possibly in parallel) and then
    // reduced sequentially so the mean is identical across thread counts
    let distances = crate::par::maybe_par_map(pairs, |(a, b)| {
        crate::features::euclidean(
            features.get(*a).expect("checked above"),
            features.get(*b).expect("checked above"),
        )
    });
    let mut counts: Vec<u64> = Vec::new();
    let mut sum = 0.0;
    for &d in &distances {
        let bucket = (d / bucket_width).floor() as usize;
        if bucket >= counts.len() {
            counts.resize(bucket + 1, 0);
        }
        counts[bucket] += 1;
        sum += d;
    }
    let mean = if distances.is_empty() {
        0.0
    } else {
        sum / distances.len() as f64
    };
    Ok(DistanceHistogram {
        bucket_width,
        counts,
        mean,
        n: distances.len(),
    })
}

fn question_embedding(
    text: &str,
    lexicon: &TagLexicon,
    embeddings: &EmbeddingTable,
) -> Result<Vec<f64>> {
    let tokens = tokenize_and_tag(text, lexicon)?;
    Ok(embeddings.mean_embedding(&tokens))
}

fn nearest_from_sims(sims: Vec<(u64, f64)>) -> Option<u64> {
    sims.into_iter()
        .min_by(|(ida, sa), (idb, sb)| {
            sb.partial_cmp(sa)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(ida.cmp(idb))
        })
        .map(|(id, _)| id)
}

/// Finds the corpus question with the highest cosine similarity of mean
/// token embeddings; ties break toward the smallest question id.
pub fn nearest_question(
    query_text: &str,
    corpus: &[Question],
    embeddings: &EmbeddingTable,
    lexicon: &TagLexicon,
) -> Result<u64> {
    if corpus.is_empty() {
        return Err(ForgeError::Invalid("empty corpus".into()));
    }
    let query = question_embedding(query_text, lexicon, embeddings)?;
    let sims = crate::par::maybe_par_try_map(corpus, |q| {
        question_embedding(&q.text, lexicon, embeddings)
            .map(|v| (q.question_id, cosine(&query, &v)))
    })?;
    Ok(nearest_from_sims(sims).expect("corpus checked non-empty"))
}

/// Sequential twin of [`nearest_question`].
pub fn nearest_question_seq(
    query_text: &str,
    corpus: &[Question],
    embeddings: &EmbeddingTable,
    lexicon: &TagLexicon,
) -> Result<u64> {
    if corpus.is_empty() {
        return Err(ForgeError::Invalid("empty corpus".into()));
    }
    let query = question_embedding(query_text, lexicon, embeddings)?;
    let sims = crate::par::seq_try_map(corpus, |q| {
        question_embedding(&q.text, lexicon, embeddings)
            .map(|v| (q.question_id, cosine(&query, &v)))
    })?;
    Ok(nearest_from_sims(sims).expect("corpus checked non-empty"))
}
