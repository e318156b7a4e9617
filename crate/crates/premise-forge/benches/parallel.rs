//! Rayon vs sequential throughput on the data-parallel pipelines:
//! batch premise extraction, QRPE construction, and nearest-question
//! lookup over a synthetic corpus.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use premise_forge::annotations::{AnnotationStore, ExclusionLexicon};
use premise_forge::corpus::Question;
use premise_forge::features::{EmbeddingTable, FeatureStore};
use premise_forge::premise::{extract_premises_batch, extract_premises_batch_seq, Stoplist};
use premise_forge::qrpe::{build_dataset, build_dataset_seq, nearest_question, nearest_question_seq};
use premise_forge::TagLexicon;

const OBJECTS: &[&str] = &[
    "dog", "cat", "man", "woman", "car", "bus", "horse", "bench", "hat", "racket", "ball",
    "table", "chair", "bottle", "cup",
];
const ATTRIBUTES: &[&str] = &[
    "red", "green", "blue", "old", "young", "big", "small", "wet", "dry", "open", "closed",
];

struct Fixture {
    questions: Vec<Question>,
    store: AnnotationStore,
    features: FeatureStore,
    lexicon: TagLexicon,
    stoplist: Stoplist,
}

/// Deterministic synthetic corpus: every question asks about an attributed
/// object placed on some images and falsified on others.
fn fixture(num_images: u64, num_questions: u64) -> Fixture {
    let mut store = AnnotationStore::empty(ExclusionLexicon::bundled());
    let mut features = FeatureStore::new(64);
    for image in 0..num_images {
        let object = OBJECTS[(image % OBJECTS.len() as u64) as usize];
        let other = OBJECTS[((image / 2) % OBJECTS.len() as u64) as usize];
        let attribute = ATTRIBUTES[(image % ATTRIBUTES.len() as u64) as usize];
        store.add_object_record(image, &[object.to_string(), other.to_string()]);
        store.add_attribute_record(image, &[(object.to_string(), attribute.to_string())]);
        let vector: Vec<f32> = (0..64)
            .map(|d| (((image * 37 + d * 13) % 101) as f32) / 101.0)
            .collect();
        features.insert(image, vector).unwrap();
    }
    let questions: Vec<Question> = (0..num_questions)
        .map(|q| {
            let object = OBJECTS[(q % OBJECTS.len() as u64) as usize];
            let attribute = ATTRIBUTES[(q % ATTRIBUTES.len() as u64) as usize];
            Question::new(q, q % num_images, format!("Where is the {} {}?", attribute, object))
        })
        .collect();
    Fixture {
        questions,
        store,
        features,
        lexicon: TagLexicon::bundled(),
        stoplist: Stoplist::bundled(),
    }
}

fn bench_extract(c: &mut Criterion) {
    let f = fixture(64, 2000);
    let texts: Vec<String> = f.questions.iter().map(|q| q.text.clone()).collect();
    let mut group = c.benchmark_group("extract_batch");
    group.bench_with_input(BenchmarkId::new("parallel", texts.len()), &texts, |b, t| {
        b.iter(|| extract_premises_batch(t, &f.lexicon, &f.stoplist, true).unwrap())
    });
    group.bench_with_input(BenchmarkId::new("sequential", texts.len()), &texts, |b, t| {
        b.iter(|| extract_premises_batch_seq(t, &f.lexicon, &f.stoplist, true).unwrap())
    });
    group.finish();
}

fn bench_build_qrpe(c: &mut Criterion) {
    let f = fixture(128, 256);
    let mut group = c.benchmark_group("build_qrpe");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            build_dataset(&f.questions, &f.store, &f.features, &f.lexicon, &f.stoplist).unwrap()
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            build_dataset_seq(&f.questions, &f.store, &f.features, &f.lexicon, &f.stoplist)
                .unwrap()
        })
    });
    group.finish();
}

fn bench_nearest_question(c: &mut Criterion) {
    let lexicon = TagLexicon::bundled();
    let mut embeddings = EmbeddingTable::new(32);
    for (i, object) in OBJECTS.iter().enumerate() {
        let v: Vec<f32> = (0..32).map(|d| ((i * 31 + d * 7) % 17) as f32 / 17.0).collect();
        embeddings.insert(*object, v).unwrap();
    }
    for (i, attr) in ATTRIBUTES.iter().enumerate() {
        let v: Vec<f32> = (0..32).map(|d| ((i * 19 + d * 11) % 23) as f32 / 23.0).collect();
        embeddings.insert(*attr, v).unwrap();
    }
    let corpus: Vec<Question> = (0..2000u64)
        .map(|q| {
            let object = OBJECTS[(q % OBJECTS.len() as u64) as usize];
            let attribute = ATTRIBUTES[(q % ATTRIBUTES.len() as u64) as usize];
            Question::new(q, q, format!("Is the {} {}?", object, attribute))
        })
        .collect();
    let mut group = c.benchmark_group("nearest_question");
    group.bench_function("parallel", |b| {
        b.iter(|| nearest_question("Where is the red dog?", &corpus, &embeddings, &lexicon).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            nearest_question_seq("Where is the red dog?", &corpus, &embeddings, &lexicon).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, bench_extract, bench_build_qrpe, bench_nearest_question);
criterion_main!(benches);
