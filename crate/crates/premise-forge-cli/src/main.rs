//! Command-line entry point tying the pipeline together: premise
//! extraction, question generation, QRPE construction, model training and
//! evaluation, explanations, and corpus statistics.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use premise_forge::annotations::AnnotationStore;
use premise_forge::augment::{
    answer_distribution_of_questions, answer_type_distribution, apply_strategy, merge_training_set,
    AnswerPool, Strategy,
};
use premise_forge::config::Config;
use premise_forge::corpus::{read_jsonl, read_questions, write_jsonl, write_questions, Question};
use premise_forge::explain::{explain_question_with_model, explain_question_with_store, RelevanceOutcome};
use premise_forge::features::{EmbeddingTable, FeatureStore};
use premise_forge::nn::{
    evaluate, load_model, save_model, train, EncodingSpec, Hyperparams, LabeledExample, ModelKind,
    Optimizer, TextMode,
};
use premise_forge::premise::{extract_premises, extract_premises_batch, Stoplist};
use premise_forge::qgen::generate_for_corpus;
use premise_forge::qrpe::{
    build_dataset, dataset_stats, nearest_question, pair_distance_histogram,
    to_relevance_examples, QrpeTuple, RelevanceExample,
};
use premise_forge::{ForgeError, Premise, TagLexicon};

#[derive(Parser)]
#[command(name = "premise-forge", version, about = "Premise extraction and question-relevance toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract premises from a question corpus
    Extract(ExtractArgs),
    /// Generate templated QA pairs from question premises
    Generate(GenerateArgs),
    /// Build relevance tuples from questions, annotations, and features
    BuildQrpe(BuildQrpeArgs),
    /// Train a relevance or false-premise model
    Train(TrainArgs),
    /// Evaluate a trained model with a per-order breakdown
    Eval(EvalArgs),
    /// Explain which premises of a question fail on an image
    Explain(ExplainArgs),
    /// Distributions and histograms over tuples or QA pairs
    Stats(StatsArgs),
    /// Merge generated pairs into a training set under a strategy
    Augment(AugmentArgs),
    /// Find the nearest corpus question by mean word embedding
    Nearest(NearestArgs),
}

#[derive(Args)]
struct LexiconArgs {
    /// Tag lexicon file (lemma<TAB>tag per line); bundled when omitted
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Stoplist file of image-referring lemmas; bundled when omitted
    #[arg(long)]
    stoplist: Option<PathBuf>,
}

impl LexiconArgs {
    fn load(&self, config: &Config) -> Result<(TagLexicon, Stoplist), ForgeError> {
        let lexicon = match self.lexicon.clone().or_else(|| config.get_path("lexicon")) {
            Some(path) => TagLexicon::load(path)?,
            None => TagLexicon::bundled(),
        };
        let stoplist = match self.stoplist.clone().or_else(|| config.get_path("stoplist")) {
            Some(path) => Stoplist::load(path)?,
            None => Stoplist::bundled(),
        };
        Ok((lexicon, stoplist))
    }
}

#[derive(Args)]
struct ExtractArgs {
    /// Input questions JSONL
    #[arg(long = "in")]
    input: PathBuf,
    /// Output premises JSONL
    #[arg(long)]
    out: PathBuf,
    /// Drop existential and counting questions entirely
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    lexicon: LexiconArgs,
}

#[derive(Args)]
struct GenerateArgs {
    /// Input questions JSONL
    #[arg(long = "in")]
    input: PathBuf,
    /// Output QA pairs JSONL
    #[arg(long)]
    out: PathBuf,
    /// Tuple-F1 duplicate threshold
    #[arg(long)]
    threshold: Option<f64>,
    #[command(flatten)]
    lexicon: LexiconArgs,
}

#[derive(Args)]
struct AnnotationArgs {
    /// Object presence JSONL ({"image_id", "classes"})
    #[arg(long)]
    objects: PathBuf,
    /// Attribute pairs JSONL ({"image_id", "pairs"})
    #[arg(long)]
    attributes: PathBuf,
    /// Exclusion lexicon (ANTONYM/SISTER lines); bundled when omitted
    #[arg(long)]
    exclusions: Option<PathBuf>,
    /// Alias file mapping question lemmas onto class names; bundled when omitted
    #[arg(long)]
    aliases: Option<PathBuf>,
}

impl AnnotationArgs {
    fn load(&self, config: &Config) -> Result<AnnotationStore, ForgeError> {
        let exclusions = self.exclusions.clone().or_else(|| config.get_path("exclusions"));
        let mut store = match exclusions {
            Some(path) => AnnotationStore::load(&self.objects, &self.attributes, path)?,
            None => AnnotationStore::load_with_bundled_exclusions(&self.objects, &self.attributes)?,
        };
        match self.aliases.clone().or_else(|| config.get_path("aliases")) {
            Some(path) => store.load_aliases(path)?,
            None => store.bundled_aliases(),
        }
        Ok(store)
    }
}

#[derive(Args)]
struct BuildQrpeArgs {
    /// Input questions JSONL
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    annotations: AnnotationArgs,
    /// Image feature file (PFV1 binary)
    #[arg(long)]
    features: PathBuf,
    /// Output tuples JSONL
    #[arg(long)]
    out: PathBuf,
    /// Also write the balanced classification dataset here
    #[arg(long)]
    dataset_out: Option<PathBuf>,
    /// L2-normalize feature vectors before distance ranking
    #[arg(long)]
    l2_normalize: bool,
    #[command(flatten)]
    lexicon: LexiconArgs,
}

#[derive(Args)]
struct TrainArgs {
    /// Model kind: relq, relqp, qc-sim, pc-sim, qpc-sim, fpd
    #[arg(long)]
    kind: String,
    /// Dataset JSONL: relevance rows, or tuples for --kind fpd
    #[arg(long = "in")]
    input: PathBuf,
    /// Question corpus JSONL (texts for encoding)
    #[arg(long)]
    questions: PathBuf,
    /// Image feature file (PFV1 binary)
    #[arg(long)]
    features: Option<PathBuf>,
    /// Caption JSONL ({"image_id", "caption"}) for caption models
    #[arg(long)]
    captions: Option<PathBuf>,
    /// Word embedding table; switches text encoding to mean embedding
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Output model file
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    /// sgd or adam
    #[arg(long)]
    optimizer: Option<String>,
    /// Hidden layer widths, comma separated
    #[arg(long)]
    hidden: Option<String>,
    #[command(flatten)]
    lexicon: LexiconArgs,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    kind: Option<String>,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    questions: PathBuf,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    captions: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Trained model file
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    lexicon: LexiconArgs,
}

#[derive(Args)]
struct ExplainArgs {
    /// The question to check
    #[arg(long)]
    question: String,
    /// Image id to check against
    #[arg(long)]
    image_id: u64,
    /// Trained false-premise model (with --features)
    #[arg(long)]
    model: Option<PathBuf>,
    /// Image feature file, used with --model
    #[arg(long)]
    features: Option<PathBuf>,
    /// Ground-truth mode: object presence JSONL
    #[arg(long)]
    objects: Option<PathBuf>,
    /// Ground-truth mode: attribute JSONL
    #[arg(long)]
    attributes: Option<PathBuf>,
    #[arg(long)]
    exclusions: Option<PathBuf>,
    #[arg(long)]
    aliases: Option<PathBuf>,
    /// Emit JSONL records instead of sentences
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    lexicon: LexiconArgs,
}

#[derive(Args)]
struct StatsArgs {
    /// Answer-type distribution of a QA pairs file
    #[arg(long)]
    answer_types: Option<PathBuf>,
    /// Answer-type distribution of a question corpus
    #[arg(long)]
    source_answer_types: Option<PathBuf>,
    /// Dataset statistics of a tuples file
    #[arg(long)]
    tuples: Option<PathBuf>,
    /// Question corpus supplying split labels for --tuples
    #[arg(long)]
    questions: Option<PathBuf>,
    /// Distance histogram over the (pos, neg) pairs of a tuples file
    #[arg(long)]
    distances: Option<PathBuf>,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    bucket_width: f64,
    /// Also print a shuffled-pairing baseline histogram with this seed
    #[arg(long)]
    baseline_seed: Option<u64>,
}

#[derive(Args)]
struct AugmentArgs {
    /// Source training questions JSONL
    #[arg(long = "in")]
    input: PathBuf,
    /// Generated QA pairs JSONL
    #[arg(long)]
    generated: PathBuf,
    /// baseline, all, only-binary, no-other, no-binary, comm-other, top1k-a
    #[arg(long)]
    strategy: String,
    /// Output merged corpus JSONL
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct NearestArgs {
    /// Corpus questions JSONL
    #[arg(long = "in")]
    input: PathBuf,
    /// Word embedding table (token v1 ... vd per line)
    #[arg(long)]
    embeddings: PathBuf,
    /// Query question text
    #[arg(long)]
    question: String,
    #[command(flatten)]
    lexicon: LexiconArgs,
}

#[derive(Serialize)]
struct PremiseRecord {
    question_id: u64,
    image_id: u64,
    premises: Vec<Premise>,
}

#[derive(Deserialize)]
struct CaptionRecord {
    image_id: u64,
    caption: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), ForgeError> {
    let config = Config::from_env()?;
    config.validate()?;
    match cli.command {
        Command::Extract(args) => cmd_extract(args, &config),
        Command::Generate(args) => cmd_generate(args, &config),
        Command::BuildQrpe(args) => cmd_build_qrpe(args, &config),
        Command::Train(args) => cmd_train(args, &config),
        Command::Eval(args) => cmd_eval(args, &config),
        Command::Explain(args) => cmd_explain(args, &config),
        Command::Stats(args) => cmd_stats(args),
        Command::Augment(args) => cmd_augment(args),
        Command::Nearest(args) => cmd_nearest(args, &config),
    }
}

fn cmd_extract(args: ExtractArgs, config: &Config) -> Result<(), ForgeError> {
    let (lexicon, stoplist) = args.lexicon.load(config)?;
    let questions = read_questions(&args.input)?;
    let texts: Vec<String> = questions.iter().map(|q| q.text.clone()).collect();
    let premises = extract_premises_batch(&texts, &lexicon, &stoplist, args.strict)?;
    let records: Vec<PremiseRecord> = questions
        .iter()
        .zip(premises)
        .map(|(q, premises)| PremiseRecord {
            question_id: q.question_id,
            image_id: q.image_id,
            premises,
        })
        .collect();
    write_jsonl(&args.out, &records)?;
    eprintln!("extracted premises for {} questions", records.len());
    Ok(())
}

fn cmd_generate(args: GenerateArgs, config: &Config) -> Result<(), ForgeError> {
    let (lexicon, stoplist) = args.lexicon.load(config)?;
    let threshold = match args.threshold {
        Some(t) => t,
        None => config.get_f64("threshold")?.unwrap_or(0.9),
    };
    if !(0.0..=1.0).contains(&threshold) {
        return Err(ForgeError::Invalid(format!(
            "threshold {} outside [0, 1]",
            threshold
        )));
    }
    let questions = read_questions(&args.input)?;
    let pairs = generate_for_corpus(&questions, &lexicon, &stoplist, threshold)?;
    write_jsonl(&args.out, &pairs)?;
    eprintln!("generated {} QA pairs from {} questions", pairs.len(), questions.len());
    Ok(())
}

fn cmd_build_qrpe(args: BuildQrpeArgs, config: &Config) -> Result<(), ForgeError> {
    let (lexicon, stoplist) = args.lexicon.load(config)?;
    let store = args.annotations.load(config)?;
    let mut features = FeatureStore::load(&args.features)?;
    if args.l2_normalize {
        features.l2_normalize();
    }
    let questions = read_questions(&args.input)?;
    let tuples = build_dataset(&questions, &store, &features, &lexicon, &stoplist)?;
    write_jsonl(&args.out, &tuples)?;
    if let Some(dataset_out) = &args.dataset_out {
        write_jsonl(dataset_out, &to_relevance_examples(&tuples))?;
    }
    let splits: HashMap<u64, String> = questions
        .iter()
        .filter_map(|q| q.split.clone().map(|s| (q.question_id, s)))
        .collect();
    println!("{}", dataset_stats(&tuples, &splits));
    Ok(())
}

struct ModelResources {
    questions: HashMap<u64, Question>,
    features: Option<FeatureStore>,
    captions: HashMap<u64, String>,
    embeddings: Option<EmbeddingTable>,
}

fn load_resources(
    questions: &PathBuf,
    features: Option<&PathBuf>,
    captions: Option<&PathBuf>,
    embeddings: Option<&PathBuf>,
) -> Result<ModelResources, ForgeError> {
    let questions = read_questions(questions)?
        .into_iter()
        .map(|q| (q.question_id, q))
        .collect();
    let features = features.map(FeatureStore::load).transpose()?;
    let captions = match captions {
        Some(path) => {
            let records: Vec<CaptionRecord> = read_jsonl(path)?;
            records.into_iter().map(|r| (r.image_id, r.caption)).collect()
        }
        None => HashMap::new(),
    };
    let embeddings = embeddings.map(EmbeddingTable::load).transpose()?;
    Ok(ModelResources {
        questions,
        features,
        captions,
        embeddings,
    })
}

fn assemble_examples(
    kind: ModelKind,
    rows: &[RelevanceExample],
    resources: &ModelResources,
    lexicon: &TagLexicon,
    stoplist: &Stoplist,
) -> Result<Vec<LabeledExample>, ForgeError> {
    rows.iter()
        .map(|row| {
            let question = resources.questions.get(&row.question_id).ok_or_else(|| {
                ForgeError::Invalid(format!("dataset references unknown question {}", row.question_id))
            })?;
            let premises = if kind.uses_premises() {
                extract_premises(&question.text, lexicon, stoplist, true)?
            } else {
                Vec::new()
            };
            let image_feature = if kind.uses_image() {
                let store = resources.features.as_ref().ok_or_else(|| {
                    ForgeError::Invalid("model kind needs --features".into())
                })?;
                store.require(row.image_id)?.iter().map(|v| *v as f64).collect()
            } else {
                Vec::new()
            };
            let caption = row
                .caption
                .clone()
                .or_else(|| resources.captions.get(&row.image_id).cloned());
            if kind.uses_caption() && caption.is_none() {
                return Err(ForgeError::MissingCaption(row.image_id));
            }
            Ok(LabeledExample {
                question_text: question.text.clone(),
                premises,
                image_feature,
                caption,
                label: row.label as f64,
                falsified_order: row.falsified_order,
            })
        })
        .collect()
}

fn fpd_examples_from_tuples(
    tuples: &[QrpeTuple],
    features: &FeatureStore,
) -> Result<Vec<LabeledExample>, ForgeError> {
    let mut examples = Vec::with_capacity(tuples.len() * 2);
    for tuple in tuples {
        let order = match tuple.premise.order() {
            Some(premise_forge::PremiseOrder::First) => 1,
            Some(premise_forge::PremiseOrder::Second) => 2,
            _ => continue,
        };
        for (image, label) in [(tuple.pos_image, 1.0), (tuple.neg_image, 0.0)] {
            examples.push(LabeledExample {
                question_text: String::new(),
                premises: vec![tuple.premise.clone()],
                image_feature: features.require(image)?.iter().map(|v| *v as f64).collect(),
                caption: None,
                label,
                falsified_order: if label < 0.5 { Some(order) } else { None },
            });
        }
    }
    Ok(examples)
}

fn build_spec(
    kind: ModelKind,
    resources: &ModelResources,
    lexicon: &TagLexicon,
    stoplist: &Stoplist,
) -> Result<EncodingSpec, ForgeError> {
    let texts: Vec<String> = {
        let mut qs: Vec<&Question> = resources.questions.values().collect();
        qs.sort_by_key(|q| q.question_id);
        qs.iter().map(|q| q.text.clone()).collect()
    };
    let image_dim = resources.features.as_ref().map(|f| f.dim()).unwrap_or(0);
    let mut spec = EncodingSpec::from_corpus(&texts, image_dim, lexicon, stoplist)?;
    if let Some(table) = &resources.embeddings {
        spec.question_mode = TextMode::MeanEmbedding { dim: table.dim() };
    }
    if kind.uses_caption() {
        spec.caption_mode = Some(match &resources.embeddings {
            Some(table) => TextMode::MeanEmbedding { dim: table.dim() },
            None => {
                let mut caption_texts: Vec<String> =
                    resources.captions.values().cloned().collect();
                caption_texts.sort();
                let caption_spec =
                    EncodingSpec::from_corpus(&caption_texts, 0, lexicon, stoplist)?;
                caption_spec.question_mode
            }
        });
    }
    Ok(spec)
}

fn cmd_train(args: TrainArgs, config: &Config) -> Result<(), ForgeError> {
    let (lexicon, stoplist) = args.lexicon.load(config)?;
    let kind = ModelKind::parse(&args.kind)?;
    let resources = load_resources(
        &args.questions,
        args.features.as_ref(),
        args.captions.as_ref(),
        args.embeddings.as_ref(),
    )?;
    let examples = if kind == ModelKind::Fpd {
        let tuples: Vec<QrpeTuple> = read_jsonl(&args.input)?;
        let features = resources.features.as_ref().ok_or_else(|| {
            ForgeError::Invalid("fpd training needs --features".into())
        })?;
        fpd_examples_from_tuples(&tuples, features)?
    } else {
        let rows: Vec<RelevanceExample> = read_jsonl(&args.input)?;
        assemble_examples(kind, &rows, &resources, &lexicon, &stoplist)?
    };
    let spec = build_spec(kind, &resources, &lexicon, &stoplist)?;
    let mut hyper = Hyperparams::default();
    if let Some(seed) = args.seed.or(config.get_u64("seed")?) {
        hyper.seed = seed;
    }
    if let Some(lr) = args.lr {
        hyper.lr = lr;
    }
    if let Some(epochs) = args.epochs {
        hyper.epochs = epochs;
    }
    if let Some(batch) = args.batch {
        hyper.batch = batch;
    }
    if let Some(optimizer) = &args.optimizer {
        hyper.optimizer = Optimizer::parse(optimizer)?;
    }
    if let Some(hidden) = &args.hidden {
        hyper.hidden = hidden
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|e| ForgeError::Invalid(format!("bad hidden width {:?}: {}", s, e)))
            })
            .collect::<Result<Vec<_>, _>>()?;
    }
    let (model, log) = train(
        kind,
        &spec,
        &examples,
        &hyper,
        &lexicon,
        resources.embeddings.as_ref(),
    )?;
    for (epoch, loss) in log.epoch_loss.iter().enumerate() {
        println!("epoch {:>4}  loss {:.6}", epoch, loss);
    }
    save_model(&args.model, &model, kind, &spec)?;
    eprintln!(
        "trained {} on {} examples, saved to {}",
        kind,
        examples.len(),
        args.model.display()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs, config: &Config) -> Result<(), ForgeError> {
    let (lexicon, stoplist) = args.lexicon.load(config)?;
    let (model, kind, spec) = load_model(&args.model)?;
    if let Some(requested) = &args.kind {
        let requested = ModelKind::parse(requested)?;
        if requested != kind {
            return Err(ForgeError::Invalid(format!(
                "model file holds kind {}, --kind asked for {}",
                kind, requested
            )));
        }
    }
    let resources = load_resources(
        &args.questions,
        args.features.as_ref(),
        args.captions.as_ref(),
        args.embeddings.as_ref(),
    )?;
    let examples = if kind == ModelKind::Fpd {
        let tuples: Vec<QrpeTuple> = read_jsonl(&args.input)?;
        let features = resources.features.as_ref().ok_or_else(|| {
            ForgeError::Invalid("fpd evaluation needs --features".into())
        })?;
        fpd_examples_from_tuples(&tuples, features)?
    } else {
        let rows: Vec<RelevanceExample> = read_jsonl(&args.input)?;
        assemble_examples(kind, &rows, &resources, &lexicon, &stoplist)?
    };
    let evaluation = evaluate(
        &model,
        kind,
        &spec,
        &examples,
        &lexicon,
        resources.embeddings.as_ref(),
    )?;
    println!("{}", evaluation);
    Ok(())
}

fn cmd_explain(args: ExplainArgs, config: &Config) -> Result<(), ForgeError> {
    let (lexicon, stoplist) = args.lexicon.load(config)?;
    let outcome = match (&args.model, &args.objects) {
        (Some(model_path), _) => {
            let features_path = args.features.clone().ok_or_else(|| {
                ForgeError::Invalid("--model needs --features for the image vector".into())
            })?;
            let features = FeatureStore::load(features_path)?;
            let vector: Vec<f64> = features
                .require(args.image_id)?
                .iter()
                .map(|v| *v as f64)
                .collect();
            let (model, kind, spec) = load_model(model_path)?;
            if kind != ModelKind::Fpd {
                return Err(ForgeError::Invalid(format!(
                    "explain needs an fpd model, got {}",
                    kind
                )));
            }
            explain_question_with_model(&args.question, &vector, &model, &spec, &lexicon, &stoplist)?
        }
        (None, Some(objects)) => {
            let attributes = args.attributes.clone().ok_or_else(|| {
                ForgeError::Invalid("ground-truth mode needs --attributes".into())
            })?;
            let annotations = AnnotationArgs {
                objects: objects.clone(),
                attributes,
                exclusions: args.exclusions.clone(),
                aliases: args.aliases.clone(),
            };
            let store = annotations.load(config)?;
            explain_question_with_store(&args.question, args.image_id, &store, &lexicon, &stoplist)?
        }
        (None, None) => {
            return Err(ForgeError::Invalid(
                "explain needs either --model/--features or --objects/--attributes".into(),
            ))
        }
    };
    match outcome {
        RelevanceOutcome::Relevant => println!("relevant"),
        RelevanceOutcome::FalsePremises(explanations) => {
            for explanation in explanations {
                if args.json {
                    println!(
                        "{}",
                        serde_json::to_string(&explanation)
                            .map_err(|e| ForgeError::Invalid(e.to_string()))?
                    );
                } else {
                    println!("{}", explanation.sentence);
                }
            }
        }
    }
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<(), ForgeError> {
    let mut did_something = false;
    if let Some(path) = &args.answer_types {
        let pairs: Vec<premise_forge::QAPair> = read_jsonl(path)?;
        println!("{}", answer_type_distribution(&pairs));
        did_something = true;
    }
    if let Some(path) = &args.source_answer_types {
        let questions = read_questions(path)?;
        println!("{}", answer_distribution_of_questions(&questions));
        did_something = true;
    }
    if let Some(path) = &args.tuples {
        let tuples: Vec<QrpeTuple> = read_jsonl(path)?;
        let splits: HashMap<u64, String> = match &args.questions {
            Some(questions_path) => read_questions(questions_path)?
                .into_iter()
                .filter_map(|q| q.split.map(|s| (q.question_id, s)))
                .collect(),
            None => HashMap::new(),
        };
        println!("{}", dataset_stats(&tuples, &splits));
        did_something = true;
    }
    if let Some(path) = &args.distances {
        let features_path = args.features.as_ref().ok_or_else(|| {
            ForgeError::Invalid("--distances needs --features".into())
        })?;
        let features = FeatureStore::load(features_path)?;
        let tuples: Vec<QrpeTuple> = read_jsonl(path)?;
        let pairs: Vec<(u64, u64)> = tuples.iter().map(|t| (t.pos_image, t.neg_image)).collect();
        println!("# builder-selected pairs");
        print!("{}", pair_distance_histogram(&pairs, &features, args.bucket_width)?);
        if let Some(seed) = args.baseline_seed {
            let shuffled = shuffled_pairs(&pairs, seed);
            println!("# shuffled baseline pairs (seed {})", seed);
            print!("{}", pair_distance_histogram(&shuffled, &features, args.bucket_width)?);
        }
        did_something = true;
    }
    if !did_something {
        return Err(ForgeError::Invalid(
            "stats needs one of --answer-types, --source-answer-types, --tuples, --distances".into(),
        ));
    }
    Ok(())
}

/// Deterministic re-pairing of positives with rotated negatives.
fn shuffled_pairs(pairs: &[(u64, u64)], seed: u64) -> Vec<(u64, u64)> {
    if pairs.is_empty() {
        return Vec::new();
    }
    let shift = (seed as usize % pairs.len()).max(1);
    (0..pairs.len())
        .map(|i| (pairs[i].0, pairs[(i + shift) % pairs.len()].1))
        .collect()
}

fn cmd_augment(args: AugmentArgs) -> Result<(), ForgeError> {
    let strategy = Strategy::parse(&args.strategy)?;
    let source = read_questions(&args.input)?;
    let generated: Vec<premise_forge::QAPair> = read_jsonl(&args.generated)?;
    let pool = AnswerPool::from_questions(&source);
    let kept = apply_strategy(&generated, &pool, strategy);
    let merged = merge_training_set(&source, &kept)?;
    write_questions(&args.out, &merged)?;
    eprintln!(
        "kept {} of {} generated pairs; merged corpus has {} questions",
        kept.len(),
        generated.len(),
        merged.len()
    );
    Ok(())
}

fn cmd_nearest(args: NearestArgs, config: &Config) -> Result<(), ForgeError> {
    let (lexicon, _) = args.lexicon.load(config)?;
    let corpus = read_questions(&args.input)?;
    let embeddings = EmbeddingTable::load(&args.embeddings)?;
    let id = nearest_question(&args.question, &corpus, &embeddings, &lexicon)?;
    let text = corpus
        .iter()
        .find(|q| q.question_id == id)
        .map(|q| q.text.as_str())
        .unwrap_or("");
    println!("{}\t{}", id, text);
    Ok(())
}
