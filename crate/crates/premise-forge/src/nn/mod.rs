//! Feed-forward relevance and false-premise models over precomputed
//! encodings: input layouts, the MLP itself, seeded training, and model IO.

mod encode;
mod mlp;
mod model_io;
mod train;

pub use encode::{EncodingSpec, LabeledExample, ModelKind, TextMode};
pub use mlp::{bce_loss, Gradients, MlpModel};
pub use model_io::{load_model, save_model};
pub use train::{
    evaluate, fpd_predict, train, Evaluation, Hyperparams, Optimizer, TrainLog,
};
