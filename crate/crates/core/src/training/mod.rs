//! Desk-scale learning task: Gaussian-blob classification with a
//! softmax-linear model, split across clients with a tunable non-iid degree.

mod data;
mod model;

pub use data::{
    class_mean, gen_synthetic, partition_noniid, Batch, Dataset, Partition, DEFAULT_SPREAD,
    MEAN_SCALE,
};
pub use model::{evaluate, evaluate_asr, local_grad, loss, nearest_mean_accuracy, SoftmaxShape};
