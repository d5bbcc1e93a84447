//! Character-level LSTM classifier: embedding, one LSTM layer and a sigmoid
//! output unit, trained with Adam on binary cross-entropy.

mod adam;
mod network;
mod train;

pub use adam::{adam_step, AdamState};
pub use network::{
    bce_loss, BatchForward, LstmNetwork, LstmParams, Predictor, Tensor, PROB_CLAMP, TENSOR_NAMES,
};
pub use train::{
    dim_sweep, evaluate_sequences, train, EpochMetrics, TrainConfig, TrainReport, FIRST_NAME_DIMS,
    FULL_NAME_DIMS,
};
