//! Vector-field networks, reverse-mode gradients and the optimizer.

mod adam;
mod checkpoint;
mod gradcheck;
mod layers;
mod params;
mod tape;

pub use adam::{adam_step, OptimizerState, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use checkpoint::{Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use gradcheck::{gradient_check, GradCheckEntry, GradCheckReport};
pub use layers::{
    attention_block_forward, attention_block_tape, bw_field_batch, bw_field_forward, bw_field_tape,
    fourier_time_features, time_features, time_rows, time_width, gaussian_features, gaussian_input_norm, mlp_forward, mlp_forward_tape,
    pc_field_forward, pc_field_tape, FOURIER_K,
};
pub use params::{Architecture, InputNorm, MlpSpec, ModelParams, TransformerSpec};
pub use tape::{Gradients, Tape, Tensor, Var, LAYER_NORM_EPS};
