from nmtforge.numerics.autodiff import (
    Graph,
    NumericError,
    ShapeError,
    Tensor,
    add,
    backward,
    concat,
    cross_entropy,
    cumulative_mean,
    embedding_lookup,
    forward_op,
    layer_norm,
    matmul,
    mul,
    relu,
    reshape,
    scale,
    sigmoid,
    slice_,
    softmax,
    sum_,
    tanh,
    transpose,
)
from nmtforge.numerics.checkpoint import CheckpointError, load_tensors, save_tensors
from nmtforge.numerics.gradcheck import grad_check
from nmtforge.numerics.optim import AdamState, OptimizerConfig, adam_step, learning_rate
