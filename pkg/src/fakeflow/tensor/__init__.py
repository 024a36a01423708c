"""Deterministic float64 autodiff engine with the layers, losses, and
optimizers the segment-flow classifier needs."""

from .engine import (
    ACTIVATIONS,
    DTYPE,
    Parameter,
    Tape,
    Tensor,
    activation,
    add,
    add_bias,
    backward,
    bmatmul,
    concat,
    elu,
    identity,
    linear,
    mean_all,
    mean_axis,
    mul,
    narrow,
    one_minus,
    relu,
    scale,
    select,
    selu,
    sigmoid,
    stack,
    tanh,
)
from .init import conv_filters, dense_weight, embedding_table, glorot_uniform, zeros
from .nn import (
    BiGRUParams,
    GRUCellParams,
    additive_pair_scores,
    bigru,
    conv1d,
    cross_entropy,
    dense,
    dropout,
    embedding_lookup,
    global_maxpool,
    maxpool1d,
    softmax,
)
from .optim import ALGORITHMS, DEFAULT_LEARNING_RATES, OptimizerState, make_optimizer, step
from .serialize import load_checkpoint, load_word_vectors, save_checkpoint

__all__ = [
    "ACTIVATIONS",
    "ALGORITHMS",
    "DEFAULT_LEARNING_RATES",
    "DTYPE",
    "BiGRUParams",
    "GRUCellParams",
    "OptimizerState",
    "Parameter",
    "Tape",
    "Tensor",
    "activation",
    "add",
    "add_bias",
    "additive_pair_scores",
    "backward",
    "bigru",
    "bmatmul",
    "concat",
    "conv1d",
    "conv_filters",
    "cross_entropy",
    "dense",
    "dense_weight",
    "dropout",
    "elu",
    "embedding_lookup",
    "embedding_table",
    "global_maxpool",
    "glorot_uniform",
    "identity",
    "linear",
    "load_checkpoint",
    "load_word_vectors",
    "make_optimizer",
    "maxpool1d",
    "mean_all",
    "mean_axis",
    "mul",
    "narrow",
    "one_minus",
    "relu",
    "save_checkpoint",
    "scale",
    "select",
    "selu",
    "sigmoid",
    "softmax",
    "stack",
    "step",
    "tanh",
    "zeros",
]
