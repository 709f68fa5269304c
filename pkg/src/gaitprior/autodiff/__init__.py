from .tensor import (  # noqa: F401
    Tensor, ComputationTape, backward, no_grad, as_tensor,
    add, sub, mul, div, square, sqrt, exp, log, sin, cos, tanh, sigmoid,
    elu, relu, abs_, minimum, maximum, clip, atan2, atan2_pair,
    reshape, transpose, index, concat, sum_, mean, matmul, conv1d, gru_step,
)
from .layers import Module, Linear, Conv1d, GRUCell, MLP  # noqa: F401
from .optim import Adam, adam_step  # noqa: F401
