from .rng import Rng
from .tensor import (
    NumericsError,
    ShapeError,
    Tensor,
    backward,
    check_finite,
    concat,
    finite_checks,
    no_grad,
    pad_time,
    repeat_time,
    set_finite_checks,
)
from . import ops, stft
from .module import ChannelAffine, Conv1d, Embedding, GroupNorm, Linear, Module, ModuleList
from .optim import AdamW, OptimizerAbort
from .kernels import BACKEND as KERNEL_BACKEND

__all__ = [
    "Rng",
    "Tensor",
    "NumericsError",
    "ShapeError",
    "backward",
    "check_finite",
    "concat",
    "finite_checks",
    "no_grad",
    "pad_time",
    "repeat_time",
    "set_finite_checks",
    "ops",
    "stft",
    "ChannelAffine",
    "Conv1d",
    "Embedding",
    "GroupNorm",
    "Linear",
    "Module",
    "ModuleList",
    "AdamW",
    "OptimizerAbort",
    "KERNEL_BACKEND",
]
