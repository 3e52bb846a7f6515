"""Reverse-mode automatic differentiation on numpy arrays."""

from src.domain.autodiff import functional
from src.domain.autodiff.conv import conv2d, conv3d, conv_nd, conv_transpose3d, conv_transpose_nd
from src.domain.autodiff.module import Module
from src.domain.autodiff.normalization import RunningStats, batch_norm
from src.domain.autodiff.parameter import AdamState, Parameter, adam_step, clip_grad_norm
from src.domain.autodiff.sampling import sample_bilinear_2d, sample_grid, sample_trilinear_3d
from src.domain.autodiff.tensor import (
    Tape,
    TapeEntry,
    Tensor,
    backward,
    current_tape,
    default_float_width,
    get_default_dtype,
    is_grad_enabled,
    no_grad,
    set_default_dtype,
    use_tape,
)

__all__ = [
    "AdamState",
    "Module",
    "Parameter",
    "RunningStats",
    "Tape",
    "TapeEntry",
    "Tensor",
    "adam_step",
    "backward",
    "batch_norm",
    "clip_grad_norm",
    "conv2d",
    "conv3d",
    "conv_nd",
    "conv_transpose3d",
    "conv_transpose_nd",
    "current_tape",
    "default_float_width",
    "functional",
    "get_default_dtype",
    "is_grad_enabled",
    "no_grad",
    "sample_bilinear_2d",
    "sample_grid",
    "sample_trilinear_3d",
    "set_default_dtype",
    "use_tape",
]
