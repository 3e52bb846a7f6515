"""
Dense N-d convolutions on channel-first tensors.

Both kernels loop over kernel offsets and contract the channel axis of a
strided input slice, which keeps the arithmetic order fixed and the results
deterministic. Outputs follow the usual size law per spatial axis:
O = floor((S + 2·padding − dilation·(k − 1) − 1) / stride) + 1.
"""

import itertools
from typing import Optional

import numpy as np

from src.domain.autodiff.tensor import Tensor, as_tensor, make_result
from src.domain.shared_kernel import ShapeMismatchError


def output_extent(size: int, kernel: int, stride: int, dilation: int, padding: int) -> int:
    return (size + 2 * padding - dilation * (kernel - 1) - 1) // stride + 1


def same_padding(kernel: int, dilation: int = 1) -> int:
    """Padding that keeps a stride-1 convolution shape-preserving."""
    return dilation * (kernel - 1) // 2


def _check_hyper(stride: int, dilation: int, padding: int) -> None:
    if stride < 1 or dilation < 1 or padding < 0:
        raise ShapeMismatchError(
            f"Invalid convolution settings stride={stride} dilation={dilation} padding={padding}"
        )


def _window(offset: tuple[int, ...], dilation: int, stride: int, extents: tuple[int, ...]):
    return tuple(
        slice(o * dilation, o * dilation + stride * (n - 1) + 1, stride)
        for o, n in zip(offset, extents)
    )


def conv_nd(
    x: Tensor,
    kernel: Tensor,
    bias: Optional[Tensor] = None,
    stride: int = 1,
    dilation: int = 1,
    padding: int = 0,
) -> Tensor:
    """Cross-correlate x [N,C,*S] with kernel [Co,C,*k]."""
    x, kernel = as_tensor(x), as_tensor(kernel)
    spatial = x.ndim - 2
    if kernel.ndim != spatial + 2:
        raise ShapeMismatchError("Kernel rank does not match input rank", x.ndim, kernel.ndim)
    if kernel.shape[1] != x.shape[1]:
        raise ShapeMismatchError(
            "Input channels do not match kernel", kernel.shape[1], x.shape[1]
        )
    _check_hyper(stride, dilation, padding)
    ksize = kernel.shape[2:]
    out_extents = tuple(
        output_extent(s, k, stride, dilation, padding) for s, k in zip(x.shape[2:], ksize)
    )
    if any(n < 1 for n in out_extents):
        raise ShapeMismatchError("Input smaller than the dilated kernel", ksize, x.shape[2:])

    pad = [(0, 0), (0, 0)] + [(padding, padding)] * spatial
    xp = np.pad(x.data, pad) if padding else x.data
    n, co = x.shape[0], kernel.shape[0]
    out = np.zeros((n, co) + out_extents, dtype=x.dtype)
    offsets = list(itertools.product(*(range(k) for k in ksize)))
    for offset in offsets:
        window = (slice(None), slice(None)) + _window(offset, dilation, stride, out_extents)
        w = kernel.data[(slice(None), slice(None)) + offset]
        out += np.einsum("nc...,oc->no...", xp[window], w)
    inputs = [x, kernel]
    if bias is not None:
        bias = as_tensor(bias)
        out += bias.data.reshape((1, co) + (1,) * spatial)
        inputs.append(bias)

    def backward(g):
        gxp = np.zeros_like(xp)
        gk = np.zeros_like(kernel.data)
        for offset in offsets:
            window = (slice(None), slice(None)) + _window(offset, dilation, stride, out_extents)
            key = (slice(None), slice(None)) + offset
            gxp[window] += np.einsum("no...,oc->nc...", g, kernel.data[key])
            gk[key] = np.einsum("no...,nc...->oc", g, xp[window])
        if padding:
            gxp = gxp[(slice(None), slice(None)) + (slice(padding, -padding),) * spatial]
        grads = [gxp, gk]
        if bias is not None:
            grads.append(g.sum(axis=(0,) + tuple(range(2, g.ndim))))
        return tuple(grads)

    return make_result(f"conv{spatial}d", out, inputs, backward)


def conv2d(x, kernel, bias=None, stride: int = 1, dilation: int = 1, padding: int = 0) -> Tensor:
    if as_tensor(x).ndim != 4:
        raise ShapeMismatchError("conv2d expects [N,C,H,W]", 4, as_tensor(x).ndim)
    return conv_nd(x, kernel, bias, stride, dilation, padding)


def conv3d(x, kernel, bias=None, stride: int = 1, dilation: int = 1, padding: int = 0) -> Tensor:
    if as_tensor(x).ndim != 5:
        raise ShapeMismatchError("conv3d expects [N,C,D,H,W]", 5, as_tensor(x).ndim)
    return conv_nd(x, kernel, bias, stride, dilation, padding)


def conv_transpose_nd(
    x: Tensor,
    kernel: Tensor,
    bias: Optional[Tensor] = None,
    stride: int = 2,
    padding: int = 1,
    output_padding: int = 1,
    dilation: int = 1,
) -> Tensor:
    """
    Transposed convolution of x [N,Ci,*S] with kernel [Ci,Co,*k].

    Each input voxel scatters a scaled kernel into the output; the result is
    the gradient of `conv_nd` with respect to its input. With k=3, stride 2,
    padding 1 and output_padding 1 every spatial extent doubles.
    """
    x, kernel = as_tensor(x), as_tensor(kernel)
    spatial = x.ndim - 2
    if kernel.ndim != spatial + 2 or kernel.shape[0] != x.shape[1]:
        raise ShapeMismatchError(
            "Transposed kernel must be [Ci,Co,*k] with Ci matching input",
            x.shape[1],
            kernel.shape[0] if kernel.ndim else None,
        )
    _check_hyper(stride, dilation, padding)
    if output_padding < 0 or output_padding >= max(stride, dilation):
        raise ShapeMismatchError("output_padding must be smaller than stride or dilation")
    ksize = kernel.shape[2:]
    in_extents = x.shape[2:]
    full = tuple(
        (s - 1) * stride + dilation * (k - 1) + 1 + output_padding
        for s, k in zip(in_extents, ksize)
    )
    out_extents = tuple(f - 2 * padding for f in full)
    crop = (slice(None), slice(None)) + tuple(slice(padding, padding + o) for o in out_extents)
    n, co = x.shape[0], kernel.shape[1]
    buffer = np.zeros((n, co) + full, dtype=x.dtype)
    offsets = list(itertools.product(*(range(k) for k in ksize)))
    for offset in offsets:
        window = (slice(None), slice(None)) + _window(offset, dilation, stride, in_extents)
        w = kernel.data[(slice(None), slice(None)) + offset]
        buffer[window] += np.einsum("nc...,co->no...", x.data, w)
    out = buffer[crop].copy()
    inputs = [x, kernel]
    if bias is not None:
        bias = as_tensor(bias)
        out += bias.data.reshape((1, co) + (1,) * spatial)
        inputs.append(bias)

    def backward(g):
        gbuf = np.zeros_like(buffer)
        gbuf[crop] = g
        gx = np.zeros_like(x.data)
        gk = np.zeros_like(kernel.data)
        for offset in offsets:
            window = (slice(None), slice(None)) + _window(offset, dilation, stride, in_extents)
            key = (slice(None), slice(None)) + offset
            gx += np.einsum("no...,co->nc...", gbuf[window], kernel.data[key])
            gk[key] = np.einsum("nc...,no...->co", x.data, gbuf[window])
        grads = [gx, gk]
        if bias is not None:
            grads.append(g.sum(axis=(0,) + tuple(range(2, g.ndim))))
        return tuple(grads)

    return make_result(f"conv_transpose{spatial}d", out, inputs, backward)


def conv_transpose3d(
    x, kernel, bias=None, stride: int = 2, padding: int = 1, output_padding: int = 1
) -> Tensor:
    if as_tensor(x).ndim != 5:
        raise ShapeMismatchError("conv_transpose3d expects [N,C,D,H,W]", 5, as_tensor(x).ndim)
    return conv_transpose_nd(x, kernel, bias, stride, padding, output_padding)
