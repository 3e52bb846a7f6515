"""Containers of parameters with dotted-path naming."""

from typing import Iterator, Mapping

import numpy as np

from src.domain.autodiff.normalization import RunningStats
from src.domain.autodiff.parameter import Parameter
from src.domain.model.enums import BatchNormMode
from src.domain.shared_kernel import ShapeMismatchError


class Module:
    """
    Base class for network components.

    Parameters, running statistics and child modules are discovered from
    instance attributes in assignment order; lists of modules are numbered.
    """

    def __init__(self) -> None:
        self.mode = BatchNormMode.TRAIN

    def forward(self, *args, **kwargs):
        raise NotImplementedError

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def _children(self) -> Iterator[tuple[str, object]]:
        for name, value in vars(self).items():
            if isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield f"{name}.{i}", item
            elif isinstance(value, (Module, Parameter, RunningStats)):
                yield name, value

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        for name, value in self._children():
            path = f"{prefix}{name}"
            if isinstance(value, Parameter):
                value.name = path
                yield path, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{path}.")

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def named_buffers(self, prefix: str = "") -> Iterator[tuple[str, RunningStats]]:
        for name, value in self._children():
            path = f"{prefix}{name}"
            if isinstance(value, RunningStats):
                yield path, value
            elif isinstance(value, Module):
                yield from value.named_buffers(f"{path}.")

    def _modules(self) -> Iterator["Module"]:
        yield self
        for _, value in self._children():
            if isinstance(value, Module):
                yield from value._modules()

    def train(self) -> "Module":
        for module in self._modules():
            module.mode = BatchNormMode.TRAIN
        return self

    def eval(self) -> "Module":
        for module in self._modules():
            module.mode = BatchNormMode.EVAL
        return self

    def freeze(self) -> None:
        for p in self.parameters():
            p.requires_grad = False

    def unfreeze(self) -> None:
        for p in self.parameters():
            p.requires_grad = True

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def state_dict(self, prefix: str = "") -> dict[str, np.ndarray]:
        """Parameter values and running statistics keyed by dotted path."""
        state = {name: p.data.copy() for name, p in self.named_parameters(prefix)}
        for name, stats in self.named_buffers(prefix):
            state[f"{name}.mean"] = stats.mean.copy()
            state[f"{name}.var"] = stats.var.copy()
        return state

    def load_state_dict(
        self, state: Mapping[str, np.ndarray], prefix: str = "", strict: bool = True
    ) -> None:
        expected = set()
        for name, p in self.named_parameters(prefix):
            expected.add(name)
            if name in state:
                p.assign(state[name])
                p.reset_optimizer()
            elif strict:
                raise ShapeMismatchError(f"Missing parameter {name} in state")
        for name, stats in self.named_buffers(prefix):
            for field in ("mean", "var"):
                key = f"{name}.{field}"
                expected.add(key)
                if key in state:
                    current = getattr(stats, field)
                    setattr(stats, field, np.asarray(state[key], dtype=current.dtype).copy())
                elif strict:
                    raise ShapeMismatchError(f"Missing running statistic {key} in state")
        if strict:
            unexpected = sorted(k for k in state if k.startswith(prefix) and k not in expected)
            if unexpected:
                raise ShapeMismatchError(f"Unexpected entries in state: {unexpected[:5]}")
