"""Finite-difference verification of analytic gradients."""

from typing import Callable, Dict, Sequence

import numpy as np

from ..core.errors import NumericError
from .tensor import Tensor, backward


def _evaluate(f: Callable[[Tensor], Tensor], x: Tensor) -> float:
    value = f(x).item()
    if not np.isfinite(value):
        raise NumericError(f"f(x) is not finite: {value}")
    return value


def grad_check(f: Callable[[Tensor], Tensor], x: Tensor, eps: float = 1e-5) -> float:
    """
    Compare the analytic gradient of ``f`` at ``x`` with central differences.

    ``f`` may close over other tensors; only ``x`` is perturbed (in place,
    restored afterwards).

    Args:
        f: Function mapping ``x`` to a 1x1 tensor
        x: Point of evaluation; marked ``requires_grad`` for the analytic pass
        eps: Finite-difference step, > 0

    Returns:
        max over entries of |analytic - numeric| / max(1, |analytic|)
    """
    return grad_check_many(lambda: f(x), [x], eps)[0]


def grad_check_many(
    loss_fn: Callable[[], Tensor],
    tensors: Sequence[Tensor],
    eps: float = 1e-5
) -> Dict[int, float]:
    """
    Gradient check for several tensors of one scalar function.

    Args:
        loss_fn: Rebuilds the scalar loss from the current tensor values
        tensors: Tensors to check
        eps: Finite-difference step, > 0

    Returns:
        Position in ``tensors`` -> max relative error for that tensor
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")

    for tensor in tensors:
        tensor.requires_grad = True
        tensor.zero_grad()
    loss = loss_fn()
    if not np.isfinite(loss.item()):
        raise NumericError(f"loss is not finite: {loss.item()}")
    backward(loss)

    errors: Dict[int, float] = {}
    for position, tensor in enumerate(tensors):
        analytic = tensor.grad.copy() if tensor.grad is not None else np.zeros_like(tensor.data)
        worst = 0.0
        for index in np.ndindex(tensor.data.shape):
            original = tensor.data[index]
            tensor.data[index] = original + eps
            plus = _evaluate(lambda _: loss_fn(), tensor)
            tensor.data[index] = original - eps
            minus = _evaluate(lambda _: loss_fn(), tensor)
            tensor.data[index] = original

            numeric = (plus - minus) / (2.0 * eps)
            error = abs(analytic[index] - numeric) / max(1.0, abs(analytic[index]))
            worst = max(worst, error)
        errors[position] = worst
    return errors
