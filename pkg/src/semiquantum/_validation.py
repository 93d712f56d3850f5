"""Input checks shared by the estimator wrappers."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .operators import HermitianOperator, InvalidArgumentError
from .popt import PoptState


def check_operator(x, dims: Sequence[int] | None = None) -> HermitianOperator:
    """Coerce ``x`` (operator, POPT state or square array) to a HermitianOperator."""
    if isinstance(x, PoptState):
        return x.op
    if isinstance(x, HermitianOperator):
        if dims is not None and tuple(dims) != x.dims:
            raise InvalidArgumentError(f"expected dims {tuple(dims)}, got {x.dims}")
        return x
    m = np.asarray(x, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {m.shape}")
    if dims is None:
        side = m.shape[0]
        d = int(round(np.sqrt(side)))
        if d * d != side:
            raise InvalidArgumentError(f"cannot infer two equal subsystems for side {side}; pass dims")
        dims = (d, d)
    return HermitianOperator(m, tuple(dims))


def check_operators(xs, dims: Sequence[int] | None = None) -> list[HermitianOperator]:
    if isinstance(xs, (HermitianOperator, PoptState)) or (isinstance(xs, np.ndarray) and xs.ndim == 2):
        xs = [xs]
    ops = [check_operator(x, dims) for x in xs]
    if not ops:
        raise InvalidArgumentError("no operators given")
    return ops


def check_probability(p: float, name: str = "p") -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise InvalidArgumentError(f"{name} must lie in [0, 1], got {p}")
    return p


def check_is_fitted(estimator, attribute: str) -> None:
    if not hasattr(estimator, attribute):
        raise AttributeError(f"{type(estimator).__name__} is not fitted yet; call fit first")
