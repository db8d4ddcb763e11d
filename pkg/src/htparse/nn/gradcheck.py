from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from .autodiff import Expr, Parameter, backward, numeric_gradient


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """||a - n|| / max(||a||, ||n||), zero when both vanish."""
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / scale)


def gradcheck(build: Callable[[], Expr], params: Iterable[Parameter], step: float = 1e-5,
              entries: int | None = None, rng: np.random.Generator | None = None) -> dict[str, float]:
    """Compare backprop against central differences, per parameter.

    ``build`` must construct a fresh scalar loss graph on each call.  With
    ``entries`` set, only that many randomly chosen coordinates of each
    parameter are checked.
    """
    params = list(params)
    grads = backward(build(), params)
    rng = rng or np.random.default_rng(0)
    errors = {}
    for p in params:
        if entries is None or p.value.size <= entries:
            idx = list(np.ndindex(*p.value.shape))
        else:
            flat = rng.choice(p.value.size, size=entries, replace=False)
            idx = [np.unravel_index(int(f), p.value.shape) for f in flat]
        num = numeric_gradient(lambda: float(build().value), p, step, idx)
        a = np.array([grads[p][i] for i in idx])
        n = np.array([num[i] for i in idx])
        errors[p.name] = relative_error(a, n)
    return errors
