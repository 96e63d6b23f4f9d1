"""High-order finite differences on uniform grids."""
from functools import lru_cache
from math import factorial

import numpy as np


@lru_cache(maxsize=None)
def _weights(offsets, order):
    offsets = np.asarray(offsets, dtype=float)
    m = len(offsets)
    vander = np.vander(offsets, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[order] = factorial(order)
    return np.linalg.solve(vander, rhs)


def derivative(y, h, order=1, points=9):
    """Derivative of uniformly sampled ``y`` using ``points``-wide stencils.

    Interior samples use centred stencils; the first and last ``points // 2``
    samples use shifted stencils of the same width.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < points:
        raise ValueError(f"need at least {points} samples, got {n}")
    half = points // 2
    out = np.empty(n)
    w = _weights(tuple(range(-half, half + 1)), order)
    core = np.zeros(n - 2 * half)
    for j, wj in enumerate(w):
        core += wj * y[j:n - 2 * half + j]
    out[half:n - half] = core
    for i in list(range(half)) + list(range(n - half, n)):
        start = min(max(i - half, 0), n - points)
        wi = _weights(tuple(range(start - i, start - i + points)), order)
        out[i] = wi @ y[start:start + points]
    return out / h**order
