"""Pure-numpy fallback for the compiled Cholesky kernels.

Same call signatures and failure contract as ``_kernels``; selected at import
time when the extension is unavailable or ``FFORGE_BACKEND=python`` is set.
"""

from __future__ import annotations

import numpy as np


def _locate_failure(a):
    """Find the first non-SPD matrix in the stack and its failing pivot."""
    for b in range(a.shape[0]):
        m = a[b]
        d = m.shape[0]
        L = np.zeros_like(m)
        for i in range(d):
            for j in range(i + 1):
                s = m[i, j] - L[i, :j] @ L[j, :j]
                if i == j:
                    if s <= 0.0:
                        raise ValueError((b, i, float(s)))
                    L[i, i] = np.sqrt(s)
                else:
                    L[i, j] = s / L[j, j]
    raise ValueError((0, 0, np.nan))  # pragma: no cover - numpy said SPD


def cholesky_many(a):
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        _locate_failure(np.asarray(a))


def solve_spd_many(a, rhs):
    cholesky_many(a)  # SPD gate with pivot reporting
    return np.linalg.solve(a, rhs[..., None])[..., 0]


def inverse_spd_many(a):
    cholesky_many(a)
    inv = np.linalg.inv(a)
    return 0.5 * (inv + np.swapaxes(inv, -1, -2))
