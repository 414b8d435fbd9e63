"""Dense SPD linear algebra on small matrices and deterministic reductions.

The batched Cholesky primitives come from a compiled extension when available
(``fforge.numerics._kernels``) with a pure-numpy fallback.  Selection happens
once at import; ``FFORGE_BACKEND`` forces it (``compiled``/``python``/``auto``).
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import NotSPD, ShapeError

_FORCED = os.environ.get("FFORGE_BACKEND", "auto").lower()

if _FORCED not in ("auto", "compiled", "python"):
    raise RuntimeError(f"FFORGE_BACKEND must be auto|compiled|python, got {_FORCED!r}")

if _FORCED == "python":
    from . import _kernels_py as _impl

    _BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        _BACKEND = "compiled"
    except ImportError:
        if _FORCED == "compiled":
            raise
        from . import _kernels_py as _impl

        _BACKEND = "python"


def backend_name() -> str:
    """Which kernel backend this process runs on."""
    return _BACKEND


def _as_batch(a):
    a = np.ascontiguousarray(a, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ShapeError(f"expected square matrices, got shape {a.shape}")
    lead = a.shape[:-2]
    return a.reshape((-1,) + a.shape[-2:]), lead


def _notspd(err: ValueError, lead) -> NotSPD:
    b, i, v = err.args[0]
    batch = tuple(np.unravel_index(b, lead)) if lead else None
    return NotSPD(
        f"Cholesky pivot {i} is {v:.6g} (batch index {batch})",
        pivot_index=int(i),
        pivot_value=float(v),
        batch_index=batch,
    )


def check_symmetric(a, rtol: float = 1e-10):
    a = np.asarray(a)
    scale = np.max(np.abs(a)) or 1.0
    gap = np.max(np.abs(a - np.swapaxes(a, -1, -2)))
    if gap > rtol * scale:
        raise NotSPD(f"matrix is asymmetric: |A - A^T| = {gap:.3g} (scale {scale:.3g})")


def cholesky_spd(a):
    """Lower Cholesky factors of one matrix or a stack; NotSPD on failure."""
    flat, lead = _as_batch(a)
    try:
        out = _impl.cholesky_many(flat)
    except ValueError as err:
        raise _notspd(err, lead) from None
    return out.reshape(lead + out.shape[-2:])


def spd_solve(a, b):
    """Solve ``a x = b`` for SPD ``a``; ``b`` a vector or matrix.

    Residual stays below ``1e-10 * ||b||`` for condition numbers under 1e8.
    """
    a = np.asarray(a, dtype=float)
    check_symmetric(a)
    b = np.asarray(b, dtype=float)
    if b.ndim == a.ndim - 1:
        return spd_solve_many(a[None] if a.ndim == 2 else a, b[None] if b.ndim == 1 else b)[0] \
            if a.ndim == 2 else spd_solve_many(a, b)
    # matrix right-hand side: solve column by column through the batched kernel
    if a.ndim != 2:
        raise ShapeError("matrix right-hand sides are supported for single systems only")
    cols = [spd_solve_many(a[None], c[None])[0] for c in b.T]
    return np.stack(cols, axis=-1)


def spd_solve_many(a, rhs):
    """Batched SPD solve: ``a`` is (..., d, d), ``rhs`` is (..., d)."""
    flat, lead = _as_batch(a)
    rhs = np.ascontiguousarray(rhs, dtype=float)
    if rhs.shape != lead + (flat.shape[-1],):
        raise ShapeError(f"rhs shape {rhs.shape} does not match matrices {lead + (flat.shape[-1],)}")
    try:
        out = _impl.solve_spd_many(flat, rhs.reshape(flat.shape[0], -1))
    except ValueError as err:
        raise _notspd(err, lead) from None
    return out.reshape(lead + (flat.shape[-1],))


def spd_inverse_many(a):
    """Batched SPD inverse of a (..., d, d) stack."""
    flat, lead = _as_batch(a)
    try:
        out = _impl.inverse_spd_many(flat)
    except ValueError as err:
        raise _notspd(err, lead) from None
    return out.reshape(lead + out.shape[-2:])


def sum_deterministic(terms, shape_hint=None):
    """Left-to-right sum of equal-shaped arrays, independent of any schedule.

    ``terms`` may be a sequence of arrays or one stacked array reduced along
    its leading axis.  An empty sequence needs ``shape_hint`` and returns
    zeros.  The fold order is fixed, so results are bit-identical across runs
    and across any parallel evaluation of the term producers.
    """
    if isinstance(terms, np.ndarray):
        terms = list(terms)
    else:
        terms = [np.asarray(t, dtype=float) for t in terms]
    if not terms:
        if shape_hint is None:
            raise ShapeError("empty sum needs a shape hint")
        return np.zeros(shape_hint)
    shape = terms[0].shape
    acc = np.array(terms[0], dtype=float, copy=True)
    for t in terms[1:]:
        if t.shape != shape:
            raise ShapeError(f"term shape {t.shape} != {shape}")
        acc += t
    return acc
