"""Batched forward-mode automatic differentiation on numpy arrays.

A :class:`Dual` carries a value array of shape ``S`` together with a partials
array of shape ``S + (k,)`` holding directional derivatives along ``k`` seed
directions.  All arithmetic obeys the chain rule exactly, so gradients are
exact up to floating-point roundoff.  Components may themselves be ``Dual``
instances, which is how second (and higher) derivatives are obtained: the
partials of a nested dual are duals one level down.

Client code (metric implementations in particular) must go through the
elementwise helpers in this module (``sin``, ``cos``, ``sqrt``, ...) instead
of the ``numpy`` equivalents so that dispatch on duals works.
"""

from __future__ import annotations

import builtins

import numpy as np

from ..errors import NumericalError

__all__ = [
    "Dual",
    "sin", "cos", "tan", "sinh", "cosh", "exp", "log", "sqrt", "power",
    "sum", "stack", "concatenate", "quad_form", "matvec", "outer", "dot",
    "grad_forward", "jacobian_forward", "hessian_forward", "jvp",
    "value_of",
]


def _expand(a):
    """Append a unit axis so that ``a`` broadcasts against a partials array."""
    if isinstance(a, Dual):
        return a[..., None]
    return np.asarray(a)[..., None]


def _expand_index(idx, ndim):
    if not isinstance(idx, tuple):
        idx = (idx,)
    if any(e is Ellipsis for e in idx):
        n_used = builtins.sum(1 for e in idx if e is not None and e is not Ellipsis)
        i = idx.index(Ellipsis)
        fill = (slice(None),) * (ndim - n_used)
        idx = idx[:i] + fill + idx[i + 1 :]
    return idx


class Dual:
    """Value plus per-seed partial derivatives, batched over leading axes."""

    __slots__ = ("val", "eps")

    def __init__(self, val, eps):
        self.val = val
        self.eps = eps

    # -- array-like introspection -------------------------------------------------
    @property
    def shape(self):
        return self.val.shape

    @property
    def ndim(self):
        return self.val.ndim

    def __repr__(self):
        return f"Dual(val={self.val!r})"

    # -- indexing -------------------------------------------------------------
    def __getitem__(self, idx):
        idx = _expand_index(idx, self.ndim)
        return Dual(self.val[idx], self.eps[idx + (slice(None),)])

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.eps + other.eps)
        return Dual(self.val + other, self.eps)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.eps - other.eps)
        return Dual(self.val - other, self.eps)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.eps)

    def __neg__(self):
        return Dual(-self.val, -self.eps)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(
                self.val * other.val,
                self.eps * _expand(other.val) + _expand(self.val) * other.eps,
            )
        return Dual(self.val * other, self.eps * _expand(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.val
            val = self.val * inv
            return Dual(val, (self.eps - _expand(val) * other.eps) * _expand(inv))
        inv = 1.0 / np.asarray(other)
        return Dual(self.val * inv, self.eps * _expand(inv))

    def __rtruediv__(self, other):
        inv = 1.0 / self.val
        val = other * inv
        return Dual(val, -_expand(val * inv) * self.eps)

    def __pow__(self, p):
        if isinstance(p, Dual):
            raise TypeError("dual exponents are not supported")
        return power(self, p)


def _as_dual_like(a, ref):
    """Lift ``a`` to the dual structure of ``ref`` with zero partials."""
    if not isinstance(ref, Dual) or isinstance(a, Dual):
        return a
    val = _as_dual_like(np.asarray(a, dtype=float), ref.val)
    k = ref.eps.shape[-1]
    eps = _as_dual_like(np.zeros(np.shape(a) + (k,)), ref.eps)
    return Dual(val, eps)


# -- elementwise functions ----------------------------------------------------

def sin(x):
    if isinstance(x, Dual):
        return Dual(sin(x.val), _expand(cos(x.val)) * x.eps)
    return np.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return Dual(cos(x.val), -_expand(sin(x.val)) * x.eps)
    return np.cos(x)


def tan(x):
    return sin(x) / cos(x)


def sinh(x):
    if isinstance(x, Dual):
        return Dual(sinh(x.val), _expand(cosh(x.val)) * x.eps)
    return np.sinh(x)


def cosh(x):
    if isinstance(x, Dual):
        return Dual(cosh(x.val), _expand(sinh(x.val)) * x.eps)
    return np.cosh(x)


def exp(x):
    if isinstance(x, Dual):
        v = exp(x.val)
        return Dual(v, _expand(v) * x.eps)
    return np.exp(x)


def log(x):
    if isinstance(x, Dual):
        return Dual(log(x.val), x.eps / _expand(x.val))
    return np.log(x)


def sqrt(x):
    if isinstance(x, Dual):
        v = sqrt(x.val)
        return Dual(v, x.eps * _expand(0.5 / v))
    return np.sqrt(x)


def power(x, p):
    if isinstance(x, Dual):
        return Dual(power(x.val, p), _expand(p * power(x.val, p - 1)) * x.eps)
    return np.power(x, p)


# -- shape manipulation ---------------------------------------------------------

def sum(x, axis):
    """Sum over value axes (``axis`` counted against the value shape)."""
    if isinstance(x, Dual):
        ax = axis % x.ndim
        return Dual(sum(x.val, ax), sum(x.eps, ax))
    return np.sum(x, axis=axis)


def stack(parts, axis=0):
    if any(isinstance(p, Dual) for p in parts):
        ref = next(p for p in parts if isinstance(p, Dual))
        parts = [_as_dual_like(p, ref) for p in parts]
        ax = axis % (parts[0].ndim + 1)
        return Dual(
            stack([p.val for p in parts], ax),
            stack([p.eps for p in parts], ax),
        )
    return np.stack(parts, axis=axis)


def concatenate(parts, axis=0):
    if any(isinstance(p, Dual) for p in parts):
        ref = next(p for p in parts if isinstance(p, Dual))
        parts = [_as_dual_like(p, ref) for p in parts]
        ax = axis % parts[0].ndim
        return Dual(
            concatenate([p.val for p in parts], ax),
            concatenate([p.eps for p in parts], ax),
        )
    return np.concatenate(parts, axis=axis)


# -- small tensor algebra (broadcast based, dual safe) --------------------------

def outer(a, b):
    return a[..., :, None] * b[..., None, :]


def dot(a, b):
    return sum(a * b, -1)


def matvec(m, v):
    return sum(m * v[..., None, :], -1)


def quad_form(m, v):
    """``v^T m v`` over the trailing two axes of ``m``."""
    return sum(sum(m * v[..., None, :], -1) * v, -1)


def value_of(x):
    """Strip every dual layer, returning the underlying value array."""
    while isinstance(x, Dual):
        x = x.val
    return x


# -- driver routines -------------------------------------------------------------

def _identity_seeds(x):
    d = x.shape[-1]
    return np.broadcast_to(np.eye(d), x.shape + (d,))


def _check_finite(g, what):
    if not np.all(np.isfinite(g)):
        bad = np.argwhere(~np.isfinite(g))
        raise NumericalError(
            f"non-finite value in {what}", index=tuple(bad[0]) if bad.size else None
        )


def grad_forward(f, x):
    """Exact forward-mode gradient of a scalar map, batched over leading axes.

    ``f`` maps ``(..., d)`` points to ``(...)`` scalars and must be evaluable
    on duals.  All ``d`` seed directions are propagated in one sweep.
    """
    x = np.asarray(x, dtype=float)
    out = f(Dual(x, _identity_seeds(x)))
    if isinstance(out, Dual):
        g = np.asarray(value_of(out.eps))
        g = np.broadcast_to(g, x.shape).copy() if g.shape != x.shape else g
    else:  # constant map
        g = np.zeros(x.shape)
    _check_finite(g, "forward gradient")
    return g


def jacobian_forward(f, x):
    """Forward-mode Jacobian of an array-valued map.

    Output shape is ``f(x).shape + (d,)`` with ``d = x.shape[-1]``.
    """
    x = np.asarray(x, dtype=float)
    out = f(Dual(x, _identity_seeds(x)))
    if isinstance(out, Dual):
        j = np.asarray(value_of(out.eps))
    else:
        j = np.zeros(np.shape(out) + (x.shape[-1],))
    _check_finite(j, "forward jacobian")
    return j


def jvp(f, x, v):
    """Directional derivative of ``f`` at ``x`` along ``v`` (single seed)."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    out = f(Dual(x, v[..., None]))
    if isinstance(out, Dual):
        return value_of(out.val), np.asarray(value_of(out.eps))[..., 0]
    return out, np.zeros(np.shape(out))


def hessian_forward(f, x):
    """Symmetric matrix of second partials of a scalar map via nested duals.

    The raw forward-over-forward result is symmetrized as ``(H + H^T)/2``;
    roundoff asymmetry before symmetrization stays below ``1e-9`` for smooth
    inputs, which tests assert.
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    seeds = _identity_seeds(x)
    inner = Dual(x, seeds)
    outer_eps = Dual(np.broadcast_to(np.eye(d), x.shape + (d,)), np.zeros(x.shape + (d, d)))
    out = f(Dual(inner, outer_eps))
    if isinstance(out, Dual) and isinstance(out.eps, Dual):
        h = np.asarray(value_of(out.eps.eps))
    else:
        h = np.zeros(x.shape[:-1] + (d, d))
    _check_finite(h, "forward hessian")
    return 0.5 * (h + np.swapaxes(h, -1, -2))
