"""Coefficient-side norms of the Dirichlet-type spaces D_alpha(B_2).

For f = sum a_{k,l} z^k w^l the squared norm is

    ||f||_alpha^2 = sum (2+k+l)^alpha * k! l! / (1+k+l)! * |a_{k,l}|^2,

so monomials are orthogonal and every computation here is a weighted sum
over coefficients.
"""

from __future__ import annotations

import numbers
import threading

import numpy as np

from ._weights import log_weight, weight_table
from .poly2 import Poly2, TruncatedSeries2

__all__ = ["AlphaWeight", "weight", "norm_sq", "inner", "as_weight"]


class AlphaWeight:
    """The parameter alpha with a memoized weight table.

    The table grows on demand. Growth happens under a lock and replaces the
    table object in one assignment, so readers always see a consistent array.
    """

    def __init__(self, alpha, degree=16):
        self.alpha = float(alpha)
        self._lock = threading.Lock()
        self._table = weight_table(self.alpha, int(degree))

    def __repr__(self):
        return f"AlphaWeight(alpha={self.alpha!r}, degree={self.degree})"

    @property
    def degree(self):
        return self._table.shape[0] - 1

    def table(self, order):
        """Weights for all k+l <= order as an (order+1, order+1) array."""
        tab = self._table
        if tab.shape[0] <= order:
            with self._lock:
                if self._table.shape[0] <= order:
                    self._table = weight_table(self.alpha, max(order, 2 * self.degree))
                tab = self._table
        return tab[: order + 1, : order + 1]

    def __call__(self, k, l):
        if k < 0 or l < 0:
            raise ValueError("exponents must be nonnegative")
        if k + l <= self.degree:
            return float(self._table[k, l])
        return float(np.exp(log_weight(self.alpha, k, l)))


def as_weight(aw):
    """Accept either an :class:`AlphaWeight` or a bare alpha."""
    if isinstance(aw, AlphaWeight):
        return aw
    if isinstance(aw, numbers.Real):
        return AlphaWeight(aw)
    raise TypeError(f"expected AlphaWeight or real alpha, got {type(aw).__name__}")


def weight(aw, k, l):
    return as_weight(aw)(int(k), int(l))


def _coeff_array(f):
    if isinstance(f, TruncatedSeries2):
        return f.coeffs
    if isinstance(f, Poly2):
        return f.to_array()
    if isinstance(f, numbers.Number):
        return np.array([[complex(f)]])
    raise TypeError(f"cannot take the norm of {type(f).__name__}")


def norm_sq(f, aw):
    """Squared D_alpha norm. For a truncated series this is the norm of the known part;
    ``f.tail_hint`` is its truncation uncertainty."""
    aw = as_weight(aw)
    if isinstance(f, Poly2):
        return float(sum(aw(k, l) * abs(a) ** 2 for (k, l), a in f.coeffs.items()))
    arr = _coeff_array(f)
    n = arr.shape[0] - 1
    return float(np.sum(aw.table(n) * np.abs(arr) ** 2))


def inner(f, g, aw):
    """<f, g>_alpha, linear in f and conjugate-linear in g."""
    aw = as_weight(aw)
    if isinstance(f, Poly2) and isinstance(g, Poly2):
        return complex(sum(aw(k, l) * a * g.coeffs[(k, l)].conjugate()
                           for (k, l), a in f.coeffs.items() if (k, l) in g.coeffs))
    a, b = _coeff_array(f), _coeff_array(g)
    n = min(a.shape[0], b.shape[0]) - 1
    a, b = a[: n + 1, : n + 1], b[: n + 1, : n + 1]
    return complex(np.sum(aw.table(n) * a * b.conj()))
