"""Optimal polynomial approximants of 1/p in D_alpha(B_2).

For a polynomial p and a degree n, the approximant q_n minimizes
``||q p - 1||_alpha`` over polynomials q of total degree <= n. Since the
norm is a weighted l2 norm on coefficients this is a weighted linear
least-squares problem; the distance ``dist_sq(n)`` tends to zero exactly
when p is cyclic.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dalpha import as_weight, inner, norm_sq
from .errors import IllConditioned
from .poly2 import Poly2, multiply

__all__ = [
    "LeastSquaresSystem",
    "OpaCurve",
    "monomial_basis",
    "build_system",
    "solve_opa",
    "solve_opa_normal_equations",
    "opa_curve",
    "classify_trend",
]

COND_WARN = 1e12


def monomial_basis(n):
    """Exponents (k, l) with k + l <= n ordered by total degree, then k."""
    return [(k, s - k) for s in range(n + 1) for k in range(s + 1)]


@dataclass(frozen=True)
class LeastSquaresSystem:
    """Weighted coefficient matrix and target for min ||A c - b||.

    Column i holds sqrt(weight)-scaled coefficients of ``basis[i] * p`` over
    the monomials ``rows``; ``b`` is the scaled coefficient vector of 1.
    """

    matrix: np.ndarray
    target: np.ndarray
    basis: list
    rows: list


def build_system(p, n, aw):
    if p.is_zero():
        raise ValueError("the zero polynomial has no approximants")
    aw = as_weight(aw)
    basis = monomial_basis(n)
    rows = monomial_basis(n + p.degree)
    index = {key: i for i, key in enumerate(rows)}
    sqrt_w = np.sqrt([aw(k, l) for k, l in rows])
    a = np.zeros((len(rows), len(basis)), dtype=complex)
    for j, (bk, bl) in enumerate(basis):
        for (k, l), c in p.coeffs.items():
            a[index[(k + bk, l + bl)], j] = c
    a *= sqrt_w[:, None]
    b = np.zeros(len(rows), dtype=complex)
    b[0] = sqrt_w[0]
    return LeastSquaresSystem(a, b, basis, rows)


def _to_poly(coef, basis):
    return Poly2({key: c for key, c in zip(basis, coef)})


def solve_opa(p, n, aw, warn=True):
    """QR solution of the approximant problem.

    Returns ``(q, dist_sq, condition)``. ``dist_sq`` is recomputed as the
    D_alpha norm of ``q p - 1``; ``condition`` is the 2-norm condition number
    of the column-equilibrated system matrix.
    """
    aw = as_weight(aw)
    system = build_system(p, n, aw)
    a = system.matrix
    # column equilibration does not change the minimizer
    scale = np.linalg.norm(a, axis=0)
    a_eq = a / scale
    qmat, rmat = scipy.linalg.qr(a_eq, mode="economic")
    y = scipy.linalg.solve_triangular(rmat, qmat.conj().T @ system.target)
    coef = y / scale
    sv = np.linalg.svd(rmat, compute_uv=False)
    condition = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if warn and condition > COND_WARN:
        warnings.warn(f"approximant system has condition {condition:.3e}", IllConditioned,
                      stacklevel=2)
    q = _to_poly(coef, system.basis)
    residual = multiply(q, p) - 1
    return q, norm_sq(residual, aw), condition


def solve_opa_normal_equations(p, n, aw):
    """Gram-matrix (Cholesky) route; kept as an independent cross-check of :func:`solve_opa`."""
    aw = as_weight(aw)
    system = build_system(p, n, aw)
    a = system.matrix
    scale = np.linalg.norm(a, axis=0)
    a_eq = a / scale
    gram = a_eq.conj().T @ a_eq
    rhs = a_eq.conj().T @ system.target
    coef = scipy.linalg.cho_solve(scipy.linalg.cho_factor(gram), rhs) / scale
    q = _to_poly(coef, system.basis)
    return q, norm_sq(multiply(q, p) - 1, aw)


def orthogonality_residuals(p, q, n, aw):
    """|<q p - 1, m p>_alpha| for every basis monomial m of degree <= n."""
    aw = as_weight(aw)
    r = multiply(q, p) - 1
    return np.array([abs(inner(r, multiply(Poly2.monomial(k, l), p), aw))
                     for k, l in monomial_basis(n)])


def classify_trend(degrees, dist_sq):
    """Report tag for a distance curve.

    "decaying" when dist_sq(n_max) < 0.5 dist_sq(max(1, n_max // 8));
    "plateau" when the final octave n_max // 2 -> n_max loses less than 10%;
    "slow" otherwise. These thresholds are descriptive only.
    """
    lookup = dict(zip(degrees, dist_sq))
    n_max = max(degrees)
    first = lookup.get(max(1, n_max // 8))
    half = lookup.get(max(1, n_max // 2))
    last = lookup[n_max]
    if first is not None and last < 0.5 * first:
        return "decaying"
    if half is not None and half > 0 and last >= 0.9 * half:
        return "plateau"
    return "slow"


@dataclass
class OpaCurve:
    alpha: float
    p: Poly2
    degrees: list = field(default_factory=list)
    dist_sq: list = field(default_factory=list)
    condition: list = field(default_factory=list)
    q_best: Poly2 | None = None
    trend: str = ""

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "p": self.p.to_records(),
            "degrees": list(self.degrees),
            "dist_sq": list(self.dist_sq),
            "condition": list(self.condition),
            "q_best": self.q_best.to_records() if self.q_best is not None else None,
            "trend": self.trend,
        }

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "dist_sq", "condition"])
            for row in zip(self.degrees, self.dist_sq, self.condition):
                writer.writerow(row)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def opa_curve(p, aw, n_max, degrees=None):
    """Distances for n = 0..n_max (or the given degrees) with a trend tag.

    Raises :class:`IllConditioned` if any solve exceeds the condition cap.
    """
    aw = as_weight(aw)
    degrees = list(range(n_max + 1)) if degrees is None else sorted(degrees)
    curve = OpaCurve(alpha=aw.alpha, p=p)
    for n in degrees:
        q, d2, cond = solve_opa(p, n, aw, warn=False)
        if cond > COND_WARN:
            raise IllConditioned(f"condition {cond:.3e} at n={n}")
        curve.degrees.append(n)
        curve.dist_sq.append(d2)
        curve.condition.append(cond)
        curve.q_best = q
    curve.trend = classify_trend(curve.degrees, curve.dist_sq)
    return curve
