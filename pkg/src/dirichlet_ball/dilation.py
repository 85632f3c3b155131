"""Radial-dilation quotients q_r = p / p_r and their D_alpha norms as r -> 1.

The D_alpha norm of q_r stays bounded as r -> 1 exactly in the cyclic
regime, so the sweep reports a growth exponent e in
``||q_r||^2 ~ A + C (1-r)^(-e)`` rather than a yes/no answer.

Long expansions are streamed shell by shell in normalized coefficients
``a_{k,l} sqrt(k! l! / (k+l)!)``. Raw coefficients of 1/p_r grow like
2^(s/2) on the diagonal and overflow doubles past total degree ~2000;
the normalized ones stay O(1).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar, nnls

from ._parallel import pmap
from .dalpha import as_weight
from .errors import InteriorZero, TruncationFailure, ZeroConstantTerm
from .poly2 import Poly2, TruncatedSeries2, _last_shell_norm, dilate

__all__ = [
    "DilationPoint",
    "DilationCurve",
    "GrowthFit",
    "quotient_series",
    "quotient_shells",
    "dilation_norm",
    "dilation_sweep",
    "fit_growth_exponent",
    "default_r_grid",
]

DEFAULT_CAP = 4096
SWEEP_CAP = 32768
_POSITIVE_MIN = 1e-12


def default_r_grid(k_max=10):
    return [1.0 - 2.0 ** -k for k in range(1, k_max + 1)]


def _check_nonvanishing(p, r):
    from .boundary import interior_min

    m, _ = interior_min(dilate(p, r))
    if not m > _POSITIVE_MIN:
        raise InteriorZero(f"p vanishes on the closed ball of radius {r} (min |p| = {m:.3e})")


def _divide_dilated(p, r, n):
    """Coefficients of p / p_r through total degree n from p_r q = p, shell by shell.

    Solving for q directly avoids the cancellation in p * (1/p_r); the
    recurrence runs in extended precision where the platform has it.
    """
    ld = np.clongdouble
    rr = np.longdouble(r)
    p00 = ld(p.constant_term())
    terms = [(i, j, ld(c) * rr ** (i + j)) for (i, j), c in p.coeffs.items() if i + j > 0]
    q = np.zeros((n + 1, n + 1), dtype=ld)
    for (i, j), c in p.coeffs.items():
        if i + j <= n:
            q[i, j] = ld(c)
    for s in range(n + 1):
        k = np.arange(s + 1)
        l = s - k
        acc = q[k, l].copy()
        for i, j, c in terms:
            m = (k >= i) & (l >= j)
            acc[m] -= c * q[k[m] - i, l[m] - j]
        q[k, l] = acc / p00
    return q.astype(complex)


def quotient_series(p, r, order, check=True, alpha=0.0):
    """Truncated series of p(z, w) / p(r z, r w) through total degree ``order``."""
    if p.constant_term() == 0:
        raise ZeroConstantTerm("p(0, 0) = 0")
    n = int(order)
    if p.degree == 0 or r == 1.0:
        one = np.zeros((n + 1, n + 1), dtype=complex)
        one[0, 0] = 1.0
        return TruncatedSeries2(one, exact=True)
    if check:
        _check_nonvanishing(p, r)
    arr = _divide_dilated(p, r, n)
    return TruncatedSeries2(arr, exact=False, tail_hint=_last_shell_norm(arr, n, alpha))


def _norm_factor(kk, s, i, j):
    """sqrt(b(K, L) / b(K-i, L-j)) with b(k, l) = k! l! / (k+l)!, for K in ``kk``, L = s - K."""
    ll = s - kk
    num = np.ones(kk.shape)
    for t in range(i):
        num *= kk - t
    for t in range(j):
        num *= ll - t
    den = 1.0
    for t in range(i + j):
        den *= s - t
    return np.sqrt(num / den)


def quotient_shells(p, r):
    """Yield normalized shells of q_r = p / p_r for s = 0, 1, 2, ...

    Shell ``s`` is an array of length s+1 holding ``q_{K, s-K} sqrt(K!(s-K)!/s!)``.
    """
    p00 = p.constant_term()
    if p00 == 0:
        raise ZeroConstantTerm("p(0, 0) = 0")
    terms = [(i, j, c) for (i, j), c in p.coeffs.items()]
    higher = [(i, j, c * r ** (i + j)) for i, j, c in terms if i + j > 0]
    depth = p.degree
    g = {0: np.array([1.0 / p00], dtype=complex)}
    s = 0
    while True:
        if s > 0:
            acc = np.zeros(s + 1, dtype=complex)
            for i, j, c in higher:
                m = i + j
                if m > s:
                    continue
                kk = np.arange(i, s - j + 1)
                acc[i:s - j + 1] += c * _norm_factor(kk, s, i, j) * g[s - m]
            g[s] = -acc / p00
            g.pop(s - depth - 1, None)
        q = np.zeros(s + 1, dtype=complex)
        for i, j, c in terms:
            m = i + j
            if m > s:
                continue
            kk = np.arange(i, s - j + 1)
            q[i:s - j + 1] += c * _norm_factor(kk, s, i, j) * g[s - m]
        yield q
        s += 1


class DilationPoint(NamedTuple):
    norm_sq: float
    order: int
    tail_hint: float
    shift_norm_sq: float


def _tail_estimate(shell_norms, window):
    """Geometric extrapolation of the remaining tail from the last two blocks.

    Blocks span ``2 * window`` shells so that coefficient patterns periodic in
    the total degree (e.g. only even shells) land evenly in both blocks.
    """
    window = 2 * window
    last = math.fsum(shell_norms[-window:])
    prev = math.fsum(shell_norms[-2 * window:-window])
    if last == 0.0:
        return 0.0
    if prev <= 0.0 or last >= prev:
        return math.inf
    rho = last / prev
    return last * rho / (1.0 - rho)


def dilation_norm(p, r, aw, tol=1e-10, cap=DEFAULT_CAP, check=True, start=16):
    """||p/p_r||_alpha^2 with an adaptive truncation order.

    The expansion is checked at orders start, 2*start, 4*start, ... and stops
    once each of the last ``max(3, deg p)`` shells contributes less than
    ``tol`` times the running total. The value is computed a second time as
    ``||2q + R q||^2_{alpha-2}``; both are returned.
    """
    aw = as_weight(aw)
    alpha = aw.alpha
    if p.constant_term() == 0:
        raise ZeroConstantTerm("p(0, 0) = 0")
    if p.degree == 0 or r == 1.0:
        return DilationPoint(2.0 ** alpha, 0, 0.0, 2.0 ** alpha)
    if check:
        _check_nonvanishing(p, r)
    window = max(3, p.degree)
    shell_norms = []
    shift_norms = []
    checkpoint = max(int(start), 4 * window)
    for s, q in enumerate(quotient_shells(p, r)):
        mass = float(np.sum(q.real ** 2 + q.imag ** 2)) / (s + 1.0)
        shell_norms.append((2.0 + s) ** alpha * mass)
        shift_norms.append((2.0 + s) ** (alpha - 2.0) * (2.0 + s) ** 2 * mass)
        if s == checkpoint:
            total = math.fsum(shell_norms)
            if all(v < tol * total for v in shell_norms[-window:]):
                tail = _tail_estimate(shell_norms, window)
                return DilationPoint(total, s, tail, math.fsum(shift_norms))
            if checkpoint >= cap:
                raise TruncationFailure(
                    f"tail criterion not met by order {cap} at r={r}",
                    order=s, norm_sq=total, tail_hint=_tail_estimate(shell_norms, window))
            checkpoint = min(2 * checkpoint, cap)


@dataclass(frozen=True)
class GrowthFit:
    """Fit of ``A + C x^e`` with x = 1/(1-r), A, C, e >= 0; ``loglog_slope`` is the plain
    least-squares slope of log(norm^2) against -log(1-r) over all usable points."""

    exponent: float
    amplitude: float
    offset: float
    residual: float
    n_points: int
    loglog_slope: float


def _offset_power_residual(e, x, v):
    m = np.stack([1.0 / v, x ** e / v], axis=1)
    coef, res = nnls(m, np.ones_like(v))
    return res, coef


def fit_growth_exponent(one_minus_r, values):
    """Growth exponent of ``values ~ A + C (1-r)^(-e)`` over the upper half of the grid.

    Only the half of the points closest to r = 1 enter the exponent fit; the
    exponent describes r -> 1 and the small-r points carry O(1) shape
    effects. Residuals are relative, i.e. roughly log-scale.
    """
    omr = np.asarray(one_minus_r, dtype=float)
    v = np.asarray(values, dtype=float)
    order = np.argsort(-omr)
    omr, v = omr[order], v[order]
    if v.size >= 2:
        slope = float(np.polyfit(-np.log(omr), np.log(v), 1)[0])
    else:
        slope = math.nan
    keep = max(3, (v.size + 1) // 2)
    x = 1.0 / omr[-keep:]
    vv = v[-keep:]
    if vv.size < 3:
        return GrowthFit(math.nan, math.nan, math.nan, math.nan, int(vv.size), slope)
    grid = np.linspace(0.0, 4.0, 4001)
    res = np.array([_offset_power_residual(e, x, vv)[0] for e in grid])
    best = int(np.argmin(res))
    e_best = grid[best]
    lo, hi = grid[max(best - 1, 0)], grid[min(best + 1, grid.size - 1)]
    if hi > lo:
        opt = minimize_scalar(lambda e: _offset_power_residual(e, x, vv)[0],
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-6})
        if opt.fun < res[best]:
            e_best = float(opt.x)
    r_best, (a_coef, c_coef) = _offset_power_residual(e_best, x, vv)
    if c_coef <= 0.0:
        # no growth term survives: the data are consistent with a bounded norm
        e_best = 0.0
    rms = float(r_best / math.sqrt(vv.size))
    return GrowthFit(float(e_best), float(c_coef), float(a_coef), rms, int(vv.size), slope)


@dataclass
class DilationCurve:
    alpha: float
    p: Poly2
    r_grid: list = field(default_factory=list)
    norm_sq_values: list = field(default_factory=list)
    truncation_orders: list = field(default_factory=list)
    tail_hints: list = field(default_factory=list)
    shift_norm_sq_values: list = field(default_factory=list)
    usable: list = field(default_factory=list)
    fit: GrowthFit | None = None

    @property
    def exponent(self):
        return self.fit.exponent if self.fit else math.nan

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "p": self.p.to_records(),
            "r_grid": list(self.r_grid),
            "norm_sq": list(self.norm_sq_values),
            "order": list(self.truncation_orders),
            "tail_hint": [t if math.isfinite(t) else None for t in self.tail_hints],
            "shift_norm_sq": list(self.shift_norm_sq_values),
            "usable": list(self.usable),
            "fit": None if self.fit is None else self.fit.__dict__,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r", "one_minus_r", "norm_sq", "order", "tail_hint"])
            for r, v, n, t in zip(self.r_grid, self.norm_sq_values,
                                  self.truncation_orders, self.tail_hints):
                writer.writerow([r, 1.0 - r, v, n, t])


def dilation_sweep(p, aw, r_grid=None, tol=1e-8, cap=SWEEP_CAP, check=True):
    """Norms of p/p_r over ``r_grid`` (default 1 - 2^-k, k = 1..10) plus a growth fit.

    A point whose truncation fails, whose tail estimate exceeds 1% of its
    value, or whose two norm evaluations disagree beyond 1e-10 is kept but
    marked unusable and left out of the fit.
    """
    aw = as_weight(aw)
    r_grid = default_r_grid() if r_grid is None else list(r_grid)
    if check:
        _check_nonvanishing(p, max(r_grid))

    def one(r):
        try:
            return dilation_norm(p, r, aw, tol=tol, cap=cap, check=False)
        except TruncationFailure as exc:
            return DilationPoint(exc.norm_sq, exc.order, math.inf, math.nan)

    points = pmap(one, r_grid)
    curve = DilationCurve(alpha=aw.alpha, p=p)
    for r, pt in zip(r_grid, points):
        curve.r_grid.append(r)
        curve.norm_sq_values.append(pt.norm_sq)
        curve.truncation_orders.append(pt.order)
        curve.tail_hints.append(pt.tail_hint)
        curve.shift_norm_sq_values.append(pt.shift_norm_sq)
        consistent = abs(pt.shift_norm_sq - pt.norm_sq) <= 1e-10 * abs(pt.norm_sq)
        curve.usable.append(bool(pt.tail_hint < 0.01 * pt.norm_sq and consistent))
    idx = [i for i, ok in enumerate(curve.usable) if ok]
    curve.fit = fit_growth_exponent([1.0 - curve.r_grid[i] for i in idx],
                                    [curve.norm_sq_values[i] for i in idx])
    return curve
