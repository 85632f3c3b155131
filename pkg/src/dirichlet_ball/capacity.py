"""Riesz alpha-energies of discrete measures on the unit sphere of C^2.

The kernel is applied to t = |1 - <x, y>| (the squared anisotropic
distance): ``K(t) = t^(alpha-2)`` for 0 < alpha < 2 and ``log(e/t)`` at
alpha = 2. Discrete energies leave out the diagonal. Whether a set carries
positive capacity is read off from how minimized energies on n-point
subsamples behave as n doubles, never from a single number.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import pmap
from .boundary import SpherePoint, ZeroSetReport
from .errors import AlphaOutOfRange, DuplicateSupportPoints, NonpositiveArgument

__all__ = [
    "DiscreteMeasure",
    "CapacityReport",
    "Curve",
    "aniso_dist",
    "kernel",
    "kernel_matrix",
    "energy",
    "minimize_energy",
    "project_simplex",
    "capacity_scan",
]

DEFAULT_GRID = (64, 128, 256, 512, 1024, 2048)
_DUPLICATE_T = 1e-14


def _as_xy(points):
    if isinstance(points, np.ndarray) and points.ndim == 2 and points.shape[1] == 2:
        return points.astype(complex)
    return np.array([[pt.zeta, pt.eta] if isinstance(pt, SpherePoint) else list(pt)
                     for pt in points], dtype=complex).reshape(-1, 2)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability measure with finitely many atoms on the sphere."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        xy = _as_xy(self.points)
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (xy.shape[0],):
            raise ValueError("one weight per support point is required")
        if np.any(w < 0.0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "points", xy)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, points):
        xy = _as_xy(points)
        return cls(xy, np.full(xy.shape[0], 1.0 / xy.shape[0]))

    @property
    def support(self):
        return [SpherePoint.make(a, b) for a, b in self.points]

    def entropy(self):
        w = self.weights[self.weights > 0]
        return float(-np.sum(w * np.log(w)))


def aniso_dist(x, y):
    """|1 - <x, y>|^(1/2) with <x, y> = x1 conj(y1) + x2 conj(y2)."""
    a = _as_xy([x])[0]
    b = _as_xy([y])[0]
    return math.sqrt(abs(1.0 - (a[0] * b[0].conjugate() + a[1] * b[1].conjugate())))


def _check_alpha(alpha):
    if not 0.0 < alpha <= 2.0:
        raise AlphaOutOfRange(f"alpha={alpha} outside (0, 2]")


def kernel(alpha, t):
    """K_alpha(t); works elementwise on arrays."""
    _check_alpha(alpha)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0):
        raise NonpositiveArgument("kernel argument must be positive")
    out = 1.0 - np.log(t) if alpha == 2.0 else t ** (alpha - 2.0)
    return float(out) if out.ndim == 0 else out


def kernel_matrix(points, alpha):
    """K_alpha(|1 - <x_i, x_j>|) with zeros on the diagonal."""
    _check_alpha(alpha)
    xy = _as_xy(points)
    t = np.abs(1.0 - xy @ xy.conj().T)
    np.fill_diagonal(t, 1.0)
    if t.min() <= _DUPLICATE_T:
        raise DuplicateSupportPoints("two support points coincide")
    k = kernel(alpha, t)
    np.fill_diagonal(k, 0.0)
    return k


def energy(mu, alpha):
    """Off-diagonal discrete energy sum_{i != j} w_i w_j K(|1 - <x_i, x_j>|)."""
    if mu.weights.size < 2:
        return 0.0
    k = kernel_matrix(mu.points, alpha)
    return float(mu.weights @ k @ mu.weights)


def project_simplex(v):
    """Euclidean projection onto {w >= 0, sum w = 1} (sort-based)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def minimize_energy(support, alpha, max_iter=10_000, tol=1e-9, kmat=None):
    """Minimizer of the discrete energy over weights on ``support``.

    The off-diagonal form alone is indefinite (it vanishes at every vertex of
    the simplex), so each atom also interacts with itself at the largest
    off-diagonal kernel value d, i.e. the objective is ``w K w + d |w|^2``.
    A constant d keeps circulant supports uniform, and the off-diagonal energy
    of the result never exceeds that of the uniform measure.

    Projected gradient from the uniform measure with step 1/(2 max row sum),
    stopped after ``max_iter`` steps or when the projected-gradient residual
    drops below ``tol`` relative to the gradient scale.
    """
    xy = _as_xy(support)
    n = xy.shape[0]
    if n < 2:
        raise ValueError("at least two support points are required")
    k = kernel_matrix(xy, alpha) if kmat is None else kmat
    q = k + float(np.max(k)) * np.eye(n)
    step = 1.0 / (2.0 * float(np.max(np.sum(np.abs(q), axis=1))))
    w = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        g = 2.0 * (q @ w)
        w_new = project_simplex(w - step * g)
        resid = float(np.max(np.abs(w_new - w))) / step
        w = w_new
        if resid <= tol * max(1.0, float(np.max(np.abs(g)))):
            break
    w = np.maximum(w, 0.0)
    return DiscreteMeasure(xy, w / w.sum())


class Curve:
    """Closed curve on the sphere given by a 2pi-periodic map theta -> (zeta, eta)."""

    def __init__(self, func):
        self.func = func

    @classmethod
    def model(cls):
        """theta -> (e^{i theta}, e^{-i theta}) / sqrt(2), the boundary zeros of 1 - 2 z w."""
        s = 1.0 / math.sqrt(2.0)
        return cls(lambda th: np.stack([s * np.exp(1j * th), s * np.exp(-1j * th)], -1))

    @classmethod
    def from_polyline(cls, samples):
        """Arclength parametrization of a closed polyline of real 4-vectors, renormalized to the sphere."""
        x = np.asarray(samples, dtype=float)
        if np.linalg.norm(x[0] - x[-1]) > 1e-12:
            x = np.vstack([x, x[:1]])
        seg = np.linalg.norm(np.diff(x, axis=0), axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)]) / seg.sum() * 2.0 * math.pi

        def func(th):
            th = np.mod(th, 2.0 * math.pi)
            cols = [np.interp(th, s, x[:, i]) for i in range(4)]
            v = np.stack(cols, -1)
            v /= np.linalg.norm(v, axis=-1, keepdims=True)
            return np.stack([v[..., 0] + 1j * v[..., 1], v[..., 2] + 1j * v[..., 3]], -1)

        return cls(func)

    def sample(self, n):
        return self.func(2.0 * math.pi * np.arange(n) / n)


@dataclass
class CapacityReport:
    """Minimized energies E_n over a grid of sample sizes and what their growth suggests.

    ``classification`` is "convergent" (positive capacity evidence) when the
    last doubling changes E_n by less than 5%, otherwise "divergent" (zero
    capacity evidence) with ``growth_law`` "power" or "log".
    """

    alpha: float
    n_values: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    entropies: list = field(default_factory=list)
    classification: str = ""
    growth_law: str | None = None
    power_exponent: float = math.nan
    log_increment: float = math.nan
    notes: list = field(default_factory=list)

    def ratios(self):
        return [b / a for a, b in zip(self.energies, self.energies[1:])]

    def increments(self):
        return [b - a for a, b in zip(self.energies, self.energies[1:])]

    def to_dict(self):
        return {k: (None if isinstance(v, float) and math.isnan(v) else v)
                for k, v in self.__dict__.items()}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "E_n", "entropy"])
            for row in zip(self.n_values, self.energies, self.entropies):
                writer.writerow(row)


def _classify(report):
    e = report.energies
    if len(e) < 2:
        report.classification = "convergent"
        report.notes.append("single sample size; no scaling information")
        return report
    change = abs(e[-1] - e[-2]) / e[-2]
    if change < 0.05:
        report.classification = "convergent"
        return report
    report.classification = "divergent"
    logn = np.log(report.n_values[-3:])
    report.power_exponent = float(np.polyfit(logn, np.log(e[-3:]), 1)[0])
    inc = report.increments()[-2:]
    report.log_increment = float(np.mean(inc))
    ratios = report.ratios()[-2:]
    spread_log = abs(inc[-1] - inc[0]) / abs(np.mean(inc)) if len(inc) == 2 else math.inf
    spread_pow = abs(ratios[-1] - ratios[0]) / abs(np.mean(ratios) - 1.0) if len(ratios) == 2 else math.inf
    report.growth_law = "log" if spread_log <= spread_pow else "power"
    return report


def capacity_scan(source, alpha, n_grid=DEFAULT_GRID):
    """Minimized energies on n-point subsamples of a curve or a finite set.

    ``source`` is a :class:`Curve`, a :class:`ZeroSetReport` (curve or
    finite) or a sequence of points. Curves are sampled equispaced in their
    parameter; finite sets use all their points for every n.
    """
    _check_alpha(alpha)
    if isinstance(source, ZeroSetReport):
        if source.kind == "curve":
            source = Curve.from_polyline(source.curves[0])
        elif source.kind == "finite":
            source = source.points
        else:
            raise ValueError(f"no boundary zeros to measure (class {source.kind})")
    report = CapacityReport(alpha=float(alpha))
    if isinstance(source, Curve):
        sizes = [int(n) for n in n_grid]
        supports = [source.sample(n) for n in sizes]
    else:
        xy = _as_xy(source)
        sizes = [xy.shape[0]]
        supports = [xy]
        report.notes.append("finite set: every atom has finite energy")
    if sizes[0] < 2:
        report.n_values, report.energies, report.entropies = sizes, [0.0], [0.0]
        report.classification = "convergent"
        report.notes.append("single atom: empty off-diagonal sum")
        return report

    def run(xy):
        k = kernel_matrix(xy, alpha)
        mu = minimize_energy(xy, alpha, kmat=k)
        return float(mu.weights @ k @ mu.weights), mu.entropy()

    results = pmap(run, supports)
    report.n_values = sizes
    report.energies = [r[0] for r in results]
    report.entropies = [r[1] for r in results]
    return _classify(report)
