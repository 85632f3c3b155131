"""Quadrature on the unit ball of C^2 and on the unit disk.

The ball integrals are written in the coordinates

    z = sqrt(s) e^{i phi},  w = sqrt(t) e^{i psi},

where the normalized volume measure becomes ``2 ds dt (dphi/2pi) (dpsi/2pi)``
over the simplex ``s, t >= 0, s + t < 1``. The simplex part uses collapsed
Gauss-Jacobi rules carrying the weight ``(1-s-t)^(-alpha)``; the phases use
the periodic trapezoid rule, which is exact for trigonometric polynomials.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import AlphaOutOfRange, OutsideBall, ParameterOutOfRange
from .poly2 import Poly2, differentiate, evaluate

__all__ = [
    "QuadratureGrid",
    "Estimate",
    "integrand",
    "integrand_direct",
    "seminorm",
    "forelli_rudin_integral",
    "forelli_rudin_ratio",
    "write_convergence_csv",
]


class Estimate(NamedTuple):
    value: float
    error: float


def _jacobi_01(n, a, b=0.0):
    """Gauss-Jacobi rule on [0, 1] for the weight (1-x)^a x^b."""
    x, w = roots_jacobi(n, a, b)
    return (x + 1.0) / 2.0, w / 2.0 ** (a + b + 1.0)


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor grid on the simplex times the two phase circles.

    ``s``, ``t`` and ``weights`` are flattened simplex nodes; the weights
    already include ``(1-s-t)^(-alpha)``, so they sum to
    ``1 / ((1-alpha)(2-alpha))``.
    """

    alpha: float
    n_radial: int
    n_angular: int
    s: np.ndarray
    t: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(cls, alpha, n_radial, n_angular):
        if not -1.0 < alpha < 1.0:
            raise AlphaOutOfRange(f"alpha={alpha} outside (-1, 1)")
        # s = x, t = (1-x) y  =>  1-s-t = (1-x)(1-y),  ds dt = (1-x) dx dy
        x, wx = _jacobi_01(n_radial, 1.0 - alpha)
        y, wy = _jacobi_01(n_radial, -alpha)
        xx, yy = np.meshgrid(x, y, indexing="ij")
        ww = np.outer(wx, wy)
        return cls(float(alpha), int(n_radial), int(n_angular),
                   xx.ravel(), ((1.0 - xx) * yy).ravel(), ww.ravel())

    @classmethod
    def for_degree(cls, alpha, degree, refine=0):
        n_rad = degree // 2 + 3 + 4 * refine
        n_ang = (2 * degree + 1) * (2 ** refine)
        return cls.build(alpha, n_rad, max(n_ang, 3))

    @property
    def size(self):
        return self.weights.size * self.n_angular ** 2

    def domain_measure(self):
        return 1.0 / ((1.0 - self.alpha) * (2.0 - self.alpha))


def _check_inside(z, w):
    r2 = np.abs(z) ** 2 + np.abs(w) ** 2
    if np.any(r2 >= 1.0):
        raise OutsideBall("point(s) outside the open unit ball")
    return r2


def _derivs(f):
    fz = differentiate(f, "dz")
    fw = differentiate(f, "dw")
    return fz, fw


def integrand(f, z, w, _derivatives=None):
    """||grad f||^2 - |R f|^2 in the expanded, termwise nonnegative form

        ||grad f||^2 (1 - |z|^2 - |w|^2) + |conj(z) f_w - conj(w) f_z|^2.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    r2 = _check_inside(z, w)
    fz, fw = _derivatives or _derivs(f)
    a = evaluate(fz, z, w)
    b = evaluate(fw, z, w)
    grad2 = np.abs(a) ** 2 + np.abs(b) ** 2
    out = grad2 * (1.0 - r2) + np.abs(np.conj(z) * b - np.conj(w) * a) ** 2
    return float(out) if np.ndim(out) == 0 else out


def integrand_direct(f, z, w):
    """||grad f||^2 - |R f|^2 evaluated literally (reference for the expansion)."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    fz, fw = _derivs(f)
    a = evaluate(fz, z, w)
    b = evaluate(fw, z, w)
    out = np.abs(a) ** 2 + np.abs(b) ** 2 - np.abs(z * a + w * b) ** 2
    return float(out) if np.ndim(out) == 0 else out


def _grid_integral(f, grid, derivs):
    m = grid.n_angular
    ang = 2.0 * np.pi * np.arange(m) / m
    ephi = np.exp(1j * ang)
    # one simplex node at a time keeps the working set at m*m points
    vals = np.empty(grid.weights.size)
    for i, (s, t) in enumerate(zip(grid.s, grid.t)):
        z = math.sqrt(s) * ephi[:, None]
        w = math.sqrt(t) * ephi[None, :]
        vals[i] = integrand(f, z, w, derivs).mean()
    # sort before summing for an order-independent result
    terms = np.sort(grid.weights * vals)
    return 2.0 * math.fsum(terms)


def seminorm(f, alpha, grid=None):
    """Integral seminorm over B_2 with weight (1-|z|^2-|w|^2)^(-alpha).

    Returns an :class:`Estimate` whose error is the change against a
    refined grid.
    """
    if not -1.0 < alpha < 1.0:
        raise AlphaOutOfRange(f"alpha={alpha} outside (-1, 1)")
    deg = f.degree if isinstance(f, Poly2) else f.order
    derivs = _derivs(f)
    if grid is None:
        grid = QuadratureGrid.for_degree(alpha, deg)
    fine = QuadratureGrid.build(alpha, grid.n_radial + 4, 2 * grid.n_angular)
    coarse_val = _grid_integral(f, grid, derivs)
    fine_val = _grid_integral(f, fine, derivs)
    return Estimate(fine_val, abs(fine_val - coarse_val))


# Forelli-Rudin model integral on the disk


def _graded_panels(lo, hi, depth):
    """Panels on [lo, hi] halving in width toward ``hi``; the last one touches ``hi``."""
    edges = [lo]
    width = hi - lo
    for _ in range(depth):
        width /= 2.0
        edges.append(hi - width)
    edges.append(hi)
    return np.array(edges)


def forelli_rudin_integral(a, b, radius, n_radial=12, n_angular=16):
    """Normalized-area integral of (1-|w|)^a / |1 - conj(z) w|^(2+a+b) over the disk, z = radius."""
    if not a > -1.0 or not b > 0.0:
        raise ParameterOutOfRange(f"need a > -1 and b > 0, got a={a}, b={b}")
    rho = float(radius)
    if not 0.0 <= rho < 1.0:
        raise ParameterOutOfRange("radius must lie in [0, 1)")
    expo = 2.0 + a + b
    gap = max(1.0 - rho, 1e-16)
    depth = max(1, int(math.ceil(math.log2(1.0 / gap))) + 3)

    # radial: composite Gauss-Legendre graded toward r = 1, Gauss-Jacobi on the last panel
    edges = _graded_panels(0.0, 1.0, depth)
    xl, wl = roots_legendre(n_radial)
    r_nodes, r_wts = [], []
    for lo, hi in zip(edges[:-2], edges[1:-1]):
        h = hi - lo
        r = lo + h * (xl + 1.0) / 2.0
        r_nodes.append(r)
        r_wts.append(wl * h / 2.0 * (1.0 - r) ** a)
    lo = edges[-2]
    h = 1.0 - lo
    xj, wj = _jacobi_01(n_radial, a)
    r_nodes.append(lo + h * xj)
    r_wts.append(wj * h ** (a + 1.0))
    r = np.concatenate(r_nodes)
    wr = np.concatenate(r_wts)

    # angular: symmetric in theta, graded toward theta = 0 where the kernel peaks
    th_edges = np.concatenate([[0.0], np.pi * 2.0 ** -np.arange(depth, -1, -1.0)])
    xg, wg = roots_legendre(n_angular)
    th, wth = [], []
    for lo, hi in zip(th_edges[:-1], th_edges[1:]):
        h = hi - lo
        th.append(lo + h * (xg + 1.0) / 2.0)
        wth.append(wg * h / 2.0)
    th = np.concatenate(th)
    wth = 2.0 * np.concatenate(wth)

    kern = np.abs(1.0 - rho * r[:, None] * np.exp(1j * th[None, :])) ** (-expo)
    # dA = r dr dtheta / pi
    vals = (wr * r)[:, None] * wth[None, :] * kern / np.pi
    return math.fsum(np.sort(vals.ravel()))


def forelli_rudin_ratio(a, b, radii, n_radial=12, n_angular=16):
    """Integral times (1-|z|^2)^b for each |z| in ``radii``; tends to a constant as |z| -> 1."""
    out = []
    for rho in radii:
        if not 0.0 <= rho < 1.0:
            raise ParameterOutOfRange(f"radius {rho} outside [0, 1)")
        val = forelli_rudin_integral(a, b, rho, n_radial, n_angular)
        out.append(val * (1.0 - rho * rho) ** b)
    return out


def write_convergence_csv(path, rows):
    """Rows of (grid_size, value, error_estimate) with a header line."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["grid_size", "value", "error_estimate"])
        for row in rows:
            writer.writerow(row)
