"""Zeros of a polynomial on the closed unit ball of C^2 and on its boundary sphere.

Points of C^2 are handled either as complex pairs (z, w) or as real
4-vectors (Re z, Im z, Re w, Im w). For a polynomial with no zeros in the
open ball, the boundary zero set is either finite or contains a real curve;
:func:`classify_zero_set` decides which by trying to continue each zero
along the real system {Re p = 0, Im p = 0, |x|^2 = 1}.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import numpy.polynomial.polynomial as npoly
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from scipy.special import ndtri
from scipy.stats import qmc

from ._parallel import pmap
from .errors import FitResidualTooLarge, Inconclusive, InteriorZero, MultipleBranch
from .poly2 import Poly2, UnitarySpec, compose_unitary, differentiate

__all__ = [
    "SpherePoint",
    "MinResult",
    "ZeroSetReport",
    "BranchFit",
    "LojasiewiczFit",
    "interior_min",
    "sphere_zeros",
    "cluster_sphere_zeros",
    "classify_zero_set",
    "branch_gamma",
    "sphere_on_branch_defect",
    "lojasiewicz_fit",
]

ZERO_TOL = 1e-12
CLUSTER_RADIUS = 1e-6
INTERIOR_TOL = 1e-8
INTERIOR_RADIUS = 1.0 - 1e-4
MIN_ARC = 0.1
MIN_STEP = 1e-7
CURVE_STEP = 5e-3


@dataclass(frozen=True)
class SpherePoint:
    zeta: complex
    eta: complex
    residual: float = 0.0

    @classmethod
    def make(cls, zeta, eta):
        zeta, eta = complex(zeta), complex(eta)
        return cls(zeta, eta, abs(abs(zeta) ** 2 + abs(eta) ** 2 - 1.0))

    @classmethod
    def from_real(cls, x):
        return cls.make(complex(x[0], x[1]), complex(x[2], x[3]))

    def as_real(self):
        return np.array([self.zeta.real, self.zeta.imag, self.eta.real, self.eta.imag])

    def to_dict(self):
        return {"zeta": [self.zeta.real, self.zeta.imag],
                "eta": [self.eta.real, self.eta.imag],
                "residual": self.residual}


class _Evaluator:
    """Vectorized p, dp/dz, dp/dw for a fixed polynomial."""

    def __init__(self, p):
        self.p = p
        self.arr = p.to_array()
        self.arr_z = differentiate(p, "dz").to_array()
        self.arr_w = differentiate(p, "dw").to_array()
        self.scale = max(1.0, float(np.sum(np.abs(self.arr))))

    def value(self, z, w):
        return npoly.polyval2d(z, w, self.arr)

    def __call__(self, z, w):
        return (npoly.polyval2d(z, w, self.arr),
                npoly.polyval2d(z, w, self.arr_z),
                npoly.polyval2d(z, w, self.arr_w))


def _to_real(z, w):
    return np.stack([z.real, z.imag, w.real, w.imag], axis=-1)


def _project_ball(z, w):
    r = np.sqrt(np.abs(z) ** 2 + np.abs(w) ** 2)
    s = np.where(r > 1.0, 1.0 / np.maximum(r, 1e-300), 1.0)
    return z * s, w * s


def _sobol(d, n, seed):
    return qmc.Sobol(d, scramble=True, seed=seed).random(n)


def _sphere_samples(n, seed):
    """n quasi-random points on S^3, as complex pairs."""
    u = np.clip(_sobol(4, n, seed), 1e-12, 1.0 - 1e-12)
    g = ndtri(u)
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g[:, 0] + 1j * g[:, 1], g[:, 2] + 1j * g[:, 3]


def _ball_samples(n, seed):
    u = np.clip(_sobol(5, n, seed), 1e-12, 1.0 - 1e-12)
    g = ndtri(u[:, :4])
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    g *= u[:, 4:5] ** 0.25
    return g[:, 0] + 1j * g[:, 1], g[:, 2] + 1j * g[:, 3]


def _descend(ev, z, w, newton_iters=60, grad_iters=200):
    """Damped Newton toward zeros of p, then projected gradient on |p|^2; stays in the closed ball."""
    z, w = _project_ball(z.astype(complex), w.astype(complex))
    f = ev.value(z, w)
    for _ in range(newton_iters):
        _, a, b = ev(z, w)
        g2 = np.abs(a) ** 2 + np.abs(b) ** 2
        step = np.where(g2 > 1e-300, -f / np.where(g2 > 1e-300, g2, 1.0), 0.0)
        dz, dw = step * np.conj(a), step * np.conj(b)
        z, w, f, moved = _backtrack(ev, z, w, f, dz, dw)
        if not moved:
            break
    for _ in range(grad_iters):
        _, a, b = ev(z, w)
        g2 = np.abs(a) ** 2 + np.abs(b) ** 2
        # steepest descent on |p|^2 scaled to a Newton-sized step
        dz = -f * np.conj(a) / np.where(g2 > 1e-300, g2, 1.0)
        dw = -f * np.conj(b) / np.where(g2 > 1e-300, g2, 1.0)
        z, w, f, moved = _backtrack(ev, z, w, f, dz, dw)
        if not moved:
            break
    return z, w, np.abs(f)


def _backtrack(ev, z, w, f, dz, dw, halvings=30):
    t = np.ones(z.shape)
    done = np.zeros(z.shape, dtype=bool)
    new_z, new_w, new_f = z.copy(), w.copy(), f.copy()
    for _ in range(halvings):
        cz, cw = _project_ball(z + t * dz, w + t * dw)
        cf = ev.value(cz, cw)
        better = (~done) & (np.abs(cf) < np.abs(f))
        new_z[better], new_w[better], new_f[better] = cz[better], cw[better], cf[better]
        done |= better
        if done.all():
            break
        t = np.where(done, t, t / 2.0)
    return new_z, new_w, new_f, bool(done.any())


class MinResult(NamedTuple):
    value: float
    point: tuple


def _minimize_all(p, n_starts, seed, n_boundary):
    ev = _Evaluator(p)
    z0, w0 = _ball_samples(n_starts, seed)
    zs, ws = _sphere_samples(n_boundary, seed + 1)
    vals = np.abs(ev.value(zs, ws))
    best = np.argsort(vals)[:32]
    z = np.concatenate([z0, zs[best]])
    w = np.concatenate([w0, ws[best]])
    z, w, m = _descend(ev, z, w)
    # boundary candidates are polished on the sphere itself, where projected
    # steps converge slowly at tangential zeros
    on_sphere = np.abs(z) ** 2 + np.abs(w) ** 2 > 1.0 - 1e-9
    cz = np.concatenate([z[on_sphere], zs[best]])
    cw = np.concatenate([w[on_sphere], ws[best]])
    sz, sw, sm = _gauss_newton_sphere(ev, np.arctan2(np.abs(cw), np.abs(cz)),
                                      np.angle(cz), np.angle(cw))
    z = np.concatenate([z, sz, zs])
    w = np.concatenate([w, sw, ws])
    m = np.concatenate([m, sm, vals])
    return ev, z, w, m


def interior_min(p, tol=1e-12, n_starts=512, seed=0, n_boundary=4096):
    """Minimum of |p| over the closed unit ball and a point attaining it.

    Multistart descent from ``n_starts`` quasi-random points in the ball plus
    dense quasi-random sampling of the sphere. The result is a numerical
    minimum, not a certified bound. ``tol`` snaps values below it to 0.
    """
    if p.is_zero():
        return MinResult(0.0, (0j, 0j))
    if p.degree == 0:
        return MinResult(abs(p.constant_term()), (0j, 0j))
    _, z, w, m = _minimize_all(p, n_starts, seed, n_boundary)
    i = int(np.argmin(m))
    value = float(m[i])
    return MinResult(0.0 if value < tol else value, (complex(z[i]), complex(w[i])))


def _interior_witness(p, seed=0):
    """An exact zero strictly inside radius 1 - 1e-4, or None."""
    ev, z, w, m = _minimize_all(p, 512, seed, 4096)
    r = np.sqrt(np.abs(z) ** 2 + np.abs(w) ** 2)
    cand = np.flatnonzero((m < INTERIOR_TOL) & (r < INTERIOR_RADIUS))
    for i in cand[np.argsort(m[cand])][:16]:
        zz, ww = complex(z[i]), complex(w[i])
        # unconstrained min-norm Newton polish
        for _ in range(50):
            f, a, b = (complex(v) for v in ev(zz, ww))
            g2 = abs(a) ** 2 + abs(b) ** 2
            if abs(f) < 1e-15 * ev.scale or g2 == 0.0:
                break
            zz, ww = zz - f * a.conjugate() / g2, ww - f * b.conjugate() / g2
        f = complex(ev.value(zz, ww))
        if abs(f) < 1e-12 * ev.scale and abs(zz) ** 2 + abs(ww) ** 2 < INTERIOR_RADIUS ** 2:
            return (zz, ww), abs(f)
    return None


# zeros on the sphere


def _angles_to_point(th, ph, ps):
    return np.cos(th) * np.exp(1j * ph), np.sin(th) * np.exp(1j * ps)


def _gauss_newton_sphere(ev, th, ph, ps, max_iter=200):
    z, w = _angles_to_point(th, ph, ps)
    f = ev.value(z, w)
    active = np.ones(th.shape, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active & (np.abs(f) >= 1e-15 * ev.scale))
        if idx.size == 0:
            break
        t, a_, b_ = th[idx], ph[idx], ps[idx]
        zz, ww = _angles_to_point(t, a_, b_)
        _, a, b = ev(zz, ww)
        d_th = a * (-np.sin(t) * np.exp(1j * a_)) + b * (np.cos(t) * np.exp(1j * b_))
        d_ph = a * 1j * zz
        d_ps = b * 1j * ww
        jac = np.stack([np.stack([d_th.real, d_ph.real, d_ps.real], -1),
                        np.stack([d_th.imag, d_ph.imag, d_ps.imag], -1)], axis=1)
        rhs = np.stack([f[idx].real, f[idx].imag], -1)[..., None]
        step = -(np.linalg.pinv(jac, rcond=1e-12) @ rhs)[..., 0]
        scale = np.ones(idx.size)
        accepted = np.zeros(idx.size, dtype=bool)
        for _ in range(30):
            cz, cw = _angles_to_point(t + scale * step[:, 0], a_ + scale * step[:, 1],
                                      b_ + scale * step[:, 2])
            cf = ev.value(cz, cw)
            ok = (~accepted) & (np.abs(cf) < np.abs(f[idx]))
            sel = idx[ok]
            th[sel] = t[ok] + scale[ok] * step[ok, 0]
            ph[sel] = a_[ok] + scale[ok] * step[ok, 1]
            ps[sel] = b_[ok] + scale[ok] * step[ok, 2]
            f[sel] = cf[ok]
            accepted |= ok
            if accepted.all():
                break
            scale = np.where(accepted, scale, scale / 2.0)
        active[idx[~accepted]] = False
    z, w = _angles_to_point(th, ph, ps)
    return z, w, np.abs(f)


@dataclass
class Clusters:
    points: list
    radii: list
    sizes: list
    n_starts: int
    n_converged: int


def cluster_sphere_zeros(p, resolution=16, tol=ZERO_TOL, radius=CLUSTER_RADIUS):
    """Converged sphere zeros from an m^3 angle grid, grouped at ``radius``."""
    m = int(resolution)
    ev = _Evaluator(p)
    th = (np.arange(m) + 0.5) * (np.pi / 2.0) / m
    ang = 2.0 * np.pi * np.arange(m) / m
    th, ph, ps = (a.ravel().copy() for a in np.meshgrid(th, ang, ang, indexing="ij"))
    z, w, res = _gauss_newton_sphere(ev, th, ph, ps)
    ok = res < tol
    z, w, res = z[ok], w[ok], res[ok]
    if z.size == 0:
        return Clusters([], [], [], m ** 3, 0)
    x = _to_real(z, w)
    pairs = cKDTree(x).query_pairs(radius, output_type="ndarray")
    n = x.shape[0]
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    n_comp, labels = connected_components(graph, directed=False)
    points, radii, sizes = [], [], []
    for c in range(n_comp):
        members = np.flatnonzero(labels == c)
        rep = members[np.argmin(res[members])]
        points.append(SpherePoint.make(z[rep], w[rep]))
        radii.append(float(np.max(np.linalg.norm(x[members] - x[rep], axis=1))))
        sizes.append(int(members.size))
    order = np.lexsort((np.arange(len(points)), [-s for s in sizes]))
    return Clusters([points[i] for i in order], [radii[i] for i in order],
                    [sizes[i] for i in order], m ** 3, int(n))


def sphere_zeros(p, resolution=16):
    """Cluster representatives of the zeros of p on the unit sphere."""
    return cluster_sphere_zeros(p, resolution).points


# continuation


def _system(ev, x):
    z, w = complex(x[0], x[1]), complex(x[2], x[3])
    f, a, b = (complex(v) for v in ev(z, w))
    F = np.array([f.real, f.imag, x @ x - 1.0])
    J = np.array([[a.real, -a.imag, b.real, -b.imag],
                  [a.imag, a.real, b.imag, b.real],
                  2.0 * x])
    return F, J


def _null_basis(J, rel=1e-8):
    _, s, vh = np.linalg.svd(J)
    rank = int(np.sum(s > rel * max(s[0], 1e-300)))
    return vh[rank:]


def _correct(ev, xp, t, h):
    """Newton on {F = 0, t.(x - xp) = 0}; accepted only on a genuine zero of F."""
    tol = ev.scale * min(1e-13, 1e-3 * h * h)
    x = xp.copy()
    for _ in range(12):
        F, J = _system(ev, x)
        if np.linalg.norm(F) <= tol:
            return (np.linalg.norm(x - xp) <= h), x
        A = np.vstack([J, t])
        rhs = -np.concatenate([F, [t @ (x - xp)]])
        x = x + np.linalg.lstsq(A, rhs, rcond=None)[0]
    F, _ = _system(ev, x)
    return bool(np.linalg.norm(F) <= tol and np.linalg.norm(x - xp) <= h), x


class _Trace(NamedTuple):
    samples: np.ndarray
    arc: float
    status: str
    max_abs_p: float


def _trace(ev, x0, t0, h_max=CURVE_STEP, max_arc=100.0, max_steps=200000):
    x, t, h = x0.copy(), t0 / np.linalg.norm(t0), h_max
    samples, arc, worst = [x0.copy()], 0.0, 0.0
    for _ in range(max_steps):
        ok, xc = _correct(ev, x + h * t, t, h)
        if not ok:
            h /= 2.0
            if h < MIN_STEP:
                return _Trace(np.array(samples), arc, "collapsed", worst)
            continue
        arc += float(np.linalg.norm(xc - x))
        worst = max(worst, abs(complex(ev.value(complex(xc[0], xc[1]), complex(xc[2], xc[3])))))
        null = _null_basis(_system(ev, xc)[1])
        tn = null.T @ (null @ t)
        if np.linalg.norm(tn) < 1e-12:
            return _Trace(np.array(samples), arc, "collapsed", worst)
        x, t = xc, tn / np.linalg.norm(tn)
        samples.append(x.copy())
        h = min(2.0 * h, h_max)
        if arc > 4.0 * h_max and np.linalg.norm(x - x0) < 1.5 * h_max:
            samples.append(x0.copy())
            return _Trace(np.array(samples), arc + float(np.linalg.norm(x - x0)), "closed", worst)
        if arc >= max_arc:
            return _Trace(np.array(samples), arc, "max_arc", worst)
    return _Trace(np.array(samples), arc, "budget", worst)


def _trace_from(ev, point):
    """Continue from one zero in every null direction. Returns (curve or None, diagnostics)."""
    x0 = point.as_real()
    null = _null_basis(_system(ev, x0)[1])
    traces = []
    for v in null:
        for sign in (1.0, -1.0):
            tr = _trace(ev, x0, sign * v)
            traces.append(tr)
            if tr.status == "closed":
                return [tr], traces
    good = [tr for tr in traces if tr.arc >= MIN_ARC]
    if good:
        # an open arc: join the two longest opposite pieces when available
        good.sort(key=lambda tr: -tr.arc)
        return good[:2], traces
    return None, traces


class _ZeroGeometry:
    """Zero set as isolated points plus polylines; Euclidean distance queries in R^4."""

    def __init__(self, points=(), polylines=()):
        verts, prev, nxt = [], [], []
        base = 0
        for x in points:
            verts.append(np.asarray(x, dtype=float))
            prev.append(-1)
            nxt.append(-1)
            base += 1
        for line in polylines:
            line = np.asarray(line, dtype=float)
            n = line.shape[0]
            for i in range(n):
                verts.append(line[i])
                prev.append(base + i - 1 if i > 0 else -1)
                nxt.append(base + i + 1 if i < n - 1 else -1)
            base += n
        self.verts = np.array(verts).reshape(-1, 4)
        self.prev = np.array(prev, dtype=int)
        self.next = np.array(nxt, dtype=int)
        self.tree = cKDTree(self.verts) if len(verts) else None

    @property
    def empty(self):
        return self.tree is None

    def distance(self, x):
        x = np.atleast_2d(x)
        d, i = self.tree.query(x)
        best = d.copy()
        for nb in (self.prev[i], self.next[i]):
            has = nb >= 0
            if not has.any():
                continue
            a = self.verts[i[has]]
            b = self.verts[nb[has]]
            ab = b - a
            u = np.clip(np.sum((x[has] - a) * ab, axis=1) / np.maximum(np.sum(ab * ab, axis=1), 1e-300), 0.0, 1.0)
            seg = np.linalg.norm(x[has] - (a + u[:, None] * ab), axis=1)
            best[has] = np.minimum(best[has], seg)
        return best


@dataclass
class ZeroSetReport:
    """Outcome of :func:`classify_zero_set` with the evidence behind it.

    ``kind`` is one of "empty", "finite", "curve", "interior_zero". For
    "finite", ``points`` are the cluster representatives; for "curve" they are
    samples along the traced curves, which are also kept as arrays in ``curves``.
    """

    kind: str
    points: list = field(default_factory=list)
    curves: list = field(default_factory=list)
    witness: tuple | None = None
    witness_value: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def evidence_violations(self):
        """Invariant checks on the evidence; an empty list means consistent."""
        bad = []
        d = self.diagnostics
        if self.kind == "finite":
            if any(r >= CLUSTER_RADIUS for r in d.get("cluster_radii", [])):
                bad.append("cluster radius >= 1e-6")
            xs = np.array([pt.as_real() for pt in self.points])
            if len(xs) > 1:
                gaps = np.linalg.norm(xs[:, None] - xs[None], axis=-1)
                gaps[np.diag_indices(len(xs))] = np.inf
                if gaps.min() <= 1e-3:
                    bad.append("clusters closer than 1e-3")
            if not self.points:
                bad.append("finite set without points")
        elif self.kind == "curve":
            arcs = d.get("arc_lengths", [])
            if not arcs or max(arcs) < MIN_ARC:
                bad.append("no continuation arc of length >= 0.1")
            if d.get("max_abs_p_on_curve", math.inf) >= 1e-8:
                bad.append("|p| >= 1e-8 along the curve")
        elif self.kind == "interior_zero":
            if self.witness is None or not (self.witness_value < INTERIOR_TOL):
                bad.append("no interior witness")
        elif self.kind == "empty":
            if self.points:
                bad.append("empty set with points")
        return bad

    def to_dict(self):
        out = {
            "class": self.kind,
            "points": [pt.to_dict() for pt in self.points],
            "n_curves": len(self.curves),
            "diagnostics": self.diagnostics,
        }
        if self.witness is not None:
            out["witness"] = {"z": [self.witness[0].real, self.witness[0].imag],
                              "w": [self.witness[1].real, self.witness[1].imag],
                              "abs_p": self.witness_value}
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def write_csv(self, path):
        """One row per curve sample (curve index >= 0) or isolated zero (curve index -1)."""
        rows = [(c, x) for c, samples in enumerate(self.curves) for x in samples]
        if not self.curves:
            rows = [(-1, pt.as_real()) for pt in self.points]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["curve", "theta", "phi", "psi", "re_zeta", "im_zeta", "re_eta", "im_eta"])
            for c, x in rows:
                zeta, eta = complex(x[0], x[1]), complex(x[2], x[3])
                writer.writerow([c, math.atan2(abs(eta), abs(zeta)), math.atan2(zeta.imag, zeta.real),
                                 math.atan2(eta.imag, eta.real), *(float(v) for v in x)])

    def geometry(self):
        if self.kind == "finite":
            return _ZeroGeometry(points=[pt.as_real() for pt in self.points])
        if self.kind == "curve":
            return _ZeroGeometry(polylines=self.curves)
        return _ZeroGeometry()


def classify_zero_set(p, resolution=16, seed=0):
    """Classify Z(p) on the closed ball as interior_zero, empty, finite or curve.

    Raises :class:`Inconclusive` (carrying the partial report) when a
    continuation neither reaches arc length 0.1 nor collapses to its start.
    """
    diag = {"seed": seed, "resolution": resolution}
    if p.is_zero():
        return ZeroSetReport("interior_zero", witness=(0j, 0j), witness_value=0.0, diagnostics=diag)
    witness = _interior_witness(p, seed) if p.degree > 0 else None
    if witness is not None:
        return ZeroSetReport("interior_zero", witness=witness[0], witness_value=witness[1],
                             diagnostics=diag)
    clusters = cluster_sphere_zeros(p, resolution)
    diag.update(n_starts=clusters.n_starts, n_converged=clusters.n_converged,
                n_clusters=len(clusters.points))
    if not clusters.points:
        return ZeroSetReport("empty", diagnostics=diag)
    ev = _Evaluator(p)
    curves, arcs, worst, collapsed, unresolved = [], [], 0.0, 0, []
    geom = None
    for pt in clusters.points:
        if geom is not None and geom.distance(pt.as_real())[0] < 2.0 * CURVE_STEP:
            continue
        found, traces = _trace_from(ev, pt)
        if found is None:
            if all(tr.status == "collapsed" and tr.arc < 1e-3 for tr in traces):
                collapsed += 1
            else:
                unresolved.append(pt)
            continue
        for tr in found:
            curves.append(tr.samples)
            arcs.append(tr.arc)
            worst = max(worst, tr.max_abs_p)
        geom = _ZeroGeometry(polylines=curves)
    diag.update(arc_lengths=arcs, max_abs_p_on_curve=worst, collapsed_starts=collapsed)
    if curves:
        pts = [SpherePoint.from_real(x) for c in curves for x in c]
        return ZeroSetReport("curve", points=pts, curves=curves, diagnostics=diag)
    diag["cluster_radii"] = clusters.radii
    report = ZeroSetReport("finite", points=clusters.points, diagnostics=diag)
    if unresolved:
        raise Inconclusive(f"{len(unresolved)} continuation(s) neither advanced nor collapsed",
                           report=report)
    return report


# local branch at a boundary zero


@dataclass(frozen=True)
class BranchFit:
    """Branch h with p(V(z, 1/h(z))) = 0 near z = 0, where V = U^H sends (0, 1) to ``point``.

    ``coefficients`` are the fitted Taylor coefficients of h through z^4;
    ``gamma`` is the z^2 coefficient.
    """

    point: SpherePoint
    rotation: UnitarySpec
    gamma: complex
    residual: float
    coefficients: tuple

    def to_dict(self):
        u = self.rotation.entries
        return {"point": self.point.to_dict(),
                "rotation": [[[c.real, c.imag] for c in row] for row in u],
                "gamma": [self.gamma.real, self.gamma.imag],
                "residual": self.residual,
                "coefficients": [[c.real, c.imag] for c in self.coefficients]}


def _as_sphere_point(P):
    if isinstance(P, SpherePoint):
        return P
    zeta, eta = P
    return SpherePoint.make(zeta, eta)


def _rotated(p, P):
    U = UnitarySpec.sending_to_north(P.zeta, P.eta)
    return U, compose_unitary(p, U.H)


def _newton_w(ev, z, w, iters=50):
    for _ in range(iters):
        f, _, b = ev(z, w)
        dw = f / b
        w = w - dw
        if np.all(np.abs(dw) < 1e-16 * np.maximum(1.0, np.abs(w))):
            break
    return w


def branch_gamma(p, P, eps=1e-3, n_nodes=16):
    """Fit h(z) = 1 + gamma z^2 + ... for the branch through the rotated boundary zero (0, 1)."""
    P = _as_sphere_point(P)
    U, pr = _rotated(p, P)
    ev = _Evaluator(pr)
    f0, _, b0 = (complex(v) for v in ev(0j, 1 + 0j))
    if abs(f0) > 1e-8 * ev.scale:
        raise ValueError(f"point is not a zero of p (|p| = {abs(f0):.3e})")
    if abs(b0) < 1e-8 * ev.scale:
        raise MultipleBranch("the root w = 1 of the rotated polynomial at z = 0 is not simple")
    ang = np.exp(2j * np.pi * np.arange(n_nodes) / n_nodes)
    z = np.concatenate([eps * ang, 2.0 * eps * ang])
    w = _newton_w(ev, z, np.ones_like(z))
    h = 1.0 / w
    vander = np.vander(z, 5, increasing=True)
    coef, *_ = np.linalg.lstsq(vander, h, rcond=None)
    resid = float(np.sqrt(np.mean(np.abs(vander @ coef - h) ** 2)))
    if abs(coef[0] - 1.0) > 1e-9 or abs(coef[1]) > 1e-6:
        raise FitResidualTooLarge(
            f"branch expansion inconsistent: h(0) = {coef[0]:.3e}, linear term {abs(coef[1]):.3e}")
    if resid > 1e-10:
        raise FitResidualTooLarge(f"branch fit residual {resid:.3e}")
    return BranchFit(P, U, complex(coef[2]), resid, tuple(complex(c) for c in coef))


def sphere_on_branch_defect(p, P, direction, radii, substeps=32):
    """E(t) = |h(t d)|^2 (1 - t^2) - 1 for t in ``radii`` along the unit direction d.

    h is followed by Newton continuation from z = 0, so values are exact up to
    rounding rather than read off the quadratic fit.
    """
    fit = branch_gamma(p, P)
    _, pr = _rotated(p, fit.point)
    ev = _Evaluator(pr)
    d = complex(direction)
    d /= abs(d)
    out, w, t_prev = [], 1.0 + 0j, 0.0
    for t in sorted(float(r) for r in radii):
        for s in np.linspace(t_prev, t, substeps + 1)[1:]:
            w = complex(_newton_w(ev, s * d, w))
        t_prev = t
        out.append((t, abs(1.0 / w) ** 2 * (1.0 - t * t) - 1.0))
    lookup = dict(out)
    return [lookup[float(r)] for r in radii]


# Lojasiewicz exponent


@dataclass(frozen=True)
class LojasiewiczFit:
    """|p| >= C dist^q fitted on the lower envelope; ``degenerate`` marks an empty zero set."""

    exponent: float
    constant: float
    residual: float
    n_samples: int
    degenerate: bool = False

    def to_dict(self):
        return dict(self.__dict__)


def _tangent_frames(x):
    """Orthonormal bases of the tangent spaces of S^3 at the rows of x (shape (n, 3, 4))."""
    frames = []
    for v in x:
        _, _, vh = np.linalg.svd(v[None, :])
        frames.append(vh[1:])
    return np.array(frames)


def _fibonacci_s2(n):
    i = np.arange(n) + 0.5
    phi = np.arccos(1.0 - 2.0 * i / n)
    th = np.pi * (1.0 + 5 ** 0.5) * i
    pts = np.stack([np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)], -1)
    axes = np.vstack([np.eye(3), -np.eye(3)])
    return np.vstack([pts, axes])


def lojasiewicz_fit(p, report=None, n_samples=2 ** 17, seed=0, d_range=(1e-3, 0.3),
                    n_bins=50, n_anchor=16, n_dirs=256):
    """Exponent q and constant C in |p| >= C dist(., Z(p) on the sphere)^q.

    Samples: ``n_samples`` quasi-random sphere points plus geodesic probes
    from points of the zero set in ``n_dirs`` tangent directions at 50
    logarithmically spaced distances. q is the slope of the per-bin minimum
    of log|p| against log dist over ``n_bins`` logarithmic bins in ``d_range``.
    """
    if report is None:
        report = classify_zero_set(p, seed=seed)
    if report.kind == "interior_zero":
        raise InteriorZero("p vanishes inside the ball")
    if report.kind == "empty":
        # vacuous inequality: report the minimum modulus as the constant
        return LojasiewiczFit(0.0, interior_min(p, seed=seed).value, 0.0, 0, degenerate=True)
    geom = report.geometry()
    ev = _Evaluator(p)
    zs, ws = _sphere_samples(n_samples, seed)
    xs = [_to_real(zs, ws)]
    anchors = geom.verts
    if anchors.shape[0] > n_anchor:
        anchors = anchors[np.linspace(0, anchors.shape[0] - 1, n_anchor).astype(int)]
    frames = _tangent_frames(anchors)
    dirs = _fibonacci_s2(n_dirs)
    dists = np.geomspace(d_range[0], d_range[1], 50)
    for a, fr in zip(anchors, frames):
        tv = dirs @ fr
        probe = (np.cos(dists)[:, None, None] * a[None, None, :]
                 + np.sin(dists)[:, None, None] * tv[None, :, :])
        xs.append(probe.reshape(-1, 4))
    x = np.vstack(xs)
    dist = geom.distance(x)
    val = np.abs(ev.value(x[:, 0] + 1j * x[:, 1], x[:, 2] + 1j * x[:, 3]))
    keep = (dist >= d_range[0]) & (dist <= d_range[1]) & (val > 0)
    ld, lv = np.log(dist[keep]), np.log(val[keep])
    edges = np.linspace(math.log(d_range[0]), math.log(d_range[1]), n_bins + 1)
    which = np.clip(np.digitize(ld, edges) - 1, 0, n_bins - 1)
    bx, by = [], []
    for b in range(n_bins):
        sel = np.flatnonzero(which == b)
        if sel.size:
            j = sel[np.argmin(lv[sel])]
            bx.append(ld[j])
            by.append(lv[j])
    bx, by = np.array(bx), np.array(by)
    q, c0 = np.polyfit(bx, by, 1)
    resid = float(np.sqrt(np.mean((by - (q * bx + c0)) ** 2)))
    const = float(np.min(val[keep] / dist[keep] ** q))
    return LojasiewiczFit(float(q), const, resid, int(x.shape[0]))


def classify_many(polys, **kwargs):
    """:func:`classify_zero_set` over several polynomials, parallel when allowed."""
    return pmap(lambda p: classify_zero_set(p, **kwargs), polys)
