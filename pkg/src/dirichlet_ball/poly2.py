"""Bivariate complex polynomials and truncated power series in (z, w).

Two value types live here:

* :class:`Poly2` is an exact polynomial stored as a sparse map
  ``(k, l) -> a_{k,l}`` for the monomial ``z**k * w**l``.
* :class:`TruncatedSeries2` is a power series known up to total degree
  ``order``, stored as a dense ``(order+1, order+1)`` array whose entries
  with ``k + l > order`` are identically zero.

Both are immutable. The module-level functions accept either kind and
return the same kind, with the truncated order propagated as the minimum
of the operands' orders.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.stats import unitary_group

from ._weights import weight_table
from .errors import NotUnitary, ZeroConstantTerm

__all__ = [
    "Poly2",
    "TruncatedSeries2",
    "UnitarySpec",
    "multiply",
    "add",
    "evaluate",
    "dilate",
    "reciprocal",
    "differentiate",
    "compose_unitary",
    "shells",
]

# entries below this modulus are dropped; anything larger is kept verbatim
_TINY = 1e-300


def _shell_order(key):
    k, l = key
    return (k + l, k)


class Poly2:
    """Exact bivariate complex polynomial.

    Parameters
    ----------
    coeffs : mapping, optional
        Map from ``(k, l)`` exponent pairs to complex coefficients.
        Repeated keys are not possible in a mapping; zero entries are dropped.
    """

    __slots__ = ("_coeffs", "_degree")

    def __init__(self, coeffs=None):
        clean = {}
        for key, value in dict(coeffs or {}).items():
            k, l = (int(key[0]), int(key[1]))
            if k < 0 or l < 0:
                raise ValueError(f"negative exponent in {key!r}")
            value = complex(value)
            if abs(value) >= _TINY:
                clean[(k, l)] = value
        ordered = dict(sorted(clean.items(), key=lambda kv: _shell_order(kv[0])))
        self._coeffs = MappingProxyType(ordered)
        self._degree = max((k + l for k, l in ordered), default=0)

    # construction helpers

    @classmethod
    def constant(cls, c):
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, k, l, c=1.0):
        return cls({(k, l): c})

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr)
        ks, ls = np.nonzero(arr)
        return cls({(int(k), int(l)): arr[k, l] for k, l in zip(ks, ls)})

    @classmethod
    def from_records(cls, records):
        """Inverse of :meth:`to_records`."""
        coeffs = {}
        for rec in records:
            key = (int(rec["k"]), int(rec["l"]))
            coeffs[key] = coeffs.get(key, 0) + complex(rec.get("re", 0.0), rec.get("im", 0.0))
        return cls(coeffs)

    # views

    @property
    def coeffs(self):
        return self._coeffs

    @property
    def degree(self):
        return self._degree

    @property
    def order(self):
        return self._degree

    @property
    def exact(self):
        return True

    @property
    def tail_hint(self):
        return 0.0

    def is_zero(self):
        return not self._coeffs

    def constant_term(self):
        return self._coeffs.get((0, 0), 0j)

    def to_array(self, order=None):
        n = self._degree if order is None else int(order)
        arr = np.zeros((n + 1, n + 1), dtype=complex)
        for (k, l), a in self._coeffs.items():
            if k + l <= n:
                arr[k, l] = a
        return arr

    def to_records(self):
        return [
            {"k": k, "l": l, "re": a.real, "im": a.imag}
            for (k, l), a in self._coeffs.items()
        ]

    # dunder protocol

    def __eq__(self, other):
        if isinstance(other, numbers.Number):
            other = Poly2.constant(other)
        if not isinstance(other, Poly2):
            return NotImplemented
        return dict(self._coeffs) == dict(other._coeffs)

    def __hash__(self):
        return hash(tuple(self._coeffs.items()))

    def __repr__(self):
        if not self._coeffs:
            return "Poly2(0)"
        terms = []
        for (k, l), a in self._coeffs.items():
            mono = "*".join(
                s for s in ((f"z^{k}" if k > 1 else "z" if k else ""),
                            (f"w^{l}" if l > 1 else "w" if l else "")) if s
            )
            coef = f"({a.real:g}{a.imag:+g}i)" if a.imag else f"{a.real:g}"
            terms.append(f"{coef}*{mono}" if mono else coef)
        return "Poly2(" + " + ".join(terms) + ")"

    def __call__(self, z, w):
        return evaluate(self, z, w)

    def __neg__(self):
        return Poly2({key: -a for key, a in self._coeffs.items()})

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, -other if not isinstance(other, numbers.Number) else Poly2.constant(-other))

    def __rsub__(self, other):
        return add(-self, other)

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return Poly2({key: a * other for key, a in self._coeffs.items()})
        return multiply(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, numbers.Number):
            return self * (1.0 / other)
        return NotImplemented

    def __pow__(self, n):
        n = int(n)
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        out = Poly2.constant(1)
        base = self
        while n:
            if n & 1:
                out = multiply(out, base)
            base = multiply(base, base)
            n >>= 1
        return out


@dataclass(frozen=True, eq=False)
class TruncatedSeries2:
    """Power series known through total degree ``order``.

    ``tail_hint`` is the D_alpha-weighted squared norm of the last computed
    shell; it is zero exactly when ``exact`` is true.
    """

    coeffs: np.ndarray
    exact: bool = False
    tail_hint: float = 0.0

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("coefficient array must be square")
        n = arr.shape[0] - 1
        k = np.arange(n + 1)
        arr[k[:, None] + k[None, :] > n] = 0.0
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)
        if self.exact and self.tail_hint != 0.0:
            raise ValueError("an exact series carries no tail")
        if self.tail_hint < 0:
            raise ValueError("tail_hint must be nonnegative")

    @property
    def order(self):
        return self.coeffs.shape[0] - 1

    @property
    def degree(self):
        """Largest total degree carrying a nonzero coefficient."""
        ks, ls = np.nonzero(self.coeffs)
        return int((ks + ls).max()) if ks.size else 0

    def constant_term(self):
        return complex(self.coeffs[0, 0])

    def shell(self, s):
        """Coefficients of total degree ``s`` indexed by the power of z."""
        n = self.order
        return np.fliplr(self.coeffs).diagonal(n - s).copy()

    def to_poly(self):
        return Poly2.from_array(self.coeffs)

    def to_records(self):
        return self.to_poly().to_records()

    @classmethod
    def from_poly(cls, p, order):
        arr = p.to_array(order)
        exact = p.degree <= order
        return cls(arr, exact=exact, tail_hint=0.0 if exact else _last_shell_norm(arr, order, 0.0))

    def __call__(self, z, w):
        return evaluate(self, z, w)

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries2(-self.coeffs, self.exact, self.tail_hint)

    def __sub__(self, other):
        return add(self, -other)

    def __rsub__(self, other):
        return add(-self, other)

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return TruncatedSeries2(self.coeffs * other, self.exact,
                                    self.tail_hint * abs(other) ** 2)
        return multiply(self, other)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class UnitarySpec:
    """A 2x2 unitary matrix acting on column vectors (z, w)."""

    entries: np.ndarray

    def __post_init__(self):
        u = np.array(self.entries, dtype=complex)
        if u.shape != (2, 2):
            raise NotUnitary(f"expected a 2x2 matrix, got shape {u.shape}")
        defect = np.abs(u.conj().T @ u - np.eye(2)).max()
        if not defect <= 1e-12:
            raise NotUnitary(f"U*U deviates from the identity by {defect:.3e}")
        u.setflags(write=False)
        object.__setattr__(self, "entries", u)

    @classmethod
    def identity(cls):
        return cls(np.eye(2))

    @classmethod
    def swap(cls):
        return cls(np.array([[0, 1], [1, 0]]))

    @classmethod
    def random(cls, rng=None):
        return cls(unitary_group.rvs(2, random_state=rng))

    @classmethod
    def sending_to_north(cls, zeta, eta):
        """Unitary U with U (zeta, eta)^T = (0, 1)^T for a unit vector (zeta, eta)."""
        zeta, eta = complex(zeta), complex(eta)
        nrm = np.hypot(abs(zeta), abs(eta))
        zeta, eta = zeta / nrm, eta / nrm
        # columns of v are (-conj(eta), conj(zeta)) and (zeta, eta)
        v = np.array([[-eta.conjugate(), zeta], [zeta.conjugate(), eta]])
        return cls(v.conj().T)

    @property
    def H(self):
        return UnitarySpec(self.entries.conj().T)

    def apply(self, z, w):
        u = self.entries
        return u[0, 0] * z + u[0, 1] * w, u[1, 0] * z + u[1, 1] * w


# helpers


def _is_series(f):
    return isinstance(f, TruncatedSeries2)


def _as_array(f, order):
    if _is_series(f):
        return np.array(f.coeffs[: order + 1, : order + 1])
    return f.to_array(order)


def _triangle_mask(n):
    k = np.arange(n + 1)
    return k[:, None] + k[None, :] <= n


def _last_shell_norm(arr, order, alpha):
    w = weight_table(alpha, order)
    k = np.arange(order + 1)
    on_shell = (k[:, None] + k[None, :]) == order
    return float(np.sum(w[on_shell] * np.abs(arr[on_shell]) ** 2))


def _true_degree(arr):
    ks, ls = np.nonzero(arr)
    return int((ks + ls).max()) if ks.size else 0


def _wrap(arr, order, exact, alpha):
    if exact:
        return TruncatedSeries2(arr, exact=True, tail_hint=0.0)
    return TruncatedSeries2(arr, exact=False, tail_hint=_last_shell_norm(arr, order, alpha))


def shells(f, order=None):
    """List of 1-D shell arrays ``[s_0, ..., s_order]``; ``s_d[k]`` is the coefficient of z^k w^(d-k)."""
    n = f.order if order is None else int(order)
    arr = _as_array(f, n)
    flipped = np.fliplr(arr)
    return [flipped.diagonal(n - s).copy() for s in range(n + 1)]


def _from_shells(shell_list):
    n = len(shell_list) - 1
    arr = np.zeros((n + 1, n + 1), dtype=complex)
    for s, vec in enumerate(shell_list):
        k = np.arange(s + 1)
        arr[k, s - k] = vec
    return arr


def _mul_dense(a, b, order):
    # shift-and-accumulate over the sparser operand
    if np.count_nonzero(a) > np.count_nonzero(b):
        a, b = b, a
    out = np.zeros((order + 1, order + 1), dtype=complex)
    for i, j in zip(*np.nonzero(a)):
        if i + j > order:
            continue
        out[i:, j:] += a[i, j] * b[: order + 1 - i, : order + 1 - j]
    out[~_triangle_mask(order)] = 0.0
    return out


# public operations


def multiply(f, g, alpha=0.0):
    """Cauchy product. Truncated operands cap the result at the smaller order."""
    if isinstance(g, numbers.Number):
        g = Poly2.constant(g)
    if isinstance(f, numbers.Number):
        f = Poly2.constant(f)
    if isinstance(f, Poly2) and isinstance(g, Poly2):
        out = {}
        for (k1, l1), a in f.coeffs.items():
            for (k2, l2), b in g.coeffs.items():
                key = (k1 + k2, l1 + l2)
                out[key] = out.get(key, 0) + a * b
        return Poly2(out)
    order = min(x.order for x in (f, g) if _is_series(x))
    a, b = _as_array(f, order), _as_array(g, order)
    out = _mul_dense(a, b, order)
    exact = f.exact and g.exact and _true_degree(a) + _true_degree(b) <= order
    return _wrap(out, order, exact, alpha)


def add(f, g, alpha=0.0):
    if isinstance(g, numbers.Number):
        g = Poly2.constant(g)
    if isinstance(f, numbers.Number):
        f = Poly2.constant(f)
    if isinstance(f, Poly2) and isinstance(g, Poly2):
        out = dict(f.coeffs)
        for key, b in g.coeffs.items():
            out[key] = out.get(key, 0) + b
        return Poly2(out)
    order = min(x.order for x in (f, g) if _is_series(x))
    exact = all(
        x.exact and (not isinstance(x, Poly2) or x.degree <= order) for x in (f, g)
    )
    return _wrap(_as_array(f, order) + _as_array(g, order), order, exact, alpha)


def evaluate(f, z, w):
    """Evaluate at points (z, w); arrays broadcast. Nested Horner in w then z."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    z, w = np.broadcast_arrays(z, w)
    arr = f.coeffs if _is_series(f) else f.to_array()
    val = npoly.polyval2d(z, w, arr)
    return complex(val) if np.ndim(val) == 0 else val


def dilate(f, r, alpha=0.0):
    """f_r(z, w) = f(r z, r w)."""
    r = float(r)
    if isinstance(f, Poly2):
        return Poly2({(k, l): a * r ** (k + l) for (k, l), a in f.coeffs.items()})
    n = f.order
    k = np.arange(n + 1)
    arr = f.coeffs * r ** (k[:, None] + k[None, :])
    return _wrap(arr, n, f.exact, alpha)


def reciprocal(f, order, alpha=0.0):
    """Truncated series of 1/f through total degree ``order``, by shell recursion."""
    order = int(order)
    f00 = f.constant_term()
    if f00 == 0:
        raise ZeroConstantTerm("reciprocal needs a nonzero constant term")
    if _is_series(f) and f.order < order:
        raise ValueError("cannot invert a series beyond its own order")
    fdeg = min(f.degree, order)
    fs = shells(f, fdeg) if fdeg else [np.array([f00])]
    gs = [np.array([1.0 / f00], dtype=complex)]
    for s in range(1, order + 1):
        acc = np.zeros(s + 1, dtype=complex)
        for d in range(1, min(s, fdeg) + 1):
            if fs[d].any():
                acc += np.convolve(fs[d], gs[s - d])
        gs.append(-acc / f00)
    arr = _from_shells(gs)
    exact = f.degree == 0 and f.exact
    return _wrap(arr, order, exact, alpha)


def _partial(arr, axis):
    n = arr.shape[0] - 1
    if n == 0:
        return np.zeros((1, 1), dtype=complex)
    idx = np.arange(1, n + 1)
    if axis == 0:
        return arr[1:, :n] * idx[:, None]
    return arr[:n, 1:] * idx[None, :]


def differentiate(f, mode, alpha=0.0):
    """Formal derivative.

    ``mode`` is one of ``"dz"``, ``"dw"``, ``"radial"`` (z f_z + w f_w) or
    ``"gradient"`` (returns the pair of partials). Partials of a truncated
    series lose one order.
    """
    if mode == "gradient":
        return differentiate(f, "dz", alpha), differentiate(f, "dw", alpha)
    if mode not in ("dz", "dw", "radial"):
        raise ValueError(f"unknown derivative mode {mode!r}")
    if isinstance(f, Poly2):
        out = {}
        for (k, l), a in f.coeffs.items():
            if mode == "dz" and k:
                out[(k - 1, l)] = k * a
            elif mode == "dw" and l:
                out[(k, l - 1)] = l * a
            elif mode == "radial":
                out[(k, l)] = (k + l) * a
        return Poly2(out)
    if mode == "radial":
        n = f.order
        k = np.arange(n + 1)
        return _wrap(f.coeffs * (k[:, None] + k[None, :]), n, f.exact, alpha)
    arr = _partial(f.coeffs, 0 if mode == "dz" else 1)
    return _wrap(arr, arr.shape[0] - 1, f.exact, alpha)


def _linear_powers(c_z, c_w, n):
    """Shell vectors of (c_z z + c_w w)^j for j = 0..n, indexed by the power of z."""
    base = np.array([c_w, c_z], dtype=complex)
    out = [np.array([1.0 + 0j])]
    for _ in range(n):
        out.append(np.convolve(out[-1], base))
    return out


def compose_unitary(f, U, alpha=0.0):
    """(f o U)(z, w) = f(u11 z + u12 w, u21 z + u22 w)."""
    if not isinstance(U, UnitarySpec):
        U = UnitarySpec(U)
    u = U.entries
    n = f.degree if isinstance(f, Poly2) else f.order
    zp = _linear_powers(u[0, 0], u[0, 1], n)
    wp = _linear_powers(u[1, 0], u[1, 1], n)
    arr = _as_array(f, n)
    new_shells = [np.zeros(s + 1, dtype=complex) for s in range(n + 1)]
    for k, l in zip(*np.nonzero(arr)):
        new_shells[k + l] += arr[k, l] * np.convolve(zp[k], wp[l])
    out = _from_shells(new_shells)
    if isinstance(f, Poly2):
        return Poly2.from_array(out)
    return _wrap(out, n, f.exact, alpha)
