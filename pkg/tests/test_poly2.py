import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirichlet_ball.errors import NotUnitary, ZeroConstantTerm
from dirichlet_ball.poly2 import (
    Poly2,
    TruncatedSeries2,
    UnitarySpec,
    add,
    compose_unitary,
    differentiate,
    dilate,
    evaluate,
    multiply,
    reciprocal,
)

from conftest import W, Z, polys, random_poly

S2 = 2 ** -0.5


def coeff_close(f, g, tol):
    a = f.to_array() if isinstance(f, Poly2) else f.coeffs
    b = g.to_array() if isinstance(g, Poly2) else g.coeffs
    n = max(a.shape[0], b.shape[0])
    pa = np.zeros((n, n), complex)
    pb = np.zeros((n, n), complex)
    pa[: a.shape[0], : a.shape[1]] = a
    pb[: b.shape[0], : b.shape[1]] = b
    return np.max(np.abs(pa - pb)) <= tol


class TestCanonicalForm:
    def test_zero_entries_dropped(self):
        p = Poly2({(0, 0): 1, (1, 0): 0.0, (0, 1): 1e-301})
        assert dict(p.coeffs) == {(0, 0): 1}

    def test_small_but_representable_kept(self):
        assert (1, 0) in Poly2({(1, 0): 1e-299}).coeffs

    def test_degree(self):
        assert Poly2().degree == 0
        assert (1 - 2 * Z * W).degree == 2

    def test_sorted_by_shell_then_k(self):
        p = Poly2({(0, 2): 1, (2, 0): 1, (1, 0): 1, (0, 0): 1, (1, 1): 1})
        assert list(p.coeffs) == [(0, 0), (1, 0), (0, 2), (1, 1), (2, 0)]

    def test_negative_exponent_rejected(self):
        with pytest.raises(ValueError):
            Poly2({(-1, 0): 1})

    def test_records_round_trip(self):
        p = 1 - (0.5 + 2j) * Z ** 2 * W
        text = json.dumps(p.to_records())
        assert Poly2.from_records(json.loads(text)) == p

    @given(polys())
    def test_records_round_trip_property(self, p):
        assert Poly2.from_records(p.to_records()) == p


class TestMultiply:
    def test_difference_of_squares(self):
        assert multiply(1 - Z, 1 + Z) == 1 - Z ** 2

    def test_identity(self):
        assert multiply(1 - 2 * Z * W, Poly2.constant(1)) == 1 - 2 * Z * W

    def test_square_of_trinomial(self):
        expect = Poly2({(0, 0): 1, (1, 0): 2, (0, 1): 2, (2, 0): 1, (1, 1): 2, (0, 2): 1})
        assert multiply(1 + Z + W, 1 + Z + W) == expect

    def test_truncated_takes_min_order_and_exactness(self):
        a = TruncatedSeries2.from_poly(1 - Z, 4)
        b = TruncatedSeries2.from_poly(1 + W, 6)
        prod = multiply(a, b)
        assert prod.order == 4
        assert prod.exact
        c = TruncatedSeries2.from_poly(Z ** 3, 4)
        assert not multiply(c, c).exact

    @given(polys(max_degree=5), polys(max_degree=5))
    def test_evaluation_is_multiplicative(self, f, g):
        rng = np.random.default_rng(1)
        for _ in range(5):
            v = rng.normal(size=4)
            v *= rng.uniform(0, 0.99) / np.linalg.norm(v)
            z, w = complex(v[0], v[1]), complex(v[2], v[3])
            lhs = evaluate(multiply(f, g), z, w)
            rhs = evaluate(f, z, w) * evaluate(g, z, w)
            assert abs(lhs - rhs) <= 1e-12 * (1 + abs(rhs)) * 10

    def test_add_matches_operator(self):
        assert add(1 - Z, W) == 1 - Z + W


class TestEvaluate:
    def test_on_model_curve(self):
        assert abs(evaluate(1 - 2 * Z * W, S2, S2)) < 1e-15

    def test_simple_zero(self):
        assert evaluate(1 - Z, 1, 0) == 0

    def test_substitution(self):
        assert evaluate(1 + Z + W, 0.5, 0.25j) == pytest.approx(1.5 + 0.25j, abs=1e-15)

    def test_broadcasts(self):
        out = evaluate(1 + Z, np.array([0.0, 1.0]), 0.0)
        assert out.shape == (2,)


class TestDilate:
    def test_linear(self):
        assert dilate(1 - Z, 0.3) == 1 - 0.3 * Z

    def test_shell_two(self):
        r = 0.7
        assert coeff_close(dilate(1 - 2 * Z * W, r), 1 - 2 * r * r * Z * W, 1e-15)

    @given(polys())
    def test_identity(self, f):
        assert dilate(f, 1.0) == f


class TestReciprocal:
    def test_geometric(self):
        g = reciprocal(1 - Z, 3)
        assert coeff_close(g, 1 + Z + Z ** 2 + Z ** 3, 0)

    def test_diagonal_geometric(self):
        r, m = 0.9, 6
        g = reciprocal(1 - 2 * r * r * Z * W, 2 * m)
        expect = sum(((2 * r * r) ** j * (Z * W) ** j for j in range(m + 1)), Poly2())
        assert coeff_close(g, expect, 1e-14)

    def test_constant(self):
        g = reciprocal(Poly2.constant(2), 5)
        assert coeff_close(g, Poly2.constant(0.5), 0)

    def test_zero_constant_term(self):
        with pytest.raises(ZeroConstantTerm):
            reciprocal(Z + W, 4)

    @given(polys(max_degree=4), st.integers(1, 12))
    def test_product_is_one_on_all_shells(self, f, n):
        if abs(f.constant_term()) < 0.5:
            f = f + 1.0
        g = reciprocal(f, n)
        prod = multiply(f, g)
        expect = np.zeros_like(prod.coeffs)
        expect[0, 0] = 1
        scale = max(1.0, np.max(np.abs(g.coeffs)))
        assert np.max(np.abs(prod.coeffs - expect)) <= 1e-12 * scale * (f.degree + 1) ** 2

    def test_tail_hint_is_weighted_last_shell(self):
        g = reciprocal(1 - Z, 5, alpha=0.0)
        # last shell is z^5 with weight 5! 0! / 6! = 1/6
        assert g.tail_hint == pytest.approx(1 / 6)
        assert not g.exact


class TestDifferentiate:
    def test_radial_homogeneous(self):
        assert differentiate(Z ** 2 * W, "radial") == 3 * Z ** 2 * W

    def test_dz(self):
        assert differentiate(1 - 2 * Z * W, "dz") == -2 * W

    def test_radial_constant(self):
        assert differentiate(Poly2.constant(4), "radial").is_zero()

    def test_gradient(self):
        fz, fw = differentiate(Z ** 2 * W, "gradient")
        assert fz == 2 * Z * W and fw == Z ** 2

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            differentiate(Z, "dx")

    @given(polys())
    def test_radial_scales_by_total_degree(self, f):
        rf = differentiate(f, "radial")
        for (k, l), a in f.coeffs.items():
            if k + l:
                assert rf.coeffs[(k, l)] == (k + l) * a


class TestComposeUnitary:
    U = UnitarySpec([[S2, -S2], [S2, S2]])

    def test_column_convention(self):
        # (f o U)(z, w) = f(u11 z + u12 w, u21 z + u22 w)
        assert coeff_close(compose_unitary(1 - 2 * Z * W, self.U), 1 - Z ** 2 + W ** 2, 1e-15)

    def test_transposed_substitution(self):
        # substituting z = (z'+w')/sqrt2, w = (w'-z')/sqrt2 is composition with U^H
        assert coeff_close(compose_unitary(1 - 2 * Z * W, self.U.H), 1 + Z ** 2 - W ** 2, 1e-15)

    @given(polys())
    def test_identity(self, f):
        assert coeff_close(compose_unitary(f, UnitarySpec.identity()), f, 1e-15)

    def test_swap(self):
        assert compose_unitary(1 - W, UnitarySpec.swap()) == 1 - Z

    def test_not_unitary(self):
        with pytest.raises(NotUnitary):
            UnitarySpec([[1, 0], [0, 1.001]])

    def test_matches_pointwise(self, rng):
        f = random_poly(rng, 6)
        U = UnitarySpec.random(rng)
        g = compose_unitary(f, U)
        for _ in range(5):
            z, w = rng.normal(size=2) * 0.4 + 1j * rng.normal(size=2) * 0.4
            assert abs(evaluate(g, z, w) - evaluate(f, *U.apply(z, w))) < 1e-12

    def test_truncated_keeps_order(self, rng):
        s = reciprocal(1 - 0.5 * Z * W, 9)
        out = compose_unitary(s, UnitarySpec.random(rng))
        assert out.order == 9

    @pytest.mark.parametrize("r", [0.3, 0.9])
    def test_commutes_with_dilation(self, rng, r):
        for _ in range(10):
            f = random_poly(rng, 8)
            U = UnitarySpec.random(rng)
            lhs = compose_unitary(dilate(f, r), U)
            rhs = dilate(compose_unitary(f, U), r)
            assert coeff_close(lhs, rhs, 1e-12)

    def test_north_rotation(self, rng):
        for _ in range(20):
            v = rng.normal(size=4)
            v /= np.linalg.norm(v)
            zeta, eta = complex(v[0], v[1]), complex(v[2], v[3])
            U = UnitarySpec.sending_to_north(zeta, eta)
            u = U.entries
            assert np.max(np.abs(u.conj().T @ u - np.eye(2))) < 1e-12
            assert np.max(np.abs(np.array(U.apply(zeta, eta)) - [0, 1])) < 1e-12


class TestTruncatedSeries:
    def test_exact_requires_zero_tail(self):
        with pytest.raises(ValueError):
            TruncatedSeries2(np.ones((2, 2)), exact=True, tail_hint=0.1)

    def test_read_only_and_masked(self):
        s = TruncatedSeries2(np.ones((3, 3)))
        assert s.coeffs[2, 2] == 0 and s.coeffs[1, 1] == 1
        with pytest.raises(ValueError):
            s.coeffs[0, 0] = 5

    def test_round_trip_poly(self):
        p = 1 - 2 * Z * W
        assert TruncatedSeries2.from_poly(p, 4).to_poly() == p
