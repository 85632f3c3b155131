import json
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import betaln

from dirichlet_ball.dalpha import norm_sq
from dirichlet_ball.dilation import (
    default_r_grid,
    dilation_norm,
    dilation_sweep,
    fit_growth_exponent,
    quotient_series,
    quotient_shells,
)
from dirichlet_ball.errors import InteriorZero, TruncationFailure, ZeroConstantTerm
from dirichlet_ball.poly2 import Poly2, UnitarySpec, compose_unitary

from conftest import W, Z, random_poly

P_DIAG = 1 - 2 * Z * W


def diagonal_oracle(alpha, r, m_max=200000):
    """||(1-2zw)/(1-2r^2 zw)||_alpha^2 from the coefficient formula, summed in log space."""
    m = np.arange(1, m_max + 1)
    logw = alpha * np.log(2 + 2 * m) + betaln(m + 1, m + 1)
    logc = math.log(4) + 2 * math.log(1 - r * r) + 2 * (m - 1) * math.log(2 * r * r)
    return 2 ** alpha + math.fsum(np.exp(logw + logc))


@pytest.fixture(scope="module")
def sweeps():
    return {a: dilation_sweep(P_DIAG, a) for a in (1.5, 2.0)}


class TestQuotientSeries:
    def test_diagonal_coefficients(self):
        r = 0.9
        q = quotient_series(P_DIAG, r, 60)
        assert q.coeffs[0, 0] == pytest.approx(1, abs=1e-14)
        rq = Fraction(r)
        for m in range(1, 31):
            c = -2 * (1 - rq * rq) * (2 * rq * rq) ** (m - 1)
            assert abs(Fraction(q.coeffs[m, m].real) - c) < Fraction(1, 10 ** 10)
            assert q.coeffs[m, m].imag == 0
        assert not q.exact

    def test_constant(self):
        q = quotient_series(Poly2.constant(3), 0.5, 6)
        assert q.exact and q.to_poly() == Poly2.constant(1)

    def test_r_one(self):
        q = quotient_series(P_DIAG, 1.0, 6)
        assert q.exact and q.to_poly() == Poly2.constant(1)

    def test_zero_constant_term(self):
        with pytest.raises(ZeroConstantTerm):
            quotient_series(Z, 0.5, 4)

    def test_interior_zero(self):
        with pytest.raises(InteriorZero):
            quotient_series(0.5 + Z, 0.9, 4)

    def test_unitary_commutation(self, rng):
        for _ in range(5):
            p = 3 + random_poly(rng, 3)
            U = UnitarySpec.random(rng)
            lhs = quotient_series(compose_unitary(p, U), 0.7, 12, check=False)
            rhs = compose_unitary(quotient_series(p, 0.7, 12, check=False), U)
            assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-10

    def test_streamed_shells_match_dense(self, rng):
        p = 3 + random_poly(rng, 3)
        q = quotient_series(p, 0.8, 14, check=False)
        gen = quotient_shells(p, 0.8)
        for s in range(15):
            shell = next(gen)
            k = np.arange(s + 1)
            norm = np.exp(0.5 * (betaln(k + 1, s - k + 1) + np.log(s + 1)))
            dense = np.array([q.coeffs[kk, s - kk] for kk in k])
            assert np.allclose(shell, dense * norm, atol=1e-12)


class TestDilationNorm:
    @pytest.mark.parametrize("r", [0.9, 0.99])
    def test_diagonal_oracle(self, r):
        pt = dilation_norm(P_DIAG, r, 1.5, tol=1e-14)
        assert pt.norm_sq == pytest.approx(diagonal_oracle(1.5, r), rel=1e-8)

    def test_shift_identity_agrees(self, rng):
        for alpha in (0.0, 1.5, 2.5):
            p = 3 + random_poly(rng, 3)
            pt = dilation_norm(p, 0.8, alpha)
            assert pt.shift_norm_sq == pytest.approx(pt.norm_sq, rel=1e-10)

    @pytest.mark.parametrize("alpha", [0.0, 1.5, 2.0])
    def test_constant(self, alpha):
        assert dilation_norm(Poly2.constant(5), 0.7, alpha).norm_sq == 2 ** alpha

    def test_matches_truncated_series_norm(self):
        p = 1 - 0.5 * Z + 0.25j * W * W
        pt = dilation_norm(p, 0.6, 1.0, tol=1e-15)
        q = quotient_series(p, 0.6, pt.order)
        assert pt.norm_sq == pytest.approx(norm_sq(q, 1.0), rel=1e-12)

    def test_bounded_without_closed_ball_zeros(self):
        vals = [dilation_norm(2 - Z, r, 2.0).norm_sq for r in default_r_grid()]
        assert max(vals) / min(vals) < 1.2

    def test_truncation_failure(self):
        with pytest.raises(TruncationFailure) as info:
            dilation_norm(P_DIAG, 0.999, 2.0, cap=64)
        assert info.value.order == 64 and info.value.norm_sq > 0

    def test_near_one_consistency(self, rng):
        for _ in range(5):
            p = 6 + random_poly(rng, 2)  # |p - 6| <= 6 * 2^... keep zeros outside radius 2
            p = Poly2({k: (v if k == (0, 0) else 0.3 * v) for k, v in p.coeffs.items()})
            for alpha in (0.0, 1.0, 2.0):
                val = dilation_norm(p, 0.5, alpha).norm_sq
                assert 0.25 * 2 ** alpha <= val <= 4 * 2 ** alpha


class TestSweep:
    def test_bounded_at_three_halves(self, sweeps):
        curve = sweeps[1.5]
        assert all(curve.usable)
        assert abs(curve.exponent) <= 0.1

    def test_growth_at_two(self, sweeps):
        curve = sweeps[2.0]
        assert all(curve.usable)
        assert curve.exponent == pytest.approx(0.5, abs=0.1)

    def test_points_agree_with_oracle(self, sweeps):
        curve = sweeps[2.0]
        for r, v in list(zip(curve.r_grid, curve.norm_sq_values))[:6]:
            assert v == pytest.approx(diagonal_oracle(2.0, r), rel=1e-6)

    def test_certified_tails(self, sweeps):
        for curve in sweeps.values():
            for t, v in zip(curve.tail_hints, curve.norm_sq_values):
                assert t < 0.01 * v

    def test_monotone_on_upper_half(self, sweeps):
        vals = sweeps[2.0].norm_sq_values
        upper = vals[len(vals) // 2 - 1:]
        assert all(b >= a * 0.99 for a, b in zip(upper, upper[1:]))

    def test_one_minus_z_bounded(self):
        curve = dilation_sweep(1 - Z, 1.5)
        assert abs(curve.exponent) <= 0.1

    def test_outputs(self, sweeps, tmp_path):
        curve = sweeps[1.5]
        doc = json.loads(curve.to_json())
        assert doc["fit"]["exponent"] == curve.exponent
        path = tmp_path / "d.csv"
        curve.write_csv(path)
        assert path.read_text().splitlines()[0] == "r,one_minus_r,norm_sq,order,tail_hint"

    def test_failed_points_are_flagged(self):
        curve = dilation_sweep(P_DIAG, 2.0, r_grid=[0.5, 0.75, 0.999], cap=128)
        assert curve.usable == [True, True, False]


class TestFit:
    def test_recovers_exponent(self):
        omr = np.array([2.0 ** -k for k in range(1, 11)])
        vals = 3.0 + 0.7 * omr ** -0.8
        fit = fit_growth_exponent(omr, vals)
        assert fit.exponent == pytest.approx(0.8, abs=1e-3)
        assert fit.offset == pytest.approx(3.0, rel=1e-3)

    def test_decreasing_data_is_bounded(self):
        omr = np.array([2.0 ** -k for k in range(1, 11)])
        fit = fit_growth_exponent(omr, 2 + omr)
        assert fit.exponent == 0.0
        assert fit.loglog_slope < 0

    def test_too_few_points(self):
        fit = fit_growth_exponent([0.5, 0.25], [1.0, 2.0])
        assert math.isnan(fit.exponent)
