import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from dirichlet_ball.poly2 import Poly2

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

Z = Poly2.monomial(1, 0)
W = Poly2.monomial(0, 1)


def random_poly(rng, degree, density=1.0):
    """Coefficients uniform in the square [-1, 1] x [-1, 1]."""
    coeffs = {}
    for s in range(degree + 1):
        for k in range(s + 1):
            if rng.random() <= density:
                coeffs[(k, s - k)] = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
    return Poly2(coeffs)


_coef = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)


@st.composite
def polys(draw, max_degree=8, min_terms=1, max_terms=12):
    keys = draw(st.lists(
        st.tuples(st.integers(0, max_degree), st.integers(0, max_degree))
        .filter(lambda kl: kl[0] + kl[1] <= max_degree),
        min_size=min_terms, max_size=max_terms, unique=True))
    return Poly2({kl: draw(_coef) for kl in keys})


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance criteria report one line each in the terminal summary
ACCEPTANCE = {}


def record(number, ok, detail):
    ACCEPTANCE[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE[number])
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
