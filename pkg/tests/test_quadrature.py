import math

import numpy as np
import pytest
from scipy import integrate as sint

from robust_shrink.quadrature import QuadratureError, integrate, quad


@pytest.mark.parametrize("f, a, b, exact", [
    (lambda x: np.exp(-x * x / 2), -math.inf, math.inf, math.sqrt(2 * math.pi)),
    (lambda x: 1 / (1 + x * x), -math.inf, math.inf, math.pi),
    (lambda x: 1 / (1 + x * x), 0.0, math.inf, math.pi / 2),
    (lambda x: np.exp(x), -math.inf, 0.0, 1.0),
    (np.sin, 0.0, math.pi, 2.0),
    (lambda x: x ** 7, -1.0, 2.0, (2 ** 8 - 1) / 8),
])
def test_known_integrals(f, a, b, exact):
    assert quad(f, a, b) == pytest.approx(exact, rel=1e-10)


def test_log_singularity_with_breakpoint():
    r = integrate(lambda x: -np.log(np.abs(x)), -1.0, 1.0, points=[0.0])
    assert r.value == pytest.approx(2.0, rel=1e-10)


def test_kink_breakpoint_matches_scipy():
    f = lambda x: np.abs(x - 0.3) * np.exp(-x * x)
    ref = sint.quad(lambda x: abs(x - 0.3) * math.exp(-x * x), -np.inf, np.inf, points=None, epsabs=0, epsrel=1e-12)[0]
    assert quad(f, points=[0.3]) == pytest.approx(ref, rel=1e-10)


def test_reversed_limits():
    assert quad(np.cos, 1.0, 0.0) == pytest.approx(-math.sin(1.0), rel=1e-12)


def test_limit_exhaustion_raises():
    with pytest.raises(QuadratureError) as exc:
        integrate(lambda x: np.sin(1 / x), 1e-6, 1.0, limit=5, epsrel=1e-14)
    assert exc.value.error > 0


def test_divergent_integral_raises():
    with pytest.raises(QuadratureError):
        integrate(lambda x: np.exp(np.abs(x)) / (1 + x * x), limit=200)


def test_refinement_limit_doubling_stable():
    f = lambda x: np.exp(-0.5 * (1.2 - x) ** 2) / (1 + x * x)
    a = quad(f, limit=1000, epsrel=1e-12)
    b = quad(f, limit=2000, epsrel=1e-12)
    assert abs(a - b) < 1e-9
