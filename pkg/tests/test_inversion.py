import math

import mpmath as mp
import pytest

from levystep import DomainError, InversionUnstable, gaver_stehfest, invert_laplace, talbot
from levystep.inversion import stehfest_coefficients


@pytest.mark.parametrize("T", [0.5, 1.0, 5.0])
def test_talbot_pairs(T):
    assert talbot(lambda s: 1 / s, T) == pytest.approx(1.0, abs=1e-10)
    assert talbot(lambda s: 1 / (s + 1), T) == pytest.approx(math.exp(-T), abs=1e-10)
    assert talbot(lambda s: 1 / (s * s + 1), T) == pytest.approx(math.sin(T), abs=1e-9)


@pytest.mark.parametrize("T", [0.5, 1.0, 5.0])
def test_gaver_stehfest_pairs(T):
    assert gaver_stehfest(lambda s: 1 / s, T) == pytest.approx(1.0, abs=1e-10)
    assert gaver_stehfest(lambda s: 1 / (s + 1), T, order=24) == pytest.approx(math.exp(-T), abs=1e-8)


def test_shifted_talbot():
    # F(s) = 1/(s - 2) has its pole at 2
    assert talbot(lambda s: 1 / (s - 2), 1.5, shift=2.0) == pytest.approx(math.exp(3.0), rel=1e-10)


def test_stehfest_coefficients_sum_to_zero():
    assert sum(stehfest_coefficients(14)) == 0
    with pytest.raises(DomainError):
        stehfest_coefficients(7)


def test_error_estimate_and_instability():
    res = invert_laplace(lambda s: 1 / (s + 1), 1.0)
    # the estimate compares against a finer, roundoff-limited rule: it bounds the error from above
    assert abs(res.value - math.exp(-1.0)) <= max(res.error_estimate, 1e-12)
    assert res.error_estimate < 1e-7 and res.method == "talbot"
    # a transform whose inverse has a jump at t = 1 defeats both refinements
    with pytest.raises(InversionUnstable):
        invert_laplace(lambda s: mp.exp(-s) / s if isinstance(s, mp.mpf) else complex(mp.exp(-s) / s), 1.0,
                       method="gs", rtol=1e-6)
    with pytest.raises(DomainError):
        invert_laplace(lambda s: 1 / s, -1.0)
    with pytest.raises(DomainError):
        invert_laplace(lambda s: 1 / s, 1.0, method="euler")
