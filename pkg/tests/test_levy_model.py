import json
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levystep import DomainError, HyperExpModel, ModelError
from levystep.levy_model import (check_interlacing, complex_roots, laplace_exponent, laplace_exponent_deriv,
                                 phi, psi_divdiff, roots, roots_mp)
from models import BM, CP, HEJD2, MODELS, random_hejd


@pytest.mark.parametrize("kw", [
    dict(drift_c=1.0, sigma=-0.1),
    dict(drift_c=1.0, sigma=0.0),
    dict(drift_c=1.0, sigma=0.2, eta=1.0),
    dict(drift_c=1.0, sigma=0.2, eta=1.0, weights=(0.5, 0.6), rates=(1.0, 2.0)),
    dict(drift_c=1.0, sigma=0.2, eta=1.0, weights=(0.5, 0.5), rates=(2.0, 1.0)),
    dict(drift_c=1.0, sigma=0.2, eta=0.0, weights=(1.0,), rates=(1.0,)),
    dict(drift_c=-1.0, sigma=0.0, eta=1.0, weights=(1.0,), rates=(1.0,)),
    dict(drift_c=math.nan, sigma=0.2),
])
def test_invalid_models_rejected(kw):
    with pytest.raises(ModelError):
        HyperExpModel(**kw)


def test_json_round_trip_and_fingerprint():
    m = HEJD2
    again = HyperExpModel.from_json(m.to_json())
    assert again == m and again.fingerprint() == m.fingerprint()
    assert json.loads(m.to_json())["jumps"][1] == {"weight": 0.7, "rate": 7.0}
    with pytest.raises(ModelError):
        HyperExpModel.from_json("{bad")
    with pytest.raises(ModelError):
        HyperExpModel.from_dict({"drift": 1, "sigma": 1, "extra": 0})


def test_psi_values():
    # psi(lam) = c lam + sigma^2 lam^2 / 2 + eta (sum a alpha/(lam + alpha) - 1)
    lam = 0.7
    expect = 0.3 * lam + 0.02 * lam**2 + 2.0 * (0.3 * 2 / (lam + 2) + 0.7 * 7 / (lam + 7) - 1)
    assert laplace_exponent(HEJD2, lam) == pytest.approx(expect, rel=1e-15)
    assert laplace_exponent(HEJD2, 0.0) == 0.0
    h = 1e-6
    fd = (laplace_exponent(HEJD2, lam + h) - laplace_exponent(HEJD2, lam - h)) / (2 * h)
    assert laplace_exponent_deriv(HEJD2, lam) == pytest.approx(fd, abs=1e-9)


def test_psi_domain():
    with pytest.raises(DomainError):
        laplace_exponent(HEJD2, -2.5)
    assert math.isfinite(laplace_exponent(HEJD2, -3.0, extended=True))


def test_phi_brownian_closed_form():
    # c lam + lam^2/2 = q  =>  Phi = -c + sqrt(c^2 + 2q)
    for q in (0.0, 0.3, 2.0):
        assert phi(BM, q) == pytest.approx(-1.0 + math.sqrt(1.0 + 2 * q), abs=1e-14)


def test_phi_zero_negative_drift():
    m = HyperExpModel(-0.5, 1.0)
    assert phi(m, 0.0) == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("name", list(MODELS))
def test_roots_count_residual_interlacing(name):
    m = MODELS[name]
    for q in (0.01, 0.5, 3.0, 50.0):
        rs = roots(m, q)
        assert len(rs) == m.n_roots
        assert check_interlacing(m, rs)
        assert np.all(np.diff(rs.roots) < 0)
        for t in rs.roots:
            assert abs(laplace_exponent(m, t, True) - q) < 1e-11 * max(1.0, q)
        assert q * np.sum(rs.weights / rs.roots) == pytest.approx(1.0, abs=1e-12)


def test_root_residual_bounded_by_conditioning():
    # the attainable residual is |psi'(theta)| times half an ulp of theta
    rng = np.random.default_rng(11)
    for _ in range(200):
        m = random_hejd(rng)
        for q in (0.1, 1.0, 10.0):
            rs = roots(m, q)
            for t, d in zip(rs.roots, rs.psi_prime):
                bound = abs(d) * np.spacing(abs(t)) + 1e-12 * max(1.0, q)
                assert abs(laplace_exponent(m, t, True) - q) <= bound


def test_complex_roots_match_real():
    rc = complex_roots(HEJD2, 1.3 + 0j)
    rr = roots(HEJD2, 1.3)
    assert np.allclose(rc.roots.real, rr.roots, rtol=1e-12, atol=1e-13)
    z = complex_roots(HEJD2, 1.0 + 2.0j)
    for t in z.roots:
        assert abs(complex(laplace_exponent(HEJD2, t, True)) - (1 + 2j)) < 1e-11


def test_roots_mp_refines():
    with mp.workdps(40):
        rs = roots_mp(HEJD2, mp.mpf(1))
        for t in rs.roots:
            assert abs(HEJD2.psi(t) - 1) < mp.mpf(10) ** -35


def test_psi_divdiff_confluent_and_generic():
    a, b = 0.4, 1.1
    dd = psi_divdiff(HEJD2, a, b)
    assert dd == pytest.approx((laplace_exponent(HEJD2, a) - laplace_exponent(HEJD2, b)) / (a - b), rel=1e-13)
    assert psi_divdiff(HEJD2, a, a) == pytest.approx(laplace_exponent_deriv(HEJD2, a), rel=1e-13)
    # nearly coincident arguments: no cancellation
    assert psi_divdiff(HEJD2, a, a + 1e-12) == pytest.approx(laplace_exponent_deriv(HEJD2, a), rel=1e-9)


def test_tilt_exponent():
    c = 0.8
    t = HEJD2.tilt(c)
    for lam in (-0.5, 0.3, 2.0):
        expect = laplace_exponent(HEJD2, lam + c, True) - laplace_exponent(HEJD2, c)
        assert laplace_exponent(t, lam, True) == pytest.approx(expect, rel=1e-12, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), q=st.floats(1e-3, 100.0))
def test_root_sum_property(seed, q):
    m = random_hejd(np.random.default_rng(seed))
    rs = roots(m, q)
    assert check_interlacing(m, rs)
    assert abs(q * float(np.sum(1 / (rs.roots * rs.psi_prime))) - 1) < 1e-10
