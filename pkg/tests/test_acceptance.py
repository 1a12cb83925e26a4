"""Acceptance suite: one test (and one summary line) per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary lists
every criterion with its measured error and tolerance.
"""

from __future__ import annotations

import math
import time

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from levystep import HyperExpModel, StepOptionContract, invert_laplace, price_step_option
from levystep.identities import run_identity_suite
from levystep.levy_model import check_interlacing, laplace_exponent, roots, roots_mp
from levystep.mc_oracle import SimConfig, estimate_joint, estimate_option_curve
from levystep.occupation import (Finite, default_grid, joint_density_halfline, joint_density_interval,
                                 joint_density_unit, potential_density)
from levystep.levy_model import _psi
from levystep.pricing import martingale_drift, step_option_lt_general, step_option_lt_hejd
from levystep.scale_fn import ScaleEvaluator, scale_w_generic
from models import CP, HEJD2, MODELS, random_hejd

# risk-neutral pricing models (psi(1) = r)
R = 0.03
BM_RN = HyperExpModel(martingale_drift(0.25, r=R), 0.25)
KOU_RN = HyperExpModel(martingale_drift(0.15, 1.0, (1.0,), (10.0,), R), 0.15, 1.0, (1.0,), (10.0,))
HEJD_RN = HyperExpModel(martingale_drift(0.2, 2.0, (0.4, 0.6), (4.0, 12.0), R), 0.2, 2.0, (0.4, 0.6), (4.0, 12.0))
PRICING_MODELS = {"bm": BM_RN, "kou": KOU_RN, "hejd": HEJD_RN}

CONTRACTS = [
    StepOptionContract(100, 100, 90, 1.0, R),
    StepOptionContract(100, 95, 85, 2.0, R),
    StepOptionContract(100, 110, 90, 0.5, R),
    StepOptionContract(100, 120, 95, 5.0, R),
    StepOptionContract(100, 80, 70, 1.0, R),
    StepOptionContract(100, 100, 60, 10.0, R),
    StepOptionContract(100, 100, 90, 0.0, R),
    StepOptionContract(100, 90, 85, 0.0, R),
    StepOptionContract(50, 55, 45, 3.0, R),
    StepOptionContract(100, 99.5, 99, 20.0, R),
]


def bs_call(S, K, r, sigma, T):
    d1 = (math.log(S / K) + (r + 0.5 * sigma**2) * T) / (sigma * math.sqrt(T))
    d2 = d1 - sigma * math.sqrt(T)
    return S * norm.cdf(d1) - K * math.exp(-r * T) * norm.cdf(d2)


def test_criterion_01_root_sets(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    worst_sum = worst_res = 0.0
    interlaced = True
    for _ in range(50):
        model = random_hejd(rng)
        for q in (0.1, 1.0, 10.0):
            rs = roots(model, q)
            worst_sum = max(worst_sum, abs(q * float(np.sum(1.0 / (rs.roots * rs.psi_prime))) - 1.0))
            worst_res = max(worst_res, max(abs(float(laplace_exponent(model, t, True)) - q) for t in rs.roots))
            interlaced &= check_interlacing(model, rs)
    dt = time.perf_counter() - t0
    ok = worst_sum < 1e-10 and worst_res < 1e-12 and interlaced and dt < 5
    report(1, ok, f"root-sum err={worst_sum:.2e} (<1e-10), residual={worst_res:.2e} (<1e-12), "
                  f"interlacing={interlaced}, {dt:.2f}s (<5s)")
    assert ok


def test_criterion_02_scale_vs_talbot(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    xs = np.linspace(0.01, 5.0, 40)
    worst = 0.0
    for _ in range(20):
        model = random_hejd(rng)
        for q in (0.1, 1.0, 5.0):
            ev = ScaleEvaluator(model, q)
            closed = ev.w(xs)
            for x, c in zip(xs, closed):
                # Talbot inversion of 1/(psi - q) through the generic complex exponent
                num = scale_w_generic(lambda lam, m=model: _psi(m, lam), q, float(x), phi=ev.phi)
                worst = max(worst, abs(c - num) / abs(c))
    dt = time.perf_counter() - t0
    ok = worst < 1e-6 and dt < 30
    report(2, ok, f"max rel err={worst:.2e} (<1e-6), {dt:.1f}s (<30s)")
    assert ok


def test_criterion_03_identity_suite(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    models = list(MODELS.values()) + [random_hejd(rng) for _ in range(5)]
    worst = {}
    failed = []
    for i, model in enumerate(models):
        for res in run_identity_suite(model, seed=i):
            worst[res.name] = max(worst.get(res.name, 0.0), res.error)
            if not res.passed:
                failed.append((i, res.line()))
    dt = time.perf_counter() - t0
    ok = not failed and dt < 60
    detail = ", ".join(f"{k}={v:.1e}" for k, v in worst.items())
    report(3, ok, f"{detail}; {len(failed)} failures, {dt:.1f}s (<60s)")
    assert ok, failed


def _bin_average(model, p, q, a, x, lo, hi):
    pts = [v for v in (0.0, a, x) if lo < v < hi]
    f = lambda y: float(joint_density_unit(model, p, q, a, x, y))
    edges = [lo] + sorted(pts) + [hi]
    return sum(quad(f, u, v, epsabs=1e-12, epsrel=1e-10)[0] for u, v in zip(edges, edges[1:])) / (hi - lo)


@pytest.mark.slow
def test_criterion_04_unit_density_vs_mc(report):
    t0 = time.perf_counter()
    model = HyperExpModel(1.0, 1.0)
    p, q, a = 1.0, 0.5, 1.0
    cfg = SimConfig(n_paths=1_000_000, dt=1e-3, seed=4, block_size=1 << 16)
    within3 = total = 0
    worst = 0.0
    for i, x in enumerate((-0.5, 0.5, 1.5)):
        edges = np.linspace(x - 3.0, x + 5.0, 41)
        est = estimate_joint(model, x, p, q, Finite(0.0, a), edges, cfg.__class__(**{**cfg.__dict__, "seed": 4 + i}))
        exact = np.array([_bin_average(model, p, q, a, x, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])])
        z = np.abs(est.means - exact) / est.std_errors
        within3 += int(np.sum(z <= 3.0))
        total += z.size
        worst = max(worst, float(z.max()))
    dt = time.perf_counter() - t0
    frac = within3 / total
    ok = frac >= 0.95 and worst <= 5.0 and dt < 600
    report(4, ok, f"{within3}/{total} bins within 3 SE ({frac:.1%}, >=95%), max |z|={worst:.2f} (<=5), "
                  f"{dt:.0f}s (<600s)")
    assert ok


def test_criterion_05_interval_to_halfline(report):
    t0 = time.perf_counter()
    worst = 0.0
    for model in MODELS.values():
        for p, q, b, x in ((1.0, 0.5, 1.0, 0.3), (0.7, 2.0, 0.5, 2.0), (2.0, 0.1, 0.0, -1.0)):
            ys = default_grid(model, p, x, 201)
            lim = joint_density_interval(model, p, q, -40.0, b, x, ys)
            half = joint_density_halfline(model, p, q, b, x, ys)
            worst = max(worst, float(np.max(np.abs(lim - half))))
    dt = time.perf_counter() - t0
    ok = worst < 1e-6 and dt < 5
    report(5, ok, f"max abs diff={worst:.2e} (<1e-6), {dt:.2f}s (<5s)")
    assert ok


def _potential_from_roots(model, p, x, y):
    """exp(Phi(x-y))/psi'(Phi) - W(x-y) evaluated at 40 digits, without rearrangement."""
    with mp.workdps(40):
        rs = roots_mp(model, mp.mpf(p))
        out = []
        for yy in np.atleast_1d(y):
            d = mp.mpf(x) - mp.mpf(float(yy))
            w = mp.fsum(mp.exp(t * d) / dp for t, dp in zip(rs.roots, rs.psi_prime)) if d >= 0 else 0
            out.append(float(mp.exp(rs.roots[0] * d) / rs.psi_prime[0] - w))
    return np.array(out)


def test_criterion_06_q_zero_reductions(report):
    t0 = time.perf_counter()
    worst = 0.0
    for model in MODELS.values():
        for p, x in ((1.0, 0.4), (0.5, -0.7)):
            ys = np.linspace(x - 3.0, x + 3.0, 61)
            ref = _potential_from_roots(model, p, x, ys)
            for vals in (joint_density_unit(model, p, 0.0, 1.0, x, ys),
                         joint_density_interval(model, p, 0.0, -0.5, 0.8, x, ys),
                         joint_density_halfline(model, p, 0.0, 0.2, x, ys),
                         potential_density(model, p, x, ys)):
                worst = max(worst, float(np.max(np.abs(vals - ref) / np.maximum(1.0, np.abs(ref)))))
    dt = time.perf_counter() - t0
    ok = worst < 1e-10 and dt < 1
    report(6, ok, f"max err={worst:.2e} (<1e-10), {dt:.2f}s (<1s)")
    assert ok


def _lt_by_density(model, c: StepOptionContract, p: float) -> float:
    P = p + c.rate
    b, k = c.log_barrier, c.log_strike
    f = lambda y: (c.spot * math.exp(y) - c.strike) * float(joint_density_halfline(model, P, c.knock_out_rate, b, 0.0, y))
    # the integrand decays like exp((1 - Phi(P)) y); stop where it is below 1e-30 of its scale
    top = max(k, 0.0) + 70.0 / (roots(model, P).phi - 1.0)
    pts = sorted({k, max(k, 0.0), top})
    return sum(quad(f, u, v, epsabs=0.0, epsrel=1e-12, limit=400)[0] for u, v in zip(pts, pts[1:]))


def test_criterion_07_pricing_triangle(report):
    t0 = time.perf_counter()
    w_closed = w_quad = 0.0
    for model in PRICING_MODELS.values():
        for j, c in enumerate(CONTRACTS):
            p = 0.5 + 0.25 * j
            closed = step_option_lt_hejd(model, c, p)
            general = step_option_lt_general(model, c, p)
            dens = _lt_by_density(model, c, p)
            w_closed = max(w_closed, abs(closed - general) / abs(general))
            w_quad = max(w_quad, abs(closed - dens) / abs(closed), abs(general - dens) / abs(general))
    dt = time.perf_counter() - t0
    ok = w_closed < 1e-10 and w_quad < 1e-7 and dt < 60
    report(7, ok, f"hejd vs general={w_closed:.2e} (<1e-10), vs density quadrature={w_quad:.2e} (<1e-7), "
                  f"{dt:.1f}s (<60s)")
    assert ok


@pytest.mark.slow
def test_criterion_08_end_to_end_price(report):
    t0 = time.perf_counter()
    Ts = (0.25, 1.0, 2.0)
    contract = StepOptionContract(100, 100, 90, 2.0, R)
    worst_inv = 0.0
    worst_z = 0.0
    for i, model in enumerate((BM_RN, KOU_RN)):
        tal = price_step_option(model, contract, Ts, method="talbot")
        gs = price_step_option(model, contract, Ts, method="gs", order=24)
        worst_inv = max(worst_inv, max(abs(a - b) / abs(a) for a, b in zip(tal.prices, gs.prices)))
        mc = estimate_option_curve(model, contract, Ts, SimConfig(n_paths=1_000_000, dt=1e-3, seed=80 + i))
        worst_z = max(worst_z, max(abs(e.z_score(v)) for e, v in zip(mc, tal.prices)))
    vanilla = contract.with_(knock_out_rate=0.0)
    bs_err = max(abs(v - bs_call(100, 100, R, 0.25, T)) / bs_call(100, 100, R, 0.25, T)
                 for v, T in zip(price_step_option(BM_RN, vanilla, Ts).prices, Ts))
    dt = time.perf_counter() - t0
    ok = worst_inv < 1e-5 and worst_z <= 3.0 and bs_err < 1e-4 and dt < 900
    report(8, ok, f"Talbot vs GS={worst_inv:.2e} (<1e-5), MC max |z|={worst_z:.2f} (<=3), "
                  f"BS rel err={bs_err:.2e} (<1e-4), {dt:.0f}s (<900s)")
    assert ok


def test_criterion_09_inversion_pairs(report):
    t0 = time.perf_counter()
    pairs = [(lambda s: 1 / s, lambda T: 1.0),
             (lambda s: 1 / (s + 1), lambda T: math.exp(-T)),
             (lambda s: 1 / (s * s + 1), math.sin)]
    worst = 0.0
    for F, f in pairs:
        for T in (0.5, 1.0, 5.0):
            worst = max(worst, abs(invert_laplace(F, T, method="talbot").value - f(T)))
    dt = time.perf_counter() - t0
    ok = worst < 1e-8 and dt < 1
    report(9, ok, f"max abs err={worst:.2e} (<1e-8), {dt:.3f}s (<1s)")
    assert ok


def test_criterion_10_monotonicity(report):
    t0 = time.perf_counter()
    model = KOU_RN
    rhos = (0.0, 0.5, 1.0, 2.0, 5.0)
    strikes = (90.0, 95.0, 100.0, 105.0, 110.0)
    spots = (90.0, 95.0, 100.0, 105.0, 110.0)
    C = np.empty((5, 5, 5))
    E = np.empty((5, 5, 5))
    for i, rho in enumerate(rhos):
        for j, K in enumerate(strikes):
            for k, S in enumerate(spots):
                curve = price_step_option(model, StepOptionContract(S, K, 85.0, rho, R))
                C[i, j, k], E[i, j, k] = curve.prices[0], curve.error_estimates[0]
    slack = 2.0 * E.max() + 1e-12
    viol = int(np.sum(np.diff(C, axis=0) > slack) + np.sum(np.diff(C, axis=1) > slack)
               + np.sum(np.diff(C, axis=2) < -slack))
    dt = time.perf_counter() - t0
    ok = viol == 0 and dt < 120
    report(10, ok, f"{viol} violations on 5x5x5 grid (slack {slack:.1e}), {dt:.1f}s (<120s)")
    assert ok
