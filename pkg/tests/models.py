"""Shared test models."""

from __future__ import annotations

import numpy as np

from levystep import HyperExpModel

BM = HyperExpModel(1.0, 1.0)
HEJD2 = HyperExpModel(0.3, 0.2, 2.0, (0.3, 0.7), (2.0, 7.0))
CP = HyperExpModel(3.0, 0.0, 1.0, (1.0,), (1.0,))
MODELS = {"bm": BM, "hejd2": HEJD2, "cp": CP}


def random_hejd(rng: np.random.Generator) -> HyperExpModel:
    """Random hyper-exponential model with well-separated jump rates.

    Up to three phases; rates grow geometrically by a factor of at least 1.5
    and every weight is at least 0.5/n, so no phase is negligible.
    """
    n = int(rng.integers(0, 4))
    sig = float(rng.uniform(0.1, 0.4)) if rng.random() < 0.75 else 0.0
    if n == 0:
        sig = max(sig, 0.1)
    rates = np.cumprod(np.r_[rng.uniform(0.5, 4.0), rng.uniform(1.5, 2.5, max(n - 1, 0))])[:n]
    w = list(0.5 / n + 0.5 * rng.dirichlet(np.ones(n))) if n else []
    if n:
        w = [float(v) for v in w]
        w[-1] = 1.0 - sum(w[:-1])
    drift = float(rng.uniform(-0.5, 1.0)) if sig > 0 else float(rng.uniform(0.1, 3.0))
    eta = float(rng.uniform(0.1, 3.0)) if n else 0.0
    return HyperExpModel(drift, sig, eta, tuple(w), tuple(float(r) for r in rates))
