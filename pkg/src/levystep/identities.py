"""Built-in identity suite for a hyper-exponential model.

Each check compares two independent evaluations of a known fluctuation
identity and reports the worst discrepancy over a small random set of
arguments.  The CLI ``check`` command prints these results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .levy_model import HyperExpModel, laplace_exponent, phi, roots
from .occupation import h_kernel, h_kernel_laplace_check, lemma_oracles
from .scale_fn import ScaleEvaluator


@dataclass(frozen=True)
class IdentityResult:
    name: str
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: error={self.error:.3e} tol={self.tolerance:.1e}"


def check_convolution(model: HyperExpModel, rng, n: int = 6) -> IdentityResult:
    """(q-p) int_0^x W^(p)(x-y) W^(q)(y) dy = W^(q)(x) - W^(p)(x), by quadrature."""
    worst = 0.0
    for _ in range(n):
        p, q = sorted(rng.uniform(0.05, 3.0, 2))
        x = float(rng.uniform(0.05, 3.0))
        wp, wq = ScaleEvaluator(model, p), ScaleEvaluator(model, q)
        lhs = (q - p) * quad(lambda y: wp.w(x - y) * wq.w(y), 0.0, x, epsabs=0.0, epsrel=1e-13, limit=200)[0]
        rhs = wq.w(x) - wp.w(x)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return IdentityResult("convolution identity", worst, 1e-8)


def check_tilting(model: HyperExpModel, rng, n: int = 6) -> IdentityResult:
    """W^(p+q)(x) = exp(Phi(p) x) W_tilted^(q)(x) with the tilted model built directly."""
    worst = 0.0
    for _ in range(n):
        p, q = rng.uniform(0.05, 3.0, 2)
        x = float(rng.uniform(0.0, 3.0))
        ph = phi(model, p)
        tilted = model.tilt(ph)
        lhs = ScaleEvaluator(model, p + q).w(x)
        rhs = math.exp(ph * x) * ScaleEvaluator(tilted, q).w(x)
        worst = max(worst, abs(lhs - rhs) / abs(lhs))
    return IdentityResult("tilting identity", worst, 1e-9)


def check_root_sum(model: HyperExpModel, rng, n: int = 6) -> IdentityResult:
    """q sum_i 1/(theta_i psi'(theta_i)) = 1."""
    worst = 0.0
    for q in rng.uniform(0.05, 10.0, n):
        rs = roots(model, float(q))
        worst = max(worst, abs(q * float(np.sum(rs.weights / rs.roots)) - 1.0))
    return IdentityResult("root-sum identity", worst, 1e-10)


def check_h_transform(model: HyperExpModel, rng, n: int = 4) -> IdentityResult:
    """Laplace transform of H^(p,q) against quadrature of the kernel."""
    worst = 0.0
    for _ in range(n):
        p, q = rng.uniform(0.1, 2.0, 2)
        lam = 2.0 * phi(model, p + q) + 1.0 + float(rng.uniform(0.0, 2.0))
        top = 60.0 / (lam - phi(model, p + q))
        val = quad(lambda x: math.exp(-lam * x) * h_kernel(model, p, q, x), 0.0, top,
                   epsabs=0.0, epsrel=1e-12, limit=400)[0]
        ref = h_kernel_laplace_check(model, p, q, lam)
        worst = max(worst, abs(val - ref) / abs(ref))
    return IdentityResult("Laplace transform of H", worst, 1e-6)


def check_rearrangement(model: HyperExpModel, rng, n: int = 8) -> IdentityResult:
    """Both forms of H(x) - q int_a^x W^(p)(x-y) H(y) dy."""
    worst = 0.0
    for _ in range(n):
        p, q = rng.uniform(0.1, 2.0, 2)
        a = float(rng.uniform(0.1, 2.0))
        x = float(rng.uniform(-1.0, 3.0))
        lv = lemma_oracles(model, p, q, a, a + 1.0, x, 0.0)
        worst = max(worst, abs(lv.hronde_lhs - lv.hronde_rhs) / max(1.0, abs(lv.hronde_rhs)))
    return IdentityResult("H rearrangement", worst, 1e-10)


def run_identity_suite(model: HyperExpModel, seed: int = 0) -> list:
    """Run every identity check with a seeded argument sample."""
    rng = np.random.default_rng(seed)
    return [
        check_convolution(model, rng),
        check_tilting(model, rng),
        check_root_sum(model, rng),
        check_h_transform(model, rng),
        check_rearrangement(model, rng),
    ]
