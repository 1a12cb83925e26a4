"""Scale functions W^(q), Z^(q), two-sided exit identities and killed potentials.

For a hyper-exponential model the partial-fraction expansion

    1/(psi(lam) - q) = sum_i w_i / (lam - theta_i),   w_i = 1/psi'(theta_i)

inverts term by term, giving W^(q)(x) = sum_i w_i exp(theta_i x) on x >= 0.
Generic spectrally negative exponents are handled by Talbot inversion of
1/(psi - q) instead (:func:`scale_w_generic`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DomainError, ScaleOverflow
from .expsum import PiecewiseExp
from .inversion import invert_laplace
from .levy_model import HyperExpModel, RootSet, roots

LOG_OVERFLOW = 700.0


def _check_overflow(rate: float, x):
    xmax = float(np.max(x)) if np.size(x) else 0.0
    if rate * xmax > LOG_OVERFLOW:
        raise ScaleOverflow(
            f"theta_1 * x = {rate * xmax:.1f} exceeds {LOG_OVERFLOW}; use the *_log variants"
        )


@dataclass(frozen=True)
class ScaleEvaluator:
    """Closed-form W^(q) and Z^(q) for a hyper-exponential model at fixed q.

    Examples
    --------
    >>> ev = ScaleEvaluator(HyperExpModel(1.0, 1.0), 1.0)
    >>> round(float(ev.w(1.0)), 7)
    1.1629306
    """

    model: HyperExpModel
    q: float
    rootset: RootSet = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "rootset", roots(self.model, self.q))

    @property
    def theta(self) -> np.ndarray:
        return self.rootset.roots

    @property
    def weights(self) -> np.ndarray:
        return self.rootset.weights

    @property
    def phi(self) -> float:
        return float(self.rootset.phi)

    # -- W ------------------------------------------------------------------
    def w(self, x):
        """W^(q)(x); zero for x < 0."""
        x = np.asarray(x, dtype=float)
        _check_overflow(self.phi, x)
        xp = np.where(x >= 0, x, 0.0)
        val = np.expm1(np.multiply.outer(xp, self.theta)) @ self.weights + self._w0
        out = np.where(x >= 0, val, 0.0)
        return out if out.ndim else float(out)

    @property
    def _w0(self) -> float:
        """W(0): 1/c for bounded variation, 0 otherwise (the weights sum to it)."""
        return float(np.sum(self.weights)) if self.model.sigma == 0 else 0.0

    def _near_zero(self, x):
        # where exp(Phi x) is O(1) the expm1 form avoids cancellation in sum_i w_i = W(0)
        return (x >= 0) & (self.phi * x <= 1.0)

    def w_log(self, x):
        """(mantissa, log_scale) with W^(q)(x) = mantissa * exp(log_scale).

        ``log_scale = theta_1 x`` on x >= 0, so the mantissa stays O(1/psi'(Phi)).
        """
        x = np.asarray(x, dtype=float)
        xp = np.where(x >= 0, x, 0.0)
        mant = np.exp(np.multiply.outer(xp, self.theta - self.phi)) @ self.weights
        small = np.where(self._near_zero(xp), xp, 0.0)
        mant_small = (np.expm1(np.multiply.outer(small, self.theta)) @ self.weights + self._w0) * np.exp(-self.phi * small)
        mant = np.where(self._near_zero(x), mant_small, np.where(x >= 0, mant, 0.0))
        scale = np.where(x >= 0, self.phi * xp, 0.0)
        return mant, scale

    # -- Z ------------------------------------------------------------------
    def _z_coef(self):
        return self.q * self.weights / self.theta

    def z(self, x):
        """Z^(q)(x) = 1 + q int_0^x W^(q); equal to 1 for x <= 0 or q = 0."""
        x = np.asarray(x, dtype=float)
        if self.q == 0:
            out = np.ones(x.shape)
            return out if out.ndim else float(out)
        _check_overflow(self.phi, x)
        xp = np.where(x > 0, x, 0.0)
        # the coefficients sum to one (root-sum identity), so Z = 1 + sum_i c_i expm1(theta_i x)
        val = 1.0 + np.expm1(np.multiply.outer(xp, self.theta)) @ self._z_coef()
        out = np.where(x > 0, val, 1.0)
        return out if out.ndim else float(out)

    def z_log(self, x):
        """(mantissa, log_scale) with Z^(q)(x) = mantissa * exp(log_scale)."""
        x = np.asarray(x, dtype=float)
        if self.q == 0:
            return np.ones(x.shape), np.zeros(x.shape)
        xp = np.where(x > 0, x, 0.0)
        mant = np.exp(np.multiply.outer(xp, self.theta - self.phi)) @ self._z_coef()
        small = np.where(self._near_zero(xp), xp, 0.0)
        mant_small = (1.0 + np.expm1(np.multiply.outer(small, self.theta)) @ self._z_coef()) * np.exp(-self.phi * small)
        mant = np.where(x > 0, np.where(self._near_zero(x), mant_small, mant), 1.0)
        scale = np.where(x > 0, self.phi * xp, 0.0)
        return mant, scale

    # -- exit identities -------------------------------------------------------
    @staticmethod
    def _check_box(x, a, c):
        if not a < c:
            raise DomainError(f"need a < c, got a={a}, c={c}")
        if not a <= x <= c:
            raise DomainError(f"need a <= x <= c, got x={x} outside [{a}, {c}]")

    def _w_ratio(self, u: float, v: float) -> float:
        """W(u)/W(v) for 0 <= u <= v, computed in log-scaled form."""
        mu, su = self.w_log(u)
        mv, sv = self.w_log(v)
        return float(mu / mv * math.exp(float(su - sv)))

    def exit_up(self, x: float, a: float, c: float) -> float:
        """E_x[exp(-q tau_c^+); tau_c^+ < tau_a^-] = W(x-a)/W(c-a)."""
        self._check_box(x, a, c)
        return self._w_ratio(x - a, c - a)

    def exit_down(self, x: float, a: float, c: float) -> float:
        """E_x[exp(-q tau_a^-); tau_a^- < tau_c^+] = Z(x-a) - Z(c-a) W(x-a)/W(c-a)."""
        self._check_box(x, a, c)
        zm, zs = self.z_log(c - a)
        wm, ws = self.w_log(c - a)
        wxm, wxs = self.w_log(x - a)
        zxm, zxs = self.z_log(x - a)
        # common scale exp(zxs) keeps both terms finite
        second = float(zm / wm * wxm * math.exp(float(zs - ws + wxs - zxs)))
        return float((zxm - second) * math.exp(float(zxs)))

    # -- killed potential densities (this evaluator's q plays the role of p) --
    def potential_two_sided(self, x: float, y, a: float):
        """Density of the p-potential of X killed on leaving [0, a]."""
        y = np.asarray(y, dtype=float)
        if not 0 <= x <= a or np.any((y < 0) | (y > a)):
            raise DomainError("potential_two_sided needs 0 <= x <= a and 0 <= y <= a")
        if a <= 0:
            raise DomainError("a must be positive")
        mx, sx = self.w_log(x)
        my, sy = self.w_log(a - y)
        ma, sa = self.w_log(a)
        first = mx * my / ma * np.exp(sx + sy - sa)
        out = first - self.w(x - y)
        return out if np.ndim(out) else float(out)

    def _tail_sum(self, u, v):
        """sum_{i >= 2} w_i exp(theta_i u + v), the part of W left after the Phi term cancels."""
        return np.exp(np.multiply.outer(u, self.theta[1:]) + np.asarray(v)[..., None]) @ self.weights[1:]

    def potential_upper_killed(self, x: float, y, a: float):
        """Density of the p-potential of X killed on leaving (-inf, a].

        Below x the Phi(p) terms of W(a-y) exp(Phi(x-a)) and W(x-y) cancel
        exactly and are dropped, so the density stays finite as y -> -inf.
        """
        y = np.asarray(y, dtype=float)
        if x > a or np.any(y > a):
            raise DomainError("potential_upper_killed needs x <= a and y <= a")
        below = y < x
        u_a = np.maximum(a - y, 0.0)
        lo = self._tail_sum(u_a, self.phi * (x - a) * np.ones_like(y)) - self._tail_sum(np.maximum(x - y, 0.0), 0.0 * y)
        my, sy = self.w_log(a - np.where(below, x, y))
        hi = my * np.exp(sy + self.phi * (x - a))
        if self.model.sigma == 0:
            # W has a jump at 0: at y = x the W(x - y) term contributes its full value
            hi = hi - np.where(y == x, self.w(0.0), 0.0)
        out = np.where(below, lo, hi)
        return out if np.ndim(out) else float(out)

    def potential_lower_killed(self, x: float, y, a: float):
        """Density of the p-potential of X killed on leaving [a, inf); zero off the quadrant.

        Below x the Phi(p) terms cancel exactly, as in :meth:`potential_upper_killed`.
        """
        y = np.asarray(y, dtype=float)
        if x < a:
            out = np.zeros(y.shape)
            return out if out.ndim else 0.0
        mx, sx = self.w_log(x - a)
        first = np.exp(-self.phi * (np.maximum(y, x) - a) + sx) * mx
        if self.model.sigma == 0:
            first = first - np.where(y == x, self.w(0.0), 0.0)
        lo = self._tail_sum(np.full(y.shape, x - a), -self.phi * (y - a)) - self._tail_sum(np.maximum(x - y, 0.0), 0.0 * y)
        out = np.where(y >= a, np.where(y < x, lo, first), 0.0)
        return out if out.ndim else float(out)

    # -- piecewise representation ---------------------------------------------
    def as_piecewise(self) -> PiecewiseExp:
        return PiecewiseExp.single(0.0, math.inf, self.weights, self.theta)


def scale_w(model: HyperExpModel, q: float, x):
    return ScaleEvaluator(model, q).w(x)


def scale_z(model: HyperExpModel, q: float, x):
    return ScaleEvaluator(model, q).z(x)


# ---------------------------------------------------------------------------
# Generic exponents through Talbot inversion
# ---------------------------------------------------------------------------

def _generic_phi(psi: Callable, q: float) -> float:
    """Largest real root of psi = q for a generic convex exponent with psi(0) = 0."""
    f = lambda lam: float(np.real(psi(lam))) - q
    hi = 1.0
    while f(hi) <= 0:
        hi *= 2.0
        if hi > 1e12:
            raise DomainError("could not bracket Phi(q) for the supplied exponent")
    lo = 0.0
    if q == 0:
        if f(1e-9 * hi) >= 0:  # psi'(0+) >= 0, so Phi(0) = 0
            return 0.0
        # exclude the trivial root: start at the minimiser of psi on [0, hi]
        lo = minimize_scalar(f, bounds=(0.0, hi), method="bounded", options={"xatol": 1e-12}).x
    return float(brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200))


def scale_w_generic(psi: Callable, q: float, x: float, phi: Optional[float] = None,
                    nodes: int = 32, rtol: float = 1e-6) -> float:
    """W^(q)(x) from Talbot inversion of 1/(psi(lam) - q).

    ``psi`` must accept complex arguments with real part > Phi(q).  The
    contour is shifted by Phi(q) so the rightmost pole sits at the origin of
    the shifted variable.  At x = 0 the initial value is the limit
    lam/(psi(lam) - q) as lam -> infinity (Richardson-extrapolated).

    Raises
    ------
    InversionUnstable
        If 32- and 48-node values differ by more than ``rtol`` relative.
    """
    if x < 0:
        return 0.0
    shift = _generic_phi(psi, q) if phi is None else float(phi)
    if x == 0:
        g = lambda lam: lam / (float(np.real(psi(lam))) - q)
        big = max(1e6, 1e3 * shift)
        return max(0.0, 2.0 * g(2.0 * big) - g(big))
    F = lambda s: 1.0 / (psi(s) - q)
    return invert_laplace(F, x, method="talbot", nodes=nodes, shift=shift, rtol=rtol, atol=1e-300).value


@dataclass(frozen=True)
class GenericModel:
    """Spectrally negative model known only through its Laplace exponent.

    Only W^(q) (by numerical inversion) is available; closed-form kernels
    need a :class:`HyperExpModel`.
    """

    exponent: Callable
    name: str = "generic"

    def psi(self, lam):
        return self.exponent(lam)

    def dpsi(self, lam, h: float = 1e-6):
        lam = float(lam)
        return (float(np.real(self.exponent(lam + h))) - float(np.real(self.exponent(lam - h)))) / (2 * h)

    def phi(self, q: float) -> float:
        return _generic_phi(self.exponent, float(q))

    def scale(self, q: float) -> Callable:
        shift = self.phi(q)
        psi = self.exponent

        def w(x):
            return scale_w_generic(psi, q, float(x), phi=shift)

        return w
