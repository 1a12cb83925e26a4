"""Down-and-out call step options: Laplace transforms in maturity and price curves.

The price with knock-out rate rho below the barrier L is

    C(T) = exp(-r T) E[exp(-rho int_0^T 1{S_t <= L} dt) (S_T - K)_+],   S_t = S_0 exp(X_t).

Its transform in T is known in terms of scale functions for any spectrally
negative model (:func:`step_option_lt_general`) and in closed form for
hyper-exponential models (:func:`step_option_lt_hejd`).  The discount rate
is folded in by shifting the transform variable: the transform of C at p is
the r = 0 transform at p + r.  :func:`price_step_option` inverts the
closed form numerically.
"""

from __future__ import annotations

import cmath
import io
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np
from scipy.integrate import quad

from .errors import AbscissaTooSmall, DomainError, InversionUnstable
from .inversion import invert_laplace
from .levy_model import HyperExpModel, _psi, psi_divdiff, root_set

RHO_LIMIT = 1e-10
ABSCISSA_MARGIN = 1e-9


# ---------------------------------------------------------------------------
# Contracts and curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepOptionContract:
    """Down-and-out call step option with S_0 > L and K > L.

    Parameters
    ----------
    spot, strike, barrier : float
        S_0, K and L, all positive.
    knock_out_rate : float
        rho >= 0, the discount rate per unit of time spent at or below L.
    rate : float
        Risk-free rate r >= 0.
    maturity : float
        T > 0 in years; only used by single-maturity helpers.
    """

    spot: float
    strike: float
    barrier: float
    knock_out_rate: float = 0.0
    rate: float = 0.0
    maturity: float = 1.0

    def __post_init__(self):
        vals = (self.spot, self.strike, self.barrier, self.knock_out_rate, self.rate, self.maturity)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("contract parameters must be finite")
        if not (self.spot > 0 and self.strike > 0 and self.barrier > 0):
            raise DomainError("spot, strike and barrier must be positive")
        if not (self.spot > self.barrier and self.strike > self.barrier):
            raise DomainError(f"need S0 > L and K > L, got S0={self.spot}, K={self.strike}, L={self.barrier}")
        if self.knock_out_rate < 0 or self.rate < 0:
            raise DomainError("knock_out_rate and rate must be >= 0")
        if not self.maturity > 0:
            raise DomainError(f"maturity must be > 0, got {self.maturity}")

    @property
    def log_barrier(self) -> float:
        """ln(L / S_0), the barrier in the log-price coordinate started at 0."""
        return math.log(self.barrier / self.spot)

    @property
    def log_strike(self) -> float:
        """ln(K / S_0)."""
        return math.log(self.strike / self.spot)

    def with_(self, **changes) -> "StepOptionContract":
        return replace(self, **changes)


@dataclass(frozen=True)
class PriceCurve:
    """Prices C(T) at a list of maturities, with per-point inversion error estimates."""

    maturities: tuple
    prices: tuple
    error_estimates: tuple
    method: str

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("T,price,error_estimate,method\n")
        for t, c, e in zip(self.maturities, self.prices, self.error_estimates):
            buf.write(f"{t:.17g},{c:.17g},{e:.17g},{self.method}\n")
        return buf.getvalue()


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _is_mp(z) -> bool:
    return isinstance(z, (mpmath.mpf, mpmath.mpc))


def _exp(z):
    if _is_mp(z):
        return mpmath.exp(z)
    if isinstance(z, complex) or np.iscomplexobj(z):
        return cmath.exp(complex(z))
    return math.exp(float(z))


def _check_abscissa(model, P):
    """Real abscissae must satisfy Phi(P) > 1, i.e. P > psi(1)."""
    if _is_mp(P) and isinstance(P, mpmath.mpc):
        return
    if isinstance(P, complex) or np.iscomplexobj(P):
        return
    bound = float(np.real(model.psi(1.0))) + ABSCISSA_MARGIN
    if not float(P) > bound:
        raise AbscissaTooSmall(f"transform needs p + r > psi(1) = {bound - ABSCISSA_MARGIN:.12g}, got {float(P):.12g}")


def martingale_drift(sigma: float, eta: float = 0.0, weights: Sequence[float] = (),
                     rates: Sequence[float] = (), r: float = 0.0) -> float:
    """Drift c making exp(X_t - r t) a martingale, i.e. psi(1) = r."""
    jump = sum(a * al / (1.0 + al) for a, al in zip(weights, rates)) - 1.0 if len(weights) else -1.0
    return r - 0.5 * sigma**2 - (eta * jump if eta else 0.0)


def martingale_defect(model, r: float = 0.0) -> float:
    """psi(1) - r; zero exactly when the model is a risk-neutral pricing measure."""
    return float(np.real(model.psi(1.0))) - r


def is_martingale_measure(model, r: float = 0.0, tol: float = 1e-10) -> bool:
    """Flag models whose discounted asset price is not a martingale."""
    return abs(martingale_defect(model, r)) <= tol


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------

def _scale_callable(model, p) -> Callable[[float], float]:
    s = model.scale(p)
    return s.w if hasattr(s, "w") else s


def step_option_lt_general(model, contract: StepOptionContract, p: float) -> float:
    """Transform of C(T) at real p from scale functions, for any spectrally negative model.

    ``model`` needs ``psi``, ``dpsi``, ``phi`` and ``scale`` (returning
    W^(p) as a callable, or an object with a ``w`` method).  Integrals are
    computed by adaptive quadrature.

    Raises
    ------
    AbscissaTooSmall
        If p + r <= psi(1) + 1e-9.
    """
    P = float(p) + contract.rate
    _check_abscissa(model, P)
    rho = contract.knock_out_rate
    S0, K, L = contract.spot, contract.strike, contract.barrier
    ph = float(model.phi(P))
    W = _scale_callable(model, P)
    ell = math.log(S0 / L)
    opts = dict(epsabs=0.0, epsrel=1e-13, limit=400)
    if rho < RHO_LIMIT:
        ratio = 1.0 / float(model.dpsi(ph))
        hneg = math.exp(ph * ell)
    else:
        ph_rho = float(model.phi(P + rho))
        ratio = (ph_rho - ph) / rho
        integral = quad(lambda y: math.exp(ph_rho * (ell - y)) * float(W(y)), 0.0, ell, **opts)[0]
        hneg = math.exp(ph_rho * ell) - rho * integral
    lead = ratio / (ph * (ph - 1.0)) * hneg * K * math.exp(ph * math.log(L / K))
    if K >= S0:
        return float(lead)
    corr = quad(lambda y: (S0 * math.exp(-y) - K) * float(W(y)), 0.0, math.log(S0 / K), **opts)[0]
    return float(lead - corr)


def step_option_lt_hejd(model: HyperExpModel, contract: StepOptionContract, p, branch: str = "auto",
                        include_cancelled: bool = False):
    """Closed-form transform of C(T) for a hyper-exponential model.

    ``p`` may be a float, a complex number (Talbot nodes) or an mpmath real
    (extended-precision Gaver-Stehfest); the result has the same type.

    With A_i = (Phi(p+rho) - Phi(p))/(Phi(p+rho) - theta_i), computed as a
    ratio of divided differences of psi, the transform is

    * K >= S_0:  K/(Phi(Phi-1)) sum_i A_i (L/K)^Phi (S_0/L)^theta_i / psi'(theta_i),
    * S_0 > K:   K sum_{i>=2} [A_i (L/K)^Phi (S_0/L)^theta_i/(Phi(Phi-1))
                 - (S_0/K)^theta_i/(theta_i(theta_i-1))] / psi'(theta_i)
                 + S_0/(p - psi(1)) - K/p,

    where the i = 1 bracket of the second case vanishes identically.

    Parameters
    ----------
    branch : {"auto", "at_or_above", "below"}
        Force the K >= S_0 or S_0 > K formula (for continuity checks).
    include_cancelled : bool
        Keep the identically zero i = 1 bracket in the S_0 > K formula.

    Raises
    ------
    AbscissaTooSmall
        For real p with p + r <= psi(1) + 1e-9.
    """
    if branch not in ("auto", "at_or_above", "below"):
        raise DomainError(f"unknown branch {branch!r}")
    P = p + contract.rate
    _check_abscissa(model, P)
    rho = contract.knock_out_rate
    S0, K, L = contract.spot, contract.strike, contract.barrier
    mp_mode = _is_mp(P)
    log = mpmath.log if mp_mode else math.log
    ell_l, ell_k, l_k = log(S0) - log(L), log(S0) - log(K), log(L) - log(K)

    rs = root_set(model, P)
    th, dp = list(rs.roots), list(rs.psi_prime)
    ph = th[0]
    if rho < RHO_LIMIT:
        A = [1] + [0] * (len(th) - 1)
    else:
        ph_rho = root_set(model, P + rho).roots[0]
        if not (isinstance(P, complex) or isinstance(P, mpmath.mpc) or np.iscomplexobj(P)):
            assert ph_rho > ph, "Phi(p+rho) must exceed Phi(p)"
        scale = 1 / psi_divdiff(model, ph_rho, ph)
        A = [psi_divdiff(model, ph_rho, t) * scale for t in th]
    lead = 1 / (ph * (ph - 1))
    first = [A[i] * lead * _exp(ph * l_k + th[i] * ell_l) / dp[i] for i in range(len(th))]

    use_upper = (K >= S0) if branch == "auto" else (branch == "at_or_above")
    if use_upper:
        return K * sum(first)
    start = 0 if include_cancelled else 1
    acc = 0
    for i in range(start, len(th)):
        acc += first[i] - _exp(th[i] * ell_k) / (th[i] * (th[i] - 1) * dp[i])
    psi1 = _psi(model, mpmath.mpf(1) if mp_mode else 1.0)
    return K * acc + S0 / (P - psi1) - K / P


# ---------------------------------------------------------------------------
# Price curves
# ---------------------------------------------------------------------------

def inversion_shift(model, contract: StepOptionContract) -> float:
    """Talbot abscissa: rightmost singularity of the transform, max(psi(1), 0) - r."""
    return max(float(np.real(model.psi(1.0))), 0.0) - contract.rate


def _transform(model, contract, method):
    if method == "talbot":
        return lambda s: step_option_lt_hejd(model, contract, complex(s))
    return lambda s: step_option_lt_hejd(model, contract, mpmath.mpf(s))


def price_step_option(model: HyperExpModel, contract: StepOptionContract,
                      maturities: Optional[Sequence[float]] = None, method: str = "talbot",
                      nodes: int = 32, order: int = 14, force: bool = False) -> PriceCurve:
    """Invert the closed-form transform at each maturity.

    Parameters
    ----------
    maturities : sequence of float, optional
        Defaults to the contract's own maturity.
    method : {"talbot", "gs"}
        Fixed Talbot (``nodes``, checked against 1.5 x nodes) or
        Gaver-Stehfest (``order``, checked against order + 2).
    force : bool
        Return points whose refinement error exceeds 1e-2 of the price
        instead of raising.

    Raises
    ------
    InversionUnstable
        If a point's refinement error exceeds 1e-3 relative (or 1e-2 of the
        price) and ``force`` is false.
    """
    if method in ("stehfest", "gaver-stehfest"):
        method = "gs"
    if method not in ("talbot", "gs"):
        raise DomainError(f"unknown inversion method {method!r}")
    Ts = [contract.maturity] if maturities is None else [float(t) for t in maturities]
    if any(not (t > 0 and math.isfinite(t)) for t in Ts):
        raise DomainError("maturities must be positive and finite")
    F = _transform(model, contract, method)
    shift = inversion_shift(model, contract)
    prices, errs = [], []
    for T in Ts:
        res = invert_laplace(F, T, method=method, nodes=nodes, order=order, shift=shift,
                             rtol=math.inf, atol=0.0)
        value, err = res.value, res.error_estimate
        scale = max(abs(value), 1e-14 * contract.spot)
        if not force and (err > 1e-3 * scale or err > 1e-2 * max(value, 0.0) and value > 1e-12 * contract.spot):
            raise InversionUnstable(f"{method} error {err:.3g} too large for price {value:.6g} at T={T}",
                                    value=value, error_estimate=err)
        if value < 0 and not force and -value > max(err, 1e-12 * contract.spot):
            raise InversionUnstable(f"negative price {value:.3g} at T={T}", value=value, error_estimate=err)
        prices.append(max(value, 0.0))
        errs.append(err)
    return PriceCurve(tuple(Ts), tuple(prices), tuple(errs), method)


def vanilla_curve(model: HyperExpModel, contract: StepOptionContract, maturities=None, **kw) -> PriceCurve:
    """The rho = 0 curve, an upper bound for every knock-out rate."""
    return price_step_option(model, contract.with_(knock_out_rate=0.0), maturities, **kw)
