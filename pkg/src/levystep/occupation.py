"""Joint Laplace-domain law of (X at an exponential time, occupation time).

For p > 0 and q >= 0 this module evaluates the density in y of

    v(x, dy) = int_0^inf exp(-p t) E_x[exp(-q int_0^t 1_I(X_s) ds); X_t in dy] dt

for I = (0, a), a general finite interval (a, b) and the half-line (-inf, b),
together with the kernels it is built from:

* H^(p,q)(x) = exp(Phi(p) x) [1 + q int_0^x exp(-Phi(p) z) W^(p+q)(z) dz],
* the curly kernel  cW_a^(p,q)(x) = W^(p+q)(x) - q int_0^a W^(p+q)(x-z) W^(p)(z) dz.

For hyper-exponential models both kernels are exponential sums.  All
convolution integrals are done in closed form by :mod:`levystep.expsum`, and
every factor q/(theta_i - theta_j) is the divided difference of psi, so
nearly coincident roots need no special branch.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np
from scipy.integrate import quad

from .errors import DomainError
from .expsum import ExpTerms, Piece, PiecewiseExp, conv, conv_terms, integrate, integrate_terms, log_total, total
from .levy_model import HyperExpModel, laplace_exponent, phi as phi_of, psi_divdiff, roots

HALFLINE_Q_LIMIT = 1e-8


# ---------------------------------------------------------------------------
# Query types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Finite:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise DomainError(f"finite interval needs a < b, got ({self.a}, {self.b})")

    def describe(self) -> str:
        return f"finite({self.a!r},{self.b!r})"


@dataclass(frozen=True)
class HalfLineBelow:
    b: float

    def describe(self) -> str:
        return f"halfline(-inf,{self.b!r})"


Interval = Union[Finite, HalfLineBelow]


@dataclass(frozen=True)
class TransformQuery:
    """Parameters (p, q, interval, x, y) of the Laplace-domain joint law."""

    p: float
    q: float
    interval: Interval
    x: float
    y: float = 0.0

    def __post_init__(self):
        if not self.p > 0:
            raise DomainError(f"p must be > 0, got {self.p}")
        if not self.q >= 0:
            raise DomainError(f"q must be >= 0, got {self.q}")
        for v in (self.p, self.q, self.x, self.y):
            if not math.isfinite(v):
                raise DomainError("query parameters must be finite")


# ---------------------------------------------------------------------------
# Kernels as piecewise exponential sums
# ---------------------------------------------------------------------------

def _check_levels(p: float, q: float):
    if p < 0 or p + q < 0 or not (math.isfinite(p) and math.isfinite(q)):
        raise DomainError(f"need p >= 0 and p + q >= 0, got p={p}, q={q}")


@lru_cache(maxsize=1024)
def w_piecewise(model: HyperExpModel, p: float) -> PiecewiseExp:
    """W^(p) on [0, inf) as an exponential sum."""
    rs = roots(model, p)
    return PiecewiseExp.single(0.0, math.inf, rs.weights, rs.roots)


@lru_cache(maxsize=1024)
def h_piecewise(model: HyperExpModel, p: float, q: float) -> PiecewiseExp:
    """H^(p,q) on the whole line; q may be negative provided p + q >= 0."""
    _check_levels(p, q)
    ph = phi_of(model, p)
    left = Piece(-math.inf, 0.0, ExpTerms.make(1.0, ph))
    if q == 0:
        right = Piece(0.0, math.inf, ExpTerms.make(1.0, ph))
    else:
        rs = roots(model, p + q)
        # q v_i / (theta_i - Phi(p)) = v_i psi[theta_i, Phi(p)]
        coef = rs.weights * psi_divdiff(model, rs.roots, ph)
        right = Piece(0.0, math.inf, ExpTerms.make(coef, rs.roots))
    return PiecewiseExp((left, right))


@lru_cache(maxsize=4096)
def w_curly_piecewise(model: HyperExpModel, p: float, q: float, a: float) -> PiecewiseExp:
    """cW_a^(p,q) as a two-piece exponential sum."""
    _check_levels(p, q)
    if q == 0:
        return w_piecewise(model, p)
    if a <= 0:
        return w_piecewise(model, p + q)
    rp = roots(model, p)
    rq = roots(model, p + q)
    th, w = rp.roots, rp.weights
    vt, v = rq.roots, rq.weights
    # q v_i w_j exp(vt_i X + (th_j - vt_i) a) / (vt_i - th_j)
    coef = v[:, None] * w[None, :] * psi_divdiff(model, vt[:, None], th[None, :])
    rate = np.broadcast_to(vt[:, None], coef.shape)
    shift = (th[None, :] - vt[:, None]) * a
    inner = Piece(0.0, a, ExpTerms.make(w, th))
    outer = Piece(a, math.inf, ExpTerms.make(coef, rate, shift))
    return PiecewiseExp((inner, outer))


def h_kernel(model: HyperExpModel, p: float, q: float, x):
    """H^(p,q)(x); exp(Phi(p) x) for x < 0 and for q = 0.

    Examples
    --------
    >>> m = HyperExpModel(1.0, 1.0)
    >>> h_kernel(m, 1.0, 0.5, 0.0)
    1.0
    """
    return h_piecewise(model, float(p), float(q))(x)


def h_kernel_laplace_check(model: HyperExpModel, p: float, q: float, lam: float) -> float:
    """Closed-form Laplace transform 1/(lam - Phi(p)) (1 + q/(psi(lam) - p - q))."""
    _check_levels(p, q)
    if not lam > phi_of(model, p + q):
        raise DomainError(f"need lam > Phi(p+q) = {phi_of(model, p + q)}")
    ph = phi_of(model, p)
    return float(1.0 / (lam - ph) * (1.0 + q / (laplace_exponent(model, lam) - p - q)))


def w_curly(model: HyperExpModel, p: float, q: float, a: float, x):
    """cW_a^(p,q)(x); W^(p)(x) for x <= a and W^(p+q)(x) when a <= 0."""
    return w_curly_piecewise(model, float(p), float(q), float(a))(x)


# ---------------------------------------------------------------------------
# Joint densities
# ---------------------------------------------------------------------------

def _outer_terms(model, p, q, A):
    """(coef, rate, shift) of the piece of cW_A^(p,q) on [max(A, 0), inf)."""
    pc = w_curly_piecewise(model, p, q, A).pieces[-1]
    return pc.terms.coef, pc.terms.rate, pc.terms.shift


def _log_t1(model, p, q, a, x) -> float:
    """log of H(x) - q int_a^x W(x-z) H(z) dz.

    Uses the equivalent form exp(Phi x) + q int_0^a W(x-z) H(z) dz, a sum of
    positive quantities, so no cancellation and no overflow.
    """
    ph = phi_of(model, p)
    if q == 0 or x <= 0:
        return ph * x
    c, e = conv_terms(w_piecewise(model, p), h_piecewise(model, p, q), x, 0.0, min(a, x))
    return log_total(np.r_[1.0, q * c], np.r_[ph * x, e])


def _log_denominator(model, p, q, a) -> float:
    """log of psi'(Phi(p)) + q int_0^a exp(-Phi(p) z) H(z) dz."""
    rs = roots(model, p)
    d0 = float(rs.psi_prime[0])
    if q == 0:
        return math.log(d0)
    c, e = integrate_terms(h_piecewise(model, p, q), 0.0, a, rate=-float(rs.phi))
    return log_total(np.r_[d0, q * c], np.r_[0.0, e])


def _check_pq(p, q):
    if not p > 0:
        raise DomainError(f"p must be > 0, got {p}")
    if not q >= 0:
        raise DomainError(f"q must be >= 0, got {q}")


def _vectorize(fn, y):
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.array([fn(float(v)) for v in ys])
    return out.reshape(np.shape(y)) if np.ndim(y) else float(out[0])


def potential_density(model: HyperExpModel, p: float, x: float, y):
    """Free p-potential density exp(Phi(p)(x-y))/psi'(Phi(p)) - W^(p)(x-y).

    Below the start point the leading exponential cancels exactly, leaving
    -sum_{j >= 2} w_j exp(theta_j (x - y)).
    """
    rs = roots(model, p)
    th, w = rs.roots, rs.weights

    def one(yy):
        if yy < x:
            return -float(np.sum(w[1:] * np.exp(th[1:] * (x - yy))))
        return float(math.exp(rs.phi * (x - yy)) / rs.psi_prime[0] - w_piecewise(model, p)(x - yy))

    return _vectorize(one, y)


def joint_density_unit(model: HyperExpModel, p: float, q: float, a: float, x: float, y):
    """Density at y of the joint law for occupation of (0, a).

    The density is e^{-Phi a} T1(x) T2(y) / D - T3(x, y) with

    * T1 = H(x) - q int_a^x W(x-z) H(z) dz,
    * D = psi'(Phi) + q int_0^a e^{-Phi z} H(z) dz,
    * T2 = H(a-y) - q int_0^{-y} H(a-y-z) W(z) dz,
    * T3 = cW_{x-a}(x-y) - q int_0^{-y} cW_{x-a}(x-y-z) W(z) dz,

    where H = H^(p,q), W = W^(p), cW = cW^(p,q).  For y < 0 both T2 and T3
    collapse to exponential sums in y with the rates -theta_j of W^(p), because
    sum_j w_j psi[vt, theta_j] = 1 at every root vt of psi = p + q.  Below
    min(0, x) the theta_1 = Phi(p) term cancels exactly and is dropped.
    """
    p, q, a, x = float(p), float(q), float(a), float(x)
    _check_pq(p, q)
    if not a > 0:
        raise DomainError(f"a must be > 0, got {a}")
    if q == 0:
        return potential_density(model, p, x, y)
    rp, rq = roots(model, p), roots(model, p + q)
    ph = float(rp.phi)
    th, w = rp.roots, rp.weights
    H = h_piecewise(model, p, q)
    h_coef, vt = H.pieces[1].terms.coef, H.pieces[1].terms.rate
    log_lead = _log_t1(model, p, q, a, x) - ph * a - _log_denominator(model, p, q, a)
    Wc = w_curly_piecewise(model, p, q, x - a)

    # T2 for y < 0: sum_ij w_j h_i psi[vt_i, th_j] exp(vt_i a - th_j y)
    m1 = w[None, :] * h_coef[:, None] * psi_divdiff(model, vt[:, None], th[None, :])
    e1 = log_lead + vt[:, None] * a
    if x >= 0:
        cc, rr, ss = _outer_terms(model, p, q, x - a)
        m2 = w[None, :] * cc[:, None] * psi_divdiff(model, rr[:, None], th[None, :])
        e2 = rr[:, None] * x + ss[:, None]
    else:
        m2 = w[None, :]
        e2 = th[None, :] * x
    e2 = np.broadcast_to(e2, m2.shape)

    log_d = _log_denominator(model, p, q, a)
    cc, rr, ss = _outer_terms(model, p, q, x - a)
    low = rr < vt[0]
    W_t = PiecewiseExp.single(0.0, math.inf, w[1:], th[1:])
    H_t = PiecewiseExp.single(0.0, math.inf, h_coef[1:], vt[1:])
    inside = _unit_inside_coef(model, p, q, a, x, W_t, H_t) if x > 0 else 0.0
    if x > a:
        cw, ew = conv_terms(W_t, H, x, 0.0, a)

    def one(yy):
        if 0 <= yy < x:
            if yy >= a:
                # y in [a, x): the Phi(p) parts of T1/D and W^(p) cancel exactly
                return total(q * cw, ew - ph * yy - log_d) - float(W_t(x - yy))
            # y in [0, min(a, x)): only the Phi(p+q) coefficient cancels
            first = float(np.sum(h_coef[1:] * np.exp(log_lead + vt[1:] * (a - yy))))
            second = float(np.sum(cc[low] * np.exp(rr[low] * (x - yy) + ss[low])))
            return first - second + inside * math.exp(vt[0] * (a - yy) - ph * a - log_d)
        if yy >= 0:
            if a - yy >= 0:
                first = float(np.sum(h_coef * np.exp(log_lead + vt * (a - yy))))
            else:
                first = math.exp(log_lead + ph * (a - yy))
            return first - float(Wc(x - yy))
        if yy < x or x >= 0:
            # strictly below the start point: drop the cancelling Phi(p) column
            first = float(np.sum(m1[:, 1:] * np.exp(e1 - th[None, 1:] * yy)))
            second = float(np.sum(m2[:, 1:] * np.exp(e2[:, 1:] - th[None, 1:] * yy)))
            return first - second
        return float(np.sum(m1 * np.exp(e1 - th[None, :] * yy)))

    return _vectorize(one, y)


def _unit_inside_coef(model, p, q, a, x, W_t, H_t) -> float:
    """Coefficient N of the Phi(p+q) mode inside (0, min(a, x)), scaled by exp(Phi(p) a).

    The mode enters the density as N exp(vt_1 (a - y) - Phi(p) a) / D.  Two
    root identities, sum_i v_i psi[vt_i, Phi]^2 = psi'(Phi) and
    sum_j w_j psi[vt, theta_j] = 1, remove every O(1) contribution, which
    leaves only terms of the size of the true coefficient.
    """
    rp, rq = roots(model, p), roots(model, p + q)
    ph, th, w = float(rp.phi), rp.roots, rp.weights
    vt, v = rq.roots, rq.weights
    h = v * psi_divdiff(model, vt, ph)
    # J exp(Phi a), J = int_a^inf exp(-Phi z) H_t(z) dz
    j_scaled = float(np.sum(h[1:] * np.exp(vt[1:] * a) / (ph - vt[1:])))
    A = x - a
    if A <= 0:
        return float(h[0] * H_t(x)) + v[0] * math.exp(vt[0] * A) * q * j_scaled
    g = w[1:] * psi_divdiff(model, vt[0], th[1:])
    return (q * j_scaled * v[0] * float(np.sum(g * np.exp(th[1:] * A)))
            - h[0] ** 2 * float(np.sum(g * np.exp(th[1:] * x)))
            + h[0] * q * conv(W_t, H_t, x, 0.0, a))


def joint_density_interval(model: HyperExpModel, p: float, q: float, a: float, b: float, x: float, y):
    """Density for occupation of (a, b), by translation onto (0, b - a)."""
    if not a < b:
        raise DomainError(f"need a < b, got ({a}, {b})")
    y = np.asarray(y, dtype=float)
    xs = x - a
    ys = y - a
    # keep the side of the start point: the density jumps at y = x when W(0) > 0
    ys = np.where((y > x) & (ys <= xs), np.nextafter(xs, np.inf), ys)
    ys = np.where((y < x) & (ys >= xs), np.nextafter(xs, -np.inf), ys)
    return joint_density_unit(model, p, q, b - a, xs, ys if np.ndim(y) else float(ys))


def halfline_ratio(model: HyperExpModel, p: float, q: float) -> float:
    """(Phi(p+q) - Phi(p))/q, with the analytic limit 1/psi'(Phi(p)) for q < 1e-8."""
    rs = roots(model, p)
    if q < HALFLINE_Q_LIMIT:
        return float(1.0 / rs.psi_prime[0])
    return float(1.0 / psi_divdiff(model, phi_of(model, p + q), rs.phi))


def joint_density_halfline(model: HyperExpModel, p: float, q: float, b: float, x: float, y):
    """Density at y of the joint law for occupation of (-inf, b).

    R H^(p+q,-q)(x-b) H^(p,q)(b-y) - cW_{x-b}^(p,q)(x-y), R = (Phi(p+q) - Phi(p))/q.
    Below min(b, x) both terms are sums over the roots of psi = p + q and the
    Phi(p+q) term cancels exactly.
    """
    p, q, b, x = float(p), float(q), float(b), float(x)
    _check_pq(p, q)
    if q == 0:
        return potential_density(model, p, x, y)
    ratio = halfline_ratio(model, p, q)
    Hneg = h_piecewise(model, p + q, -q)
    if x - b >= 0:
        pc = Hneg.pieces[1].terms
        log_lead = math.log(ratio) + log_total(pc.coef, pc.rate * (x - b))
    else:
        log_lead = math.log(ratio) + phi_of(model, p + q) * (x - b)
    ph = phi_of(model, p)
    H = h_piecewise(model, p, q)
    h_coef, vt = H.pieces[1].terms.coef, H.pieces[1].terms.rate
    Wc = w_curly_piecewise(model, p, q, x - b)
    cc, rr, ss = _outer_terms(model, p, q, x - b)
    low = rr < vt[0]

    # R H^(p+q,-q)(x-b) without its Phi(p) mode, which equals w_1 exp(Phi (x-b))
    rp = roots(model, p)
    th, w = rp.roots, rp.weights
    if x > b:
        lead_t = ratio * w[1:] * psi_divdiff(model, th[1:], phi_of(model, p + q)) * np.exp(th[1:] * (x - b))

    def one(yy):
        if b <= yy < x:
            return float(np.sum(lead_t) * math.exp(ph * (b - yy))
                         - np.sum(w[1:] * np.exp(th[1:] * (x - yy))))
        if yy >= b or yy >= x:
            if b - yy >= 0:
                first = float(np.sum(h_coef * np.exp(log_lead + vt * (b - yy))))
            else:
                first = math.exp(log_lead + ph * (b - yy))
            return first - float(Wc(x - yy))
        first = float(np.sum(h_coef[1:] * np.exp(log_lead + vt[1:] * (b - yy))))
        second = float(np.sum(cc[low] * np.exp(rr[low] * (x - yy) + ss[low])))
        return first - second

    return _vectorize(one, y)


def evaluate(model: HyperExpModel, query: TransformQuery):
    """Density of the query's joint law at ``query.y``."""
    iv = query.interval
    if isinstance(iv, Finite):
        return joint_density_interval(model, query.p, query.q, iv.a, iv.b, query.x, query.y)
    return joint_density_halfline(model, query.p, query.q, iv.b, query.x, query.y)


def one_sided_limits(model: HyperExpModel, query: TransformQuery) -> tuple:
    """(left, right) limits of the density at ``query.y``.

    For bounded-variation models (sigma = 0) the density can jump at y = x
    and at the interval ends; both neighbouring values are returned.
    """
    y = float(query.y)
    lo, hi = np.nextafter(y, -math.inf), np.nextafter(y, math.inf)
    left = float(evaluate(model, TransformQuery(query.p, query.q, query.interval, query.x, float(lo))))
    right = float(evaluate(model, TransformQuery(query.p, query.q, query.interval, query.x, float(hi))))
    return left, right


# ---------------------------------------------------------------------------
# Lemma right-hand sides (cross-check oracles)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LemmaValues:
    """Closed-form right-hand sides of the first-passage identities at (p, q, a, b, x, y).

    ``*_finite`` quantities are on {tau_a^- < tau_b^+}, ``*_infinite`` on
    {tau_a^- < inf}.  ``hronde_lhs``/``hronde_rhs`` are the two forms of
    H(x) - q int_a^x W^(p)(x-y) H(y) dy.
    """

    h_exit_finite: float
    h_exit_infinite: float
    w_exit_finite: float
    w_exit_infinite: float
    z_exit_finite: float
    z_exit_infinite: float
    h_passage: float
    hronde_lhs: float
    hronde_rhs: float


def _z_piecewise(model, q) -> PiecewiseExp:
    left = Piece(-math.inf, 0.0, ExpTerms.make(1.0, 0.0))
    if q == 0:
        right = Piece(0.0, math.inf, ExpTerms.make(1.0, 0.0))
    else:
        rs = roots(model, q)
        right = Piece(0.0, math.inf, ExpTerms.make(q * rs.weights / rs.roots, rs.roots))
    return PiecewiseExp((left, right))


def _signed_conv(f, g, x, a):
    """int_0^a f(x-z) g(z) dz with orientation (a may be negative)."""
    return conv(f, g, x, 0.0, a) if a >= 0 else -conv(f, g, x, a, 0.0)


def _signed_denominator(model, p, q, a):
    rs = roots(model, p)
    lo, hi = sorted((0.0, a))
    sign = 1.0 if a >= 0 else -1.0
    return float(rs.psi_prime[0]) + q * sign * integrate(h_piecewise(model, p, q), lo, hi, rate=-float(rs.phi))


def lemma_oracles(model: HyperExpModel, p: float, q: float, a: float, b: float, x: float, y: float) -> LemmaValues:
    """Evaluate every first-passage identity used by the occupation formulas.

    For the W and Z identities ``q`` is the level of the function evaluated
    at the undershoot (W^(q), Z^(q)); for the H identities the kernel is
    H^(p,q).  Requires a <= b, b > a for the finite versions, p > 0, q > 0.
    """
    if not a < b:
        raise DomainError(f"need a < b, got a={a}, b={b}")
    if not (p > 0 and q > 0):
        raise DomainError("lemma oracles need p > 0 and q > 0")
    ph = phi_of(model, p)
    ph_pq = phi_of(model, p + q)
    H = h_piecewise(model, p, q)
    Wp = w_piecewise(model, p)
    Wpq = w_piecewise(model, p + q)
    Wq = w_piecewise(model, q)
    Zq = _z_piecewise(model, q)
    Zp = _z_piecewise(model, p)

    ea = math.exp(ph * a)
    h_fin = ea * float(H(x - a)) - float(H(b - a)) / float(Wpq(b - a)) * ea * float(Wpq(x - a))
    h_inf = ea * float(H(x - a)) - q / (ph_pq - ph) * ea * float(Wpq(x - a))

    up = max(a - y, 0.0)
    cx = float(Wp(x - y)) + (q - p) * conv(Wp, Wq, x - y, 0.0, up)
    cb = float(Wp(b - y)) + (q - p) * conv(Wp, Wq, b - y, 0.0, up)
    ratio = float(Wp(x - a)) / float(Wp(b - a))
    w_fin = cx - ratio * cb
    w_inf = cx - float(Wp(x - a)) * float(h_piecewise(model, p, q - p)(a - y))

    zx = float(Zp(x - y)) + (q - p) * conv(Wp, Zq, x - y, 0.0, up)
    zb = float(Zp(b - y)) + (q - p) * conv(Wp, Zq, b - y, 0.0, up)
    z_fin = zx - ratio * zb
    # integral of exp(-Phi(p) z) Z^(q)(z) over [0, a - y], sign-aware
    lo, hi = sorted((0.0, a - y))
    zint = integrate(Zq, lo, hi, rate=-ph) * (1.0 if a - y >= 0 else -1.0)
    z_inf = zx - float(Wp(x - a)) * math.exp(ph * (a - y)) * (p / ph + (q - p) * zint)

    lhs = float(H(x)) - q * (conv(Wp, H, x, a, x) if x > a else 0.0)
    rhs = math.exp(ph * x) + q * _signed_conv(Wp, H, x, a)
    passage = lhs - float(Wp(x - a)) * ea * _signed_denominator(model, p, q, a)
    return LemmaValues(h_fin, h_inf, w_fin, w_inf, z_fin, z_inf, passage, lhs, rhs)


# ---------------------------------------------------------------------------
# Density slices
# ---------------------------------------------------------------------------

def default_grid(model: HyperExpModel, p: float, x: float, n: int = 513) -> np.ndarray:
    """Uniform grid centred on x covering the exponential-time marginal."""
    t_eff = 1.0 / p
    half = 8.0 * math.sqrt(model.variance_rate * t_eff) + 4.0 * abs(model.mean) * t_eff
    return np.linspace(x - half, x + half, int(n))


@dataclass(frozen=True, eq=False)
class DensitySlice:
    """Density y -> v(x, y) on a grid, with its total mass."""

    query: TransformQuery
    grid: np.ndarray
    values: np.ndarray
    total_mass: float
    model_hash: str = ""
    min_raw: float = 0.0
    flagged: bool = False

    def to_csv(self) -> str:
        buf = io.StringIO()
        q = self.query
        buf.write(f"# p={q.p!r}\n# q={q.q!r}\n# interval={q.interval.describe()}\n# x={q.x!r}\n")
        buf.write(f"# model={self.model_hash}\n# total_mass={self.total_mass:.17g}\n")
        buf.write("y,density\n")
        for yy, vv in zip(self.grid, self.values):
            buf.write(f"{yy:.17g},{vv:.17g}\n")
        return buf.getvalue()


def _breakpoints(query: TransformQuery) -> list:
    iv = query.interval
    pts = [query.x] + ([iv.a, iv.b] if isinstance(iv, Finite) else [iv.b])
    return sorted(set(pts))


def total_mass(model: HyperExpModel, query: TransformQuery, lo: float, hi: float) -> float:
    """Integral of the density over the real line.

    Adaptive quadrature between the kinks (start point and interval ends)
    plus the two exponential tails beyond [lo, hi].
    """
    f = lambda yy: float(evaluate(model, TransformQuery(query.p, query.q, query.interval, query.x, yy)))
    pts = sorted({lo, hi} | {b for b in _breakpoints(query) if lo < b < hi})
    mass = 0.0
    for u, v in zip(pts, pts[1:]):
        mass += quad(f, u, v, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
    mass += quad(f, -np.inf, lo, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
    mass += quad(f, hi, np.inf, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
    return mass


def density_slice(model: HyperExpModel, query: TransformQuery, grid: Optional[np.ndarray] = None,
                  n: int = 513) -> DensitySlice:
    """Evaluate the density of ``query`` (its y is ignored) on a grid.

    Values below zero are rounding noise; they are clipped, and a warning is
    issued if any fell below -1e-9.
    """
    grid = default_grid(model, query.p, query.x, n) if grid is None else np.asarray(grid, dtype=float)
    vals = np.array([
        float(evaluate(model, TransformQuery(query.p, query.q, query.interval, query.x, yy))) for yy in grid
    ])
    min_raw = float(vals.min()) if vals.size else 0.0
    flagged = min_raw < -1e-9
    if flagged:
        warnings.warn(f"density dipped to {min_raw:.3g} below zero; values clipped", RuntimeWarning)
    vals = np.maximum(vals, 0.0)
    mass = total_mass(model, query, float(grid[0]), float(grid[-1]))
    return DensitySlice(query, grid, vals, mass, model.fingerprint(), min_raw, flagged)
