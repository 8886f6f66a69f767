"""Szekeres asymptotics for restricted partitions and the CLT constants.

With ``u = k/sqrt(n)`` the count ``|P_n(k)|`` behaves like
``f(u)/n * exp(sqrt(n) g(u))`` where ``v = v(u)`` solves
``u^2 J(v) = v^2`` and ``J(v) = int_0^v t/(e^t - 1) dt`` is the Bose integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

PI2_OVER_6 = math.pi ** 2 / 6.0
_FD_STEP_1 = 1e-5
_FD_STEP_2 = 1e-4


class SolverError(ArithmeticError):
    """The implicit equation for ``v(u)`` could not be solved."""


class DomainError(ArithmeticError):
    """An asymptotic formula was evaluated outside its domain."""


def _bose_integrand(t: float) -> float:
    if t == 0.0:
        return 1.0
    if t > 30.0:
        return t * math.exp(-t) / -math.expm1(-t)
    return t / math.expm1(t)


def bose_integral(v: float) -> float:
    """``J(v) = int_0^v t/(e^t - 1) dt``, absolute error below 1e-12."""
    v = float(v)
    if not math.isfinite(v) or v < 0.0:
        raise ValueError(f"bose_integral needs a finite v >= 0, got {v}")
    if v == 0.0:
        return 0.0
    if v < 1e-3:
        # t/(e^t-1) = 1 - t/2 + t^2/12 - t^4/720 + ...
        return v - v * v / 4.0 + v ** 3 / 36.0 - v ** 5 / 3600.0
    if v > 60.0:
        # remaining tail beyond 60 is below 1e-24
        head, _ = integrate.quad(_bose_integrand, 0.0, 60.0, epsabs=1e-13, epsrel=1e-13, limit=200)
        return head
    val, _ = integrate.quad(_bose_integrand, 0.0, v, epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def _bose_slope(v: float) -> float:
    return _bose_integrand(v)


def solve_v(u: float, rtol: float = 4e-16, maxiter: int = 200) -> float:
    """The unique ``v > 0`` with ``u^2 J(v) = v^2``.

    Newton steps on ``h(v) = v^2 - u^2 J(v)`` kept inside a shrinking bracket;
    a step that leaves the bracket is replaced by bisection. The bracket
    ``[log(1+u^2), min(u^2, pi u/sqrt 6)]`` follows from
    ``v^2/(e^v - 1) <= J(v) <= min(v, pi^2/6)``.
    """
    u = float(u)
    if not math.isfinite(u) or u <= 0.0:
        raise ValueError(f"solve_v needs a finite u > 0, got {u}")
    u2 = u * u
    lo = math.log1p(u2)
    hi = min(u2, u * math.pi / math.sqrt(6.0))
    if hi <= lo:
        return hi

    def h(v):
        return v * v - u2 * bose_integral(v)

    h_lo, h_hi = h(lo), h(hi)
    if h_lo > 0.0 or h_hi < 0.0:
        if h_lo == 0.0 or abs(h_lo) <= 1e-15 * lo * lo:
            return lo
        if abs(h_hi) <= 1e-15 * hi * hi:
            return hi
        raise SolverError(f"bracket [{lo}, {hi}] does not straddle the root for u={u}")
    v = 0.5 * (lo + hi)
    for _ in range(maxiter):
        hv = h(v)
        if hv == 0.0:
            return v
        if hv < 0.0:
            lo = v
        else:
            hi = v
        slope = 2.0 * v - u2 * _bose_slope(v)
        step_ok = slope > 0.0
        if step_ok:
            nxt = v - hv / slope
            step_ok = lo < nxt < hi
        if not step_ok:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - v) <= rtol * v:
            return nxt
        v = nxt
    raise SolverError(f"solve_v did not converge for u={u}")


def szekeres_g(u: float) -> float:
    """``g(u) = 2v/u - u log(1 - e^-v)``."""
    v = solve_v(u)
    return 2.0 * v / u - u * math.log(-math.expm1(-v))


def szekeres_g_prime(u: float) -> float:
    """Closed form ``g'(u) = -log(1 - e^-v)``."""
    return -math.log(-math.expm1(-solve_v(u)))


def _radicand(u: float, v: float) -> float:
    return -math.expm1(-v) - 0.5 * u * u * math.exp(-v)


def szekeres_f(u: float) -> float:
    """``f(u) = v / (2^1.5 pi u) * (1 - e^-v - u^2 e^-v / 2)^(-1/2)``."""
    v = solve_v(u)
    rad = _radicand(u, v)
    if not rad > 0.0:
        raise DomainError(f"non-positive radicand {rad} at u={u}, v={v}")
    return v / (2.0 ** 1.5 * math.pi * u) / math.sqrt(rad)


@dataclass(frozen=True)
class SzekeresEval:
    """One evaluation of the Szekeres formula."""

    u: float
    v: float
    f_val: float
    g_val: float
    log_estimate: float | None = None
    n: int | None = None
    k: int | None = None
    in_uniform_range: bool | None = None


def szekeres_eval(u: float, n: int | None = None) -> SzekeresEval:
    """Evaluate ``v, f, g`` at ``u`` and, given ``n``, the log-count estimate."""
    v = solve_v(u)
    rad = _radicand(u, v)
    if not rad > 0.0:
        raise DomainError(f"non-positive radicand {rad} at u={u}, v={v}")
    f_val = v / (2.0 ** 1.5 * math.pi * u) / math.sqrt(rad)
    g_val = 2.0 * v / u - u * math.log(-math.expm1(-v))
    log_est = None
    k = None
    in_range = None
    if n is not None:
        log_est = math.log(f_val) - math.log(n) + math.sqrt(n) * g_val
        k = u * math.sqrt(n)
        in_range = k >= n ** (1.0 / 6.0)
    return SzekeresEval(u, v, f_val, g_val, log_est, n, k, in_range)


def szekeres_log_estimate(n: int, k: int) -> float:
    """``log f(u) - log n + sqrt(n) g(u)`` at ``u = k/sqrt(n)``: log of ``|P_n(k)|``."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    return szekeres_eval(k / math.sqrt(n), n).log_estimate


def in_szekeres_range(n: int, k: int) -> bool:
    """Whether ``k >= n^(1/6)``, where the formula holds uniformly."""
    return k >= n ** (1.0 / 6.0)


# -- psi(t) = g(t)/t - lambda/t^2 ----------------------------------------------

def psi(t: float, lam: float) -> float:
    """``g(t)/t - lam/t^2``."""
    if t <= 0.0 or lam <= 0.0:
        raise ValueError("psi needs t > 0 and lam > 0")
    return szekeres_g(t) / t - lam / (t * t)


def psi_prime(t: float, lam: float) -> float:
    """Closed form ``2 (lam - v(t)) / t^3``."""
    return 2.0 * (lam - solve_v(t)) / t ** 3


def psi_second(t: float, lam: float) -> float:
    """Closed form ``(4v - 6 lam - v t^2 / (e^v - 1 - t^2/2)) / t^4``."""
    v = solve_v(t)
    return (4.0 * v - 6.0 * lam - v * t * t / (math.expm1(v) - 0.5 * t * t)) / t ** 4


def psi_fd_first(t: float, lam: float, h: float = _FD_STEP_1) -> float:
    return (psi(t + h, lam) - psi(t - h, lam)) / (2.0 * h)


def psi_fd_second(t: float, lam: float, h: float = _FD_STEP_2) -> float:
    return (psi(t + h, lam) - 2.0 * psi(t, lam) + psi(t - h, lam)) / (h * h)


def g_fd_first(u: float, h: float = _FD_STEP_1) -> float:
    return (szekeres_g(u + h) - szekeres_g(u - h)) / (2.0 * h)


def stationary_point(lam: float) -> float:
    """``t0 = lam / sqrt(J(lam))``, the maximiser of ``psi(., lam)``."""
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    return lam / math.sqrt(bose_integral(lam))


@dataclass(frozen=True)
class CltParams:
    """Centering and variance of the largest part under the geometric weight."""

    q: float
    lam: float
    t0: float
    gamma: float
    sigma2: float
    psi2_t0: float

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def sigma2_from_psi(self) -> float:
        """``4 / (|psi''(t0)| t0^6)``, the same variance through ``psi``."""
        return 4.0 / (abs(self.psi2_t0) * self.t0 ** 6)


def clt_params(q: float) -> CltParams:
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    lam = -math.log(q)
    J = bose_integral(lam)
    em1 = math.expm1(lam)
    t0 = lam / math.sqrt(J)
    gamma = J / (lam * lam)
    sigma2 = 2.0 * J / lam ** 3 - 1.0 / (lam * em1)
    psi2 = -2.0 * lam * em1 / (t0 ** 4 * (em1 - 0.5 * t0 * t0))
    return CltParams(q=q, lam=lam, t0=t0, gamma=gamma, sigma2=sigma2, psi2_t0=psi2)
