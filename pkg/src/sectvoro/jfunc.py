"""Angle-sum quantities J_{n,k}(beta) of beta simplices, by numerical quadrature.

``J_{n,k}(beta)`` is the expected sum of internal angles of a random
n-vertex beta simplex at its k-vertex faces; as ``beta -> inf`` it tends to
the corresponding angle sum of the regular simplex.  With ``j = n - k`` and
``dd = 2*beta + n`` the quantity equals

    C(n, j) * Gamma((M+3)/2) / (sqrt(pi) * Gamma(M/2 + 1))
        * Int_R (cosh u)^(-M-2) * (1/2 + i*c*g(u))^j du

where ``M = (dd-1)*n``, ``c = Gamma((dd+1)/2) / (sqrt(pi)*Gamma(dd/2))`` and
``g(u) = Int_0^u (cosh v)^(dd-1) dv``.  The integrand is smooth, decays like
``(cosh u)^(-((dd-1)*k + 2))`` and is conjugate-symmetric in u, so the
integral equals twice the real part over ``[0, u_max]``.

Known exact values used as anchors by the test-suite, valid for every
``beta >= -1``:  J_{1,1} = J_{2,1} = J_{2,2} = 1, J_{3,1} = 1/2,
J_{3,2} = 3/2, J_{n,n} = 1 and J_{n,n-1} = n/2.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln, roots_legendre

__all__ = [
    "INFINITY",
    "JQuery",
    "QuadratureConfig",
    "JResult",
    "NonConvergenceError",
    "ExtrapolationError",
    "j_value",
    "j_value_info",
    "j_value_infinity",
]

INFINITY = math.inf

_TAIL_EPS = 1e-26  # target size of the truncated outer weight
_EXTRAP_BETAS = (1e2, 1e3, 1e4)
_EXTRAP_RTOL = 1e-4  # stability bound on successive Richardson extrapolants


class NonConvergenceError(RuntimeError):
    """Quadrature did not stabilize under panel refinement / range doubling."""


class ExtrapolationError(RuntimeError):
    """Successive beta -> inf extrapolants disagree beyond tolerance."""


@dataclass(frozen=True)
class JQuery:
    """A request for J_{n,k}(beta); ``beta`` may be ``INFINITY``."""

    n: int
    k: int
    beta: float

    def __post_init__(self):
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        if not (isinstance(self.k, int) and 1 <= self.k <= self.n):
            raise ValueError(f"k must satisfy 1 <= k <= n, got k={self.k!r}, n={self.n!r}")
        if not (self.beta >= -1.0 or self.beta == INFINITY):
            raise ValueError(f"beta must be >= -1 or INFINITY, got {self.beta}")


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and discretization of the angle-sum integral.

    ``u_max=None`` lets the evaluator choose the truncation point from the
    integrand's decay exponent; an explicit value is validated against the
    requirement ``(cosh u_max)^(-M) < 1e-18``.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    u_max: Optional[float] = None
    panel_order: int = 20
    inner_grid: int = 24

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.u_max is not None and not self.u_max > 0:
            raise ValueError("u_max must be positive")
        if self.panel_order < 2 or self.inner_grid < 2:
            raise ValueError("panel_order and inner_grid must be >= 2")


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class JResult:
    value: float
    error_estimate: float
    im_residual: float


_cache: dict = {}
_cache_lock = threading.Lock()


def _log_cosh(u: np.ndarray) -> np.ndarray:
    # stable for large u where cosh overflows
    au = np.abs(u)
    return np.where(au > 30.0, au + np.log1p(np.exp(-2.0 * au)) - math.log(2.0),
                    np.log(np.cosh(np.minimum(au, 30.0))))


def _panel_nodes(u_max: float, n_panels: int, order: int):
    x, w = roots_legendre(order)
    edges = np.linspace(0.0, u_max, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    us = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    ws = (half[:, None] * w[None, :]).ravel()
    return us, ws


def _cumulative_inner(us: np.ndarray, dd: float, order: int) -> np.ndarray:
    """g at each node of the increasing sequence ``us``; g(u) = Int_0^u cosh^(dd-1)."""
    x, w = roots_legendre(order)
    lo = np.concatenate(([0.0], us[:-1]))
    half = 0.5 * (us - lo)
    mid = 0.5 * (us + lo)
    vv = mid[:, None] + half[:, None] * x[None, :]
    seg = half * (np.exp((dd - 1.0) * _log_cosh(vv)) @ w)
    return np.cumsum(seg)


def _eval_once(n: int, k: int, beta: float, u_max: float, n_panels: int, cfg: QuadratureConfig):
    """One quadrature pass; returns (value, im_residual, tail_fraction)."""
    j = n - k
    dd = 2.0 * beta + n
    M = (dd - 1.0) * n
    c = math.exp(gammaln((dd + 1.0) / 2.0) - gammaln(dd / 2.0)) / math.sqrt(math.pi)
    log_pref = gammaln((M + 3.0) / 2.0) - gammaln(M / 2.0 + 1.0) - 0.5 * math.log(math.pi)
    pref = math.exp(log_pref)

    us, ws = _panel_nodes(u_max, n_panels, cfg.panel_order)
    g = _cumulative_inner(us, dd, cfg.inner_grid)
    outer = np.exp(-(M + 2.0) * _log_cosh(us))
    z = (0.5 + 1j * c * g) ** j
    vals = outer * z
    contrib = ws * vals.real
    total = 2.0 * float(np.sum(contrib))

    # independently evaluated mirror side: g over negated nodes, summed with
    # the positive side to measure the imaginary residual of the full integral
    g_neg = -_cumulative_inner(us, dd, cfg.inner_grid)  # cosh is even, sign flips
    z_neg = (0.5 + 1j * c * g_neg) ** j
    im_resid = abs(pref * float(np.sum(ws * (vals.imag + (outer * z_neg).imag))))

    # fraction of mass carried by the last panel; a fat tail means u_max is short
    per_panel = np.abs(ws * vals).reshape(n_panels, cfg.panel_order).sum(axis=1)
    tail_frac = float(per_panel[-1] / max(per_panel.sum(), 1e-300))
    return math.comb(n, j) * pref * total, im_resid, tail_frac


def _auto_u_max(n: int, k: int, beta: float) -> float:
    dd = 2.0 * beta + n
    M = (dd - 1.0) * n
    # true decay exponent of the integrand (the (c*g)^j growth is included)
    q = (dd - 1.0) * k + 2.0 if dd >= 1.0 else M + 2.0
    arg = _TAIL_EPS ** (-1.0 / q)
    return math.acosh(arg) if arg > 1.0 else 1.0


def _base_panels(u_max: float) -> int:
    return int(min(64, max(12, 8 + 2 * math.ceil(u_max))))


def j_value_info(n: int, k: int, beta: float, config: QuadratureConfig | None = None) -> JResult:
    """J_{n,k}(beta) with an error estimate and the conjugate-symmetry residual.

    Raises :class:`NonConvergenceError` when doubling the truncation range and
    refining the panels moves the result by more than ``rel_tol``.
    """
    cfg = config or DEFAULT_CONFIG
    q = JQuery(n, k, beta)  # validates
    if beta == INFINITY:
        return j_value_infinity_info(n, k, cfg)

    key = (n, k, float(beta), cfg)
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None:
        return hit

    if n <= 2:
        # the integral degenerates at the beta = -1 boundary (outer exponent
        # reaches 0); the value is identically 1 for n <= 2, so short-circuit
        # there and use quadrature everywhere else
        if beta == -1.0:
            res = JResult(1.0, 0.0, 0.0)
            with _cache_lock:
                _cache[key] = res
            return res

    dd = 2.0 * beta + n
    M = (dd - 1.0) * n
    if M + 2.0 <= 0.0:
        raise ValueError(f"integral diverges for n={n}, beta={beta}")

    u_max = cfg.u_max if cfg.u_max is not None else _auto_u_max(n, k, beta)
    if cfg.u_max is not None and M > 0:
        if -M * float(_log_cosh(np.asarray([cfg.u_max]))[0]) > math.log(1e-18):
            raise ValueError(
                f"u_max={cfg.u_max} leaves outer weight above 1e-18 for n={n}, beta={beta}"
            )

    panels = _base_panels(u_max)
    prev, _, _ = _eval_once(n, k, beta, u_max, panels, cfg)
    u2 = 2.0 * u_max
    value = err = None
    cur_panels = 2 * panels
    last_tail = 1.0
    for _ in range(3):
        cur, im_resid, tail = _eval_once(n, k, beta, u2, cur_panels, cfg)
        diff = abs(cur - prev)
        if diff <= cfg.rel_tol * abs(cur) + cfg.abs_tol and tail < 1e-10:
            value, err, last_tail = cur, diff, tail
            break
        prev = cur
        cur_panels *= 2
    else:
        raise NonConvergenceError(
            f"J_{{{n},{k}}}({beta}) did not stabilize (last diff {abs(cur - prev):.3e})"
        )
    if im_resid > cfg.abs_tol:
        raise NonConvergenceError(
            f"J_{{{n},{k}}}({beta}): imaginary residual {im_resid:.3e} exceeds abs_tol"
        )
    res = JResult(value, err, im_resid)
    with _cache_lock:
        _cache[key] = res
    return res


def j_value(n: int, k: int, beta: float, config: QuadratureConfig | None = None) -> float:
    """J_{n,k}(beta); accepts ``beta = INFINITY`` (regular-simplex limit)."""
    return j_value_info(n, k, beta, config).value


def _neville_to_zero(xs, ys):
    """Polynomial extrapolants at x=0 from points (xs, ys), one per degree."""
    tab = [list(ys)]
    m = len(xs)
    for lev in range(1, m):
        row = []
        for i in range(m - lev):
            row.append((xs[i] * tab[lev - 1][i + 1] - xs[i + lev] * tab[lev - 1][i])
                       / (xs[i] - xs[i + lev]))
        tab.append(row)
    return [tab[lev][0] for lev in range(m)]


def j_value_infinity_info(n: int, k: int, config: QuadratureConfig | None = None) -> JResult:
    """Limit of J_{n,k}(beta) as beta -> inf, by Richardson extrapolation in 1/beta.

    Evaluates at beta in {1e2, 1e3, 1e4} and extrapolates; raises
    :class:`ExtrapolationError` if the last two extrapolants differ by more
    than a relative 1e-4 (the difference also serves as the error estimate).
    """
    cfg = config or DEFAULT_CONFIG
    JQuery(n, k, 0.0)  # validates n, k
    key = (n, k, INFINITY, cfg)
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None:
        return hit

    if n <= 2:
        res = JResult(1.0, 0.0, 0.0)
    else:
        xs = [1.0 / b for b in _EXTRAP_BETAS]
        ys = [j_value_info(n, k, b, cfg).value for b in _EXTRAP_BETAS]
        ex = _neville_to_zero(xs, ys)
        diff = abs(ex[-1] - ex[-2])
        if diff > _EXTRAP_RTOL * abs(ex[-1]):
            raise ExtrapolationError(
                f"J_{{{n},{k}}}(inf): extrapolants {ex[-2]:.12g} and {ex[-1]:.12g} disagree"
            )
        res = JResult(float(ex[-1]), diff, 0.0)
    with _cache_lock:
        _cache[key] = res
    return res


def j_value_infinity(n: int, k: int, config: QuadratureConfig | None = None) -> float:
    return j_value_infinity_info(n, k, config).value
