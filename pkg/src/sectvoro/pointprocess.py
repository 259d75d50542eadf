"""Exact samplers for the marked Poisson processes driving the tessellations.

All samplers draw from the restriction of the target intensity to an
influence region sufficient for the diagram on the observation ball: points
at height h can only matter within spatial distance ``sqrt(T - h)`` of the
enlarged observation ball, so the region is

    K = {(v, h): h <= T_cap, |v| <= r_obs + r_margin + sqrt(T_cap - h)}

(for the beta-prime family the height cap is 0 and the radius grows like
``sqrt(-h)``).  Within K the height marginal is a finite mixture over the
binomial expansion of ``(R0 + sqrt(T-h))^l``, with Beta/Gamma/power-law
components, so every draw is exact; no discretization or truncation error
enters beyond the choice of (T_cap, r_margin) itself, which the doubling
check in :mod:`sectvoro.montecarlo` validates empirically.

Counter-based reproducibility: all randomness flows through Philox
generators derived from ``(seed, spawn_key)``, so replicates are independent
substreams that do not depend on execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.special import betaln, gammaln

from .models import (
    Beta,
    BetaPrime,
    Gaussian,
    ModelSpec,
    PoissonVoronoi,
    SectionSpec,
    norm_constant_beta,
    norm_constant_beta_prime,
    r_of_d,
    sectional_model,
)

__all__ = [
    "MarkedPoints",
    "SimulationWindow",
    "PeelingError",
    "make_rng",
    "sample_model",
    "sample_beta",
    "sample_beta_prime",
    "sample_gaussian",
    "sample_homogeneous",
    "sample_sectional_ground_truth",
    "sample_gaussian_ambient_sectioned",
    "sample_region_extension",
    "in_region",
    "region_mass",
    "default_window",
]


class PeelingError(RuntimeError):
    """Beta-prime shell peeling failed to terminate within the shell budget."""


@dataclass(frozen=True)
class MarkedPoints:
    """Marked points: spatial coordinates (n, dim) and heights (n,)."""

    position: np.ndarray
    height: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.atleast_2d(np.asarray(self.position, dtype=float)))
        object.__setattr__(self, "height", np.asarray(self.height, dtype=float))

    def __len__(self) -> int:
        return self.height.shape[0]

    @property
    def dim(self) -> int:
        return self.position.shape[1]

    @staticmethod
    def concat(parts):
        parts = [p for p in parts if len(p)]
        if not parts:
            raise ValueError("cannot concatenate zero nonempty parts")
        return MarkedPoints(np.vstack([p.position for p in parts]),
                            np.concatenate([p.height for p in parts]))


@dataclass(frozen=True)
class SimulationWindow:
    """Observation/sampling geometry for one simulation.

    The diagram is required to be exact on the ball of radius ``r_obs``;
    ``r_margin`` separates harvested cells from the sampling boundary,
    ``t_cap`` caps point heights, ``delta_floor`` is the initial height
    cutoff of the beta-prime peeling, and ``seed`` drives all randomness.
    """

    r_obs: float
    r_margin: float
    t_cap: float
    delta_floor: float = 0.0625
    seed: int = 0
    shell_budget: int = 64

    def __post_init__(self):
        if not (self.r_obs > 0 and self.r_margin > 0):
            raise ValueError("r_obs and r_margin must be positive")
        if not self.delta_floor > 0:
            raise ValueError("delta_floor must be positive")
        if not (0 <= self.seed < 2 ** 64):
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def r0(self) -> float:
        return self.r_obs + self.r_margin

    def clip_box(self, dim: int):
        w = self.r0 + math.sqrt(max(self.t_cap, 0.0))
        return tuple((-w, w) for _ in range(dim))

    def enlarged(self, factor: float = 2.0) -> "SimulationWindow":
        return replace(self, t_cap=self.t_cap * factor, r_margin=self.r_margin * factor)


def make_rng(seed: int, stream: tuple = ()) -> np.random.Generator:
    """Philox generator for (seed, substream); substreams are independent."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=stream)))


def _unit_ball_volume(dim: int) -> float:
    return math.exp((dim / 2.0) * math.log(math.pi) - gammaln(dim / 2.0 + 1.0))


def _uniform_ball(rng, n: int, dim: int, radius) -> np.ndarray:
    x = rng.standard_normal((n, dim))
    norms = np.linalg.norm(x, axis=1)
    norms[norms == 0.0] = 1.0
    r = np.asarray(radius) * rng.uniform(size=n) ** (1.0 / dim)
    return x * (r / norms)[:, None]


def _beta_mixture_weights(model: Beta, r0: float, t: float):
    """Log-weights of the height mixture over (R0 + sqrt(T-h))^l terms."""
    l, b = model.d, model.beta
    gc = model.gamma * norm_constant_beta(l, b)
    w = np.asarray([
        math.log(math.comb(l, m)) + (l - m) * math.log(r0)
        + (b + 1.0 + m / 2.0) * math.log(t) + betaln(b + 1.0, m / 2.0 + 1.0)
        for m in range(l + 1)
    ])
    return gc, w


def sample_beta(model: Beta, window: SimulationWindow,
                rng: Optional[np.random.Generator] = None) -> MarkedPoints:
    """Beta-model points on the influence region; ``beta = -1`` routes to the
    homogeneous sampler per the Poisson-Voronoi convention."""
    if model.beta == -1.0:
        rng = rng if rng is not None else make_rng(window.seed)
        return _sample_flat(model.d, r_of_d(model.d) * model.gamma, window, rng)
    rng = rng if rng is not None else make_rng(window.seed)
    l = model.d
    t = window.t_cap
    if t <= 0:
        raise ValueError("beta sampling requires t_cap > 0")
    gc, logw = _beta_mixture_weights(model, window.r0, t)
    kappa = _unit_ball_volume(l)
    mass = gc * kappa * float(np.exp(logw).sum())
    n = int(rng.poisson(mass))
    probs = np.exp(logw - logw.max())
    probs /= probs.sum()
    comps = rng.choice(l + 1, size=n, p=probs)
    h = t * rng.beta(model.beta + 1.0, comps / 2.0 + 1.0) if n else np.empty(0)
    radius = window.r0 + np.sqrt(np.maximum(t - h, 0.0))
    v = _uniform_ball(rng, n, l, radius)
    return MarkedPoints(v.reshape(n, l), h)


def _sample_flat(dim: int, rho: float, window: SimulationWindow, rng) -> MarkedPoints:
    radius = window.r0 + math.sqrt(max(window.t_cap, 0.0))
    mass = rho * _unit_ball_volume(dim) * radius ** dim
    n = int(rng.poisson(mass))
    v = _uniform_ball(rng, n, dim, radius)
    return MarkedPoints(v.reshape(n, dim), np.zeros(n))


def sample_homogeneous(model: PoissonVoronoi, window: SimulationWindow,
                       rng: Optional[np.random.Generator] = None) -> MarkedPoints:
    """Homogeneous Poisson points at height zero."""
    rng = rng if rng is not None else make_rng(window.seed)
    return _sample_flat(model.d, model.rho, window, rng)


def sample_gaussian(model: Gaussian, window: SimulationWindow,
                    rng: Optional[np.random.Generator] = None,
                    gamma: float = 1.0) -> MarkedPoints:
    """Gaussian-model points; the height tail to -inf is sampled exactly as a
    Gamma mixture, so there is no low-height truncation error at all."""
    rng = rng if rng is not None else make_rng(window.seed)
    l, lam = model.d, model.lam
    t = window.t_cap
    r0 = window.r0
    logw = np.array([
        math.log(math.comb(l, m)) + (l - m) * math.log(r0)
        + gammaln(m / 2.0 + 1.0) - (m / 2.0 + 1.0) * math.log(lam)
        for m in range(l + 1)
    ])
    kappa = _unit_ball_volume(l)
    mass = gamma * kappa * math.exp(lam * t) * float(np.exp(logw).sum())
    n = int(rng.poisson(mass))
    probs = np.exp(logw - logw.max())
    probs /= probs.sum()
    comps = rng.choice(l + 1, size=n, p=probs)
    depth = rng.gamma(comps / 2.0 + 1.0, 1.0 / lam) if n else np.empty(0)
    h = t - depth
    radius = r0 + np.sqrt(depth)
    v = _uniform_ball(rng, n, l, radius)
    return MarkedPoints(v.reshape(n, l), h)


def _beta_prime_shell_mass(model: BetaPrime, r0: float, g_lo: float, g_hi: float):
    """Mass and mixture data for heights -g with g in [g_lo, g_hi]."""
    l, b = model.d, model.beta
    gc = model.gamma * norm_constant_beta_prime(l, b)
    kappa = _unit_ball_volume(l)
    weights = []
    exps = []
    for m in range(l + 1):
        e = m / 2.0 - b  # integrand g^e
        if abs(e + 1.0) < 1e-12:
            integral = math.log(g_hi / g_lo)
        else:
            integral = (g_hi ** (e + 1.0) - g_lo ** (e + 1.0)) / (e + 1.0)
        weights.append(math.comb(l, m) * r0 ** (l - m) * integral)
        exps.append(e)
    weights = np.asarray(weights)
    return gc * kappa * float(weights.sum()), weights, exps


def _sample_power_trunc(rng, n, e, lo, hi):
    """n draws with density proportional to g^e on [lo, hi]."""
    u = rng.uniform(size=n)
    if abs(e + 1.0) < 1e-12:
        return lo * (hi / lo) ** u
    p = e + 1.0
    return (lo ** p + u * (hi ** p - lo ** p)) ** (1.0 / p)


def _sample_beta_prime_shell(model: BetaPrime, window: SimulationWindow,
                             g_lo: float, g_hi: float, rng) -> MarkedPoints:
    l = model.d
    mass, weights, exps = _beta_prime_shell_mass(model, window.r0, g_lo, g_hi)
    n = int(rng.poisson(mass))
    if n == 0:
        return MarkedPoints(np.empty((0, l)), np.empty(0))
    probs = weights / weights.sum()
    comps = rng.choice(l + 1, size=n, p=probs)
    g = np.empty(n)
    for m in range(l + 1):
        sel = comps == m
        if np.any(sel):
            g[sel] = _sample_power_trunc(rng, int(sel.sum()), exps[m], g_lo, g_hi)
    radius = window.r0 + np.sqrt(g)
    v = _uniform_ball(rng, n, l, radius)
    return MarkedPoints(v.reshape(n, l), -g)


def sample_beta_prime(model: BetaPrime, window: SimulationWindow,
                      rng: Optional[np.random.Generator] = None) -> MarkedPoints:
    """Beta-prime points by dyadic peeling towards the accumulation at h = 0-.

    Heights in ``[-t_cap, -delta)`` are sampled outright; the cutoff delta is
    then halved until two consecutive shells contribute no point whose
    Laguerre cell meets the observation cylinder.  The stop rule is a
    heuristic (no finite-sample bound exists for it); the shell budget guards
    against runaway growth of the near-zero shells.
    """
    from .oracle import brute_force_cell

    rng = rng if rng is not None else make_rng(window.seed)
    l = model.d
    t = window.t_cap
    if t <= window.delta_floor:
        raise ValueError("t_cap must exceed delta_floor")
    delta = window.delta_floor
    pts = _sample_beta_prime_shell(model, window, delta, t, rng)
    box = tuple((-window.r0, window.r0) for _ in range(l))
    quiet = 0
    shells = 0
    while quiet < 2:
        if shells >= window.shell_budget:
            raise PeelingError(
                f"peeling did not terminate after {window.shell_budget} shells")
        new_delta = delta / 2.0
        shell = _sample_beta_prime_shell(model, window, new_delta, delta, rng)
        if len(shell) == 0:
            quiet += 1
        else:
            merged = MarkedPoints.concat([pts, shell])
            extreme = False
            base = len(pts)
            for idx in range(base, base + len(shell)):
                if brute_force_cell(idx, merged, box) is not None:
                    extreme = True
                    break
            pts = merged
            quiet = 0 if extreme else quiet + 1
        delta = new_delta
        shells += 1
    return pts


def sample_sectional_ground_truth(spec: SectionSpec, window: SimulationWindow,
                                  rng: Optional[np.random.Generator] = None) -> MarkedPoints:
    """Homogeneous d-dimensional points mapped onto the section.

    Points are drawn uniformly on the cylinder (head ball) x (tail ball) --
    a superset of the influence region -- and mapped by
    ``x -> (x_1..x_l, |x_(l+1..d)|^2)``.  Restricted to the influence region,
    the output is equal in law to ``sample_beta(sectional_model(spec))``; the
    mechanics are deliberately those of the ambient homogeneous process so the
    two routes are independent implementations of the same law.
    """
    rng = rng if rng is not None else make_rng(window.seed)
    d, l, rho = spec.ambient_d, spec.section_l, spec.rho
    m = d - l
    t = window.t_cap
    if t <= 0:
        raise ValueError("sectional sampling requires t_cap > 0")
    r_head = window.r0 + math.sqrt(t)
    r_tail = math.sqrt(t)
    mass = rho * _unit_ball_volume(l) * r_head ** l * _unit_ball_volume(m) * r_tail ** m
    n = int(rng.poisson(mass))
    head = _uniform_ball(rng, n, l, r_head)
    tail = _uniform_ball(rng, n, m, r_tail)
    h = np.einsum("ij,ij->i", tail, tail)
    return MarkedPoints(head.reshape(n, l), h)


def sample_gaussian_ambient_sectioned(l: int, l_ambient: int, lam: float,
                                      window: SimulationWindow,
                                      rng: Optional[np.random.Generator] = None,
                                      gamma: float = 1.0) -> MarkedPoints:
    """Ambient Gaussian-model points mapped onto an l-dimensional section.

    Superset sampling as in :func:`sample_sectional_ground_truth`: heights
    follow the ambient intensity ``gamma * exp(lam*h)`` over a cylinder that
    contains the mapped influence region, and points are pushed through the
    section map.  Restricted to the region, the law equals the l-dimensional
    Gaussian model with the same lambda.
    """
    if not 1 <= l < l_ambient:
        raise ValueError("need 1 <= l < l_ambient")
    rng = rng if rng is not None else make_rng(window.seed)
    m = l_ambient - l
    t = window.t_cap
    r0 = window.r0
    kl = _unit_ball_volume(l)
    km = _unit_ball_volume(m)
    logw = np.array([
        math.log(math.comb(l, j)) + (l - j) * math.log(r0)
        + gammaln((m + j) / 2.0 + 1.0) - ((m + j) / 2.0 + 1.0) * math.log(lam)
        for j in range(l + 1)
    ])
    mass = gamma * kl * km * math.exp(lam * t) * float(np.exp(logw).sum())
    n = int(rng.poisson(mass))
    probs = np.exp(logw - logw.max())
    probs /= probs.sum()
    comps = rng.choice(l + 1, size=n, p=probs)
    depth = rng.gamma((m + comps) / 2.0 + 1.0, 1.0 / lam) if n else np.empty(0)
    h_ambient = t - depth
    tail = _uniform_ball(rng, n, m, np.sqrt(depth))
    head = _uniform_ball(rng, n, l, r0 + np.sqrt(depth))
    h = h_ambient + np.einsum("ij,ij->i", tail, tail)
    return MarkedPoints(head.reshape(n, l), h)


def sample_model(model: ModelSpec, window: SimulationWindow,
                 rng: Optional[np.random.Generator] = None) -> MarkedPoints:
    if isinstance(model, Beta):
        return sample_beta(model, window, rng)
    if isinstance(model, BetaPrime):
        return sample_beta_prime(model, window, rng)
    if isinstance(model, Gaussian):
        return sample_gaussian(model, window, rng)
    if isinstance(model, PoissonVoronoi):
        return sample_homogeneous(model, window, rng)
    raise TypeError(f"not a model: {model!r}")


def in_region(model: ModelSpec, window: SimulationWindow,
              position: np.ndarray, height: np.ndarray) -> np.ndarray:
    """Membership mask of points in the model's influence region for ``window``."""
    position = np.atleast_2d(position)
    height = np.asarray(height)
    r = np.linalg.norm(position, axis=1)
    t = window.t_cap
    if isinstance(model, BetaPrime):
        g = -height
        return (g >= window.delta_floor) & (g <= t) & \
            (r <= window.r0 + np.sqrt(np.maximum(g, 0.0)))
    radius = window.r0 + np.sqrt(np.maximum(t - height, 0.0))
    ok = (height <= t) & (r <= radius)
    if isinstance(model, Beta) and model.beta > -1.0:
        ok &= height >= 0.0
    if isinstance(model, (PoissonVoronoi,)) or (isinstance(model, Beta) and model.beta == -1.0):
        ok &= height == 0.0
    return ok


def sample_region_extension(model: ModelSpec, small: SimulationWindow,
                            big: SimulationWindow, rng: np.random.Generator) -> MarkedPoints:
    """Points of the model's process on (big region) minus (small region).

    Samples the big region and thins away points inside the small one; the
    union with an independent small-region sample is a sample of the big
    region, which is exactly the coupling the doubling check needs.
    """
    pts = sample_model(model, big, rng)
    keep = ~in_region(model, small, pts.position, pts.height)
    return MarkedPoints(pts.position[keep], pts.height[keep])


def region_mass(model: ModelSpec, window: SimulationWindow) -> float:
    """Expected number of sampled points (beta-prime: above delta_floor only)."""
    if isinstance(model, Beta) and model.beta > -1.0:
        gc, logw = _beta_mixture_weights(model, window.r0, window.t_cap)
        return gc * _unit_ball_volume(model.d) * float(np.exp(logw).sum())
    if isinstance(model, (PoissonVoronoi,)) or isinstance(model, Beta):
        rho = model.rho if isinstance(model, PoissonVoronoi) else r_of_d(model.d) * model.gamma
        radius = window.r0 + math.sqrt(max(window.t_cap, 0.0))
        return rho * _unit_ball_volume(model.d) * radius ** model.d
    if isinstance(model, Gaussian):
        l, lam = model.d, model.lam
        logw = np.array([
            math.log(math.comb(l, m)) + (l - m) * math.log(window.r0)
            + gammaln(m / 2.0 + 1.0) - (m / 2.0 + 1.0) * math.log(lam)
            for m in range(l + 1)
        ])
        return _unit_ball_volume(l) * math.exp(lam * window.t_cap) * float(np.exp(logw).sum())
    if isinstance(model, BetaPrime):
        mass, _, _ = _beta_prime_shell_mass(model, window.r0,
                                            window.delta_floor, window.t_cap)
        return mass
    raise TypeError(f"not a model: {model!r}")


def _power_count_scale(model: ModelSpec):
    """(A, p) with expected points of power <= t at a site equal to A * t^p,
    for the power-law-height families; used for window heuristics."""
    if isinstance(model, Beta) and model.beta > -1.0:
        l, b = model.d, model.beta
        gc = model.gamma * norm_constant_beta(l, b)
        a = gc * _unit_ball_volume(l) * math.exp(betaln(b + 1.0, l / 2.0 + 1.0))
        return a, b + 1.0 + l / 2.0
    if isinstance(model, PoissonVoronoi) or isinstance(model, Beta):
        rho = model.rho if isinstance(model, PoissonVoronoi) else r_of_d(model.d) * model.gamma
        return rho * _unit_ball_volume(model.d), model.d / 2.0
    raise TypeError(f"no power-count scale for {model!r}")


def default_window(model: ModelSpec, r_obs: float, seed: int = 0,
                   coverage: float = 35.0) -> SimulationWindow:
    """Heuristic (t_cap, r_margin) defaults sized from the envelope scale.

    ``coverage`` is the expected number of points whose paraboloid dips below
    the height cap at a fixed site; exp(-coverage) bounds the chance that the
    cap cuts into the true envelope there.  The margin is a few typical cell
    diameters.  These are starting values: the doubling check escalates them
    when they prove too small.
    """
    if isinstance(model, Gaussian):
        l, lam = model.d, model.lam
        a1 = _unit_ball_volume(l) * math.exp(gammaln(l / 2.0 + 1.0)) / lam ** (l / 2.0 + 1.0)
        t_cap = math.log(coverage / a1) / lam
        scale = math.sqrt(3.0 / lam)
        return SimulationWindow(r_obs=r_obs, r_margin=max(4.0 * scale, 1.0),
                                t_cap=t_cap, seed=seed)
    if isinstance(model, BetaPrime):
        l, b = model.d, model.beta
        gc = model.gamma * norm_constant_beta_prime(l, b)
        a1 = gc * _unit_ball_volume(l) * math.exp(betaln(l / 2.0 + 1.0, b - l / 2.0 - 1.0))
        p = l / 2.0 + 1.0 - b  # exponent (< 0) of the depth-count law A*t^p
        t1 = (1.0 / a1) ** (1.0 / p)  # envelope depth scale
        # shallow cutoff: points above it are almost surely buried
        delta = (coverage / a1) ** (1.0 / p)
        # deep cutoff: expected number of omitted deep points below 0.01
        r0 = r_obs + max(4.0 * math.sqrt(t1), 1.0)
        t_cap = _beta_prime_deep_cutoff(model, r0, 0.01)
        return SimulationWindow(r_obs=r_obs, r_margin=max(4.0 * math.sqrt(t1), 1.0),
                                t_cap=max(t_cap, 4.0 * t1),
                                delta_floor=min(delta, t1 / 2.0), seed=seed)
    a1, p = _power_count_scale(model)
    t1 = (1.0 / a1) ** (1.0 / p)
    t_cap = (coverage / a1) ** (1.0 / p)
    return SimulationWindow(r_obs=r_obs, r_margin=max(4.0 * math.sqrt(t1), 1.0),
                            t_cap=t_cap, seed=seed)


def _beta_prime_deep_cutoff(model: BetaPrime, r0: float, residual: float) -> float:
    """Depth T with expected count of omitted points (g > T, in-region) below
    ``residual``; closed form of the tail integral, solved by bisection."""
    l, b = model.d, model.beta
    gc = model.gamma * norm_constant_beta_prime(l, b)
    kappa = _unit_ball_volume(l)

    def tail(t):
        s = 0.0
        for m in range(l + 1):
            s += math.comb(l, m) * r0 ** (l - m) * t ** (m / 2.0 - b + 1.0) / (b - 1.0 - m / 2.0)
        return gc * kappa * s

    lo, hi = 1e-6, 1.0
    while tail(hi) > residual:
        hi *= 2.0
        if hi > 1e12:
            raise ValueError("deep cutoff search diverged")
    while hi / lo > 1.0001:
        mid = math.sqrt(lo * hi)
        if tail(mid) > residual:
            lo = mid
        else:
            hi = mid
    return hi


def sectional_window(spec: SectionSpec, r_obs: float, seed: int = 0,
                     coverage: float = 35.0) -> SimulationWindow:
    return default_window(sectional_model(spec), r_obs, seed=seed, coverage=coverage)
