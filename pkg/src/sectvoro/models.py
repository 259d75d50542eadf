"""Tessellation model parameters, normalization constants and validation.

Four driving point-process models are supported, all producing stationary
Laguerre tessellations of R^d:

* ``Beta``: marked process on R^d x [0, inf) with height density
  ``gamma * c_{d+1,beta} * h^beta``.
* ``BetaPrime``: marked process on R^d x (-inf, 0) with height density
  ``gamma * c'_{d+1,beta} * (-h)^(-beta)``.
* ``Gaussian``: marked process on R^d x R with height density
  ``gamma * exp(lambda*h)`` (the tessellation law does not depend on gamma).
* ``PoissonVoronoi``: unmarked homogeneous process of intensity rho; this is
  the ``beta = -1`` convention of the Beta family with rho = r(d) * gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from scipy.special import gammaln

__all__ = [
    "Beta",
    "BetaPrime",
    "Gaussian",
    "PoissonVoronoi",
    "ModelSpec",
    "SectionSpec",
    "norm_constant_beta",
    "norm_constant_beta_prime",
    "r_of_d",
    "sectional_model",
    "model_to_dict",
    "model_from_dict",
]


@dataclass(frozen=True)
class Beta:
    """Beta model in dimension ``d`` with ``beta >= -1`` and rate ``gamma > 0``.

    ``beta == -1`` denotes the classical Poisson-Voronoi convention: all
    heights are zero and the spatial intensity is ``r_of_d(d) * gamma``.
    """

    d: int
    beta: float
    gamma: float

    def __post_init__(self):
        if not (isinstance(self.d, int) and self.d >= 1):
            raise ValueError(f"d must be an integer >= 1, got {self.d!r}")
        if not self.beta >= -1.0:
            raise ValueError(f"beta must be >= -1, got {self.beta}")
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")


@dataclass(frozen=True)
class BetaPrime:
    """Beta-prime model in dimension ``d``; requires ``beta > d/2 + 1``.

    The driving point process is well defined already for
    ``beta > (d+1)/2``, but the tessellation exists only in the smaller
    range, so the stricter bound is validated here.
    """

    d: int
    beta: float
    gamma: float

    def __post_init__(self):
        if not (isinstance(self.d, int) and self.d >= 1):
            raise ValueError(f"d must be an integer >= 1, got {self.d!r}")
        if not self.beta > self.d / 2.0 + 1.0:
            raise ValueError(
                f"beta must be > d/2 + 1 = {self.d / 2.0 + 1.0}, got {self.beta}"
            )
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")


@dataclass(frozen=True)
class Gaussian:
    """Gaussian model in dimension ``d`` with rate ``lam > 0``."""

    d: int
    lam: float

    def __post_init__(self):
        if not (isinstance(self.d, int) and self.d >= 1):
            raise ValueError(f"d must be an integer >= 1, got {self.d!r}")
        if not self.lam > 0.0:
            raise ValueError(f"lambda must be > 0, got {self.lam}")


@dataclass(frozen=True)
class PoissonVoronoi:
    """Homogeneous Poisson-Voronoi model of intensity ``rho`` in dimension ``d``."""

    d: int
    rho: float

    def __post_init__(self):
        if not (isinstance(self.d, int) and self.d >= 2):
            raise ValueError(f"d must be an integer >= 2, got {self.d!r}")
        if not self.rho > 0.0:
            raise ValueError(f"rho must be > 0, got {self.rho}")


ModelSpec = Union[Beta, BetaPrime, Gaussian, PoissonVoronoi]


@dataclass(frozen=True)
class SectionSpec:
    """An l-dimensional planar section of a d-dimensional Poisson-Voronoi
    tessellation of intensity ``rho``."""

    ambient_d: int
    section_l: int
    rho: float

    def __post_init__(self):
        if not (isinstance(self.ambient_d, int) and self.ambient_d >= 2):
            raise ValueError(f"ambient_d must be an integer >= 2, got {self.ambient_d!r}")
        if not (isinstance(self.section_l, int) and 1 <= self.section_l <= self.ambient_d - 1):
            raise ValueError(
                f"section_l must satisfy 1 <= l <= d-1, got l={self.section_l!r}, d={self.ambient_d!r}"
            )
        if not self.rho > 0.0:
            raise ValueError(f"rho must be > 0, got {self.rho}")


def norm_constant_beta(d: int, beta: float) -> float:
    """Normalization c_{d+1,beta} = Gamma((d+1)/2 + beta + 1) / (pi^((d+1)/2) Gamma(beta+1)).

    Only defined for ``beta > -1``; the ``beta = -1`` convention uses
    :func:`r_of_d` instead.
    """
    if not beta > -1.0:
        raise ValueError(f"norm_constant_beta requires beta > -1, got {beta}")
    if d < 0:
        raise ValueError(f"d must be >= 0, got {d}")
    return math.exp(
        gammaln((d + 1) / 2.0 + beta + 1.0)
        - ((d + 1) / 2.0) * math.log(math.pi)
        - gammaln(beta + 1.0)
    )


def norm_constant_beta_prime(d: int, beta: float) -> float:
    """Normalization c'_{d+1,beta} = Gamma(beta) / (pi^((d+1)/2) Gamma(beta - (d+1)/2))."""
    if not beta > (d + 1) / 2.0:
        raise ValueError(
            f"norm_constant_beta_prime requires beta > (d+1)/2 = {(d + 1) / 2.0}, got {beta}"
        )
    if d < 0:
        raise ValueError(f"d must be >= 0, got {d}")
    return math.exp(
        gammaln(beta)
        - ((d + 1) / 2.0) * math.log(math.pi)
        - gammaln(beta - (d + 1) / 2.0)
    )


def r_of_d(d: int) -> float:
    """Spatial intensity factor r(d) = Gamma((d+1)/2) * pi^(-(d+1)/2).

    ``Beta(d, -1, gamma)`` is the Poisson-Voronoi tessellation of intensity
    ``r_of_d(d) * gamma``.
    """
    if not (isinstance(d, int) and d >= 1):
        raise ValueError(f"d must be an integer >= 1, got {d!r}")
    return math.exp(gammaln((d + 1) / 2.0) - ((d + 1) / 2.0) * math.log(math.pi))


def sectional_model(spec: SectionSpec) -> Beta:
    """Beta model equal in law to the sectional Poisson-Voronoi tessellation.

    The section of a d-dimensional Poisson-Voronoi tessellation of intensity
    rho with an l-dimensional affine subspace has the law of the Beta model in
    dimension l with ``beta = (d-l)/2 - 1`` and
    ``gamma = pi^((d+1)/2) * rho / Gamma((d+1)/2) = rho / r_of_d(d)``.
    """
    d, l = spec.ambient_d, spec.section_l
    beta = (d - l) / 2.0 - 1.0
    gamma = spec.rho / r_of_d(d)
    return Beta(d=l, beta=beta, gamma=gamma)


_MODEL_TAGS = {
    Beta: "beta",
    BetaPrime: "beta_prime",
    Gaussian: "gaussian",
    PoissonVoronoi: "poisson_voronoi",
}


def model_to_dict(model: ModelSpec) -> dict:
    """JSON-ready dict with a ``model`` discriminator field (see docs/SCHEMAS.md)."""
    if isinstance(model, Beta):
        return {"model": "beta", "d": model.d, "beta": model.beta, "gamma": model.gamma}
    if isinstance(model, BetaPrime):
        return {"model": "beta_prime", "d": model.d, "beta": model.beta, "gamma": model.gamma}
    if isinstance(model, Gaussian):
        return {"model": "gaussian", "d": model.d, "lambda": model.lam}
    if isinstance(model, PoissonVoronoi):
        return {"model": "poisson_voronoi", "d": model.d, "rho": model.rho}
    raise TypeError(f"not a model: {model!r}")


def model_from_dict(obj: dict) -> ModelSpec:
    """Inverse of :func:`model_to_dict`; validates all parameters."""
    try:
        tag = obj["model"]
    except (TypeError, KeyError):
        raise ValueError("model object must be a dict with a 'model' field") from None
    if tag == "beta":
        return Beta(d=int(obj["d"]), beta=float(obj["beta"]), gamma=float(obj["gamma"]))
    if tag == "beta_prime":
        return BetaPrime(d=int(obj["d"]), beta=float(obj["beta"]), gamma=float(obj["gamma"]))
    if tag == "gaussian":
        return Gaussian(d=int(obj["d"]), lam=float(obj["lambda"]))
    if tag == "poisson_voronoi":
        return PoissonVoronoi(d=int(obj["d"]), rho=float(obj["rho"]))
    raise ValueError(f"unknown model tag {tag!r}")
