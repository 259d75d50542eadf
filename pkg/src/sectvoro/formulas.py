"""Closed-form characteristics of sectional Poisson-Voronoi tessellations.

Everything here concerns the intersection of a d-dimensional Poisson-Voronoi
tessellation of intensity ``rho`` with an l-dimensional affine subspace:
face intensities ``gamma_j``, the expected typical-cell volume, expected
intrinsic volumes and f-vectors of typical k-faces, and their limits as
``d -> inf`` (which coincide with Gaussian-model quantities at
``lambda = kappa^2 * pi * e``).

All Gamma-function ratios are evaluated as differences of log-Gamma values,
so the formulas remain usable far beyond the overflow range of ``Gamma``
(dimensions in the tens of thousands).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import gammaln

from .jfunc import INFINITY, QuadratureConfig, j_value, j_value_infinity

__all__ = [
    "FaceIntensityQuery",
    "TypicalFaceQuery",
    "face_intensity",
    "expected_cell_volume",
    "miles_cell_volume",
    "expected_intrinsic_volume",
    "expected_intrinsic_volume_explicit",
    "expected_f_vector",
    "limit_face_intensity",
    "limit_cell_volume",
    "gaussian_cell_volume",
    "gaussian_limit_shift",
    "shifted_height_density",
    "table1_rows",
    "table2_rows",
]


@dataclass(frozen=True)
class FaceIntensityQuery:
    """Intensity of j-faces of the l-dimensional section; ``l = d`` is the
    unsectioned tessellation itself."""

    d: int
    l: int
    j: int
    rho: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.d, int) and self.d >= 2):
            raise ValueError(f"d must be an integer >= 2, got {self.d!r}")
        if not (isinstance(self.l, int) and 1 <= self.l <= self.d):
            raise ValueError(f"l must satisfy 1 <= l <= d, got {self.l!r}")
        if not (isinstance(self.j, int) and 0 <= self.j <= self.l):
            raise ValueError(f"j must satisfy 0 <= j <= l, got {self.j!r}")
        if not self.rho > 0:
            raise ValueError(f"rho must be > 0, got {self.rho}")


@dataclass(frozen=True)
class TypicalFaceQuery:
    """Functional of the typical k-face of the l-dimensional section."""

    d: int
    l: int
    k: int
    j: int
    rho: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.d, int) and self.d >= 2):
            raise ValueError(f"d must be an integer >= 2, got {self.d!r}")
        if not (isinstance(self.l, int) and 1 <= self.l <= self.d):
            raise ValueError(f"l must satisfy 1 <= l <= d, got {self.l!r}")
        if not (isinstance(self.k, int) and 0 <= self.k <= self.l):
            raise ValueError(f"k must satisfy 0 <= k <= l, got {self.k!r}")
        if not (isinstance(self.j, int) and 0 <= self.j <= self.k):
            raise ValueError(f"j must satisfy 0 <= j <= k, got {self.j!r}")
        if not self.rho > 0:
            raise ValueError(f"rho must be > 0, got {self.rho}")


def _log_gamma_factor(d: int, l: int) -> float:
    """log of the Gamma-ratio block shared by face_intensity and the volume."""
    return (
        gammaln((l + 1) * (d - 1) / 2.0 + 1.0)
        + gammaln(l + 1.0 - l / d)
        + (l + 1.0 - l / d) * gammaln(d / 2.0 + 1.0)
        - gammaln(((l + 1) * (d - 1) + 1) / 2.0)
        - gammaln((l + 2) / 2.0)
        - (l + 1.0) * gammaln((d + 1) / 2.0)
    )


def face_intensity(d: int, l: int, j: int, rho: float = 1.0,
                   config: QuadratureConfig | None = None) -> float:
    """Mean number of j-face centres per unit volume, ``gamma_j``.

    ``l = 0`` (with ``j = 0``) returns 1 by convention: a zero-dimensional
    section carries exactly one cell per unit (counting) volume.  This is the
    normalization that makes the intrinsic-volume ratio formula close.
    """
    if l == 0:
        if j != 0:
            raise ValueError("l = 0 admits only j = 0")
        return 1.0
    q = FaceIntensityQuery(d, l, j, rho)
    beta = (d - l - 1) / 2.0
    J = j_value(l + 1, l - j + 1, beta, config)
    lg = (
        math.log(2.0) + math.log(J) + (l / 2.0) * math.log(math.pi)
        - math.log(float(d)) - math.log(l + 1.0)
        + _log_gamma_factor(d, l)
    )
    return q.rho ** (l / d) * math.exp(lg)


def expected_cell_volume(d: int, l: int, rho: float = 1.0,
                         config: QuadratureConfig | None = None) -> float:
    """Expected volume of the typical cell of the l-dimensional section.

    Equals ``1 / face_intensity(d, l, l, rho)`` and scales as ``rho^(-l/d)``;
    for ``l = d`` it reduces to ``1/rho``.
    """
    q = FaceIntensityQuery(d, l, l, rho)
    beta = (d - l - 1) / 2.0
    J = j_value(l + 1, 1, beta, config)
    lg = (
        math.log(float(d)) + math.log(l + 1.0)
        - math.log(2.0) - math.log(J) - (l / 2.0) * math.log(math.pi)
        - _log_gamma_factor(d, l)
    )
    return q.rho ** (-l / d) * math.exp(lg)


def miles_cell_volume(d: int, l: int, rho: float = 1.0) -> float:
    """Expected sectional cell volume for l in {1, 2} in pure Gamma-function
    form (Miles' line and plane formulas); an independent oracle for
    :func:`expected_cell_volume`."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if l == 1:
        lg = (
            gammaln(d - 0.5) + 2.0 * gammaln((d + 1) / 2.0)
            - gammaln(float(d)) - gammaln(2.0 - 1.0 / d)
            - gammaln(d / 2.0) - (1.0 - 1.0 / d) * gammaln(d / 2.0 + 1.0)
        )
        return rho ** (-1.0 / d) * math.exp(lg)
    if l == 2:
        lg = (
            math.log(3.0 * d) + gammaln(1.5 * d - 1.0) + 3.0 * gammaln((d + 1) / 2.0)
            - math.log(math.pi) - gammaln((3.0 * d - 1.0) / 2.0)
            - gammaln(3.0 - 2.0 / d) - (3.0 - 2.0 / d) * gammaln(d / 2.0 + 1.0)
        )
        return rho ** (-2.0 / d) * math.exp(lg)
    raise ValueError(f"miles_cell_volume is defined for l in {{1, 2}}, got {l}")


def expected_intrinsic_volume(d: int, l: int, k: int, j: int, rho: float = 1.0,
                              config: QuadratureConfig | None = None) -> float:
    """Expected j-th intrinsic volume of the typical k-face (ratio form).

    V_0 of a nonempty polytope is 1, so ``j = 0`` returns exactly 1;
    ``j = k = l`` reduces to the expected cell volume.
    """
    q = TypicalFaceQuery(d, l, k, j, rho)
    if j == 0:
        return 1.0
    num = face_intensity(d, l - j, k - j, q.rho, config)
    den = face_intensity(d, l, k, q.rho, config)
    lg = (
        gammaln(l + 1.0) - gammaln(j + 1.0) - gammaln(l - j + 1.0)
        + gammaln(j / 2.0 + 1.0) + gammaln((l - j) / 2.0 + 1.0) - gammaln(l / 2.0 + 1.0)
    )
    return math.exp(lg) * num / den


def expected_intrinsic_volume_explicit(d: int, l: int, k: int, j: int, rho: float = 1.0,
                                       config: QuadratureConfig | None = None) -> float:
    """Fully expanded form of :func:`expected_intrinsic_volume`; the two must
    agree to roundoff and are tested against each other."""
    q = TypicalFaceQuery(d, l, k, j, rho)
    Jn = j_value(l - j + 1, l - k + 1, (d - l + j - 1) / 2.0, config)
    Jd = j_value(l + 1, l - k + 1, (d - l - 1) / 2.0, config)
    lg = (
        -(j / d) * (math.log(q.rho) - gammaln(d / 2.0 + 1.0))
        + gammaln(l + 2.0) - gammaln(j + 1.0) - gammaln(l - j + 2.0)
        + gammaln(j / 2.0 + 1.0) - (j / 2.0) * math.log(math.pi)
        + gammaln((l - j + 1) * (d - 1) / 2.0 + 1.0) + gammaln(l - j + 1.0 - (l - j) / d)
        - gammaln((l + 1) * (d - 1) / 2.0 + 1.0) - gammaln(l + 1.0 - l / d)
        + gammaln(((l + 1) * (d - 1) + 1) / 2.0) + j * gammaln((d + 1) / 2.0)
        - gammaln(((l - j + 1) * (d - 1) + 1) / 2.0) - j * gammaln(d / 2.0 + 1.0)
    )
    return math.exp(lg) * Jn / Jd


def expected_f_vector(d: int, l: int, k: int, j: int,
                      config: QuadratureConfig | None = None) -> float:
    """Expected number of j-faces of the typical k-face; independent of rho.

    ``(k - j + 1) * J_{l+1, l-j+1}(beta) / J_{l+1, l-k+1}(beta)`` with
    ``beta = (d - l - 1)/2``; for ``j = k`` this is exactly 1.
    """
    TypicalFaceQuery(d, l, k, j)
    beta = (d - l - 1) / 2.0
    return (k - j + 1) * j_value(l + 1, l - j + 1, beta, config) \
        / j_value(l + 1, l - k + 1, beta, config)


def limit_face_intensity(l: int, j: int, kappa: float = 1.0,
                         config: QuadratureConfig | None = None) -> float:
    """Limit of gamma_j as d -> inf with rho_d^(1/d) -> kappa."""
    if not (isinstance(l, int) and l >= 1):
        raise ValueError(f"l must be an integer >= 1, got {l!r}")
    if not (isinstance(j, int) and 0 <= j <= l):
        raise ValueError(f"j must satisfy 0 <= j <= l, got {j!r}")
    if not kappa > 0:
        raise ValueError(f"kappa must be > 0, got {kappa}")
    Jinf = j_value_infinity(l + 1, l - j + 1, config)
    lam = kappa * kappa * math.pi * math.e
    lg = ((l / 2.0) * math.log(lam) - 0.5 * math.log(l + 1.0)
          + math.log(2.0) + gammaln(float(l)) - gammaln(l / 2.0))
    return Jinf * math.exp(lg)


def limit_cell_volume(l: int, kappa: float = 1.0,
                      config: QuadratureConfig | None = None) -> float:
    """Limit of the expected sectional cell volume; the reciprocal of
    ``limit_face_intensity(l, l, kappa)``."""
    return 1.0 / limit_face_intensity(l, l, kappa, config)


def gaussian_cell_volume(l: int, lam: float,
                         config: QuadratureConfig | None = None) -> float:
    """Expected typical-cell volume of the l-dimensional Gaussian model.

    Satisfies ``gaussian_cell_volume(l, kappa^2*pi*e) == limit_cell_volume(l, kappa)``.
    """
    if not (isinstance(l, int) and l >= 1):
        raise ValueError(f"l must be an integer >= 1, got {l!r}")
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    Jinf = j_value_infinity(l + 1, 1, config)
    lg = (0.5 * math.log(l + 1.0) + gammaln(l / 2.0)
          - (l / 2.0) * math.log(lam) - math.log(2.0) - gammaln(float(l)))
    return math.exp(lg) / Jinf


def gaussian_limit_shift(d: int, l: int, rho: float = 1.0,
                         log_rho: float | None = None) -> float:
    """Vertical shift a_d that centres the sectional height intensity.

    Defined by ``a_d^((d-l-2)/2) = Gamma((d-l)/2) / (pi^((d-l)/2) * rho)``, the
    unique choice for which the shifted intensity takes the normalized form
    ``(1 + h/a_d)^((d-l-2)/2)``; then ``(d-l-2)/(2*a_d) -> kappa^2*pi*e``
    whenever ``rho^(1/d) -> kappa``.  ``log_rho`` sidesteps overflow of
    ``rho = kappa^d`` at large d.
    """
    m = d - l
    if m <= 2:
        raise ValueError(f"requires d - l > 2, got d={d}, l={l}")
    lr = math.log(rho) if log_rho is None else log_rho
    return math.exp((2.0 / (m - 2)) * (gammaln(m / 2.0) - (m / 2.0) * math.log(math.pi) - lr))


def shifted_height_density(d: int, l: int, rho: float, h) -> "float | object":
    """Normalized intensity ``f_d(h) = (1 + h/a_d)^((d-l-2)/2)`` of the shifted
    sectional process; converges to ``exp(kappa^2*pi*e*h)`` uniformly on
    compact height ranges.  Accepts scalar or numpy array ``h``."""
    import numpy as np

    a = gaussian_limit_shift(d, l, rho)
    m = d - l
    h = np.asarray(h, dtype=float)
    base = 1.0 + h / a
    out = np.where(base > 0.0, np.power(np.maximum(base, 1e-300), (m - 2) / 2.0), 0.0)
    return float(out) if out.ndim == 0 else out


def table1_rows(rho: float = 1.0, config: QuadratureConfig | None = None):
    """Expected sectional cell volumes for 2 <= d <= 6, 1 <= l <= d-1."""
    rows = []
    for d in range(2, 7):
        for l in range(1, d):
            rows.append({"d": d, "l": l, "rho": rho,
                         "expected_volume": expected_cell_volume(d, l, rho, config)})
    return rows


def table2_rows(config: QuadratureConfig | None = None):
    """Expected f-vectors of typical sectional cells for the nontrivial
    (d, l) pairs with d <= 6 and l >= 3."""
    rows = []
    for d, l in [(4, 3), (5, 3), (5, 4), (6, 3), (6, 4), (6, 5)]:
        for j in range(l):
            rows.append({"d": d, "l": l, "j": j,
                         "expected_f": expected_f_vector(d, l, l, j, config)})
    return rows
