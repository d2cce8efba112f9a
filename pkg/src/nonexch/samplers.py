"""Random generation from the copula families used in the experiments.

Methods:

* gaussian: correlate two independent standard normals through the Cholesky
  factor of ``[[1, r], [r, 1]]`` and map both through the normal CDF.
* clayton: conditional inversion
  ``v = (u^-th (w^(-th/(th+1)) - 1) + 1)^(-1/th)``.
* fgm: conditional inversion; ``dC/du = w`` is a quadratic in ``v``.
* m_theta: circular shift ``v = u + theta mod 1``, whose CDF is exactly
  ``min{u, v, (u - 1 + theta)^+ + (v - theta)^+}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from . import copulas
from .empirical import Sample
from .errors import DomainError, ParameterError
from .rng import RngStream

FAMILIES = ("gaussian", "clayton", "fgm", "m_theta", "independence")


@dataclass(frozen=True)
class FamilySpec:
    family: str
    param: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        # constructing the copula validates the parameter
        self.copula()

    def copula(self) -> copulas.Copula:
        if self.family == "gaussian":
            return copulas.Gaussian(self.param)
        if self.family == "clayton":
            return copulas.Clayton(self.param)
        if self.family == "fgm":
            return copulas.FGM(self.param)
        if self.family == "m_theta":
            return copulas.MTheta(self.param)
        return copulas.PI

    @property
    def label(self) -> str:
        return self.family if self.family == "independence" else f"{self.family}:{self.param:g}"


def _uniform_pairs(spec: FamilySpec, n: int, rng: RngStream):
    fam, th = spec.family, spec.param
    if fam == "gaussian":
        z1 = rng.normal(n)
        z2 = rng.normal(n)
        y = th * z1 + np.sqrt(1.0 - th * th) * z2
        return ndtr(z1), ndtr(y)
    u = rng.uniform(n)
    if fam == "independence":
        return u, rng.uniform(n)
    if fam == "m_theta":
        v = u + th
        return u, np.where(v >= 1.0, v - 1.0, v)
    w = rng.uniform(n)
    if fam == "clayton":
        v = (u ** (-th) * (w ** (-th / (th + 1.0)) - 1.0) + 1.0) ** (-1.0 / th)
        return u, v
    # fgm: a v^2 - (1 + a) v + w = 0 with a = th (1 - 2u); the root in [0, 1]
    # written in cancellation-free form, which reduces to v = w when a = 0
    a = th * (1.0 - 2.0 * u)
    b = 1.0 + a
    v = 2.0 * w / (b + np.sqrt(np.maximum(b * b - 4.0 * a * w, 0.0)))
    return u, v


def sample(spec: FamilySpec, n: int, rng: RngStream) -> Sample:
    """``n`` i.i.d. pairs with uniform margins and copula ``spec``."""
    if int(n) != n or n < 2:
        raise DomainError(f"sample size must be an integer >= 2, got {n}")
    u, v = _uniform_pairs(spec, int(n), rng)
    return Sample(u, v)


def sample_m1_mixture(alpha: float, n: int, rng: RngStream) -> Sample:
    """Draws from ``alpha M_{1/3} + (1 - alpha) M_{1/3}^t``.

    Each pair comes from ``M_{1/3}`` and is swapped with probability
    ``1 - alpha``.
    """
    if not (0.0 <= alpha <= 1.0):
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    base = sample(FamilySpec("m_theta", 1.0 / 3.0), n, rng)
    keep = rng.uniform(int(n)) < alpha
    x = np.where(keep, base.x, base.y)
    y = np.where(keep, base.y, base.x)
    return Sample(x, y)
