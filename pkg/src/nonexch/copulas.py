"""Evaluable bivariate copulas and the algebra built on them.

A copula is represented as an immutable expression tree. Leaves are the
parametric families (independence, Fréchet-Hoeffding bounds, Gaussian,
Clayton, FGM, the extremal shift family ``MTheta`` and the antisymmetric
perturbation of independence); internal nodes are transposition, survival
and finite convex combinations.

Every node is callable on broadcastable numpy arrays and performs no domain
checking; :func:`evaluate` and :func:`volume` are the checked entry points.

Typical usage::

    C = mix_transpose(MTheta(1 / 3), 0.75)
    evaluate(C, 0.9, 0.5)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import (
    AdmissibilityError,
    DomainError,
    ParameterError,
    SymmetryError,
    WeightError,
)

__all__ = [
    "Copula",
    "Independence",
    "UpperBound",
    "LowerBound",
    "Gaussian",
    "Clayton",
    "FGM",
    "MTheta",
    "PerturbedProduct",
    "Transpose",
    "Survival",
    "Mixture",
    "Rect",
    "PI",
    "M",
    "W",
    "C_MAX",
    "evaluate",
    "volume",
    "transpose",
    "survival",
    "mix_transpose",
    "mix_symmetric",
    "convex3",
    "perturbed_product",
    "antisymmetric_part",
    "max_grid_asymmetry",
]

# Largest |c| for which uv + c*uv(1-u)(1-v)(u-v) has a nonnegative density.
# The mixed partial of the polynomial has sup-norm 1, attained at the corners
# (1, 0) and (0, 1); see scripts/scan_cmax.py for the grid scan.
C_MAX = 1.0

GAUSSIAN_TOL = 1e-7
_THETA_MAX = 1.0 / 3.0
_PARAM_SLACK = 1e-12
_SYMMETRY_TOL = 1e-9
_WEIGHT_TOL = 1e-12


class Copula:
    """Base class of all copula expressions."""

    def __call__(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return self._cdf(u, v)

    def _cdf(self, u, v):  # pragma: no cover - abstract
        raise NotImplementedError

    @property
    def t(self) -> "Copula":
        """The transpose copula."""
        return transpose(self)


@dataclass(frozen=True)
class Independence(Copula):
    def _cdf(self, u, v):
        return u * v

    def __str__(self):
        return "pi"


@dataclass(frozen=True)
class UpperBound(Copula):
    """Comonotone copula ``min(u, v)``."""

    def _cdf(self, u, v):
        return np.minimum(u, v)

    def __str__(self):
        return "M"


@dataclass(frozen=True)
class LowerBound(Copula):
    """Countermonotone copula ``max(u + v - 1, 0)``."""

    def _cdf(self, u, v):
        return np.maximum(u + v - 1.0, 0.0)

    def __str__(self):
        return "W"


@dataclass(frozen=True)
class Gaussian(Copula):
    """Gaussian copula with correlation ``r``.

    The CDF is computed by composite Gauss-Legendre quadrature of the
    conditional form, substituting t = Phi(s) in
    ``int_0^u Phi((Phi^-1(v) - r Phi^-1(t)) / sqrt(1 - r^2)) dt``. The panel
    count is doubled until successive estimates agree to ``tol``.
    Phi and its inverse are ``scipy.special.ndtr``/``ndtri`` (absolute error
    well below 1e-14 on [-8, 8]).
    """

    r: float
    tol: float = GAUSSIAN_TOL

    def __post_init__(self):
        if not (-1.0 < self.r < 1.0) or not np.isfinite(self.r):
            raise ParameterError(f"gaussian correlation must lie in (-1, 1), got {self.r}")

    def _cdf(self, u, v):
        u, v = np.broadcast_arrays(u, v)
        out = np.empty(u.shape, dtype=float)
        # canonical argument order makes the value exactly symmetric
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        edge = (lo <= 0.0) | (hi >= 1.0)
        out[edge] = np.where(lo[edge] <= 0.0, 0.0, lo[edge])
        inner = ~edge
        if inner.any():
            if self.r == 0.0:
                out[inner] = lo[inner] * hi[inner]
            else:
                out[inner] = _bvn_lower(ndtri(lo[inner]), ndtri(hi[inner]), self.r, self.tol)
        return out

    def __str__(self):
        return f"gaussian:{self.r:g}"


_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
_S_LOW = -10.0


def _bvn_lower(a, b, r, tol, chunk=4096):
    """P(Z1 <= a, Z2 <= b) for standard normals with correlation r."""
    out = np.empty(a.shape, dtype=float)
    scale = np.sqrt(1.0 - r * r)
    for start in range(0, a.size, chunk):
        aa = np.maximum(a[start:start + chunk], _S_LOW)
        bb = b[start:start + chunk]
        panels = 4
        prev = _gl_panels(aa, bb, r, scale, panels)
        while True:
            panels *= 2
            cur = _gl_panels(aa, bb, r, scale, panels)
            if np.max(np.abs(cur - prev)) <= tol * 1e-3 or panels >= 2048:
                break
            prev = cur
        out[start:start + chunk] = cur
    return out


def _gl_panels(a, b, r, scale, panels):
    length = (a - _S_LOW) / panels
    # offsets of the quadrature nodes inside [_S_LOW, a]
    frac = (np.arange(panels)[:, None] + 0.5 * (_GL_X[None, :] + 1.0)).ravel()
    s = _S_LOW + length[:, None] * frac[None, :]
    f = np.exp(-0.5 * s * s) / np.sqrt(2.0 * np.pi) * ndtr((b[:, None] - r * s) / scale)
    w = np.tile(_GL_W, panels)
    return 0.5 * length * (f @ w)


@dataclass(frozen=True)
class Clayton(Copula):
    theta: float

    def __post_init__(self):
        if not (self.theta > 0.0) or not np.isfinite(self.theta):
            raise ParameterError(f"clayton theta must be > 0, got {self.theta}")

    def _cdf(self, u, v):
        th = self.theta
        with np.errstate(divide="ignore", over="ignore"):
            s = u ** (-th) + v ** (-th) - 1.0
            return s ** (-1.0 / th)

    def __str__(self):
        return f"clayton:{self.theta:g}"


@dataclass(frozen=True)
class FGM(Copula):
    """Farlie-Gumbel-Morgenstern copula."""

    theta: float

    def __post_init__(self):
        if not (-1.0 <= self.theta <= 1.0):
            raise ParameterError(f"fgm theta must lie in [-1, 1], got {self.theta}")

    def _cdf(self, u, v):
        return u * v * (1.0 + self.theta * ((1.0 - u) * (1.0 - v)))

    def __str__(self):
        return f"fgm:{self.theta:g}"


@dataclass(frozen=True)
class MTheta(Copula):
    """Extremal copula ``min{u, v, (u - 1 + theta)^+ + (v - theta)^+}``.

    It is the law of ``(U, U + theta mod 1)``; at ``theta = 1/3`` it attains
    the maximal sup-distance 1/3 between a copula and its transpose.
    """

    theta: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= _THETA_MAX + _PARAM_SLACK):
            raise ParameterError(f"m_theta requires theta in [0, 1/3], got {self.theta}")

    def _cdf(self, u, v):
        th = self.theta
        shifted = np.maximum(u - 1.0 + th, 0.0) + np.maximum(v - th, 0.0)
        return np.minimum(np.minimum(u, v), shifted)

    def __str__(self):
        return f"m_theta:{self.theta:g}"


def antisymmetric_part(u, v):
    """The fixed perturbation polynomial ``uv(1-u)(1-v)(u-v)``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return (u * v) * ((1.0 - u) * (1.0 - v)) * (u - v)


@dataclass(frozen=True)
class PerturbedProduct(Copula):
    """Antisymmetric perturbation ``uv + c * uv(1-u)(1-v)(u-v)`` of independence."""

    c: float

    def __post_init__(self):
        if not np.isfinite(self.c) or abs(self.c) > C_MAX:
            raise AdmissibilityError(
                f"perturbation coefficient must satisfy |c| <= {C_MAX}, got {self.c}"
            )

    def _cdf(self, u, v):
        return u * v + self.c * antisymmetric_part(u, v)

    def __str__(self):
        return f"perturbed:{self.c:g}"


@dataclass(frozen=True)
class Transpose(Copula):
    inner: Copula

    def _cdf(self, u, v):
        return self.inner._cdf(v, u)

    def __str__(self):
        return f"t:{self.inner}"


@dataclass(frozen=True)
class Survival(Copula):
    inner: Copula

    def _cdf(self, u, v):
        return u + v - 1.0 + self.inner._cdf(1.0 - u, 1.0 - v)

    def __str__(self):
        return f"surv:{self.inner}"


@dataclass(frozen=True)
class Mixture(Copula):
    """Convex combination ``sum_i weights[i] * parts[i]``."""

    weights: Tuple[float, ...]
    parts: Tuple[Copula, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.parts) or not self.parts:
            raise WeightError("weights and parts must be non-empty and of equal length")
        if any(w < 0.0 for w in self.weights):
            raise WeightError(f"negative mixture weight in {self.weights}")
        if abs(sum(self.weights) - 1.0) > _WEIGHT_TOL:
            raise WeightError(f"mixture weights sum to {sum(self.weights)}, not 1")

    def _cdf(self, u, v):
        total = self.weights[0] * self.parts[0]._cdf(u, v)
        for w, part in zip(self.weights[1:], self.parts[1:]):
            total = total + w * part._cdf(u, v)
        return total

    def __str__(self):
        inner = ", ".join(f"{w:g}*{p}" for w, p in zip(self.weights, self.parts))
        return f"mix({inner})"


PI = Independence()
M = UpperBound()
W = LowerBound()


@dataclass(frozen=True)
class Rect:
    u_lo: float
    u_hi: float
    v_lo: float
    v_hi: float

    def __post_init__(self):
        if not (0.0 <= self.u_lo <= self.u_hi <= 1.0 and 0.0 <= self.v_lo <= self.v_hi <= 1.0):
            raise DomainError(f"invalid rectangle {self}")


def _check_unit(name, x):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0.0) or np.any(x > 1.0):
        raise DomainError(f"{name} must lie in [0, 1]")
    return x


def evaluate(C: Copula, u, v):
    """Evaluate ``C(u, v)`` with domain checking.

    Scalars in give a Python float out; arrays broadcast.
    """
    uu = _check_unit("u", u)
    vv = _check_unit("v", v)
    out = C(uu, vv)
    if np.ndim(out) == 0:
        return float(out)
    return out


def volume(C: Copula, r: Rect) -> float:
    """C-volume of the rectangle ``[u_lo, u_hi] x [v_lo, v_hi]``."""
    return float(
        evaluate(C, r.u_hi, r.v_hi)
        - evaluate(C, r.u_lo, r.v_hi)
        - evaluate(C, r.u_hi, r.v_lo)
        + evaluate(C, r.u_lo, r.v_lo)
    )


def transpose(C: Copula) -> Copula:
    return Transpose(C)


def survival(C: Copula) -> Copula:
    return Survival(C)


def _check_alpha(alpha, name="alpha"):
    if not (0.0 <= alpha <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {alpha}")


def max_grid_asymmetry(C: Copula, G: int = 64) -> float:
    """Max of ``|C(u, v) - C(v, u)|`` over an interior G x G grid."""
    nodes = (np.arange(G) + 0.5) / G
    U, V = np.meshgrid(nodes, nodes, indexing="ij")
    vals = C(U, V)
    return float(np.max(np.abs(vals - vals.T)))


def _require_symmetric(S: Copula):
    asym = max_grid_asymmetry(S)
    if asym > _SYMMETRY_TOL:
        raise SymmetryError(f"copula {S} is not symmetric (grid asymmetry {asym:.3g})")


def mix_transpose(C: Copula, alpha: float) -> Copula:
    """``alpha * C + (1 - alpha) * C^t``."""
    _check_alpha(alpha)
    return Mixture((alpha, 1.0 - alpha), (C, Transpose(C)))


def mix_symmetric(C: Copula, S: Copula, alpha: float) -> Copula:
    """``alpha * C + (1 - alpha) * S`` for a symmetric ``S``."""
    _check_alpha(alpha)
    _require_symmetric(S)
    return Mixture((alpha, 1.0 - alpha), (C, S))


def convex3(C: Copula, beta: float, gamma: float, S: Copula) -> Copula:
    """``beta * C + gamma * C^t + (1 - beta - gamma) * S`` for a symmetric ``S``."""
    if beta < 0.0 or gamma < 0.0 or beta + gamma > 1.0 + _WEIGHT_TOL:
        raise WeightError(f"need beta, gamma >= 0 and beta + gamma <= 1, got {beta}, {gamma}")
    _require_symmetric(S)
    rest = max(1.0 - beta - gamma, 0.0)
    return Mixture((beta, gamma, rest), (C, Transpose(C), S))


def perturbed_product(c: float) -> Copula:
    return PerturbedProduct(c)
