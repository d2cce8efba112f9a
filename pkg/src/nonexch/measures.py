"""Non-exchangeability, dependence and concordance measures on a grid.

All integrals over the unit square are Riemann sums at the nodes
``j/G, j = 1..G``. For the integrands of ``mu_p`` and ``sigma_p`` (which
vanish on the boundary of the square) this coincides with the trapezoidal
rule. Spearman's rho integrates ``C`` itself, which does not vanish on the
top and right edges, so it uses trapezoid weights on the same nodes; the
plain right-endpoint sum would carry a ``+6/G`` bias.

Grid sums use :func:`math.fsum`, so results do not depend on summation
order: ``mu_p(C)`` and ``mu_p(transpose(C))`` are bit-identical.

``mu_p`` returns the raw distance ``d_p(C, C^t)``; divide by :func:`k_mu`
(or call :func:`mu_p_normalized`) for values in ``[0, 1]``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import asdict, dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .copulas import Copula
from .errors import DomainError

PNorm = Union[int, float]
INF = math.inf
_P_MAX = 20
_THETA_MAX = 1.0 / 3.0 + 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Uniform evaluation grid with nodes ``j/G``, ``j = 1..G``."""

    G: int = 200

    def __post_init__(self):
        if int(self.G) != self.G or self.G < 2:
            raise DomainError(f"grid size must be an integer >= 2, got {self.G}")

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(1, self.G + 1) / self.G

    def evaluate(self, C: Copula) -> np.ndarray:
        """Matrix ``A[j, k] = C(node_j, node_k)``."""
        x = self.nodes
        U, V = np.meshgrid(x, x, indexing="ij")
        return C(U, V)


def check_p(p: PNorm) -> float:
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise DomainError(f"p must be >= 1 or infinity, got {p}")
    if not math.isinf(p) and p > _P_MAX:
        raise DomainError(f"p > {_P_MAX} is not supported (factorial overflow guard)")
    return p


def _lp_mean(values: np.ndarray, p: float) -> float:
    """``(mean |x|^p)^(1/p)``, or ``max |x|`` for infinite p."""
    a = np.abs(values)
    if math.isinf(p):
        return float(a.max())
    if p == 1.0:
        s = math.fsum(a.ravel())
    else:
        s = math.fsum((a ** p).ravel())
    return (s / a.size) ** (1.0 / p)


def c_p(p: PNorm) -> float:
    """Schweizer-Wolff normalising constant ``((2p+2)! / (2 (p!)^2))^(1/p)``; 4 at infinity."""
    p = check_p(p)
    if math.isinf(p):
        return 4.0
    if p.is_integer():
        k = int(p)
        ratio = math.factorial(2 * k + 2) / (2 * math.factorial(k) ** 2)
        return ratio ** (1.0 / p)
    log_ratio = math.lgamma(2 * p + 3) - math.log(2.0) - 2 * math.lgamma(p + 1)
    return math.exp(log_ratio / p)


def k_mu(p: PNorm) -> float:
    """Supremum of ``mu_p`` over all copulas: ``(2 * 3^-p / ((p+1)(p+2)))^(1/p)``; 1/3 at infinity."""
    p = check_p(p)
    if math.isinf(p):
        return 1.0 / 3.0
    return (2.0 * 3.0 ** (-p) / ((p + 1.0) * (p + 2.0))) ** (1.0 / p)


def _asym(values: np.ndarray) -> np.ndarray:
    return values - values.T


def _indep(grid: GridSpec) -> np.ndarray:
    x = grid.nodes
    return np.multiply.outer(x, x)


def mu_p(C: Copula, p: PNorm = 1, grid: GridSpec = GridSpec()) -> float:
    """Raw non-exchangeability ``d_p(C, C^t)`` on the grid."""
    p = check_p(p)
    return _lp_mean(_asym(grid.evaluate(C)), p)


def mu_p_normalized(C: Copula, p: PNorm = 1, grid: GridSpec = GridSpec()) -> float:
    return mu_p(C, p, grid) / k_mu(p)


def sigma_p(C: Copula, p: PNorm = 1, grid: GridSpec = GridSpec()) -> float:
    """Schweizer-Wolff measure ``c_p * d_p(C, Pi)``."""
    p = check_p(p)
    return c_p(p) * _lp_mean(grid.evaluate(C) - _indep(grid), p)


def _trapezoid_mean(values: np.ndarray) -> float:
    G = values.shape[0]
    w = np.ones(G)
    w[-1] = 0.5
    # nodes at 0 carry C = 0 and are omitted
    return math.fsum((values * np.multiply.outer(w, w)).ravel()) / (G * G)


def spearman_rho(C: Copula, grid: GridSpec = GridSpec()) -> float:
    return 12.0 * _trapezoid_mean(grid.evaluate(C)) - 3.0


def _check_theta(theta):
    if not (0.0 <= theta <= _THETA_MAX):
        raise DomainError(f"theta must lie in [0, 1/3], got {theta}")


def _as_fraction(theta: float) -> Fraction:
    """``theta`` as an exact rational, snapped to a small-denominator fraction
    when it lies within a few ulps of one (so ``1/3`` evaluates as one third)."""
    near = Fraction(theta).limit_denominator(1000)
    if abs(float(near) - theta) <= 4 * math.ulp(max(theta, 1e-300)):
        return near
    return Fraction(theta)


def rho_m_theta(theta: float) -> float:
    """``1 - 6 theta + 6 theta^2``, evaluated in exact rational arithmetic."""
    _check_theta(theta)
    t = _as_fraction(theta)
    return float(1 - 6 * t + 6 * t * t)


def tau_m_theta(theta: float) -> float:
    """``(1 - 2 theta)^2``, evaluated in exact rational arithmetic."""
    _check_theta(theta)
    t = _as_fraction(theta)
    return float((1 - 2 * t) ** 2)


@dataclass(frozen=True)
class MeasureReport:
    mu_p: float
    sigma_p: float
    rho: float
    p: float
    G: int
    bound1_slack: float
    bound2_slack: Optional[float] = None

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(self.p):
            d["p"] = "inf"
        return d


def bound_report(C: Copula, p: PNorm = 1, grid: GridSpec = GridSpec()) -> MeasureReport:
    """Measures of ``C`` together with the slack of the two upper bounds on ``mu_p``.

    ``bound1_slack = 2 sigma_p / c_p - mu_p`` and, for ``p = 1`` only,
    ``bound2_slack = (1 - |rho|) / 3 - sigma_1 / 6``. Both are nonnegative
    for every copula up to grid error.
    """
    p = check_p(p)
    values = grid.evaluate(C)
    mu = _lp_mean(_asym(values), p)
    cp = c_p(p)
    sigma = cp * _lp_mean(values - _indep(grid), p)
    rho = 12.0 * _trapezoid_mean(values) - 3.0
    slack2 = (1.0 - abs(rho)) / 3.0 - sigma / 6.0 if p == 1.0 else None
    return MeasureReport(
        mu_p=mu,
        sigma_p=sigma,
        rho=rho,
        p=p,
        G=grid.G,
        bound1_slack=2.0 * sigma / cp - mu,
        bound2_slack=slack2,
    )


def feasible_rho_range(mu0: float) -> Tuple[float, float]:
    """Spearman's rho values reachable by ``3 mu0 * M_{1/3} + (1 - 3 mu0) * S``, S symmetric."""
    if not (0.0 <= mu0 <= _THETA_MAX):
        raise DomainError(f"mu0 must lie in [0, 1/3], got {mu0}")
    return 2.0 * mu0 - 1.0, 1.0 - 4.0 * mu0


def _check_targets(mu0, muC):
    if not muC > 0.0:
        raise DomainError(f"mu_p(C) must be positive, got {muC}")
    if not (0.0 <= mu0 <= muC):
        raise DomainError(f"target {mu0} must lie in [0, mu_p(C)] = [0, {muC}]")


def prescribe_alpha(mu0: float, muC: float) -> float:
    """Weight ``alpha`` in ``[1/2, 1]`` such that ``alpha C + (1 - alpha) C^t`` has measure ``mu0``."""
    _check_targets(mu0, muC)
    return 0.5 * (1.0 + mu0 / muC)


def prescribe_alpha_symmetric(mu0: float, muC: float) -> float:
    """Weight ``alpha`` such that ``alpha C + (1 - alpha) S`` has measure ``mu0``."""
    _check_targets(mu0, muC)
    return mu0 / muC
