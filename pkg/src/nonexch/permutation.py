"""Coordinate-swap permutation test of exchangeability.

For each replicate ``b`` every pseudo-observation is swapped independently
with probability 1/2 and the statistic is recomputed from the swapped
points. By default both margins of the swapped points are re-ranked first
(ties broken by original index): swapped points no longer have rank-uniform
margins, and skipping the re-ranking inflates the permuted statistics so
much that the test almost never rejects under the null. Set
``rerank_permuted=False`` for the unre-ranked scheme. Replicate ``b``
draws its swap indicators from the counter block ``(seed, b)``, so the result
does not depend on how replicates are batched or distributed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from .empirical import (
    PseudoSample,
    Sample,
    StatConfig,
    break_ties,
    grid_cells,
    pseudo_observations,
    sample_kendall,
    sample_spearman,
    t_statistic_batch,
)
from .errors import ConfigError
from .rng import RngStream, replicate_bits

_SEED_MAX = 2 ** 64


@dataclass(frozen=True)
class TestConfig:
    stat: StatConfig = field(default_factory=StatConfig)
    B: int = 299
    alpha: float = 0.05
    seed: int = 0
    keep_replicates: bool = False
    rerank_permuted: bool = True
    break_ties: bool = False

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if int(self.B) != self.B or self.B < 19:
            raise ConfigError(f"B must be an integer >= 19, got {self.B}")
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.alpha * (self.B + 1) < 1.0 - 1e-12:
            raise ConfigError(f"alpha * (B + 1) must be >= 1 (alpha={self.alpha}, B={self.B})")
        if not (0 <= int(self.seed) < _SEED_MAX):
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass
class TestResult:
    t_n: float
    critical_value: float
    p_value: float
    reject: bool
    B: int
    seed: int
    n: int
    tau_hat: float
    rho_hat: float
    permuted_stats: Optional[List[float]] = None

    __test__ = False

    def to_dict(self, with_replicates: bool = False) -> dict:
        d = asdict(self)
        if not with_replicates or self.permuted_stats is None:
            d.pop("permuted_stats")
        return d


def apply_swaps(ps: PseudoSample, keep: np.ndarray) -> PseudoSample:
    """Swap the coordinates of every pair where ``keep`` is False."""
    keep = np.asarray(keep, dtype=bool)
    u = np.where(keep, ps.u, ps.v)
    v = np.where(keep, ps.v, ps.u)
    return PseudoSample(u, v, ranked=False)


def coordinate_swap(ps: PseudoSample, rng) -> PseudoSample:
    """Swap each pair independently with probability 1/2.

    ``rng`` is any object with a ``bernoulli_half(n)`` method returning the
    keep indicators (True keeps the pair as is).
    """
    return apply_swaps(ps, rng.bernoulli_half(ps.n))


def swap_indicators(seed: int, B: int, n: int) -> np.ndarray:
    """``(B, n)`` keep indicators; row ``b`` depends only on ``(seed, b)``."""
    return replicate_bits(seed, B, n)


def critical_rank(B: int, alpha: float) -> int:
    """1-based order statistic used as the critical value: ``ceil((1 - alpha)(B + 1))`` clipped to B."""
    k = math.ceil((1.0 - alpha) * (B + 1) - 1e-9)
    return min(max(k, 1), B)


def _batch_rerank_cells(vals: np.ndarray, G: int) -> np.ndarray:
    """Grid cells of the row-wise ranks ``/(n + 1)``; ties go to the lower index."""
    B, n = vals.shape
    order = np.argsort(vals, axis=1, kind="stable")
    ranks = np.empty((B, n), dtype=np.int64)
    np.put_along_axis(ranks, order, np.broadcast_to(np.arange(1, n + 1), (B, n)), axis=1)
    return grid_cells(ranks / (n + 1), G)


def permuted_statistics(ps: PseudoSample, cfg: TestConfig) -> np.ndarray:
    keep = swap_indicators(cfg.seed, cfg.B, ps.n)
    G = cfg.stat.G
    if cfg.rerank_permuted:
        su = np.where(keep, ps.u, ps.v)
        sv = np.where(keep, ps.v, ps.u)
        return t_statistic_batch(_batch_rerank_cells(su, G), _batch_rerank_cells(sv, G), cfg.stat)
    cu = grid_cells(ps.u, G)
    cv = grid_cells(ps.v, G)
    iu = np.where(keep, cu, cv)
    iv = np.where(keep, cv, cu)
    return t_statistic_batch(iu, iv, cfg.stat)


def decide(t_n: float, permuted: np.ndarray, alpha: float):
    """Critical value, add-one p-value and decision from permuted statistics."""
    B = permuted.size
    crit = float(np.sort(permuted)[critical_rank(B, alpha) - 1])
    p_value = (1 + int(np.count_nonzero(permuted >= t_n))) / (B + 1)
    return crit, p_value, bool(t_n > crit)


def run_test_pseudo(ps: PseudoSample, cfg: TestConfig) -> TestResult:
    G = cfg.stat.G
    t_n = float(
        t_statistic_batch(grid_cells(ps.u, G)[None, :], grid_cells(ps.v, G)[None, :], cfg.stat)[0]
    )
    permuted = permuted_statistics(ps, cfg)
    crit, p_value, reject = decide(t_n, permuted, cfg.alpha)
    return TestResult(
        t_n=t_n,
        critical_value=crit,
        p_value=p_value,
        reject=reject,
        B=cfg.B,
        seed=int(cfg.seed),
        n=ps.n,
        tau_hat=sample_kendall(ps),
        rho_hat=sample_spearman(ps),
        permuted_stats=permuted.tolist() if cfg.keep_replicates else None,
    )


def run_test(s: Sample, cfg: TestConfig = TestConfig()) -> TestResult:
    """Permutation test of ``H0: C = C^t`` on a raw sample."""
    if cfg.break_ties:
        # jitter stream sits outside the replicate key space (b >= 0)
        s = break_ties(s, RngStream(cfg.seed, (2 ** 32,)))
    return run_test_pseudo(pseudo_observations(s), cfg)
