"""Pseudo-observations, the empirical copula and the asymmetry statistic.

The statistic

    T_n = (n / G^2) * sum_{j,k=1..G} |C_n(j/G, k/G) - C_n(k/G, j/G)|^p

is computed from a G x G table of cumulative counts: each point is placed
in the cell of the first node not below it, and two cumulative sums give
``n * C_n`` at every node. Cost is O(n + G^2) per statistic, and a batch of
resampled pseudo-samples is handled in one pass with a leading batch axis.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats as _stats

from .errors import DataError, DomainError, RankFlagError, TieError

DEFAULT_P = 1.0
DEFAULT_G = 35


@dataclass(frozen=True)
class Sample:
    """Raw paired observations."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise DataError("x and y must have the same length")
        if x.size < 2:
            raise DataError(f"need at least 2 observations, got {x.size}")
        if np.isnan(x).any() or np.isnan(y).any():
            raise DataError("sample contains NaN")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.size

    @classmethod
    def from_pairs(cls, pairs):
        arr = np.asarray(pairs, dtype=float)
        return cls(arr[:, 0], arr[:, 1])


@dataclass(frozen=True)
class PseudoSample:
    """Points in (0, 1)^2; ``ranked`` means each margin is exactly {i/(n+1)}."""

    u: np.ndarray
    v: np.ndarray
    ranked: bool = False

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).ravel()
        v = np.asarray(self.v, dtype=float).ravel()
        if u.shape != v.shape or u.size < 2:
            raise DataError("pseudo-sample needs two margins of equal length >= 2")
        if np.any((u <= 0) | (u >= 1) | (v <= 0) | (v >= 1)):
            raise DomainError("pseudo-observations must lie in the open unit square")
        u.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.u.size

    def pairs(self) -> np.ndarray:
        return np.column_stack([self.u, self.v])


@dataclass(frozen=True)
class StatConfig:
    p: float = DEFAULT_P
    G: int = DEFAULT_G

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p >= 1.0):
            raise DomainError(f"statistic needs a finite p >= 1, got {self.p}")
        if int(self.G) != self.G or self.G < 2:
            raise DomainError(f"grid size must be an integer >= 2, got {self.G}")


def _tied_indices(a: np.ndarray) -> list:
    order = np.argsort(a, kind="stable")
    s = a[order]
    dup = np.zeros(a.size, dtype=bool)
    eq = s[1:] == s[:-1]
    dup[1:] |= eq
    dup[:-1] |= eq
    return sorted(order[dup].tolist())


def _ranks(a: np.ndarray) -> np.ndarray:
    """1-based ranks; ties broken by position."""
    r = np.empty(a.size, dtype=np.int64)
    r[np.argsort(a, kind="stable")] = np.arange(1, a.size + 1)
    return r


def break_ties(s: Sample, rng) -> Sample:
    """Jitter tied values without changing the order of distinct values.

    Each tied value moves by less than a quarter of the smallest gap between
    distinct values of its margin. Emits a ``UserWarning`` when anything was
    changed.
    """
    out = []
    changed = False
    for a in (s.x, s.y):
        idx = _tied_indices(a)
        a = a.copy()
        if idx:
            changed = True
            uniq = np.unique(a)
            gap = np.min(np.diff(uniq)) if uniq.size > 1 else 1.0
            a[idx] += (rng.uniform(len(idx)) - 0.5) * 0.5 * gap
        out.append(a)
    if changed:
        warnings.warn("tied values were broken by random jitter", UserWarning, stacklevel=2)
    return Sample(out[0], out[1])


def pseudo_observations(s: Sample) -> PseudoSample:
    """Margin ranks divided by ``n + 1``; raises :class:`TieError` on ties."""
    ties = {"x": _tied_indices(s.x), "y": _tied_indices(s.y)}
    if ties["x"] or ties["y"]:
        raise TieError(ties)
    n1 = s.n + 1
    return PseudoSample(_ranks(s.x) / n1, _ranks(s.y) / n1, ranked=True)


def rerank(ps: PseudoSample) -> PseudoSample:
    """Re-rank both margins, breaking ties by original index."""
    n1 = ps.n + 1
    return PseudoSample(_ranks(ps.u) / n1, _ranks(ps.v) / n1, ranked=True)


def empirical_copula(ps: PseudoSample, u, v):
    """``C_n(u, v) = #{i : u_i <= u, v_i <= v} / n``."""
    uu = np.asarray(u, dtype=float)
    vv = np.asarray(v, dtype=float)
    if np.any(~np.isfinite(uu) | (uu < 0) | (uu > 1)) or np.any(~np.isfinite(vv) | (vv < 0) | (vv > 1)):
        raise DomainError("u and v must lie in [0, 1]")
    hits = (ps.u <= uu[..., None]) & (ps.v <= vv[..., None])
    out = hits.mean(axis=-1)
    return float(out) if out.ndim == 0 else out


def grid_cells(x: np.ndarray, G: int) -> np.ndarray:
    """0-based index of the first node ``j/G`` with ``x <= j/G``."""
    nodes = np.arange(1, G + 1) / G
    return np.searchsorted(nodes, x, side="left")


def count_tables(iu: np.ndarray, iv: np.ndarray, G: int) -> np.ndarray:
    """Cumulative counts ``N[b, j, k] = #{i : iu[b,i] <= j, iv[b,i] <= k}``.

    ``iu`` and ``iv`` have shape ``(batch, n)``.
    """
    batch = iu.shape[0]
    flat = (np.arange(batch)[:, None] * G + iu) * G + iv
    hist = np.bincount(flat.ravel(), minlength=batch * G * G).reshape(batch, G, G)
    return hist.cumsum(axis=1).cumsum(axis=2)


def count_table(ps: PseudoSample, G: int) -> np.ndarray:
    """``n * C_n`` at the grid nodes, as a G x G integer matrix."""
    iu = grid_cells(ps.u, G)[None, :]
    iv = grid_cells(ps.v, G)[None, :]
    return count_tables(iu, iv, G)[0]


def stat_from_counts(diff: np.ndarray, n: int, G: int, p: float) -> np.ndarray:
    """Statistic from integer count differences; reduces over the last two axes.

    Integer ``p`` in {1, 2} is summed in exact integer arithmetic.
    """
    a = np.abs(diff)
    if p == 1.0:
        return a.sum(axis=(-2, -1)) / (G * G)
    if p == 2.0:
        return (a * a).sum(axis=(-2, -1)) / (n * G * G)
    return n / (G * G) * ((a / n) ** p).sum(axis=(-2, -1))


def t_statistic_batch(iu: np.ndarray, iv: np.ndarray, cfg: StatConfig) -> np.ndarray:
    """Statistics for a batch of cell-index arrays of shape ``(batch, n)``."""
    N = count_tables(iu, iv, cfg.G)
    return stat_from_counts(N - N.transpose(0, 2, 1), iu.shape[1], cfg.G, cfg.p)


def t_statistic(ps: PseudoSample, cfg: StatConfig = StatConfig()) -> float:
    iu = grid_cells(ps.u, cfg.G)[None, :]
    iv = grid_cells(ps.v, cfg.G)[None, :]
    return float(t_statistic_batch(iu, iv, cfg)[0])


def empirical_mu(ps: PseudoSample, p: float, G: int) -> float:
    """Grid ``mu_p`` of the empirical copula (``p`` may be infinite)."""
    N = count_table(ps, G)
    d = np.abs(N - N.T) / ps.n
    if math.isinf(p):
        return float(d.max())
    return float(np.mean(d ** p) ** (1.0 / p))


def _require_ranked(ps: PseudoSample):
    if not ps.ranked:
        raise RankFlagError("concordance estimators need margin-ranked pseudo-observations")


def _integer_ranks(ps: PseudoSample):
    n1 = ps.n + 1
    return np.rint(ps.u * n1).astype(np.int64), np.rint(ps.v * n1).astype(np.int64)


def sample_spearman(ps: PseudoSample) -> float:
    """``1 - 6 sum d_i^2 / (n (n^2 - 1))`` with ``d_i`` the rank differences."""
    _require_ranked(ps)
    r, s = _integer_ranks(ps)
    n = ps.n
    d2 = int(np.sum((r - s) ** 2))
    return 1.0 - 6.0 * d2 / (n * (n * n - 1))


def sample_kendall(ps: PseudoSample) -> float:
    """``(concordant - discordant) / (n (n - 1) / 2)``.

    Delegates to :func:`scipy.stats.kendalltau`, an O(n log n) count; with
    no ties its tau-b equals this tau-a.
    """
    _require_ranked(ps)
    r, s = _integer_ranks(ps)
    return float(_stats.kendalltau(r, s).statistic)
