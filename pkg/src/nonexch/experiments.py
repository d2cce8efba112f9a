"""Monte Carlo harness for the level, power and demonstration studies.

Each scenario row (family, parameter, sample size) gets a key ``k`` derived
from its content, and replicate ``r`` of that row draws its sample from the
stream ``(master_seed, k, r, 0)`` and its permutation seed from
``(master_seed, k, r, 1)``. Dropping or reordering rows therefore leaves the
other rows untouched, and results do not depend on ``jobs``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import copulas as cop
from .empirical import Sample
from .errors import ConfigError, DataError, DomainError, ParameterError, SymmetryError
from .permutation import TestConfig, TestResult, run_test
from .rng import RngStream
from .samplers import FamilySpec, sample

SCENARIOS = ("level", "power", "demo")
FORMATS = ("csv", "json")

CSV_COLUMNS = (
    "scenario", "family", "param", "n", "R", "B", "rejections", "rate", "mean_tn", "seed",
    "t_n", "critical_value", "p_value", "reject", "tau_hat", "rho_hat",
)
_DEMO_FIELDS = CSV_COLUMNS[10:]


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    families: Tuple[FamilySpec, ...]
    sizes: Tuple[int, ...]
    R: int
    test: TestConfig = field(default_factory=TestConfig)
    out: Optional[str] = None
    fmt: str = "csv"
    jobs: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.fmt not in FORMATS:
            raise ConfigError(f"unknown output format {self.fmt!r}")
        if int(self.R) != self.R or self.R < 1:
            raise ConfigError(f"R must be a positive integer, got {self.R}")
        if not self.families or not self.sizes:
            raise ConfigError("need at least one family and one sample size")
        if any(int(n) != n or n < 2 for n in self.sizes):
            raise ConfigError(f"sample sizes must be integers >= 2, got {self.sizes}")
        if int(self.jobs) != self.jobs or self.jobs < 1:
            raise ConfigError(f"jobs must be a positive integer, got {self.jobs}")


def default_config(scenario: str, **overrides) -> ExperimentConfig:
    """Scenario defaults: p = 1, G = 35, alpha = 0.05, B = 299 (399 for the demo)."""
    if scenario == "level":
        base = dict(
            families=(FamilySpec("gaussian", 0.5), FamilySpec("clayton", 2.0), FamilySpec("fgm", 0.5)),
            sizes=(100,),
            R=100,
            test=TestConfig(B=299),
        )
    elif scenario == "power":
        base = dict(
            families=tuple(FamilySpec("m_theta", t) for t in (1 / 6, 1 / 4, 1 / 3)),
            sizes=(50, 100, 200, 400),
            R=80,
            test=TestConfig(B=299),
        )
    elif scenario == "demo":
        base = dict(
            families=(FamilySpec("gaussian", 0.6), FamilySpec("m_theta", 1 / 6), FamilySpec("m_theta", 1 / 3)),
            sizes=(300,),
            R=1,
            test=TestConfig(B=399),
        )
    else:
        raise ConfigError(f"unknown scenario {scenario!r}")
    base.update(overrides)
    return ExperimentConfig(scenario=scenario, **base)


@dataclass
class ResultRow:
    scenario: str
    family: str
    param: float
    n: int
    R: int
    B: int
    rejections: int
    rate: float
    mean_tn: float
    seed: int
    t_n: Optional[float] = None
    critical_value: Optional[float] = None
    p_value: Optional[float] = None
    reject: Optional[bool] = None
    tau_hat: Optional[float] = None
    rho_hat: Optional[float] = None

    def as_dict(self) -> dict:
        d = {c: getattr(self, c) for c in CSV_COLUMNS}
        if self.t_n is None:
            for c in _DEMO_FIELDS:
                d.pop(c)
        return d


def row_key(scenario: str, spec: FamilySpec, n: int) -> int:
    return zlib.crc32(f"{scenario}|{spec.family}|{spec.param!r}|{n}".encode())


def _replicate(args) -> TestResult:
    spec, n, k, r, master, test = args
    s = sample(spec, n, RngStream(master, (k, r, 0)))
    seed = RngStream(master, (k, r, 1)).derive_seed()
    return run_test(s, replace(test, seed=seed))


def replicate_results(cfg: ExperimentConfig, spec: FamilySpec, n: int, pool=None) -> List[TestResult]:
    """All ``R`` test results of one scenario row, in replicate order."""
    k = row_key(cfg.scenario, spec, n)
    tasks = [(spec, n, k, r, cfg.test.seed, cfg.test) for r in range(cfg.R)]
    if pool is None:
        return [_replicate(t) for t in tasks]
    return list(pool.map(_replicate, tasks, chunksize=max(1, len(tasks) // (4 * cfg.jobs))))


def _summarise(cfg: ExperimentConfig, spec: FamilySpec, n: int, results: Sequence[TestResult]) -> ResultRow:
    rej = sum(r.reject for r in results)
    row = ResultRow(
        scenario=cfg.scenario,
        family=spec.family,
        param=spec.param,
        n=n,
        R=cfg.R,
        B=cfg.test.B,
        rejections=rej,
        rate=rej / cfg.R,
        mean_tn=float(np.mean([r.t_n for r in results])),
        seed=cfg.test.seed,
    )
    if cfg.scenario == "demo":
        first = results[0]
        row.t_n = first.t_n
        row.critical_value = first.critical_value
        row.p_value = first.p_value
        row.reject = first.reject
        row.tau_hat = first.tau_hat
        row.rho_hat = first.rho_hat
    return row


def run_rows(cfg: ExperimentConfig) -> List[ResultRow]:
    """One row per (family, n), ordered family-major."""
    rows = []
    pool = ProcessPoolExecutor(max_workers=cfg.jobs) if cfg.jobs > 1 else None
    try:
        for spec in cfg.families:
            for n in cfg.sizes:
                results = replicate_results(cfg, spec, n, pool)
                rows.append(_summarise(cfg, spec, n, results))
    finally:
        if pool is not None:
            pool.shutdown()
    return rows


def _expect(cfg, scenario):
    if cfg.scenario != scenario:
        raise ConfigError(f"expected a {scenario!r} configuration, got {cfg.scenario!r}")


def run_level(cfg: ExperimentConfig) -> List[ResultRow]:
    _expect(cfg, "level")
    return run_rows(cfg)


def run_power(cfg: ExperimentConfig) -> List[ResultRow]:
    _expect(cfg, "power")
    return run_rows(cfg)


def run_demo(cfg: ExperimentConfig) -> List[ResultRow]:
    """Single-sample reports; with ``R > 1`` the rate is a rejection frequency over seeds."""
    _expect(cfg, "demo")
    return run_rows(cfg)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not isinstance(value, bool):
        return float(f"{value:.6g}")
    return value


def format_results(rows: Sequence[ResultRow], fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in rows:
            w.writerow([_fmt(getattr(row, c)) for c in CSV_COLUMNS])
        return buf.getvalue()
    if fmt == "json":
        objs = [{k: _json_value(v) for k, v in row.as_dict().items()} for row in rows]
        return json.dumps(objs, indent=2) + "\n"
    raise ConfigError(f"unknown output format {fmt!r}")


def write_text(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


def write_results(rows: Sequence[ResultRow], fmt: str = "csv", path: Optional[str] = None) -> None:
    """CSV (fixed header) or JSON array; floats with 6 significant digits; LF newlines."""
    write_text(format_results(rows, fmt), path)


# ---------------------------------------------------------------------------
# Copula expressions on the command line
# ---------------------------------------------------------------------------

_LEAVES_0 = {"pi": cop.PI, "independence": cop.PI, "M": cop.M, "upper": cop.M, "W": cop.W, "lower": cop.W}
_LEAVES_1 = {
    "gaussian": cop.Gaussian,
    "clayton": cop.Clayton,
    "fgm": cop.FGM,
    "m_theta": cop.MTheta,
    "perturbed": cop.perturbed_product,
}

COPULA_SYNTAX = """\
Copula expressions are colon-separated prefix notation:
  pi | M | W                          independence, upper and lower bounds
  gaussian:R  clayton:T  fgm:T  m_theta:T  perturbed:C
  t:EXPR                              transpose
  surv:EXPR                           survival copula
  mix_t:A:EXPR                        A*EXPR + (1-A)*transpose(EXPR)
  mix_s:A:EXPR:SYM                    A*EXPR + (1-A)*SYM, SYM symmetric
  convex3:B:G:EXPR:SYM                B*EXPR + G*EXPR^t + (1-B-G)*SYM
  mix:A:EXPR1:EXPR2                   A*EXPR1 + (1-A)*EXPR2
Numbers may be fractions, e.g. m_theta:1/3."""


def parse_number(tok: str) -> float:
    try:
        if tok.lower() in ("inf", "infinity"):
            return math.inf
        return float(Fraction(tok))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a number: {tok!r}") from None


def parse_copula(text: str) -> cop.Copula:
    """Parse an expression such as ``mix_t:0.75:clayton:2`` (see ``COPULA_SYNTAX``)."""
    tokens = text.strip().split(":")
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(tokens):
            raise ConfigError(f"truncated copula expression {text!r}")
        tok = tokens[pos]
        pos += 1
        return tok

    def expr():
        head = take()
        if head in _LEAVES_0:
            return _LEAVES_0[head]
        if head in _LEAVES_1:
            return _LEAVES_1[head](parse_number(take()))
        if head == "t":
            return cop.transpose(expr())
        if head == "surv":
            return cop.survival(expr())
        if head == "mix_t":
            a = parse_number(take())
            return cop.mix_transpose(expr(), a)
        if head == "mix_s":
            a = parse_number(take())
            c = expr()
            return cop.mix_symmetric(c, expr(), a)
        if head == "convex3":
            b = parse_number(take())
            g = parse_number(take())
            c = expr()
            return cop.convex3(c, b, g, expr())
        if head == "mix":
            a = parse_number(take())
            c1 = expr()
            c2 = expr()
            return cop.Mixture((a, 1.0 - a), (c1, c2))
        raise ConfigError(f"unknown copula constructor {head!r}")

    try:
        result = expr()
    except (ParameterError, DomainError, SymmetryError) as exc:
        raise ConfigError(str(exc)) from exc
    if pos != len(tokens):
        raise ConfigError(f"trailing tokens in copula expression {text!r}")
    return result


def parse_family(text: str) -> FamilySpec:
    """``gaussian:0.5``, ``m_theta:1/3`` or ``independence``."""
    name, _, par = text.strip().partition(":")
    try:
        return FamilySpec(name, parse_number(par) if par else 0.0)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Data files
# ---------------------------------------------------------------------------

def read_sample(path: str, delimiter: str = ",") -> Sample:
    """Two numeric columns, optional header row."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: no data")
    try:
        float(rows[0][0])
        float(rows[0][1])
    except (ValueError, IndexError):
        rows = rows[1:]
    xs, ys = [], []
    for lineno, r in enumerate(rows, 1):
        if len(r) != 2:
            raise DataError(f"{path}: expected 2 columns, found {len(r)} in data row {lineno}")
        try:
            xs.append(float(r[0]))
            ys.append(float(r[1]))
        except ValueError:
            raise DataError(f"{path}: non-numeric value in data row {lineno}") from None
    return Sample(np.array(xs), np.array(ys))


def write_sample(s: Sample, path: Optional[str]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("x", "y"))
    for a, b in zip(s.x, s.y):
        w.writerow((repr(float(a)), repr(float(b))))
    write_text(buf.getvalue(), path)


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            out[key.strip().replace("-", "_")] = value.strip()
    return out
