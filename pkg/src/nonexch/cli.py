"""Command line interface.

Subcommands: ``measure``, ``sample``, ``test``, ``simulate-level``,
``simulate-power`` and ``demo``. Exit codes: 0 success, 2 configuration
error, 3 data error (ties, NaN, malformed input), 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace

from . import experiments as ex
from .empirical import StatConfig
from .errors import ConfigError, DataError, NonExchError
from .measures import GridSpec, bound_report
from .permutation import TestConfig, run_test
from .rng import RngStream
from .samplers import sample

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_IO = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_common(p, fmt_default="csv"):
    p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=ex.FORMATS, default=None, help=f"output format (default {fmt_default})")
    p.add_argument("--jobs", type=int, default=None, help="worker processes")


def _add_rerank(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--rerank-permuted", dest="rerank", action="store_true", default=None,
                   help="re-rank swapped pseudo-observations (default)")
    g.add_argument("--no-rerank-permuted", dest="rerank", action="store_false",
                   help="compute permuted statistics from the raw swapped points")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nonexch", description="Non-exchangeability of bivariate copulas.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("measure", help="grid measures of a copula expression",
                       epilog=ex.COPULA_SYNTAX, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--copula", required=True, help="copula expression, e.g. mix_t:0.75:m_theta:1/3")
    p.add_argument("--p", default="1", help="norm exponent, >= 1 or 'inf'")
    p.add_argument("--grid", type=int, default=200)
    _add_common(p, "json")

    p = sub.add_parser("sample", help="draw a sample from a copula family")
    p.add_argument("--family", required=True, choices=("gaussian", "clayton", "fgm", "m_theta", "independence"))
    p.add_argument("--param", default="0")
    p.add_argument("--n", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("test", help="permutation test of exchangeability on a CSV sample")
    p.add_argument("--input", required=True)
    p.add_argument("--delimiter", default=",")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--grid", type=int, default=35)
    p.add_argument("--B", type=int, default=299)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--keep-replicates", action="store_true")
    p.add_argument("--break-ties", choices=("error", "random"), default="error")
    _add_rerank(p)
    _add_common(p, "json")

    for name, helptext in (
        ("simulate-level", "empirical level under symmetric copulas"),
        ("simulate-power", "empirical power against m_theta"),
        ("demo", "single-sample test reports"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="flat key = value file; flags override it")
        p.add_argument("--families", help="comma list, e.g. gaussian:0.5,clayton:2")
        p.add_argument("--sizes", help="comma list of sample sizes")
        if name == "demo":
            p.add_argument("--repeat", dest="R", type=int, help="number of seeds (rejection frequency)")
        else:
            p.add_argument("--R", type=int, help="Monte Carlo replications")
        p.add_argument("--B", type=int)
        p.add_argument("--alpha", type=float)
        p.add_argument("--p", type=float)
        p.add_argument("--grid", type=int)
        _add_rerank(p)
        _add_common(p)
    return parser


def _parse_p(text):
    return ex.parse_number(text)


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _cmd_measure(args):
    C = ex.parse_copula(args.copula)
    report = bound_report(C, _parse_p(args.p), GridSpec(args.grid))
    d = report.to_dict()
    if (args.format or "json") == "json":
        text = json.dumps(d, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(d.keys())
        w.writerow(["" if v is None else (f"{v:.6g}" if isinstance(v, float) else v) for v in d.values()])
        text = buf.getvalue()
    ex.write_text(text, args.out)


def _cmd_sample(args):
    spec = ex.parse_family(f"{args.family}:{args.param}")
    s = sample(spec, args.n, RngStream(args.seed or 0))
    ex.write_sample(s, args.out)


def _cmd_test(args):
    s = ex.read_sample(args.input, args.delimiter)
    cfg = TestConfig(
        stat=StatConfig(p=args.p, G=args.grid),
        B=args.B,
        alpha=args.alpha,
        seed=args.seed or 0,
        keep_replicates=args.keep_replicates,
        rerank_permuted=True if args.rerank is None else args.rerank,
        break_ties=args.break_ties == "random",
    )
    res = run_test(s, cfg)
    keys = ("t_n", "critical_value", "p_value", "reject", "tau_hat", "rho_hat", "n", "B", "seed")
    d = {k: getattr(res, k) for k in keys}
    if args.keep_replicates:
        d["permuted_stats"] = res.permuted_stats
    if (args.format or "json") == "json":
        text = json.dumps(d, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        w.writerow([ex._fmt(d[k]) for k in keys])
        text = buf.getvalue()
    ex.write_text(text, args.out)


_SCENARIO = {"simulate-level": "level", "simulate-power": "power", "demo": "demo"}


def _simulation_config(args) -> ex.ExperimentConfig:
    file_opts = ex.read_config_file(args.config) if args.config else {}
    known = {"families", "sizes", "R", "repeat", "B", "alpha", "p", "grid", "seed", "out",
             "format", "jobs", "rerank_permuted"}
    unknown = set(file_opts) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "repeat" in file_opts:
        file_opts.setdefault("R", file_opts.pop("repeat"))

    def pick(name, conv):
        flag = getattr(args, name, None)
        if flag is not None:
            return flag
        if name in file_opts:
            try:
                return conv(file_opts[name])
            except ValueError as exc:
                raise ConfigError(f"bad value for {name}: {file_opts[name]!r}") from exc
        return None

    base = ex.default_config(_SCENARIO[args.command])
    over = {}
    fams = pick("families", str)
    if fams:
        over["families"] = tuple(ex.parse_family(f) for f in fams.split(",") if f.strip())
    sizes = pick("sizes", str)
    if sizes:
        try:
            over["sizes"] = tuple(int(x) for x in sizes.split(",") if x.strip())
        except ValueError as exc:
            raise ConfigError(f"bad sample sizes {sizes!r}") from exc
    for name, conv in (("R", int), ("jobs", int), ("out", str), ("format", str)):
        val = pick(name, conv)
        if val is not None:
            over["fmt" if name == "format" else name] = val

    test = base.test
    stat = test.stat
    p = pick("p", float)
    grid = pick("grid", int)
    if p is not None or grid is not None:
        stat = StatConfig(p=stat.p if p is None else p, G=stat.G if grid is None else grid)
    t_over = {"stat": stat}
    for name, conv in (("B", int), ("alpha", float), ("seed", int)):
        val = pick(name, conv)
        if val is not None:
            t_over[name] = val
    rr = args.rerank if args.rerank is not None else (
        _bool(file_opts["rerank_permuted"]) if "rerank_permuted" in file_opts else None)
    if rr is not None:
        t_over["rerank_permuted"] = rr
    over["test"] = replace(test, **t_over)
    return replace(base, **over)


def _cmd_simulate(args):
    cfg = _simulation_config(args)
    runner = {"level": ex.run_level, "power": ex.run_power, "demo": ex.run_demo}[cfg.scenario]
    rows = runner(cfg)
    ex.write_results(rows, cfg.fmt, cfg.out)


_COMMANDS = {
    "measure": _cmd_measure,
    "sample": _cmd_sample,
    "test": _cmd_test,
    "simulate-level": _cmd_simulate,
    "simulate-power": _cmd_simulate,
    "demo": _cmd_simulate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except DataError as exc:
        print(f"nonexch: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"nonexch: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NonExchError, ValueError) as exc:
        print(f"nonexch: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
