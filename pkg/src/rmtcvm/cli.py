"""Command-line front end.

Exit codes: 0 on success, 1 on invalid input, 2 when a computation fails.
Every file is written under ``--out``; without ``--out`` results go to stdout.
"""
from __future__ import annotations

import argparse
import shlex
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import ensembles
from .limitlaw import constants, kde_curve, sample_cue_limit_batch, sample_wigner_limit_batch
from .montecarlo import (
    CUE_STATS,
    ExperimentConfig,
    format_reports,
    reproduce_figures,
    run_replicas,
    verify_cue_covariances,
    verify_trace_moments,
    write_csv,
    write_figure_bundle,
)
from .seeding import SeedSpec
from .spectral import Spectrum, UnitarySpectrum, eigenphases, eigenvalues
from .statistics import StatValue

DEFAULTS = {
    "ensemble": "goe",
    "n": 100,
    "replicas": 1,
    "seed": 0,
    "truncation": None,
    "statistic": "cvm",
    "workers": 1,
    "k": 4,
    "j": 16,
    "case": "gaussian",
    "limit_draws": 100_000,
    "strength": 0.0,
}
INT_KEYS = {"n", "replicas", "seed", "truncation", "workers", "k", "j", "limit_draws", "beta", "partial_terms"}
FLOAT_KEYS = {"alpha", "sigma2", "c4", "strength", "ks_threshold"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rmtcvm", description="Cramer-von Mises statistics of random matrix spectra")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, *, ensemble=True):
        if ensemble:
            p.add_argument("--ensemble", choices=["goe", "gue", "rademacher", "cue"])
        p.add_argument("--n", type=int)
        p.add_argument("--replicas", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--out")
        p.add_argument("--config", help="flat key=value file; flags take precedence")

    p = sub.add_parser("sample", help="draw spectra")
    common(p)
    p.add_argument("--strength", type=float, help="rank-one deformation strength")

    p = sub.add_parser("stat", help="compute statistics per replica")
    common(p)
    p.add_argument("--statistic", help="comma separated: cvm, cvm_quadrature, ks, mcvm, mcvm_quadrature, "
                                       "mcvm_partial, cue_series, cue_exact")  # fmt: skip
    p.add_argument("--alpha", type=float)
    p.add_argument("--truncation", type=int, help="series truncation J for cue_series")
    p.add_argument("--partial-terms", dest="partial_terms", type=int)
    p.add_argument("--strength", type=float)

    p = sub.add_parser("verify-moments", help="Chebyshev trace moments against their limits")
    common(p)
    p.add_argument("--k", type=int, help="highest degree")

    p = sub.add_parser("verify-cue", help="Haar power-trace moments and covariances")
    common(p, ensemble=False)
    p.add_argument("--j", type=int, help="highest power")

    p = sub.add_parser("reproduce-fig", help="centred N^2 A_N against the limit law")
    common(p, ensemble=False)
    p.add_argument("--case", choices=["gaussian", "rademacher"])
    p.add_argument("--truncation", type=int, help="series truncation of the limit law")
    p.add_argument("--limit-draws", dest="limit_draws", type=int)
    p.add_argument("--ks-threshold", dest="ks_threshold", type=float)

    p = sub.add_parser("limit-sample", help="draws from the limit law")
    common(p)
    p.add_argument("--beta", type=int, choices=[1, 2])
    p.add_argument("--sigma2", type=float)
    p.add_argument("--c4", type=float)
    p.add_argument("--truncation", type=int, help="series truncation K")
    return parser


def read_config(path: str | Path) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, val = (x.strip() for x in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key in INT_KEYS:
            values[key] = int(val)
        elif key in FLOAT_KEYS:
            values[key] = float(val)
        else:
            values[key] = val
    return values


def resolve(args: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    if getattr(args, "config", None):
        opts.update(read_config(args.config))
    opts.update({k: v for k, v in vars(args).items() if v is not None})
    return opts


def _emit(opts: dict, name: str, header: str, rows: list[str], command: str) -> None:
    if opts.get("out"):
        write_csv(Path(opts["out"]) / name, header, rows, command)
    else:
        print(header)
        for row in rows:
            print(row)


def _config(opts: dict, statistics: tuple = ("cvm",)) -> ExperimentConfig:
    return ExperimentConfig(
        ensemble=opts["ensemble"],
        N=opts["n"],
        replicas=opts["replicas"],
        master_seed=opts["seed"],
        alpha=opts.get("alpha"),
        statistics=statistics,
        truncation=opts["truncation"] if opts["truncation"] is not None else 300,
        strength=opts["strength"],
        partial_terms=opts.get("partial_terms"),
        limit_draws=opts["limit_draws"],
        workers=opts["workers"],
        out=opts.get("out"),
    )


def cmd_sample(opts: dict, command: str) -> None:
    cfg = _config(opts, ("cue_exact",) if opts["ensemble"] == "cue" else ("cvm",))
    out = Path(opts["out"]) if opts.get("out") else None
    for i in range(cfg.replicas):
        seed = SeedSpec(cfg.master_seed, i)
        if cfg.ensemble == "cue":
            spec = eigenphases(ensembles.sample_haar_unitary(cfg.N, seed))
            values, header = spec.phases, "phase"
        else:
            if cfg.strength:
                H = ensembles.sample_deformed_wigner(cfg.params, cfg.strength, seed, seed)
            else:
                H = ensembles.sample_wigner(cfg.params, seed)
            values, header = eigenvalues(H).values, "eigenvalue"
        rows = [repr(float(v)) for v in values]
        if out is None:
            print(f"# replica {i}")
            print(header)
            print("\n".join(rows))
        else:
            write_csv(out / f"spectrum_{i:05d}.csv", header, rows, command)


def cmd_stat(opts: dict, command: str) -> None:
    stats = tuple(s.strip() for s in str(opts["statistic"]).split(",") if s.strip())
    if opts["ensemble"] == "cue" and stats == ("cvm",):
        stats = ("cue_exact",)
    cfg = _config(opts, stats)
    results = run_replicas(cfg)
    _emit(opts, "stat.csv", StatValue.CSV_HEADER, [v.csv_row() for v in results], command)
    if opts.get("out"):
        for name in stats:
            rows = [f"{v.params['replica']},{v.value!r}" for v in results if v.name == name]
            write_csv(Path(opts["out"]) / f"samples_{name}.csv", "replica,value", rows, command)


def _report(opts: dict, reports, command: str, z_max: float) -> None:
    print(format_reports(reports, z_max))
    if opts.get("out"):
        write_csv(Path(opts["out"]) / "moments.csv", "name,estimate,se,target,z", [r.csv_row() for r in reports], command)


def cmd_verify_moments(opts: dict, command: str) -> None:
    cfg = _config(opts)
    _report(opts, verify_trace_moments(cfg, opts["k"]), command, 3.0)


def cmd_verify_cue(opts: dict, command: str) -> None:
    reports = verify_cue_covariances(opts["n"], opts["j"], opts["replicas"], opts["seed"], workers=opts["workers"])
    _report(opts, reports, command, 5.0)


def cmd_reproduce_fig(opts: dict, command: str) -> None:
    opts = dict(opts, ensemble="goe" if opts["case"] == "gaussian" else "rademacher")
    report = reproduce_figures(_config(opts), ks_threshold=opts.get("ks_threshold", 0.05))
    print("dist,n_a,n_b,pass")
    print(report.ks.csv_row())
    print(report.control.csv_row())
    if opts.get("out"):
        write_figure_bundle(report, opts["out"], command)


def cmd_limit_sample(opts: dict, command: str) -> None:
    K = opts["truncation"] if opts["truncation"] is not None else 300
    seed = SeedSpec(opts["seed"], 0)
    if opts["ensemble"] == "cue" and "beta" not in opts:
        draws = sample_cue_limit_batch(K, opts["replicas"], seed)
    else:
        if "beta" in opts:
            beta = opts["beta"]
            sigma2 = opts.get("sigma2", 3.0 - beta)
            c4 = opts.get("c4", 0.0)
        else:
            p = _config(opts).params
            beta, sigma2, c4 = p.beta, p.sigma2, p.c4
        draws = sample_wigner_limit_batch(constants(beta, sigma2, c4), K, opts["replicas"], seed)
    _emit(opts, "limit_samples.csv", "replica,value", [f"{i},{v!r}" for i, v in enumerate(draws.tolist())], command)
    if opts.get("out") and draws.size > 1:
        x, y = kde_curve(draws)
        write_csv(Path(opts["out"]) / "limit_kde.csv", "x,density", [f"{a!r},{b!r}" for a, b in zip(x.tolist(), y.tolist())], command)


COMMANDS = {
    "sample": cmd_sample,
    "stat": cmd_stat,
    "verify-moments": cmd_verify_moments,
    "verify-cue": cmd_verify_cue,
    "reproduce-fig": cmd_reproduce_fig,
    "limit-sample": cmd_limit_sample,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    command = "rmtcvm " + shlex.join(argv)
    try:
        args = build_parser().parse_args(argv)
        opts = resolve(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        COMMANDS[args.command](opts, command)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
