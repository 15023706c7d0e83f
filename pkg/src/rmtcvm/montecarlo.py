"""Reproducible Monte Carlo harness.

Replica ``i`` always uses ``SeedSpec(master_seed, i)``; work is split into
contiguous index blocks, optionally spread over worker processes, and the
results are reassembled in index order, so the output does not depend on the
number of workers.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import ensembles
from .chebyshev import traces
from .ensembles import EnsembleParams, sample_deformed_wigner, sample_haar_batch, sample_wigner
from .limitlaw import constants, kde_curve, sample_wigner_limit_batch
from .seeding import SeedSpec
from .smoothing import MesoscopicScale
from .spectral import eigenphases_batch, eigenvalues
from .statistics import (
    StatValue,
    cue_cvm_exact_array,
    cue_cvm_series_array,
    cue_series_tail,
    cvm_exact,
    cvm_quadrature,
    ks_statistic,
    mcvm_partial_sum,
    mcvm_quadrature,
    mcvm_series,
    power_traces_array,
)

WIGNER_STATS = ("cvm", "cvm_quadrature", "ks", "mcvm", "mcvm_quadrature", "mcvm_partial")
CUE_STATS = ("cue_series", "cue_exact")
ENSEMBLES = ("goe", "gue", "rademacher", "cue")


class ReplicaError(RuntimeError):
    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"replica {index} failed: {cause!r}")
        self.index = index


@dataclass(frozen=True)
class ExperimentConfig:
    ensemble: str
    N: int
    replicas: int = 1
    master_seed: int = 0
    alpha: Optional[float] = None
    statistics: tuple = ("cvm",)
    truncation: int = 300
    strength: float = 0.0
    partial_terms: Optional[int] = None
    limit_draws: int = 100_000
    workers: int = 1
    out: Optional[str] = None

    def __post_init__(self) -> None:
        if self.ensemble not in ENSEMBLES:
            raise ValueError(f"unknown ensemble {self.ensemble!r}; choose from {ENSEMBLES}")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        known = WIGNER_STATS + CUE_STATS
        for s in self.statistics:
            if s not in known:
                raise ValueError(f"unknown statistic {s!r}")
            if (s in CUE_STATS) != (self.ensemble == "cue"):
                raise ValueError(f"statistic {s!r} is incompatible with ensemble {self.ensemble!r}")
            if s.startswith("mcvm") and self.alpha is None:
                raise ValueError(f"statistic {s!r} needs alpha")
        if self.alpha is not None:
            MesoscopicScale.from_alpha(self.alpha, self.N)

    @property
    def params(self) -> EnsembleParams:
        if self.ensemble == "goe":
            return ensembles.gaussian(self.N, 1)
        if self.ensemble == "gue":
            return ensembles.gaussian(self.N, 2)
        if self.ensemble == "rademacher":
            return ensembles.rademacher(self.N)
        raise ValueError("CUE has no Wigner parameters")

    @property
    def scale(self) -> Optional[MesoscopicScale]:
        return None if self.alpha is None else MesoscopicScale.from_alpha(self.alpha, self.N)


@dataclass(frozen=True)
class MomentReport:
    name: str
    estimate: float
    se: float
    target: float
    source: str = ""

    @property
    def z(self) -> float:
        return (self.estimate - self.target) / self.se if self.se > 0 else float("inf")

    @property
    def rel_error(self) -> float:
        return abs(self.estimate - self.target) / abs(self.target) if self.target else float("inf")

    def csv_row(self) -> str:
        return f"{self.name},{self.estimate!r},{self.se!r},{self.target!r},{self.z!r}"


@dataclass(frozen=True)
class TwoSampleResult:
    distance: float
    n_a: int
    n_b: int
    threshold: float
    passed: bool

    def csv_row(self) -> str:
        return f"{self.distance!r},{self.n_a},{self.n_b},{int(self.passed)}"


# ---------------------------------------------------------------- fan-out


def _blocks(n: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, n))
    edges = np.linspace(0, n, parts + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def map_replicas(fn: Callable, args: tuple, replicas: int, workers: int = 1) -> list:
    """Run ``fn(*args, start, stop)`` over index blocks and concatenate in order.

    ``fn`` must be a module-level function returning a list with one entry per
    replica in ``range(start, stop)``.
    """
    if workers <= 1:
        return fn(*args, 0, replicas)
    blocks = _blocks(replicas, 4 * workers)
    out: list = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *args, a, b) for a, b in blocks]
        for fut in futures:
            out.extend(fut.result())
    return out


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)


def _wigner_block(cfg: ExperimentConfig, start: int, stop: int) -> list[list[StatValue]]:
    params = cfg.params
    scale = cfg.scale
    rows = []
    for i in range(start, stop):
        seed = SeedSpec(cfg.master_seed, i)
        try:
            if cfg.strength:
                H = sample_deformed_wigner(params, cfg.strength, seed, seed)
            else:
                H = sample_wigner(params, seed)
            s = eigenvalues(H)
            rows.append([_tag(v, cfg, i) for v in _wigner_stats(cfg, s, scale)])
        except Exception as exc:  # fail fast with the replica index attached
            raise ReplicaError(i, exc) from exc
    return rows


def _wigner_stats(cfg: ExperimentConfig, s, scale) -> list[StatValue]:
    out = []
    for name in cfg.statistics:
        if name == "cvm":
            out.append(cvm_exact(s))
        elif name == "cvm_quadrature":
            out.append(cvm_quadrature(s))
        elif name == "ks":
            out.append(ks_statistic(s))
        elif name == "mcvm":
            out.append(mcvm_series(scale, traces(s, scale.n_omega + 2)))
        elif name == "mcvm_quadrature":
            out.append(mcvm_quadrature(scale, s))
        elif name == "mcvm_partial":
            n = cfg.partial_terms
            K = (n if n is not None else scale.n_omega) + 2
            out.append(mcvm_partial_sum(scale, traces(s, K, clipped=False), n))
    return out


def _tag(v: StatValue, cfg: ExperimentConfig, i: int) -> StatValue:
    params = dict(v.params)
    params.update(seed=cfg.master_seed, replica=i)
    if cfg.alpha is not None:
        params["alpha"] = cfg.alpha
    return replace(v, params=params)


def _cue_block(cfg: ExperimentConfig, start: int, stop: int) -> list[list[StatValue]]:
    phases = cue_phases(cfg.N, cfg.master_seed, start, stop)
    rows = []
    for offset, ph in enumerate(phases):
        i = start + offset
        row = []
        for name in cfg.statistics:
            if name == "cue_exact":
                row.append(StatValue("cue_exact", float(cue_cvm_exact_array(ph)), cfg.N))
            else:
                mod2 = np.abs(power_traces_array(ph, cfg.truncation)[1:]) ** 2
                val = float(cue_cvm_series_array(mod2, cfg.N))
                row.append(StatValue("cue_series", val, cfg.N, {"J": cfg.truncation}, cue_series_tail(cfg.truncation)))
        rows.append([_tag(v, cfg, i) for v in row])
    return rows


def run_replicas(cfg: ExperimentConfig) -> list[StatValue]:
    """All selected statistics for every replica, ordered by replica index."""
    fn = _cue_block if cfg.ensemble == "cue" else _wigner_block
    rows = map_replicas(fn, (cfg,), cfg.replicas, cfg.workers)
    return [v for row in rows for v in row]


def values_of(results: Sequence[StatValue], name: str) -> np.ndarray:
    return np.array([v.value for v in results if v.name == name])


# ---------------------------------------------------------------- CUE batches


def cue_phases(N: int, master_seed: int, start: int, stop: int, chunk: int = 5000) -> np.ndarray:
    # keep each stacked batch of N x N complex matrices around 64 MB
    chunk = max(1, min(chunk, 4_000_000 // (N * N)))
    out = []
    for a in range(start, stop, chunk):
        b = min(stop, a + chunk)
        seeds = [SeedSpec(master_seed, i) for i in range(a, b)]
        out.append(eigenphases_batch(sample_haar_batch(N, seeds)))
    return np.concatenate(out, axis=0)


def _cue_moment_block(N: int, J: int, master_seed: int, start: int, stop: int) -> list:
    phases = cue_phases(N, master_seed, start, stop)
    rows = []
    for a in range(0, len(phases), 2000):
        ph = phases[a : a + 2000]
        mod2 = np.abs(power_traces_array(ph, J)[..., 1:]) ** 2
        exact = cue_cvm_exact_array(ph)
        rows.extend(np.column_stack([mod2, exact]))
    return rows


def cue_trace_samples(N: int, J: int, replicas: int, seed: int, workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """``|Tr U^j|^2`` (shape R x J) and the exact CUE statistic (length R)."""
    rows = np.array(map_replicas(_cue_moment_block, (N, J, seed), replicas, workers))
    return rows[:, :J], rows[:, J]


# ---------------------------------------------------------------- estimators


def mean_report(name: str, x: np.ndarray, target: float, source: str = "") -> MomentReport:
    x = np.asarray(x, dtype=float)
    se = float(np.std(x, ddof=1) / np.sqrt(x.size)) if x.size > 1 else 0.0
    return MomentReport(name, float(np.mean(x)), se, float(target), source)


def variance_report(name: str, x: np.ndarray, target: float, source: str = "") -> MomentReport:
    """Sample variance with the large-sample SE ``sqrt((mu_4 - s^4)/n)``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    c = x - x.mean()
    s2 = float(np.sum(c * c) / (n - 1))
    mu4 = float(np.mean(c**4))
    se = float(np.sqrt(max(mu4 - s2 * s2, 0.0) / n))
    return MomentReport(name, s2, se, float(target), source)


def covariance_report(name: str, x: np.ndarray, y: np.ndarray, target: float, source: str = "") -> MomentReport:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    prod = (x - x.mean()) * (y - y.mean())
    est = float(np.sum(prod) / (n - 1))
    se = float(np.std(prod, ddof=1) / np.sqrt(n))
    return MomentReport(name, est, se, float(target), source)


# ---------------------------------------------------------------- trace moments


def bai_yao_mean(k: int, beta: int, sigma2: float, c4: float) -> float:
    """Limit mean of ``N t_k``."""
    return (2 - beta) / 4 * (1 + (-1) ** k) + 0.5 * (sigma2 + beta - 3) * (k == 2) + 8 * c4 * (k == 4)


def bai_yao_variance(k: int, beta: int, sigma2: float, c4: float) -> float:
    """Limit variance of ``N t_k``."""
    return 0.25 * ((3 - beta) * k + (sigma2 + beta - 3) * (k == 1) + 32 * c4 * (k == 2))


def second_moment_target(k: int, N: int, beta: int, sigma2: float, c4: float) -> float:
    """Leading order of ``E t_k^2``: variance plus squared mean, both over ``N^2``."""
    return (bai_yao_variance(k, beta, sigma2, c4) + bai_yao_mean(k, beta, sigma2, c4) ** 2) / N**2


def cross_moment_target(k: int, N: int, beta: int, sigma2: float, c4: float) -> float:
    """Leading order of ``E t_k t_{k+2}``."""
    return bai_yao_mean(k, beta, sigma2, c4) * bai_yao_mean(k + 2, beta, sigma2, c4) / N**2


def _trace_block(params: EnsembleParams, K: int, master_seed: int, start: int, stop: int) -> list:
    rows = []
    for i in range(start, stop):
        try:
            s = eigenvalues(sample_wigner(params, SeedSpec(master_seed, i)))
            rows.append([traces(s, K, clipped=False).values, traces(s, K, clipped=True).values])
        except Exception as exc:
            raise ReplicaError(i, exc) from exc
    return rows


def trace_pairs(params: EnsembleParams, K: int, replicas: int, seed: int, workers: int = 1) -> np.ndarray:
    """Unclipped and clipped ``t_0..t_K`` per replica, shape (R, 2, K+1)."""
    return np.array(map_replicas(_trace_block, (params, K, seed), replicas, workers))


def trace_samples(
    params: EnsembleParams, K: int, replicas: int, seed: int, workers: int = 1, clipped: bool = False
) -> np.ndarray:
    """``t_0..t_K`` for each replica, shape (R, K+1)."""
    return trace_pairs(params, K, replicas, seed, workers)[:, int(clipped)]


def trace_moment_limit(N: int) -> float:
    return 4.0 * N ** (1.0 / 3.0)


def verify_trace_moments(
    cfg: ExperimentConfig, K: int, samples: Optional[np.ndarray] = None
) -> list[MomentReport]:
    """Monte Carlo moments of the Chebyshev traces against their leading-order formulas."""
    if cfg.ensemble == "cue":
        raise ValueError("trace moments need a Wigner ensemble")
    N = cfg.N
    if K > trace_moment_limit(N):
        raise ValueError(f"K={K} exceeds 4 N^(1/3) = {trace_moment_limit(N):.1f}; formulas need k << N^(1/3)")
    p = cfg.params
    if samples is None:
        samples = trace_pairs(p, K + 2, cfg.replicas, cfg.master_seed, cfg.workers)
    # CLT targets use the raw traces; the second-moment expansion is for the clipped spectrum
    raw, clip = samples[:, 0], samples[:, 1]
    beta, s2, c4 = p.beta, p.sigma2, p.c4
    reports = []
    for k in range(1, K + 1):
        g = N * raw[:, k]
        reports.append(mean_report(f"E[N t_{k}]", g, bai_yao_mean(k, beta, s2, c4), "Bai-Yao limit mean"))
        reports.append(variance_report(f"Var[N t_{k}]", g, bai_yao_variance(k, beta, s2, c4), "Bai-Yao limit variance"))
        reports.append(
            mean_report(f"E[t_{k}^2]", clip[:, k] ** 2, second_moment_target(k, N, beta, s2, c4), "second moment, leading order")
        )
        reports.append(
            mean_report(
                f"E[t_{k} t_{k + 2}]",
                clip[:, k] * clip[:, k + 2],
                cross_moment_target(k, N, beta, s2, c4),
                "cross moment, leading order",
            )
        )
    return reports


# ---------------------------------------------------------------- CUE moments


def cue_covariance_target(j: int, k: int, N: int) -> float:
    """``Cov(|Tr U^j|^2, |Tr U^k|^2)`` for Haar unitaries."""
    d = float(j == k)
    if j > N or k > N:
        return N * N * d - max(N - abs(k - j), 0)
    if j + k <= N:
        return j * j * d
    return j * j * d + N - j - k


def default_covariance_pairs(N: int, J: int) -> list[tuple[int, int]]:
    pairs = [(2, 2), (N // 2 + 1, (N + 1) // 2), (N + 2, N + 4)]
    return [(j, k) for j, k in pairs if 1 <= j <= J and 1 <= k <= J]


def cue_expectation(N: int) -> float:
    """Exact ``E A^CUE = (4/N^2) H_N + (4/N) sum_{j>N} j^-2``."""
    from scipy.special import polygamma

    harmonic = float(np.sum(1.0 / np.arange(1, N + 1)))
    return 4.0 / N**2 * harmonic + 4.0 / N * float(polygamma(1, N + 1))


def cue_expectation_asymptotic(N: int) -> float:
    return 4.0 / N**2 * (np.log(N) + np.euler_gamma + 1.0)


def verify_cue_covariances(
    N: int, J: int, replicas: int, seed: int, pairs: Optional[list] = None, workers: int = 1
) -> list[MomentReport]:
    if J > 3 * N:
        raise ValueError("J must not exceed 3N")
    mod2, exact = cue_trace_samples(N, J, replicas, seed, workers)
    reports = []
    for j in range(1, J + 1):
        reports.append(mean_report(f"E|Tr U^{j}|^2", mod2[:, j - 1], min(j, N), "min(j, N)"))
    for j, k in pairs if pairs is not None else default_covariance_pairs(N, J):
        reports.append(
            covariance_report(f"Cov(|Tr U^{j}|^2,|Tr U^{k}|^2)", mod2[:, j - 1], mod2[:, k - 1],
                              cue_covariance_target(j, k, N), "CUE covariance table")
        )  # fmt: skip
    reports.append(mean_report("E[A_CUE]", exact, cue_expectation_asymptotic(N), "(4/N^2)(log N + gamma + 1)"))
    return reports


# ---------------------------------------------------------------- distributions


def two_sample_ks(a: np.ndarray, b: np.ndarray, threshold: Optional[float] = None) -> TwoSampleResult:
    """Two-sample Kolmogorov-Smirnov distance.

    Default threshold is the asymptotic 5% critical value
    ``1.36 sqrt((n_a + n_b)/(n_a n_b))``.
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    d = float(np.max(np.abs(fa - fb)))
    if threshold is None:
        threshold = 1.36 * np.sqrt((a.size + b.size) / (a.size * b.size))
    return TwoSampleResult(d, a.size, b.size, float(threshold), d <= threshold)


@dataclass
class FigureReport:
    case: str
    N: int
    cvm_centered: np.ndarray
    limit_centered: np.ndarray
    ks: TwoSampleResult
    control: TwoSampleResult
    kde_cvm: tuple = field(repr=False, default=())
    kde_limit: tuple = field(repr=False, default=())


def reproduce_figures(cfg: ExperimentConfig, ks_threshold: float = 0.05, control_threshold: float = 0.02) -> FigureReport:
    """Centred ``N^2 A_N`` against the centred mesoscopic limit law.

    Both samples are centred by their own means; the expectation of the
    unsmoothed statistic has no closed form.
    """
    if cfg.ensemble not in ("goe", "rademacher"):
        raise ValueError("figure reproduction covers the real Gaussian and Rademacher cases")
    cvm_cfg = replace(cfg, statistics=("cvm",), alpha=None)
    A = cfg.N**2 * values_of(run_replicas(cvm_cfg), "cvm")
    p = cfg.params
    c = constants(p.beta, p.sigma2, p.c4)
    # limit draws use replica slots beyond the matrix replicas
    L = sample_wigner_limit_batch(c, cfg.truncation, cfg.limit_draws, SeedSpec(cfg.master_seed, 10**9))
    L2 = sample_wigner_limit_batch(c, cfg.truncation, cfg.limit_draws, SeedSpec(cfg.master_seed, 10**9 + 1))
    Ac, Lc, L2c = A - A.mean(), L - L.mean(), L2 - L2.mean()
    ks = two_sample_ks(Ac, Lc, ks_threshold)
    control = two_sample_ks(Lc, L2c, control_threshold)
    lo, hi = min(Ac.min(), Lc.min()), max(Ac.max(), Lc.max())
    grid = np.linspace(lo, hi, 512)
    return FigureReport(cfg.ensemble, cfg.N, Ac, Lc, ks, control,
                        kde_curve(Ac, grid=grid), kde_curve(Lc, grid=grid))  # fmt: skip


# ---------------------------------------------------------------- output


def write_csv(path: str | Path, header: str, rows: Sequence[str], command: str = "") -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(f"# command: {command}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def write_figure_bundle(report: FigureReport, out: str | Path, command: str = "") -> list[Path]:
    out = Path(out)
    files = {
        "cvm_samples.csv": ("replica,value", [f"{i},{v!r}" for i, v in enumerate(report.cvm_centered.tolist())]),
        "limit_samples.csv": ("replica,value", [f"{i},{v!r}" for i, v in enumerate(report.limit_centered.tolist())]),
        "kde_cvm.csv": ("x,density", [f"{x!r},{y!r}" for x, y in zip(*(c.tolist() for c in report.kde_cvm))]),
        "kde_limit.csv": ("x,density", [f"{x!r},{y!r}" for x, y in zip(*(c.tolist() for c in report.kde_limit))]),
        "ks.csv": ("dist,n_a,n_b,pass", [report.ks.csv_row()]),
        "ks_control.csv": ("dist,n_a,n_b,pass", [report.control.csv_row()]),
    }
    written = []
    for name, (header, rows) in files.items():
        write_csv(out / name, header, rows, command)
        written.append(out / name)
    return written


def format_reports(reports: Sequence[MomentReport], z_max: Optional[float] = None) -> str:
    lines = [f"{'name':<34}{'estimate':>14}{'se':>12}{'target':>14}{'z':>8}"]
    for r in reports:
        flag = "" if z_max is None else ("  ok" if abs(r.z) <= z_max else "  FAIL")
        lines.append(f"{r.name:<34}{r.estimate:>14.6g}{r.se:>12.3g}{r.target:>14.6g}{r.z:>8.2f}{flag}")
    return "\n".join(lines)
