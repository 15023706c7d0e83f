"""Goodness-of-fit statistics for Wigner and CUE spectra.

Each statistic with a truncated series carries an explicit tail bound, and
most have a second, independent computation path used for cross-checks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import polygamma

from .chebyshev import ChebyshevTraces
from .smoothing import (
    MesoscopicScale,
    _leggauss,
    smoothed_esd_direct,
    smoothed_reference_quadrature,
)
from .spectral import ClippedSpectrum, Spectrum, UnitarySpectrum, clip, semicircle_cdf

PI2 = np.pi**2


@dataclass(frozen=True)
class StatValue:
    name: str
    value: float
    N: int
    params: dict = field(default_factory=dict)
    truncation_bound: Optional[float] = None

    CSV_HEADER = "name,N,alpha,seed,replica,value,truncation_bound"

    def csv_row(self) -> str:
        alpha = self.params.get("alpha", "")
        seed = self.params.get("seed", "")
        replica = self.params.get("replica", "")
        bound = "" if self.truncation_bound is None else repr(float(self.truncation_bound))
        return f"{self.name},{self.N},{alpha},{seed},{replica},{float(self.value)!r},{bound}"


class QuadratureError(RuntimeError):
    def __init__(self, msg: str, last: float, previous: float):
        super().__init__(f"{msg}: last iterates {previous!r}, {last!r}")
        self.last = last
        self.previous = previous


# ---------------------------------------------------------------- CvM and KS


def cvm_exact(s: Spectrum) -> StatValue:
    """``A_N = (1/N) sum_i (F(lambda_i) - (N - i + 1/2)/N)^2 + 1/(12 N^2)``."""
    N = s.N
    i = np.arange(1, N + 1)
    dev = semicircle_cdf(clip(s.values)) - (N - i + 0.5) / N
    return StatValue("cvm", float(np.mean(dev * dev) + 1.0 / (12.0 * N * N)), N)


def _semicircle_cdf_angle(phi):
    return 1.0 + (np.sin(phi) * np.cos(phi) - phi) / np.pi


def cvm_quadrature(s: Spectrum, nodes: int = 16) -> StatValue:
    """``int (F_N - F)^2 dF`` integrated piecewise over the constancy intervals of F_N.

    Each interval is mapped to the angle ``t = cos(phi)`` where the weight
    ``dF = (2/pi) sin^2(phi) dphi`` is smooth; Gauss-Legendre with ``nodes``
    and ``2 nodes`` points must agree or the call fails.
    """
    N = s.N
    asc = clip(s.values[::-1])
    breaks = np.concatenate([[-1.0], asc, [1.0]])
    level = np.arange(N + 1) / N
    hi_phi = np.arccos(breaks[:-1])
    lo_phi = np.arccos(breaks[1:])

    def run(n):
        u, w = _leggauss(n)
        half = 0.5 * (hi_phi - lo_phi)[:, None]
        phi = lo_phi[:, None] + half * (u + 1.0)
        diff = level[:, None] - _semicircle_cdf_angle(phi)
        dens = 2.0 / np.pi * np.sin(phi) ** 2
        return float(np.sum(diff * diff * dens * half * w))

    a, b = run(nodes), run(2 * nodes)
    if abs(a - b) > 1e-13 * max(1.0, abs(b)):
        raise QuadratureError("CvM quadrature did not converge", b, a)
    return StatValue("cvm_quadrature", b, N)


def ks_statistic(s: Spectrum) -> StatValue:
    """``sup_t |F_N(t) - F(t)|`` evaluated exactly at the jump points of F_N."""
    N = s.N
    asc = s.values[::-1]
    upper = np.searchsorted(asc, asc, side="right") / N
    lower = np.searchsorted(asc, asc, side="left") / N
    F = semicircle_cdf(asc)
    k = max(np.max(np.abs(F - upper)), np.max(np.abs(F - lower)))
    return StatValue("ks", float(k), N)


# ---------------------------------------------------------------- mesoscopic CvM


def trilinear_form(t: np.ndarray, n: int, r: float) -> np.ndarray:
    """``(2/pi^2) sum r^{2k} t_k^2/k^2 - (2/pi^2) sum r^{2k+2} t_k t_{k+2}/(k(k+2)) + r^2 t_1^2/pi^2``.

    ``t`` holds ``t_0..t_K`` along its last axis (``K >= n + 2``).
    """
    t = np.asarray(t, dtype=float)
    if t.shape[-1] < n + 3:
        raise ValueError(f"trilinear form at n={n} needs t_0..t_{n + 2}")
    k = np.arange(1, n + 1)
    tk = t[..., 1 : n + 1]
    tk2 = t[..., 3 : n + 3]
    diag = np.sum(r ** (2 * k) / k**2 * tk * tk, axis=-1)
    off = np.sum(r ** (2 * k + 2) / (k * (k + 2)) * tk * tk2, axis=-1)
    return 2.0 / PI2 * diag - 2.0 / PI2 * off + r * r / PI2 * t[..., 1] ** 2


def mcvm_tail_bound(scale: MesoscopicScale, n: int) -> float:
    # |t_k| <= 2 and sum_{k>n} r^{2k}/k^2 <= r^{2n+2}/((n+1)^2 (1 - r^2)); same for 1/(k(k+2))
    r2 = scale.r**2
    geo = r2 ** (n + 1) / ((n + 1) ** 2 * (1.0 - r2))
    return 4.0 * 2.0 / PI2 * 2.0 * geo


def mcvm_series(scale: MesoscopicScale, traces: ChebyshevTraces) -> StatValue:
    n = scale.n_omega
    if not traces.clipped:
        raise ValueError("mcvm_series needs traces of the clipped spectrum")
    if traces.K < n + 2:
        raise ValueError(f"need traces up to degree n_omega + 2 = {n + 2}, got K={traces.K}")
    value = float(trilinear_form(traces.values, n, scale.r))
    return StatValue(
        "mcvm", value, traces.N, {"alpha": scale.alpha, "omega": scale.omega}, mcvm_tail_bound(scale, n)
    )


def mcvm_quadrature(
    scale: MesoscopicScale, s: Spectrum, n0: int = 2048, rtol: float = 1e-10, nmax: int = 2**14
) -> StatValue:
    """``int (F_{N,omega} - F_omega)^2 dF`` by direct quadrature in ``t = cos(phi)``.

    Smoothed CDFs come from the closed-form Poisson primitive (empirical) and
    a nested Gauss-Legendre integral (reference), so no Chebyshev series is
    involved.
    """
    lam = s.clipped().values
    prev = None
    n = n0
    while True:
        u, w = _leggauss(n)
        phi = 0.5 * np.pi * (u + 1.0)
        wt = 0.5 * np.pi * w * (2.0 / np.pi) * np.sin(phi) ** 2
        t = np.cos(phi)
        diff = smoothed_esd_direct(scale, lam, t) - _reference_on_nodes(scale.r, n)
        val = float(np.sum(diff * diff * wt))
        if prev is not None and abs(val - prev) <= rtol * abs(val) + 1e-18:
            return StatValue("mcvm_quadrature", val, s.N, {"alpha": scale.alpha, "omega": scale.omega})
        if n >= nmax:
            raise QuadratureError("MCvM quadrature did not converge", val, prev if prev is not None else val)
        prev = val
        n *= 2


_REF_CACHE: dict = {}


def _reference_on_nodes(r: float, n: int) -> np.ndarray:
    key = (r, n)
    if key not in _REF_CACHE:
        u, _ = _leggauss(n)
        t = np.cos(0.5 * np.pi * (u + 1.0))
        _REF_CACHE[key] = smoothed_reference_quadrature(MesoscopicScale.from_omega(1.0 - r, 2), t, n=2048)
    return _REF_CACHE[key]


def partial_sum_guard(N: int) -> int:
    return int(np.floor(N ** (1.0 / 3.0) / 2.0))


def mcvm_partial_sum(
    scale: MesoscopicScale, traces_unclipped: ChebyshevTraces, n_terms: Optional[int] = None
) -> StatValue:
    """Partial-sum statistic on UNCLIPPED traces, without the ``r`` damping.

    Sensitive to outliers, unlike the clipped statistics. ``n_terms`` defaults
    to ``scale.n_omega`` and may not exceed ``N^{1/3}/2``.
    """
    n = scale.n_omega if n_terms is None else int(n_terms)
    guard = partial_sum_guard(traces_unclipped.N)
    if n < 1 or n > guard:
        raise ValueError(f"partial sum needs 1 <= n_terms <= N^(1/3)/2 = {guard}, got {n}")
    if traces_unclipped.clipped:
        raise ValueError("mcvm_partial_sum needs traces of the unclipped spectrum")
    if traces_unclipped.K < n + 2:
        raise ValueError(f"need traces up to degree {n + 2}, got K={traces_unclipped.K}")
    value = float(trilinear_form(traces_unclipped.values, n, 1.0))
    return StatValue("mcvm_partial", value, traces_unclipped.N, {"alpha": scale.alpha, "n_terms": n})


# ---------------------------------------------------------------- CUE


@dataclass(frozen=True)
class PowerTraces:
    """``values[j] = Tr U^j`` for ``j = 0..J``."""

    J: int
    values: np.ndarray
    N: int


def power_traces_array(phases: np.ndarray, J: int) -> np.ndarray:
    """``Tr U^j`` for ``j = 0..J`` along a new last axis; phases on the last axis."""
    phases = np.asarray(phases, dtype=float)
    j = np.arange(J + 1)
    return np.exp(1j * phases[..., None, :] * j[:, None]).sum(axis=-1)


def power_traces(u: UnitarySpectrum, J: int) -> PowerTraces:
    if J < 1:
        raise ValueError("J must be at least 1")
    return PowerTraces(J, power_traces_array(u.phases, J), u.N)


def cue_series_tail(J: int) -> float:
    """``4 sum_{j>J} j^-2`` (at most ``4/J``)."""
    return float(4.0 * polygamma(1, J + 1))


def cue_cvm_series_array(mod2: np.ndarray, N: int) -> np.ndarray:
    """Series form from ``|Tr U^j|^2`` for ``j = 1..J`` on the last axis."""
    J = mod2.shape[-1]
    j = np.arange(1, J + 1)
    return 4.0 / N**2 * np.sum(mod2 / j**2, axis=-1)


def cue_cvm_series(p: PowerTraces, N: int) -> StatValue:
    mod2 = np.abs(p.values[1:]) ** 2
    return StatValue("cue_series", float(cue_cvm_series_array(mod2, N)), N, {"J": p.J}, cue_series_tail(p.J))


def cue_cvm_exact_array(phases: np.ndarray) -> np.ndarray:
    """Double-integral CUE statistic for sorted phases on the last axis.

    Uses ``int int (g(y) - g(x))^2 = 4 pi int g^2 - 2 (int g)^2`` with
    ``g = F_N - x/(2 pi)``, which is linear between consecutive phases.
    """
    phases = np.asarray(phases, dtype=float)
    N = phases.shape[-1]
    zero = np.zeros(phases.shape[:-1] + (1,))
    breaks = np.concatenate([zero, phases, zero + 2 * np.pi], axis=-1)
    a, b = breaks[..., :-1], breaks[..., 1:]
    c = np.arange(N + 1) / N
    ga = c - a / (2 * np.pi)
    gb = c - b / (2 * np.pi)
    I1 = np.sum(0.5 * (ga + gb) * (b - a), axis=-1)
    I2 = np.sum((2 * np.pi / 3.0) * (ga**3 - gb**3), axis=-1)
    return 4 * np.pi * I2 - 2 * I1 * I1


def cue_cvm_exact(u: UnitarySpectrum) -> StatValue:
    return StatValue("cue_exact", float(cue_cvm_exact_array(u.phases)), u.N)
