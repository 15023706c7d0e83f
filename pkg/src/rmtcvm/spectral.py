"""Spectra, the empirical spectral distribution and the semicircle law on [-1, 1]."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ensembles import HaarUnitary, WignerMatrix


@dataclass(frozen=True)
class Spectrum:
    """Real eigenvalues in decreasing order, ``values[0]`` is the largest."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("spectrum must be a nonempty 1-d array")
        if not np.all(np.isfinite(v)):
            raise ValueError("spectrum contains non-finite values")
        if np.any(np.diff(v) > 0):
            raise ValueError("spectrum must be sorted in decreasing order")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_unsorted(cls, values) -> Spectrum:
        return cls(np.sort(np.asarray(values, dtype=float))[::-1])

    @property
    def N(self) -> int:
        return self.values.size

    def clipped(self) -> ClippedSpectrum:
        return ClippedSpectrum(clip(self.values))

    def to_csv(self, path: str | Path, comment: str | None = None) -> None:
        with open(path, "w") as fh:
            if comment:
                fh.write(f"# {comment}\n")
            fh.write("eigenvalue\n")
            for x in self.values.tolist():
                fh.write(f"{x!r}\n")

    @classmethod
    def from_csv(cls, path: str | Path) -> Spectrum:
        rows = [ln.strip() for ln in open(path) if ln.strip() and not ln.startswith("#")]
        return cls.from_unsorted([float(x) for x in rows[1:]])


@dataclass(frozen=True)
class ClippedSpectrum(Spectrum):
    """Spectrum with every eigenvalue clipped into [-1, 1]."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if np.any(np.abs(self.values) > 1):
            raise ValueError("clipped spectrum has values outside [-1, 1]")

    def clipped(self) -> ClippedSpectrum:
        return self


@dataclass(frozen=True)
class UnitarySpectrum:
    """Eigenphases in [0, 2 pi), increasing."""

    phases: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.phases, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("phases must be a nonempty 1-d array")
        if np.any(p < 0) or np.any(p >= 2 * np.pi):
            raise ValueError("phases must lie in [0, 2 pi)")
        if np.any(np.diff(p) < 0):
            raise ValueError("phases must be sorted increasingly")
        p.setflags(write=False)
        object.__setattr__(self, "phases", p)

    @classmethod
    def from_unsorted(cls, phases) -> UnitarySpectrum:
        return cls(np.sort(wrap_phase(np.asarray(phases, dtype=float))))

    @property
    def N(self) -> int:
        return self.phases.size


def clip(x):
    return np.clip(x, -1.0, 1.0)


def wrap_phase(theta: np.ndarray) -> np.ndarray:
    out = np.mod(theta, 2 * np.pi)
    # mod can round up to exactly 2 pi for tiny negative inputs
    out[out >= 2 * np.pi] = 0.0
    return out


def eigenvalues(H: WignerMatrix | np.ndarray) -> Spectrum:
    A = H.entries if isinstance(H, WignerMatrix) else np.asarray(H)
    try:
        w = np.linalg.eigvalsh(A)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"symmetric eigensolver did not converge: {exc}") from exc
    return Spectrum(w[::-1].copy())


def eigenphases(U: HaarUnitary | np.ndarray, tol: float = 1e-8) -> UnitarySpectrum:
    A = U.entries if isinstance(U, HaarUnitary) else np.asarray(U)
    return UnitarySpectrum(eigenphases_batch(A[None], tol)[0])


def eigenphases_batch(U: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Sorted eigenphases for a stack of unitaries, shape (B, N)."""
    try:
        lam = np.linalg.eigvals(U)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed: {exc}") from exc
    dev = np.max(np.abs(np.abs(lam) - 1.0))
    if dev > tol:
        raise ValueError(f"eigenvalue modulus deviates from 1 by {dev:.3g}")
    return np.sort(wrap_phase(np.angle(lam)), axis=-1)


def semicircle_density(x):
    x = np.asarray(x, dtype=float)
    return 2.0 / np.pi * np.sqrt(np.clip(1.0 - x * x, 0.0, None))


def semicircle_cdf(x):
    """``F(x) = 1/2 + (x sqrt(1-x^2) + arcsin x)/pi`` on [-1, 1], 0 and 1 outside."""
    x = np.asarray(x, dtype=float)
    xc = clip(x)
    out = 0.5 + (xc * np.sqrt(1.0 - xc * xc) + np.arcsin(xc)) / np.pi
    out = np.where(x <= -1, 0.0, np.where(x >= 1, 1.0, out))
    return out[()] if out.ndim == 0 else out


def semicircle_quantile(p, tol: float = 1e-12):
    """Inverse of :func:`semicircle_cdf`.

    Bisection down to ``tol`` followed by a single Newton step; F' vanishes at
    the edges so Newton alone is not safe there.
    """
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    lo = np.full(p.shape, -1.0)
    hi = np.full(p.shape, 1.0)
    # 2^-42 < 1e-12 relative to the bracket width 2
    for _ in range(44):
        mid = 0.5 * (lo + hi)
        below = semicircle_cdf(mid) < p
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x = 0.5 * (lo + hi)
    dens = semicircle_density(x)
    safe = dens > 1e-6
    step = np.where(safe, (semicircle_cdf(x) - p) / np.where(safe, dens, 1.0), 0.0)
    x = np.clip(x - step, lo - tol, hi + tol)
    x = np.where(p == 0, -1.0, np.where(p == 1, 1.0, x))
    return x[()] if x.ndim == 0 else x


def quantile_grid(N: int) -> np.ndarray:
    """Decreasing quantiles ``mu_i`` with ``F(mu_i) = (N - i + 1/2)/N``."""
    i = np.arange(1, N + 1)
    return semicircle_quantile((N - i + 0.5) / N)


def esd_eval(s: Spectrum, t):
    """Fraction of eigenvalues ``<= t``."""
    asc = s.values[::-1]
    return np.searchsorted(asc, t, side="right") / s.N
