"""Chebyshev polynomials of the first kind and centred trace statistics.

``t_k(A) = (1/N) Tr T_k(A) - int T_k rho_sc`` for a spectrum ``A``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Spectrum


def chebyshev_t(k: int, x):
    """``T_k(x) = cos(k arccos x)`` for ``|x| <= 1``."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1):
        raise ValueError("chebyshev_t is defined here on [-1, 1] only")
    return np.cos(k * np.arccos(x))


def chebyshev_t_recurrence(k: int, x):
    """Three-term recurrence ``T_{k+1} = 2x T_k - T_{k-1}``; used as a cross-check."""
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x.copy()
    if k == 0:
        return prev
    for _ in range(k - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur


def chebyshev_t_real(k: int, x):
    """``T_k`` on the whole real line; hyperbolic form outside [-1, 1]."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) <= 1
    out = np.empty_like(x)
    out[inside] = np.cos(k * np.arccos(x[inside]))
    xo = x[~inside]
    sign = np.where(xo < 0, (-1.0) ** k, 1.0)
    out[~inside] = sign * np.cosh(k * np.arccosh(np.abs(xo)))
    return out


def semicircle_chebyshev_moment(k: int) -> float:
    """``int T_k(x) rho_sc(x) dx``: 1, -1/2 at k = 0, 2 and zero otherwise."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    return {0: 1.0, 2: -0.5}.get(k, 0.0)


def semicircle_moments(K: int) -> np.ndarray:
    m = np.zeros(K + 1)
    m[0] = 1.0
    if K >= 2:
        m[2] = -0.5
    return m


@dataclass(frozen=True)
class ChebyshevTraces:
    """``values[k] = t_k`` for ``k = 0..K``; ``values[0]`` is always 0."""

    K: int
    values: np.ndarray
    clipped: bool
    N: int

    def __post_init__(self) -> None:
        if self.values.shape != (self.K + 1,):
            raise ValueError("values must have length K + 1")

    def normalized_traces(self) -> np.ndarray:
        """``(1/N) Tr T_k`` for ``k = 0..K``."""
        return self.values + semicircle_moments(self.K)


def _trace_matrix(x: np.ndarray, K: int) -> np.ndarray:
    """Rows ``T_k(x_i)`` for ``k = 0..K``, shape (K+1, N)."""
    k = np.arange(K + 1)[:, None]
    inside = np.abs(x) <= 1
    if np.all(inside):
        return np.cos(k * np.arccos(x)[None, :])
    out = np.empty((K + 1, x.size))
    out[:, inside] = np.cos(k * np.arccos(x[inside])[None, :])
    xo = x[~inside]
    sign = np.where(xo < 0, -1.0, 1.0)[None, :] ** k
    out[:, ~inside] = sign * np.cosh(k * np.arccosh(np.abs(xo))[None, :])
    return out


def traces(s: Spectrum, K: int, clipped: bool = True) -> ChebyshevTraces:
    """Centred Chebyshev traces ``t_1..t_K`` of a spectrum.

    With ``clipped=True`` eigenvalues are first clipped into [-1, 1] and the
    angle form ``cos(k arccos x)`` is used throughout (bounded, stable for
    large k). With ``clipped=False`` eigenvalues outside [-1, 1] go through
    the hyperbolic form.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    x = s.clipped().values if clipped else s.values
    tr = _trace_matrix(x, K).sum(axis=1) / s.N
    vals = tr - semicircle_moments(K)
    return ChebyshevTraces(K, vals, clipped, s.N)


def clipping_gap(s: Spectrum, K: int) -> float:
    """``max_{k<=K} |t_k(H) - t_k(H_clipped)|`` (diagnostic)."""
    if np.max(np.abs(s.values)) > 2:
        raise ValueError("eigenvalue beyond 2 in modulus; ensemble looks broken")
    out = s.values[np.abs(s.values) > 1]
    if out.size == 0:
        return 0.0
    # only eigenvalues outside [-1, 1] contribute; T_k(+-1) = (+-1)^k
    k = np.arange(1, K + 1)[:, None]
    edge = np.sign(out)[None, :] ** k
    diff = (_trace_matrix(out, K)[1:] - edge).sum(axis=1) / s.N
    return float(np.max(np.abs(diff)))
