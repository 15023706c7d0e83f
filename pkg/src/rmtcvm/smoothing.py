"""Poisson-kernel smoothing on (-1, 1) and the smoothed distribution functions.

With ``x = cos(theta)`` and ``y = cos(phi)`` the two kernels are ordinary
circle Poisson kernels, ``P+(x, y) = P_r(theta - phi)`` and
``P-(x, y) = P_r(theta + phi)`` where ``P_r(u) = (1 - r^2)/(1 - 2 r cos u + r^2)``.
All integrals against ``dy / sqrt(1 - y^2)`` are done in the angle ``phi``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from .chebyshev import ChebyshevTraces, semicircle_moments


@dataclass(frozen=True)
class MesoscopicScale:
    """Smoothing scale ``omega`` (``= N^-alpha`` when built from ``alpha``)."""

    N: int
    omega: float
    alpha: Optional[float] = None

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError("N must be positive")
        if not 0 < self.omega < 1:
            raise ValueError(f"omega must lie in (0, 1), got {self.omega}")

    @classmethod
    def from_alpha(cls, alpha: float, N: int) -> MesoscopicScale:
        if not 0 < alpha < 1 / 3:
            raise ValueError(f"alpha must lie in (0, 1/3) for the mesoscopic limit theorem, got {alpha}")
        return cls(N, float(N) ** (-alpha), alpha)

    @classmethod
    def from_omega(cls, omega: float, N: int) -> MesoscopicScale:
        return cls(N, omega, None)

    @property
    def r(self) -> float:
        return 1.0 - self.omega

    @property
    def n_omega(self) -> int:
        return max(1, int(np.floor(np.log(self.N) ** 2 / self.omega)))

    @property
    def effective_alpha(self) -> float:
        if self.alpha is not None:
            return self.alpha
        return -np.log(self.omega) / np.log(self.N) if self.N > 1 else 0.0


class Truncated(NamedTuple):
    value: np.ndarray | float
    bound: float


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    domain: tuple[float, float]


@lru_cache(maxsize=64)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    u, w = _leggauss(n)
    half = 0.5 * (b - a)
    return QuadratureRule(a + half * (u + 1.0), half * w, (a, b))


def gauss_chebyshev(n: int) -> QuadratureRule:
    """Nodes/weights for ``int_{-1}^{1} f(x) (1 - x^2)^{-1/2} dx``."""
    j = np.arange(1, n + 1)
    return QuadratureRule(np.cos((2 * j - 1) * np.pi / (2 * n)), np.full(n, np.pi / n), (-1.0, 1.0))


def circle_poisson(r: float, u):
    return (1.0 - r * r) / (1.0 - 2.0 * r * np.cos(u) + r * r)


def poisson_kernel(scale: MesoscopicScale, x, y, sign: str):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(x) >= 1) or np.any(np.abs(y) >= 1):
        raise ValueError("Poisson kernel arguments must lie in (-1, 1)")
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    r = scale.r
    root = np.sqrt((1.0 - x * x) * (1.0 - y * y))
    cross = x * y + root if sign == "+" else x * y - root
    return (1.0 - r * r) / (1.0 - 2.0 * r * cross + r * r)


def adaptive_angle_quad(integrand, a, b, n0: int = 2048, tol: float = 1e-10, nmax: int = 2**16):
    """Gauss-Legendre on [a, b] (arrays broadcast), doubling n until converged.

    ``integrand(phi)`` receives nodes with a trailing axis and must reduce
    nothing; the weighted sum is taken here.
    """
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    prev = None
    n = n0
    while True:
        u, w = _leggauss(n)
        half = 0.5 * (b - a)
        phi = a + half * (u + 1.0)
        val = np.sum(integrand(phi) * (half * w), axis=-1)
        if prev is not None and np.max(np.abs(val - prev)) < tol:
            return val
        if n >= nmax:
            if prev is None:
                return val
            raise RuntimeError(
                f"quadrature did not converge at n={n}: last iterates differ by {np.max(np.abs(val - prev)):.3g}"
            )
        prev = val
        n *= 2


def d_coefficient(k: int, t):
    """Chebyshev coefficients of the indicator of ``(-1, t]``.

    ``d_0 = (2/pi)(pi - arccos t)`` and ``d_k = -2 sin(k arccos t)/(pi k)``.
    """
    t = np.asarray(t, dtype=float)
    a = np.arccos(np.clip(t, -1.0, 1.0))
    if k == 0:
        return 2.0 - 2.0 * a / np.pi
    return -2.0 / (np.pi * k) * np.sin(k * a)


def d_coefficients(K: int, t) -> np.ndarray:
    """Stack ``d_k^t`` for ``k = 0..K``; shape (K+1,) + shape(t)."""
    t = np.asarray(t, dtype=float)
    a = np.arccos(np.clip(t, -1.0, 1.0))
    k = np.arange(1, K + 1).reshape((-1,) + (1,) * t.ndim)
    rest = -2.0 / (np.pi * k) * np.sin(k * a)
    return np.concatenate([(2.0 - 2.0 * a / np.pi)[None], rest], axis=0)


def _series_terms_needed(r: float, tol: float = 1e-13) -> int:
    # tail sum_{k>K} 2 r^k/(pi k) <= 2 r^{K+1} / (pi (K+1) (1-r))
    if r <= 0:
        return 1
    K = 1
    while 2 * r ** (K + 1) / (np.pi * (K + 1) * (1 - r)) > tol:
        K *= 2
    return K


def indicator_tail_bound(r: float, n: int) -> float:
    """Bound on ``sum_{k>n} (2/(pi k)) r^k``."""
    return 2.0 * r ** (n + 1) / (np.pi * (n + 1) * (1.0 - r))


def _antiderivative(c: float, u):
    # continuous primitive of P_r on [-pi, 2 pi] with P_r normalised to
    # integrate to 2 pi over a period; c = (1 + r)/(1 - r)
    return 2.0 * np.arctan(c * np.tan(0.5 * u)) + 2.0 * np.pi * np.round(u / (2.0 * np.pi))


def _chi_closed(r: float, t, x):
    a = np.arccos(np.clip(t, -1.0, 1.0))
    th = np.arccos(np.clip(x, -1.0, 1.0))
    c = (1.0 + r) / (1.0 - r)
    inner = _antiderivative(c, th + a) - _antiderivative(c, th - a)
    return 1.0 - inner / (2.0 * np.pi)


def smooth_indicator(scale: MesoscopicScale, t, x, method: str = "quadrature"):
    """Smoothed indicator ``chi_omega^t(x)`` of ``(-1, t]`` evaluated at ``x``.

    ``method`` is ``"quadrature"`` (Gauss-Legendre in the angle variable),
    ``"series"`` (Chebyshev series, truncated below 1e-13) or ``"closed"``
    (closed-form primitive of the circle Poisson kernel).
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= 1) or np.any(np.abs(t) >= 1):
        raise ValueError("t and x must lie in (-1, 1)")
    r = scale.r
    if method == "closed":
        return _chi_closed(r, t, x)
    if method == "series":
        K = _series_terms_needed(r)
        tt, xx = np.broadcast_arrays(t, x)
        d = d_coefficients(K, tt)
        k = np.arange(K + 1).reshape((-1,) + (1,) * xx.ndim)
        terms = d * r**k * np.cos(k * np.arccos(xx)[None])
        terms[0] *= 0.5
        return terms.sum(axis=0)
    if method == "quadrature":

        def integrand(phi):
            return circle_poisson(r, th - phi) + circle_poisson(r, th + phi)

        tt, xx = np.broadcast_arrays(t, x)
        th = np.broadcast_to(np.arccos(xx), tt.shape)[..., None]
        return adaptive_angle_quad(integrand, np.arccos(tt), np.pi) / (2.0 * np.pi)
    raise ValueError(f"unknown method {method!r}")


def poisson_transform(scale: MesoscopicScale, f, x, n: int = 4096):
    """``f_omega(x) = (1/2pi) int (P+ + P-)(x, y) f(y) (1-y^2)^{-1/2} dy``.

    Gauss-Legendre with ``n`` nodes in the angle ``phi`` on [0, pi].
    """
    x = np.asarray(x, dtype=float)
    rule = gauss_legendre(n, 0.0, np.pi)
    th = np.arccos(x)[..., None]
    phi = rule.nodes
    k = circle_poisson(scale.r, th - phi) + circle_poisson(scale.r, th + phi)
    return np.sum(k * f(np.cos(phi)) * rule.weights, axis=-1) / (2.0 * np.pi)


def smoothed_esd(scale: MesoscopicScale, traces: ChebyshevTraces, t) -> Truncated:
    """``F_{N,omega}(t)`` from clipped Chebyshev traces, truncated at ``n_omega``."""
    n = scale.n_omega
    if traces.K < n:
        raise ValueError(f"need traces up to degree n_omega={n}, got K={traces.K}")
    if not traces.clipped:
        raise ValueError("smoothed ESD is defined through the clipped spectrum")
    t = np.asarray(t, dtype=float)
    d = d_coefficients(n, t)
    k = np.arange(n + 1)
    coef = scale.r**k * traces.normalized_traces()[: n + 1]
    coef[0] = 0.5
    value = np.tensordot(coef, d, axes=(0, 0))
    return Truncated(value, indicator_tail_bound(scale.r, n))


def smoothed_esd_direct(scale: MesoscopicScale, clipped_values: np.ndarray, t):
    """``F_{N,omega}(t)`` as the average of closed-form ``chi`` over eigenvalues."""
    t = np.asarray(t, dtype=float)
    lam = np.asarray(clipped_values, dtype=float)
    return _chi_closed(scale.r, t[..., None], lam).mean(axis=-1)


def smoothed_reference(scale: MesoscopicScale, t):
    """``F_omega(t) = d_0/2 - r^2 d_2 / 2`` (only k = 2 survives the semicircle)."""
    return 0.5 * d_coefficient(0, t) - 0.5 * scale.r**2 * d_coefficient(2, t)


def smoothed_reference_series(scale: MesoscopicScale, t, K: int = 64):
    """Term-by-term series for ``F_omega``; only used to check the two-term form."""
    t = np.asarray(t, dtype=float)
    d = d_coefficients(K, t)
    coef = scale.r ** np.arange(K + 1) * semicircle_moments(K)
    coef[0] = 0.5
    return np.tensordot(coef, d, axes=(0, 0))


def smoothed_reference_quadrature(scale: MesoscopicScale, t, n: int = 2048):
    """``F_omega(t) = int chi_omega^t dF`` by Gauss-Legendre in ``x = cos(theta)``."""
    t = np.asarray(t, dtype=float)
    rule = gauss_legendre(n, 0.0, np.pi)
    xs = np.cos(rule.nodes)
    w = rule.weights * (2.0 / np.pi) * np.sin(rule.nodes) ** 2
    flat = t.reshape(-1)
    out = np.empty_like(flat)
    for start in range(0, flat.size, 1024):
        block = flat[start : start + 1024]
        out[start : start + 1024] = _chi_closed(scale.r, block[:, None], xs) @ w
    return out.reshape(t.shape)
