"""Limiting laws of the mesoscopic CvM statistic (Wigner) and the CUE statistic.

The Wigner limit is a quadratic form in one i.i.d. standard Gaussian
sequence ``Z_1, Z_2, ...``; all three groups of terms (the two series and the
model-dependent correction) read the same ``Z`` array.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import gaussian_kde

from .seeding import SeedSpec
from .smoothing import MesoscopicScale

PI2 = np.pi**2
LOG2 = np.log(2.0)

A_TERMS = ("Z2", "Z4", "Z6", "Z1^2-1", "Z2^2-1", "Z1Z3", "Z2Z4")


@dataclass(frozen=True)
class LimitLawConstants:
    beta: int
    sigma2: float
    c4: float
    b: float
    a_coeffs: dict

    def a_value(self, Z: np.ndarray) -> np.ndarray:
        """Model-dependent correction ``a_beta`` for ``Z[..., i-1] = Z_i``."""
        a = self.a_coeffs
        z = lambda i: Z[..., i - 1]  # noqa: E731
        return (
            a["Z2"] * z(2)
            + a["Z4"] * z(4)
            + a["Z6"] * z(6)
            + a["Z1^2-1"] * (z(1) ** 2 - 1.0)
            + a["Z2^2-1"] * (z(2) ** 2 - 1.0)
            + a["Z1Z3"] * z(1) * z(3)
            + a["Z2Z4"] * z(2) * z(4)
        )


def constants(beta: int, sigma2: float, c4: float) -> LimitLawConstants:
    """Constants of the Wigner mesoscopic limit law as displayed in the theorem."""
    if beta not in (1, 2):
        raise ValueError("beta must be 1 or 2")
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    if 1.0 / beta + 8 * c4 < 0 or 1 + 8 * c4 * beta < 0:
        raise ValueError("c4 too negative: 1/beta + 8 c4 must be nonnegative")
    s = np.sqrt(sigma2)
    shift = sigma2 + beta - 3
    a = {
        "Z2": ((4 * sigma2 - 16 * c4 - 6 + beta) * np.sqrt(1.0 / beta + 8 * c4) + 3 * (beta - 2)) / (8 * PI2),
        "Z4": 2 * np.sqrt(2) / (np.sqrt(beta) * PI2) * (c4 - shift / 16),
        "Z6": -2 / (np.sqrt(3 * beta) * PI2) * c4,
        "Z1^2-1": (3 * shift / 4 + 1 / (2 * beta)) / PI2,
        "Z2^2-1": 4 / PI2 * c4,
        "Z1Z3": -1 / (np.sqrt(3) * PI2) * (s / np.sqrt(2 * beta) - 1 / beta),
        "Z2Z4": -1 / (2 * np.sqrt(2) * beta * PI2) * (np.sqrt(1 + 8 * c4 * beta) - 1),
    }
    b = (
        -(LOG2 - 0.5) / (beta * PI2)
        + (2 - beta) * (1 / 48 - 1 / (8 * PI2))
        + shift * (2 * sigma2 - beta + 12) / (16 * PI2)
        + (19 - 2 * beta - 3 * sigma2) / (3 * PI2) * c4
        + 8 / PI2 * c4**2
    )
    return LimitLawConstants(beta, float(sigma2), float(c4), float(b), a)


def b_expanded(beta: int, sigma2: float, c4: float) -> float:
    """``b_beta`` with every product multiplied out (second transcription)."""
    return (
        (0.5 - LOG2) / (beta * PI2)
        + (2 - beta) / 48
        - (2 - beta) / (8 * PI2)
        + (2 * sigma2**2 + (beta + 6) * sigma2 + (beta - 3) * (12 - beta)) / (16 * PI2)
        + 19 * c4 / (3 * PI2)
        - 2 * beta * c4 / (3 * PI2)
        - sigma2 * c4 / PI2
        + 8 * c4 * c4 / PI2
    )


def b_real_from_expectation(sigma2: float, c4: float) -> float:
    """``b_1`` re-derived term by term from the expectation expansion of the real case."""
    s = sigma2 - 2
    terms = [
        -LOG2 / PI2, 4 * c4 / PI2, s / (2 * PI2), 1 / 48, 8 * c4**2 / PI2, s**2 / (8 * PI2),
        c4 / PI2, s / (4 * PI2), -1 / (8 * PI2), -c4 / PI2, -c4 / (3 * PI2), -s / (16 * PI2),
        -s * c4 / PI2, 1 / (2 * PI2), s / (4 * PI2),
    ]  # fmt: skip
    return float(sum(terms))


def a_real_from_expansion(sigma2: float, c4: float) -> dict:
    """``a_1`` coefficients as they arise in the real-case fluctuation expansion."""
    s = sigma2 - 2
    return {
        "Z2": ((4 * sigma2 - 16 * c4 - 5) * np.sqrt(1 + 8 * c4) - 3) / (8 * PI2),
        "Z4": 2 * np.sqrt(2) / PI2 * (c4 - s / 16),
        "Z6": -2 / (np.sqrt(3) * PI2) * c4,
        "Z1^2-1": (3 * s / 4 + 0.5) / PI2,
        "Z2^2-1": 4 / PI2 * c4,
        "Z1Z3": -1 / (2 * np.sqrt(3) * PI2) * (np.sqrt(2 * s + 4) - 2),
        "Z2Z4": -1 / (2 * np.sqrt(2) * PI2) * (np.sqrt(1 + 8 * c4) - 1),
    }


@dataclass(frozen=True)
class LimitSample:
    value: float
    K: int
    beta: int
    tail_variance: float


def first_series(Z: np.ndarray, K: int, beta: int) -> np.ndarray:
    k = np.arange(1, K + 1)
    zk = Z[..., :K]
    zk2 = Z[..., 2 : K + 2]
    return np.sum((zk * zk - 1.0) / k - zk * zk2 / np.sqrt(k * (k + 2)), axis=-1) / (beta * PI2)


def second_series(Z: np.ndarray, K: int, beta: int) -> np.ndarray:
    if beta == 2:
        return np.zeros(Z.shape[:-1])
    m = np.arange(1, K // 2 + 1)
    z2m = Z[..., 2 * m - 1]
    z2m2 = Z[..., 2 * m + 1]
    terms = (m + 2) / (4 * m**1.5 * (m + 1)) * z2m - z2m2 / (4 * m * np.sqrt(m + 1))
    return (2 - beta) / PI2 * np.sum(terms, axis=-1)


def wigner_limit_from_gaussians(c: LimitLawConstants, Z: np.ndarray, K: int) -> np.ndarray:
    """Evaluate the truncated limit variable on ``Z[..., i-1] = Z_i``, ``i <= K+2``."""
    if Z.shape[-1] < K + 2:
        raise ValueError("need Z_1..Z_{K+2}")
    return first_series(Z, K, c.beta) + second_series(Z, K, c.beta) + c.a_value(Z)


def _quadratic_form(c: LimitLawConstants, K: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Symmetric quadratic form ``Z^T Q Z - tr Q + b^T Z`` of the truncated limit.

    Returns the diagonal of Q, its (i, i+2) band and the linear vector ``b``
    (all 0-based on ``Z_1..Z_{K+2}``).
    """
    beta = c.beta
    n = K + 2
    diag = np.zeros(n)
    band = np.zeros(n - 2)
    lin = np.zeros(n)
    k = np.arange(1, K + 1)
    diag[:K] += 1.0 / (beta * PI2 * k)
    band[:K] += -0.5 / (beta * PI2 * np.sqrt(k * (k + 2)))
    if beta == 1:
        m = np.arange(1, K // 2 + 1)
        lin[2 * m - 1] += (2 - beta) / PI2 * (m + 2) / (4 * m**1.5 * (m + 1))
        lin[2 * m + 1] += -(2 - beta) / PI2 / (4 * m * np.sqrt(m + 1))
    a = c.a_coeffs
    lin[1] += a["Z2"]
    lin[3] += a["Z4"]
    lin[5] += a["Z6"]
    diag[0] += a["Z1^2-1"]
    diag[1] += a["Z2^2-1"]
    band[0] += 0.5 * a["Z1Z3"]
    band[1] += 0.5 * a["Z2Z4"]
    return diag, band, lin


def wigner_limit_variance(c: LimitLawConstants, K: int) -> float:
    """Exact variance of the limit variable truncated at ``K``."""
    diag, band, lin = _quadratic_form(c, K)
    return float(2.0 * (np.sum(diag**2) + 2.0 * np.sum(band**2)) + np.sum(lin**2))


def wigner_tail_variance(c: LimitLawConstants, K: int, K_ref: int = 200_000) -> float:
    """``Var(full) - Var(truncated at K)``, the full variance taken at ``K_ref``."""
    return max(0.0, wigner_limit_variance(c, K_ref) - wigner_limit_variance(c, K))


def sample_wigner_limit_batch(c: LimitLawConstants, K: int, size: int, seed: SeedSpec, chunk: int = 10_000) -> np.ndarray:
    if K < 8:
        raise ValueError("truncation K must be at least 8")
    rng = seed.generator()
    out = np.empty(size)
    for start in range(0, size, chunk):
        m = min(chunk, size - start)
        Z = rng.standard_normal((m, K + 2))
        out[start : start + m] = wigner_limit_from_gaussians(c, Z, K)
    return out


def sample_wigner_limit(c: LimitLawConstants, K: int, seed: SeedSpec) -> LimitSample:
    value = float(sample_wigner_limit_batch(c, K, 1, seed)[0])
    return LimitSample(value, K, c.beta, wigner_tail_variance(c, K))


def cue_limit_from_gaussians(Y: np.ndarray) -> np.ndarray:
    j = np.arange(1, Y.shape[-1] + 1)
    return np.sum((np.abs(Y) ** 2 - 1.0) / j, axis=-1)


def sample_cue_limit_batch(K: int, size: int, seed: SeedSpec, chunk: int = 10_000) -> np.ndarray:
    """Draws of ``sum_{j<=K} (|Y_j|^2 - 1)/j`` with standard complex Gaussian ``Y_j``."""
    if K < 8:
        raise ValueError("truncation K must be at least 8")
    rng = seed.generator()
    out = np.empty(size)
    for start in range(0, size, chunk):
        m = min(chunk, size - start)
        Y = (rng.standard_normal((m, K)) + 1j * rng.standard_normal((m, K))) * np.sqrt(0.5)
        out[start : start + m] = cue_limit_from_gaussians(Y)
    return out


def cue_limit_variance(K: int) -> float:
    j = np.arange(1, K + 1)
    return float(np.sum(1.0 / j**2))


def sample_cue_limit(K: int, seed: SeedSpec) -> LimitSample:
    value = float(sample_cue_limit_batch(K, 1, seed)[0])
    return LimitSample(value, K, 2, np.pi**2 / 6 - cue_limit_variance(K))


def centering_shift(c: LimitLawConstants, scale: MesoscopicScale) -> float:
    """``alpha log N / (beta pi^2) + b_beta``."""
    return scale.effective_alpha * np.log(scale.N) / (c.beta * PI2) + c.b


def kde_curve(samples: np.ndarray, points: int = 512, grid: np.ndarray | None = None):
    """Gaussian KDE with Silverman's bandwidth on an even grid over the sample range."""
    samples = np.asarray(samples, dtype=float)
    kde = gaussian_kde(samples, bw_method="silverman")
    if grid is None:
        pad = 3 * kde.factor * samples.std()
        grid = np.linspace(samples.min() - pad, samples.max() + pad, points)
    return grid, kde(grid)
