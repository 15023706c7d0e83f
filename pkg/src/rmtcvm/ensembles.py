"""Random matrix samplers: Wigner matrices, Haar unitaries, rank-one deformations.

Normalisation follows the convention under which the semicircle law lives on
[-1, 1]: off-diagonal entries have ``E|H_ij|^2 = 1/(4N)`` and diagonal entries
``E|H_ii|^2 = sigma2/(4N)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .seeding import SeedSpec

EntrySampler = Callable[[np.random.Generator, tuple], np.ndarray]

ENTRY_LAWS = ("gaussian", "rademacher", "custom")


@dataclass(frozen=True)
class EnsembleParams:
    """Wigner model parameters.

    ``m4`` is the off-diagonal fourth moment scale, ``E|H_ij|^4 = m4/N^2``.
    For ``entry_law="custom"`` a ``sampler`` must be supplied; it returns
    i.i.d. real variates with mean 0 and variance 1, and ``m4`` must match its
    fourth moment (see :func:`custom`).
    """

    N: int
    beta: int = 1
    entry_law: str = "gaussian"
    sigma2: float = 2.0
    m4: float = 3.0 / 16.0
    sampler: Optional[EntrySampler] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.beta not in (1, 2):
            raise ValueError(f"beta must be 1 or 2, got {self.beta}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if self.sigma2 < 0 or self.m4 < 0:
            raise ValueError("sigma2 and m4 must be nonnegative")
        if self.entry_law not in ENTRY_LAWS:
            raise ValueError(f"unknown entry law {self.entry_law!r}")
        if self.entry_law == "gaussian":
            if self.sigma2 != 3 - self.beta or self.m4 != (4 - self.beta) / 16:
                raise ValueError("gaussian law requires sigma2 = 3 - beta and c4 = 0")
        if self.entry_law == "rademacher" and (self.beta != 1 or self.sigma2 != 2.0 or self.m4 != 1 / 8):
            raise ValueError("rademacher preset is real symmetric with sigma2 = 2, m4 = 1/8")
        if self.entry_law == "custom" and self.sampler is None:
            raise ValueError("custom entry law needs an explicit sampler with declared moments")

    @property
    def c4(self) -> float:
        return self.m4 - (4 - self.beta) / 16

    def with_N(self, N: int) -> EnsembleParams:
        return EnsembleParams(N, self.beta, self.entry_law, self.sigma2, self.m4, self.sampler)


def gaussian(N: int, beta: int = 1) -> EnsembleParams:
    """GOE (beta=1) or GUE (beta=2) in the [-1, 1] normalisation."""
    return EnsembleParams(N, beta, "gaussian", float(3 - beta), (4 - beta) / 16)


def rademacher(N: int) -> EnsembleParams:
    """``H = (W + W^T) / (2 sqrt(2N))`` with i.i.d. +-1 entries of ``W``."""
    return EnsembleParams(N, 1, "rademacher", 2.0, 1 / 8)


def custom(N: int, sampler: EntrySampler, fourth_moment: float, sigma2: float, beta: int = 1) -> EnsembleParams:
    """Wigner matrix built from a user entry law.

    ``sampler(rng, shape)`` must return real variates with mean 0, variance 1
    and fourth moment ``fourth_moment``. Off-diagonal entries are ``x/(2 sqrt N)``
    (beta=1) or ``(x + i y)/(2 sqrt(2N))`` (beta=2); diagonal entries are
    ``sqrt(sigma2) x / (2 sqrt N)``. Only the second and fourth moments are
    audited; higher-moment decay is the caller's responsibility.
    """
    if fourth_moment < 1:
        raise ValueError("a unit-variance law has fourth moment >= 1")
    m4 = fourth_moment / 16 if beta == 1 else (fourth_moment + 1) / 32
    return EnsembleParams(N, beta, "custom", float(sigma2), m4, sampler)


@dataclass(frozen=True)
class WignerMatrix:
    params: EnsembleParams
    entries: np.ndarray


@dataclass(frozen=True)
class HaarUnitary:
    N: int
    entries: np.ndarray


def _draw_entries(params: EnsembleParams, rng: np.random.Generator) -> np.ndarray:
    N = params.N
    if params.entry_law in ("gaussian", "rademacher"):
        if params.entry_law == "gaussian":
            W = rng.standard_normal((N, N))
            if params.beta == 2:
                W = (W + 1j * rng.standard_normal((N, N))) / np.sqrt(2.0)
        else:
            W = rng.integers(0, 2, size=(N, N)).astype(float) * 2.0 - 1.0
        return (W + W.conj().T) / (2.0 * np.sqrt(2.0 * N))

    draw = params.sampler
    iu = np.triu_indices(N, k=1)
    m = len(iu[0])
    if params.beta == 1:
        off = np.asarray(draw(rng, (m,)), dtype=float) / (2.0 * np.sqrt(N))
        H = np.zeros((N, N))
    else:
        re = np.asarray(draw(rng, (m,)), dtype=float)
        im = np.asarray(draw(rng, (m,)), dtype=float)
        off = (re + 1j * im) / (2.0 * np.sqrt(2.0 * N))
        H = np.zeros((N, N), dtype=complex)
    H[iu] = off
    H = H + H.conj().T
    diag = np.sqrt(params.sigma2) * np.asarray(draw(rng, (N,)), dtype=float) / (2.0 * np.sqrt(N))
    H[np.diag_indices(N)] = diag
    return H


def sample_wigner(params: EnsembleParams, seed: SeedSpec) -> WignerMatrix:
    return WignerMatrix(params, _draw_entries(params, seed.generator()))


def random_unit_vector(N: int, beta: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(N)
    if beta == 2:
        v = v + 1j * rng.standard_normal(N)
    return v / np.linalg.norm(v)


def sample_deformed_wigner(
    params: EnsembleParams, strength: float, direction_seed: SeedSpec, seed: SeedSpec
) -> WignerMatrix:
    """``H + strength * v v^*`` with ``v`` uniform on the unit sphere."""
    if not np.isfinite(strength):
        raise ValueError("deformation strength must be finite")
    H = sample_wigner(params, seed).entries
    if strength == 0:
        return WignerMatrix(params, H)
    v = random_unit_vector(params.N, params.beta, direction_seed.generator(stream=1))
    return WignerMatrix(params, H + strength * np.outer(v, v.conj()))


def _ginibre(N: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(2.0)


def _haar_from_ginibre(Z: np.ndarray) -> np.ndarray:
    # works on a single matrix or a stack (..., N, N)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    mod = np.abs(d)
    if np.any(mod == 0):
        raise RuntimeError("Ginibre matrix is singular; orthonormalisation degenerated")
    return Q * (d / mod)[..., None, :]


def sample_haar_unitary(N: int, seed: SeedSpec) -> HaarUnitary:
    """Haar unitary via QR of a complex Ginibre matrix with phase correction."""
    if N < 1:
        raise ValueError("N must be positive")
    return HaarUnitary(N, _haar_from_ginibre(_ginibre(N, seed.generator())))


def sample_haar_batch(N: int, seeds: list[SeedSpec]) -> np.ndarray:
    """Stack of Haar unitaries, one per seed; identical to per-seed sampling."""
    if N < 1:
        raise ValueError("N must be positive")
    Z = np.stack([_ginibre(N, s.generator()) for s in seeds])
    return _haar_from_ginibre(Z)
