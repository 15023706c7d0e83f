"""Cramer-von Mises statistics for Wigner and Haar-unitary spectra."""

from .ensembles import EnsembleParams, gaussian, rademacher, sample_haar_unitary, sample_wigner
from .seeding import SeedSpec
from .spectral import Spectrum, UnitarySpectrum, eigenphases, eigenvalues
from .statistics import StatValue, cvm_exact, ks_statistic, mcvm_series
from .smoothing import MesoscopicScale

__all__ = [
    "EnsembleParams",
    "MesoscopicScale",
    "SeedSpec",
    "Spectrum",
    "StatValue",
    "UnitarySpectrum",
    "cvm_exact",
    "eigenphases",
    "eigenvalues",
    "gaussian",
    "ks_statistic",
    "mcvm_series",
    "rademacher",
    "sample_haar_unitary",
    "sample_wigner",
]
