import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rmtcvm import ensembles
from rmtcvm.seeding import SeedSpec
from rmtcvm.spectral import (
    ClippedSpectrum,
    Spectrum,
    UnitarySpectrum,
    clip,
    eigenphases,
    eigenvalues,
    esd_eval,
    quantile_grid,
    semicircle_cdf,
    semicircle_density,
    semicircle_quantile,
)

finite = st.floats(-3, 3, allow_nan=False)


def test_zero_and_diagonal_matrices():
    np.testing.assert_array_equal(eigenvalues(np.zeros((3, 3))).values, [0, 0, 0])
    np.testing.assert_allclose(eigenvalues(np.diag([0.5, -0.2])).values, [0.5, -0.2])


def test_trace_identity():
    H = ensembles.sample_wigner(ensembles.gaussian(100, 1), SeedSpec(1))
    s = eigenvalues(H)
    assert abs(s.values.sum() - np.trace(H.entries)) <= 1e-10
    assert np.all(np.diff(s.values) <= 0)


def test_spectrum_validation():
    with pytest.raises(ValueError):
        Spectrum(np.array([0.1, 0.5]))
    with pytest.raises(ValueError):
        Spectrum(np.array([np.nan]))
    with pytest.raises(ValueError):
        ClippedSpectrum(np.array([1.5, 0.0]))
    s = Spectrum.from_unsorted([0.1, 0.5, -2.0])
    with pytest.raises(ValueError):
        s.values[0] = 1.0


def test_csv_roundtrip(tmp_path):
    s = Spectrum.from_unsorted(np.random.default_rng(0).normal(size=7))
    s.to_csv(tmp_path / "s.csv", comment="test")
    np.testing.assert_array_equal(Spectrum.from_csv(tmp_path / "s.csv").values, s.values)


@given(arrays(float, st.integers(1, 30), elements=finite))
def test_clipping_idempotent_and_order_preserving(x):
    s = Spectrum.from_unsorted(x)
    c = s.clipped()
    np.testing.assert_array_equal(c.clipped().values, c.values)
    assert np.all(np.diff(c.values) <= 0)
    np.testing.assert_array_equal(c.values, clip(s.values))


def test_eigenphases_examples():
    np.testing.assert_allclose(eigenphases(np.eye(2)).phases, [0, 0], atol=1e-15)
    U = np.diag(np.exp(1j * np.array([np.pi / 2, np.pi])))
    np.testing.assert_allclose(eigenphases(U).phases, [np.pi / 2, np.pi], atol=1e-12)


@given(st.integers(1, 20), st.integers(0, 2**32))
def test_determinant_phase(N, seed):
    U = ensembles.sample_haar_unitary(N, SeedSpec(seed)).entries
    u = eigenphases(U)
    assert abs(np.prod(np.exp(1j * u.phases)) - np.linalg.det(U)) <= 1e-8
    assert np.all((u.phases >= 0) & (u.phases < 2 * np.pi))


def test_eigenphases_rejects_non_unitary():
    with pytest.raises(ValueError):
        eigenphases(2 * np.eye(2))


def test_unitary_spectrum_validation():
    with pytest.raises(ValueError):
        UnitarySpectrum(np.array([1.0, 0.5]))
    with pytest.raises(ValueError):
        UnitarySpectrum(np.array([2 * np.pi]))


def test_cdf_examples():
    assert semicircle_cdf(0.0) == pytest.approx(0.5, abs=1e-15)
    assert semicircle_cdf(1.0) == 1.0 and semicircle_cdf(-1.0) == 0.0
    from scipy.integrate import quad

    ref = quad(semicircle_density, -1, 0.5, epsabs=1e-13)[0]
    assert semicircle_cdf(0.5) == pytest.approx(ref, abs=1e-10)
    assert semicircle_cdf(0.5) == pytest.approx(0.80450, abs=5e-6)


def test_quantile_examples():
    assert semicircle_quantile(0.5) == pytest.approx(0.0, abs=1e-14)
    assert semicircle_quantile(1.0) == 1.0
    assert semicircle_quantile(0.80450) == pytest.approx(0.5, abs=2e-5)


@given(st.floats(-0.999999, 0.999999))
def test_quantile_inverts_cdf(x):
    assert abs(semicircle_quantile(semicircle_cdf(x)) - x) <= 1e-10


@pytest.mark.parametrize("N", [1, 2, 7, 100, 4096])
def test_quantile_grid(N):
    mu = quantile_grid(N)
    i = np.arange(1, N + 1)
    assert np.max(np.abs(semicircle_cdf(mu) - (N - i + 0.5) / N)) <= 1e-12
    assert np.all(np.diff(mu) < 0)


def test_esd_examples():
    s = Spectrum(np.array([0.5, -0.2]))
    assert esd_eval(s, -0.3) == 0.0
    assert esd_eval(s, 0.6) == 1.0
    assert esd_eval(s, 0.0) == 0.5
    # right-continuous
    assert esd_eval(s, 0.5) == 1.0 and esd_eval(s, -0.2) == 0.5


@given(arrays(float, st.integers(1, 20), elements=finite), arrays(float, 10, elements=finite))
def test_esd_is_a_distribution_function(x, t):
    s = Spectrum.from_unsorted(x)
    t = np.sort(t)
    F = esd_eval(s, t)
    assert np.all(np.diff(F) >= 0)
    assert esd_eval(s, s.values[0]) == 1.0
    assert esd_eval(s, s.values[-1] - 1e-9) == 0.0
