import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import skew

from rmtcvm.limitlaw import (
    A_TERMS,
    a_real_from_expansion,
    b_expanded,
    b_real_from_expectation,
    centering_shift,
    constants,
    cue_limit_variance,
    first_series,
    kde_curve,
    sample_cue_limit,
    sample_cue_limit_batch,
    sample_wigner_limit,
    sample_wigner_limit_batch,
    second_series,
    wigner_limit_from_gaussians,
    wigner_limit_variance,
    wigner_tail_variance,
)
from rmtcvm.montecarlo import two_sample_ks
from rmtcvm.seeding import SeedSpec
from rmtcvm.smoothing import MesoscopicScale

PI2 = np.pi**2
GOE = (1, 2.0, 0.0)
GUE = (2, 1.0, 0.0)
RAD = (1, 2.0, -1 / 16)


def gaussian_b(beta):
    return -(np.log(2) - 0.5) / (beta * PI2) + (2 - beta) * (1 / 48 - 1 / (8 * PI2))


# ------------------------------------------------------------ constants


@pytest.mark.parametrize("beta", [1, 2])
def test_gaussian_collapse(beta):
    c = constants(beta, 3.0 - beta, 0.0)
    for name in A_TERMS:
        expected = 1 / (2 * beta * PI2) if name == "Z1^2-1" else 0.0
        assert c.a_coeffs[name] == pytest.approx(expected, abs=1e-12)
    assert c.b == pytest.approx(gaussian_b(beta), abs=1e-12)


def test_gue_example():
    c = constants(*GUE)
    assert c.a_coeffs["Z1^2-1"] == pytest.approx(1 / (4 * PI2), abs=1e-15)


def test_goe_b_value():
    assert constants(*GOE).b == pytest.approx(-(np.log(2) - 0.5) / PI2 + (1 / 48 - 1 / (8 * PI2)), abs=1e-15)


def test_rademacher_dual_transcription():
    c = constants(*RAD)
    assert abs(c.b - b_expanded(*RAD)) <= 1e-14
    assert abs(c.b - b_real_from_expectation(2.0, -1 / 16)) <= 1e-14
    other = a_real_from_expansion(2.0, -1 / 16)
    for name in A_TERMS:
        assert abs(c.a_coeffs[name] - other[name]) <= 1e-14


# sigma2 stays off 0: sqrt(2 (sigma2 - 2) + 4) cancels catastrophically there
@given(st.floats(0.01, 4.0), st.floats(-1 / 8, 0.5))
def test_real_case_transcriptions_agree(sigma2, c4):
    c = constants(1, sigma2, c4)
    assert c.b == pytest.approx(b_real_from_expectation(sigma2, c4), abs=1e-13)
    assert c.b == pytest.approx(b_expanded(1, sigma2, c4), abs=1e-13)
    other = a_real_from_expansion(sigma2, c4)
    for name in A_TERMS:
        assert c.a_coeffs[name] == pytest.approx(other[name], abs=1e-13)


@given(st.floats(0.0, 4.0), st.floats(-1 / 16, 0.5))
def test_complex_case_factored_vs_expanded(sigma2, c4):
    assert constants(2, sigma2, c4).b == pytest.approx(b_expanded(2, sigma2, c4), abs=1e-13)


def test_constants_validation():
    with pytest.raises(ValueError):
        constants(3, 1.0, 0.0)
    with pytest.raises(ValueError):
        constants(1, 2.0, -0.2)


# ------------------------------------------------------------ Wigner limit


def test_limit_mean_zero():
    c = constants(*GOE)
    x = sample_wigner_limit_batch(c, 300, 1_000_000, SeedSpec(1))
    assert abs(x.mean()) <= 5 * x.std() / np.sqrt(x.size)


def test_first_series_term_variance():
    rng = np.random.default_rng(3)
    beta, k = 1, 3
    Z = rng.standard_normal((1_000_000, 5))
    term = ((Z[:, k - 1] ** 2 - 1) / k - Z[:, k - 1] * Z[:, k + 1] / np.sqrt(k * (k + 2))) / (beta * PI2)
    target = (1 / (beta * PI2)) ** 2 * (2 / k**2 + 1 / (k * (k + 2)))
    v = term**2
    assert abs(v.mean() - target) <= 5 * v.std() / np.sqrt(v.size)


@pytest.mark.parametrize("params", [GOE, GUE, RAD], ids=["goe", "gue", "rademacher"])
def test_limit_variance_matches_draws(params):
    c = constants(*params)
    x = sample_wigner_limit_batch(c, 300, 400_000, SeedSpec(2))
    target = wigner_limit_variance(c, 300)
    se = np.sqrt((np.mean((x - x.mean()) ** 4) - x.var() ** 2) / x.size)
    assert abs(x.var() - target) <= 5 * se


def test_shared_gaussians():
    c = constants(*RAD)
    Z = np.random.default_rng(5).standard_normal((50, 302))
    full = wigner_limit_from_gaussians(c, Z, 300)
    groups = [first_series(Z, 300, 1), second_series(Z, 300, 1), c.a_value(Z)]
    # one Z array feeds all groups, so the total is reproduced bit for bit
    assert np.array_equal(full, groups[0] + groups[1] + groups[2])
    assert np.array_equal(groups[2], c.a_value(Z.copy()))
    assert np.array_equal(second_series(Z, 300, 2), np.zeros(50))


def test_limit_rejects_small_truncation():
    with pytest.raises(ValueError):
        sample_wigner_limit_batch(constants(*GOE), 5, 10, SeedSpec(0))
    with pytest.raises(ValueError):
        wigner_limit_from_gaussians(constants(*GOE), np.zeros((2, 10)), 20)


@pytest.mark.parametrize("params", [GOE, GUE, RAD], ids=["goe", "gue", "rademacher"])
def test_tail_variance_regression(params):
    # frozen constant: the diagonal and band parts give 3/(beta^2 pi^4) per 1/K
    C = 3 / (params[0] ** 2 * np.pi**4)
    c = constants(*params)
    for K in (8, 20, 100, 300, 3000):
        assert wigner_tail_variance(c, K) <= C / K


def test_single_sample_carries_tail():
    s = sample_wigner_limit(constants(*GOE), 300, SeedSpec(4))
    assert np.isfinite(s.value) and s.K == 300
    assert 0 < s.tail_variance <= 3 / (np.pi**4 * 300)


def test_batch_is_chunk_independent():
    c = constants(*GOE)
    a = sample_wigner_limit_batch(c, 50, 1000, SeedSpec(8), chunk=1000)
    b = sample_wigner_limit_batch(c, 50, 1000, SeedSpec(8), chunk=1000)
    np.testing.assert_array_equal(a, b)


# ------------------------------------------------------------ CUE limit


def test_cue_limit_moments():
    x = sample_cue_limit_batch(300, 1_000_000, SeedSpec(6))
    assert abs(x.mean()) <= 5 * x.std() / np.sqrt(x.size)
    assert skew(x) > 0


def test_cue_term_variance():
    rng = np.random.default_rng(1)
    Y = (rng.standard_normal(1_000_000) + 1j * rng.standard_normal(1_000_000)) * np.sqrt(0.5)
    m = np.abs(Y) ** 2
    assert abs(m.mean() - 1) <= 5 * m.std() / np.sqrt(m.size)
    v = (m - 1) ** 2
    assert abs(v.mean() - 1) <= 5 * v.std() / np.sqrt(v.size)


def test_cue_total_variance():
    assert abs(cue_limit_variance(10_000) - np.pi**2 / 6) <= 1e-4
    assert sample_cue_limit(300, SeedSpec(0)).tail_variance == pytest.approx(np.pi**2 / 6 - cue_limit_variance(300))


def test_cue_limit_rejects_small_truncation():
    with pytest.raises(ValueError):
        sample_cue_limit_batch(7, 10, SeedSpec(0))


def test_two_cue_limit_samples_agree():
    a = sample_cue_limit_batch(300, 10_000, SeedSpec(1, 0))
    b = sample_cue_limit_batch(300, 10_000, SeedSpec(1, 1))
    assert two_sample_ks(a, b).distance <= 0.03


# ------------------------------------------------------------ centring and KDE


def test_centering_shift():
    goe, gue = constants(*GOE), constants(*GUE)
    assert centering_shift(goe, MesoscopicScale.from_alpha(1e-15, 400)) == pytest.approx(goe.b, abs=1e-13)
    sc = MesoscopicScale.from_alpha(0.2, 400)
    assert centering_shift(goe, sc) == pytest.approx(0.2 * np.log(400) / PI2 + gaussian_b(1), abs=1e-14)
    assert centering_shift(gue, sc) == pytest.approx(0.2 * np.log(400) / (2 * PI2) + gaussian_b(2), abs=1e-14)


def test_kde_integrates_to_one():
    x = np.random.default_rng(0).normal(size=5000)
    grid, dens = kde_curve(x)
    assert np.all(dens >= 0)
    assert np.trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-3)
