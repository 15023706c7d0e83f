from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rmtcvm import ensembles
from rmtcvm.montecarlo import (
    ExperimentConfig,
    ReplicaError,
    bai_yao_mean,
    bai_yao_variance,
    covariance_report,
    cue_covariance_target,
    cue_expectation,
    cue_expectation_asymptotic,
    default_covariance_pairs,
    format_reports,
    mean_report,
    reproduce_figures,
    run_replicas,
    trace_samples,
    two_sample_ks,
    variance_report,
    verify_trace_moments,
    write_csv,
    write_figure_bundle,
)
from rmtcvm.seeding import SeedSpec
from rmtcvm.spectral import eigenvalues
from rmtcvm.statistics import StatValue, cvm_exact


def rows(results):
    return "\n".join(v.csv_row() for v in results)


# ------------------------------------------------------------ config


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(ensemble="goe", N=10, replicas=0),
        dict(ensemble="goe", N=10, statistics=("cue_exact",)),
        dict(ensemble="cue", N=10, statistics=("cvm",)),
        dict(ensemble="goe", N=10, statistics=("mcvm",)),
        dict(ensemble="goe", N=10, statistics=("mcvm",), alpha=0.4),
        dict(ensemble="goe", N=10, statistics=("nope",)),
        dict(ensemble="goe8", N=10),
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ExperimentConfig(**kwargs)


def test_single_replica_is_direct_call():
    cfg = ExperimentConfig("goe", 30, replicas=1, master_seed=4)
    direct = cvm_exact(eigenvalues(ensembles.sample_wigner(ensembles.gaussian(30, 1), SeedSpec(4, 0))))
    (v,) = run_replicas(cfg)
    assert v.value == direct.value and v.params["replica"] == 0


def test_determinism_and_schedule_independence(tmp_path):
    cfg = ExperimentConfig("rademacher", 60, replicas=9, master_seed=2, alpha=0.2,
                           statistics=("cvm", "ks", "mcvm"))  # fmt: skip
    a, b = run_replicas(cfg), run_replicas(cfg)
    write_csv(tmp_path / "a.csv", StatValue.CSV_HEADER, [v.csv_row() for v in a], "x")
    write_csv(tmp_path / "b.csv", StatValue.CSV_HEADER, [v.csv_row() for v in b], "x")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert rows(run_replicas(replace(cfg, workers=3))) == rows(a)


def test_cue_replicas_and_workers():
    cfg = ExperimentConfig("cue", 6, replicas=7, statistics=("cue_exact", "cue_series"), truncation=2000)
    a = run_replicas(cfg)
    assert rows(a) == rows(run_replicas(replace(cfg, workers=2)))
    ex = np.array([v.value for v in a if v.name == "cue_exact"])
    se = np.array([v.value for v in a if v.name == "cue_series"])
    assert np.all(np.abs(ex - se) <= 4 / 2000 + 1e-8)


def test_replica_failure_is_reported_with_index():
    # the default n_omega breaks the N^(1/3) guard of the partial sum
    cfg = ExperimentConfig("goe", 40, replicas=3, alpha=0.2, statistics=("mcvm_partial",))
    with pytest.raises(ReplicaError) as info:
        run_replicas(cfg)
    assert info.value.index == 0


def test_deformed_replicas():
    cfg = ExperimentConfig("goe", 50, replicas=2, strength=3.0, statistics=("ks",))
    plain = run_replicas(replace(cfg, strength=0.0))
    assert rows(run_replicas(cfg)) != rows(plain)


# ------------------------------------------------------------ estimators


def test_reports_have_finite_se():
    x = np.random.default_rng(0).normal(size=1000)
    for r in (mean_report("m", x, 0.0), variance_report("v", x, 1.0), covariance_report("c", x, x, 1.0)):
        assert np.isfinite(r.se) and r.se > 0
        assert abs(r.z) < 5
        assert r.csv_row().count(",") == 4


def test_variance_report_se():
    x = np.random.default_rng(1).normal(size=200_000)
    r = variance_report("v", x, 1.0)
    assert r.se == pytest.approx(np.sqrt(2 / x.size), rel=0.02)


@given(st.integers(10, 5000), st.integers(0, 1000))
def test_summation_order(n, seed):
    x = np.random.default_rng(seed).lognormal(size=n)
    a, b = mean_report("m", x, 0.0), mean_report("m", x[::-1], 0.0)
    assert abs(a.estimate - b.estimate) <= 1e-12 * abs(a.estimate)
    a, b = variance_report("v", x, 0.0), variance_report("v", x[::-1], 0.0)
    assert abs(a.estimate - b.estimate) <= 1e-12 * abs(a.estimate)


def test_trace_moment_targets():
    for k in (1, 3, 5):
        assert bai_yao_mean(k, 2, 1.0, 0.0) == 0.0
    assert bai_yao_variance(2, 1, 2.0, 0.0) == 1.0
    assert bai_yao_variance(2, 1, 2.0, -1 / 16) == 0.5
    assert bai_yao_mean(4, 1, 2.0, -1 / 16) == pytest.approx(0.5 - 0.5)


def test_trace_moment_guard():
    cfg = ExperimentConfig("goe", 100, replicas=2)
    with pytest.raises(ValueError, match="N\\^\\(1/3\\)"):
        verify_trace_moments(cfg, 19)


def test_trace_moment_report_small():
    cfg = ExperimentConfig("gue", 100, replicas=400, master_seed=3)
    reports = verify_trace_moments(cfg, 3)
    assert len(reports) == 12
    assert all(np.isfinite(r.se) and r.se > 0 for r in reports)
    assert max(abs(r.z) for r in reports) < 5
    table = format_reports(reports, 3.0)
    assert "Var[N t_2]" in table


def test_trace_samples_workers():
    p = ensembles.gaussian(30, 1)
    np.testing.assert_array_equal(trace_samples(p, 4, 6, 1), trace_samples(p, 4, 6, 1, workers=2))


def test_clipped_traces_close_to_raw():
    p = ensembles.gaussian(100, 1)
    raw = trace_samples(p, 3, 5, 2)
    clip = trace_samples(p, 3, 5, 2, clipped=True)
    assert raw.shape == clip.shape == (5, 4)
    assert np.max(np.abs(raw - clip)) < 0.01


def test_cue_covariance_table():
    assert cue_covariance_target(2, 2, 8) == 4
    assert cue_covariance_target(5, 4, 8) == -1
    assert cue_covariance_target(10, 12, 8) == -6
    assert cue_covariance_target(8, 8, 8) == 64 - 8
    assert default_covariance_pairs(8, 16) == [(2, 2), (5, 4), (10, 12)]


def test_cue_expectation():
    assert cue_expectation_asymptotic(10) == pytest.approx(0.1551920, abs=5e-8)
    assert abs(cue_expectation(10) - cue_expectation_asymptotic(10)) <= 10 * 10**-3


# ------------------------------------------------------------ two-sample KS


def test_ks_examples():
    a = np.random.default_rng(0).normal(size=100)
    assert two_sample_ks(a, a).distance == 0.0
    r = two_sample_ks(-1 - np.arange(5.0), 1 + np.arange(7.0))
    assert r.distance == 1.0 and not r.passed
    with pytest.raises(ValueError):
        two_sample_ks([], [1.0])


def test_ks_threshold_and_scipy():
    from scipy.stats import ks_2samp

    rng = np.random.default_rng(2)
    a, b = rng.normal(size=3000), rng.normal(0.05, 1, size=2000)
    r = two_sample_ks(a, b)
    assert r.distance == pytest.approx(ks_2samp(a, b).statistic, abs=1e-15)
    assert r.threshold == pytest.approx(1.36 * np.sqrt(5000 / (3000 * 2000)))


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=50), st.lists(st.floats(-5, 5), min_size=1, max_size=50))
def test_ks_range(a, b):
    assert 0.0 <= two_sample_ks(a, b).distance <= 1.0


# ------------------------------------------------------------ figures


def test_reproduce_figures_small(tmp_path):
    cfg = ExperimentConfig("rademacher", 60, replicas=300, master_seed=1, limit_draws=3000, truncation=50)
    rep = reproduce_figures(cfg, ks_threshold=0.2, control_threshold=0.1)
    assert abs(rep.cvm_centered.mean()) < 1e-12 and abs(rep.limit_centered.mean()) < 1e-12
    assert rep.ks.n_a == 300 and rep.ks.n_b == 3000
    files = write_figure_bundle(rep, tmp_path, "test")
    for f in files:
        lines = f.read_text().splitlines()
        assert lines[0] == "# command: test"
        assert "," in lines[1]
    with pytest.raises(ValueError):
        reproduce_figures(replace(cfg, ensemble="gue"))
