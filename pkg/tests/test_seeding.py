import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rmtcvm.seeding import SeedSpec, replica_seeds


@given(st.integers(0, 2**64 - 1), st.integers(0, 10**6))
def test_stream_is_pure_function_of_seed(master, replica):
    a = SeedSpec(master, replica).generator().standard_normal(4)
    b = SeedSpec(master, replica).generator().standard_normal(4)
    np.testing.assert_array_equal(a, b)


def test_distinct_replicas_and_streams_differ():
    x = SeedSpec(1, 0).generator().standard_normal(8)
    y = SeedSpec(1, 1).generator().standard_normal(8)
    z = SeedSpec(1, 0).generator(stream=1).standard_normal(8)
    assert not np.array_equal(x, y)
    assert not np.array_equal(x, z)


def test_replica_streams_look_independent():
    draws = np.array([SeedSpec(5, i).generator().standard_normal() for i in range(4000)])
    # adjacent replicas should be uncorrelated
    r = np.corrcoef(draws[:-1], draws[1:])[0, 1]
    assert abs(r) < 5 / np.sqrt(draws.size)


def test_replica_seeds_and_child():
    seeds = replica_seeds(3, 4, start=2)
    assert [s.replica_index for s in seeds] == [2, 3, 4, 5]
    assert SeedSpec(3, 2).child(3) == SeedSpec(3, 5)


@pytest.mark.parametrize("master,replica", [(-1, 0), (2**64, 0), (0, -1)])
def test_rejects_out_of_range(master, replica):
    with pytest.raises(ValueError):
        SeedSpec(master, replica)
