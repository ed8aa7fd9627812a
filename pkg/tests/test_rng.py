import numpy as np
import pytest
from hypothesis import given, strategies as st

from gapslab.rng import SeedStream, chunk_sizes, combined_stderr, map_ordered, mc_mean


def test_streams_reproduce_and_differ():
    a = SeedStream(7, 3).generator().random(8)
    b = SeedStream(7, 3).generator().random(8)
    c = SeedStream(7, 4).generator().random(8)
    d = SeedStream(8, 3).generator().random(8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c) and not np.array_equal(a, d)


def test_seed_stream_validation_and_masking():
    with pytest.raises(TypeError):
        SeedStream(1.5)
    assert SeedStream(-1).seed == (1 << 64) - 1
    assert SeedStream(5).substream(9) == SeedStream(5, 9)


def test_distinct_streams_look_independent():
    a = SeedStream(11, 0).generator().random(200000)
    b = SeedStream(11, 1).generator().random(200000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


@given(st.integers(1, 10 ** 6), st.integers(1, 10 ** 5))
def test_chunk_sizes_partition(samples, chunk):
    sizes = chunk_sizes(samples, chunk)
    assert sum(sizes) == samples and max(sizes) <= chunk


def test_mc_mean_worker_independent_and_correct():
    def kernel(rng, m):
        u = rng.random(m)
        return np.column_stack([u, u * u])

    one = mc_mean(kernel, 300001, 42, chunk_size=10000, workers=1)
    many = mc_mean(kernel, 300001, 42, chunk_size=10000, workers=8)
    assert np.array_equal(one.mean, many.mean) and np.array_equal(one.stderr, many.stderr)
    assert abs(one.mean[0] - 0.5) <= 4 * one.stderr[0]
    assert abs(one.mean[1] - 1 / 3) <= 4 * one.stderr[1]
    # stderr = sample std / sqrt(N)
    assert one.stderr[0] == pytest.approx(np.sqrt(1 / 12 / 300001), rel=0.01)


def test_map_ordered_preserves_order():
    assert map_ordered(lambda v: v * v, list(range(20)), workers=4) == [v * v for v in range(20)]


def test_combined_stderr():
    assert combined_stderr(3.0, 4.0) == 5.0
