"""Numeric substrate: tensors, RNG streams, Bernoulli draws, matmul."""

import numpy as np
import pytest

from bsf.core import (
    DTYPE,
    RngStream,
    as_tensor,
    assert_finite,
    bernoulli_sample,
    derive_seed,
    matmul,
)
from bsf.exceptions import DomainError, ShapeError


def naive_matmul(a, b):
    n, k = a.shape
    k2, m = b.shape
    out = np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for t in range(k):
                acc += a[i, t] * b[t, j]
            out[i, j] = acc
    return out


def test_as_tensor_dtype_and_contiguity():
    x = as_tensor([[1, 2], [3, 4]])
    assert x.dtype == DTYPE
    assert x.flags["C_CONTIGUOUS"]
    # a strided view gets materialized
    y = as_tensor(np.arange(12.0).reshape(3, 4)[:, ::2])
    assert y.flags["C_CONTIGUOUS"]


def test_assert_finite_rejects_nan_and_inf():
    assert_finite(np.zeros(3))
    with pytest.raises(DomainError):
        assert_finite(np.array([1.0, np.nan]))
    with pytest.raises(DomainError):
        assert_finite(np.array([np.inf]))


def test_matmul_against_naive_loops():
    rng = np.random.default_rng(10)
    for _ in range(20):
        n, k, m = rng.integers(1, 17, size=3)
        a = rng.normal(size=(n, k))
        b = rng.normal(size=(k, m))
        got = matmul(a, b)
        want = naive_matmul(a, b)
        assert np.abs(got - want).max() <= 1e-12 * max(1.0, np.abs(want).max())


def test_matmul_shape_errors():
    with pytest.raises(ShapeError):
        matmul(np.zeros((2, 3)), np.zeros((4, 2)))
    with pytest.raises(ShapeError):
        matmul(np.zeros(3), np.zeros((3, 2)))


def test_rng_stream_reproducible():
    a = RngStream(123, 7).generator().random(100)
    b = RngStream(123, 7).generator().random(100)
    assert np.array_equal(a, b)


def test_rng_stream_distinct_keys_differ():
    base = RngStream(123, 7).generator().random(100)
    for other in (RngStream(124, 7), RngStream(123, 8)):
        assert not np.array_equal(base, other.generator().random(100))


def test_child_streams_deterministic_and_distinct():
    root = RngStream(5)
    again = RngStream(5)
    assert root.child(3).stream == again.child(3).stream
    tags = [root.child(t).stream for t in range(64)]
    assert len(set(tags)) == 64
    assert all(s != root.stream for s in tags)


def test_child_streams_statistically_independent():
    # correlation between sibling streams should be at noise level
    n = 20_000
    root = RngStream(99)
    a = root.child(1).generator().random(n)
    b = root.child(2).generator().random(n)
    r = np.corrcoef(a, b)[0, 1]
    assert abs(r) < 4.0 / np.sqrt(n)


def test_derive_seed_order_sensitive():
    assert derive_seed(1, 2) != derive_seed(2, 1)
    assert derive_seed(1, 2) == derive_seed(1, 2)
    assert 0 <= derive_seed(0) < (1 << 64)


def test_bernoulli_sample_is_binary_and_seeded():
    p = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    rng = RngStream(1, 2)
    draw = bernoulli_sample(p, rng, n=1000)
    assert draw.shape == (1000, 5)
    assert set(np.unique(draw)) <= {0.0, 1.0}
    again = bernoulli_sample(p, RngStream(1, 2), n=1000)
    assert np.array_equal(draw, again)


def test_bernoulli_sample_edge_probabilities_exact():
    p = np.array([0.0, 1.0])
    draw = bernoulli_sample(p, RngStream(3), n=10_000)
    assert draw[:, 0].sum() == 0.0
    assert draw[:, 1].sum() == 10_000.0


def test_bernoulli_sample_concentrates_at_p():
    p = np.full(8, 0.3)
    n = 100_000
    draw = bernoulli_sample(p, RngStream(17), n=n)
    freq = draw.mean(axis=0)
    sigma = np.sqrt(0.3 * 0.7 / n)
    assert np.abs(freq - 0.3).max() < 5 * sigma


def test_bernoulli_sample_rejects_out_of_range():
    with pytest.raises(DomainError):
        bernoulli_sample(np.array([1.1]), RngStream(0))
    with pytest.raises(DomainError):
        bernoulli_sample(np.array([-0.1]), RngStream(0))
