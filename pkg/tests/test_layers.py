"""Layer math: forwards against naive loops, backwards against finite differences."""

import numpy as np
import pytest

from bsf.core import RngStream
from bsf.exceptions import ShapeError
from bsf.net import Conv1d, Dense, Flatten, Relu

H = 1e-5
REL_TOL = 1e-6


def rel_err(a, b):
    scale = max(1.0, float(np.abs(a).max(initial=0)), float(np.abs(b).max(initial=0)))
    return float(np.abs(a - b).max(initial=0)) / scale


def fd_param_grad(layer, x, param_name, probe):
    """Central finite differences of L = sum(probe * forward(x)) w.r.t. a parameter."""
    param = layer.params()[param_name]
    grad = np.zeros_like(param)
    flat = param.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + H
        up = float((probe * layer.forward(x, False, None)[0]).sum())
        flat[i] = keep - H
        down = float((probe * layer.forward(x, False, None)[0]).sum())
        flat[i] = keep
        gflat[i] = (up - down) / (2 * H)
    return grad


def fd_input_grad(layer, x, probe):
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + H
        up = float((probe * layer.forward(x, False, None)[0]).sum())
        flat[i] = keep - H
        down = float((probe * layer.forward(x, False, None)[0]).sum())
        flat[i] = keep
        gflat[i] = (up - down) / (2 * H)
    return grad


def check_layer_grads(layer, x, seed=0):
    rng = np.random.default_rng(seed)
    y, cache = layer.forward(x, False, None)
    probe = rng.normal(size=y.shape)
    grad_x, grads = layer.backward(cache, probe)
    for name, analytic in grads.items():
        fd = fd_param_grad(layer, x, name, probe)
        assert rel_err(analytic, fd) <= REL_TOL, f"{name} gradient mismatch"
    fd_x = fd_input_grad(layer, x, probe)
    assert rel_err(grad_x, fd_x) <= REL_TOL, "input gradient mismatch"


# --- dense ------------------------------------------------------------------


def naive_dense(x, w, b):
    n, k = x.shape
    m = w.shape[1]
    y = np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            acc = b[j]
            for t in range(k):
                acc += x[i, t] * w[t, j]
            y[i, j] = acc
    return y


def test_dense_forward_equals_naive_loops_exactly():
    rng = np.random.default_rng(3)
    for _ in range(5):
        n, k, m = rng.integers(1, 9, size=3)
        layer = Dense(int(k), int(m))
        layer.init_params(RngStream(int(rng.integers(1 << 31))))
        x = rng.normal(size=(n, k))
        got, _ = layer.forward(x, False, None)
        assert np.array_equal(got, naive_dense(x, layer.w, layer.b))


def test_dense_gradients_match_finite_differences():
    layer = Dense(5, 4)
    layer.init_params(RngStream(1))
    x = np.random.default_rng(2).normal(size=(6, 5))
    check_layer_grads(layer, x)


def test_dense_zero_input_columns_are_skipped_exactly():
    layer = Dense(6, 3)
    layer.init_params(RngStream(4))
    rng = np.random.default_rng(5)
    x = rng.normal(size=(10, 6))
    x[:, [1, 4]] = 0.0
    full, _ = layer.forward(x, False, None)
    shrunk = Dense(4, 3)
    keep = [0, 2, 3, 5]
    shrunk.w = layer.w[keep]
    shrunk.b = layer.b
    sub, _ = shrunk.forward(x[:, keep], False, None)
    assert np.array_equal(full, sub)


def test_dense_shape_validation():
    with pytest.raises(ShapeError):
        Dense(0, 3)
    layer = Dense(3, 2)
    with pytest.raises(ShapeError):
        layer.forward(np.ones((4, 5)), False, None)
    with pytest.raises(ShapeError):
        layer.out_shape((4,))


def test_he_uniform_init_bound_and_determinism():
    layer = Dense(50, 40)
    layer.init_params(RngStream(9))
    bound = np.sqrt(6.0 / 50)
    assert np.abs(layer.w).max() <= bound
    assert np.abs(layer.w).max() > 0.8 * bound  # actually fills the range
    assert np.all(layer.b == 0.0)
    other = Dense(50, 40)
    other.init_params(RngStream(9))
    assert np.array_equal(layer.w, other.w)


# --- relu / flatten ----------------------------------------------------------


def test_relu_forward_and_gradient():
    layer = Relu()
    x = np.array([[-2.0, -0.0, 0.5, 3.0]])
    y, cache = layer.forward(x, False, None)
    assert y.tolist() == [[0.0, 0.0, 0.5, 3.0]]
    grad_x, grads = layer.backward(cache, np.ones_like(x))
    assert grad_x.tolist() == [[0.0, 0.0, 1.0, 1.0]]
    assert grads == {}


def test_relu_gradient_matches_fd_away_from_kink():
    layer = Relu()
    rng = np.random.default_rng(7)
    x = rng.normal(size=(5, 8))
    x[np.abs(x) < 0.05] = 0.1  # keep clear of the nondifferentiable point
    check_layer_grads(layer, x)


def test_flatten_round_trip():
    layer = Flatten()
    x = np.random.default_rng(8).normal(size=(4, 3, 2))
    y, cache = layer.forward(x, False, None)
    assert y.shape == (4, 6)
    assert layer.out_shape((3, 2)) == (6,)
    grad_x, _ = layer.backward(cache, y)
    assert np.array_equal(grad_x, x)


# --- conv1d ------------------------------------------------------------------


def naive_conv1d(x, k, b, stride):
    n, length, c_in = x.shape
    width, _, c_out = k.shape
    out_len = -(-length // stride)
    deficit = max((out_len - 1) * stride + width - length, 0)
    left = deficit // 2
    xp = np.pad(x, ((0, 0), (left, deficit - left), (0, 0)))
    y = np.zeros((n, out_len, c_out))
    for i in range(n):
        for o in range(out_len):
            for co in range(c_out):
                acc = b[co]
                for dw in range(width):
                    for ci in range(c_in):
                        acc += xp[i, o * stride + dw, ci] * k[dw, ci, co]
                y[i, o, co] = acc
    return y


@pytest.mark.parametrize("length,width,stride", [(9, 3, 1), (8, 4, 1), (10, 3, 2), (7, 5, 3)])
def test_conv1d_forward_matches_naive_loops(length, width, stride):
    layer = Conv1d(2, 3, width, stride)
    layer.init_params(RngStream(11))
    x = np.random.default_rng(12).normal(size=(4, length, 2))
    got, _ = layer.forward(x, False, None)
    want = naive_conv1d(x, layer.k, layer.b, stride)
    assert got.shape == want.shape == (4, -(-length // stride), 3)
    assert np.abs(got - want).max() <= 1e-12


def test_conv1d_same_padding_preserves_length_at_stride_1():
    layer = Conv1d(1, 1, 7)
    assert layer.out_shape((256, 1)) == (256, 1)
    assert layer.out_shape((5, 1)) == (5, 1)


def test_conv1d_identity_kernel_reproduces_input():
    layer = Conv1d(1, 1, 3)
    layer.k[1, 0, 0] = 1.0  # centered tap
    x = np.random.default_rng(13).normal(size=(2, 10, 1))
    y, _ = layer.forward(x, False, None)
    assert np.array_equal(y, x)


def test_conv1d_position_shift_equivariance_inside_borders():
    layer = Conv1d(1, 2, 3)
    layer.init_params(RngStream(14))
    x = np.zeros((1, 12, 1))
    x[0, 4, 0] = 1.0
    y1, _ = layer.forward(x, False, None)
    x2 = np.roll(x, 2, axis=1)
    y2, _ = layer.forward(x2, False, None)
    assert np.allclose(np.roll(y1, 2, axis=1)[0, 3:10], y2[0, 3:10], atol=0)


def test_conv1d_gradients_match_finite_differences():
    layer = Conv1d(2, 3, 3, stride=1)
    layer.init_params(RngStream(15))
    x = np.random.default_rng(16).normal(size=(3, 7, 2))
    check_layer_grads(layer, x)


def test_conv1d_strided_gradients_match_finite_differences():
    layer = Conv1d(2, 2, 4, stride=2)
    layer.init_params(RngStream(17))
    x = np.random.default_rng(18).normal(size=(2, 9, 2))
    check_layer_grads(layer, x)


def test_conv1d_zero_channel_skip_is_exact():
    layer = Conv1d(3, 2, 3)
    layer.init_params(RngStream(19))
    rng = np.random.default_rng(20)
    x = rng.normal(size=(4, 8, 3))
    x[:, :, 1] = 0.0
    full, _ = layer.forward(x, False, None)
    shrunk = Conv1d(2, 2, 3)
    shrunk.k = layer.k[:, [0, 2], :]
    shrunk.b = layer.b
    sub, _ = shrunk.forward(x[:, :, [0, 2]], False, None)
    assert np.array_equal(full, sub)


def test_conv1d_shape_validation():
    with pytest.raises(ShapeError):
        Conv1d(1, 1, 0)
    layer = Conv1d(2, 1, 3)
    with pytest.raises(ShapeError):
        layer.forward(np.ones((2, 5, 3)), False, None)
    with pytest.raises(ShapeError):
        layer.out_shape((5,))
