"""Cross-entropy loss and optimizers."""

import numpy as np
import pytest

from bsf.exceptions import ConfigError, DomainError, ShapeError
from bsf.net import Adam, Sgd, build_optimizer, softmax_cross_entropy


def test_uniform_logits_give_log_n_classes():
    loss, _ = softmax_cross_entropy(np.zeros((7, 2)), np.zeros(7, dtype=int))
    assert loss == pytest.approx(np.log(2.0), abs=1e-12)
    loss5, _ = softmax_cross_entropy(np.full((3, 5), 4.2), np.array([0, 2, 4]))
    assert loss5 == pytest.approx(np.log(5.0), abs=1e-12)


def test_confident_correct_prediction_has_small_loss():
    logits = np.array([[20.0, 0.0], [0.0, 20.0]])
    loss, _ = softmax_cross_entropy(logits, np.array([0, 1]))
    assert loss < 1e-8


def test_gradient_rows_sum_to_zero_and_match_fd():
    rng = np.random.default_rng(0)
    logits = rng.normal(size=(6, 4))
    labels = rng.integers(0, 4, size=6)
    loss, grad = softmax_cross_entropy(logits, labels)
    assert np.abs(grad.sum(axis=1)).max() < 1e-12

    h = 1e-6
    fd = np.zeros_like(logits)
    for i in range(logits.shape[0]):
        for j in range(logits.shape[1]):
            up = logits.copy()
            up[i, j] += h
            down = logits.copy()
            down[i, j] -= h
            fd[i, j] = (softmax_cross_entropy(up, labels)[0]
                        - softmax_cross_entropy(down, labels)[0]) / (2 * h)
    assert np.abs(grad - fd).max() < 1e-8


def test_extreme_logits_stay_finite():
    logits = np.array([[1e4, -1e4, 0.0]])
    loss, grad = softmax_cross_entropy(logits, np.array([1]))
    assert np.isfinite(loss)
    assert np.all(np.isfinite(grad))


def test_label_validation():
    with pytest.raises(DomainError):
        softmax_cross_entropy(np.zeros((2, 3)), np.array([0, 3]))
    with pytest.raises(DomainError):
        softmax_cross_entropy(np.zeros((2, 3)), np.array([-1, 0]))
    with pytest.raises(ShapeError):
        softmax_cross_entropy(np.zeros(3), np.array([0]))
    with pytest.raises(ShapeError):
        softmax_cross_entropy(np.zeros((2, 3)), np.array([0]))
    with pytest.raises(ShapeError):
        softmax_cross_entropy(np.zeros((2, 3)), np.array([0, 1]), n_classes=4)


def test_sgd_step_is_exact():
    param = np.array([1.0, 2.0])
    grad = np.array([0.5, -1.0])
    Sgd(0.1).step([("p", param, grad)])
    assert param.tolist() == [1.0 - 0.05, 2.0 + 0.1]


def test_adam_first_step_is_signed_learning_rate():
    # with bias correction the first update is lr * g / (|g| + eps')
    param = np.array([1.0, 1.0, 1.0])
    grad = np.array([10.0, -0.001, 0.0])
    Adam(learning_rate=0.01).step([("p", param, grad)])
    assert param[0] == pytest.approx(1.0 - 0.01, rel=1e-6)
    assert param[1] == pytest.approx(1.0 + 0.01, rel=1e-3)
    assert param[2] == 1.0


def test_adam_keeps_separate_state_per_parameter():
    opt = Adam(learning_rate=0.1)
    a = np.array([0.0])
    b = np.array([0.0])
    opt.step([("a", a, np.array([1.0])), ("b", b, np.array([-1.0]))])
    opt.step([("a", a, np.array([1.0])), ("b", b, np.array([-1.0]))])
    assert a[0] < 0 < b[0]
    assert a[0] == pytest.approx(-b[0], rel=1e-12)


def test_adam_converges_on_quadratic():
    param = np.array([5.0])
    opt = Adam(learning_rate=0.1)
    for _ in range(500):
        opt.step([("p", param, 2.0 * param)])
    assert abs(param[0]) < 1e-3


def test_build_optimizer_validation():
    assert isinstance(build_optimizer("sgd", 0.1, 0.9, 0.999, 1e-8), Sgd)
    assert isinstance(build_optimizer("adam", 0.1, 0.9, 0.999, 1e-8), Adam)
    with pytest.raises(ConfigError):
        build_optimizer("rmsprop", 0.1, 0.9, 0.999, 1e-8)
    with pytest.raises(ConfigError):
        Sgd(0.0)
    with pytest.raises(ConfigError):
        Adam(beta1=1.0)
