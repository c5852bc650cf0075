"""In-place parameter optimizers."""

import numpy as np

from ..exceptions import ConfigError


class Sgd:
    def __init__(self, learning_rate: float):
        if learning_rate <= 0:
            raise ConfigError("learning rate must be positive")
        self.learning_rate = learning_rate

    def step(self, named: list[tuple[str, np.ndarray, np.ndarray]]):
        for _, param, grad in named:
            param -= self.learning_rate * grad


class Adam:
    def __init__(self, learning_rate: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        if learning_rate <= 0:
            raise ConfigError("learning rate must be positive")
        if not (0 <= beta1 < 1 and 0 <= beta2 < 1):
            raise ConfigError("adam betas must lie in [0, 1)")
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.slots: dict[str, tuple[np.ndarray, np.ndarray]] = {}

    def step(self, named: list[tuple[str, np.ndarray, np.ndarray]]):
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for key, param, grad in named:
            if key not in self.slots:
                self.slots[key] = (np.zeros_like(param), np.zeros_like(param))
            m, v = self.slots[key]
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            param -= self.learning_rate * (m / c1) / (np.sqrt(v / c2) + self.eps)


def build_optimizer(name: str, learning_rate: float, beta1: float, beta2: float, eps: float):
    if name == "sgd":
        return Sgd(learning_rate)
    if name == "adam":
        return Adam(learning_rate, beta1, beta2, eps)
    raise ConfigError(f"unknown optimizer {name!r}")
