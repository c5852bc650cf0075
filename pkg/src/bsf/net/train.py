"""Mini-batch training with early stopping and best-epoch restore."""

from dataclasses import dataclass, field

import numpy as np

from ..core import RngStream, as_tensor
from ..exceptions import ConfigError, ShapeError, TrainingDivergedError
from .losses import softmax_cross_entropy
from .network import Network
from .optim import build_optimizer

_SHUFFLE_DOMAIN = 0x5BF1
_SPLIT_DOMAIN = 0x5BF2
_MASK_DOMAIN = 0x5BF3


@dataclass
class TrainConfig:
    optimizer: str = "adam"
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 20
    val_fraction: float = 0.2
    penalty: float | list | tuple | None = None
    restore_best: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.max_epochs < 0:
            raise ConfigError("max_epochs must be >= 0")
        if self.patience < 0:
            raise ConfigError("patience must be >= 0")
        if self.patience > self.max_epochs:
            raise ConfigError("patience cannot exceed max_epochs")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ConfigError("val_fraction must lie in [0, 1)")


@dataclass
class History:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    gate_history: list = field(default_factory=list)
    best_epoch: int = -1
    stopped_early: bool = False

    @property
    def epochs_run(self) -> int:
        return len(self.train_loss)


@dataclass
class TrainResult:
    net: Network
    history: History
    best_val_loss: float = float("inf")


def _stratified_holdout(y: np.ndarray, fraction: float, rng: RngStream):
    """Per-class split into (train_idx, val_idx); every class keeps at least
    one training row."""
    gen = rng.generator()
    train_idx, val_idx = [], []
    for label in np.unique(y):
        idx = np.flatnonzero(y == label)
        perm = idx[gen.permutation(len(idx))]
        n_val = min(int(round(fraction * len(idx))), len(idx) - 1)
        val_idx.append(perm[:n_val])
        train_idx.append(perm[n_val:])
    return np.sort(np.concatenate(train_idx)), np.sort(np.concatenate(val_idx))


def _assign_penalties(net: Network, penalty):
    if penalty is None:
        return
    gates = net.gates()
    if isinstance(penalty, (int, float)):
        values = [float(penalty)] * len(gates)
    else:
        values = [float(v) for v in penalty]
        if len(values) != len(gates):
            raise ConfigError(
                f"{len(values)} penalty values for {len(gates)} gate layers"
            )
    for (_, gate), value in zip(gates, values):
        if value < 0:
            raise ConfigError("penalty must be non-negative")
        gate.penalty = value


def train(net: Network, x, y, config: TrainConfig) -> "TrainResult":
    """Train in place. With ``restore_best`` (the default) the network ends at
    the parameters of its best validation epoch; otherwise at the last epoch,
    which penalized gate runs want so the sparsity pressure acts for the whole
    schedule instead of being rolled back to an early snapshot."""
    x = as_tensor(x)
    y = np.asarray(y, dtype=np.int64)
    if x.shape[0] != y.shape[0]:
        raise ShapeError("x and y row counts differ")
    _assign_penalties(net, config.penalty)

    root = RngStream(config.seed)
    net.initialize(root)
    shuffle_rng = root.child(_SHUFFLE_DOMAIN)
    mask_rng = root.child(_MASK_DOMAIN)

    if config.val_fraction > 0 and x.shape[0] >= 2:
        tr, va = _stratified_holdout(y, config.val_fraction, root.child(_SPLIT_DOMAIN))
    else:
        tr, va = np.arange(x.shape[0]), np.array([], dtype=np.int64)
    x_tr, y_tr = x[tr], y[tr]
    x_va, y_va = x[va], y[va]
    has_val = len(va) > 0

    optimizer = build_optimizer(
        config.optimizer, config.learning_rate, config.beta1, config.beta2, config.eps
    )
    history = History()
    best_monitor = float("inf")
    best_snapshot = None
    since_best = 0
    n = len(x_tr)

    for epoch in range(config.max_epochs):
        order = shuffle_rng.generator().permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            # overflow here is diagnosed by the finite checks below, so numpy
            # warnings would only duplicate the typed error
            with np.errstate(over="ignore", invalid="ignore"):
                trace = net.forward(x_tr[batch], train=True, rng=mask_rng)
                if not np.all(np.isfinite(trace.output)):
                    raise TrainingDivergedError(
                        f"network output became non-finite at epoch {epoch}; "
                        "try a lower learning rate"
                    )
                data_loss, loss_grad = softmax_cross_entropy(trace.output, y_tr[batch])
            objective = data_loss + net.penalty_value()
            if not np.isfinite(objective):
                raise TrainingDivergedError(
                    f"objective became non-finite at epoch {epoch}; "
                    "try a lower learning rate"
                )
            net.backward(trace, loss_grad)
            named = []
            for i, layer in enumerate(net.layers):
                for name in layer.trainable_params():
                    named.append((f"{i}.{name}", layer.params()[name], net.grads[i][name]))
            optimizer.step(named)
            net.constrain()
            epoch_loss += objective * len(batch)
        history.train_loss.append(epoch_loss / n)

        if has_val:
            val_loss, _ = softmax_cross_entropy(net.predict(x_va), y_va)
        else:
            val_loss = history.train_loss[-1]
        if not np.isfinite(val_loss):
            raise TrainingDivergedError(
                f"validation loss became non-finite at epoch {epoch}; "
                "try a lower learning rate"
            )
        history.val_loss.append(float(val_loss))
        history.gate_history.append(
            {i: gate.p.copy() for i, gate in net.gates()}
        )

        if val_loss < best_monitor:
            best_monitor = float(val_loss)
            best_snapshot = net.snapshot()
            history.best_epoch = epoch
            since_best = 0
        else:
            since_best += 1
            if config.patience > 0 and since_best >= config.patience:
                history.stopped_early = True
                break

    if config.restore_best and best_snapshot is not None:
        net.restore(best_snapshot)
    return TrainResult(net=net, history=history, best_val_loss=best_monitor)
