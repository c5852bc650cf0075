from .checkpoint import dump_network, load_network, parse_network, save_network
from .layers import Conv1d, Dense, Flatten, Relu
from .losses import softmax_cross_entropy
from .network import Network, Trace
from .optim import Adam, Sgd, build_optimizer
from .train import History, TrainConfig, TrainResult, train

__all__ = [
    "Adam",
    "Conv1d",
    "Dense",
    "Flatten",
    "History",
    "Network",
    "Relu",
    "Sgd",
    "Trace",
    "TrainConfig",
    "TrainResult",
    "build_optimizer",
    "dump_network",
    "load_network",
    "parse_network",
    "save_network",
    "softmax_cross_entropy",
    "train",
]
