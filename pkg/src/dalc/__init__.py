"""Domain adaptation of linear and kernel classifiers with probit-margin losses."""

from .data import Dataset, MoonsConfig, make_moons
from .kernels import KernelSpec
from .model import DalcModel, load, save, train
from .objective import DalcHyperparams
from .optimizer import OptimizerConfig

__all__ = [
    "Dataset",
    "DalcHyperparams",
    "DalcModel",
    "KernelSpec",
    "MoonsConfig",
    "OptimizerConfig",
    "load",
    "make_moons",
    "save",
    "train",
]
