"""Simulation and estimation for the stable Cox-Ingersoll-Ross model."""

from .core import DerivedParams, ModelParams, TailConstants
from .estimators import EstimateSet, clse, sigma_hat, wclse
from .simulator import Observations, Path, simulate_path
from .stable_noise import StableSpec

__all__ = [
    "DerivedParams", "EstimateSet", "ModelParams", "Observations", "Path",
    "StableSpec", "TailConstants", "clse", "sigma_hat", "simulate_path", "wclse",
]
__version__ = "0.1.0"
