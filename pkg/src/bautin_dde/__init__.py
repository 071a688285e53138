"""Numerical lab for a delayed hematopoiesis model: Hopf curve tracing,
limit-cycle classification, bistability thresholds, and the planar
degenerate-Hopf normal form used as a cross-check."""

from .model import (
    Equilibrium,
    InfeasibleParamsError,
    ModelParams,
    b1,
    beta,
    equilibria,
    feasibility,
    rhs,
    x2,
)

__all__ = [
    "Equilibrium",
    "InfeasibleParamsError",
    "ModelParams",
    "b1",
    "beta",
    "equilibria",
    "feasibility",
    "rhs",
    "x2",
]

__version__ = "0.1.0"
