"""Numerical tolerances and default budgets, in one place."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    structural: float = 1e-10
    spectral: float = 1e-9
    hermitian: float = 1e-10
    hermitian_tag: float = 1e-12
    probability: float = 1e-10
    negative_probability: float = 1e-12
    signaling: float = 1e-9
    tensor_positive: float = 1e-10
    jacobi: float = 1e-15
    jacobi_max_sweeps: int = 100


TOL = Tolerances()

DEFAULT_SEED = 271828
LHV_BUDGET = 10**8
SOURCE_DIM_CAP = 4096
