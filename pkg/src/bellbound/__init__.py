"""Numerical toolkit for Bell-inequality violations by multi-qudit states.

Exact LHV constants, see-saw lower bounds on quantum values, source-operator
constructions for pure states, and a catalogue of closed-form upper bounds.
"""

__version__ = "0.1.0"

from .bounds import (
    BoundQuery,
    BoundReport,
    best_known,
    corollary_generalized,
    corollary_projective,
    ghz_bound,
    theorem1,
)
from .errors import BellboundError, BudgetError, DimensionError, ValidationError
from .quantum import (
    QuantumModel,
    SeesawConfig,
    ViolationReport,
    bell_operator,
    grid_oracle_chsh,
    quantum_behavior,
    quantum_envelope,
    seesaw,
    violation_ratio,
)
from .scenario import (
    Behavior,
    BellFunctional,
    BellScenario,
    bell_value,
    chsh,
    is_nonsignaling,
    lhv_constants,
    mermin_klyshko,
)
from .source import build_source_operator, covering_estimate, decompose, source_report
from .tensor import flip_operator, kron, mc_tensor_positive, partial_trace, trace_norm
