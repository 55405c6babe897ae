"""Online algorithms that take advice which may be wrong.

Each problem module implements an algorithm family parameterized by how much
it trusts the advice, measures its (trusted, untrusted) competitive ratios
against exact offline optima, and checks the proven bounds on every run.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .core import (  # noqa: E402
    AdviceMode,
    CompetitivePair,
    ExperimentRecord,
    InvariantViolation,
    ParameterError,
    dominates,
    pareto_frontier,
)

__all__ = [
    "AdviceMode",
    "CompetitivePair",
    "ExperimentRecord",
    "InvariantViolation",
    "ParameterError",
    "__version__",
    "dominates",
    "pareto_frontier",
]
