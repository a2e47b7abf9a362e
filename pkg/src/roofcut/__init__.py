"""Certified lower bounds on convex-roof entanglement measures.

The convex roof of a pure-state measure is computed through its Lagrangian
dual, a linear semi-infinite program over Hermitian operators on the range
of the state, solved with a central cutting-plane method.  Every confirmed
dual point is an entanglement witness whose value is a lower bound.

>>> from roofcut import quantify, state_ghz_w, TAU
>>> res = quantify(state_ghz_w(0.9), TAU)          # doctest: +SKIP
>>> round(res.lower_bound, 2)                      # doctest: +SKIP
0.69
"""
from .ccpa import CcpaResult, OracleConfig, oracle, quantify, run, upper_bound_random_decomposition
from .dual import DualInstance, build_instance
from .errors import InputError, InternalConsistencyError, LPError, MeasureNormalizationError
from .measures import PI, TAU, PureStateMeasure, get_measure, pi_tangle, three_tangle
from .qlinalg import DensityMatrix, PureState
from .reference import analytic, state_ghz_w, state_werner

__version__ = "0.1.0"

__all__ = [
    "CcpaResult", "DensityMatrix", "DualInstance", "InputError", "InternalConsistencyError",
    "LPError", "MeasureNormalizationError", "OracleConfig", "PI", "PureState",
    "PureStateMeasure", "TAU", "analytic", "build_instance", "get_measure", "oracle",
    "pi_tangle", "quantify", "run", "state_ghz_w", "state_werner", "three_tangle",
    "upper_bound_random_decomposition",
]
