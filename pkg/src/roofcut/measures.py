"""Pure-state entanglement quantifiers for qubit systems.

Two measures are shipped for the convex-roof solver: the three-tangle
(:data:`TAU`) and the pi-tangle (:data:`PI`).  Both are built here from
their textbook ingredients (concurrence, negativity) using the dense
routines in :mod:`roofcut.qlinalg`; the compiled oracle kernel uses faster
closed forms and is checked against these.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InputError, InternalConsistencyError, MeasureNormalizationError
from .qlinalg import (
    DensityMatrix,
    PureState,
    eigh,
    partial_trace,
    partial_transpose,
    trace_norm,
)

NEG_CLAMP = 1e-9

SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_YY = np.kron(SIGMA_Y, SIGMA_Y)


def _clamp(value: float, what: str) -> float:
    if value < -NEG_CLAMP:
        raise InternalConsistencyError(f"{what} = {value:.3e} is negative beyond rounding")
    return max(value, 0.0)


def _as_density(state) -> DensityMatrix:
    if isinstance(state, PureState):
        return state.density()
    if isinstance(state, DensityMatrix):
        return state
    raise InputError(f"expected PureState or DensityMatrix, got {type(state).__name__}")


def _three_qubit(psi) -> PureState:
    if not isinstance(psi, PureState):
        raise InputError("expected a PureState")
    if psi.dims != (2, 2, 2):
        raise InputError(f"three-qubit state required, got dims {psi.dims}")
    return psi


def _concurrence_from_factor(w: np.ndarray) -> float:
    """Wootters concurrence of the two-qubit state ``w @ w^dagger``.

    For rho = w w^dagger the square roots of the eigenvalues of
    ``rho @ rho_tilde`` are the singular values of ``w^T (Y x Y) w``, which
    avoids square roots of near-zero eigenvalues.
    """
    s = np.linalg.svd(w.T @ _YY @ w, compute_uv=False)
    s = np.concatenate([s, np.zeros(4 - s.size)])
    return float(max(0.0, s[0] - s[1] - s[2] - s[3]))


def concurrence_2q(rho) -> float:
    """Wootters concurrence of a two-qubit state."""
    rho = _as_density(rho)
    if rho.dims != (2, 2):
        raise InputError(f"two-qubit state required, got dims {rho.dims}")
    w, v = eigh(rho.matrix)
    # eigenvalues at rounding level would contribute ~sqrt(1e-16) each
    keep = w > 64 * np.finfo(float).eps * max(w[-1], 0.0)
    return _concurrence_from_factor(v[:, keep] * np.sqrt(w[keep]))


def concurrence_bipartition(psi: PureState, part: int | str) -> float:
    """Concurrence of a three-qubit pure state across ``part | rest``."""
    psi = _three_qubit(psi)
    k = _part_index(part)
    rest = [j for j in range(3) if j != k]
    red = partial_trace(psi, rest).matrix
    purity = float(np.real(np.trace(red @ red)))
    return float(np.sqrt(max(0.0, 2.0 * (1.0 - purity))))


def _part_index(part) -> int:
    if isinstance(part, str):
        try:
            return "ABC".index(part.upper())
        except ValueError:
            raise InputError(f"unknown part {part!r}") from None
    if part not in (0, 1, 2):
        raise InputError(f"unknown part {part!r}")
    return int(part)


def three_tangle(psi: PureState) -> float:
    """Coffman-Kundu-Wootters residual tangle, clamped to [0, 1]."""
    psi = _three_qubit(psi)
    c_a = concurrence_bipartition(psi, 0)
    # the amplitudes factor each two-qubit reduction exactly: rho_AB = W W^dagger
    t = psi.amplitudes.reshape(2, 2, 2)  # axes (q2, q1, q0)
    c_ab = _concurrence_from_factor(t.reshape(2, 4).T)
    c_ac = _concurrence_from_factor(t.transpose(0, 2, 1).reshape(4, 2))
    tau = c_a**2 - c_ab**2 - c_ac**2
    return min(_clamp(tau, "three-tangle"), 1.0)


def negativity(rho, partition) -> float:
    """``||rho^{T_X}||_1 - 1`` where X is the subsystem set ``partition``."""
    rho = _as_density(rho)
    parts = [partition] if np.isscalar(partition) else list(partition)
    if not parts:
        raise InputError("empty partition")
    n = len(rho.dims)
    if len(set(parts)) == n:
        raise InputError("partition must leave a nonempty complement")
    m = rho.matrix
    for k in sorted(set(parts)):
        m = partial_transpose((m, rho.dims), k)
    return _clamp(trace_norm(m) - 1.0, "negativity")


def pi_tangle(psi: PureState) -> float:
    """Average of the three residual negativities of a three-qubit pure state."""
    psi = _three_qubit(psi)
    rho = psi.density()
    single = [negativity(rho, [k]) for k in range(3)]
    pair = {}
    for k, j in ((0, 1), (0, 2), (1, 2)):
        other = 3 - k - j
        pair[(k, j)] = negativity(partial_trace(rho, [other]), [0])
    total = 0.0
    for k in range(3):
        j1, j2 = [j for j in range(3) if j != k]
        total += (single[k] ** 2
                  - pair[tuple(sorted((k, j1)))] ** 2
                  - pair[tuple(sorted((k, j2)))] ** 2)
    return _clamp(total / 3.0, "pi-tangle")


@dataclass(frozen=True)
class PureStateMeasure:
    """A non-negative pure-state entanglement measure.

    ``kernel_id`` names the matching closed form in the compiled oracle
    kernel; ``evaluate`` is always the reference implementation.
    """

    name: str
    func: Callable[[PureState], float]
    normalized_upper_bound: float = 1.0
    kernel_id: int = -1

    def evaluate(self, psi: PureState) -> float:
        value = float(self.func(psi))
        if not -NEG_CLAMP <= value <= self.normalized_upper_bound + NEG_CLAMP:
            raise MeasureNormalizationError(
                f"{self.name}({psi.amplitudes}) = {value!r} outside "
                f"[0, {self.normalized_upper_bound}]"
            )
        return value

    def __call__(self, psi: PureState) -> float:
        return self.evaluate(psi)


TAU = PureStateMeasure("tau", three_tangle, 1.0, kernel_id=0)
PI = PureStateMeasure("pi", pi_tangle, 1.0, kernel_id=1)

MEASURES = {"tau": TAU, "pi": PI}


def get_measure(name: str) -> PureStateMeasure:
    try:
        return MEASURES[name.lower()]
    except KeyError:
        raise InputError(f"unknown measure {name!r}; choose from {sorted(MEASURES)}") from None
