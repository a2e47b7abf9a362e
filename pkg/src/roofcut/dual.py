"""Finite-coordinate form of the convex-roof dual problem.

The dual lives on Hermitian operators supported on the range of rho.  In
the eigenbasis ``rho = sum_k lambda_k |phi_k><phi_k|`` a candidate operator
is ``X = sum_m x_m Z_m`` for a Gell-Mann basis ``Z`` of r x r Hermitian
matrices; the dual objective is ``-<c, x>`` where ``c`` holds the
coordinates of ``diag(lambda)``, and every pure state ``psi`` in the range
imposes ``E(psi) + <psi_coords, x> >= 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .measures import PureStateMeasure
from .qlinalg import DensityMatrix, HermitianBasis, PureState, eigh, from_coords, gell_mann_basis, to_coords

DEFAULT_RANK_CUTOFF = 1e-12
MAX_DISCARDED_MASS = 1e-12


@dataclass(frozen=True)
class DualInstance:
    rho: DensityMatrix
    measure: PureStateMeasure
    rank: int
    eigenvalues: np.ndarray   # ascending, retained only
    eigenvectors: np.ndarray  # (dim, rank), orthonormal columns
    basis: HermitianBasis
    c: np.ndarray
    box_bound: float

    @property
    def original_dims(self) -> tuple[int, ...]:
        return self.rho.dims

    @property
    def nvars(self) -> int:
        return self.rank * self.rank

    @property
    def ball_bound(self) -> float:
        """Operator-norm radius containing every optimal dual solution."""
        lam = self.eigenvalues
        return (self.rank - 1) * lam[-1] / lam[0]

    @property
    def c_norm(self) -> float:
        return float(np.linalg.norm(self.c))


def build_instance(rho: DensityMatrix, measure: PureStateMeasure,
                   rank_cutoff: float = DEFAULT_RANK_CUTOFF) -> DualInstance:
    """Restrict the dual problem to the range of ``rho``.

    Eigenvalues at or below ``rank_cutoff * lambda_max`` are discarded; if
    they carried more than ``MAX_DISCARDED_MASS`` of trace the state is
    rejected rather than silently truncated.
    """
    if not 0.0 < rank_cutoff < 1.0:
        raise InputError(f"rank_cutoff must lie in (0, 1), got {rank_cutoff}")
    w, v = eigh(rho.matrix)
    keep = w > rank_cutoff * w[-1]
    r = int(np.count_nonzero(keep))
    if r == 0:
        raise InputError("density matrix has rank 0")
    dropped = float(np.sum(np.abs(w[~keep])))
    if dropped > MAX_DISCARDED_MASS:
        raise InputError(f"rank truncation would discard trace mass {dropped:.3e}")
    lam = w[keep]
    lam = lam / lam.sum()
    vecs = v[:, keep]
    basis = gell_mann_basis(r)
    c = to_coords(np.diag(lam).astype(np.complex128), basis)
    box = r * (r - 1) * lam[-1] / lam[0]
    return DualInstance(rho, measure, r, lam, vecs, basis, c, float(box))


def _unit(coeffs: np.ndarray, r: int) -> np.ndarray:
    a = np.asarray(coeffs, dtype=np.complex128).reshape(-1)
    if a.size != r:
        raise InputError(f"expected {r} subspace coefficients, got {a.size}")
    if abs(np.linalg.norm(a) - 1.0) > 1e-10:
        raise InputError(f"subspace coefficients have norm {np.linalg.norm(a)!r}")
    return a


def embed_pure(coeffs, inst: DualInstance) -> PureState:
    """Map subspace coefficients to the full-space state sum_k a_k |phi_k>."""
    a = _unit(coeffs, inst.rank)
    vec = inst.eigenvectors @ a
    return PureState(inst.original_dims, vec / np.linalg.norm(vec))


def pure_coords(coeffs, inst: DualInstance) -> np.ndarray:
    """Coordinates of the projector |a><a| in the instance basis (unit norm)."""
    a = _unit(coeffs, inst.rank)
    return projector_coords(a, inst.basis)


def projector_coords(a: np.ndarray, basis: HermitianBasis) -> np.ndarray:
    proj = np.outer(a, a.conj()).reshape(-1)
    return (basis.flat.conj() @ proj).real


def subspace_operator(x, inst: DualInstance) -> np.ndarray:
    """r x r Hermitian operator with coordinates ``x``."""
    return from_coords(x, inst.basis)


def witness_from_solution(x, inst: DualInstance, tol: float = 1e-9) -> tuple[np.ndarray, float]:
    """Lift ``sum x_m Z_m`` to the full Hilbert space.

    Returns the full-space operator (zero on the kernel of rho) and the
    achieved objective ``tr(rho X)``.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != inst.nvars:
        raise InputError(f"expected {inst.nvars} coordinates, got {x.size}")
    if np.any(np.abs(x) > inst.box_bound * (1.0 + tol) + tol):
        raise InputError("coordinates lie outside the box")
    xs = subspace_operator(x, inst)
    v = inst.eigenvectors
    full = v @ xs @ v.conj().T
    full = 0.5 * (full + full.conj().T)
    objective = float(np.real(np.trace(inst.rho.matrix @ full)))
    return full, objective
