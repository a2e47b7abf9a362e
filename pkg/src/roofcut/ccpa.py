"""Central cutting-plane solver for the convex-roof dual.

Each iteration solves the master LP for its Chebyshev-like center
``(x, y)``; the separation oracle then minimizes ``E(psi) + <psi|X|psi>``
over pure states in the range of rho.  A point the oracle cannot cut
becomes the new incumbent and an objective cut is added; otherwise the
most violated state(s) are added as feasibility cuts.  ``-<c, w>`` for the
incumbent ``w`` is a lower bound on the convex roof, conditional on the
oracle having found the global minimum.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from . import kernel as _kernel
from .dual import (
    DualInstance,
    build_instance,
    embed_pure,
    projector_coords,
    subspace_operator,
    witness_from_solution,
)
from .errors import InputError, InternalConsistencyError
from .lp import LinearCut, MasterProgram, append_cut, solve
from .measures import PureStateMeasure
from .qlinalg import DensityMatrix, PureState, eigh

log = logging.getLogger(__name__)

CONVERGED = "converged"
ITERATION_CAP = "iteration_cap"
ORACLE_SUSPECT = "oracle_suspect"


@dataclass(frozen=True)
class OracleConfig:
    """Settings for the multistart separation oracle.

    ``num_starts=None`` picks 64 random starts for rank 2 and 512 for rank 8
    (linear in between).  ``cuts_per_iteration=None`` adds one feasibility
    cut per infeasible master point at rank 2 and up to sixteen (the best
    distinct violating local minima) above.  Besides the random starts, each
    call also starts from the eigenvectors of the candidate operator and from
    the most recent cut states (up to ``warm_starts``).  The best
    ``polish_starts`` distinct local minima are then restarted with a
    smaller simplex and ``polish_iters`` iterations, since a few hundred
    Nelder-Mead steps leave rank-8 minima short of convergence.
    """

    num_starts: int | None = None
    local_iters: int = 400
    local_tol: float = 1e-9
    feas_tol: float = 1e-7
    rng_seed: int = 0
    verify_starts_multiplier: int = 4
    simplex_scale: float = 0.15
    xtol: float = 1e-6
    warm_starts: int = 16
    polish_starts: int = 8
    polish_iters: int = 4000
    cuts_per_iteration: int | None = None
    active_tol: float | None = None
    backend: str | None = None

    def __post_init__(self):
        for name in ("local_iters", "local_tol", "feas_tol", "verify_starts_multiplier",
                     "simplex_scale", "xtol"):
            if getattr(self, name) <= 0:
                raise InputError(f"OracleConfig.{name} must be positive")
        for name in ("num_starts", "cuts_per_iteration", "active_tol"):
            if getattr(self, name) is not None and getattr(self, name) <= 0:
                raise InputError(f"OracleConfig.{name} must be positive")
        for name in ("warm_starts", "rng_seed", "polish_starts", "polish_iters"):
            if getattr(self, name) < 0:
                raise InputError(f"OracleConfig.{name} must be non-negative")

    def starts_for(self, rank: int) -> int:
        if self.num_starts is not None:
            return self.num_starts
        return int(round(64 + (512 - 64) * (rank - 2) / 6)) if rank > 2 else 64

    def cuts_for(self, rank: int) -> int:
        if self.cuts_per_iteration is not None:
            return self.cuts_per_iteration
        return 1 if rank <= 2 else 16


@dataclass
class OracleResult:
    value: float
    coeffs: np.ndarray        # unit vector in the range of rho (eigenbasis)
    coords: np.ndarray        # projector coordinates, unit norm
    measure_value: float
    local_minima: list = field(default_factory=list)  # (value, coeffs), ascending, distinct


@dataclass
class CcpaResult:
    lower_bound: float
    witness_coords: np.ndarray
    witness_matrix: np.ndarray
    iterations: int
    final_y: float
    incumbent_history: list
    termination: str
    active_states: list
    y_history: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    num_cuts: int = 0
    runtime_seconds: float = 0.0
    suspect: bool = False

    @property
    def witness_objective(self) -> float:
        return -self.lower_bound


# --------------------------------------------------------------------------
# oracle


def _canonical_phase(a: np.ndarray) -> np.ndarray:
    a = a / np.linalg.norm(a)
    k = int(np.argmax(np.abs(a) > 1e-8 * np.max(np.abs(a))))
    return a * (abs(a[k]) / a[k])


def _haar_coeffs(rng: np.random.Generator, count: int, r: int) -> np.ndarray:
    z = rng.normal(size=(count, r)) + 1j * rng.normal(size=(count, r))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _to_params(a: np.ndarray) -> np.ndarray:
    return np.hstack([a.real, a.imag])


def _from_params(p: np.ndarray, r: int) -> np.ndarray:
    return p[..., :r] + 1j * p[..., r:]


def oracle(x, inst: DualInstance, cfg: OracleConfig = OracleConfig(), *,
           num_starts: int | None = None, seed_key: tuple = (),
           warm: list | None = None) -> OracleResult:
    """Approximate ``min_psi E(psi) + <psi, x>`` over unit vectors in the range.

    Deterministic given ``cfg.rng_seed`` and ``seed_key``.  The minimizing
    state is re-evaluated with the reference measure; a disagreement with
    the kernel beyond 1e-8 is an internal error.
    """
    r = inst.rank
    if inst.measure.kernel_id < 0 or inst.original_dims != (2, 2, 2):
        raise InputError("the oracle kernel supports the shipped three-qubit measures only")
    x = np.asarray(x, dtype=float)
    xs = subspace_operator(x, inst)
    n_rand = cfg.starts_for(r) if num_starts is None else num_starts
    rng = np.random.default_rng(np.random.SeedSequence([cfg.rng_seed, *seed_key]))
    _, evecs = eigh(xs)
    starts = [evecs.T]
    if warm:
        starts.append(np.array(warm[-cfg.warm_starts:]) if cfg.warm_starts else np.zeros((0, r)))
    starts.append(_haar_coeffs(rng, n_rand, r))
    start_coeffs = np.vstack(starts)
    kern = _kernel.get_backend(cfg.backend)
    params, values, _ = kern.multistart(
        _to_params(start_coeffs), inst.eigenvectors, xs, inst.measure.kernel_id,
        cfg.local_iters, cfg.local_tol, cfg.xtol, cfg.simplex_scale)
    if cfg.polish_starts and cfg.polish_iters:
        best_idx = _distinct_best(params, values, r, cfg.polish_starts)
        p2, v2, _ = kern.multistart(
            params[best_idx], inst.eigenvectors, xs, inst.measure.kernel_id,
            cfg.polish_iters, cfg.local_tol, 1e-2 * cfg.xtol, 0.1 * cfg.simplex_scale)
        params, values = np.vstack([params, p2]), np.concatenate([values, v2])
    coeffs = np.array([_canonical_phase(a) for a in _from_params(params, r)])
    # min value, ties broken by lexicographic coordinate order
    keys = [tuple(np.round(np.hstack([a.real, a.imag]), 12)) for a in coeffs]
    order = sorted(range(len(values)), key=lambda i: (values[i], keys[i]))
    minima = []
    for i in order:
        a = coeffs[i]
        if all(abs(np.vdot(b, a)) < 1.0 - 1e-6 for _, b in minima):
            minima.append((float(values[i]), a))
    best_val, best = minima[0]
    coords = projector_coords(best, inst.basis)
    e_val = inst.measure.evaluate(embed_pure(best, inst))
    checked = e_val + float(coords @ x)
    if abs(checked - best_val) > 1e-8 * max(1.0, abs(best_val)):
        raise InternalConsistencyError(
            f"kernel objective {best_val!r} disagrees with reference {checked!r}")
    return OracleResult(checked, best, coords, e_val, minima)


# --------------------------------------------------------------------------
# main loop


def _distinct_best(params: np.ndarray, values: np.ndarray, r: int, count: int) -> list:
    """Indices of the ``count`` lowest values whose states differ beyond a global phase."""
    coeffs = _from_params(params, r)
    coeffs = coeffs / np.linalg.norm(coeffs, axis=1, keepdims=True)
    out = []
    for i in np.argsort(values, kind="stable"):
        if all(abs(np.vdot(coeffs[j], coeffs[i])) < 1.0 - 1e-6 for j in out):
            out.append(int(i))
            if len(out) == count:
                break
    return out


def default_e_bar(inst: DualInstance) -> float:
    return 1.0 + inst.c_norm


def default_max_iters(rank: int) -> int:
    return 200 if rank <= 2 else 2000


def _pure_result(inst: DualInstance, start: float) -> CcpaResult:
    psi = embed_pure(np.ones(1), inst)
    value = inst.measure.evaluate(psi)
    # X = -E |phi><phi| is feasible and tight on the one-dimensional range
    full = -value * psi.projector()
    return CcpaResult(value, np.array([-value]), full, 0, 0.0, [(0, value)], CONVERGED, [psi],
                      runtime_seconds=time.perf_counter() - start)


def run(inst: DualInstance, eps: float = 1e-3, e_bar: float | None = None,
        max_iters: int | None = None, cfg: OracleConfig = OracleConfig(),
        callback=None) -> CcpaResult:
    """Run the central cutting-plane algorithm on ``inst``.

    Rank-1 instances short-circuit to ``E(phi_1)``.
    """
    start = time.perf_counter()
    if eps <= 0:
        raise InputError("eps must be positive")
    if inst.rank == 1:
        return _pure_result(inst, start)
    if e_bar is None:
        e_bar = default_e_bar(inst)
    if e_bar <= 0:
        raise InputError("e_bar must be positive")
    if max_iters is None:
        max_iters = default_max_iters(inst.rank)

    c = inst.c
    n = inst.nvars
    mp = MasterProgram.initial(c, inst.box_bound, e_bar)
    incumbents = []           # (iteration, coords) accepted by the verification oracle
    y_hist = []
    trace = []
    warm = []
    suspect_idx = set()
    termination = ITERATION_CAP
    y = float("nan")
    k = 0
    verify_starts = cfg.verify_starts_multiplier * cfg.starts_for(inst.rank)

    def best_bound() -> float:
        return float(-c @ incumbents[-1][1]) if incumbents else -np.inf

    def audit(states):
        for coords, e_val in states:
            for j, (_, inc) in enumerate(incumbents):
                gap = e_val + coords @ inc
                if j not in suspect_idx and gap < -cfg.feas_tol:
                    log.warning("incumbent %d (bound %.6g) violated by %.3e at iteration %d",
                                j, -c @ inc, gap, k)
                    suspect_idx.add(j)

    def add_feasibility(res, x):
        nonlocal mp
        new_states = _cut_states(res, inst, x, cfg)
        for coords, e_val, a in new_states:
            mp = append_cut(mp, LinearCut.feasibility(coords, e_val))
            warm.append(a)
        audit([(coords, e_val) for coords, e_val, _ in new_states])

    def accept(point):
        nonlocal mp
        mp = append_cut(mp, LinearCut.objective(c, float(c @ point)))
        incumbents.append((k, point.copy()))

    for k in range(1, max_iters + 1):
        sol = solve(mp)
        x, y = sol.x, sol.y
        y_hist.append(y)
        if abs(y) < eps:
            termination = CONVERGED
            break
        res = oracle(x, inst, cfg, seed_key=(k, 0), warm=warm)
        action = "feasibility"
        if res.value >= -cfg.feas_tol:
            res = oracle(x, inst, cfg, seed_key=(k, 1), warm=warm, num_starts=verify_starts)
            if res.value >= -cfg.feas_tol:
                action = "objective"
        if action == "objective":
            accept(x)
        else:
            add_feasibility(res, x)
        trace.append({"iteration": k, "y": y, "oracle": res.value, "action": action,
                      "cuts": len(mp.cuts), "lower_bound": max(best_bound(), 0.0)})
        if callback is not None:
            callback(trace[-1])

    if suspect_idx:
        termination = ORACLE_SUSPECT
    # best incumbent never found violated; w = 0 is always feasible
    valid = [inc for j, inc in enumerate(incumbents) if j not in suspect_idx]
    w = np.zeros(n)
    for _, point in valid:
        if -c @ point > -c @ w:
            w = point
    lower = float(-c @ w)
    full, _ = witness_from_solution(w, inst)
    tol = cfg.active_tol if cfg.active_tol is not None else max(cfg.feas_tol, 10.0 * eps)
    at_w = oracle(w, inst, cfg, seed_key=(k + 1, 2), warm=warm)
    active = _active_states(inst, w, warm + [a for _, a in at_w.local_minima], cfg, tol)
    history = [(it, float(-c @ point)) for it, point in incumbents]
    return CcpaResult(
        lower_bound=lower, witness_coords=w, witness_matrix=full, iterations=k,
        final_y=float(y), incumbent_history=history, termination=termination,
        active_states=active, y_history=y_hist, trace=trace, num_cuts=len(mp.cuts),
        runtime_seconds=time.perf_counter() - start, suspect=bool(suspect_idx))


def _cut_states(res: OracleResult, inst: DualInstance, x: np.ndarray, cfg: OracleConfig):
    """Violating states to turn into cuts: the best, plus distinct runners-up."""
    out = [(res.coords, res.measure_value, res.coeffs)]
    for val, a in res.local_minima[1:]:
        if len(out) >= cfg.cuts_for(inst.rank) or val >= -cfg.feas_tol:
            break
        coords = projector_coords(a, inst.basis)
        e_val = float(val - coords @ x)
        out.append((coords, max(e_val, 0.0), a))
    return out


def _active_states(inst: DualInstance, w: np.ndarray, candidates, cfg: OracleConfig,
                   tol: float) -> list:
    """Distinct candidate states whose constraint residual at ``w`` is below ``tol``."""
    if not candidates:
        return []
    kern = _kernel.get_backend(cfg.backend)
    xs = subspace_operator(w, inst)
    a = np.array(candidates)
    vals = kern.eval_batch(_to_params(a), inst.eigenvectors, xs, inst.measure.kernel_id)
    out = []
    for i in np.argsort(vals, kind="stable"):
        if vals[i] >= tol:
            break
        if all(abs(np.vdot(b, a[i])) < 1.0 - 1e-6 for b in out):
            out.append(a[i])
    return [embed_pure(b, inst) for b in out]


def kkt_residual(states: list, inst: DualInstance) -> float:
    """Distance from rho to the cone of the given range states (NNLS).

    At an optimal witness the active states contain rho in their convex
    hull, so a small residual supports optimality.
    """
    if not states:
        return float(np.linalg.norm(inst.c))
    v = inst.eigenvectors
    cols = []
    for psi in states:
        a = v.conj().T @ psi.amplitudes
        cols.append(projector_coords(a / np.linalg.norm(a), inst.basis))
    _, resid = nnls(np.array(cols).T, inst.c)
    return float(resid)


# --------------------------------------------------------------------------
# primal cross-check


def upper_bound_random_decomposition(rho: DensityMatrix, measure: PureStateMeasure,
                                     samples: int, seed: int = 0,
                                     backend: str | None = None) -> float:
    """Best average ``sum_k p_k E(psi_k)`` over random pure-state decompositions.

    Decompositions of size K in [r, 2r] come from K x r isometries applied
    to ``sqrt(lambda_j) |phi_j>``.  Every value is an upper bound on the
    convex roof.
    """
    if samples < 1:
        raise InputError("samples must be >= 1")
    inst = build_instance(rho, measure)
    r = inst.rank
    lam = inst.eigenvalues
    rng = np.random.default_rng(seed)
    use_kernel = measure.kernel_id >= 0 and rho.dims == (2, 2, 2)
    kern = _kernel.get_backend(backend) if use_kernel else None
    best = np.inf
    zero = np.zeros((r, r))
    for _ in range(samples):
        K = int(rng.integers(r, 2 * r + 1))
        z = rng.normal(size=(K, K)) + 1j * rng.normal(size=(K, K))
        q, rr = np.linalg.qr(z)
        q = q * (np.diag(rr) / np.abs(np.diag(rr)))
        amps = q[:, :r] * np.sqrt(lam)  # rows: unnormalized states in the eigenbasis
        p = np.sum(np.abs(amps) ** 2, axis=1)
        keep = p > 1e-15
        amps, p = amps[keep], p[keep]
        if use_kernel:
            e = kern.eval_batch(_to_params(amps), inst.eigenvectors, zero, measure.kernel_id)
        else:
            e = np.array([measure.evaluate(embed_pure(a / np.linalg.norm(a), inst)) for a in amps])
        best = min(best, float(p @ e))
    return best


def quantify(rho: DensityMatrix, measure: PureStateMeasure, eps: float = 1e-3,
             max_iters: int | None = None, cfg: OracleConfig = OracleConfig()) -> CcpaResult:
    """Convenience wrapper: build the dual instance and run the solver."""
    return run(build_instance(rho, measure), eps=eps, max_iters=max_iters, cfg=cfg)
