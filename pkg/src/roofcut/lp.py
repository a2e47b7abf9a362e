"""Dense LP solver for the cutting-plane master programs.

The master program is::

    max  y
    s.t. <a_i, x> + g_i y <= b_i      (objective cuts, g_i = ||c||)
         <a_i, x> + g_i y >= b_i      (feasibility cuts, g_i = -||psi||)
         -B <= x_m <= B

It is solved by a bounded-variable revised simplex in inequality form: the
basis is a working set of r*r + 1 linearly independent active constraints
(cut rows, variable bounds), so its size does not grow with the number of
cuts.  Variables that have never left zero are carried as "free at zero"
pseudo-constraints; they may leave in either direction and never re-enter.
Pricing picks the largest multiplier; after a degenerate step it falls back
to Bland's smallest-index rule until progress resumes, which rules out
cycling.  Ratio-test ties go to the smallest constraint index.  The inverse is
updated by Sherman-Morrison between refactorizations; optimality is
confirmed with a fresh inverse and the returned point is re-solved from
the working set, so step-by-step drift never reaches the caller.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InputError, LPError

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9
OPT_TOL = 1e-13
REFACTOR_EVERY = 64

OBJECTIVE = "objective"
FEASIBILITY = "feasibility"


@dataclass(frozen=True)
class LinearCut:
    """``<normal, x> + y_coeff*y <= offset`` (objective) or ``>= offset`` (feasibility)."""

    kind: str
    normal: np.ndarray
    offset: float
    y_coeff: float

    def __post_init__(self):
        if self.kind not in (OBJECTIVE, FEASIBILITY):
            raise InputError(f"unknown cut kind {self.kind!r}")
        a = np.array(self.normal, dtype=float).reshape(-1)
        a.setflags(write=False)
        object.__setattr__(self, "normal", a)
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "y_coeff", float(self.y_coeff))

    @classmethod
    def objective(cls, c: np.ndarray, bound: float) -> "LinearCut":
        c = np.asarray(c, dtype=float)
        return cls(OBJECTIVE, c, bound, float(np.linalg.norm(c)))

    @classmethod
    def feasibility(cls, psi: np.ndarray, e_value: float) -> "LinearCut":
        psi = np.asarray(psi, dtype=float)
        return cls(FEASIBILITY, psi, -float(e_value), -float(np.linalg.norm(psi)))

    def as_row(self) -> tuple[np.ndarray, float]:
        """The cut as ``row . (x, y) <= rhs``."""
        row = np.append(self.normal, self.y_coeff)
        if self.kind == OBJECTIVE:
            return row, self.offset
        return -row, -self.offset

    def slack(self, x: np.ndarray, y: float) -> float:
        row, rhs = self.as_row()
        return float(rhs - row[:-1] @ x - row[-1] * y)


@dataclass(frozen=True)
class MasterProgram:
    dim: int
    box_bound: float
    cuts: tuple = field(default_factory=tuple)
    e_bar: float = 1.0

    @classmethod
    def initial(cls, c: np.ndarray, box_bound: float, e_bar: float) -> "MasterProgram":
        c = np.asarray(c, dtype=float)
        return cls(c.size, float(box_bound), (LinearCut.objective(c, e_bar),), float(e_bar))

    def rows(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.cuts:
            return np.zeros((0, self.dim + 1)), np.zeros(0)
        pairs = [cut.as_row() for cut in self.cuts]
        return np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs])


def append_cut(mp: MasterProgram, cut: LinearCut) -> MasterProgram:
    if cut.normal.size != mp.dim:
        raise InputError(f"cut has dimension {cut.normal.size}, program has {mp.dim}")
    return MasterProgram(mp.dim, mp.box_bound, mp.cuts + (cut,), mp.e_bar)


class LPResult(NamedTuple):
    x: np.ndarray
    y: float
    status: str
    iterations: int
    multipliers: dict  # cut index -> multiplier, for cuts in the final basis


def solve(mp: MasterProgram, max_iter: int | None = None) -> LPResult:
    """Maximize y over the box and the accumulated cuts."""
    n = mp.dim
    nv = n + 1
    R, b = mp.rows()
    m = R.shape[0]
    if m == 0:
        raise InputError("master program has no cuts; the Step-0 cut is required")
    if np.any(R[:, -1] <= 0):
        raise LPError("every cut row must bound y from above")
    big = mp.box_bound
    lo, hi = -big, big
    if max_iter is None:
        max_iter = 50 * (m + 2 * nv) + 1000

    # constraint ids: rows [0, m), x lower bounds m + 2j, x upper m + 2j + 1,
    # free-at-zero pseudo constraints PSEUDO + j
    pseudo0 = m + 2 * n

    def normal(k: int) -> np.ndarray:
        if k < m:
            return R[k]
        e = np.zeros(nv)
        if k >= pseudo0:
            e[k - pseudo0] = 1.0
        else:
            j, upper = divmod(k - m, 2)
            e[j] = 1.0 if upper else -1.0
        return e

    z = np.zeros(nv)
    ylim = (b - R[:, :-1] @ z[:-1]) / R[:, -1]
    first = int(np.argmin(ylim))
    z[-1] = ylim[first]
    work = np.array([pseudo0 + j for j in range(n)] + [first])
    A = np.array([normal(k) for k in work])
    in_rows = np.zeros(m, dtype=bool)
    in_rows[first] = True
    in_bound = np.zeros(2 * n, dtype=bool)  # lower j at 2j, upper j at 2j+1
    trace = []
    Ainv = None
    degenerate = False

    def rhs(k: int) -> float:
        return b[k] if k < m else (0.0 if k >= pseudo0 else big)

    fresh = False
    for it in range(max_iter):
        if Ainv is None or it % REFACTOR_EVERY == 0:
            try:
                Ainv = np.linalg.inv(A)
            except np.linalg.LinAlgError:
                raise LPError("singular working-set matrix", trace) from None
            fresh = True
        mu = Ainv[-1, :]
        scale = max(1.0, float(np.max(np.abs(mu))))
        is_pseudo = work >= pseudo0
        eligible = np.where(is_pseudo, np.abs(mu) > OPT_TOL * scale, mu < -OPT_TOL * scale)
        cand = np.flatnonzero(eligible)
        if cand.size == 0 and not fresh:
            # confirm optimality with an exact inverse before stopping
            Ainv = None
            continue
        if cand.size == 0:
            # the vertex of the working set, free of accumulated step drift
            z = Ainv @ np.array([rhs(int(k)) for k in work])
            x = z[:-1].copy()
            mult = {int(k): float(mu[pos]) for pos, k in enumerate(work) if k < m}
            _verify(R, b, lo, hi, x, z[-1], trace)
            return LPResult(np.clip(x, lo, hi), float(z[-1]), "optimal", it, mult)
        if degenerate:
            # Bland: smallest constraint index leaves the working set
            best = int(cand[np.argmin(work[cand])])
        else:
            gain = np.abs(mu[cand])
            top = cand[gain >= gain.max() * (1.0 - 1e-12)]
            best = int(top[np.argmin(work[top])])

        sgn = -np.sign(mu[best])
        d = -sgn * Ainv[:, best]
        d_norm = max(1.0, float(np.max(np.abs(d))))
        thr = PIVOT_TOL * d_norm

        rates = R @ d
        slacks = np.maximum(b - R @ z, 0.0)
        ok_rows = (rates > thr) & ~in_rows
        steps = np.full(m + 2 * n, np.inf)
        steps[:m][ok_rows] = slacks[ok_rows] / rates[ok_rows]
        dx = d[:-1]
        up = (dx > thr) & ~in_bound[1::2]
        down = (dx < -thr) & ~in_bound[0::2]
        bstep = steps[m:]
        bstep[1::2][up] = np.maximum(hi - z[:-1][up], 0.0) / dx[up]
        bstep[0::2][down] = np.maximum(z[:-1][down] - lo, 0.0) / -dx[down]
        step = float(steps.min())
        if not np.isfinite(step):
            raise LPError("master program unbounded; the objective cut is missing", trace)
        tie = step + 1e-12 * max(1.0, step)
        entering = int(np.flatnonzero(steps <= tie)[0])
        step = float(steps[entering])
        degenerate = step <= 1e-12 * max(1.0, float(np.max(np.abs(z))))

        z = z + step * d
        trace.append((it, int(work[best]), entering, float(z[-1])))
        leaving = int(work[best])
        if leaving < m:
            in_rows[leaving] = False
        elif leaving < pseudo0:
            in_bound[leaving - m] = False
        if entering < m:
            in_rows[entering] = True
        else:
            in_bound[entering - m] = True
        work[best] = entering
        a_new = normal(entering)
        v = a_new @ Ainv
        if abs(v[best]) < PIVOT_TOL:
            Ainv = None
        else:
            col = Ainv[:, best].copy()
            v[best] -= 1.0
            Ainv = Ainv - np.outer(col, v) / (v[best] + 1.0)
        A[best] = a_new
        fresh = False
        # snap the variable onto an entering bound exactly
        if m <= entering < pseudo0:
            j, upper = divmod(entering - m, 2)
            z[j] = hi if upper else lo

    raise LPError(f"simplex did not finish in {max_iter} pivots", trace)


def _verify(R, b, lo, hi, x, y, trace):
    z = np.append(x, y)
    viol = R @ z - b
    scale = 1.0 + np.abs(b) + np.abs(R) @ np.abs(z)
    if np.any(viol > FEAS_TOL * scale):
        worst = int(np.argmax(viol / scale))
        raise LPError(f"final point violates cut {worst} by {viol[worst]:.3e}", trace)
    tol = FEAS_TOL * (1.0 + abs(hi))
    if np.any(x < lo - tol) or np.any(x > hi + tol):
        raise LPError("final point leaves the box", trace)
