"""Closed-form reference curves for the GHZ/W mixture and GHZ-Werner family.

``ghz_w``:  rho_p  = p [GHZ] + (1-p) [W]
``werner``: rho'_p = p [GHZ] + (1-p) I/8
"""
from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .errors import InputError
from .qlinalg import DensityMatrix, PureState

S = 8.0 * sqrt(6.0) / 9.0
P0 = S ** (2.0 / 3.0) / (1.0 + S ** (2.0 / 3.0))
P1 = 0.5 + 1.0 / (2.0 * sqrt(1.0 + S * S))
P_W = 0.6955427
P_B = 3.0 / 7.0

FAMILIES = ("ghz_w", "werner")


@dataclass(frozen=True)
class FamilyPoint:
    family: str
    p: float

    def __post_init__(self):
        fam = normalize_family(self.family)
        object.__setattr__(self, "family", fam)
        _check_p(self.p)

    def state(self) -> DensityMatrix:
        return state_ghz_w(self.p) if self.family == "ghz_w" else state_werner(self.p)


def normalize_family(name: str) -> str:
    key = name.lower().replace("-", "_")
    if key not in FAMILIES:
        raise InputError(f"unknown family {name!r}; choose ghz-w or werner")
    return key


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise InputError(f"p = {p} outside [0, 1]")
    return p


def ghz() -> PureState:
    a = np.zeros(8, dtype=np.complex128)
    a[0] = a[7] = 1.0 / sqrt(2.0)
    return PureState((2, 2, 2), a)


def w_state() -> PureState:
    a = np.zeros(8, dtype=np.complex128)
    a[1] = a[2] = a[4] = 1.0 / sqrt(3.0)
    return PureState((2, 2, 2), a)


def state_ghz_w(p: float) -> DensityMatrix:
    p = _check_p(p)
    m = p * ghz().projector() + (1.0 - p) * w_state().projector()
    return DensityMatrix((2, 2, 2), m)


def state_werner(p: float) -> DensityMatrix:
    p = _check_p(p)
    m = p * ghz().projector() + (1.0 - p) * np.eye(8) / 8.0
    return DensityMatrix((2, 2, 2), m)


# --------------------------------------------------------------------------
# three-tangle


def tau3(p: float) -> float:
    """Three-tangle of the pure superposition sqrt(p)|GHZ> - sqrt(1-p)|W>."""
    return abs(p * p - S * sqrt(p * (1.0 - p) ** 3))


def tau3_conv(p: float, p1: float = P1) -> float:
    return (p - p1 + (1.0 - p) * (p1 * p1 - S * sqrt(p1 * (1.0 - p1) ** 3))) / (1.0 - p1)


def tau_ghz_w(p: float) -> float:
    p = _check_p(p)
    if p <= P0:
        return 0.0
    if p <= P1:
        return tau3(p)
    return tau3_conv(p)


def tau_werner(p: float) -> float:
    p = _check_p(p)
    if p <= P_W:
        return 0.0
    return (p - P_W) / (1.0 - P_W)


# --------------------------------------------------------------------------
# pi-tangle


def quartic_coefficients(p: float) -> np.ndarray:
    """Coefficients (highest degree first) of the monic quartic in lambda."""
    q = (p * (1.0 - p)) ** 1.5
    return np.array([
        1.0,
        -1.0,
        5.0 / 36.0 * p**2 - p / 9.0 + 2.0 / 9.0,
        q / (3.0 * sqrt(6.0)) - 7.0 / 27.0 * p**3 + 7.0 / 18.0 * p**2 - p / 6.0 + 1.0 / 27.0,
        (-p * q / (6.0 * sqrt(6.0)) - 41.0 / 648.0 * p**4 + 149.0 / 648.0 * p**3
         - 13.0 / 54.0 * p**2 + 7.0 / 81.0 * p - 1.0 / 81.0),
    ])


def polyval(coeffs: np.ndarray, x):
    out = 0.0 * x
    for a in coeffs:
        out = out * x + a
    return out


def lambda_quartic(p: float) -> np.ndarray:
    """The four roots of the quartic, via balanced companion-matrix eigenvalues.

    Each root gets Newton polishing steps that are kept only while they
    reduce the residual (double roots occur at p = 0 and p = 1).
    """
    p = _check_p(p)
    coeffs = quartic_coefficients(p)
    comp = np.zeros((4, 4))
    comp[0, :] = -coeffs[1:]
    comp[1:, :-1] = np.eye(3)
    roots = np.linalg.eigvals(comp).astype(np.complex128)
    deriv = np.polyder(coeffs)
    for i, z in enumerate(roots):
        res = abs(polyval(coeffs, z))
        for _ in range(8):
            d = polyval(deriv, z)
            if d == 0:
                break
            cand = z - polyval(coeffs, z) / d
            cres = abs(polyval(coeffs, cand))
            if cres >= res:
                break
            z, res = cand, cres
        roots[i] = z
    return roots[np.lexsort((roots.imag, roots.real))]


def _pi_pure_branch(p: float) -> float:
    lam_sum = float(np.sum(np.abs(lambda_quartic(p))))
    return (5.0 * p * p - 4.0 * p + 8.0 - 18.0 * (lam_sum - 1.0) ** 2) / 9.0


def pi_ghz_w(p: float) -> float:
    p = _check_p(p)
    if p <= P0:
        return (4.0 * (sqrt(5.0) - 1.0) * (P0 - p) + p * 9.0 * _pi_pure_branch(P0)) / (9.0 * P0)
    if p <= P1:
        return _pi_pure_branch(p)
    return (p - P1 + (1.0 - p) * _pi_pure_branch(P1)) / (1.0 - P1)


def analytic(family: str, measure: str, p: float) -> float | None:
    """Analytic value if one exists, else ``None`` (werner / pi)."""
    family = normalize_family(family)
    measure = measure.lower()
    if family == "ghz_w":
        return tau_ghz_w(p) if measure == "tau" else pi_ghz_w(p)
    return tau_werner(p) if measure == "tau" else None
