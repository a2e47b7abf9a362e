"""Small dense complex linear algebra on tensor-product Hilbert spaces.

Subsystem ordering is little-endian: for ``dims = [d0, d1, d2]`` the flat
basis index of ``|i0 i1 i2>`` is ``i0 + d0*i1 + d0*d1*i2``.  Subsystem 0 is
therefore the *rightmost* factor of a Kronecker product; use :func:`tensor`
to build product operators in subsystem order without thinking about it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError

HERMITIAN_TOL = 1e-10
JACOBI_TOL = 1e-14
_JACOBI_MAX_SWEEPS = 100


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


def _check_dims(dims: Sequence[int], size: int) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise InputError(f"invalid subsystem dimensions {dims}")
    if int(np.prod(dims)) != size:
        raise InputError(f"dims {dims} do not match size {size}")
    return dims


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and hermiticity_error(m) <= tol


def _require_hermitian(m: np.ndarray, what: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"{what} must be square, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if hermiticity_error(m) > HERMITIAN_TOL * scale:
        raise InputError(f"{what} is not Hermitian (max |M - M^dag| = {hermiticity_error(m):.3e})")
    return m


@dataclass(frozen=True)
class PureState:
    """Unit-norm amplitude vector with its subsystem dimensions."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        object.__setattr__(self, "dims", _check_dims(self.dims, amps.size))
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-10:
            raise InputError(f"pure state norm is {norm!r}, expected 1")
        object.__setattr__(self, "amplitudes", _freeze(amps))

    @classmethod
    def normalized(cls, dims, amplitudes) -> "PureState":
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise InputError("cannot normalize the zero vector")
        return cls(tuple(dims), amps / norm)

    def projector(self) -> np.ndarray:
        a = self.amplitudes
        return np.outer(a, a.conj())

    def density(self) -> "DensityMatrix":
        return DensityMatrix._trusted(self.dims, self.projector())


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix.

    Construction validates the invariants and raises :class:`InputError`
    naming the first one violated (hermiticity, trace, PSD).
    """

    dims: tuple[int, ...]
    matrix: np.ndarray
    _eigvals: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InputError(f"density matrix must be square, got shape {m.shape}")
        object.__setattr__(self, "dims", _check_dims(self.dims, m.shape[0]))
        herr = hermiticity_error(m)
        if herr > HERMITIAN_TOL:
            raise InputError(f"hermiticity violated: max |M - M^dag| = {herr:.3e}")
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-10:
            raise InputError(f"trace violated: tr = {tr!r}, expected 1")
        m = 0.5 * (m + m.conj().T)
        w, _ = eigh(m)
        if w[0] < -1e-10:
            raise InputError(f"PSD violated: minimum eigenvalue {w[0]:.3e}")
        object.__setattr__(self, "matrix", _freeze(m))
        object.__setattr__(self, "_eigvals", w)

    @classmethod
    def _trusted(cls, dims, matrix) -> "DensityMatrix":
        """Skip validation for matrices valid by construction (reductions)."""
        obj = object.__new__(cls)
        m = np.asarray(matrix, dtype=np.complex128)
        object.__setattr__(obj, "dims", tuple(dims))
        object.__setattr__(obj, "matrix", _freeze(0.5 * (m + m.conj().T)))
        object.__setattr__(obj, "_eigvals", None)
        return obj

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        if self._eigvals is None:
            object.__setattr__(self, "_eigvals", eigh(self.matrix)[0])
        return self._eigvals.copy()


@dataclass(frozen=True)
class HermitianBasis:
    """Hilbert-Schmidt orthonormal basis of the r x r Hermitian matrices.

    ``elements`` has shape ``(r*r, r, r)``.
    """

    dim: int
    elements: np.ndarray

    def __post_init__(self):
        els = _freeze(self.elements)
        r = int(self.dim)
        if els.shape != (r * r, r, r):
            raise InputError(f"basis of dim {r} needs shape {(r * r, r, r)}, got {els.shape}")
        object.__setattr__(self, "elements", els)
        object.__setattr__(self, "dim", r)

    def __len__(self):
        return self.elements.shape[0]

    @property
    def flat(self) -> np.ndarray:
        """Elements flattened to rows of length r*r."""
        return self.elements.reshape(len(self), -1)

    def gram(self) -> np.ndarray:
        f = self.flat
        return (f.conj() @ f.T).real


# --------------------------------------------------------------------------
# tensor helpers


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of operators given in subsystem order 0, 1, 2, ..."""
    out = np.ones((1, 1) if np.ndim(ops[0]) == 2 else (1,), dtype=np.complex128)
    for op in ops:
        out = np.kron(np.asarray(op, dtype=np.complex128), out)
    return out


def _as_tensor(m: np.ndarray, dims: tuple[int, ...]) -> np.ndarray:
    """View ``m`` as a tensor whose axis k is subsystem k (rows), n+k (cols)."""
    n = len(dims)
    rev = dims[::-1]
    t = m.reshape(rev + rev)
    order = [n - 1 - k for k in range(n)] + [2 * n - 1 - k for k in range(n)]
    return t.transpose(order)


def _from_tensor(t: np.ndarray, dims: tuple[int, ...]) -> np.ndarray:
    n = len(dims)
    order = [n - 1 - k for k in range(n)] + [2 * n - 1 - k for k in range(n)]
    size = int(np.prod(dims))
    return t.transpose(np.argsort(order)).reshape(size, size)


def _check_subsystems(idx: Iterable[int], n: int) -> list[int]:
    out = sorted({int(i) for i in idx})
    for i in out:
        if not 0 <= i < n:
            raise InputError(f"subsystem index {i} out of range for {n} subsystems")
    return out


def partial_trace(state, traced: Iterable[int]) -> DensityMatrix:
    """Trace out the subsystems listed in ``traced``.

    ``state`` may be a :class:`DensityMatrix` or a :class:`PureState`.
    """
    if isinstance(state, PureState):
        state = state.density()
    dims = state.dims
    n = len(dims)
    traced = _check_subsystems([traced] if np.isscalar(traced) else traced, n)
    if len(traced) == n:
        raise InputError("cannot trace out every subsystem")
    keep = [k for k in range(n) if k not in traced]
    t = _as_tensor(state.matrix, dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = list(letters[:n])
    cols = list(letters[n:2 * n])
    for k in traced:
        cols[k] = rows[k]
    out_rows = "".join(rows[k] for k in keep)
    out_cols = "".join(cols[k] for k in keep)
    red = np.einsum("".join(rows) + "".join(cols) + "->" + out_rows + out_cols, t)
    kdims = tuple(dims[k] for k in keep)
    m = _from_tensor(red, kdims)
    return DensityMatrix._trusted(kdims, m)


def partial_transpose(rho, subsystem: int) -> np.ndarray:
    """Transpose the tensor factor ``subsystem`` of a density (or square) matrix."""
    if isinstance(rho, PureState):
        rho = rho.density()
    if isinstance(rho, DensityMatrix):
        m, dims = rho.matrix, rho.dims
    else:
        m, dims = rho
        dims = _check_dims(dims, np.asarray(m).shape[0])
    n = len(dims)
    (k,) = _check_subsystems([subsystem], n)
    t = _as_tensor(np.asarray(m, dtype=np.complex128), dims)
    axes = list(range(2 * n))
    axes[k], axes[n + k] = axes[n + k], axes[k]
    return _from_tensor(t.transpose(axes), dims)


def trace_norm(m: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    m = _require_hermitian(m)
    w, _ = eigh(m)
    return float(np.sum(np.abs(w)))


# --------------------------------------------------------------------------
# eigen solver


def eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.

    Returns
    -------
    w : ndarray
        Eigenvalues in ascending order.
    v : ndarray
        Unitary matrix whose columns are the matching eigenvectors.
    """
    a = _require_hermitian(m).copy()
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    if n == 1:
        return a.diagonal().real.copy(), v
    scale = max(float(np.linalg.norm(a)), np.finfo(float).tiny)
    # plain Python scalars: at n <= 8 numpy per-element overhead dominates
    rows = a.tolist()
    vecs = v.tolist()
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = 0.0
        for p in range(n - 1):
            rp = rows[p]
            for q in range(p + 1, n):
                z = rp[q]
                off += z.real * z.real + z.imag * z.imag
        if sqrt(2.0 * off) < JACOBI_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = rows[p][q]
                mag = abs(apq)
                if mag < 1e-300 or mag < 1e-18 * scale:
                    continue
                ph = apq / mag
                phc = ph.conjugate()
                theta = (rows[q][q].real - rows[p][p].real) / (2.0 * mag)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                # A <- J^dag A J with J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                for row in rows:
                    x = row[p]
                    y = row[q] * phc
                    row[p] = c * x - s * y
                    row[q] = s * x + c * y
                rowp, rowq = rows[p], rows[q]
                for j in range(n):
                    x = rowp[j]
                    y = rowq[j] * ph
                    rowp[j] = c * x - s * y
                    rowq[j] = s * x + c * y
                rowp[q] = rowq[p] = 0j
                rowp[p] = complex(rowp[p].real, 0.0)
                rowq[q] = complex(rowq[q].real, 0.0)
                for row in vecs:
                    x = row[p]
                    y = row[q] * phc
                    row[p] = c * x - s * y
                    row[q] = s * x + c * y
    else:
        raise RuntimeError("Jacobi eigen solver did not converge")
    a = np.array(rows, dtype=np.complex128)
    v = np.array(vecs, dtype=np.complex128)
    w = a.diagonal().real
    order = np.argsort(w, kind="stable")
    return w[order].copy(), v[:, order].copy()


def sqrtm_psd(m: np.ndarray, rel_cut: float = 0.0) -> np.ndarray:
    """Square root of a PSD matrix; eigenvalues below ``rel_cut*max`` become 0."""
    w, v = eigh(m)
    top = max(float(w[-1]), 0.0)
    w = np.where(w <= rel_cut * top, 0.0, w)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


# --------------------------------------------------------------------------
# Hermitian operator basis


def gell_mann_basis(r: int) -> HermitianBasis:
    """Normalized generalized Gell-Mann basis of r x r Hermitian matrices.

    Ordering: ``I/sqrt(r)``, symmetric pairs (j<k), antisymmetric pairs
    (j<k), then the r-1 diagonal elements.
    """
    r = int(r)
    if r < 1:
        raise InputError("basis dimension must be positive")
    els = [np.eye(r, dtype=np.complex128) / np.sqrt(r)]
    pairs = [(j, k) for j in range(r) for k in range(j + 1, r)]
    for j, k in pairs:
        z = np.zeros((r, r), dtype=np.complex128)
        z[j, k] = z[k, j] = 1.0 / np.sqrt(2.0)
        els.append(z)
    for j, k in pairs:
        z = np.zeros((r, r), dtype=np.complex128)
        z[j, k] = -1j / np.sqrt(2.0)
        z[k, j] = 1j / np.sqrt(2.0)
        els.append(z)
    for l in range(1, r):
        d = np.zeros(r)
        d[:l] = 1.0
        d[l] = -float(l)
        els.append(np.diag(d / np.sqrt(l * (l + 1.0))).astype(np.complex128))
    return HermitianBasis(r, np.array(els))


def to_coords(h: np.ndarray, basis: HermitianBasis) -> np.ndarray:
    """Real coordinates ``tr(Z_m H)`` of a Hermitian matrix."""
    h = np.asarray(h, dtype=np.complex128)
    r = basis.dim
    if h.shape != (r, r):
        raise InputError(f"matrix shape {h.shape} does not match basis dim {r}")
    h = _require_hermitian(h)
    coords = basis.flat.conj() @ h.reshape(-1)
    scale = max(1.0, float(np.max(np.abs(h))))
    if np.max(np.abs(coords.imag)) > HERMITIAN_TOL * scale:
        raise InputError("coordinates have non-negligible imaginary part")
    return coords.real.copy()


def from_coords(x: np.ndarray, basis: HermitianBasis) -> np.ndarray:
    """Inverse of :func:`to_coords`."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != len(basis):
        raise InputError(f"coordinate vector has length {x.size}, basis has {len(basis)}")
    r = basis.dim
    h = (x @ basis.flat).reshape(r, r)
    return 0.5 * (h + h.conj().T)
