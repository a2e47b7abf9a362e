"""Pure-numpy fallback for the compiled oracle kernel.

Same API and same Nelder-Mead steps as ``_kernel.pyx``; the simplices of
all starts advance in lockstep so every objective call is one vectorized
batch.
"""
from __future__ import annotations

import numpy as np

_PAIRS = ((1, 2, 0), (0, 2, 1), (0, 1, 2))  # (k, l, excluded) per pair


def _tau3(a: np.ndarray) -> np.ndarray:
    a0, a1, a2, a3, a4, a5, a6, a7 = (a[:, i] for i in range(8))
    d = (a0 * a0 * a7 * a7 + a1 * a1 * a6 * a6 + a2 * a2 * a5 * a5 + a4 * a4 * a3 * a3)
    d = d - 2.0 * (a0 * a1 * a6 * a7 + a0 * a2 * a5 * a7 + a0 * a4 * a3 * a7
                   + a1 * a2 * a5 * a6 + a1 * a4 * a3 * a6 + a2 * a4 * a3 * a5)
    d = d + 4.0 * (a0 * a3 * a5 * a6 + a1 * a2 * a4 * a7)
    return 4.0 * np.abs(d)


def _min_eig4(m: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of a batch of 4x4 Hermitian matrices (Newton from below)."""
    m2 = m @ m
    p1 = np.einsum("kii->k", m).real
    p2 = np.einsum("kii->k", m2).real
    p3 = np.einsum("kij,kji->k", m2, m).real
    p4 = np.sum(np.abs(m2) ** 2, axis=(1, 2))
    fro = np.sum(np.abs(m) ** 2, axis=(1, 2))
    e1 = p1
    e2 = (e1 * p1 - p2) / 2.0
    e3 = (e2 * p1 - e1 * p2 + p3) / 3.0
    e4 = (e3 * p1 - e2 * p2 + e1 * p3 - p4) / 4.0
    lam = -np.sqrt(fro) - 1e-12
    active = np.ones(lam.shape, dtype=bool)
    for _ in range(200):
        if not active.any():
            break
        f = (((lam - e1) * lam + e2) * lam - e3) * lam + e4
        df = ((4.0 * lam - 3.0 * e1) * lam + 2.0 * e2) * lam - e3
        active &= (f > 0.0) & (df < 0.0)
        step = np.where(active, -f / np.where(df < 0.0, df, -1.0), 0.0)
        lam = lam + step
        active &= step > 1e-16 * (1.0 + np.abs(lam))
    return lam


def _pi3(a: np.ndarray) -> np.ndarray:
    t = a.reshape(-1, 2, 2, 2)  # axes: (batch, q2, q1, q0)
    axis_of = {0: 3, 1: 2, 2: 1}
    single = []
    for k in range(3):
        ax = axis_of[k]
        t0 = np.take(t, 0, axis=ax).reshape(len(a), -1)
        t1 = np.take(t, 1, axis=ax).reshape(len(a), -1)
        r00 = np.sum(np.abs(t0) ** 2, axis=1)
        r11 = np.sum(np.abs(t1) ** 2, axis=1)
        r01 = np.sum(t0 * t1.conj(), axis=1)
        det = np.clip(r00 * r11 - np.abs(r01) ** 2, 0.0, None)
        single.append(2.0 * np.sqrt(det))
    pair = []
    for k, l, m in _PAIRS:
        # rho[u, v] with u = bit_k + 2*bit_l
        tk = np.moveaxis(t, [axis_of[k], axis_of[l], axis_of[m]], [3, 2, 1])
        # tk axes: (batch, m, l, k) -> flat index over (l, k) is u
        flat = tk.reshape(len(a), 2, 4)
        rho = np.einsum("bmu,bmv->buv", flat, flat.conj())
        r4 = rho.reshape(len(a), 2, 2, 2, 2)  # (batch, l_u, k_u, l_v, k_v)
        pt = r4.transpose(0, 1, 4, 3, 2).reshape(len(a), 4, 4)
        lam = _min_eig4(pt)
        pair.append(np.where(lam < 0.0, -2.0 * lam, 0.0))
    total = sum(s * s for s in single) - 2.0 * sum(p * p for p in pair)
    return np.clip(total / 3.0, 0.0, None)


def _measure(psi: np.ndarray, measure_id: int) -> np.ndarray:
    return _tau3(psi) if measure_id == 0 else _pi3(psi)


def measure_value(psi, measure_id: int) -> float:
    a = np.ascontiguousarray(psi, dtype=np.complex128).reshape(1, -1)
    if a.shape[1] != 8:
        raise ValueError("kernel measures need 8 amplitudes")
    return float(_measure(a, measure_id)[0])


def _check(params: np.ndarray, V: np.ndarray, X: np.ndarray) -> int:
    r = V.shape[1]
    if V.shape[0] != 8:
        raise ValueError("kernel supports three-qubit states only")
    if r < 1 or r > 8 or params.shape[1] != 2 * r or X.shape != (r, r):
        raise ValueError("inconsistent kernel shapes")
    return r


def _objective(P: np.ndarray, V: np.ndarray, X: np.ndarray, measure_id: int) -> np.ndarray:
    r = V.shape[1]
    a = P[:, :r] + 1j * P[:, r:]
    nrm2 = np.sum(np.abs(a) ** 2, axis=1)
    tiny = nrm2 < 1e-24
    a = a / np.sqrt(np.where(tiny, 1.0, nrm2))[:, None]
    psi = a @ V.T
    quad = np.einsum("ki,ij,kj->k", a.conj(), X, a).real
    out = _measure(psi, measure_id) + quad
    out[tiny] = 1e300
    return out


def eval_batch(params, V, X, measure_id: int) -> np.ndarray:
    P = np.ascontiguousarray(params, dtype=np.float64)
    V = np.asarray(V, dtype=np.complex128)
    X = np.asarray(X, dtype=np.complex128)
    _check(P, V, X)
    return _objective(P, V, X, measure_id)


def multistart(starts, V, X, measure_id: int, max_iter: int, ftol: float,
               xtol: float, scale: float):
    S = np.array(starts, dtype=np.float64)
    V = np.asarray(V, dtype=np.complex128)
    X = np.asarray(X, dtype=np.complex128)
    _check(S, V, X)
    n, d = S.shape
    alpha, gamma = 1.0, 1.0 + 2.0 / d
    rho, sigma = 0.75 - 0.5 / d, 1.0 - 1.0 / d

    def f(P):
        return _objective(P, V, X, measure_id)

    sim = np.repeat(S[:, None, :], d + 1, axis=1)
    sim[:, 1:, :] += scale * np.eye(d)
    fs = f(sim.reshape(-1, d)).reshape(n, d + 1)
    its = np.zeros(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)

    while True:
        order = np.argsort(fs, axis=1, kind="stable")
        fs = np.take_along_axis(fs, order, axis=1)
        sim = np.take_along_axis(sim, order[:, :, None], axis=1)
        spread = fs[:, d] - fs[:, 0]
        xs = np.max(np.abs(sim[:, 1:, :] - sim[:, :1, :]), axis=(1, 2))
        active &= (its < max_iter) & ~((spread <= ftol) & (xs <= xtol))
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        its[idx] += 1
        s = sim[idx]
        fv = fs[idx]
        xbar = np.zeros((idx.size, d))
        for i in range(d):
            xbar += s[:, i, :]
        xbar /= d
        worst = s[:, d, :]
        xr = xbar + alpha * (xbar - worst)
        fr = f(xr)
        new_x = worst.copy()
        new_f = fv[:, d].copy()
        shrink = np.zeros(idx.size, dtype=bool)

        exp = fr < fv[:, 0]
        if exp.any():
            xe = xbar[exp] + gamma * (xr[exp] - xbar[exp])
            fe = f(xe)
            take_e = fe < fr[exp]
            new_x[exp] = np.where(take_e[:, None], xe, xr[exp])
            new_f[exp] = np.where(take_e, fe, fr[exp])
        refl = ~exp & (fr < fv[:, d - 1])
        new_x[refl] = xr[refl]
        new_f[refl] = fr[refl]
        outside = ~exp & ~refl & (fr < fv[:, d])
        if outside.any():
            xc = xbar[outside] + rho * (xr[outside] - xbar[outside])
            fc = f(xc)
            ok = fc <= fr[outside]
            sub = np.flatnonzero(outside)
            new_x[sub[ok]] = xc[ok]
            new_f[sub[ok]] = fc[ok]
            shrink[sub[~ok]] = True
        inside = ~exp & ~refl & ~outside
        if inside.any():
            xc = xbar[inside] + rho * (worst[inside] - xbar[inside])
            fc = f(xc)
            ok = fc < fv[inside, d]
            sub = np.flatnonzero(inside)
            new_x[sub[ok]] = xc[ok]
            new_f[sub[ok]] = fc[ok]
            shrink[sub[~ok]] = True

        keep = ~shrink
        s[keep, d, :] = new_x[keep]
        fv[keep, d] = new_f[keep]
        if shrink.any():
            ss = s[shrink]
            ss[:, 1:, :] = ss[:, :1, :] + sigma * (ss[:, 1:, :] - ss[:, :1, :])
            fv_s = fv[shrink]
            fv_s[:, 1:] = f(ss[:, 1:, :].reshape(-1, d)).reshape(-1, d)
            s[shrink] = ss
            fv[shrink] = fv_s
        sim[idx] = s
        fs[idx] = fv

    return sim[:, 0, :].copy(), fs[:, 0].copy(), its
