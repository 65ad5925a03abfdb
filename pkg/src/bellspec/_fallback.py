"""Pure-Python implementations of the compiled kernels (same signatures)."""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

MODE_EXPECTATION, MODE_UPPER, MODE_LOWER = 0, 1, 2
MODES = {"expectation": MODE_EXPECTATION, "upper": MODE_UPPER, "lower": MODE_LOWER}


def contract(T, D, n):
    t = np.asarray(T, dtype=float).reshape((3,) * n)
    d = np.asarray(D, dtype=float).reshape(n, 2, 3)
    g = t
    for k in range(n - 1, -1, -1):
        g = np.tensordot(d[k], g, axes=([1], [g.ndim - 1]))
    return g.ravel()


def spherical_pairs(x, n):
    a = np.asarray(x, dtype=float).reshape(n, 2, 2)
    th, ph = a[..., 0], a[..., 1]
    return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)


def plane_frames(x, n):
    a = np.asarray(x, dtype=float).reshape(n, 3)
    th, ph, ps = a[:, 0], a[:, 1], a[:, 2]
    u = np.stack([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th)], axis=-1)
    v = np.stack([-np.sin(ph), np.cos(ph), np.zeros_like(ph)], axis=-1)
    xh = np.cos(ps)[:, None] * u + np.sin(ps)[:, None] * v
    yh = np.cos(ps)[:, None] * v - np.sin(ps)[:, None] * u
    return np.stack([xh, yh], axis=1)


def objective(mode, x, T, beta, n):
    if mode == MODE_EXPECTATION:
        return float(np.dot(beta, contract(T, spherical_pairs(x, n), n)))
    if n != 3:
        raise ValueError("bound objectives are defined for three qubits")
    g = contract(T, plane_frames(x, n), n)
    if mode == MODE_UPPER:
        return float(np.sqrt(g[0] ** 2 + g[3] ** 2 + g[5] ** 2 + g[6] ** 2))
    return float(0.5 * abs(g[0] - g[3] - g[5] - g[6]))


def multistart(mode, starts, T, beta, n, xatol=1e-8, maxiter=2000, adaptive=True):
    starts = np.asarray(starts, dtype=float)
    T = np.asarray(T, dtype=float)
    beta = None if beta is None else np.asarray(beta, dtype=float)
    R = starts.shape[0]
    values = np.empty(R)
    xs = np.empty_like(starts)
    nits = np.empty(R, dtype=np.int64)
    nfevs = np.empty(R, dtype=np.int64)
    conv = np.empty(R, dtype=bool)
    for r in range(R):
        res = minimize(
            lambda x: -objective(mode, x, T, beta, n),
            starts[r],
            method="Nelder-Mead",
            options={"xatol": xatol, "fatol": np.inf, "maxiter": maxiter, "adaptive": adaptive},
        )
        values[r] = -res.fun
        xs[r] = res.x
        nits[r] = res.nit
        nfevs[r] = res.nfev
        conv[r] = res.status == 0
    return values, xs, nits, nfevs, conv
