# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for the violation optimizer.

Objectives contract a state's Pauli correlation tensor (flat, C order,
axis ``k`` = qubit ``k+1``, index 0/1/2 = x/y/z) with per-qubit direction
pairs.  The Nelder-Mead loop follows ``scipy.optimize.minimize`` with
``method="Nelder-Mead"`` step for step, so the pure-Python fallback (which
calls scipy) explores the same simplex sequence.
"""

import numpy as np

from libc.math cimport cos, fabs, sin, sqrt
from libc.stdlib cimport free, malloc
from libc.string cimport memcpy

cdef enum:
    MODE_EXPECTATION = 0
    MODE_UPPER = 1
    MODE_LOWER = 2

MODES = {"expectation": MODE_EXPECTATION, "upper": MODE_UPPER, "lower": MODE_LOWER}


cdef struct Problem:
    int mode
    int n
    const double* T
    const double* beta
    double* D
    double* buf_a
    double* buf_b
    double* out


cdef Py_ssize_t _pow(Py_ssize_t base, int e) nogil:
    cdef Py_ssize_t r = 1
    cdef int i
    for i in range(e):
        r *= base
    return r


cdef void _contract(const double* T, const double* D, int n,
                    double* buf_a, double* buf_b, double* out) noexcept nogil:
    # contract the last axis each step; the new setting axis goes in front,
    # so after n steps the layout is (s_1, ..., s_n) in C order
    cdef Py_ssize_t size = _pow(3, n), rows, r
    cdef const double* src = T
    cdef double* dst
    cdef int step, k, s
    cdef double d0, d1, d2
    for step in range(n):
        k = n - 1 - step
        rows = size // 3
        if step == n - 1:
            dst = out
        elif step % 2 == 0:
            dst = buf_a
        else:
            dst = buf_b
        for s in range(2):
            d0 = D[(k * 2 + s) * 3]
            d1 = D[(k * 2 + s) * 3 + 1]
            d2 = D[(k * 2 + s) * 3 + 2]
            for r in range(rows):
                dst[s * rows + r] = src[3 * r] * d0 + src[3 * r + 1] * d1 + src[3 * r + 2] * d2
        src = dst
        size = 2 * rows


cdef void _spherical_pairs(const double* x, int n, double* D) noexcept nogil:
    # 4 angles per qubit: (theta, phi) of a_k then of a_k'
    cdef int k, s
    cdef double th, ph
    for k in range(n):
        for s in range(2):
            th = x[4 * k + 2 * s]
            ph = x[4 * k + 2 * s + 1]
            D[(k * 2 + s) * 3] = sin(th) * cos(ph)
            D[(k * 2 + s) * 3 + 1] = sin(th) * sin(ph)
            D[(k * 2 + s) * 3 + 2] = cos(th)


cdef void _plane_frames(const double* x, int n, double* D) noexcept nogil:
    # 3 angles per qubit: plane normal (theta, phi), in-plane rotation psi;
    # x_hat = cos psi u + sin psi v, y_hat = normal cross x_hat
    cdef int k
    cdef double th, ph, ps, ux, uy, uz, vx, vy
    for k in range(n):
        th = x[3 * k]
        ph = x[3 * k + 1]
        ps = x[3 * k + 2]
        ux = cos(th) * cos(ph)
        uy = cos(th) * sin(ph)
        uz = -sin(th)
        vx = -sin(ph)
        vy = cos(ph)
        D[k * 6] = cos(ps) * ux + sin(ps) * vx
        D[k * 6 + 1] = cos(ps) * uy + sin(ps) * vy
        D[k * 6 + 2] = cos(ps) * uz
        D[k * 6 + 3] = cos(ps) * vx - sin(ps) * ux
        D[k * 6 + 4] = cos(ps) * vy - sin(ps) * uy
        D[k * 6 + 5] = -sin(ps) * uz


cdef double _evaluate(Problem* p, const double* x) noexcept nogil:
    cdef Py_ssize_t j, m
    cdef double v = 0.0
    cdef double* g = p.out
    if p.mode == MODE_EXPECTATION:
        _spherical_pairs(x, p.n, p.D)
        _contract(p.T, p.D, p.n, p.buf_a, p.buf_b, g)
        m = _pow(2, p.n)
        for j in range(m):
            v += p.beta[j] * g[j]
        return v
    _plane_frames(x, p.n, p.D)
    _contract(p.T, p.D, p.n, p.buf_a, p.buf_b, g)
    # C-order (s1, s2, s3): xxx=0, xyy=3, yxy=5, yyx=6
    if p.mode == MODE_UPPER:
        return sqrt(g[0] * g[0] + g[3] * g[3] + g[5] * g[5] + g[6] * g[6])
    return 0.5 * fabs(g[0] - g[3] - g[5] - g[6])


cdef int _alloc(Problem* p, int mode, int n, const double* T, const double* beta) noexcept nogil:
    cdef Py_ssize_t half = 2 * _pow(3, n - 1) if n > 1 else 2
    p.mode = mode
    p.n = n
    p.T = T
    p.beta = beta
    p.D = <double*> malloc(6 * n * sizeof(double))
    p.buf_a = <double*> malloc(half * sizeof(double))
    p.buf_b = <double*> malloc(half * sizeof(double))
    p.out = <double*> malloc(_pow(2, n) * sizeof(double))
    if p.D == NULL or p.buf_a == NULL or p.buf_b == NULL or p.out == NULL:
        return -1
    return 0


cdef void _release(Problem* p) noexcept nogil:
    free(p.D)
    free(p.buf_a)
    free(p.buf_b)
    free(p.out)


cdef void _sort_simplex(double* sim, double* fsim, int N, double* tmp) noexcept nogil:
    # stable insertion sort of the N+1 vertices by ascending f
    cdef int i, j
    cdef double key
    for i in range(1, N + 1):
        key = fsim[i]
        j = i - 1
        if fsim[j] <= key:
            continue
        memcpy(tmp, sim + i * N, N * sizeof(double))
        while j >= 0 and fsim[j] > key:
            fsim[j + 1] = fsim[j]
            memcpy(sim + (j + 1) * N, sim + j * N, N * sizeof(double))
            j -= 1
        fsim[j + 1] = key
        memcpy(sim + (j + 1) * N, tmp, N * sizeof(double))


cdef int _nelder_mead(Problem* p, double* x, int N, double xatol, long maxiter,
                      bint adaptive, double* fbest, long* nit, long* nfev) noexcept nogil:
    """Minimize -objective from x (overwritten with the best vertex).

    Returns 1 when the simplex size criterion was met, 0 when maxiter ran out,
    -1 on allocation failure.
    """
    cdef double rho = 1.0, chi = 2.0, psi = 0.5, sigma = 0.5
    cdef double* sim = <double*> malloc((N + 1) * N * sizeof(double))
    cdef double* fsim = <double*> malloc((N + 1) * sizeof(double))
    cdef double* work = <double*> malloc(5 * N * sizeof(double))
    cdef double* xbar
    cdef double* xr
    cdef double* xe
    cdef double* xc
    cdef double* tmp
    cdef double fxr, fxe, fxc, size
    cdef int i, j, converged = 0
    cdef bint doshrink
    cdef long it = 1, calls = 0
    if sim == NULL or fsim == NULL or work == NULL:
        free(sim); free(fsim); free(work)
        return -1
    xbar = work
    xr = work + N
    xe = work + 2 * N
    xc = work + 3 * N
    tmp = work + 4 * N
    if adaptive:
        chi = 1.0 + 2.0 / N
        psi = 0.75 - 1.0 / (2.0 * N)
        sigma = 1.0 - 1.0 / N

    for j in range(N):
        sim[j] = x[j]
    for i in range(N):
        for j in range(N):
            sim[(i + 1) * N + j] = x[j]
        if x[i] != 0.0:
            sim[(i + 1) * N + i] = 1.05 * x[i]
        else:
            sim[(i + 1) * N + i] = 0.00025
    for i in range(N + 1):
        fsim[i] = -_evaluate(p, sim + i * N)
        calls += 1
    _sort_simplex(sim, fsim, N, tmp)

    while it < maxiter:
        size = 0.0
        for i in range(1, N + 1):
            for j in range(N):
                if fabs(sim[i * N + j] - sim[j]) > size:
                    size = fabs(sim[i * N + j] - sim[j])
        if size <= xatol:
            converged = 1
            break
        for j in range(N):
            xbar[j] = 0.0
        for i in range(N):
            for j in range(N):
                xbar[j] += sim[i * N + j]
        for j in range(N):
            xbar[j] /= N
            xr[j] = (1 + rho) * xbar[j] - rho * sim[N * N + j]
        fxr = -_evaluate(p, xr)
        calls += 1
        doshrink = 0
        if fxr < fsim[0]:
            for j in range(N):
                xe[j] = (1 + rho * chi) * xbar[j] - rho * chi * sim[N * N + j]
            fxe = -_evaluate(p, xe)
            calls += 1
            if fxe < fxr:
                memcpy(sim + N * N, xe, N * sizeof(double))
                fsim[N] = fxe
            else:
                memcpy(sim + N * N, xr, N * sizeof(double))
                fsim[N] = fxr
        elif fxr < fsim[N - 1]:
            memcpy(sim + N * N, xr, N * sizeof(double))
            fsim[N] = fxr
        else:
            if fxr < fsim[N]:
                for j in range(N):
                    xc[j] = (1 + psi * rho) * xbar[j] - psi * rho * sim[N * N + j]
                fxc = -_evaluate(p, xc)
                calls += 1
                if fxc <= fxr:
                    memcpy(sim + N * N, xc, N * sizeof(double))
                    fsim[N] = fxc
                else:
                    doshrink = 1
            else:
                for j in range(N):
                    xc[j] = (1 - psi) * xbar[j] + psi * sim[N * N + j]
                fxc = -_evaluate(p, xc)
                calls += 1
                if fxc < fsim[N]:
                    memcpy(sim + N * N, xc, N * sizeof(double))
                    fsim[N] = fxc
                else:
                    doshrink = 1
            if doshrink:
                for i in range(1, N + 1):
                    for j in range(N):
                        sim[i * N + j] = sim[j] + sigma * (sim[i * N + j] - sim[j])
                    fsim[i] = -_evaluate(p, sim + i * N)
                    calls += 1
        it += 1
        _sort_simplex(sim, fsim, N, tmp)

    memcpy(x, sim, N * sizeof(double))
    fbest[0] = -fsim[0]
    nit[0] = it
    nfev[0] = calls
    free(sim); free(fsim); free(work)
    return converged


def contract(const double[::1] T, const double[::1] D, int n):
    """Contract a flat ``3**n`` correlation tensor with ``(n, 2, 3)`` directions."""
    if T.shape[0] != _pow(3, n) or D.shape[0] != 6 * n:
        raise ValueError("shape mismatch")
    out = np.empty(_pow(2, n))
    cdef double[::1] o = out
    cdef Problem p
    if _alloc(&p, MODE_EXPECTATION, n, &T[0], NULL) != 0:
        _release(&p)
        raise MemoryError()
    _contract(&T[0], &D[0], n, p.buf_a, p.buf_b, &o[0])
    _release(&p)
    return out


cdef const double* _beta_ptr(const double[::1] beta, int mode, int n) except? NULL:
    if mode == MODE_EXPECTATION:
        if beta is None or beta.shape[0] != _pow(2, n):
            raise ValueError("beta must have 2**n entries")
        return &beta[0]
    if n != 3:
        raise ValueError("bound objectives are defined for three qubits")
    return NULL


def objective(int mode, const double[::1] x, const double[::1] T, const double[::1] beta, int n):
    """Value of the objective (the quantity being maximized) at ``x``."""
    cdef const double* bp = _beta_ptr(beta, mode, n)
    cdef Problem p
    cdef double v
    if _alloc(&p, mode, n, &T[0], bp) != 0:
        _release(&p)
        raise MemoryError()
    v = _evaluate(&p, &x[0])
    _release(&p)
    return v


def multistart(int mode, const double[:, ::1] starts, const double[::1] T, const double[::1] beta, int n,
               double xatol=1e-8, long maxiter=2000, bint adaptive=True):
    """Run one Nelder-Mead search per row of ``starts``.

    Returns ``(values, xs, nit, nfev, converged)`` arrays, one entry per start.
    """
    cdef Py_ssize_t R = starts.shape[0], r
    cdef int N = starts.shape[1], status
    cdef const double* bp = _beta_ptr(beta, mode, n)
    values = np.empty(R)
    xs = np.array(starts, copy=True)
    nits = np.empty(R, dtype=np.int64)
    nfevs = np.empty(R, dtype=np.int64)
    conv = np.empty(R, dtype=bool)
    cdef double[::1] vv = values
    cdef double[:, ::1] xv = xs
    cdef long nit_r, nfev_r
    cdef double fb
    cdef Problem p
    if _alloc(&p, mode, n, &T[0], bp) != 0:
        _release(&p)
        raise MemoryError()
    try:
        for r in range(R):
            with nogil:
                status = _nelder_mead(&p, &xv[r, 0], N, xatol, maxiter, adaptive, &fb, &nit_r, &nfev_r)
            if status < 0:
                raise MemoryError()
            vv[r] = fb
            nits[r] = nit_r
            nfevs[r] = nfev_r
            conv[r] = status == 1
    finally:
        _release(&p)
    return values, xs, nits, nfevs, conv
