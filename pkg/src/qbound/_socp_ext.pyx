# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twin of ``_socp_py.solve_socp3``.

Same homogeneous self-dual Mehrotra iteration, same scaled-direction
corrections and best-iterate bookkeeping, written as plain loops over the
3-dimensional cones. The reduced system is factored with LAPACK ``dgeqrf``.
"""

import numpy as np

from libc.math cimport fabs, hypot, sqrt, INFINITY
from scipy.linalg.cython_lapack cimport dgeqrf, dtrtrs

cdef enum:
    OPTIMAL = 0
    PRIMAL_INFEASIBLE = 1
    DUAL_INFEASIBLE = 2
    MAX_ITER = 3
    NUMERICAL_ERROR = 4

cdef double STEP = 0.99
cdef double INF_TOL = 1e-8
cdef int STALL = 5


cdef inline double _jdet(double u0, double u1, double u2) nogil:
    cdef double r = hypot(u1, u2)
    return (u0 - r) * (u0 + r)


cdef void _jordan(double[::1] u, double[::1] v, double[::1] out, int q) noexcept nogil:
    cdef int k, o
    for k in range(q):
        o = 3 * k
        out[o] = u[o] * v[o] + u[o + 1] * v[o + 1] + u[o + 2] * v[o + 2]
        out[o + 1] = u[o] * v[o + 1] + v[o] * u[o + 1]
        out[o + 2] = u[o] * v[o + 2] + v[o] * u[o + 2]


cdef void _arrow_solve(double[::1] lam, double[::1] r, double[::1] w, int q) noexcept nogil:
    cdef int k, o
    cdef double det
    for k in range(q):
        o = 3 * k
        det = _jdet(lam[o], lam[o + 1], lam[o + 2])
        w[o] = (lam[o] * r[o] - lam[o + 1] * r[o + 1] - lam[o + 2] * r[o + 2]) / det
        w[o + 1] = (r[o + 1] - w[o] * lam[o + 1]) / lam[o]
        w[o + 2] = (r[o + 2] - w[o] * lam[o + 2]) / lam[o]


cdef inline double _root(double a, double hb, double cc) nogil:
    cdef double disc
    if fabs(a) <= 1e-300:
        return -cc / (2.0 * hb) if hb < 0.0 else INFINITY
    disc = hb * hb - a * cc
    if disc < 0.0 or (a > 0.0 and hb >= 0.0):
        return INFINITY
    return cc / (-hb + sqrt(disc))


cdef double _cone_step(double[::1] u, double[::1] du, int q) noexcept nogil:
    cdef int k, o
    cdef double a, hb, cc, t, out = INFINITY
    for k in range(q):
        o = 3 * k
        a = du[o] * du[o] - du[o + 1] * du[o + 1] - du[o + 2] * du[o + 2]
        hb = u[o] * du[o] - u[o + 1] * du[o + 1] - u[o + 2] * du[o + 2]
        cc = _jdet(u[o], u[o + 1], u[o + 2])
        t = _root(a, hb, cc)
        if t < out:
            out = t
    for k in range(q):
        o = 3 * k
        if du[o] < 0.0:
            t = -u[o] / du[o]
            if t < out:
                out = t
    return out


cdef void _nt_matrices(double[::1] x, double[::1] s, double[::1] wb, double[::1] wbinv, int q) noexcept nogil:
    # per cone 3x3 row-major blocks at offset 9k
    cdef int k, o, p, i, j
    cdef double xj, sj, xb[3], sb[3], w[3], gam, eta, core
    for k in range(q):
        o = 3 * k
        p = 9 * k
        xj = sqrt(_jdet(x[o], x[o + 1], x[o + 2]))
        sj = sqrt(_jdet(s[o], s[o + 1], s[o + 2]))
        for i in range(3):
            xb[i] = x[o + i] / xj
            sb[i] = s[o + i] / sj
        gam = sqrt((1.0 + xb[0] * sb[0] + xb[1] * sb[1] + xb[2] * sb[2]) / 2.0)
        w[0] = (sb[0] + xb[0]) / (2.0 * gam)
        w[1] = (sb[1] - xb[1]) / (2.0 * gam)
        w[2] = (sb[2] - xb[2]) / (2.0 * gam)
        eta = sqrt(sj / xj)
        for i in range(3):
            for j in range(3):
                if i == 0 and j == 0:
                    core = w[0]
                    wb[p] = core * eta
                    wbinv[p] = core / eta
                elif i == 0 or j == 0:
                    core = w[i + j]
                    wb[p + 3 * i + j] = core * eta
                    wbinv[p + 3 * i + j] = -core / eta
                else:
                    core = (1.0 if i == j else 0.0) + w[i] * w[j] / (1.0 + w[0])
                    wb[p + 3 * i + j] = core * eta
                    wbinv[p + 3 * i + j] = core / eta


cdef inline void _bmul(double[::1] blocks, double[::1] v, double[::1] out, int q) noexcept nogil:
    cdef int k, i, o, p
    for k in range(q):
        o = 3 * k
        p = 9 * k
        for i in range(3):
            out[o + i] = blocks[p + 3 * i] * v[o] + blocks[p + 3 * i + 1] * v[o + 1] + blocks[p + 3 * i + 2] * v[o + 2]


cdef inline void _bmul_t(double[::1] blocks, double[::1] v, double[::1] out, int q) noexcept nogil:
    cdef int k, i, o, p
    for k in range(q):
        o = 3 * k
        p = 9 * k
        for i in range(3):
            out[o + i] = blocks[p + i] * v[o] + blocks[p + 3 + i] * v[o + 1] + blocks[p + 6 + i] * v[o + 2]


cdef inline double _dot(double[::1] a, double[::1] b, int n) noexcept nogil:
    cdef int i
    cdef double t = 0.0
    for i in range(n):
        t += a[i] * b[i]
    return t


cdef inline double _norm(double[::1] a, int n) noexcept nogil:
    return sqrt(_dot(a, a, n))


cdef inline void _copy(double[::1] src, double[::1] dst, int n) noexcept nogil:
    cdef int i
    for i in range(n):
        dst[i] = src[i]


cdef class _Solver:
    cdef int m, n, q
    cdef double[:, ::1] A
    cdef double[::1] b, c
    # iterate and scaling
    cdef double[::1] x, s, y, lam, winv, wb, wbinv, wtmp
    cdef double tau, kappa
    # per-iteration data
    cdef double[::1] rp, rd, rdbar, cbar, dx2, dy2, abar, qr, qrtau, work
    cdef double rg, denom
    # direction buffers
    cdef double[::1] qv, t, dxt, dy, dst, dx, ds, corr, ry, rm
    cdef double dtau, dkappa
    cdef int lwork

    def __init__(self, A, b, c):
        self.A = A
        self.b = b
        self.c = c
        self.m = A.shape[0]
        self.n = A.shape[1]
        self.q = self.n // 3
        n, m, q = self.n, self.m, self.q
        self.x = np.zeros(n)
        self.s = np.zeros(n)
        self.y = np.zeros(m)
        self.lam = np.zeros(n)
        self.winv = np.zeros(9 * q)
        self.wb = np.zeros(9 * q)
        self.wbinv = np.zeros(9 * q)
        self.wtmp = np.zeros(9 * q)
        self.rp = np.zeros(m)
        self.rd = np.zeros(n)
        self.rdbar = np.zeros(n)
        self.cbar = np.zeros(n)
        self.dx2 = np.zeros(n)
        self.dy2 = np.zeros(m)
        self.abar = np.zeros(n * m)
        self.qr = np.zeros(n * m)
        self.qrtau = np.zeros(max(1, min(n, m)))
        self.lwork = max(1, 64 * n)
        self.work = np.zeros(self.lwork)
        self.qv = np.zeros(n)
        self.t = np.zeros(n)
        self.dxt = np.zeros(n)
        self.dy = np.zeros(m)
        self.dst = np.zeros(n)
        self.dx = np.zeros(n)
        self.ds = np.zeros(n)
        self.corr = np.zeros(n)
        self.ry = np.zeros(m)
        self.rm = np.zeros(m)

    cdef int factor(self) noexcept nogil:
        """QR of Abar^T where Abar = A W^-1; Abar stored row-major is Abar^T column-major."""
        cdef int i, k, j, l, info = 0, m = self.m, n = self.n, lwork = self.lwork
        cdef double acc
        for i in range(m):
            for k in range(self.q):
                for j in range(3):
                    acc = 0.0
                    for l in range(3):
                        acc = acc + self.A[i, 3 * k + l] * self.winv[9 * k + 3 * l + j]
                    self.abar[i * n + 3 * k + j] = acc
        _copy(self.abar, self.qr, n * m)
        dgeqrf(&n, &m, &self.qr[0], &n, &self.qrtau[0], &self.work[0], &lwork, &info)
        if info != 0:
            return -1
        for i in range(m):
            if fabs(self.qr[i * n + i]) <= 1e-300:
                return -1
        return 0

    cdef void msolve(self, double[::1] r) noexcept nogil:
        """``r <- (R^T R)^-1 r`` in place."""
        cdef int info = 0, one = 1, m = self.m, n = self.n
        cdef char uplo = b'U', tr = b'T', nt = b'N', diag = b'N'
        dtrtrs(&uplo, &tr, &diag, &m, &one, &self.qr[0], &n, &r[0], &m, &info)
        dtrtrs(&uplo, &nt, &diag, &m, &one, &self.qr[0], &n, &r[0], &m, &info)

    cdef void abar_mul(self, double[::1] v, double[::1] out) noexcept nogil:
        # out (m) = Abar v
        cdef int i, j
        cdef double acc
        for i in range(self.m):
            acc = 0.0
            for j in range(self.n):
                acc = acc + self.abar[i * self.n + j] * v[j]
            out[i] = acc

    cdef void abar_t_mul(self, double[::1] v, double[::1] out) noexcept nogil:
        # out (n) = Abar^T v
        cdef int i, j
        for j in range(self.n):
            out[j] = 0.0
        for i in range(self.m):
            for j in range(self.n):
                out[j] = out[j] + self.abar[i * self.n + j] * v[i]

    cdef void direction(self, double[::1] rc, double rtk, double damp) noexcept nogil:
        cdef int i, j, m = self.m, n = self.n, q = self.q
        cdef double acc
        _arrow_solve(self.lam, rc, self.qv, q)
        for j in range(n):
            self.t[j] = self.qv[j] + damp * self.rdbar[j]
        self.abar_mul(self.t, self.ry)
        for i in range(m):
            self.dy[i] = -damp * self.rp[i] - self.ry[i]
        self.msolve(self.dy)
        self.abar_t_mul(self.dy, self.dxt)
        for j in range(n):
            self.dxt[j] = self.dxt[j] + self.t[j]
        self.dtau = (-damp * self.rg - _dot(self.cbar, self.dxt, n) + _dot(self.b, self.dy, m) - rtk / self.tau) / self.denom
        for j in range(n):
            self.dxt[j] = self.dxt[j] + self.dtau * self.dx2[j]
        for i in range(m):
            self.dy[i] = self.dy[i] + self.dtau * self.dy2[i]
        # back through W^-1, then project onto the linearized primal equation
        _bmul(self.winv, self.dxt, self.dx, q)
        for i in range(m):
            acc = 0.0
            for j in range(n):
                acc = acc + self.A[i, j] * self.dx[j]
            self.rm[i] = -damp * self.rp[i] + self.b[i] * self.dtau - acc
        self.msolve(self.rm)
        self.abar_t_mul(self.rm, self.corr)
        _bmul(self.winv, self.corr, self.t, q)
        for j in range(n):
            self.dx[j] = self.dx[j] + self.t[j]
            self.dxt[j] = self.dxt[j] + self.corr[j]
        for j in range(n):
            acc = 0.0
            for i in range(m):
                acc = acc + self.A[i, j] * self.dy[i]
            self.ds[j] = -damp * self.rd[j] - acc + self.c[j] * self.dtau
            self.dst[j] = self.qv[j] - self.dxt[j]
        self.dkappa = (rtk - self.kappa * self.dtau) / self.tau

    cdef double max_step(self) noexcept nogil:
        cdef double a = _cone_step(self.lam, self.dxt, self.q)
        cdef double t = _cone_step(self.lam, self.dst, self.q)
        if t < a:
            a = t
        if self.dtau < 0 and -self.tau / self.dtau < a:
            a = -self.tau / self.dtau
        if self.dkappa < 0 and -self.kappa / self.dkappa < a:
            a = -self.kappa / self.dkappa
        return a


def solve_socp3(A, b, c, double tol=1e-9, int max_iter=100):
    """Returns ``(status, x, y, s, tau, kappa, iterations)``; see ``_socp_py.solve_socp3``."""
    A = np.ascontiguousarray(A, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    c = np.ascontiguousarray(c, dtype=float)
    cdef _Solver S = _Solver(A, b, c)
    cdef int m = S.m, n = S.n, q = S.q
    cdef int i, j, k, it = 0, status = MAX_ITER, since_best = 0
    cdef double normb = max(1.0, float(np.linalg.norm(b)))
    cdef double normc = max(1.0, float(np.linalg.norm(c)))
    cdef double cx, by, mu, pres, dres, gres, merit, best_merit = INFINITY
    cdef double alpha, sigma, acc, dtaua, dkappaa, rtk
    cdef double[::1] lamsq = np.zeros(n), rc = np.zeros(n), dxa = np.zeros(n), dsa = np.zeros(n)
    cdef double[::1] xt = np.zeros(n), st = np.zeros(n), tmp = np.zeros(n)
    cdef double[::1] best_x = np.zeros(n), best_s = np.zeros(n), best_y = np.zeros(m)
    cdef double best_tau = 1.0, best_kappa = 1.0

    for k in range(q):
        S.lam[3 * k] = 1.0
        S.x[3 * k] = 1.0
        S.s[3 * k] = 1.0
        S.winv[9 * k] = S.winv[9 * k + 4] = S.winv[9 * k + 8] = 1.0
    S.tau = 1.0
    S.kappa = 1.0
    _copy(S.x, best_x, n)
    _copy(S.s, best_s, n)

    with nogil:
        for it in range(max_iter + 1):
            for i in range(m):
                acc = 0.0
                for j in range(n):
                    acc = acc + S.A[i, j] * S.x[j]
                S.rp[i] = acc - S.b[i] * S.tau
            for j in range(n):
                acc = 0.0
                for i in range(m):
                    acc = acc + S.A[i, j] * S.y[i]
                S.rd[j] = acc + S.s[j] - S.c[j] * S.tau
            cx = _dot(S.c, S.x, n)
            by = _dot(S.b, S.y, m)
            S.rg = cx - by + S.kappa
            mu = (_dot(S.lam, S.lam, n) + S.tau * S.kappa) / (q + 1)

            pres = _norm(S.rp, m) / S.tau / normb
            dres = _norm(S.rd, n) / S.tau / normc
            gres = fabs(cx - by) / S.tau / max(1.0, fabs(cx / S.tau))
            merit = max(pres, max(dres, gres))
            if merit < best_merit:
                best_merit = merit
                _copy(S.x, best_x, n)
                _copy(S.s, best_s, n)
                _copy(S.y, best_y, m)
                best_tau = S.tau
                best_kappa = S.kappa
                since_best = 0
            else:
                since_best += 1
            if merit <= tol:
                status = OPTIMAL
                break
            if by > 0:
                for j in range(n):
                    tmp[j] = S.rd[j] + S.c[j] * S.tau
                if _norm(tmp, n) <= INF_TOL * by:
                    status = PRIMAL_INFEASIBLE
                    break
            if cx < 0:
                acc = 0.0
                for i in range(m):
                    acc = acc + (S.rp[i] + S.b[i] * S.tau) ** 2
                if sqrt(acc) <= INF_TOL * -cx:
                    status = DUAL_INFEASIBLE
                    break
            if it == max_iter or since_best >= STALL:
                break

            if S.factor() != 0:
                status = NUMERICAL_ERROR
                break
            _bmul_t(S.winv, S.c, S.cbar, q)
            _bmul_t(S.winv, S.rd, S.rdbar, q)
            S.abar_mul(S.cbar, S.dy2)
            for i in range(m):
                S.dy2[i] = S.dy2[i] + S.b[i]
            S.msolve(S.dy2)
            S.abar_t_mul(S.dy2, S.dx2)
            for j in range(n):
                S.dx2[j] = S.dx2[j] - S.cbar[j]
            S.denom = _dot(S.cbar, S.dx2, n) - _dot(S.b, S.dy2, m) - S.kappa / S.tau

            _jordan(S.lam, S.lam, lamsq, q)
            for j in range(n):
                rc[j] = -lamsq[j]
            S.direction(rc, -S.tau * S.kappa, 1.0)
            alpha = min(1.0, S.max_step())
            sigma = min(1.0, max(0.0, (1.0 - alpha) ** 3))
            _copy(S.dxt, dxa, n)
            _copy(S.dst, dsa, n)
            dtaua = S.dtau
            dkappaa = S.dkappa

            _jordan(dsa, dxa, rc, q)
            for j in range(n):
                rc[j] = -lamsq[j] - rc[j]
            for k in range(q):
                rc[3 * k] = rc[3 * k] + sigma * mu
            rtk = -S.tau * S.kappa - dtaua * dkappaa + sigma * mu
            S.direction(rc, rtk, 1.0 - sigma)
            alpha = min(1.0, STEP * S.max_step())

            for j in range(n):
                S.x[j] = S.x[j] + alpha * S.dx[j]
                S.s[j] = S.s[j] + alpha * S.ds[j]
                xt[j] = S.lam[j] + alpha * S.dxt[j]
                st[j] = S.lam[j] + alpha * S.dst[j]
            for i in range(m):
                S.y[i] = S.y[i] + alpha * S.dy[i]
            S.tau = S.tau + alpha * S.dtau
            S.kappa = S.kappa + alpha * S.dkappa

            _nt_matrices(xt, st, S.wb, S.wbinv, q)
            _bmul(S.wb, xt, S.lam, q)
            # W^-1 <- W^-1 Wbar^-1, block by block
            for k in range(q):
                for i in range(3):
                    for j in range(3):
                        S.wtmp[9 * k + 3 * i + j] = (
                            S.winv[9 * k + 3 * i] * S.wbinv[9 * k + j]
                            + S.winv[9 * k + 3 * i + 1] * S.wbinv[9 * k + 3 + j]
                            + S.winv[9 * k + 3 * i + 2] * S.wbinv[9 * k + 6 + j]
                        )
            _copy(S.wtmp, S.winv, 9 * q)

    if status == MAX_ITER:
        return status, np.asarray(best_x).copy(), np.asarray(best_y).copy(), np.asarray(best_s).copy(), best_tau, best_kappa, it
    return status, np.asarray(S.x).copy(), np.asarray(S.y).copy(), np.asarray(S.s).copy(), S.tau, S.kappa, it
