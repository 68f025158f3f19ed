"""Pure numpy interior-point solver for conic programs over products of 3-dim Lorentz cones.

Solves

    minimize  c.x   subject to  A x = b,  x in Q3 x Q3 x ... x Q3,

with ``Q3 = {(u0, u1, u2): u0 >= sqrt(u1**2 + u2**2)}``, together with the dual

    maximize  b.y   subject to  A^T y + s = c,  s in Q3 x ... x Q3.

The method works on the homogeneous self-dual embedding, so infeasible problems
end with a Farkas certificate instead of diverging. Steps are Mehrotra
predictor-corrector in Nesterov-Todd scaled coordinates. The scaling is kept as
a dense 3x3 matrix per cone and updated multiplicatively, ``W+ = Wbar W`` with
``Wbar`` the NT scaling of the scaled iterates; recomputing it from ``x`` and
``s`` directly loses all accuracy once iterates approach the cone boundary.
Only the inverse ``W^-1`` is ever applied, so only it is stored.

The compiled kernel in ``_socp_ext.pyx`` performs the same iteration step for
step; keep the two in sync.
"""

from __future__ import annotations

import numpy as np

OPTIMAL = 0
PRIMAL_INFEASIBLE = 1
DUAL_INFEASIBLE = 2
MAX_ITER = 3
NUMERICAL_ERROR = 4

STEP = 0.99
INF_TOL = 1e-8
STALL = 5  # iterations without a better iterate before giving up


def _jdet(u):
    """``u0**2 - |u1|**2`` without cancellation near the cone boundary."""
    r = np.hypot(u[:, 1], u[:, 2])
    return (u[:, 0] - r) * (u[:, 0] + r)


def _jordan(u, v):
    out = np.empty_like(u)
    out[:, 0] = np.einsum("ij,ij->i", u, v)
    out[:, 1:] = u[:, :1] * v[:, 1:] + v[:, :1] * u[:, 1:]
    return out


def _arrow_solve(lam, r):
    """Solve ``lam o w = r`` cone by cone."""
    det = _jdet(lam)
    w = np.empty_like(r)
    w[:, 0] = (lam[:, 0] * r[:, 0] - lam[:, 1] * r[:, 1] - lam[:, 2] * r[:, 2]) / det
    w[:, 1:] = (r[:, 1:] - w[:, :1] * lam[:, 1:]) / lam[:, :1]
    return w


def _root(a, hb, cc):
    # smallest positive root of a t^2 + 2 hb t + cc with cc > 0
    if abs(a) <= 1e-300:
        return -cc / (2.0 * hb) if hb < 0.0 else np.inf
    disc = hb * hb - a * cc
    if disc < 0.0 or (a > 0.0 and hb >= 0.0):
        return np.inf
    return cc / (-hb + np.sqrt(disc))


def _cone_step(u, du):
    """Largest ``a`` (possibly inf) with ``u + a du`` in every cone."""
    a = du[:, 0] ** 2 - du[:, 1] ** 2 - du[:, 2] ** 2
    hb = u[:, 0] * du[:, 0] - u[:, 1] * du[:, 1] - u[:, 2] * du[:, 2]
    cc = _jdet(u)
    out = min((_root(a[i], hb[i], cc[i]) for i in range(u.shape[0])), default=np.inf)
    # the quadratic alone misses the backward cone when its discriminant rounds
    # below zero (steps along the axis have a double root)
    neg = du[:, 0] < 0.0
    if np.any(neg):
        out = min(out, float(np.min(-u[neg, 0] / du[neg, 0])))
    return out


def _nt_matrices(x, s):
    """Symmetric NT scaling ``Wbar`` (and its inverse) with ``Wbar x = Wbar^-1 s``, per cone."""
    xj = np.sqrt(_jdet(x))
    sj = np.sqrt(_jdet(s))
    xb = x / xj[:, None]
    sb = s / sj[:, None]
    gam = np.sqrt((1.0 + np.einsum("ij,ij->i", xb, sb)) / 2.0)
    w = sb.copy()
    w[:, 0] += xb[:, 0]
    w[:, 1:] -= xb[:, 1:]
    w /= (2.0 * gam)[:, None]
    eta = np.sqrt(sj / xj)
    q = x.shape[0]
    core = np.zeros((q, 3, 3))
    core[:, 0, 0] = w[:, 0]
    core[:, 0, 1:] = w[:, 1:]
    core[:, 1:, 0] = w[:, 1:]
    core[:, 1:, 1:] = np.eye(2) + w[:, 1:, None] * w[:, None, 1:] / (1.0 + w[:, 0])[:, None, None]
    inv = core.copy()
    inv[:, 0, 1:] *= -1.0
    inv[:, 1:, 0] *= -1.0
    return core * eta[:, None, None], inv / eta[:, None, None]


def _bmul(blocks, v):
    return np.einsum("kij,kj->ki", blocks, v)


def _bmul_t(blocks, v):
    return np.einsum("kji,kj->ki", blocks, v)


def solve_socp3(A, b, c, tol=1e-9, max_iter=100):
    """Returns ``(status, x, y, s, tau, kappa, iterations)``; the solution is ``x/tau`` etc.

    Without reaching ``tol`` the best iterate seen is returned with status
    ``MAX_ITER``; close to the optimum the accumulated scaling eventually
    degrades, so iterating on does not help.
    """
    A = np.ascontiguousarray(A, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    c = np.ascontiguousarray(c, dtype=float)
    m, n = A.shape
    q = n // 3
    Aq = A.reshape(m, q, 3)
    cq = c.reshape(q, 3)
    Winv = np.tile(np.eye(3), (q, 1, 1))
    lam = np.zeros((q, 3))
    lam[:, 0] = 1.0
    x = lam.copy()
    s = lam.copy()
    y = np.zeros(m)
    tau = kappa = 1.0
    normb = max(1.0, float(np.linalg.norm(b)))
    normc = max(1.0, float(np.linalg.norm(c)))
    status = MAX_ITER
    it = 0
    best = (np.inf, x, y, s, tau, kappa)
    since_best = 0
    for it in range(max_iter + 1):
        xf = x.ravel()
        rp = A @ xf - b * tau
        rd = (A.T @ y).reshape(q, 3) + s - cq * tau
        cx = float(c @ xf)
        by = float(b @ y)
        rg = cx - by + kappa
        mu = (float(np.sum(lam * lam)) + tau * kappa) / (q + 1)

        pres = np.linalg.norm(rp) / tau / normb
        dres = np.linalg.norm(rd) / tau / normc
        gres = abs(cx - by) / tau / max(1.0, abs(cx / tau))
        merit = max(pres, dres, gres)
        if merit < best[0]:
            best = (merit, x, y, s, tau, kappa)
            since_best = 0
        else:
            since_best += 1
        if merit <= tol:
            status = OPTIMAL
            break
        if by > 0 and np.linalg.norm(rd + cq * tau) <= INF_TOL * by:
            status = PRIMAL_INFEASIBLE
            break
        if cx < 0 and np.linalg.norm(rp + b * tau) <= INF_TOL * -cx:
            status = DUAL_INFEASIBLE
            break
        if it == max_iter or since_best >= STALL:
            break

        # reduced system in scaled coordinates: Abar = A W^-1, factor Abar Abar^T = R^T R
        Abar = np.einsum("mki,kij->mkj", Aq, Winv).reshape(m, n)
        R = np.linalg.qr(Abar.T, mode="r")
        if np.min(np.abs(np.diag(R))) <= 1e-300:
            status = NUMERICAL_ERROR
            break

        def msolve(r):
            return np.linalg.solve(R, np.linalg.solve(R.T, r))

        cbar = _bmul_t(Winv, cq)
        rdbar = _bmul_t(Winv, rd)
        dy2 = msolve(b + Abar @ cbar.ravel())
        dx2 = (Abar.T @ dy2).reshape(q, 3) - cbar
        denom = float(cbar.ravel() @ dx2.ravel() - b @ dy2) - kappa / tau

        def direction(rc, rtk, damp):
            # scaled directions: dxt = W dx, dst = W^-T ds
            qv = _arrow_solve(lam, rc)
            t = qv + damp * rdbar
            dy = msolve(-damp * rp - Abar @ t.ravel())
            dxt = (Abar.T @ dy).reshape(q, 3) + t
            dtau = (-damp * rg - float(cbar.ravel() @ dxt.ravel()) + float(b @ dy) - rtk / tau) / denom
            dxt = dxt + dtau * dx2
            dy = dy + dtau * dy2
            # Take x back through W^-1 and project onto the linearized primal
            # equation so that the residual shrinks exactly; s is recovered from
            # the dual equation for the same reason. Mapping scaled directions
            # back directly amplifies rounding by cond(W) near the optimum.
            dx = _bmul(Winv, dxt)
            corr = (Abar.T @ msolve(-damp * rp + b * dtau - A @ dx.ravel())).reshape(q, 3)
            dx += _bmul(Winv, corr)
            dxt = dxt + corr
            ds = -damp * rd - (A.T @ dy).reshape(q, 3) + cq * dtau
            dst = qv - dxt
            dkappa = (rtk - kappa * dtau) / tau
            return dxt, dy, dst, dtau, dkappa, dx, ds

        def max_step(dxt, dst, dtau, dkappa):
            a = min(_cone_step(lam, dxt), _cone_step(lam, dst))
            if dtau < 0:
                a = min(a, -tau / dtau)
            if dkappa < 0:
                a = min(a, -kappa / dkappa)
            return a

        lamsq = _jordan(lam, lam)
        dxa, _, dsa, dtaua, dkappaa, _, _ = direction(-lamsq, -tau * kappa, 1.0)
        alpha = min(1.0, max_step(dxa, dsa, dtaua, dkappaa))
        sigma = min(1.0, max(0.0, (1.0 - alpha) ** 3))

        rc = -lamsq - _jordan(dsa, dxa)
        rc[:, 0] += sigma * mu
        rtk = -tau * kappa - dtaua * dkappaa + sigma * mu
        dxt, dy, dst, dtau, dkappa, dx, ds = direction(rc, rtk, 1.0 - sigma)
        alpha = min(1.0, STEP * max_step(dxt, dst, dtau, dkappa))

        x = x + alpha * dx
        s = s + alpha * ds
        y = y + alpha * dy
        tau += alpha * dtau
        kappa += alpha * dkappa

        xt = lam + alpha * dxt
        st = lam + alpha * dst
        Wb, Wbinv = _nt_matrices(xt, st)
        lam = _bmul(Wb, xt)
        Winv = np.einsum("kij,kjl->kil", Winv, Wbinv)
    if status == MAX_ITER:
        _, x, y, s, tau, kappa = best
    return status, x.ravel(), y, s.ravel(), tau, kappa, it
