"""Guessing-probability program for the two-preparation qubit scenario.

The adversary splits the untrusted three-outcome measurement into branches
``e = 0, 1, 2``, each a subnormalized measurement ``{N_b^e}`` with
``sum_b N_b^e = t_e I``, and guesses ``e``. Everything lives in the real
xz-plane, so each operator is ``N = alpha I + beta X + gamma Z`` and positivity
is the Lorentz-cone condition ``alpha >= sqrt(beta**2 + gamma**2)``. The program
becomes a conic problem over nine 3-dimensional cones:

    maximize    sum_e  alpha_ee + n*.(beta_ee, gamma_ee)
    subject to  sum_b (beta_be, gamma_be) = 0            for each e
                sum_be alpha_be = 1
                sum_e alpha_be + n_x.(beta_be, gamma_be) = p(b|x)

with ``n_x`` the (x, z) Bloch components of the prepared states and ``n*``
those of the state whose outcome is guessed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import InfeasibleError, SolverError, ValidationError
from .socp import DUAL_INFEASIBLE, PRIMAL_INFEASIBLE, solve_socp

N_OUT = 3
N_BRANCH = 3

#: Rows whose pivot falls below this (relative) are treated as dependent.
RANK_TOL = 1e-10


#: Widths and slacks within this multiple of their rounding noise count as zero.
NOISE_FACTOR = 4.0
#: Marginals with trace below this are treated as the zero operator.
PIN_TOL = 1e-12
#: Slack below zero tolerated before statistics are declared unrealizable.
FEAS_TOL = 1e-9


def _cone(b: int, e: int) -> int:
    return 3 * (b * N_BRANCH + e)


def _jdet(z) -> float:
    return float(z[0] * z[0] - z[1] * z[1] - z[2] * z[2])


@dataclass
class MarginalFace:
    """Where the statistics put the marginals ``M_b = sum_e N_b^e``.

    ``pinned[b]`` is the marginal of an outcome forced to a single operator;
    ``centers[b]`` is a strictly positive marginal for each remaining outcome,
    chosen so that together with the pinned ones they form a feasible
    measurement.
    """

    pinned: dict
    centers: dict


def _boost(m) -> np.ndarray:
    """Cone automorphism sending ``(1, 0, 0)`` to ``m`` (``m`` strictly inside the cone)."""
    r = np.sqrt(max(_jdet(m), 0.0))
    v = m / r
    h = np.empty((3, 3))
    h[0, 0] = v[0]
    h[0, 1:] = h[1:, 0] = v[1:]
    h[1:, 1:] = np.eye(2) + np.outer(v[1:], v[1:]) / (1.0 + v[0])
    return r * h


def _interval(z, k, a):
    """Roots ``lo <= hi`` of ``J(z + s k) = 0`` for ``a = J(k) < 0`` with their rounding noise.

    The half-linear coefficient ``hb`` is returned last for reuse.
    """
    hb = float(z[0] * k[0] - z[1] * k[1] - z[2] * k[2])
    cc = _jdet(z)
    disc = hb * hb - a * cc
    eps = np.finfo(float).eps
    # rounding in disc is about eps times its largest term; near a double root
    # that turns into a square-root sized error on the roots
    ddisc = 16.0 * eps * (hb * hb + abs(a * cc) + 1.0)
    if disc < -ddisc:
        return None
    disc = max(disc, 0.0)
    root = np.sqrt(disc)
    q = -(hb + np.copysign(root, hb))
    r1, r2 = (q / a, cc / q) if q != 0.0 else (-hb / a, -hb / a)
    lo, hi = min(r1, r2), max(r1, r2)
    noise = (np.sqrt(disc + ddisc) - root) / abs(a) + 16.0 * eps * (abs(lo) + abs(hi) + 1.0)
    return lo, hi, noise, hb


def _analytic_center(lo, hi, total):
    """Maximize ``sum log(s - lo) + log(hi - s)`` subject to ``sum s = total``."""
    w = hi - lo

    def s_of(u):
        # offset x from lo solves nu x^2 - (nu w + 2) x + w = 0 with 0 < x < w;
        # pick the form of the root that does not cancel
        t = np.sinh(u) * (w / w.min())
        d = np.sqrt(t * t + 4.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.where(t + 2.0 >= 0.0, 2.0 * w / (t + 2.0 + d), w * (t + 2.0 - d) / (2.0 * t))
        return lo + x

    u = scipy.optimize.brentq(lambda u: s_of(u).sum() - total, -60.0, 60.0, xtol=1e-14)
    return s_of(u)


def marginal_face(stats, states) -> MarginalFace:
    """Locate the marginals the statistics allow.

    For two distinct states the statistics fix each ``M_b = (alpha, beta, gamma)``
    up to a shift ``s_b`` along a common direction ``k``; positivity confines
    ``s_b`` to an interval ``[lo_b, hi_b]`` and completeness adds
    ``sum_b s_b = sigma0``. An outcome whose interval has no width beyond
    rounding noise is pinned at its double root; if the remaining outcomes can
    only meet ``sigma0`` at an end of their box they are pinned there too.
    Without this the conic program has no strictly feasible point and
    interior-point accuracy collapses. The other outcomes get the analytic
    center of what is left.

    Raises
    ------
    InfeasibleError
        The statistics admit no positive marginal operators.
    """
    rows = np.column_stack([np.ones(2), np.asarray(states, dtype=float)])
    _, sv, vt = np.linalg.svd(rows)
    if sv[1] <= 1e-12 * sv[0]:
        return MarginalFace({}, {})
    k = vt[2]
    z0 = np.linalg.lstsq(rows, np.asarray(stats, dtype=float).T, rcond=None)[0].T
    a = _jdet(k)  # < 0: k points outside the cone for distinct states
    lo, hi, noise = np.empty(N_OUT), np.empty(N_OUT), np.empty(N_OUT)
    s = np.empty(N_OUT)
    tangent = []
    for b in range(N_OUT):
        iv = _interval(z0[b], k, a)
        if iv is None:
            raise InfeasibleError(f"no positive operator reproduces the statistics of outcome {b}")
        lo[b], hi[b], noise[b], hb = iv
        if z0[b, 0] + 0.5 * (lo[b] + hi[b]) * k[0] < -FEAS_TOL:
            raise InfeasibleError(f"statistics of outcome {b} require a negative operator")
        if hi[b] - lo[b] <= NOISE_FACTOR * noise[b]:
            tangent.append(b)
            s[b] = -hb / a
    free = [b for b in range(N_OUT) if b not in tangent]
    sigma0 = float(k @ (np.array([1.0, 0.0, 0.0]) - z0.sum(axis=0)))
    rem = sigma0 - s[tangent].sum()
    slack_lo, slack_hi = rem - lo[free].sum(), hi[free].sum() - rem
    tol = max(FEAS_TOL, NOISE_FACTOR * noise.sum())
    if slack_lo < -tol or slack_hi < -tol:
        raise InfeasibleError("the statistics admit no completeness-respecting marginal")
    pinned = set(tangent)
    if free and slack_lo <= NOISE_FACTOR * noise.sum():
        s[free] = lo[free]
        pinned.update(free)
    elif free and slack_hi <= NOISE_FACTOR * noise.sum():
        s[free] = hi[free]
        pinned.update(free)
    elif free:
        s[free] = _analytic_center(lo[free], hi[free], rem)
    if pinned:
        # spread the sub-noise mismatch so that sum_b M_b = I holds exactly
        idx = sorted(pinned)
        s[idx] += (sigma0 - s.sum()) / len(idx)
    marg = {b: z0[b] + s[b] * k for b in range(N_OUT)}
    return MarginalFace(
        pinned={b: marg[b] for b in sorted(pinned)},
        centers={b: marg[b] for b in range(N_OUT) if b not in pinned},
    )


def build_program(stats, states, guess_input: int = 0, face: MarginalFace | None = None):
    """Assemble ``(A, rhs, c, (embed, slots))`` in the solver's minimization form.

    Parameters
    ----------
    stats : (3, 2) array
        ``stats[b, x] = p(b|x)``.
    states : (2, 2) array
        ``(x, z)`` Bloch components of the two prepared states.
    guess_input : int
        Index ``x*`` of the preparation whose outcome is guessed.
    face : MarginalFace, optional
        Output of :func:`marginal_face`. Branches of an outcome with center
        ``C_b`` are written ``N = G K`` with ``G`` the cone automorphism taking
        ``(1, 0, 0)`` to ``C_b / 3``; this is only a change of variables, but
        it keeps thin feasible sets well scaled and makes the solver's start
        point feasible. A pinned marginal ``M_b`` forces ``N_b^e = t M_b``;
        ``t`` is carried by a cone whose other components are fixed to zero.
        A pinned zero marginal removes its variables. Without ``face`` every
        branch is a plain cone variable.

    Returns
    -------
    A, rhs, c : arrays
    (embed, slots)
        ``(alpha, beta, gamma)`` of ``N_b^e`` for ``slots[i] = (b, e)`` is
        ``embed[i] @ x[3i:3i+3]``.
    """
    stats = np.asarray(stats, dtype=float)
    states = np.asarray(states, dtype=float)
    pinned = face.pinned if face else {}
    centers = face.centers if face else {}
    slots, embeds = [], []
    for b in range(N_OUT):
        if b in pinned:
            m = pinned[b]
            if m[0] <= PIN_TOL:
                continue
            emb = np.zeros((3, 3))
            emb[:, 0] = m / N_BRANCH
        elif b in centers:
            emb = _boost(centers[b] / N_BRANCH)
        else:
            emb = np.eye(3)
        for e in range(N_BRANCH):
            embeds.append(emb)
            slots.append((b, e))
    embed = np.array(embeds).reshape(len(slots), 3, 3)
    n = 3 * len(slots)
    index = {sl: 3 * i for i, sl in enumerate(slots)}

    rows, rhs = [], []

    def add_row(coeffs, value):
        # coeffs maps a slot to its (alpha, beta, gamma) coefficients
        r = np.zeros(n)
        for sl, co in coeffs.items():
            if sl in index:
                i = index[sl]
                r[i : i + 3] += np.asarray(co) @ embed[i // 3]
        rows.append(r)
        rhs.append(value)

    for e in range(N_BRANCH):
        for comp in (1, 2):
            co = np.zeros(3)
            co[comp] = 1.0
            add_row({(b, e): co for b in range(N_OUT)}, 0.0)
    add_row({sl: (1.0, 0.0, 0.0) for sl in slots}, 1.0)
    for b in range(N_OUT):
        if b in pinned:
            add_row({(b, e): (1.0, 0.0, 0.0) for e in range(N_BRANCH)}, float(pinned[b][0]))
            continue
        for x in range(2):
            add_row({(b, e): (1.0, states[x, 0], states[x, 1]) for e in range(N_BRANCH)}, stats[b, x])
    for i, sl in enumerate(slots):
        if sl[0] in pinned:
            for comp in (1, 2):
                r = np.zeros(n)
                r[3 * i + comp] = 1.0
                rows.append(r)
                rhs.append(0.0)

    c = np.zeros(n)
    nstar = states[guess_input]
    for e in range(N_BRANCH):
        if (e, e) in index:
            i = index[(e, e)]
            c[i : i + 3] = -np.array([1.0, nstar[0], nstar[1]]) @ embed[i // 3]
    return np.array(rows), np.array(rhs), c, (embed, slots)


def reduce_rows(A, rhs, tol: float = RANK_TOL):
    """Drop linearly dependent equality rows.

    Rows are kept greedily by pivoted QR of ``A^T``. The dropped rows must be
    consistent with the kept ones, otherwise the system has no solution at all
    and :class:`InfeasibleError` is raised.
    """
    _, R, piv = scipy.linalg.qr(A.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > tol * diag[0]))
    keep = np.sort(piv[:rank])
    Ak, bk = A[keep], rhs[keep]
    if rank < A.shape[0]:
        z, *_ = np.linalg.lstsq(Ak, bk, rcond=None)
        if np.max(np.abs(A @ z - rhs)) > 1e-8:
            raise InfeasibleError("the observed statistics contradict the linear constraints")
    return Ak, bk


@dataclass
class GuessingSolution:
    """Optimum of the guessing program.

    ``branches[b, e]`` holds ``(alpha, beta, gamma)`` of ``N_b^e``. ``dual_bound``
    is the certified upper bound on the guessing probability.
    """

    p_guess: float
    dual_bound: float
    dual_gap: float
    branches: np.ndarray
    iterations: int

    def operators(self) -> np.ndarray:
        """The nine 2x2 operators as a ``(3, 3, 2, 2)`` array indexed ``[b, e]``."""
        a, bx, gz = self.branches[..., 0], self.branches[..., 1], self.branches[..., 2]
        out = np.empty(self.branches.shape[:2] + (2, 2))
        out[..., 0, 0] = a + gz
        out[..., 1, 1] = a - gz
        out[..., 0, 1] = out[..., 1, 0] = bx
        return out


def solve_guessing(stats, states, guess_input: int = 0, *, tol: float = 1e-9, backend=None) -> GuessingSolution:
    """Solve the guessing program for the statistics ``stats[b, x]``.

    Raises
    ------
    ValidationError
        Malformed statistics (wrong shape or columns not summing to one).
    InfeasibleError
        No adversary reproduces the statistics with these states.
    SolverError
        The interior-point method did not converge.
    """
    stats = np.asarray(stats, dtype=float)
    if stats.shape != (N_OUT, 2):
        raise ValidationError(f"statistics must be a 3x2 table p(b|x), got shape {stats.shape}")
    if not np.all(np.isfinite(stats)):
        raise ValidationError("statistics contain non-finite entries")
    sums = stats.sum(axis=0)
    if np.max(np.abs(sums - 1.0)) > 1e-8:
        raise ValidationError(f"statistics columns sum to {sums.tolist()}, expected 1")
    if guess_input not in (0, 1):
        raise ValidationError("guess input must be 0 or 1")

    face = marginal_face(stats, states)
    A, rhs, c, (embed, slots) = build_program(stats, states, guess_input, face)
    A, rhs = reduce_rows(A, rhs)
    res = solve_socp(A, rhs, c, tol=tol, backend=backend)
    if res.status == PRIMAL_INFEASIBLE:
        raise InfeasibleError("statistics are not reproducible by any measurement on these states")
    if res.status == DUAL_INFEASIBLE or not res.converged:
        raise SolverError(f"conic solver stopped: {res.status_name}", res.residuals)
    # guessing the most likely outcome is always feasible, so an optimum below
    # that value means the iterate is not accurate enough to report
    if -res.primal < stats[:, guess_input].max() - 1e-8:
        raise SolverError("conic solver returned a value below the trivial guess", res.residuals)
    branches = np.zeros((N_OUT, N_BRANCH, 3))
    for i, (b, e) in enumerate(slots):
        branches[b, e] = embed[i] @ res.x[3 * i : 3 * i + 3]
    return GuessingSolution(
        p_guess=-res.primal,
        dual_bound=-res.dual,
        dual_gap=abs(res.primal - res.dual),
        branches=branches,
        iterations=res.iterations,
    )
