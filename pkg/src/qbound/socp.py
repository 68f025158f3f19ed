"""Second-order cone solver front end with a compiled kernel and a numpy fallback.

The backend is picked once at import: the Cython extension ``_socp_ext`` when it
was built, otherwise the pure numpy module ``_socp_py``. Setting the environment
variable ``QBOUND_BACKEND=python`` forces the fallback. Both run the same
homogeneous self-dual interior-point iteration.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import _socp_py
from ._socp_py import DUAL_INFEASIBLE, MAX_ITER, NUMERICAL_ERROR, OPTIMAL, PRIMAL_INFEASIBLE

try:
    from . import _socp_ext
except ImportError:  # extension not built
    _socp_ext = None

_KERNELS = {"python": _socp_py.solve_socp3}
if _socp_ext is not None:
    _KERNELS["cython"] = _socp_ext.solve_socp3

_forced = os.environ.get("QBOUND_BACKEND", "").strip().lower()
if _forced and _forced not in _KERNELS:
    raise ImportError(f"QBOUND_BACKEND={_forced!r} is not available; choose from {sorted(_KERNELS)}")

#: Name of the kernel used when no backend is passed explicitly.
BACKEND = _forced or ("cython" if "cython" in _KERNELS else "python")

STATUS_NAMES = {
    OPTIMAL: "optimal",
    PRIMAL_INFEASIBLE: "primal infeasible",
    DUAL_INFEASIBLE: "dual infeasible",
    MAX_ITER: "iteration limit",
    NUMERICAL_ERROR: "numerical error",
}

#: Iterates that stall above the requested tolerance are still accepted below this.
ACCEPT_TOL = 1e-7


def available_backends() -> list[str]:
    return sorted(_KERNELS)


@dataclass
class SocpResult:
    """Solution of ``min c.x s.t. A x = b, x in Q3^q`` and its dual.

    ``primal`` is ``c.x`` and ``dual`` is ``b.y``. ``residuals`` maps a residual
    name to its relative size at the returned point.
    """

    status: int
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    primal: float
    dual: float
    iterations: int
    residuals: dict = field(default_factory=dict)

    @property
    def status_name(self) -> str:
        return STATUS_NAMES[self.status]

    @property
    def converged(self) -> bool:
        return self.status == OPTIMAL or (
            self.status == MAX_ITER and max(self.residuals.values(), default=np.inf) <= ACCEPT_TOL
        )


def solve_socp(A, b, c, *, tol: float = 1e-9, max_iter: int = 100, backend: str | None = None) -> SocpResult:
    """Solve a conic program over 3-dimensional Lorentz cones.

    Parameters
    ----------
    A : (m, 3q) array
        Equality constraint matrix with full row rank.
    b : (m,) array
    c : (3q,) array
    tol : float
        Relative tolerance on every entry of ``SocpResult.residuals``.
    backend : {"cython", "python"}, optional
        Defaults to :data:`BACKEND`.

    Returns
    -------
    SocpResult
        For infeasible problems the returned vectors hold the unnormalized
        Farkas certificate and ``primal``/``dual`` are nan.
    """
    kernel = _KERNELS[backend or BACKEND]
    A = np.ascontiguousarray(A, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    c = np.ascontiguousarray(c, dtype=float)
    if A.ndim != 2 or A.shape[1] % 3 or A.shape != (b.shape[0], c.shape[0]):
        raise ValueError("expected A of shape (m, 3q) with matching b and c")
    status, x, y, s, tau, kappa, it = kernel(A, b, c, float(tol), int(max_iter))
    x, y, s = np.asarray(x), np.asarray(y), np.asarray(s)
    if status in (PRIMAL_INFEASIBLE, DUAL_INFEASIBLE, NUMERICAL_ERROR):
        return SocpResult(status, x, y, s, np.nan, np.nan, it)
    x, y, s = x / tau, y / tau, s / tau
    primal, dual = float(c @ x), float(b @ y)
    residuals = {
        "primal": float(np.linalg.norm(A @ x - b) / max(1.0, np.linalg.norm(b))),
        "dual": float(np.linalg.norm(A.T @ y + s - c) / max(1.0, np.linalg.norm(c))),
        "gap": abs(primal - dual) / max(1.0, abs(primal)),
    }
    return SocpResult(status, x, y, s, primal, dual, it, residuals)
