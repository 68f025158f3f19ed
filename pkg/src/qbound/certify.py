"""Min-entropy certification for two pure qubit preparations of bounded overlap.

The prepared states sit at ``(+-sin t, 0, cos t)`` on the Bloch sphere with
``cos t = delta``, and the measurement is a planar three-outcome rank-1 POVM
``M_b = (lambda_b / 2)(I + u_b . sigma)`` with ``u_b = (sin theta_b, 0, cos theta_b)``.
Angles are measured from the states' symmetry axis. Honest statistics go into
the guessing program of :mod:`qbound.sdp`, and the free parameters
``(theta1, theta2, lambda1)`` are tuned by Nelder-Mead with random restarts to
maximize ``H_min = -log2(p_guess)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .bloch import QuditState, bloch_angle_from_overlap, state_from_bloch
from .bounds import min_entropy
from .errors import DomainError, InfeasibleError, OptimizationFailedError, QboundError, SolverError
from .povm import Povm, probabilities, validate
from .sdp import GuessingSolution, solve_guessing

#: Objective value assigned to parameters the solver cannot handle.
PENALTY = 1.0

CSV_HEADER = "delta,p_guess,h_min,theta1,theta2,lambda1,dual_gap,restart_best"


def fitted_lambda(delta: float) -> float:
    """Rational fit of the optimal symmetric weight ``lambda(delta)``."""
    d = delta
    return (0.7323 * d**3 - 6.077 * d**2 + 4.017 * d + 5.742) / (d**3 - 7.645 * d**2 + 4.903 * d + 7.147)


@dataclass(frozen=True)
class OverlapScenario:
    delta: float
    guess_input: int = 0

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise DomainError(f"overlap must lie in [0, 1], got {self.delta!r}")
        if self.guess_input not in (0, 1):
            raise DomainError(f"guess input must be 0 or 1, got {self.guess_input!r}")

    @property
    def xz(self) -> np.ndarray:
        """``(x, z)`` Bloch components of the two states, one row per preparation."""
        t = bloch_angle_from_overlap(self.delta)
        return np.array([[math.sin(t), self.delta], [-math.sin(t), self.delta]])

    @property
    def states(self) -> tuple[QuditState, QuditState]:
        return tuple(state_from_bloch(2, [x, 0.0, z]) for x, z in self.xz)


@dataclass(frozen=True)
class TernaryParams:
    theta1: float
    theta2: float
    theta3: float
    lambda1: float
    lambda2: float
    lambda3: float

    @property
    def weights(self) -> np.ndarray:
        return np.array([self.lambda1, self.lambda2, self.lambda3])

    @property
    def angles(self) -> np.ndarray:
        return np.array([self.theta1, self.theta2, self.theta3])

    def povm(self) -> Povm:
        th = self.angles
        vecs = np.column_stack([np.sin(th), np.zeros(3), np.cos(th)])
        return Povm.from_arrays(2, self.weights, vecs)

    def to_json(self) -> dict:
        return {k: float(f"{getattr(self, k):.12g}") for k in ("theta1", "theta2", "theta3", "lambda1", "lambda2", "lambda3")}

    @classmethod
    def from_json(cls, data: dict) -> "TernaryParams":
        """Accept either all six fields or only the free ``theta1, theta2, lambda1``."""
        if all(k in data for k in ("theta3", "lambda2", "lambda3")):
            return cls(**{k: float(data[k]) for k in ("theta1", "theta2", "theta3", "lambda1", "lambda2", "lambda3")})
        return close_ternary(float(data["theta1"]), float(data["theta2"]), float(data["lambda1"]))


def _wrap(theta: float) -> float:
    return theta % (2.0 * math.pi)


def close_ternary(theta1: float, theta2: float, lambda1: float, tol: float = 1e-12) -> TernaryParams:
    """Complete ``(theta1, theta2, lambda1)`` to a valid three-outcome POVM.

    Completeness ``sum lambda_b = 2`` and ``sum lambda_b u_b = 0`` leave
    ``|lambda1 u1 + lambda2 u2| = 2 - lambda1 - lambda2``; squaring, the terms
    in ``lambda2**2`` cancel and

        lambda2 = 2 (1 - lambda1) / (2 - lambda1 (1 - cos(theta1 - theta2))).

    When ``u2 = -u1`` and ``lambda1 = 1`` every ``lambda2`` in ``[0, 1]`` works;
    the projective pair ``lambda2 = 1, lambda3 = 0`` is returned. ``theta3`` is
    wrapped to ``[0, 2 pi)``, and set to 0 for a zero third weight.

    Raises
    ------
    InfeasibleError
        No completion with nonnegative weights exists.
    """
    if not 0.0 <= lambda1 <= 2.0:
        raise DomainError(f"lambda1 must lie in [0, 2], got {lambda1!r}")
    cos12 = math.cos(theta1 - theta2)
    num = 2.0 * (1.0 - lambda1)
    den = 2.0 - lambda1 * (1.0 - cos12)
    if abs(den) <= tol:
        if abs(num) > tol:
            raise InfeasibleError("no completion: the first two outcomes cannot be balanced")
        lambda2 = 2.0 - lambda1
    else:
        lambda2 = num / den
    lambda3 = 2.0 - lambda1 - lambda2
    if lambda2 < -tol or lambda3 < -tol:
        raise InfeasibleError(f"completion needs negative weights (lambda2={lambda2:.6g}, lambda3={lambda3:.6g})")
    lambda2, lambda3 = max(lambda2, 0.0), max(lambda3, 0.0)
    if lambda3 <= tol:
        return TernaryParams(theta1, theta2, 0.0, lambda1, 2.0 - lambda1, 0.0)
    w = -(lambda1 * np.array([math.sin(theta1), math.cos(theta1)]) + lambda2 * np.array([math.sin(theta2), math.cos(theta2)]))
    theta3 = _wrap(math.atan2(w[0], w[1]))
    return TernaryParams(theta1, theta2, theta3, lambda1, lambda2, lambda3)


def symmetric_params(lam: float) -> TernaryParams:
    """``lambda2 = lambda3 = lam``, ``lambda1 = 2(1 - lam)``, ``theta1 = 0``, ``theta2 = -theta3 = beta``.

    Closure fixes ``cos beta = 1 - 1/lam``, so ``lam`` must lie in ``[1/2, 1]``.
    """
    if not 0.5 <= lam <= 1.0:
        raise DomainError(f"symmetric weight must lie in [1/2, 1], got {lam!r}")
    beta = math.acos(min(1.0, max(-1.0, 1.0 - 1.0 / lam)))
    return TernaryParams(0.0, beta, -beta, 2.0 * (1.0 - lam), lam, lam)


def fitted_params(delta: float) -> TernaryParams:
    """Symmetric parameters with the fitted weight :func:`fitted_lambda`."""
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"overlap must lie in [0, 1], got {delta!r}")
    return symmetric_params(fitted_lambda(delta))


def honest_statistics(params: TernaryParams, scenario: OverlapScenario) -> np.ndarray:
    """``p(b|x)`` as a ``(3, 2)`` table."""
    povm = params.povm()
    report = validate(povm)
    if not report.ok:
        raise DomainError(f"parameters do not describe a POVM: {report}")
    return np.column_stack([probabilities(povm, s) for s in scenario.states])


def guessing_probability(stats, scenario: OverlapScenario, *, tol: float = 1e-9) -> GuessingSolution:
    return solve_guessing(stats, scenario.xz, scenario.guess_input, tol=tol)


@dataclass
class CertificationResult:
    delta: float
    p_guess: float
    h_min: float
    params: TernaryParams | None
    statistics: np.ndarray | None
    dual_gap: float
    solver_iterations: int
    restart_best: int = -1
    error: str | None = None

    def to_json(self) -> dict:
        def r(x):
            return None if x is None or not math.isfinite(x) else float(f"{x:.12g}")

        out = {
            "delta": r(self.delta),
            "p_guess": r(self.p_guess),
            "h_min": r(self.h_min),
            "params": self.params.to_json() if self.params else None,
            "statistics": None if self.statistics is None else [[r(v) for v in row] for row in self.statistics],
            "dual_gap": r(self.dual_gap),
            "solver_iterations": self.solver_iterations,
            "restart_best": self.restart_best,
        }
        if self.error:
            out["error"] = self.error
        return out

    def csv_row(self) -> str:
        p = self.params
        vals = [self.delta, self.p_guess, self.h_min]
        vals += [p.theta1, p.theta2, p.lambda1] if p else [math.nan] * 3
        vals.append(self.dual_gap)
        return ",".join(f"{v:.12g}" for v in vals) + f",{self.restart_best}"


def certify_params(params: TernaryParams, scenario: OverlapScenario, *, tol: float = 1e-9) -> CertificationResult:
    """Certify the entropy of one fixed measurement."""
    if scenario.delta >= 1.0:
        raise DomainError("delta = 1 makes the two preparations identical; certification needs delta < 1")
    stats = honest_statistics(params, scenario)
    sol = guessing_probability(stats, scenario, tol=tol)
    p = min(sol.p_guess, 1.0)
    return CertificationResult(
        delta=scenario.delta,
        p_guess=sol.p_guess,
        h_min=min_entropy(p),
        params=params,
        statistics=stats,
        dual_gap=sol.dual_gap,
        solver_iterations=sol.iterations,
    )


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 20
    seed: int = 42
    ansatz: str = "free"  # or "symmetric"
    tol: float = 1e-9
    max_evals: int = 400
    guess_input: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise DomainError("restarts must be at least 1")
        if self.tol <= 0:
            raise DomainError("tolerance must be positive")
        if self.ansatz not in ("free", "symmetric"):
            raise DomainError(f"unknown ansatz {self.ansatz!r}")


_BOX = {
    "free": (np.array([-math.pi, -math.pi, 0.0]), np.array([math.pi, math.pi, 2.0])),
    "symmetric": (np.array([0.5]), np.array([1.0])),
}


def _params_of(z: np.ndarray, ansatz: str) -> TernaryParams:
    if ansatz == "symmetric":
        return symmetric_params(float(z[0]))
    return close_ternary(float(z[0]), float(z[1]), float(z[2]))


def _start_points(delta: float, config: OptimizerConfig) -> list[np.ndarray]:
    lo, hi = _BOX[config.ansatz]
    lam = min(1.0, max(0.5, fitted_lambda(delta)))
    fitted = np.array([lam]) if config.ansatz == "symmetric" else np.array([0.0, math.acos(1.0 - 1.0 / lam), 2.0 * (1.0 - lam)])
    rng = np.random.default_rng(config.seed)
    return [fitted] + [rng.uniform(lo, hi) for _ in range(config.restarts)]


def optimize_entropy(delta: float, config: OptimizerConfig = OptimizerConfig()) -> CertificationResult:
    """Maximize ``H_min`` over the measurement parameters.

    Restart 0 starts from :func:`fitted_params`; restarts ``1..R`` start from
    uniform points of the box ``theta in [-pi, pi], lambda1 in [0, 2]`` (or
    ``lambda in [1/2, 1]`` for the symmetric ansatz) drawn from ``config.seed``.
    The objective clips to the box, and parameters without a valid completion
    or a converged solve score :data:`PENALTY`.

    Raises
    ------
    OptimizationFailedError
        No restart reached a single certified point.
    """
    if not 0.0 <= delta < 1.0:
        raise DomainError(f"optimization needs delta in [0, 1), got {delta!r}")
    scenario = OverlapScenario(delta, config.guess_input)
    lo, hi = _BOX[config.ansatz]
    cache: dict[bytes, CertificationResult | None] = {}

    def evaluate(z) -> CertificationResult | None:
        z = np.clip(z, lo, hi)
        key = z.tobytes()
        if key not in cache:
            try:
                cache[key] = certify_params(_params_of(z, config.ansatz), scenario, tol=config.tol)
            except (InfeasibleError, SolverError, DomainError):
                cache[key] = None
        return cache[key]

    def objective(z) -> float:
        res = evaluate(z)
        return PENALTY if res is None else res.p_guess

    best, best_index = None, -1
    for i, z0 in enumerate(_start_points(delta, config)):
        out = scipy.optimize.minimize(
            objective,
            z0,
            method="Nelder-Mead",
            options={"maxfev": config.max_evals, "xatol": 1e-7, "fatol": 1e-10},
        )
        res = evaluate(out.x)
        if res is not None and (best is None or res.p_guess < best.p_guess):
            best, best_index = res, i
    if best is None:
        raise OptimizationFailedError(f"no restart produced a certified point at delta={delta}")
    best.restart_best = best_index
    return best


def entropy_curve(delta_grid, config: OptimizerConfig = OptimizerConfig()) -> list[CertificationResult]:
    """Optimized results over ``delta_grid`` in increasing order; failures are kept with ``error`` set."""
    out = []
    for delta in sorted(float(d) for d in delta_grid):
        try:
            out.append(optimize_entropy(delta, config))
        except QboundError as exc:
            out.append(CertificationResult(delta, math.nan, math.nan, None, None, math.nan, 0, -1, str(exc)))
    return out


def curve_csv(results) -> str:
    return "\n".join([CSV_HEADER] + [r.csv_row() for r in results]) + "\n"
