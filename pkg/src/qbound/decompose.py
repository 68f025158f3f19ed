"""Convex decomposition of rank-1 POVMs into extremal ones.

A rank-1 POVM with weights ``lambda_b`` and Bloch vectors ``v_b`` is extremal
exactly when the columns ``(1, v_b)`` of its nonzero-weight outcomes are
linearly independent. Any linear dependency ``sum_b c_b (1, v_b) = 0`` moves the
weights along ``lambda + t c`` without leaving the set of POVMs with the same
vectors, so the POVM is the mixture of the two endpoints of that segment. Each
endpoint has at least one more zero weight, which bounds the recursion depth
by the number of outcomes.

When only the statistics on a set of states matter, the relevant vectors are
their components in the span of the states' Bloch vectors, and every extremal
leaf then has at most ``r + 1`` nonzero outcomes for a span of dimension ``r``.

The conical split (one vector a nonnegative combination of the others) is
kept as :func:`conical_split` and used whenever it applies; the null-space split
:func:`dependency_split` covers configurations such as the cross POVM where no
vector is a conical combination of the rest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .bloch import QuditState, is_pure_bloch, operator_from_bloch
from .errors import DecompositionError, PreconditionError, ValidationError
from .povm import TOL, Povm, povm_to_json, to_matrices

#: Residual allowed in a conical combination.
CONE_TOL = 1e-8
#: Relative singular value below which the columns ``(1, v_b)`` count as dependent.
RANK_TOL = 1e-9
#: Weights this small after a split are rounding residue and are set to zero.
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class ConicalDependency:
    """``v_index = sum_b coefficients[b] v_b`` with ``coefficients >= 0`` and ``coefficients[index] = 0``."""

    index: int
    coefficients: np.ndarray


@dataclass
class ConvexDecomposition:
    weights: np.ndarray
    branches: list

    def matrices(self) -> list[np.ndarray]:
        """Weighted element-wise sum of the branches."""
        mats = [to_matrices(br) for br in self.branches]
        return [sum(p * m[b] for p, m in zip(self.weights, mats)) for b in range(len(mats[0]))]

    def residual(self, parent: Povm) -> float:
        """Largest spectral-norm difference between the recombined and parent elements."""
        return max(
            float(np.linalg.norm(m - ref, 2)) for m, ref in zip(self.matrices(), to_matrices(parent))
        )

    @property
    def leaf_outcome_counts(self) -> list[int]:
        return [int(br.support().size) for br in self.branches]

    def to_json(self, parent: Povm | None = None) -> dict:
        out = {
            "weights": [float(f"{w:.12g}") for w in self.weights],
            "branches": [povm_to_json(br, digits=12) for br in self.branches],
        }
        if parent is not None:
            out["residual"] = float(f"{self.residual(parent):.12g}")
        out["leaf_outcome_counts"] = self.leaf_outcome_counts
        return out


@dataclass(frozen=True)
class ProjectedElement:
    weight: float
    bloch: np.ndarray
    is_rank1: bool
    is_psd: bool


def span_projector(states) -> np.ndarray:
    """Orthonormal basis (rows) of the span of the states' Bloch vectors."""
    states = list(states)
    if not states:
        raise ValidationError("need at least one state to define a span")
    d = states[0].dim
    if any(s.dim != d for s in states):
        raise ValidationError("states have different dimensions")
    vecs = np.array([s.bloch for s in states], dtype=float)
    _, sv, vt = np.linalg.svd(vecs, full_matrices=False)
    rank = int(np.sum(sv > 1e-10 * max(1.0, sv[0])))
    return vt[:rank]


def project_to_span(povm: Povm, span: np.ndarray, tol: float = TOL) -> list[ProjectedElement]:
    """Drop the Bloch components orthogonal to ``span``; statistics on spanning states are unchanged."""
    span = np.asarray(span, dtype=float)
    out = []
    for e in povm.elements:
        v = span.T @ (span @ e.bloch)
        w = e.weight
        evals = np.linalg.eigvalsh(operator_from_bloch(povm.dim, v, w))
        out.append(
            ProjectedElement(
                weight=w,
                bloch=v,
                is_rank1=(w == 0.0) or is_pure_bloch(povm.dim, v, tol),
                is_psd=bool(evals[0] >= -tol),
            )
        )
    return out


def _coordinates(povm: Povm, span) -> np.ndarray:
    v = povm.vectors
    if span is None:
        return v
    span = np.asarray(span, dtype=float)
    coords = v @ span.T
    off = v - coords @ span
    sup = povm.support()
    if sup.size and np.max(np.abs(off[sup])) > TOL:
        raise PreconditionError(
            "POVM vectors leave the span of the states; project_to_span breaks the rank-1 "
            "structure, so decompose the POVM over the full space instead"
        )
    return coords


def find_conical_dependency(povm: Povm, span_basis=None) -> ConicalDependency | None:
    """Lowest-index outcome whose vector is a nonnegative combination of the others.

    Each candidate is a linear feasibility problem; the vertex solution with the
    smallest coefficient sum is returned so that the result is unique.
    """
    coords = _coordinates(povm, span_basis)
    sup = povm.support()
    for j in sup:
        others = [b for b in sup if b != j]
        if not others:
            continue
        V = coords[others].T
        res = scipy.optimize.linprog(
            np.ones(len(others)), A_eq=V, b_eq=coords[j], bounds=(0, None), method="highs"
        )
        if res.status != 0:
            continue
        c = np.clip(res.x, 0.0, None)
        if np.linalg.norm(V @ c - coords[j]) > CONE_TOL:
            continue
        full = np.zeros(len(povm))
        full[others] = c
        return ConicalDependency(int(j), full)
    return None


def conical_split(povm: Povm, dep: ConicalDependency, tol: float = TOL) -> ConvexDecomposition:
    """Split off outcome ``dep.index`` using ``v_j = sum_b c_b v_b``.

    Branch one removes ``j`` and reassigns its weight along the combination,
    ``lambda1_b = (lambda_b + lambda_j c_b) / N`` with
    ``N = ((d - lambda_j) + lambda_j sum_b c_b) / d``. The mixing weight is
    ``p = min_b lambda_b / lambda1_b``; branch two,
    ``(lambda - p lambda1) / (1 - p)``, loses the minimizing outcome ``b*``
    (lowest index on ties). Bloch vectors are shared by both branches.
    """
    lam = povm.weights
    j = dep.index
    c = np.asarray(dep.coefficients, dtype=float)
    d = povm.dim
    if lam[j] <= tol:
        raise PreconditionError(f"outcome {j} has zero weight; nothing to split")
    v = povm.vectors
    if c.shape != lam.shape or np.any(c < -tol) or abs(c[j]) > tol:
        raise PreconditionError("dependency coefficients must be nonnegative and vanish at the split outcome")
    if np.linalg.norm(v[j] - c @ v) > CONE_TOL:
        raise PreconditionError(f"vector {j} is not the claimed conical combination of the others")
    c = np.clip(c, 0.0, None)
    c[j] = 0.0
    norm = ((d - lam[j]) + lam[j] * c.sum()) / d
    lam1 = (lam + lam[j] * c) / norm
    lam1[j] = 0.0
    active = np.flatnonzero(lam1 > tol)
    ratios = lam[active] / lam1[active]
    k = int(np.argmin(ratios))
    bstar, p = int(active[k]), float(ratios[k])
    lam2 = (lam - p * lam1) / (1.0 - p)
    lam2[bstar] = 0.0
    lam2[np.abs(lam2) <= ZERO_TOL] = 0.0
    return ConvexDecomposition(
        weights=np.array([p, 1.0 - p]),
        branches=[Povm.from_arrays(d, lam1, v), Povm.from_arrays(d, lam2, v)],
    )


def _null_vector(cols: np.ndarray) -> np.ndarray | None:
    # cols: (r + 1, n) matrix with columns (1, v_b)
    _, sv, vt = np.linalg.svd(cols)
    n = cols.shape[1]
    rank = int(np.sum(sv > RANK_TOL * sv[0]))
    if rank == n:
        return None
    c = vt[-1]
    first = np.flatnonzero(np.abs(c) > RANK_TOL)[0]
    c = c * np.sign(c[first])
    return c / np.max(np.abs(c))


def dependency_split(povm: Povm, span_basis=None, tol: float = TOL) -> ConvexDecomposition | None:
    """Split along a null vector of the columns ``(1, v_b)``; ``None`` for extremal POVMs.

    The null vector is scaled to unit max-norm with its first nonzero entry
    positive. Branches are ``lambda + t_plus c`` and ``lambda - t_minus c``,
    mixed with ``p = t_minus / (t_plus + t_minus)``.
    """
    coords = _coordinates(povm, span_basis)
    sup = povm.support(tol)
    cols = np.vstack([np.ones(sup.size), coords[sup].T])
    c_sup = _null_vector(cols)
    if c_sup is None:
        return None
    lam = povm.weights
    c = np.zeros(len(povm))
    c[sup] = c_sup
    neg, pos = np.flatnonzero(c < 0), np.flatnonzero(c > 0)
    t_plus = float(np.min(lam[neg] / -c[neg]))
    t_minus = float(np.min(lam[pos] / c[pos]))
    lam_a = lam + t_plus * c
    lam_b = lam - t_minus * c
    lam_a[neg[np.argmin(lam[neg] / -c[neg])]] = 0.0
    lam_b[pos[np.argmin(lam[pos] / c[pos])]] = 0.0
    for w in (lam_a, lam_b):
        w[np.abs(w) <= ZERO_TOL] = 0.0
    p = t_minus / (t_plus + t_minus)
    v = povm.vectors
    return ConvexDecomposition(
        weights=np.array([p, 1.0 - p]),
        branches=[Povm.from_arrays(povm.dim, lam_a, v), Povm.from_arrays(povm.dim, lam_b, v)],
    )


def is_extremal(povm: Povm) -> bool:
    return dependency_split(povm) is None


def _same(a: Povm, b: Povm, tol: float = TOL) -> bool:
    return bool(
        np.max(np.abs(a.weights - b.weights)) <= tol
        and np.max(np.abs(a.weights[:, None] * (a.vectors - b.vectors)), initial=0.0) <= tol
    )


def decompose_extremal(povm: Povm, states: list[QuditState] | None = None) -> ConvexDecomposition:
    """Recursively split ``povm`` until every branch is extremal.

    With ``states`` the splits use the vectors' coordinates in the span of the
    states, which must contain every nonzero-weight vector. Identical leaves
    are merged; the order of leaves is depth-first with the first branch of
    every split visited first.

    Raises
    ------
    DecompositionError
        More nested splits than outcomes; only possible through tolerance trouble.
    """
    span = span_projector(states) if states else None
    _coordinates(povm, span)
    leaves: list[tuple[float, Povm]] = []

    def visit(node: Povm, weight: float, depth: int):
        if depth > len(povm):
            raise DecompositionError("split recursion exceeded the number of outcomes")
        split = dependency_split(node, span)
        if split is None:
            leaves.append((weight, node))
            return
        dep = find_conical_dependency(node, span)
        if dep is not None:
            conical = conical_split(node, dep)
            if conical.weights[0] > 0.0:
                split = conical
        for p, br in zip(split.weights, split.branches):
            if p > 0.0:
                visit(br, weight * p, depth + 1)

    visit(povm, 1.0, 0)
    merged: list[list] = []
    for w, leaf in leaves:
        for entry in merged:
            if _same(entry[1], leaf):
                entry[0] += w
                break
        else:
            merged.append([w, leaf])
    weights = np.array([w for w, _ in merged])
    return ConvexDecomposition(weights=weights / weights.sum(), branches=[leaf for _, leaf in merged])
