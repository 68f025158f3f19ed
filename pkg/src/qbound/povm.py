"""Rank-1 POVMs in the generalized Bloch representation.

An element is ``M_b = lambda_b E_b`` with ``E_b = (I + c_d v_b . sigma) / d`` a
rank-1 projector. Completeness ``sum_b M_b = I`` reads

    sum_b lambda_b = d,    sum_b lambda_b v_b = 0,    lambda_b >= 0.

Zero-weight elements are allowed as placeholder outcomes; they carry the zero
vector and are skipped by the unit-norm and purity checks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bloch import (
    QuditState,
    basis_matrices,
    bloch_of_operator,
    is_pure_bloch,
    operator_from_bloch,
)
from .errors import NeedsRefinementError, ValidationError

#: Default tolerance for every POVM check in the package.
TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PovmElement:
    weight: float
    bloch: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class Povm:
    dim: int
    elements: tuple[PovmElement, ...]

    @classmethod
    def from_arrays(cls, dim: int, weights, vectors) -> "Povm":
        weights = np.asarray(weights, dtype=float)
        vectors = np.asarray(vectors, dtype=float)
        if vectors.ndim != 2 or vectors.shape[0] != weights.shape[0]:
            raise ValidationError("weights and vectors must describe the same number of outcomes")
        if vectors.shape[1] != dim * dim - 1:
            raise ValidationError(f"Bloch vectors for d={dim} must have length {dim * dim - 1}")
        elements = []
        for w, v in zip(weights, vectors):
            v = np.array(v, dtype=float)
            if w == 0.0:
                v[:] = 0.0
            v.setflags(write=False)
            elements.append(PovmElement(float(w), v))
        return cls(int(dim), tuple(elements))

    @property
    def weights(self) -> np.ndarray:
        return np.array([e.weight for e in self.elements])

    @property
    def vectors(self) -> np.ndarray:
        return np.array([e.bloch for e in self.elements]).reshape(len(self.elements), self.dim**2 - 1)

    @property
    def n_outcomes(self) -> int:
        return len(self.elements)

    def support(self, tol: float = TOL) -> np.ndarray:
        """Indices of outcomes with weight above ``tol``."""
        return np.flatnonzero(self.weights > tol)

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]
    max_residual: float

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return f"valid (max residual {self.max_residual:.3e})"
        return "invalid: " + "; ".join(self.violations)


def validate(povm: Povm, tol: float = TOL) -> ValidationReport:
    """Check that the weights close the POVM and that every element is a rank-1 projector."""
    d = povm.dim
    violations = []
    residuals = [0.0]
    if len(povm) == 0:
        return ValidationReport(("POVM has no outcomes",), float("inf"))
    w = povm.weights
    v = povm.vectors

    r = abs(w.sum() - d)
    residuals.append(r)
    if r > tol:
        violations.append(f"weights sum to {w.sum():.12g}, expected {d}")

    r = float(np.max(np.abs(w @ v))) if v.size else 0.0
    residuals.append(r)
    if r > tol:
        violations.append(f"weighted Bloch vectors sum to a vector of max-norm {r:.3e}, expected 0")

    if np.any(w < -tol):
        residuals.append(float(-w.min()))
        bad = np.flatnonzero(w < -tol).tolist()
        violations.append(f"negative weights at outcomes {bad}")

    for b in np.flatnonzero(w > tol):
        norm = float(np.linalg.norm(v[b]))
        residuals.append(abs(norm - 1.0))
        if abs(norm - 1.0) > tol:
            violations.append(f"outcome {b}: Bloch vector norm {norm:.12g} != 1")
        elif d > 2 and not is_pure_bloch(d, v[b], tol):
            violations.append(f"outcome {b}: Bloch vector is not a pure-state vector (star condition)")
    return ValidationReport(tuple(violations), float(max(residuals)))


def probability(povm: Povm, state: QuditState, b: int) -> float:
    """``p(b) = lambda_b / d * (1 + (d - 1) v_b . n)``."""
    if povm.dim != state.dim:
        raise ValidationError(f"dimension mismatch: POVM d={povm.dim}, state d={state.dim}")
    e = povm.elements[b]
    d = povm.dim
    return e.weight / d * (1.0 + (d - 1) * float(np.dot(e.bloch, state.bloch)))


def probabilities(povm: Povm, state: QuditState) -> np.ndarray:
    if povm.dim != state.dim:
        raise ValidationError(f"dimension mismatch: POVM d={povm.dim}, state d={state.dim}")
    d = povm.dim
    return povm.weights / d * (1.0 + (d - 1) * (povm.vectors @ state.bloch))


def to_matrices(povm: Povm) -> list[np.ndarray]:
    return [operator_from_bloch(povm.dim, e.bloch, e.weight) for e in povm.elements]


def from_matrices(matrices: Sequence, tol: float = TOL) -> Povm:
    """Read weights and Bloch vectors off rank-1 operators ``M_b = lambda_b E_b``.

    Raises :class:`NeedsRefinementError` for elements of rank above one; pass
    those through :func:`rank1_refine` first.
    """
    mats = [np.asarray(m, dtype=complex) for m in matrices]
    if not mats:
        raise ValidationError("no matrices given")
    d = mats[0].shape[0]
    weights, vectors = [], []
    for i, m in enumerate(mats):
        if m.shape != (d, d):
            raise ValidationError(f"matrix {i} has shape {m.shape}, expected {(d, d)}")
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise ValidationError(f"matrix {i} is not Hermitian")
        evals = np.linalg.eigvalsh(m)
        if evals[0] < -tol:
            raise ValidationError(f"matrix {i} is not positive semidefinite (eigenvalue {evals[0]:.3e})")
        if evals[-2:-1].size and evals[-2] > tol:
            raise NeedsRefinementError(f"matrix {i} has rank > 1; apply rank1_refine first")
        w = float(np.trace(m).real)
        if w <= tol:
            weights.append(0.0)
            vectors.append(np.zeros(d * d - 1))
        else:
            weights.append(w)
            vectors.append(bloch_of_operator(m / w))
    return Povm.from_arrays(d, weights, vectors)


def _eigenspace_vectors(vecs: np.ndarray) -> list[np.ndarray]:
    """Orthonormal basis of span(vecs) built from projected canonical basis vectors."""
    d = vecs.shape[0]
    proj = vecs @ vecs.conj().T
    out: list[np.ndarray] = []
    for i in range(d):
        u = proj[:, i].copy()
        for w in out:
            u -= (w.conj() @ u) * w
        norm = np.linalg.norm(u)
        if norm > 1e-6:
            out.append(u / norm)
        if len(out) == vecs.shape[1]:
            break
    return out


def rank1_refine(matrices: Sequence, tol: float = TOL) -> tuple[Povm, list[int]]:
    """Split every element into weighted rank-1 projectors.

    Returns the refined POVM and ``binning`` where ``binning[i]`` is the original
    outcome that refined outcome ``i`` belongs to. Degenerate eigenspaces are
    resolved deterministically by projecting canonical basis vectors into the
    eigenspace and orthonormalizing in index order.
    """
    mats = [np.asarray(m, dtype=complex) for m in matrices]
    if not mats:
        raise ValidationError("no matrices given")
    d = mats[0].shape[0]
    total = np.zeros((d, d), dtype=complex)
    weights, vectors, binning = [], [], []
    for i, m in enumerate(mats):
        if m.shape != (d, d):
            raise ValidationError(f"matrix {i} has shape {m.shape}, expected {(d, d)}")
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise ValidationError(f"matrix {i} is not Hermitian")
        total += m
        evals, evecs = np.linalg.eigh((m + m.conj().T) / 2)
        if evals[0] < -tol:
            raise ValidationError(f"matrix {i} is not positive semidefinite (eigenvalue {evals[0]:.3e})")
        j = 0
        while j < d:
            k = j
            while k + 1 < d and abs(evals[k + 1] - evals[j]) <= 1e-12:
                k += 1
            mu = float(np.mean(evals[j : k + 1]))
            if mu > tol:
                for phi in _eigenspace_vectors(evecs[:, j : k + 1]):
                    weights.append(mu)
                    vectors.append(bloch_of_operator(np.outer(phi, phi.conj())))
                    binning.append(i)
            j = k + 1
    if np.max(np.abs(total - np.eye(d))) > tol:
        raise ValidationError("matrices do not sum to the identity")
    return Povm.from_arrays(d, weights, vectors), binning


def povm_from_json(data) -> Povm:
    """Parse ``{"dim", "elements"}`` or ``{"dim", "matrices"}``; matrices are refined if needed."""
    if isinstance(data, str):
        data = json.loads(data)
    if not isinstance(data, dict) or "dim" not in data:
        raise ValidationError("POVM JSON must be an object with a 'dim' field")
    has_el, has_mat = "elements" in data, "matrices" in data
    if has_el == has_mat:
        raise ValidationError("POVM JSON needs exactly one of 'elements' or 'matrices'")
    d = int(data["dim"])
    basis_matrices(d)
    if has_el:
        els = data["elements"]
        weights = [float(e["weight"]) for e in els]
        vectors = [[float(x) for x in e["bloch"]] for e in els]
        return Povm.from_arrays(d, weights, np.array(vectors, dtype=float).reshape(len(els), d * d - 1))
    mats = []
    for m in data["matrices"]:
        arr = np.asarray(m, dtype=float)
        if arr.shape != (d, d, 2):
            raise ValidationError(f"matrix entries must be [re, im] pairs in a {d}x{d} array")
        mats.append(arr[..., 0] + 1j * arr[..., 1])
    try:
        return from_matrices(mats)
    except NeedsRefinementError:
        return rank1_refine(mats)[0]


def povm_to_json(povm: Povm, digits: int = 13) -> dict:
    def r(x: float) -> float:
        return float(f"{x:.{digits}g}")

    return {
        "dim": povm.dim,
        "elements": [{"weight": r(e.weight), "bloch": [r(x) for x in e.bloch]} for e in povm.elements],
    }


def povm_from_vectors(dim: int, pairs: Iterable[tuple[float, Sequence[float]]]) -> Povm:
    """Convenience constructor from ``(weight, bloch)`` pairs."""
    pairs = list(pairs)
    return Povm.from_arrays(dim, [w for w, _ in pairs], [v for _, v in pairs])
