"""Generalized Bloch-sphere algebra for qudits.

A qudit state in dimension ``d`` is written as

    rho = (I + c_d * n . sigma) / d,    c_d = sqrt(d (d - 1) / 2),

where ``sigma`` collects the ``d**2 - 1`` generalized Gell-Mann matrices,
normalized so that ``trace(sigma_i sigma_j) = 2 delta_ij``.

Basis ordering
--------------
For a fixed ``d`` the matrices are ordered as

1. symmetric off-diagonal ``E_jk + E_kj`` for pairs ``j < k`` in row-major order,
2. antisymmetric off-diagonal ``-i E_jk + i E_kj`` in the same pair order,
3. diagonal ``sqrt(2 / (m (m + 1))) (sum_{j<m} E_jj - m E_mm)`` for
   ``m = 1, ..., d - 1``.

For ``d = 2`` this is ``(X, Y, Z)``. For ``d = 3`` the last two matrices are the
usual ``lambda_3`` and ``lambda_8``, but the off-diagonal ones are grouped by
symmetry rather than interleaved, so index positions differ from the textbook
Gell-Mann numbering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, InvalidDimensionError, NotAStateError, UndefinedOperationError, ValidationError

PURITY_TOL = 1e-9
POSITIVITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class BlochBasis:
    """Gell-Mann basis of one dimension together with its structure constants ``d_ijk``."""

    dim: int
    matrices: np.ndarray  # (d**2 - 1, d, d) complex
    c_d: float
    d_tensor: np.ndarray  # (d**2 - 1,) * 3 real

    @property
    def size(self) -> int:
        return self.dim * self.dim - 1


def _gell_mann(d: int) -> np.ndarray:
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    mats = []
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = m[k, j] = 1.0
        mats.append(m)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = -1j
        m[k, j] = 1j
        mats.append(m)
    for rank in range(1, d):
        diag = np.zeros(d)
        diag[:rank] = 1.0
        diag[rank] = -rank
        mats.append(np.diag(diag * math.sqrt(2.0 / (rank * (rank + 1)))).astype(complex))
    return np.array(mats)


@lru_cache(maxsize=None)
def basis_matrices(d: int) -> BlochBasis:
    """Return the cached generalized Gell-Mann basis for dimension ``d``.

    The structure constants are evaluated from the matrices themselves as
    ``d_ijk = trace({sigma_i, sigma_j} sigma_k) / 4``.
    """
    if int(d) != d or d < 2:
        raise InvalidDimensionError(f"dimension must be an integer >= 2, got {d!r}")
    d = int(d)
    mats = _gell_mann(d)
    anti = np.einsum("iab,jbc->ijac", mats, mats)
    anti = anti + anti.transpose(1, 0, 2, 3)
    d_tensor = np.einsum("ijab,kba->ijk", anti, mats).real / 4.0
    d_tensor[np.abs(d_tensor) < 1e-14] = 0.0
    mats.setflags(write=False)
    d_tensor.setflags(write=False)
    return BlochBasis(dim=d, matrices=mats, c_d=math.sqrt(d * (d - 1) / 2.0), d_tensor=d_tensor)


def dim_from_bloch_length(n: int) -> int:
    d = int(round(math.sqrt(n + 1)))
    if d * d - 1 != n or d < 2:
        raise InvalidDimensionError(f"no dimension d with d**2 - 1 == {n}")
    return d


def operator_from_bloch(d: int, n, weight: float = 1.0) -> np.ndarray:
    """``weight * (I + c_d n . sigma) / d`` as a dense matrix."""
    basis = basis_matrices(d)
    n = np.asarray(n, dtype=float)
    if n.shape != (basis.size,):
        raise ValidationError(f"Bloch vector for d={d} must have length {basis.size}, got shape {n.shape}")
    op = np.eye(d, dtype=complex) + basis.c_d * np.tensordot(n, basis.matrices, axes=1)
    return weight * op / d


def bloch_of_operator(matrix) -> np.ndarray:
    """Bloch coordinates ``(d / (2 c_d)) trace(rho sigma_i)`` of a unit-trace operator."""
    matrix = np.asarray(matrix, dtype=complex)
    d = matrix.shape[0]
    basis = basis_matrices(d)
    traces = np.einsum("ab,iba->i", matrix, basis.matrices).real
    return d / (2.0 * basis.c_d) * traces


def star_product(u, v, basis: BlochBasis) -> np.ndarray:
    """``(u * v)_i = c_d / (d - 2) * sum_jk d_ijk u_j v_k``; undefined for qubits."""
    if basis.dim == 2:
        raise UndefinedOperationError("star product is undefined for d = 2 (division by d - 2)")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (basis.size,) or v.shape != (basis.size,):
        raise ValidationError(f"vectors must have length {basis.size}")
    return basis.c_d / (basis.dim - 2) * np.einsum("ijk,j,k->i", basis.d_tensor, u, v)


def is_pure_bloch(d: int, n, tol: float = PURITY_TOL) -> bool:
    """Unit norm, plus ``n * n == n`` when ``d >= 3``."""
    n = np.asarray(n, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > tol:
        return False
    if d == 2:
        return True
    return bool(np.max(np.abs(star_product(n, n, basis_matrices(d)) - n)) <= tol)


@dataclass(frozen=True, eq=False)
class QuditState:
    """A qudit state stored by its generalized Bloch vector."""

    dim: int
    bloch: np.ndarray = field(repr=False)
    pure: bool = False

    def matrix(self) -> np.ndarray:
        return operator_from_bloch(self.dim, self.bloch)

    def overlap(self, other: "QuditState") -> float:
        """``|<psi|phi>|`` for pure states, computed as ``sqrt(trace(rho sigma))``."""
        f = np.trace(self.matrix() @ other.matrix()).real
        return math.sqrt(max(f, 0.0))


def state_from_bloch(d: int, n, *, tol: float = POSITIVITY_TOL) -> QuditState:
    """Build a state from a Bloch vector, rejecting vectors outside state space."""
    basis = basis_matrices(d)
    n = np.array(n, dtype=float)
    if n.shape != (basis.size,):
        raise ValidationError(f"Bloch vector for d={d} must have length {basis.size}, got shape {n.shape}")
    rho = operator_from_bloch(d, n)
    lowest = np.linalg.eigvalsh(rho)[0]
    if lowest < -tol:
        raise NotAStateError(f"reconstructed matrix has eigenvalue {lowest:.3e} < 0")
    n.setflags(write=False)
    return QuditState(dim=d, bloch=n, pure=is_pure_bloch(d, n))


def bloch_from_state(matrix, *, tol: float = POSITIVITY_TOL) -> QuditState:
    """Inverse of :func:`state_from_bloch` for a Hermitian, unit-trace matrix."""
    rho = np.asarray(matrix, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError("state must be a square matrix")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValidationError("state matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ValidationError(f"state trace is {np.trace(rho).real!r}, expected 1")
    return state_from_bloch(rho.shape[0], bloch_of_operator(rho), tol=tol)


def bloch_angle_from_overlap(delta: float) -> float:
    """Half-angle between two pure qubit Bloch vectors whose states overlap by ``delta``.

    The states ``(+-sin t, 0, cos t)`` have ``|<psi_0|psi_1>|**2 = (1 + n_0 . n_1) / 2 = cos(t)**2``.
    """
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"overlap must lie in [0, 1], got {delta!r}")
    return math.acos(delta)
