"""Random POVMs and states for property tests."""

import numpy as np
import scipy.linalg
import scipy.stats

from qbound.bloch import bloch_of_operator, state_from_bloch
from qbound.povm import Povm, from_matrices


def unit(v):
    return v / np.linalg.norm(v)


def random_qubit_povm(rng, n_out: int, planar: bool) -> Povm:
    """Rank-1 qubit POVM with ``n_out`` nonzero outcomes.

    The last vector is placed opposite a positive combination of the others,
    which closes ``sum lambda v = 0`` with all weights positive.
    """
    if planar:
        ang = rng.uniform(0, 2 * np.pi, n_out - 1)
        vecs = np.column_stack([np.sin(ang), np.zeros_like(ang), np.cos(ang)])
    else:
        vecs = np.array([unit(rng.normal(size=3)) for _ in range(n_out - 1)])
    w = rng.uniform(0.2, 1.0, n_out - 1)
    tail = w @ vecs
    weights = np.append(w, np.linalg.norm(tail))
    vecs = np.vstack([vecs, -unit(tail)])
    weights *= 2.0 / weights.sum()
    return Povm.from_arrays(2, weights, vecs)


def random_unitary(rng, d: int) -> np.ndarray:
    return scipy.stats.unitary_group.rvs(d, random_state=rng)


def random_rank1_povm(rng, d: int, n_out: int) -> Povm:
    """Generic rank-1 POVM from ``S^(-1/2) phi_b`` with random ``phi_b``."""
    phis = rng.normal(size=(n_out, d)) + 1j * rng.normal(size=(n_out, d))
    frame = sum(np.outer(p, p.conj()) for p in phis)
    root = scipy.linalg.inv(scipy.linalg.sqrtm(frame))
    return from_matrices([np.outer(root @ p, (root @ p).conj()) for p in phis])


def random_state(rng, d: int):
    psi = unit(rng.normal(size=d) + 1j * rng.normal(size=d))
    return state_from_bloch(d, bloch_of_operator(np.outer(psi, psi.conj())))


def qutrit_span_case(rng, n_qubit_out: int):
    """Qutrit POVM whose Bloch vectors lie in the span of three pure states.

    Three real states on span{|0>, |1>} have Bloch vectors spanning a
    3-dimensional subspace. A planar rank-1 qubit POVM on that subspace plus
    ``|2><2|`` is a complete qutrit POVM whose vectors stay inside it. A random
    unitary then moves everything to general position.
    """
    u = random_unitary(rng, 3)

    def embed(t):
        psi = np.array([np.cos(t / 2), np.sin(t / 2), 0.0])
        return u @ psi

    states = []
    for t in rng.uniform(0, 2 * np.pi, 3):
        psi = embed(t)
        states.append(state_from_bloch(3, bloch_of_operator(np.outer(psi, psi.conj()))))
    qubit = random_qubit_povm(rng, n_qubit_out, planar=True)
    mats = []
    for e in qubit.elements:
        t = np.arctan2(e.bloch[0], e.bloch[2])
        psi = embed(t)
        mats.append(e.weight * np.outer(psi, psi.conj()))
    last = u[:, 2]
    mats.append(np.outer(last, last.conj()))
    return from_matrices(mats), states
