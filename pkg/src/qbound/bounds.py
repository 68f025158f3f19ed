"""Closed-form upper bounds on certifiable randomness.

Prepare-and-measure with ``k`` preparations and ``l`` outcomes yields at most
``log2(min(l, k + 1))`` bits per round, whatever the number ``m`` of
measurement settings. In a Bell scenario where Alice has ``nx`` inputs and
``na`` outputs, Bob's measurement with ``nb`` outcomes yields at most
``log2(min(nb, nx * na + 1))`` bits.

The integer minimum is taken before the logarithm, so results at powers of
two are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class PMScenario:
    k: int  # preparations x
    m: int  # measurement settings y
    l: int  # outcomes b

    def __post_init__(self):
        for name in ("k", "m", "l"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise DomainError(f"{name} must be a positive integer, got {v!r}")


@dataclass(frozen=True)
class BellScenario:
    nx: int
    na: int
    nb: int

    def __post_init__(self):
        for name in ("nx", "na", "nb"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise DomainError(f"{name} must be a positive integer, got {v!r}")


def pm_bound(s: PMScenario) -> float:
    """``log2(min(l, k + 1))`` bits."""
    return math.log2(min(int(s.l), int(s.k) + 1))


def bell_bound(s: BellScenario) -> float:
    """``log2(min(nb, nx * na + 1))`` bits."""
    return math.log2(min(int(s.nb), int(s.nx) * int(s.na) + 1))


def min_entropy(p_guess: float) -> float:
    """``-log2(p_guess)`` for ``0 < p_guess <= 1``."""
    if not 0.0 < p_guess <= 1.0:
        raise DomainError(f"guessing probability must lie in (0, 1], got {p_guess!r}")
    return 0.0 - math.log2(p_guess)
