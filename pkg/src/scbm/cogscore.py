"""Composite cognition score and MCI screening criteria."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .core import NeuropsychBattery
from .errors import InvariantError, NonFinite


@dataclass(frozen=True)
class DomainScore:
    """One standardized test score assigned to a cognitive domain."""

    domain: str
    test: str
    z: float

    def __post_init__(self):
        if not math.isfinite(self.z):
            raise InvariantError(f"z must be finite, got {self.z}")


# (attribute, reference mean, reference SD) for each battery component.
_COGSTAT_TERMS = (
    ("C", 38.7, 11.1),
    ("L", 26.2, 3.5),
    ("R", 10.08, 3.2),
    ("B", 4.4, 2.4),
    ("R_cs", 31.0, 3.7),
    ("R_rs", 15.7, 5.7),
    ("T", 46.1, 32.6),
)

# Components where a higher raw score means worse performance. The standard
# formula adds them with positive sign regardless; sign_corrected negates them.
_INVERTED = {"B", "T"}


def compute_cogstat(b: NeuropsychBattery, sign_corrected: bool = False) -> float:
    """Composite score centered at 350, one standardized term per test.

    With sign_corrected=True the error-count and timing terms are negated so
    that higher always means better; default follows the standard formula
    literally.
    """
    total = 350.0
    for attr, mean, sd in _COGSTAT_TERMS:
        term = (getattr(b, attr) - mean) / sd
        if sign_corrected and attr in _INVERTED:
            term = -term
        total += term
    if not math.isfinite(total):
        raise NonFinite(f"cogstat overflowed for battery {b}")
    return total


def mci_jak(scores: Iterable[DomainScore]) -> bool:
    """Two tests in a single domain more than 1 SD below the mean (strict)."""
    counts: dict[str, int] = {}
    for s in scores:
        if s.z < -1.0:
            counts[s.domain] = counts.get(s.domain, 0) + 1
            if counts[s.domain] >= 2:
                return True
    return False


def mci_peterson(scores: Iterable[DomainScore]) -> bool:
    """Any single test more than 1.5 SD below the mean (strict)."""
    return any(s.z < -1.5 for s in scores)
