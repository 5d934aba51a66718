"""Minimal-recurrence discovery from exact term streams.

For ascending candidate orders k, solve the k-unknown linear system built
from the first 2k terms (Hankel rows t[i..i+k-1] against right-hand sides
t[i+k]) and accept the first k whose solution reproduces every remaining
term exactly.  Held-out verification over the guard terms makes numeric
minimality strong evidence; it is still the prover's job to turn a
discovered recurrence into a proof.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .closure import Recurrence
from .linalg import ExactMatrix, solve_linear

DEFAULT_MAX_ORDER = 16
DEFAULT_GUARD = 6


@dataclass(frozen=True)
class TermWindow:
    """A run of consecutive exact terms; origin is the index of terms[0]."""

    terms: tuple[Fraction, ...]
    origin: int = 0

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(Fraction(v) for v in self.terms))

    @staticmethod
    def of(values: Iterable, origin: int = 0) -> "TermWindow":
        return TermWindow(tuple(Fraction(v) for v in values), origin)

    def __len__(self) -> int:
        return len(self.terms)


def is_annihilated(window: TermWindow, recurrence: Recurrence) -> bool:
    """True iff every full window of terms has an exactly-zero residual."""
    k = recurrence.order
    if len(window) < k + 1:
        raise ValueError(f"need at least order+1 = {k + 1} terms")
    return all(
        recurrence.residual(window.terms, i) == 0 for i in range(len(window) - k)
    )


def find_min_recurrence(
    window: TermWindow,
    max_order: int = DEFAULT_MAX_ORDER,
    guard: int = DEFAULT_GUARD,
) -> Optional[Recurrence]:
    """Smallest-order recurrence consistent with the whole window, or None.

    The all-zero window gets the order-1 recurrence with coefficient 0 by
    convention, which keeps downstream code total.
    """
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    needed = 2 * max_order + guard
    if len(window) < needed:
        raise ValueError(
            f"need at least 2*max_order + guard = {needed} terms, got {len(window)}"
        )
    terms = window.terms
    for k in range(1, max_order + 1):
        rows = [[terms[i + j] for j in range(k)] for i in range(k)]
        rhs = [terms[i + k] for i in range(k)]
        solution = solve_linear(ExactMatrix.from_rows(rows), rhs)
        if solution is None:
            continue
        candidate = Recurrence(solution)
        if is_annihilated(window, candidate):
            return candidate
    return None
