"""Recurrence algebra: derive a linear recurrence annihilating any expression.

Every atom of the expression language satisfies a fixed-order constant
recurrence along each variable, with coefficients that depend only on the
variable's coefficient in the atom's index, never on offsets or the other
variables.  Sums of annihilated sequences are annihilated by the lcm of the
characteristic polynomials, point-wise products by the characteristic
polynomial of the Kronecker product of companion matrices, and prefix sums by
the characteristic polynomial times (x - 1).  Composing these rules gives, for
every supported expression and every variable, a recurrence that holds for all
integer assignments of the remaining variables and on every integer window.

Composed recurrences are deliberately not minimal; minimization is a separate,
symbolically-guarded step in the prover.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .expr import (
    Add,
    Const,
    Expr,
    Fib,
    GenFib,
    Luc,
    Mul,
    Neg,
    Pow,
    Scale,
    SignPow,
    Sub,
    Sum,
    free_vars,
)
from .linalg import ExactMatrix, Poly, char_poly, kronecker


class UnsupportedExpressionError(ValueError):
    """The expression falls outside the closure rules for this variable."""


@dataclass(frozen=True)
class Recurrence:
    """x(n+k) = a0*x(n) + a1*x(n+1) + ... + a_{k-1}*x(n+k-1).

    coeffs holds (a0, ..., a_{k-1}); the order k is at least 1.  The
    recurrence extends backward exactly when a0 != 0.
    """

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("recurrence order must be at least 1")
        object.__setattr__(
            self, "coeffs", tuple(Fraction(c) for c in self.coeffs)
        )

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @property
    def backward_extensible(self) -> bool:
        return self.coeffs[0] != 0

    def char_poly(self) -> Poly:
        return Poly.of([-c for c in self.coeffs] + [Fraction(1)])

    @staticmethod
    def from_char_poly(p: Poly) -> "Recurrence":
        if p.is_zero or not p.is_monic or p.degree < 1:
            raise ValueError("characteristic polynomial must be monic of degree >= 1")
        return Recurrence(tuple(-c for c in p.coeffs[:-1]))

    def companion_matrix(self) -> ExactMatrix:
        k = self.order
        rows = [[Fraction(int(j == i + 1)) for j in range(k)] for i in range(k - 1)]
        rows.append(list(self.coeffs))
        return ExactMatrix.from_rows(rows)

    def step(self, window: Sequence[Fraction]) -> Fraction:
        """Next term from the previous `order` terms."""
        return sum(c * v for c, v in zip(self.coeffs, window))

    def residual(self, terms: Sequence[Fraction], at: int) -> Fraction:
        """terms[at+k] - sum(a_i * terms[at+i]); zero when the window fits."""
        k = self.order
        return terms[at + k] - sum(self.coeffs[i] * terms[at + i] for i in range(k))

    def descending_coeffs(self) -> tuple[Fraction, ...]:
        """Coefficients in (a_{k-1}, ..., a0) display order."""
        return tuple(reversed(self.coeffs))

    def __str__(self) -> str:
        k = self.order
        parts = []
        for i in range(k - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mag = abs(c)
            shift = f"x(n+{i})" if i else "x(n)"
            term = shift if mag == 1 else f"{mag}*{shift}"
            if not parts:
                parts.append(term if c > 0 else f"-{term}")
            else:
                parts.append(("+ " if c > 0 else "- ") + term)
        rhs = " ".join(parts) if parts else "0"
        return f"x(n+{k}) = {rhs}"


CONSTANT_RECURRENCE = Recurrence((Fraction(1),))

_FIB_COMPANION = ExactMatrix.from_rows([[0, 1], [1, 1]])


@dataclass(frozen=True)
class CFiniteSeq:
    """A concrete sequence: recurrence plus its first `order` terms."""

    recurrence: Recurrence
    initials: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.initials) != self.recurrence.order:
            raise ValueError("need exactly `order` initial terms")
        object.__setattr__(
            self, "initials", tuple(Fraction(v) for v in self.initials)
        )

    def term(self, n: int) -> Fraction:
        return seq_term(self, n)


def seq_term(s: CFiniteSeq, n: int) -> Fraction:
    """Exact n-th term; n < 0 needs a backward-extensible recurrence."""
    k = s.recurrence.order
    if 0 <= n < k:
        return s.initials[n]
    window = list(s.initials)
    if n >= k:
        for _ in range(n - k + 1):
            window.append(s.recurrence.step(window[-k:]))
        return window[-1]
    a0 = s.recurrence.coeffs[0]
    if a0 == 0:
        raise ValueError("recurrence with a0 = 0 cannot run backward")
    for _ in range(-n):
        prev = (window[k - 1] - sum(
            s.recurrence.coeffs[i] * window[i - 1] for i in range(1, k)
        )) / a0
        window = [prev] + window[:-1]
    return window[0]


def atom_recurrence(atom: Expr, var: str) -> Recurrence:
    """Order-independent annihilator of a single atom along `var`.

    For Fibonacci-type atoms with index coefficient alpha the recurrence is
    the characteristic polynomial of the alpha-th power of the order-2
    companion matrix, so the order stays 2 for every decimation.
    """
    match atom:
        case Const():
            return CONSTANT_RECURRENCE
        case SignPow(index):
            alpha = index.coeff(var)
            return Recurrence((Fraction(-1 if alpha % 2 else 1),))
        case Fib(index) | Luc(index) | GenFib(_, _, index):
            alpha = index.coeff(var)
            if alpha == 0:
                return CONSTANT_RECURRENCE
            return Recurrence.from_char_poly(char_poly(_FIB_COMPANION.pow(alpha)))
    raise TypeError(f"not an atom: {atom!r}")


def rec_add(r1: Recurrence, r2: Recurrence) -> Recurrence:
    """Annihilates every sum of sequences annihilated by r1 and r2."""
    return Recurrence.from_char_poly(r1.char_poly().lcm(r2.char_poly()))


def rec_mul(r1: Recurrence, r2: Recurrence) -> Recurrence:
    """Annihilates every point-wise product, via the Kronecker product of
    companion matrices; order multiplies."""
    return Recurrence.from_char_poly(
        char_poly(kronecker(r1.companion_matrix(), r2.companion_matrix()))
    )


def rec_partial_sum(r: Recurrence) -> Recurrence:
    """Annihilates every prefix sum of a sequence annihilated by r."""
    return Recurrence.from_char_poly(r.char_poly() * Poly.of([-1, 1]))


def recurrence_of(e: Expr, var: str) -> Recurrence:
    """Recurrence in `var` annihilating e for every assignment of the rest."""
    if var not in free_vars(e):
        return CONSTANT_RECURRENCE
    match e:
        case Const() | Fib() | Luc() | GenFib() | SignPow():
            return atom_recurrence(e, var)
        case Add(l, r) | Sub(l, r):
            return rec_add(recurrence_of(l, var), recurrence_of(r, var))
        case Neg(x) | Scale(_, x):
            return recurrence_of(x, var)
        case Mul(l, r):
            return rec_mul(recurrence_of(l, var), recurrence_of(r, var))
        case Pow(b, k):
            if k == 0:
                return CONSTANT_RECURRENCE
            base = recurrence_of(b, var)
            acc = base
            for _ in range(k - 1):
                acc = rec_mul(acc, base)
            return acc
        case Sum(bv, _, upper, body):
            if upper.coeff(var) != 0:
                if var in free_vars(body):
                    raise UnsupportedExpressionError(
                        f"sum over '{bv}' has upper bound in '{var}' while its "
                        f"body also references '{var}'"
                    )
                return rec_partial_sum(recurrence_of(body, bv))
            return recurrence_of(body, var)
    raise TypeError(f"not an expression: {e!r}")
