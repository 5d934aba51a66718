"""Exact rational linear algebra: matrices, solving, characteristic polynomials.

Everything here works over arbitrary-precision rationals (``fractions.Fraction``),
so no rounding ever occurs.  These are the numeric primitives the recurrence
algebra is built on: Gaussian elimination for solving the coefficient systems,
Kronecker products and characteristic polynomials for composing companion
matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

# Characteristic polynomials are only ever needed for companion-matrix
# compositions, which stay small; refuse absurd sizes instead of hanging.
MAX_CHAR_POLY_DIM = 64

Rational = Fraction


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class Poly:
    """Polynomial with exact rational coefficients, lowest degree first.

    The zero polynomial is represented by an empty coefficient tuple; any
    other polynomial has a nonzero leading coefficient.
    """

    coeffs: tuple[Fraction, ...]

    @staticmethod
    def of(values: Iterable) -> "Poly":
        cs = [_frac(v) for v in values]
        while cs and cs[-1] == 0:
            cs.pop()
        return Poly(tuple(cs))

    @staticmethod
    def zero() -> "Poly":
        return Poly(())

    @staticmethod
    def x_power(k: int) -> "Poly":
        return Poly.of([0] * k + [1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def __getitem__(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __add__(self, other: "Poly") -> "Poly":
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly.of([self[i] + other[i] for i in range(n)])

    def __sub__(self, other: "Poly") -> "Poly":
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly.of([self[i] - other[i] for i in range(n)])

    def __mul__(self, other: "Poly") -> "Poly":
        if self.is_zero or other.is_zero:
            return Poly.zero()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly.of(out)

    def scale(self, c) -> "Poly":
        c = _frac(c)
        if c == 0:
            return Poly.zero()
        return Poly.of([c * a for a in self.coeffs])

    def monic(self) -> "Poly":
        if self.is_zero:
            return self
        return self.scale(1 / self.coeffs[-1])

    def divmod(self, divisor: "Poly") -> tuple["Poly", "Poly"]:
        if divisor.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = divisor.degree
        lead = divisor.coeffs[-1]
        if len(rem) - 1 < dq:
            return Poly.zero(), Poly.of(rem)
        quot = [Fraction(0)] * (len(rem) - dq)
        for i in range(len(rem) - 1, dq - 1, -1):
            c = rem[i] / lead
            if c != 0:
                quot[i - dq] = c
                for j in range(dq + 1):
                    rem[i - dq + j] -= c * divisor.coeffs[j]
        return Poly.of(quot), Poly.of(rem)

    def __mod__(self, divisor: "Poly") -> "Poly":
        return self.divmod(divisor)[1]

    def __floordiv__(self, divisor: "Poly") -> "Poly":
        return self.divmod(divisor)[0]

    def divides(self, other: "Poly") -> bool:
        return other.divmod(self)[1].is_zero

    def gcd(self, other: "Poly") -> "Poly":
        a, b = self, other
        while not b.is_zero:
            a, b = b, (a % b).monic() if not (a % b).is_zero else Poly.zero()
        return a.monic()

    def lcm(self, other: "Poly") -> "Poly":
        if self.is_zero or other.is_zero:
            return Poly.zero()
        g = self.gcd(other)
        return ((self * other) // g).monic()

    def eval_scalar(self, x) -> Fraction:
        x = _frac(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_matrix(self, m: "ExactMatrix") -> "ExactMatrix":
        """Horner evaluation at a square matrix."""
        if m.rows != m.cols:
            raise ValueError("polynomial evaluation needs a square matrix")
        acc = ExactMatrix.zero(m.rows, m.cols)
        ident = ExactMatrix.identity(m.rows)
        for c in reversed(self.coeffs):
            acc = acc * m + ident.scale(c)
        return acc

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for i in range(self.degree, -1, -1):
            c = self[i]
            if c == 0:
                continue
            mag = abs(c)
            if i == 0:
                term = str(mag)
            elif i == 1:
                term = "x" if mag == 1 else f"{mag}*x"
            else:
                term = f"x^{i}" if mag == 1 else f"{mag}*x^{i}"
            if not parts:
                parts.append(term if c > 0 else "-" + term)
            else:
                parts.append(("+ " if c > 0 else "- ") + term)
        return " ".join(parts)


@dataclass(frozen=True)
class ExactMatrix:
    """Dense matrix of exact rationals, row-major."""

    entries: tuple[tuple[Fraction, ...], ...]

    @staticmethod
    def from_rows(rows: Sequence[Sequence]) -> "ExactMatrix":
        data = tuple(tuple(_frac(v) for v in row) for row in rows)
        if data and any(len(r) != len(data[0]) for r in data):
            raise ValueError("ragged rows")
        return ExactMatrix(data)

    @staticmethod
    def identity(n: int) -> "ExactMatrix":
        return ExactMatrix.from_rows(
            [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        )

    @staticmethod
    def zero(rows: int, cols: int) -> "ExactMatrix":
        return ExactMatrix.from_rows([[0] * cols for _ in range(rows)])

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def __getitem__(self, pos: tuple[int, int]) -> Fraction:
        return self.entries[pos[0]][pos[1]]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i]

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("dimension mismatch in matrix addition")
        return ExactMatrix.from_rows(
            [
                [self.entries[i][j] + other.entries[i][j] for j in range(self.cols)]
                for i in range(self.rows)
            ]
        )

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return self + other.scale(-1)

    def scale(self, c) -> "ExactMatrix":
        c = _frac(c)
        return ExactMatrix.from_rows(
            [[c * v for v in row] for row in self.entries]
        )

    def __mul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch in matrix product")
        ot = list(zip(*other.entries)) if other.entries else []
        return ExactMatrix.from_rows(
            [
                [sum(a * b for a, b in zip(row, col)) for col in ot]
                for row in self.entries
            ]
        )

    def mat_vec(self, v: Sequence) -> tuple[Fraction, ...]:
        if self.cols != len(v):
            raise ValueError("dimension mismatch in matrix-vector product")
        vv = [_frac(x) for x in v]
        return tuple(sum(a * b for a, b in zip(row, vv)) for row in self.entries)

    def trace(self) -> Fraction:
        if self.rows != self.cols:
            raise ValueError("trace of a non-square matrix")
        return sum((self.entries[i][i] for i in range(self.rows)), Fraction(0))

    def inverse(self) -> "ExactMatrix":
        if self.rows != self.cols:
            raise ValueError("inverse of a non-square matrix")
        n = self.rows
        aug = [list(self.entries[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        for col in range(n):
            pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
            if pivot is None:
                raise ValueError("matrix is singular")
            aug[col], aug[pivot] = aug[pivot], aug[col]
            inv = 1 / aug[col][col]
            aug[col] = [v * inv for v in aug[col]]
            for r in range(n):
                if r != col and aug[r][col] != 0:
                    f = aug[r][col]
                    aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
        return ExactMatrix.from_rows([row[n:] for row in aug])

    def pow(self, k: int) -> "ExactMatrix":
        """Integer matrix power; negative powers use the exact inverse."""
        if self.rows != self.cols:
            raise ValueError("power of a non-square matrix")
        base = self if k >= 0 else self.inverse()
        e = abs(k)
        acc = ExactMatrix.identity(self.rows)
        while e:
            if e & 1:
                acc = acc * base
            base = base * base
            e >>= 1
        return acc


def kronecker(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    """Standard Kronecker product; dimensions multiply."""
    rows = []
    for i in range(a.rows):
        for k in range(b.rows):
            rows.append(
                [a.entries[i][j] * b.entries[k][l] for j in range(a.cols) for l in range(b.cols)]
            )
    return ExactMatrix.from_rows(rows)


def solve_linear(a: ExactMatrix, b: Sequence) -> Optional[tuple[Fraction, ...]]:
    """Solve A*x = b exactly.

    Returns one exact solution, or None when the system is inconsistent.
    Under-determined systems get their free variables set to zero, so the
    output is deterministic.  Pivoting picks the entry with the largest
    numerator magnitude, which keeps intermediate fractions small.
    """
    if a.rows != len(b):
        raise ValueError("right-hand side length does not match row count")
    m, n = a.rows, a.cols
    rows = [list(a.entries[i]) + [_frac(b[i])] for i in range(m)]
    pivot_cols: list[int] = []
    r = 0
    for col in range(n):
        if r >= m:
            break
        best = None
        for i in range(r, m):
            if rows[i][col] != 0 and (
                best is None or abs(rows[i][col].numerator) > abs(rows[best][col].numerator)
            ):
                best = i
        if best is None:
            continue
        rows[r], rows[best] = rows[best], rows[r]
        inv = 1 / rows[r][col]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(m):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [u - f * v for u, v in zip(rows[i], rows[r])]
        pivot_cols.append(col)
        r += 1
    for i in range(r, m):
        if rows[i][n] != 0:
            return None
    x = [Fraction(0)] * n
    for i, col in enumerate(pivot_cols):
        x[col] = rows[i][n]
    return tuple(x)


def _char_poly_cofactor(m: ExactMatrix) -> Poly:
    # det(xI - M) by cofactor expansion over polynomial entries.
    n = m.rows
    grid = [
        [
            Poly.of([-m.entries[i][j], 1]) if i == j else Poly.of([-m.entries[i][j]])
            for j in range(n)
        ]
        for i in range(n)
    ]

    def det(rows: list[list[Poly]]) -> Poly:
        k = len(rows)
        if k == 1:
            return rows[0][0]
        total = Poly.zero()
        for j in range(k):
            if rows[0][j].is_zero:
                continue
            minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
            term = rows[0][j] * det(minor)
            total = total + (term if j % 2 == 0 else term.scale(-1))
        return total

    return det(grid)


def _char_poly_faddeev(m: ExactMatrix) -> Poly:
    # Faddeev-LeVerrier iteration, exact over the rationals.
    n = m.rows
    coeffs = [Fraction(1)]  # c_0 for x^n
    mk = ExactMatrix.zero(n, n)
    ck = Fraction(1)
    ident = ExactMatrix.identity(n)
    for k in range(1, n + 1):
        mk = m * (mk + ident.scale(ck))
        ck = -mk.trace() / k
        coeffs.append(ck)
    return Poly.of(list(reversed(coeffs)))


def char_poly(m: ExactMatrix) -> Poly:
    """Exact characteristic polynomial det(xI - M), monic of degree dim(M)."""
    if m.rows != m.cols:
        raise ValueError("characteristic polynomial of a non-square matrix")
    if m.rows == 0:
        return Poly.of([1])
    if m.rows > MAX_CHAR_POLY_DIM:
        raise ValueError(f"matrix dimension {m.rows} exceeds cap {MAX_CHAR_POLY_DIM}")
    if m.rows <= 4:
        return _char_poly_cofactor(m)
    return _char_poly_faddeev(m)
