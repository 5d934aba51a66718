"""Expression language for Fibonacci/Lucas-type identities.

An expression is a tree over sequence atoms whose indices are integer-linear
forms in named variables (``F[2*n-3]``, ``L[n+r]``, ``(-1)^(n-r)``, rational
constants, seeded generalized Fibonacci atoms ``G(a,b)[...]``), combined with
+, -, *, integer powers, rational scaling and bounded summation.

Evaluation is exact.  Negative indices run the defining recurrence backward,
so reflection laws like F(-m) = (-1)^(m+1) F(m) are checkable facts here, not
axioms.  Sums use the two-sided convention: sum(k=a..b) with b < a-1 means
-(sum(k=b+1..a-1)), the unique extension under which prefix sums still satisfy
S(m+1) - S(m) = body(m+1) for every integer m.  That keeps every derived
recurrence valid on all integer windows and keeps sum identities honest at
negative arguments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Union


class ExprError(ValueError):
    """Invalid construction or usage of an expression."""


class MissingVariableError(ExprError):
    """Evaluation hit a free variable without an assigned value."""


# ---------------------------------------------------------------------------
# Linear index forms


@dataclass(frozen=True)
class LinearIndex:
    """offset + sum(coeff * var) with integer offset and coefficients."""

    offset: int = 0
    coeffs: tuple[tuple[str, int], ...] = ()

    @staticmethod
    def of(offset: int = 0, **coeffs: int) -> "LinearIndex":
        return LinearIndex.from_dict(offset, coeffs)

    @staticmethod
    def from_dict(offset: int, coeffs: Mapping[str, int]) -> "LinearIndex":
        items = tuple(sorted((v, int(c)) for v, c in coeffs.items() if c != 0))
        return LinearIndex(int(offset), items)

    @staticmethod
    def var(name: str) -> "LinearIndex":
        return LinearIndex.of(0, **{name: 1})

    @staticmethod
    def const(offset: int) -> "LinearIndex":
        return LinearIndex(int(offset), ())

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.coeffs)

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def coeff(self, var: str) -> int:
        for v, c in self.coeffs:
            if v == var:
                return c
        return 0

    def eval(self, assignment: Mapping[str, int]) -> int:
        total = self.offset
        for v, c in self.coeffs:
            if v not in assignment:
                raise MissingVariableError(f"no value for index variable '{v}'")
            total += c * int(assignment[v])
        return total

    def shift(self, delta: int) -> "LinearIndex":
        return LinearIndex(self.offset + delta, self.coeffs)

    def drop(self, var: str, value: int) -> "LinearIndex":
        """Substitute var := value."""
        c = self.coeff(var)
        if c == 0:
            return self
        rest = {v: k for v, k in self.coeffs if v != var}
        return LinearIndex.from_dict(self.offset + c * value, rest)

    def apply_mapping(self, mapping: Mapping[str, "LinearIndex"]) -> "LinearIndex":
        """Rewrite each variable through an integer-linear substitution."""
        offset = self.offset
        acc: dict[str, int] = {}
        for v, c in self.coeffs:
            image = mapping.get(v)
            if image is None:
                acc[v] = acc.get(v, 0) + c
            else:
                offset += c * image.offset
                for w, k in image.coeffs:
                    acc[w] = acc.get(w, 0) + c * k
        return LinearIndex.from_dict(offset, acc)

    def __str__(self) -> str:
        parts: list[str] = []
        for v, c in self.coeffs:
            if c == 1:
                term = v
            elif c == -1:
                term = f"-{v}"
            else:
                term = f"{c}*{v}"
            if parts and not term.startswith("-"):
                parts.append(f"+{term}")
            else:
                parts.append(term)
        if self.offset or not parts:
            s = str(self.offset)
            if parts and self.offset > 0:
                s = "+" + s
            parts.append(s)
        return "".join(parts)


# ---------------------------------------------------------------------------
# AST nodes


class Expr:
    """Base class for expression nodes; all nodes are frozen dataclasses."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class Fib(Expr):
    index: LinearIndex


@dataclass(frozen=True)
class Luc(Expr):
    index: LinearIndex


@dataclass(frozen=True)
class GenFib(Expr):
    """Sequence with the Fibonacci recurrence and arbitrary rational seeds."""

    seed0: Fraction
    seed1: Fraction
    index: LinearIndex

    def __post_init__(self):
        if not isinstance(self.seed0, Fraction):
            object.__setattr__(self, "seed0", Fraction(self.seed0))
        if not isinstance(self.seed1, Fraction):
            object.__setattr__(self, "seed1", Fraction(self.seed1))


@dataclass(frozen=True)
class SignPow(Expr):
    """(-1) raised to an integer-linear index."""

    index: LinearIndex


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if self.exponent < 0:
            raise ExprError("power exponent must be nonnegative")


@dataclass(frozen=True)
class Scale(Expr):
    factor: Fraction
    operand: Expr

    def __post_init__(self):
        if not isinstance(self.factor, Fraction):
            object.__setattr__(self, "factor", Fraction(self.factor))


@dataclass(frozen=True)
class Sum(Expr):
    """sum(bound_var = lower .. upper, body); upper is at most one outer
    variable (coefficient 1) plus an integer offset."""

    bound_var: str
    lower: int
    upper: LinearIndex
    body: Expr

    def __post_init__(self):
        vs = self.upper.variables
        if len(vs) > 1 or any(self.upper.coeff(v) != 1 for v in vs):
            raise ExprError("sum upper bound must be one variable plus an offset")
        if self.bound_var in vs:
            raise ExprError("sum bound variable may not appear in its upper bound")


ATOM_TYPES = (Const, Fib, Luc, GenFib, SignPow)


@dataclass(frozen=True)
class Identity:
    """A claimed equality between two expressions over listed variables."""

    name: str
    variables: tuple[str, ...]
    lhs: Expr
    rhs: Expr

    def __post_init__(self):
        missing = (free_vars(self.lhs) | free_vars(self.rhs)) - set(self.variables)
        if missing:
            raise ExprError(
                f"variables {sorted(missing)} occur but are not declared"
            )


# ---------------------------------------------------------------------------
# Structural queries


def free_vars(e: Expr) -> frozenset[str]:
    match e:
        case Const():
            return frozenset()
        case Fib(index) | Luc(index) | SignPow(index):
            return frozenset(index.variables)
        case GenFib(_, _, index):
            return frozenset(index.variables)
        case Add(l, r) | Sub(l, r) | Mul(l, r):
            return free_vars(l) | free_vars(r)
        case Neg(x) | Scale(_, x):
            return free_vars(x)
        case Pow(b, _):
            return free_vars(b)
        case Sum(bv, _, upper, body):
            return (free_vars(body) - {bv}) | frozenset(upper.variables)
    raise TypeError(f"not an expression: {e!r}")


def count_atoms_with(e: Expr, var: str) -> int:
    """Number of atoms whose index involves var (heuristic for variable choice)."""
    match e:
        case Const():
            return 0
        case Fib(index) | Luc(index) | SignPow(index) | GenFib(_, _, index):
            return 1 if index.coeff(var) != 0 else 0
        case Add(l, r) | Sub(l, r) | Mul(l, r):
            return count_atoms_with(l, var) + count_atoms_with(r, var)
        case Neg(x) | Scale(_, x):
            return count_atoms_with(x, var)
        case Pow(b, _):
            return count_atoms_with(b, var)
        case Sum(bv, _, upper, body):
            n = 1 if (var != bv and upper.coeff(var) != 0) else 0
            return n + (count_atoms_with(body, var) if var != bv else 0)
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Exact evaluation

_FIB_CACHE: dict[int, int] = {0: 0, 1: 1}
_LUC_CACHE: dict[int, int] = {0: 2, 1: 1}


def _seq_value(cache: dict[int, int], n: int) -> int:
    if n in cache:
        return cache[n]
    if n > 0:
        top = max(k for k in cache if k >= 0)
        for k in range(top + 1, n + 1):
            cache[k] = cache[k - 1] + cache[k - 2]
    else:
        bottom = min(cache)
        for k in range(bottom - 1, n - 1, -1):
            cache[k] = cache[k + 2] - cache[k + 1]
    return cache[n]


def fib_value(n: int) -> int:
    """n-th Fibonacci number, any integer n (backward recurrence below 0)."""
    return _seq_value(_FIB_CACHE, n)


def luc_value(n: int) -> int:
    """n-th Lucas number, any integer n."""
    return _seq_value(_LUC_CACHE, n)


def genfib_value(seed0: Fraction, seed1: Fraction, n: int) -> Fraction:
    a, b = seed0, seed1  # values at 0 and 1
    if n == 0:
        return a
    if n == 1:
        return b
    if n > 1:
        for _ in range(n - 1):
            a, b = b, a + b
        return b
    for _ in range(-n):
        a, b = b - a, a
    return a


def _sum_range(lower: int, upper: int) -> tuple[range, int]:
    """Index range and overall sign under the two-sided sum convention."""
    if upper >= lower:
        return range(lower, upper + 1), 1
    if upper == lower - 1:
        return range(0, 0), 1
    return range(upper + 1, lower), -1


def eval_expr(e: Expr, assignment: Mapping[str, int] | None = None) -> Fraction:
    """Exact value of e under an integer assignment of its free variables."""
    a = assignment or {}
    match e:
        case Const(value):
            return value
        case Fib(index):
            return Fraction(fib_value(index.eval(a)))
        case Luc(index):
            return Fraction(luc_value(index.eval(a)))
        case GenFib(s0, s1, index):
            return genfib_value(s0, s1, index.eval(a))
        case SignPow(index):
            return Fraction(-1 if index.eval(a) % 2 else 1)
        case Add(l, r):
            return eval_expr(l, a) + eval_expr(r, a)
        case Sub(l, r):
            return eval_expr(l, a) - eval_expr(r, a)
        case Neg(x):
            return -eval_expr(x, a)
        case Mul(l, r):
            return eval_expr(l, a) * eval_expr(r, a)
        case Pow(b, k):
            return eval_expr(b, a) ** k
        case Scale(c, x):
            return c * eval_expr(x, a)
        case Sum(bv, lower, upper, body):
            hi = upper.eval(a)
            rng, sign = _sum_range(lower, hi)
            inner = dict(a)
            total = Fraction(0)
            for k in rng:
                inner[bv] = k
                total += eval_expr(body, inner)
            return sign * total
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Substitution and change of variables


def _unroll_sum(s: Sum, upper_value: int) -> Expr:
    rng, sign = _sum_range(s.lower, upper_value)
    terms = [substitute(s.body, s.bound_var, k) for k in rng]
    if not terms:
        return Const(Fraction(0))
    acc = terms[0]
    for t in terms[1:]:
        acc = Add(acc, t)
    return acc if sign > 0 else Neg(acc)


def substitute(e: Expr, var: str, value: int) -> Expr:
    """Replace a free variable by an integer; sums whose upper bound becomes
    constant unroll into explicit term chains."""
    match e:
        case Const():
            return e
        case Fib(index):
            return Fib(index.drop(var, value))
        case Luc(index):
            return Luc(index.drop(var, value))
        case GenFib(s0, s1, index):
            return GenFib(s0, s1, index.drop(var, value))
        case SignPow(index):
            return SignPow(index.drop(var, value))
        case Add(l, r):
            return Add(substitute(l, var, value), substitute(r, var, value))
        case Sub(l, r):
            return Sub(substitute(l, var, value), substitute(r, var, value))
        case Neg(x):
            return Neg(substitute(x, var, value))
        case Mul(l, r):
            return Mul(substitute(l, var, value), substitute(r, var, value))
        case Pow(b, k):
            return Pow(substitute(b, var, value), k)
        case Scale(c, x):
            return Scale(c, substitute(x, var, value))
        case Sum(bv, lower, upper, body):
            if var == bv:
                raise ExprError("cannot substitute a sum's bound variable")
            new_upper = upper.drop(var, value)
            new_body = substitute(body, var, value)
            if new_upper.is_constant:
                return _unroll_sum(Sum(bv, lower, upper, new_body), new_upper.offset)
            return Sum(bv, lower, new_upper, new_body)
    raise TypeError(f"not an expression: {e!r}")


def apply_index_mapping(e: Expr, mapping: Mapping[str, LinearIndex]) -> Expr:
    """Rewrite every index through var -> linear-form substitutions."""
    match e:
        case Const():
            return e
        case Fib(index):
            return Fib(index.apply_mapping(mapping))
        case Luc(index):
            return Luc(index.apply_mapping(mapping))
        case GenFib(s0, s1, index):
            return GenFib(s0, s1, index.apply_mapping(mapping))
        case SignPow(index):
            return SignPow(index.apply_mapping(mapping))
        case Add(l, r):
            return Add(apply_index_mapping(l, mapping), apply_index_mapping(r, mapping))
        case Sub(l, r):
            return Sub(apply_index_mapping(l, mapping), apply_index_mapping(r, mapping))
        case Neg(x):
            return Neg(apply_index_mapping(x, mapping))
        case Mul(l, r):
            return Mul(apply_index_mapping(l, mapping), apply_index_mapping(r, mapping))
        case Pow(b, k):
            return Pow(apply_index_mapping(b, mapping), k)
        case Scale(c, x):
            return Scale(c, apply_index_mapping(x, mapping))
        case Sum(bv, lower, upper, body):
            inner = {v: ix for v, ix in mapping.items() if v != bv}
            for v, ix in inner.items():
                if bv in ix.variables:
                    raise ExprError(
                        f"mapping for '{v}' would capture bound variable '{bv}'"
                    )
            return Sum(bv, lower, upper.apply_mapping(inner), apply_index_mapping(body, inner))
    raise TypeError(f"not an expression: {e!r}")


def shift_var(e: Expr, var: str, delta: int) -> Expr:
    """Substitute var := var + delta."""
    if delta == 0:
        return e
    return apply_index_mapping(e, {var: LinearIndex.of(delta, **{var: 1})})


def change_vars(
    identity: Identity,
    mapping: Mapping[str, LinearIndex],
    variables: Optional[tuple[str, ...]] = None,
    name: Optional[str] = None,
) -> Identity:
    """Rewrite an identity through an affine unimodular change of variables.

    Each listed (old) variable maps to an integer-linear form in the new
    variables; unmentioned variables map to themselves.  The linear part must
    be square and have determinant +-1 so the rewrite is invertible over the
    integers and the new identity is point-wise equivalent to the old one.
    """
    from .linalg import ExactMatrix, solve_linear  # local import to avoid cycles

    full: dict[str, LinearIndex] = {}
    for v in identity.variables:
        full[v] = mapping.get(v, LinearIndex.var(v))
    extra = set(mapping) - set(identity.variables)
    if extra:
        raise ExprError(f"mapping mentions unknown variables {sorted(extra)}")

    if variables is None:
        new_vars: list[str] = []
        for v in identity.variables:
            for w in full[v].variables:
                if w not in new_vars:
                    new_vars.append(w)
        variables = tuple(new_vars)
    old = list(identity.variables)
    if len(variables) != len(old):
        raise ExprError("change of variables must be square (same variable count)")
    mat = ExactMatrix.from_rows([[full[v].coeff(w) for w in variables] for v in old])
    det = _int_det(mat)
    if det not in (1, -1):
        raise ExprError(f"change of variables is not unimodular (det = {det})")

    return Identity(
        name if name is not None else identity.name,
        variables,
        apply_index_mapping(identity.lhs, full),
        apply_index_mapping(identity.rhs, full),
    )


def _int_det(m) -> int:
    from .linalg import char_poly

    # det(M) = (-1)^n * charpoly(M)(0)
    p = char_poly(m)
    val = p.eval_scalar(0)
    sign = -1 if m.rows % 2 else 1
    return int(sign * val)


# ---------------------------------------------------------------------------
# Printing (canonical; reparsing a printed tree reproduces it structurally)

_PREC_ADD, _PREC_MUL, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4


def _format(e: Expr, context: int) -> str:
    match e:
        case Const(value):
            s = str(value)
            return s
        case Fib(index):
            return f"F[{index}]"
        case Luc(index):
            return f"L[{index}]"
        case GenFib(s0, s1, index):
            return f"G({s0},{s1})[{index}]"
        case SignPow(index):
            return f"(-1)^({index})"
        case Add(l, r):
            s = f"{_format(l, _PREC_ADD)} + {_format(r, _PREC_ADD + 1)}"
            return f"({s})" if context > _PREC_ADD else s
        case Sub(l, r):
            s = f"{_format(l, _PREC_ADD)} - {_format(r, _PREC_ADD + 1)}"
            return f"({s})" if context > _PREC_ADD else s
        case Neg(x):
            return _format(Mul(Const(Fraction(-1)), x), context)
        case Scale(c, x):
            return _format(Mul(Const(c), x), context)
        case Mul(l, r):
            s = f"{_format(l, _PREC_MUL)}*{_format(r, _PREC_MUL + 1)}"
            return f"({s})" if context > _PREC_MUL else s
        case Pow(b, k):
            base = _format(b, _PREC_ATOM)
            if isinstance(b, Const) and b.value < 0:
                base = f"({base})"
            s = f"{base}^{k}"
            return f"({s})" if context > _PREC_POW else s
        case Sum(bv, lower, upper, body):
            return f"sum({bv}={lower}..{upper}, {_format(body, _PREC_ADD)})"
    raise TypeError(f"not an expression: {e!r}")


def format_expr(e: Expr) -> str:
    return _format(e, _PREC_ADD)


def format_identity(identity: Identity) -> str:
    return f"{format_expr(identity.lhs)} = {format_expr(identity.rhs)}"
