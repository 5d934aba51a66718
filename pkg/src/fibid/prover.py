"""Identity prover, refuter, certificate checker and identity constructor.

Proof method: subtract the two sides, derive a linear recurrence annihilating
the difference along one variable, and check order-many base cases.  Base
cases that still contain variables are identities themselves and are proved
recursively, giving a nested certificate (one level per variable).  A valid
certificate plus the closure guarantees forces the difference to vanish
identically: a sequence satisfying an order-k recurrence with k leading zeros
is zero everywhere the recurrence reaches, and backward-extensible recurrences
(a0 != 0) reach every integer.

Refutations always carry a concrete counterexample that re-evaluates to
unequal exact values; certificates are machine-checkable by re-evaluation
alone, with no recurrence re-derivation.
"""

from __future__ import annotations

import hashlib
import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Optional, Sequence, Union

from .closure import (
    Recurrence,
    UnsupportedExpressionError,
    rec_add,
    recurrence_of,
)
from .discovery import TermWindow, find_min_recurrence
from .expr import (
    Add,
    Const,
    Expr,
    ExprError,
    Identity,
    Mul,
    Neg,
    Pow,
    Scale,
    Sub,
    Sum,
    eval_expr,
    format_expr,
    format_identity,
    free_vars,
    count_atoms_with,
    shift_var,
    substitute,
)

WITNESS_TERMS_DEFAULT = 8
REFUTATION_NORM_CAP = 50
CHECK_GUARD_DEFAULT = 6
_SPECIALIZATION_VALUES = (2, 3, 5, 7, 11, 13, 17, 19)

COVERAGE_ALL = "all-integers"
COVERAGE_NONNEGATIVE = "nonnegative"


@dataclass(frozen=True)
class BaseCaseZero:
    """Variable-free base case shown to evaluate to exactly zero."""

    j: int
    value: Fraction


@dataclass(frozen=True)
class BaseCaseNested:
    """Base case that is itself an identity in the remaining variables."""

    j: int
    certificate: "Certificate"


BaseCase = Union[BaseCaseZero, BaseCaseNested]


@dataclass(frozen=True)
class Certificate:
    identity: Identity
    variable: str
    recurrence: Recurrence
    coverage: str
    base_cases: tuple[BaseCase, ...]
    witness_terms: int


@dataclass(frozen=True)
class Counterexample:
    assignment: tuple[tuple[str, int], ...]
    lhs_value: Fraction
    rhs_value: Fraction

    @property
    def as_dict(self) -> dict[str, int]:
        return dict(self.assignment)


@dataclass(frozen=True)
class Proved:
    certificate: Certificate


@dataclass(frozen=True)
class Refuted:
    counterexample: Counterexample


@dataclass(frozen=True)
class Unsupported:
    reason: str


Verdict = Union[Proved, Refuted, Unsupported]


def _stable_rng(*parts: str) -> random.Random:
    digest = hashlib.sha256("|".join(parts).encode()).hexdigest()
    return random.Random(int(digest[:16], 16))


# ---------------------------------------------------------------------------
# Refutation search


class _RefutationFailed(Exception):
    def __init__(self, partial: dict[str, int]):
        self.partial = partial


def _shell(center: dict[str, int], variables: Sequence[str], radius: int):
    if not variables:
        if radius == 0:
            yield dict(center)
        return
    ranges = [range(center[v] - radius, center[v] + radius + 1) for v in variables]
    for combo in itertools.product(*ranges):
        if radius == 0 or max(abs(c - center[v]) for c, v in zip(combo, variables)) == radius:
            yield dict(zip(variables, combo))


def _search_counterexample(
    identity: Identity, start: dict[str, int]
) -> Optional[Counterexample]:
    """Scan outward in max-norm from the failing assignment (cap: norm 50)."""
    variables = list(identity.variables)
    center = {v: start.get(v, 0) for v in variables}
    for radius in range(REFUTATION_NORM_CAP + 1):
        for assignment in _shell(center, variables, radius):
            lv = eval_expr(identity.lhs, assignment)
            rv = eval_expr(identity.rhs, assignment)
            if lv != rv:
                return Counterexample(
                    tuple(sorted(assignment.items())), lv, rv
                )
    return None


# ---------------------------------------------------------------------------
# Minimization (symbolic-safe, per additive term)


def _flatten_addends(e: Expr) -> list[Expr]:
    match e:
        case Add(l, r) | Sub(l, r):
            return _flatten_addends(l) + _flatten_addends(r)
        case Neg(x) | Scale(_, x):
            return _flatten_addends(x)
    return [e]


def _numeric_candidate(
    addend: Expr, var: str, remaining: Sequence[str], max_order: int
) -> Optional[Recurrence]:
    sigma = {w: _SPECIALIZATION_VALUES[i % len(_SPECIALIZATION_VALUES)]
             for i, w in enumerate(remaining)}
    guard = 6
    count = 2 * max_order + guard
    terms = [eval_expr(addend, {**sigma, var: t}) for t in range(count)]
    return find_min_recurrence(TermWindow.of(terms), max_order, guard)


def _residual_expr(addend: Expr, var: str, candidate: Recurrence) -> Expr:
    """addend(var + k') - sum(q_i * addend(var + i)): annihilated by any
    recurrence that annihilates the addend itself."""
    acc: Expr = shift_var(addend, var, candidate.order)
    for i, c in enumerate(candidate.coeffs):
        if c != 0:
            acc = Sub(acc, Scale(c, shift_var(addend, var, i)))
    return acc


def _candidate_is_safe(
    addend: Expr,
    var: str,
    remaining: Sequence[str],
    candidate: Recurrence,
    composed: Recurrence,
    witness_terms: int,
) -> bool:
    """Accept the smaller recurrence only after proving its residual has
    `composed.order` consecutive zero terms; the residual satisfies the
    composed recurrence, so those zeros force it to vanish identically."""
    res = _residual_expr(addend, var, candidate)
    for j in range(composed.order):
        res_j = substitute(res, var, j)
        rest = free_vars(res_j)
        if not rest:
            if eval_expr(res_j) != 0:
                return False
        else:
            sub_vars = tuple(w for w in remaining if w in rest) or tuple(sorted(rest))
            sub = Identity("", sub_vars, res_j, Const(Fraction(0)))
            if not isinstance(_prove(sub, False, witness_terms), Proved):
                return False
    return True


def _minimized_recurrence(
    diff: Expr, var: str, remaining: Sequence[str], witness_terms: int
) -> Recurrence:
    total: Optional[Recurrence] = None
    for addend in _flatten_addends(diff):
        composed = recurrence_of(addend, var)
        chosen = composed
        if composed.order > 1:
            candidate = _numeric_candidate(addend, var, remaining, composed.order)
            if (
                candidate is not None
                and candidate.order < composed.order
                and candidate.backward_extensible
                and _candidate_is_safe(
                    addend, var, remaining, candidate, composed, witness_terms
                )
            ):
                chosen = candidate
        total = chosen if total is None else rec_add(total, chosen)
    assert total is not None
    return total


# ---------------------------------------------------------------------------
# The prover


def _fresh_variable(identity: Identity) -> str:
    for name in ("n", "m", "j", "t"):
        if name not in identity.variables:
            return name
    return "n0"


def _choose_variable(diff: Expr, identity: Identity) -> tuple[str, Recurrence]:
    """Last declared variable first; fall back to the variable occurring in
    the most atoms when the preferred choice is unsupported."""
    if not identity.variables:
        return _fresh_variable(identity), recurrence_of(diff, "n")
    ordered = [identity.variables[-1]]
    rest = sorted(
        identity.variables[:-1],
        key=lambda w: count_atoms_with(diff, w),
        reverse=True,
    )
    ordered.extend(rest)
    last_error: Optional[UnsupportedExpressionError] = None
    for v in ordered:
        try:
            return v, recurrence_of(diff, v)
        except UnsupportedExpressionError as exc:
            last_error = exc
    raise last_error if last_error else UnsupportedExpressionError("no variable usable")


def _prove(identity: Identity, minimize: bool, witness_terms: int) -> Verdict:
    diff = Sub(identity.lhs, identity.rhs)
    variable, recurrence = _choose_variable(diff, identity)
    remaining = tuple(w for w in identity.variables if w != variable)

    if minimize:
        recurrence = _minimized_recurrence(diff, variable, remaining, witness_terms)

    base_cases: list[BaseCase] = []
    coverage_all = recurrence.backward_extensible
    for j in range(recurrence.order):
        lhs_j = substitute(identity.lhs, variable, j)
        rhs_j = substitute(identity.rhs, variable, j)
        occurring = free_vars(lhs_j) | free_vars(rhs_j)
        if not occurring:
            value = eval_expr(lhs_j) - eval_expr(rhs_j)
            if value != 0:
                cex = _search_counterexample(identity, {variable: j})
                if cex is not None:
                    return Refuted(cex)
                return Unsupported(
                    f"base case {variable}={j} is nonzero ({value}) but no "
                    f"concrete counterexample found within norm {REFUTATION_NORM_CAP}"
                )
            base_cases.append(BaseCaseZero(j, value))
        else:
            sub_name = f"{identity.name}[{variable}={j}]" if identity.name else f"[{variable}={j}]"
            sub_identity = Identity(sub_name, remaining, lhs_j, rhs_j)
            verdict = _prove(sub_identity, minimize, witness_terms)
            if isinstance(verdict, Unsupported):
                return verdict
            if isinstance(verdict, Refuted):
                merged = dict(verdict.counterexample.assignment)
                merged[variable] = j
                cex = _search_counterexample(identity, merged)
                if cex is not None:
                    return Refuted(cex)
                return Unsupported(
                    f"base case {variable}={j} was refuted but no concrete "
                    f"counterexample found within norm {REFUTATION_NORM_CAP}"
                )
            base_cases.append(BaseCaseNested(j, verdict.certificate))
            if verdict.certificate.coverage != COVERAGE_ALL:
                coverage_all = False

    coverage = COVERAGE_ALL if coverage_all else COVERAGE_NONNEGATIVE
    rng = _stable_rng("witness", format_identity(identity), str(witness_terms))
    low = -8 if coverage == COVERAGE_ALL else 0
    for _ in range(witness_terms):
        assignment = {variable: rng.randint(recurrence.order, recurrence.order + 20)}
        for w in remaining:
            assignment[w] = rng.randint(low, 8)
        if eval_expr(identity.lhs, assignment) != eval_expr(identity.rhs, assignment):
            cex = _search_counterexample(identity, assignment)
            if cex is not None:
                return Refuted(cex)
            return Unsupported("witness check failed without locatable counterexample")

    return Proved(
        Certificate(
            identity=identity,
            variable=variable,
            recurrence=recurrence,
            coverage=coverage,
            base_cases=tuple(base_cases),
            witness_terms=witness_terms,
        )
    )


def prove(
    identity: Identity,
    minimize: bool = False,
    witness_terms: int = WITNESS_TERMS_DEFAULT,
) -> Verdict:
    """Prove or refute an identity; Unsupported only for expressions outside
    the closure rules (e.g. a sum whose body references its own limit)."""
    try:
        return _prove(identity, minimize, witness_terms)
    except (UnsupportedExpressionError, ExprError) as exc:
        return Unsupported(str(exc))


# ---------------------------------------------------------------------------
# Independent certificate checker


def check_certificate(
    certificate: Certificate, guard: int = CHECK_GUARD_DEFAULT, samples: int = 3
) -> bool:
    """Re-derives nothing: re-evaluates base cases and samples annihilation
    residuals of the stated recurrence on order+guard windows per level."""
    try:
        _check(certificate, guard, samples)
        return True
    except _CheckFailure:
        return False


class _CheckFailure(Exception):
    pass


def _fail_check(path: str, why: str) -> None:
    raise _CheckFailure(f"{path}: {why}")


def _check(cert: Certificate, guard: int, samples: int, path: str = "root") -> None:
    rec = cert.recurrence
    k = rec.order
    if len(cert.base_cases) != k:
        _fail_check(path, f"{len(cert.base_cases)} base cases for order {k}")
    if cert.coverage not in (COVERAGE_ALL, COVERAGE_NONNEGATIVE):
        _fail_check(path, f"unknown coverage {cert.coverage!r}")

    children_all_integers = True
    for idx, bc in enumerate(cert.base_cases):
        if bc.j != idx:
            _fail_check(path, f"base case index {bc.j} out of order")
        lhs_j = substitute(cert.identity.lhs, cert.variable, bc.j)
        rhs_j = substitute(cert.identity.rhs, cert.variable, bc.j)
        if isinstance(bc, BaseCaseZero):
            if bc.value != 0:
                _fail_check(path, f"base case {bc.j} records nonzero value {bc.value}")
            if free_vars(lhs_j) | free_vars(rhs_j):
                _fail_check(path, f"base case {bc.j} still has variables")
            if eval_expr(lhs_j) - eval_expr(rhs_j) != 0:
                _fail_check(path, f"base case {bc.j} does not evaluate to zero")
        else:
            child = bc.certificate
            if format_expr(child.identity.lhs) != format_expr(lhs_j) or (
                format_expr(child.identity.rhs) != format_expr(rhs_j)
            ):
                _fail_check(path, f"base case {bc.j} certificate proves a different identity")
            _check(child, guard, samples, f"{path}.{cert.variable}={bc.j}")
            if child.coverage != COVERAGE_ALL:
                children_all_integers = False

    expected_all = rec.backward_extensible and children_all_integers
    if (cert.coverage == COVERAGE_ALL) != expected_all:
        _fail_check(path, "coverage flag inconsistent with recurrence structure")

    # Annihilation sampling: the stated recurrence must have exactly-zero
    # residuals on the difference, for order+guard window starts per level.
    rest = sorted((free_vars(cert.identity.lhs) | free_vars(cert.identity.rhs)) - {cert.variable})
    points = k + guard
    start = -((points) // 2) if cert.coverage == COVERAGE_ALL else 0
    rng = _stable_rng("check", format_identity(cert.identity), cert.variable)
    rounds = samples if rest else 1
    low = -5 if cert.coverage == COVERAGE_ALL else 0
    for _ in range(rounds):
        sigma = {w: rng.randint(low, 5) for w in rest}
        values = {}

        def x(t: int) -> Fraction:
            if t not in values:
                a = dict(sigma)
                a[cert.variable] = t
                values[t] = eval_expr(cert.identity.lhs, a) - eval_expr(cert.identity.rhs, a)
            return values[t]

        for t in range(start, start + points):
            residual = x(t + k) - sum(rec.coeffs[i] * x(t + i) for i in range(k))
            if residual != 0:
                _fail_check(path, f"recurrence residual nonzero at window {t}")


# ---------------------------------------------------------------------------
# Identity construction from initial-value tables


def construct_identity(
    target: Expr,
    basis: Sequence[Expr],
    var: str,
    witness_terms: int = WITNESS_TERMS_DEFAULT,
) -> Optional[tuple[tuple[Fraction, ...], Certificate]]:
    """Express target as an exact linear combination of the basis.

    All expressions share a common annihilating recurrence (lcm of their
    individual ones); solving target(j) = sum(c_i * basis_i(j)) on the
    order-many initial indices determines the combination, which is then
    proved and certified.  Returns None when the system is inconsistent.
    """
    from .linalg import ExactMatrix, solve_linear

    if not basis:
        raise ValueError("basis must be nonempty")
    exprs = [target, *basis]
    for e in exprs:
        extra = free_vars(e) - {var}
        if extra:
            raise ValueError(
                f"expression has variables besides '{var}': {sorted(extra)}"
            )
    common = reduce(rec_add, (recurrence_of(e, var) for e in exprs))
    k = common.order
    rows = [[eval_expr(b, {var: j}) for b in basis] for j in range(k)]
    rhs = [eval_expr(target, {var: j}) for j in range(k)]
    solution = solve_linear(ExactMatrix.from_rows(rows), rhs)
    if solution is None:
        return None
    combo: Expr = Scale(solution[0], basis[0])
    for c, b in zip(solution[1:], basis[1:]):
        combo = Add(combo, Scale(c, b))
    identity = Identity("constructed", (var,), target, combo)
    verdict = prove(identity, minimize=False, witness_terms=witness_terms)
    if not isinstance(verdict, Proved):
        return None
    return tuple(solution), verdict.certificate


# ---------------------------------------------------------------------------
# Certificate (de)serialization: rationals travel as exact "p/q" strings


def certificate_to_dict(cert: Certificate) -> dict:
    cases: list[dict] = []
    for bc in cert.base_cases:
        if isinstance(bc, BaseCaseZero):
            cases.append({"j": bc.j, "kind": "zero", "value": str(bc.value)})
        else:
            cases.append(
                {"j": bc.j, "kind": "nested", "certificate": certificate_to_dict(bc.certificate)}
            )
    return {
        "identity": format_identity(cert.identity),
        "variables": list(cert.identity.variables),
        "variable": cert.variable,
        "recurrence": {
            "order": cert.recurrence.order,
            "coeffs": [str(c) for c in cert.recurrence.coeffs],
        },
        "coverage": cert.coverage,
        "baseCases": cases,
        "witnessTerms": cert.witness_terms,
    }


def certificate_from_dict(data: dict) -> Certificate:
    from .parser import parse_identity

    identity = parse_identity(
        data["identity"], data.get("variables"), name=data.get("name", "")
    )
    rec = Recurrence(tuple(Fraction(c) for c in data["recurrence"]["coeffs"]))
    if rec.order != data["recurrence"]["order"]:
        raise ValueError("recurrence order disagrees with coefficient count")
    cases: list[BaseCase] = []
    for item in data["baseCases"]:
        if item["kind"] == "zero":
            cases.append(BaseCaseZero(item["j"], Fraction(item["value"])))
        elif item["kind"] == "nested":
            cases.append(BaseCaseNested(item["j"], certificate_from_dict(item["certificate"])))
        else:
            raise ValueError(f"unknown base case kind {item['kind']!r}")
    return Certificate(
        identity=identity,
        variable=data["variable"],
        recurrence=rec,
        coverage=data["coverage"],
        base_cases=tuple(cases),
        witness_terms=data["witnessTerms"],
    )
