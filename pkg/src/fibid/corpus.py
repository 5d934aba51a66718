"""Built-in identity corpus and the corpus runner.

Entries marked expected=true must come back Proved and expected=false must
come back Refuted; expected=unknown entries are reported either way and never
fail a run.  Every expected flag below was fixed by brute-force evaluation
over a grid of small assignments before being recorded — several classical
identities circulate with sign or index typos, and those variants are kept
here as refutation targets rather than silently corrected:

  * cassini_c4    lhs F(n-1)F(n+1) - F(n)^2 needs (-1)^n, not (-1)^(n-1)
                  (fails at n = 1); the corrected sign is entry cassini.
  * d12           as usually printed fails at n = 1; d12_corrected holds.
  * fg_cubic      the cubic difference needs (-1)^(n-1); the (-1)^n variant
                  is kept as fg_cubic_misprint (fails at n = 2).

User corpora use the same line format: ``name | vars | identity | expected``
with '#' comments; vars is a comma-separated list (may be empty).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .expr import Identity
from .parser import parse_identity
from .prover import (
    Certificate,
    Proved,
    Refuted,
    Unsupported,
    Verdict,
    check_certificate,
    prove,
)

EXPECTED_VALUES = ("true", "false", "unknown")


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    variables: str  # comma-separated declared order, "" when variable-free
    identity_text: str
    expected: str  # "true" | "false" | "unknown"
    source: str

    def parse(self) -> Identity:
        vars_tuple = tuple(v for v in self.variables.split(",") if v)
        return parse_identity(self.identity_text, vars_tuple or None, name=self.name)


def _entry(name: str, variables: str, text: str, expected: str, source: str) -> CorpusEntry:
    if expected not in EXPECTED_VALUES:
        raise ValueError(f"bad expected flag {expected!r}")
    return CorpusEntry(name, variables, text, expected, source)


BUILTIN_CORPUS: tuple[CorpusEntry, ...] = (
    # -- two-sided product/square table ------------------------------------
    _entry("c1", "a,b,n", "F[n+a]*F[n+b] - F[n]*F[n+a+b] = (-1)^(n)*F[a]*F[b]", "true", "Tagiuri"),
    _entry("c2", "n", "F[n+1]^2 = 4*F[n]*F[n-1] + F[n-2]^2", "true", "square expansion"),
    _entry("c3", "n", "L[n]^2 - 5*F[n]^2 = 4*(-1)^(n)", "true", "Lucas-Fibonacci bridge"),
    _entry("c4", "n", "F[n-1]*F[n+1] - F[n]^2 = (-1)^(n-1)", "false", "Cassini, misprinted sign"),
    _entry("c5", "r,n", "F[r-n]*F[n] = 1/5*(L[r] - (-1)^(n)*L[r-2*n])", "true", "product-to-Lucas, rewritten"),
    _entry("c5_orig", "m,n", "F[m]*F[n] = 1/5*(L[m+n] - (-1)^(n)*L[m-n])", "true", "product-to-Lucas"),
    _entry("c6", "n", "F[n]^2 = 1/5*(L[2*n] - 2*(-1)^(n))", "true", "square-to-Lucas"),
    _entry("c7", "r,n", "F[r] = F[n-1]*F[r-n] + F[n]*F[r-n+1]", "true", "addition law, rewritten"),
    _entry("c7_orig", "m,n", "F[n+m] = F[n-1]*F[m] + F[n]*F[m+1]", "true", "addition law"),
    _entry("c8", "r,n", "F[r] = 1/2*(F[r-n]*L[n] + L[r-n]*F[n])", "true", "half Lucas convolution, rewritten"),
    _entry("c8_orig", "m,n", "F[m+n] = 1/2*(F[m]*L[n] + L[m]*F[n])", "true", "half Lucas convolution"),
    _entry("c9", "k,n", "F[n+k+1]^2 + F[n-k]^2 = F[2*k+1]*F[2*n+1]", "true", "Melham sum of squares"),
    _entry("c10", "k,n", "L[n+k+1]^2 + L[n-k]^2 = 5*L[2*k+1]*L[2*n+1]", "unknown", "Lucas analogue, suspect as printed"),
    _entry("c11", "r,n", "F[n]^2 + (-1)^(n+r-1)*F[r]^2 = F[n-r]*F[n+r]", "true", "Catalan rearranged"),
    _entry("c12", "n", "F[n]^4 - F[n-2]*F[n-1]*F[n+1]*F[n+2] = 1", "true", "Gelin-Cesaro"),
    _entry("d1", "n", "F[2*n] = F[n+1]^2 - F[n-1]^2", "true", "even-index doubling"),
    _entry("d2", "n", "F[2*n+1] = F[n+1]^2 + F[n]^2", "true", "odd-index doubling"),
    _entry("d3", "n", "F[n+2]*F[n-1] = F[n+1]^2 - F[n]^2", "true", "square difference"),
    _entry("d4", "n", "F[n]^2 - F[n-2]*F[n+2] = (-1)^(n)", "true", "distance-2 Catalan"),
    _entry("d5", "n", "sum(k=1..n, F[k]^2) = F[n]*F[n+1]", "true", "square prefix sums"),
    _entry("d6", "n", "F[n]^2 - F[n-1]*F[n+1] = (-1)^(n-1)", "true", "Cassini, difference reversed"),
    _entry("d7", "n", "F[n]*F[n+3] = F[n+1]*F[n+2] + (-1)^(n-1)", "true", "shifted product"),
    _entry("d8", "n", "F[n]^2 - F[n-1]^2 = F[n]*F[n-1] + (-1)^(n-1)", "true", "consecutive squares"),
    _entry("d9", "n", "F[2*n+1] + (-1)^(n) = F[n-1]*F[n+1] + F[n+1]^2", "true", "odd doubling variant"),
    _entry("d10", "n", "L[2*n+1] - F[n+1]^2 - ((L[n]^2 - F[n-3]*F[n+1]) + F[2*n-2]) = (-1)^(n-1)", "unknown", "auxiliary-term identity"),
    _entry("d11", "n", "L[n-1]^2 - F[n-4]*F[n] - F[n]*F[n+1] = F[n-2]^2", "unknown", "Lucas square decomposition"),
    _entry("d12", "n", "F[2*n+1] = F[n+3]*F[n] - F[n+1]*F[n-1]", "false", "odd doubling, misprinted indices"),
    _entry("d12_corrected", "n", "F[2*n+1] = F[n+1]*F[n+2] - F[n-1]*F[n]", "true", "odd doubling, product form"),
    # -- named theorems ------------------------------------------------------
    _entry("cassini", "n", "F[n-1]*F[n+1] - F[n]^2 = (-1)^(n)", "true", "Cassini"),
    _entry("catalan", "r,n", "F[n]^2 - F[n+r]*F[n-r] = (-1)^(n-r)*F[r]^2", "true", "Catalan"),
    _entry("catalan_shift3", "r", "4*(-1)^(3-r) + F[r+3]*F[r-3] - F[r]^2 = 0", "true", "Catalan base case at distance 3"),
    _entry("melham_sq", "r,n", "F[n+r+1]^2 + F[n-r]^2 = F[2*r+1]*F[2*n+1]", "true", "Melham sum of squares"),
    _entry("melham_sq_base0", "r", "F[r+1]^2 + F[-r]^2 = F[2*r+1]*F[1]", "true", "Melham base case 0"),
    _entry("melham_sq_base1", "r", "F[r+2]^2 + F[1-r]^2 = F[2*r+1]*F[3]", "true", "Melham base case 1"),
    _entry("melham_sq_base2", "r", "F[r+3]^2 + F[2-r]^2 = F[2*r+1]*F[5]", "true", "Melham base case 2"),
    _entry("docagne", "r,n", "F[n+1]*F[n+r] - F[n]*F[n+r+1] = (-1)^(n)*F[r]", "true", "d'Ocagne, rewritten"),
    _entry("melham_cubic", "n", "F[n+1]*F[n+2]*F[n+6] - F[n+3]^3 = (-1)^(n)*F[n]", "true", "Melham cubic"),
    _entry("triple_product", "n", "F[3*n+3] = F[n]*F[n+3]^2 + F[n-1]*F[n+2]^2 - F[n-2]*F[n+1]^2", "true", "constructed triple product"),
    _entry("fg_cubic", "n", "F[n-2]*F[n+1]^2 - F[n]^3 = (-1)^(n-1)*F[n-1]", "true", "Fairgrieve-Gould cubic"),
    _entry("fg_cubic_misprint", "n", "F[n-2]*F[n+1]^2 - F[n]^3 = (-1)^(n)*F[n-1]", "false", "Fairgrieve-Gould cubic, misprinted sign"),
    _entry("fg_quartic", "n", "F[n-3]*F[n+1]^3 - F[n]^4 = (-1)^(n)*(F[n-1]*F[n+3] + 2*F[n]^2)", "true", "Fairgrieve-Gould quartic"),
    _entry("triple_product_shifted", "n", "F[n]*F[n+3]^2 + F[n-1]*F[n+2]^2 - F[n-2]*F[n+1]^2 = F[3*n+3]", "true", "constructed triple product, stated form"),
    _entry("cube_sum", "n", "F[3*n] = F[n+1]^3 + F[n]^3 - F[n-1]^3", "true", "index-tripling cubes"),
    # -- zigzag-sequence observations promoted to identities -----------------
    _entry("zigzag_pythagoras", "n", "(F[n]*F[n+1])^2 + (F[n]*F[n+2])^2 + (F[n+1]*F[n+2])^2 = (F[n]^2 + F[n+1]*F[n+2])^2", "true", "Pythagorean-style square"),
    _entry("zigzag_sum_a", "n", "F[2*n-3]*F[2*n-2] = sum(k=1..n-1, F[4*k-3])", "true", "prefix sums, stride 4 offset 1"),
    _entry("zigzag_sum_b", "n", "F[2*n-3]*F[2*n-1] = 1 + sum(k=1..n-1, F[4*k-2])", "true", "prefix sums, stride 4 offset 2"),
    _entry("zigzag_sum_c", "n", "F[2*n-2]*F[2*n-1] = sum(k=1..n-1, F[4*k-1])", "true", "prefix sums, stride 4 offset 3"),
    _entry("zigzag_sum_d", "n", "F[2*n-2]*F[2*n] = sum(k=1..n-1, F[4*k])", "true", "prefix sums, stride 4"),
    _entry("gelin_cesaro", "n", "F[n]^4 - F[n-2]*F[n-1]*F[n+1]*F[n+2] = 1", "true", "Gelin-Cesaro"),
    # -- membership checks: these families obey the same third-order recurrence
    _entry("member_fib_sq", "n", "F[n+6]^2 = 2*(F[n+5]^2 + F[n+4]^2) - F[n+3]^2", "true", "shifted square recurrence"),
    _entry("member_fib_prod", "n", "F[n+6]*F[n+7] = 2*(F[n+5]*F[n+6] + F[n+4]*F[n+5]) - F[n+3]*F[n+4]", "true", "shifted product recurrence"),
    _entry("member_luc_sq", "n", "L[n+6]^2 = 2*(L[n+5]^2 + L[n+4]^2) - L[n+3]^2", "true", "shifted Lucas square recurrence"),
    _entry("member_fib_luc", "n", "F[n+6]*L[n+6] = 2*(F[n+5]*L[n+5] + F[n+4]*L[n+4]) - F[n+3]*L[n+3]", "true", "mixed product recurrence"),
)


# ---------------------------------------------------------------------------
# Corpus file format: name | vars | identity | expected


def parse_corpus_line(line: str) -> Optional[CorpusEntry]:
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None
    parts = [p.strip() for p in stripped.split("|")]
    if len(parts) != 4:
        raise ValueError(f"corpus line needs 4 '|' fields, got {len(parts)}: {line!r}")
    name, variables, text, expected = parts
    if expected not in EXPECTED_VALUES:
        raise ValueError(f"bad expected flag {expected!r} in corpus line {name!r}")
    return CorpusEntry(name, variables.replace(" ", ""), text, expected, "user corpus")


def load_corpus_file(path: str) -> list[CorpusEntry]:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            entry = parse_corpus_line(line)
            if entry is not None:
                entries.append(entry)
    return entries


def format_corpus_line(entry: CorpusEntry) -> str:
    return f"{entry.name} | {entry.variables} | {entry.identity_text} | {entry.expected}"


# ---------------------------------------------------------------------------
# Runner


@dataclass(frozen=True)
class EntryResult:
    entry: CorpusEntry
    verdict: Verdict
    matched: bool
    millis: float
    certificate_ok: Optional[bool]
    certificate_path: Optional[str] = None

    @property
    def verdict_kind(self) -> str:
        if isinstance(self.verdict, Proved):
            return "proved"
        if isinstance(self.verdict, Refuted):
            return "refuted"
        return "unsupported"


@dataclass(frozen=True)
class RunReport:
    results: tuple[EntryResult, ...]
    total_millis: float

    @property
    def mismatches(self) -> tuple[EntryResult, ...]:
        return tuple(r for r in self.results if not r.matched)

    @property
    def counts(self) -> dict[str, int]:
        out = {"proved": 0, "refuted": 0, "unsupported": 0, "mismatched": 0}
        for r in self.results:
            out[r.verdict_kind] += 1
        out["mismatched"] = len(self.mismatches)
        return out


def _expected_matches(expected: str, verdict: Verdict) -> bool:
    if expected == "true":
        return isinstance(verdict, Proved)
    if expected == "false":
        return isinstance(verdict, Refuted)
    return not isinstance(verdict, Unsupported)  # unknown must still be definitive


def run_entry(
    entry: CorpusEntry,
    minimize: bool = False,
    check: bool = True,
) -> EntryResult:
    start = time.perf_counter()
    try:
        identity = entry.parse()
        verdict = prove(identity, minimize=minimize)
    except ValueError as exc:
        verdict = Unsupported(str(exc))
    millis = (time.perf_counter() - start) * 1000.0
    cert_ok: Optional[bool] = None
    if check and isinstance(verdict, Proved):
        cert_ok = check_certificate(verdict.certificate)
    matched = _expected_matches(entry.expected, verdict) and cert_ok is not False
    return EntryResult(entry, verdict, matched, millis, cert_ok)


def run_corpus(
    entries: Sequence[CorpusEntry] = BUILTIN_CORPUS,
    name_filter: str = "",
    minimize: bool = False,
    check: bool = True,
    parallel: bool = False,
) -> RunReport:
    selected = [e for e in entries if name_filter in e.name]
    start = time.perf_counter()
    if parallel and len(selected) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor() as pool:
            results = list(pool.map(lambda e: run_entry(e, minimize, check), selected))
    else:
        results = [run_entry(e, minimize, check) for e in selected]
    total = (time.perf_counter() - start) * 1000.0
    return RunReport(tuple(results), total)
