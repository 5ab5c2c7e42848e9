"""Closed-form solutions of cost equation systems.

The recurrence shape picks a basis (polynomials, fib/lucas, or a^n); the
coefficients are then fitted by exact rational elimination on consecutive
values of the memoized recurrence and accepted only if the fit reproduces the
recurrence on the whole checked range.  Anything else is returned as a table.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

from .hcir import CostEquationSystem

HORIZON = 30
MAX_SHIFT = 5


class SolverError(Exception):
    pass


# --------------------------------------------------------------- evaluation


def eval_recurrence(sys: CostEquationSystem, n: int, pred: str | None = None) -> Fraction:
    """Exact value of ``pred`` (default: the entry) at size ``n``."""
    return _Evaluator(sys).value(pred or sys.entry, n)


class _Evaluator:
    def __init__(self, sys: CostEquationSystem):
        self.sys = sys
        self.pick = max if sys.direction == "upper" else min
        self.memo: dict[tuple[str, int], Fraction] = {}

    def value(self, pred: str, n: int) -> Fraction:
        # iterative deepening keeps Python's recursion limit out of the way
        for k in range(min(n, 0), n + 1, 64):
            self._value(pred, k, set())
        return self._value(pred, n, set())

    def _value(self, pred: str, n: int, active: set) -> Fraction:
        key = (pred, n)
        if key in self.memo:
            return self.memo[key]
        if key in active:
            raise SolverError(f"recurrence for {pred} does not decrease at n={n}")
        active.add(key)
        eq = self.sys.equations[pred]
        vals = []
        for case in eq.cases:
            if not case.applies(n):
                continue
            v = case.cost
            for q, kind, arg in case.calls:
                v += self._value(q, n + arg if kind == "rel" else arg, active)
            vals.append(v)
        active.discard(key)
        if not vals:
            raise SolverError(f"no equation of {pred} applies at n={n}")
        self.memo[key] = self.pick(vals)
        return self.memo[key]


# --------------------------------------------------------------- closed forms


@lru_cache(maxsize=None)
def fib(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


@lru_cache(maxsize=None)
def lucas(n: int) -> int:
    a, b = 2, 1
    for _ in range(n):
        a, b = b, a + b
    return a


@dataclass(frozen=True, order=True)
class Basis:
    # ordering key doubles as rendering order: lucas, fib, a^n, N^k (descending), 1
    rank: int
    kind: str  # lucas | fib | geom | poly
    param: int = 0

    @staticmethod
    def poly(k: int) -> "Basis":
        return Basis(1000 - k, "poly", k)

    @staticmethod
    def geom(a: int) -> "Basis":
        return Basis(100 - a, "geom", a)

    def at(self, n: int) -> Fraction:
        if self.kind == "poly":
            return Fraction(n) ** self.param
        if self.kind == "fib":
            return Fraction(fib(n))
        if self.kind == "lucas":
            return Fraction(lucas(n))
        return Fraction(self.param) ** n

    def render(self) -> str:
        if self.kind == "poly":
            return "" if self.param == 0 else "N" if self.param == 1 else f"N^{self.param}"
        if self.kind == "geom":
            return f"{self.param}^N"
        return f"{self.kind}(N)"


FIB = Basis(0, "fib")
LUCAS = Basis(-1, "lucas")


def _fmt(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    s = f"{float(x):.3f}".rstrip("0").rstrip(".")
    return s


@dataclass(frozen=True)
class ClosedForm:
    terms: tuple[tuple[Basis, Fraction], ...]
    # the formula holds for n >= valid_from; smaller sizes use ``prefix``
    valid_from: int = 0
    prefix: tuple[Fraction, ...] = ()
    start: int = 0

    is_closed = True

    def evaluate(self, n: int) -> Fraction:
        if n < self.valid_from and n - self.start < len(self.prefix) and n >= self.start:
            return self.prefix[n - self.start]
        return sum((c * b.at(n) for b, c in self.terms), Fraction(0))

    __call__ = evaluate

    @property
    def kinds(self) -> set[str]:
        return {b.kind for b, c in self.terms if c}

    @property
    def degree(self) -> int | None:
        """Polynomial degree, or None when a non-polynomial term is present."""
        if self.kinds - {"poly"}:
            return None
        ks = [b.param for b, c in self.terms if c]
        return max(ks) if ks else 0

    def render(self) -> str:
        out: list[str] = []
        for b, c in sorted(self.terms):
            if not c:
                continue
            sym = b.render()
            if sym:
                mag = _fmt(abs(c))
                body = sym if mag == "1" else f"{mag}*{sym}"
            else:
                body = _fmt(abs(c))
            if not out:
                out.append(("-" if c < 0 else "") + body)
            else:
                out.append(("- " if c < 0 else "+ ") + body)
        text = " ".join(out) if out else "0"
        return text if self.valid_from <= self.start else f"{text}  (N >= {self.valid_from})"

    def __str__(self) -> str:
        return self.render()

    def to_dict(self) -> dict:
        return {
            "kind": "closed",
            "text": self.render(),
            "terms": [[b.kind, b.param, str(c)] for b, c in sorted(self.terms) if c],
            "valid_from": self.valid_from,
        }


@dataclass(frozen=True)
class NumericTable:
    values: tuple[tuple[int, Fraction], ...]
    reason: str = ""

    is_closed = False

    def evaluate(self, n: int) -> Fraction:
        for k, v in self.values:
            if k == n:
                return v
        raise SolverError(f"size {n} outside the tabulated range")

    __call__ = evaluate

    @property
    def kinds(self) -> set[str]:
        return set()

    degree = None

    def render(self) -> str:
        return "table[" + ", ".join(f"{k}: {_fmt(v)}" for k, v in self.values) + "]"

    def __str__(self) -> str:
        return self.render()

    def to_dict(self) -> dict:
        return {
            "kind": "table",
            "reason": self.reason,
            "values": {str(k): str(v) for k, v in self.values},
        }


SolveResult = Union[ClosedForm, NumericTable]


# ------------------------------------------------------------------ dispatch


def _sccs(sys: CostEquationSystem) -> dict[str, set[str]]:
    graph = {p: {q for c in eq.cases for q, _, _ in c.calls} for p, eq in sys.equations.items()}
    reach: dict[str, set[str]] = {}
    for p in graph:
        seen, stack = set(), [p]
        while stack:
            x = stack.pop()
            for q in graph.get(x, ()):
                if q not in seen:
                    seen.add(q)
                    stack.append(q)
        reach[p] = seen
    return {p: {q for q in graph if q == p or (q in reach[p] and p in reach[q])} for p in graph}


def infer_basis(sys: CostEquationSystem, pred: str | None = None) -> set[Basis] | None:
    """Basis spanning the solution of ``pred``; None if no pattern applies."""
    memo: dict[str, set[Basis] | None] = {}
    sccs = _sccs(sys)

    def basis(p: str) -> set[Basis] | None:
        if p in memo:
            return memo[p]
        if len(sccs[p]) > 1:
            memo[p] = None
            return None
        memo[p] = None  # guards re-entry
        eq = sys.equations[p]
        callee: set[Basis] = {Basis.poly(0)}
        patterns = set()
        for case in eq.cases:
            selfs = tuple(sorted(a for q, kind, a in case.calls if q == p and kind == "rel"))
            if any(q == p and kind == "abs" for q, kind, _ in case.calls):
                return None
            patterns.add(selfs)
            for q, _, _ in case.calls:
                if q != p:
                    b = basis(q)
                    if b is None:
                        return None
                    callee |= b
        rec = {pat for pat in patterns if pat}
        poly_deg = max((b.param for b in callee if b.kind == "poly"), default=0)
        others = {b for b in callee if b.kind != "poly"}
        if not rec:
            out = set(callee)
        elif rec == {(-1,)}:
            out = others | {Basis.poly(k) for k in range(poly_deg + 2)}
            # a sum of fib/lucas terms stays in their span, a sum of a^n too
        elif rec == {(-2, -1)}:
            out = others | {FIB, LUCAS} | {Basis.poly(k) for k in range(poly_deg + 1)}
        elif len(rec) == 1 and set(next(iter(rec))) == {-1}:
            a = len(next(iter(rec)))
            out = others | {Basis.geom(a)} | {Basis.poly(k) for k in range(poly_deg + 1)}
        else:
            return None
        memo[p] = out
        return out

    return basis(pred or sys.entry)


def _solve_exact(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    n = len(rows)
    a = [r[:] + [v] for r, v in zip(rows, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def solve(
    sys: CostEquationSystem,
    pred: str | None = None,
    start: int = 0,
    horizon: int = HORIZON,
) -> SolveResult:
    """Closed form of ``pred`` (default: entry) valid on ``[start, horizon]`` and beyond."""
    pred = pred or sys.entry
    ev = _Evaluator(sys)
    basis = infer_basis(sys, pred)
    if basis is None:
        reason = "no closed-form pattern applies"
        if len(_sccs(sys)[pred]) > 1 or any(len(s) > 1 for s in _sccs(sys).values()):
            reason = "mutual recursion between predicates"
        warnings.warn(f"{pred}: {reason}; returning a numeric table", stacklevel=2)
        return _table(ev, pred, start, horizon, reason)
    bs = sorted(basis)
    k = len(bs)
    for n0 in range(start, start + MAX_SHIFT + 1):
        pts = list(range(n0, n0 + k))
        rows = [[b.at(n) for b in bs] for n in pts]
        coefs = _solve_exact(rows, [ev.value(pred, n) for n in pts])
        if coefs is None:
            continue
        cf = ClosedForm(
            tuple(zip(bs, coefs)),
            valid_from=n0,
            prefix=tuple(ev.value(pred, n) for n in range(start, n0)),
            start=start,
        )
        if all(cf.evaluate(n) == ev.value(pred, n) for n in range(n0, horizon + 1)):
            return cf
    warnings.warn(f"{pred}: fitted closed form does not match the recurrence", stacklevel=2)
    return _table(ev, pred, start, horizon, "fit rejected by the recurrence check")


def _table(ev: _Evaluator, pred: str, start: int, horizon: int, reason: str) -> NumericTable:
    return NumericTable(tuple((n, ev.value(pred, n)) for n in range(start, horizon + 1)), reason)
