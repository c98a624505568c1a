"""Exact rational linear algebra: Gaussian elimination and Fourier-Motzkin."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence


class SingularSystem(ArithmeticError):
    pass


def solve(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> list:
    """Solve ``matrix @ x = rhs`` exactly.

    Pivoting takes the first nonzero entry of each column so results are
    deterministic.  Raises SingularSystem when no unique solution exists.
    """
    n = len(rhs)
    rows = [list(map(Fraction, row)) + [Fraction(rhs[i])] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            raise SingularSystem(f"no pivot in column {col}")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        prow = rows[col]
        inv = 1 / prow[col]
        for k in range(col, n + 1):
            prow[k] *= inv
        for r in range(n):
            if r != col and rows[r][col] != 0:
                factor = rows[r][col]
                row = rows[r]
                for k in range(col, n + 1):
                    row[k] -= factor * prow[k]
    return [rows[i][n] for i in range(n)]


# ------------------------------------------------------------------ feasibility

@dataclass(frozen=True)
class Constraint:
    """``sum(coeffs[v] * x_v) + const  (> 0 if strict else >= 0)``."""

    coeffs: tuple  # of (var, Fraction) sorted by var
    const: Fraction
    strict: bool

    @staticmethod
    def make(coeffs: dict, const=0, strict=False) -> "Constraint":
        items = tuple(sorted((v, Fraction(c)) for v, c in coeffs.items() if c != 0))
        return Constraint(items, Fraction(const), strict)

    def coeff(self, var) -> Fraction:
        for v, c in self.coeffs:
            if v == var:
                return c
        return Fraction(0)

    def trivially(self) -> Optional[bool]:
        if self.coeffs:
            return None
        return self.const > 0 if self.strict else self.const >= 0

    def substitute(self, var, value: Fraction) -> "Constraint":
        c = self.coeff(var)
        rest = {v: k for v, k in self.coeffs if v != var}
        return Constraint.make(rest, self.const + c * value, self.strict)


def _normalize_constraint(c: Constraint) -> Constraint:
    # scale so the largest |coefficient| is 1, keeps Fourier-Motzkin dedup effective
    if not c.coeffs:
        return c
    m = max(abs(k) for _, k in c.coeffs)
    return Constraint(tuple((v, k / m) for v, k in c.coeffs), c.const / m, c.strict)


def _eliminate(cons: list, var) -> list:
    pos, neg, rest = [], [], []
    for c in cons:
        k = c.coeff(var)
        if k > 0:
            pos.append(c)
        elif k < 0:
            neg.append(c)
        else:
            rest.append(c)
    out = set(rest)
    for p in pos:
        kp = p.coeff(var)
        for q in neg:
            kq = -q.coeff(var)
            coeffs: dict = {}
            for v, k in p.coeffs:
                coeffs[v] = coeffs.get(v, 0) + k / kp
            for v, k in q.coeffs:
                coeffs[v] = coeffs.get(v, 0) + k / kq
            coeffs.pop(var, None)
            new = _normalize_constraint(
                Constraint.make(coeffs, p.const / kp + q.const / kq, p.strict or q.strict)
            )
            out.add(new)
    return sorted(out, key=lambda c: (c.coeffs, c.const, c.strict))


def simplest_between(lo: Optional[Fraction], lo_strict: bool,
                     hi: Optional[Fraction], hi_strict: bool) -> Optional[Fraction]:
    """Pick a rational with the smallest denominator inside the interval."""
    if lo is not None and hi is not None:
        if lo > hi or (lo == hi and (lo_strict or hi_strict)):
            return None
        if lo == hi:
            return lo
    if lo is None and hi is None:
        return Fraction(0)
    if lo is None:
        return hi if not hi_strict else hi - 1
    if hi is None:
        return lo if not lo_strict else lo + 1
    den = 1
    while True:
        # smallest numerator with num/den inside the interval
        num = math.floor(lo * den)
        while Fraction(num, den) < lo or (lo_strict and Fraction(num, den) == lo):
            num += 1
        cand = Fraction(num, den)
        if cand < hi or (not hi_strict and cand == hi):
            return cand
        den += 1


def feasible_point(constraints: list, variables: Sequence) -> Optional[dict]:
    """Exact feasibility of a system of (strict) linear inequalities.

    Returns a satisfying assignment, preferring simple rationals, or None.
    """
    cons = [_normalize_constraint(c) for c in constraints]
    stages = []
    for var in variables:
        for c in cons:
            if c.trivially() is False:
                return None
        cons = [c for c in cons if c.trivially() is None]
        stages.append((var, cons))
        cons = _eliminate(cons, var)
    if any(c.trivially() is False for c in cons):
        return None
    assignment: dict = {}
    for var, stage in reversed(stages):
        lo = hi = None
        lo_strict = hi_strict = False
        for c in stage:
            for v, val in assignment.items():
                c = c.substitute(v, val)
            k = c.coeff(var)
            if k == 0:
                if c.trivially() is False:
                    return None
                continue
            bound = -c.const / k
            if k > 0:
                if lo is None or bound > lo or (bound == lo and c.strict):
                    lo, lo_strict = bound, c.strict
            else:
                if hi is None or bound < hi or (bound == hi and c.strict):
                    hi, hi_strict = bound, c.strict
        val = simplest_between(lo, lo_strict, hi, hi_strict)
        if val is None:
            return None
        assignment[var] = val
    return assignment
