"""Two-phase tableau simplex over exact rationals with Bland's rule.

Solves ``min c.x  s.t.  A x = b, x >= 0`` with ``b >= 0``.  On
infeasibility the phase-one duals are returned as a Farkas ray ``y`` with
``A^T y <= 0`` and ``b.y > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: Optional[list[Fraction]] = None
    value: Optional[Fraction] = None
    farkas: Optional[list[Fraction]] = None


class _Tableau:
    def __init__(self, rows: list[list[Fraction]], rhs: list[Fraction], basis: list[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis

    def pivot(self, r: int, k: int, cost: list[Fraction]) -> None:
        row = self.rows[r]
        piv = row[k]
        if piv != 1:
            inv = 1 / piv
            self.rows[r] = row = [a * inv for a in row]
            self.rhs[r] *= inv
        for i, other in enumerate(self.rows):
            if i != r and other[k]:
                f = other[k]
                self.rows[i] = [a - f * b for a, b in zip(other, row)]
                self.rhs[i] -= f * self.rhs[r]
        if cost[k]:
            f = cost[k]
            cost[:] = [a - f * b for a, b in zip(cost, row)]
        self.basis[r] = k

    def run(self, cost: list[Fraction], allowed: int) -> bool:
        """Minimise with reduced costs ``cost``; only columns < allowed may enter.

        Returns False if the objective is unbounded below.
        """
        while True:
            enter = next((k for k in range(allowed) if cost[k] < 0), None)
            if enter is None:
                return True
            best = None
            for i, row in enumerate(self.rows):
                if row[enter] > 0:
                    ratio = self.rhs[i] / row[enter]
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return False
            self.pivot(best[1], enter, cost)


def _reduced(c: Sequence[Fraction], tab: _Tableau) -> list[Fraction]:
    cost = list(c)
    for i, k in enumerate(tab.basis):
        if cost[k]:
            f = cost[k]
            cost = [a - f * b for a, b in zip(cost, tab.rows[i])]
    return cost


def solve(A: Sequence[Sequence], b: Sequence, c: Sequence) -> LPResult:
    m = len(A)
    n = len(c)
    if any(Fraction(v) < 0 for v in b):
        raise ValueError("right-hand side must be nonnegative")
    rows = [[Fraction(a) for a in row] + [Fraction(int(i == j)) for j in range(m)] for i, row in enumerate(A)]
    tab = _Tableau(rows, [Fraction(v) for v in b], [n + i for i in range(m)])

    phase1 = [Fraction(0)] * n + [Fraction(1)] * m
    cost = _reduced(phase1, tab)
    tab.run(cost, n + m)
    infeas = sum(tab.rhs[i] for i, k in enumerate(tab.basis) if k >= n)
    if infeas > 0:
        # reduced cost of artificial j is 1 - y_j
        y = [1 - cost[n + j] for j in range(m)]
        return LPResult("infeasible", farkas=y)

    # drive zero-level artificials out of the basis, dropping redundant rows
    i = 0
    while i < len(tab.rows):
        if tab.basis[i] >= n:
            k = next((k for k in range(n) if tab.rows[i][k] != 0), None)
            if k is None:
                del tab.rows[i], tab.rhs[i], tab.basis[i]
                continue
            tab.pivot(i, k, [Fraction(0)] * (n + m))
        i += 1
    tab.rows = [row[:n] for row in tab.rows]
    cost = _reduced([Fraction(v) for v in c], tab)
    if not tab.run(cost, n):
        return LPResult("unbounded")
    x = [Fraction(0)] * n
    for i, k in enumerate(tab.basis):
        x[k] = tab.rhs[i]
    return LPResult("optimal", x=x, value=sum(Fraction(ci) * xi for ci, xi in zip(c, x)))
