"""Sparse exact linear solving over the coefficient field.

Vectors are dicts ``row -> coeff``.  Columns are consumed in the given order;
the solution only ever uses pivot columns, so earlier columns win and free
variables are zero.
"""

from __future__ import annotations

from typing import Callable, Hashable, Sequence


class IncrementalSolver:
    """Echelon basis of a growing column set with combination tracking."""

    def __init__(self, row_key: Callable[[Hashable], object] = lambda r: r):
        self.row_key = row_key
        self.pivots: dict = {}       # pivot row -> (vector, combination)
        self.ncols = 0

    def _lead(self, vec: dict):
        return max(vec, key=self.row_key)

    def _reduce(self, vec: dict, comb: dict) -> tuple[dict, dict]:
        vec = dict(vec)
        comb = dict(comb)
        while vec:
            r = self._lead(vec)
            if r not in self.pivots:
                break
            pv, pc = self.pivots[r]
            c = vec[r] / pv[r]
            for rr, a in pv.items():
                v = vec.get(rr, 0) - c * a
                if v:
                    vec[rr] = v
                else:
                    vec.pop(rr, None)
            for j, a in pc.items():
                v = comb.get(j, 0) - c * a
                if v:
                    comb[j] = v
                else:
                    comb.pop(j, None)
        return vec, comb

    def add_column(self, vec: dict) -> bool:
        """Append a column; returns True if it raised the rank."""
        j = self.ncols
        self.ncols += 1
        red, comb = self._reduce({r: c for r, c in vec.items() if c}, {j: 1})
        if not red:
            return False
        self.pivots[self._lead(red)] = (red, comb)
        return True

    def solve(self, rhs: dict):
        """Coefficients (dict column -> value) with sum c_j col_j == rhs, or None."""
        red, comb = self._reduce({r: c for r, c in rhs.items() if c}, {})
        if red:
            return None
        return {j: -c for j, c in comb.items()}


def solve_columns(columns: Sequence[dict], rhs: dict, row_key=lambda r: r):
    s = IncrementalSolver(row_key)
    for col in columns:
        s.add_column(col)
    return s.solve(rhs)
