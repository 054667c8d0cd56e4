"""Gauss-Jordan elimination over GF(2) on int-packed rows."""
from __future__ import annotations

from typing import Iterable, Sequence

from ..formula import XorClause


class Gf2System:
    """Linear system over GF(2).

    Columns are positions 0..width-1; row ``r`` is an int whose bit j is the
    coefficient of column j.  The pivot of every row is its highest column, so
    under an ascending assignment order each pivot is the last variable of its
    row to be decided and gets forced.  After ``add`` the rows are kept in
    reduced row-echelon form: a pivot column appears in exactly one row.
    """

    def __init__(self, width: int):
        self.width = width
        self.pivots: dict[int, tuple[int, int]] = {}  # pivot column -> (row, rhs)
        self.inconsistent = False

    def reduce(self, row: int, rhs: int) -> tuple[int, int]:
        r = row
        scan = row
        while scan:
            hb = scan.bit_length() - 1
            scan &= ~(1 << hb)
            p = self.pivots.get(hb)
            if p is not None and (r >> hb) & 1:
                r ^= p[0]
                rhs ^= p[1]
                scan = r & ((1 << hb) - 1)
        return r, rhs

    def add(self, row: int, rhs: int) -> bool:
        """Insert a row; returns False if it makes the system inconsistent."""
        r, b = self.reduce(row, rhs)
        if r == 0:
            if b:
                self.inconsistent = True
            return not b
        hb = r.bit_length() - 1
        bit = 1 << hb
        for col, (prow, pb) in list(self.pivots.items()):
            if prow & bit:
                self.pivots[col] = (prow ^ r, pb ^ b)
        self.pivots[hb] = (r, b)
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def rows(self) -> list[tuple[int, int]]:
        return [self.pivots[c] for c in sorted(self.pivots)]

    def solve_particular(self) -> int:
        """One solution (free columns set to 0) as an int over columns."""
        if self.inconsistent:
            raise ValueError("inconsistent system")
        x = 0
        for col, (row, b) in self.pivots.items():
            # in RREF every other column in the row is free, and free columns are 0
            if b:
                x |= 1 << col
        return x

    def free_columns(self) -> list[int]:
        return [c for c in range(self.width) if c not in self.pivots]

    def null_basis(self) -> list[int]:
        """Basis vectors of the solution space of the homogeneous system."""
        basis = []
        for f in self.free_columns():
            v = 1 << f
            for col, (row, _) in self.pivots.items():
                if (row >> f) & 1:
                    v |= 1 << col
            basis.append(v)
        return basis


def eliminate_xors(xors: Iterable[XorClause], order: Sequence[int]) -> tuple[list[XorClause], bool]:
    """Reduce XOR constraints; pivots are the variables latest in ``order``.

    Returns the reduced constraints and a consistency flag.  Variables not in
    ``order`` are placed after it (ascending).
    """
    xors = list(xors)
    pos = {v: i for i, v in enumerate(order)}
    extra = sorted({v for x in xors for v in x.variables} - pos.keys())
    for v in extra:
        pos[v] = len(pos)
    var_at = {i: v for v, i in pos.items()}
    sysm = Gf2System(len(pos))
    for x in xors:
        row = 0
        for v in x.variables:
            row ^= 1 << pos[v]
        if not sysm.add(row, x.parity):
            return [XorClause((), 1)], False
    out = []
    for row, b in sysm.rows():
        vs = []
        r = row
        while r:
            low = r & -r
            vs.append(var_at[low.bit_length() - 1])
            r ^= low
        out.append(XorClause(tuple(sorted(vs)), b))
    return out, True
