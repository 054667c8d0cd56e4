"""Search-free enumeration of DNF models under XOR constraints.

Each cube fixes some literals; what is left of the XOR system is linear in
the cube's free variables, so its solutions form an affine space that can be
listed directly in Gray-code order.  No branching happens anywhere.
"""
from __future__ import annotations

from typing import Callable, Iterator, Optional, Sequence

from ..formula import DnfFormula, XorClause
from .gf2 import Gf2System


def _cube_space(num_vars: int, cube: Sequence[int], xors: Sequence[XorClause]):
    """Affine model space of one cube: (particular model, basis vectors) or None."""
    fixed_true = fixed = 0
    for lit in cube:
        fixed |= 1 << abs(lit)
        if lit > 0:
            fixed_true |= 1 << lit
    sysm = Gf2System(num_vars + 1)
    for x in xors:
        row = 0
        for v in x.variables:
            row |= 1 << v
        par = x.parity ^ ((row & fixed_true).bit_count() & 1)
        if not sysm.add(row & ~fixed, par):
            return None
    free_mask = ((1 << (num_vars + 1)) - 2) & ~fixed
    base = fixed_true | sysm.solve_particular()
    basis = []
    for f in sysm.free_columns():
        if (free_mask >> f) & 1:
            v = 1 << f
            for col, (row, _) in sysm.pivots.items():
                if (row >> f) & 1:
                    v |= 1 << col
            basis.append(v)
    return base, basis


def _projected_basis(basis: list[int], s_mask: int) -> list[int]:
    """Subset-combinations of ``basis`` whose projections on ``s_mask`` are independent.

    Returned full vectors have pairwise-independent projections, so Gray-code
    walks over them visit each projected point exactly once.
    """
    pivots: dict[int, tuple[int, int]] = {}  # highest projected bit -> (projection, full)
    out = []
    for vec in basis:
        p, full = vec & s_mask, vec
        while p:
            hb = p.bit_length() - 1
            if hb not in pivots:
                break
            pp, pf = pivots[hb]
            p ^= pp
            full ^= pf
        if p:
            pivots[p.bit_length() - 1] = (p, full)
            out.append(full)
    return out


def dnf_models(formula: DnfFormula, extra_xors: Sequence[XorClause], sampling_set: Sequence[int]) -> Iterator[int]:
    """Yield full models, pairwise distinct on the sampling set."""
    s_mask = 0
    for v in sampling_set:
        s_mask |= 1 << v
    seen: set[int] = set()
    for cube in formula.cubes:
        space = _cube_space(formula.num_vars, cube, extra_xors)
        if space is None:
            continue
        base, basis = space
        gens = _projected_basis(basis, s_mask)
        point = base
        k = len(gens)
        for step in range(1 << k):
            if step:
                # Gray code: flip the generator at the lowest set bit of step
                point ^= gens[(step & -step).bit_length() - 1]
            key = point & s_mask
            if key not in seen:
                seen.add(key)
                yield point


def dnf_enumerate(formula: DnfFormula, extra_xors: Sequence[XorClause], sampling_set: Sequence[int],
                  limit: Optional[int], on_model: Optional[Callable[[int], bool]] = None) -> list[int]:
    out = []
    if limit is not None and limit <= 0:
        return out
    for model in dnf_models(formula, extra_xors, sampling_set):
        out.append(model)
        if limit is not None and len(out) >= limit:
            break
        if on_model is not None and on_model(model):
            break
    return out
