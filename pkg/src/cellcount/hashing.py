"""Random XOR hash functions {0,1}^n -> {0,1}^m with prefix slicing.

Row i of a hash computes  a_{i,0} xor (xor_k a_{i,k} y[k]).  Coefficients are
packed into ints: bit k of ``coeffs[i]`` is a_{i,k+1}, i.e. the coefficient of
domain bit k.  Domain bit k corresponds to the k-th variable of the sampling
set when the hash is turned into XOR constraints.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .formula import XorClause


@dataclass(frozen=True)
class XorHash:
    n: int
    constants: tuple[int, ...]
    coeffs: tuple[int, ...]
    target: tuple[int, ...]

    def __post_init__(self):
        if not (len(self.constants) == len(self.coeffs) == len(self.target)):
            raise ValueError("rows, constants and target must have equal length")
        top = 1 << self.n
        if any(c < 0 or c >= top for c in self.coeffs):
            raise ValueError(f"coefficient row wider than n={self.n}")

    @property
    def rows(self) -> int:
        return len(self.coeffs)

    def prefix(self, m: int) -> "CellId":
        return prefix(self, m)


@dataclass(frozen=True)
class CellId:
    """The first ``m`` rows of ``hash`` together with the first m target bits."""

    hash: XorHash
    m: int

    def image(self, y: int) -> int:
        h = self.hash
        out = 0
        for i in range(self.m):
            bit = h.constants[i] ^ ((h.coeffs[i] & y).bit_count() & 1)
            out |= bit << i
        return out

    def target_bits(self) -> int:
        out = 0
        for i in range(self.m):
            out |= self.hash.target[i] << i
        return out

    def contains(self, y: int) -> bool:
        return self.image(y) == self.target_bits()

    def to_xor_clauses(self, sampling_set: Sequence[int]) -> list[XorClause]:
        return to_xor_clauses(self, sampling_set)


def draw_hash(n: int, m: int, rng: random.Random) -> XorHash:
    """Draw every coefficient, constant and target bit independently and uniformly."""
    if n < 1 or not 0 <= m <= n:
        raise ValueError(f"need n >= 1 and 0 <= m <= n, got n={n}, m={m}")
    consts, coeffs, target = [], [], []
    for _ in range(m):
        consts.append(rng.getrandbits(1))
        coeffs.append(rng.getrandbits(n))
        target.append(rng.getrandbits(1))
    return XorHash(n, tuple(consts), tuple(coeffs), tuple(target))


def prefix(h: XorHash, m: int) -> CellId:
    if not 0 <= m <= h.rows:
        raise ValueError(f"slice length {m} outside 0..{h.rows}")
    return CellId(h, m)


def evaluate(cell: CellId, y: int) -> tuple[bool, int]:
    """Membership of y (an n-bit int, bit k = y[k]) and its raw m-bit image."""
    img = cell.image(y)
    return img == cell.target_bits(), img


def to_xor_clauses(cell: CellId, sampling_set: Sequence[int]) -> list[XorClause]:
    h = cell.hash
    if len(sampling_set) != h.n:
        raise ValueError(f"hash width {h.n} does not match sampling set of size {len(sampling_set)}")
    out = []
    for i in range(cell.m):
        c = h.coeffs[i]
        vs = sorted(sampling_set[k] for k in range(h.n) if (c >> k) & 1)
        out.append(XorClause(tuple(vs), h.target[i] ^ h.constants[i]))
    return out


def project_bits(model: int, sampling_set: Sequence[int]) -> int:
    """Pack a variable bit-mask model into a domain vector over the sampling set."""
    y = 0
    for k, v in enumerate(sampling_set):
        if (model >> v) & 1:
            y |= 1 << k
    return y
