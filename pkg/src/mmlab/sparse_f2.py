"""Sparse factorization of 0/1 encoding matrices over F2.

A t x n^2 encoding matrix X applied as a Kronecker power dominates the
leading constant through T(X)/(t - n^2).  Factoring X = X1 * X2 with X1
sparse replaces that ratio by T(X1)/(t - r).  Dependencies among rows
are what make peeling possible: each one lets a row be deleted from X2
and re-created by a cheap combination row in X1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import combinations

from .errors import PreconditionViolated

# Cap on subset enumeration work for the bounded dependency search.
_MITM_CAP = 2_000_000


@dataclass(frozen=True)
class BitMatrix:
    """Dense matrix over F2; each row is an int bitset (bit c = column c)."""

    rows: int
    cols: int
    bits: tuple

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"need positive dims, got {self.rows}x{self.cols}")
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if len(self.bits) != self.rows:
            raise ValueError(f"expected {self.rows} row bitsets, got {len(self.bits)}")
        for b in self.bits:
            if not 0 <= b < (1 << self.cols):
                raise ValueError(f"row bitset {b} out of range for {self.cols} columns")

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def from_lists(cls, entries) -> "BitMatrix":
        rows = len(entries)
        cols = len(entries[0]) if rows else 0
        bits = []
        for row in entries:
            if len(row) != cols:
                raise ValueError("ragged rows")
            bits.append(sum((1 << c) for c, v in enumerate(row) if int(v) % 2))
        return cls(rows, cols, tuple(bits))

    def entry(self, i: int, j: int) -> int:
        return (self.bits[i] >> j) & 1

    def to_lists(self) -> list:
        return [[self.entry(i, j) for j in range(self.cols)]
                for i in range(self.rows)]

    def mul(self, other: "BitMatrix") -> "BitMatrix":
        if self.cols != other.rows:
            raise ValueError(f"inner dims differ: {self.cols} vs {other.rows}")
        out = []
        for b in self.bits:
            acc = 0
            j = 0
            while b:
                if b & 1:
                    acc ^= other.bits[j]
                b >>= 1
                j += 1
            out.append(acc)
        return BitMatrix(self.rows, other.cols, tuple(out))

    def nnz(self) -> int:
        return sum(b.bit_count() for b in self.bits)

    def naive_cost(self) -> int:
        """Additions to apply the matrix row by row: nnz - 1 per nonzero row."""
        return sum(b.bit_count() - 1 for b in self.bits if b)


def _gaussian_dependency(rows) -> tuple:
    # Reduce rows in order, carrying the index set that produced each basis
    # vector; the first row that cancels to zero yields a dependency.
    basis = {}
    for idx, v in enumerate(rows):
        cur = int(v)
        cert = 1 << idx
        while cur:
            p = cur.bit_length() - 1
            if p not in basis:
                basis[p] = (cur, cert)
                break
            bv, bc = basis[p]
            cur ^= bv
            cert ^= bc
        else:
            return tuple(i for i in range(idx + 1) if (cert >> i) & 1)
    return ()


def _subset_xor(rows, subset) -> int:
    return reduce(lambda a, i: a ^ rows[i], subset, 0)


def _bounded_dependency(rows, size_bound: int) -> tuple:
    # Meet in the middle: any dependency of size s <= bound splits into a
    # stored half of size <= floor(bound/2) and a probed half of size
    # <= ceil(bound/2) with equal XOR, so the scan below is complete.
    t = len(rows)
    store_max = size_bound // 2
    probe_max = size_bound - store_max
    work = sum(math.comb(t, i) for i in range(1, probe_max + 1))
    if work > _MITM_CAP:
        dep = _gaussian_dependency(rows)
        return dep if dep and len(dep) <= size_bound else ()
    seen = {0: frozenset()}
    for size in range(1, probe_max + 1):
        for subset in combinations(range(t), size):
            x = _subset_xor(rows, subset)
            if x in seen:
                dep = seen[x].symmetric_difference(subset)
                if dep and len(dep) <= size_bound:
                    return tuple(sorted(dep))
            elif size <= store_max:
                seen[x] = frozenset(subset)
    return ()


def find_dependency(rows, size_bound: int | None = None) -> tuple:
    """Indices of a nonempty row subset XOR-ing to zero; () if independent.

    Unbounded: Gaussian elimination, complete.  With size_bound, a
    meet-in-the-middle subset scan, complete up to the work cap; above
    the cap only an elimination certificate within the bound is reported,
    so () then means "none found", not a proof of absence.
    """
    rows = [int(v) for v in rows]
    if not rows:
        raise PreconditionViolated("need at least one row")
    if size_bound is None:
        return _gaussian_dependency(rows)
    if size_bound < 1:
        raise PreconditionViolated(f"size bound must be positive, got {size_bound}")
    return _bounded_dependency(rows, size_bound)


def default_size_bound(cols: int) -> int:
    """Dependency size budget ceil(2 cols / log2 cols), the peeling scale."""
    if cols < 2:
        return 2
    return math.ceil(2 * cols / math.log2(cols))


def _drop_bit(bits: int, j: int) -> int:
    low = bits & ((1 << j) - 1)
    return low | ((bits >> (j + 1)) << j)


def sparse_factor(x: BitMatrix, size_bound: int | None = None):
    """Factor X = X1 * X2 over F2 with X1 sparse, by single-row peeling.

    Each round finds a dependency of size <= size_bound among the rows of
    X2, deletes one of its rows, and charges the deleted row to a
    combination of the survivors inside X1.  Stops when no dependency
    within the bound remains (or one row is left); X = I * X is the
    degenerate fallback.  The report carries nnz(X1), the inner dimension
    r, and the measured ratio naive_cost(X1) / (t - r) (None when r = t).
    """
    if size_bound is None:
        size_bound = default_size_bound(x.cols)
    x1_bits = list(BitMatrix.identity(x.rows).bits)
    x2_rows = list(x.bits)
    peels = 0
    while len(x2_rows) > 1:
        dep = find_dependency(x2_rows, size_bound)
        if not dep:
            break
        j = max(dep)
        comb_mask = 0
        for c in dep:
            if c != j:
                comb_mask |= 1 << c
        for i, b in enumerate(x1_bits):
            if (b >> j) & 1:
                b ^= (1 << j) | comb_mask
            x1_bits[i] = _drop_bit(b, j)
        del x2_rows[j]
        peels += 1
    r = len(x2_rows)
    x1 = BitMatrix(x.rows, r, tuple(x1_bits))
    x2 = BitMatrix(r, x.cols, tuple(x2_rows))
    cost = x1.naive_cost()
    report = {
        "t": x.rows,
        "r": r,
        "nnz": x1.nnz(),
        "naive_cost": cost,
        "ratio": Fraction(cost, x.rows - r) if r < x.rows else None,
        "peels": peels,
    }
    return x1, x2, report


def count_bound(t: int, r: int, c: int):
    """Upper bound (r+c)^t * prod C(r+i-1, 2) on matrices of SLP cost c.

    A program holding r inputs picks one of C(r+i-1, 2) value pairs to add
    at step i and one of r+c memory values for each of the t outputs.
    """
    if t < 1 or r < 1 or c < 0:
        raise PreconditionViolated(f"need t, r >= 1 and c >= 0, got {t}, {r}, {c}")
    prod = 1
    for i in range(1, c + 1):
        prod *= math.comb(r + i - 1, 2)
    return (r + c) ** t * prod
