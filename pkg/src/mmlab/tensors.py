"""Sparse order-3 tensors over an exact field, plus matmul-tensor helpers.

Index conventions (load-bearing for every other module):
  * ⟨n,m,d⟩ variables flatten as  a_(i,j) -> i*m+j,  b_(j,k) -> j*d+k,
    c_(k,i) -> k*n+i;  the c-variable (k,i) carries the (i,k) entry of the
    matrix product, i.e. the decoded output vector is C^T flattened row-major.
  * kron pairs flatten row-major: (i1, i2) -> i1*|axis2| + i2.
"""

from __future__ import annotations

from typing import Callable, Iterable, NamedTuple

from .errors import DimMismatch, ShapeUnknown
from .fields import Field, Rationals


class MatMulShape(NamedTuple):
    n: int
    m: int
    d: int

    @property
    def a_dim(self) -> int:
        return self.n * self.m

    @property
    def b_dim(self) -> int:
        return self.m * self.d

    @property
    def c_dim(self) -> int:
        return self.d * self.n

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.a_dim, self.b_dim, self.c_dim)

    def a_index(self, i: int, j: int) -> int:
        return i * self.m + j

    def b_index(self, j: int, k: int) -> int:
        return j * self.d + k

    def c_index(self, k: int, i: int) -> int:
        return k * self.n + i

    def compose(self, other: "MatMulShape") -> "MatMulShape":
        return MatMulShape(self.n * other.n, self.m * other.m, self.d * other.d)

    def power(self, k: int) -> "MatMulShape":
        return MatMulShape(self.n**k, self.m**k, self.d**k)


class Tensor:
    """dims = (|A|, |B|, |C|); entries maps (i,j,k) to a nonzero scalar."""

    __slots__ = ("dims", "field", "entries", "shape", "axis_labels")

    def __init__(self, dims, field: Field, entries=None, shape: MatMulShape | None = None,
                 axis_labels=None):
        self.dims = tuple(dims)
        if len(self.dims) != 3 or any(d < 1 for d in self.dims):
            raise DimMismatch(f"bad tensor dims {dims}")
        self.field = field
        self.entries = {}
        for idx, coeff in (entries or {}).items():
            if not field.is_zero(coeff):
                if any(not (0 <= idx[ax] < self.dims[ax]) for ax in range(3)):
                    raise DimMismatch(f"entry {idx} outside dims {self.dims}")
                self.entries[tuple(idx)] = coeff
        self.shape = shape
        self.axis_labels = axis_labels

    def nnz(self) -> int:
        return len(self.entries)

    def coeff(self, i, j, k):
        return self.entries.get((i, j, k), self.field.zero)

    def scale(self, w) -> "Tensor":
        ents = {idx: self.field.mul(c, w) for idx, c in self.entries.items()}
        return Tensor(self.dims, self.field, ents, shape=self.shape, axis_labels=self.axis_labels)

    def add(self, other: "Tensor") -> "Tensor":
        self.field.check_same(other.field)
        if self.dims != other.dims:
            raise DimMismatch(f"{self.dims} vs {other.dims}")
        ents = dict(self.entries)
        for idx, c in other.entries.items():
            ents[idx] = self.field.add(ents.get(idx, self.field.zero), c)
        return Tensor(self.dims, self.field, ents)

    def __eq__(self, other):
        return tensor_equal(self, other) if isinstance(other, Tensor) else NotImplemented

    def __hash__(self):
        return hash((self.dims, self.field, frozenset(self.entries.items())))

    def __repr__(self):
        return f"Tensor(dims={self.dims}, field={self.field.descriptor}, nnz={self.nnz()})"


def tensor_equal(t1: Tensor, t2: Tensor) -> bool:
    """Exact equality: same field, same dims, identical entry dicts."""
    return t1.field == t2.field and t1.dims == t2.dims and t1.entries == t2.entries


def matmul_tensor(shape: MatMulShape, field: Field | None = None) -> Tensor:
    field = field or Rationals()
    n, m, d = shape
    one = field.one
    ents = {}
    for i in range(n):
        for j in range(m):
            for k in range(d):
                ents[(shape.a_index(i, j), shape.b_index(j, k), shape.c_index(k, i))] = one
    return Tensor(shape.dims, field, ents, shape=shape)


def _compose_labels(l1, l2):
    if l1 is None or l2 is None:
        return None
    return tuple(
        [a + b for a in ax1 for b in ax2] for ax1, ax2 in zip(l1, l2)
    )


def kron(t1: Tensor, t2: Tensor) -> Tensor:
    """Tensor (Kronecker) product; pair indices flatten row-major."""
    t1.field.check_same(t2.field)
    dims = tuple(d1 * d2 for d1, d2 in zip(t1.dims, t2.dims))
    ents = {}
    for (i1, j1, k1), c1 in t1.entries.items():
        for (i2, j2, k2), c2 in t2.entries.items():
            idx = (
                i1 * t2.dims[0] + i2,
                j1 * t2.dims[1] + j2,
                k1 * t2.dims[2] + k2,
            )
            ents[idx] = t1.field.mul(c1, c2)
    shape = None
    if t1.shape is not None and t2.shape is not None:
        shape = t1.shape.compose(t2.shape)
    return Tensor(dims, t1.field, ents, shape=shape,
                  axis_labels=_compose_labels(t1.axis_labels, t2.axis_labels))


def kron_power(t: Tensor, k: int) -> Tensor:
    if k < 1:
        raise ValueError("kron power needs k >= 1")
    out = t
    for _ in range(k - 1):
        out = kron(out, t)
    return out


def direct_sum(t1: Tensor, t2: Tensor) -> Tensor:
    t1.field.check_same(t2.field)
    dims = tuple(d1 + d2 for d1, d2 in zip(t1.dims, t2.dims))
    ents = dict(t1.entries)
    off = t1.dims
    for (i, j, k), c in t2.entries.items():
        ents[(i + off[0], j + off[1], k + off[2])] = c
    labels = None
    if t1.axis_labels is not None and t2.axis_labels is not None:
        labels = tuple(list(a) + list(b) for a, b in zip(t1.axis_labels, t2.axis_labels))
    return Tensor(dims, t1.field, ents, axis_labels=labels)


def copies(h: int, t: Tensor) -> Tensor:
    """h-fold direct sum (h disjoint copies)."""
    if h < 1:
        raise ValueError("need h >= 1")
    out = t
    for _ in range(h - 1):
        out = direct_sum(out, t)
    return out


def normalize_keep(keep, dim: int, ordered: bool = False) -> list[int]:
    """Accepts a predicate, an index collection, or None (keep all).

    ordered=True preserves the order the caller gave (after a duplicate
    check); the default sorts, which is the canonical witness form.
    """
    if keep is None:
        return list(range(dim))
    if callable(keep):
        return [i for i in range(dim) if keep(i)]
    kept = list(keep) if ordered else sorted(set(keep))
    if ordered and len(set(kept)) != len(kept):
        raise DimMismatch("ordered kept list has duplicates")
    if kept and (min(kept) < 0 or max(kept) >= dim):
        raise DimMismatch(f"kept index outside [0, {dim})")
    return kept


def zero_out(t: Tensor, keep_a=None, keep_b=None, keep_c=None, compact: bool = False,
             ordered: bool = False) -> Tensor:
    """Set to zero every entry touching a variable outside the kept sets.

    With compact=True dead indices are removed and the kept ones are
    relabelled by their position in the kept list (sorted by default,
    caller order with ordered=True).
    """
    keeps = [normalize_keep(k, d, ordered) for k, d in
             zip((keep_a, keep_b, keep_c), t.dims)]
    sets = [set(k) for k in keeps]
    ents = {idx: c for idx, c in t.entries.items()
            if idx[0] in sets[0] and idx[1] in sets[1] and idx[2] in sets[2]}
    if not compact:
        return Tensor(t.dims, t.field, ents, shape=t.shape, axis_labels=t.axis_labels)
    maps = [{old: new for new, old in enumerate(k)} for k in keeps]
    new_ents = {(maps[0][i], maps[1][j], maps[2][k]): c for (i, j, k), c in ents.items()}
    labels = None
    if t.axis_labels is not None:
        labels = tuple([t.axis_labels[ax][old] for old in keeps[ax]] for ax in range(3))
    dims = tuple(max(len(k), 1) for k in keeps)
    return Tensor(dims, t.field, new_ents, axis_labels=labels)


def is_zero_out_of(t_sub: Tensor, t: Tensor, witness, ordered: bool = False) -> bool:
    """True iff zeroing t down to the witness sets yields exactly t_sub.

    witness is a (keep_a, keep_b, keep_c) triple.  If t_sub has the same
    dims as t the comparison is in place; otherwise the kept indices are
    compacted (in sorted order, or witness order with ordered=True) before
    comparing.  ordered=True always compacts, since the witness order then
    carries meaning even at unchanged dims.
    """
    keep_a, keep_b, keep_c = witness
    if t_sub.dims == t.dims and not ordered:
        return tensor_equal(zero_out(t, keep_a, keep_b, keep_c), t_sub)
    cut = zero_out(t, keep_a, keep_b, keep_c, compact=True, ordered=ordered)
    return t_sub.field == cut.field and t_sub.dims == cut.dims and t_sub.entries == cut.entries


def relabel(t: Tensor, map_a, map_b, map_c, dims=None) -> Tensor:
    """Apply per-axis index bijections (callables or dicts)."""
    def app(f, x):
        return f[x] if isinstance(f, dict) else f(x)

    dims = tuple(dims) if dims is not None else t.dims
    ents = {(app(map_a, i), app(map_b, j), app(map_c, k)): c
            for (i, j, k), c in t.entries.items()}
    if len(ents) != len(t.entries):
        raise DimMismatch("relabel maps are not injective on the support")
    return Tensor(dims, t.field, ents)


def rotate_tensor(t: Tensor, which: str) -> Tensor:
    """Rotate the roles of the three variable sets.

    "cyclic": axes (A,B,C) -> (C,A,B); on matmul tensors this sends ⟨n,m,d⟩
    to ⟨d,n,m⟩ with no index rewriting at all (the flattening conventions
    line up exactly).
    "swap": exchange the B/C roles, landing on ⟨m,n,d⟩; this one needs shape
    metadata because all three axes must be reindexed.
    """
    if which == "cyclic":
        ents = {(k, i, j): c for (i, j, k), c in t.entries.items()}
        dims = (t.dims[2], t.dims[0], t.dims[1])
        shape = MatMulShape(t.shape.d, t.shape.n, t.shape.m) if t.shape else None
        labels = None
        if t.axis_labels is not None:
            labels = (t.axis_labels[2], t.axis_labels[0], t.axis_labels[1])
        return Tensor(dims, t.field, ents, shape=shape, axis_labels=labels)
    if which == "swap":
        if t.shape is None:
            raise ShapeUnknown("swap rotation needs matmul shape metadata")
        n, m, d = t.shape
        new = MatMulShape(m, n, d)
        ents = {}
        for (a, b, c), coeff in t.entries.items():
            i, j = divmod(a, m)
            k, i2 = divmod(c, n)
            j2, k2 = divmod(b, d)
            # old a=(i,j), b=(j,k), c=(k,i); new roles: a'=(j,i), b'=(i,k), c'=(k,j).
            ents[(new.a_index(j, i), new.b_index(i2, k), new.c_index(k2, j2))] = coeff
        return Tensor(new.dims, t.field, ents, shape=new)
    raise ValueError(f"unknown rotation {which!r}")


def matmul_kron_maps(s1: MatMulShape, s2: MatMulShape):
    """Per-axis bijections sending kron(⟨s1⟩,⟨s2⟩) indices to ⟨s1∘s2⟩ indices."""
    comp = s1.compose(s2)

    def make(axis_dim2, split1, split2, idx_comp):
        def f(pair_idx):
            p1, p2 = divmod(pair_idx, axis_dim2)
            x1, y1 = split1(p1)
            x2, y2 = split2(p2)
            return idx_comp(x1, x2, y1, y2)
        return f

    map_a = make(
        s2.a_dim,
        lambda p: divmod(p, s1.m),
        lambda p: divmod(p, s2.m),
        lambda i1, i2, j1, j2: comp.a_index(i1 * s2.n + i2, j1 * s2.m + j2),
    )
    map_b = make(
        s2.b_dim,
        lambda p: divmod(p, s1.d),
        lambda p: divmod(p, s2.d),
        lambda j1, j2, k1, k2: comp.b_index(j1 * s2.m + j2, k1 * s2.d + k2),
    )
    map_c = make(
        s2.c_dim,
        lambda p: divmod(p, s1.n),
        lambda p: divmod(p, s2.n),
        lambda k1, k2, i1, i2: comp.c_index(k1 * s2.d + k2, i1 * s2.n + i2),
    )
    return map_a, map_b, map_c


def digits(index: int, base: int, length: int) -> tuple[int, ...]:
    """Fixed-length digit expansion, most significant first (kron order)."""
    out = []
    for _ in range(length):
        index, r = divmod(index, base)
        out.append(r)
    if index:
        raise DimMismatch(f"index too large for base {base}^{length}")
    return tuple(reversed(out))


def undigits(ds: Iterable[int], base: int) -> int:
    out = 0
    for d in ds:
        out = out * base + d
    return out
