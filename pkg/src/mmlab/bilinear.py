"""Bilinear algorithms: encoding/decoding matrix triples and their algebra.

A bilinear algorithm B = (enc_x, enc_y, dec_z) computes the tensor T when
for all (i,j,k):  Σ_ℓ enc_x[ℓ,i]·enc_y[ℓ,j]·dec_z[k,ℓ] = T[i,j,k].
enc_x and enc_y are t×|A| and t×|B|; dec_z is stored already transposed as
|C|×t so that decoding is a plain matrix-vector product.
"""

from __future__ import annotations

from .errors import DimMismatch, ShapeUnknown
from .fields import Field, Rationals
from .tensors import MatMulShape, Tensor, matmul_kron_maps, matmul_tensor, tensor_equal


class CountedMatrix:
    """Sparse exact matrix; the unit of cost accounting downstream."""

    __slots__ = ("rows", "cols", "field", "entries", "_row_cache")

    def __init__(self, rows: int, cols: int, field: Field, entries=None):
        if rows < 1 or cols < 1:
            raise DimMismatch(f"bad matrix dims {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self.field = field
        self.entries = {}
        for (r, c), v in (entries or {}).items():
            if not (0 <= r < rows and 0 <= c < cols):
                raise DimMismatch(f"entry ({r},{c}) outside {rows}x{cols}")
            if not field.is_zero(v):
                self.entries[(r, c)] = v
        self._row_cache = None

    @classmethod
    def from_dense(cls, field: Field, dense) -> "CountedMatrix":
        rows = len(dense)
        cols = len(dense[0]) if rows else 0
        ents = {}
        for r, row in enumerate(dense):
            if len(row) != cols:
                raise DimMismatch("ragged dense matrix")
            for c, v in enumerate(row):
                ents[(r, c)] = v if not isinstance(v, int) else field.of_int(v)
        return cls(rows, cols, field, ents)

    @classmethod
    def identity(cls, n: int, field: Field) -> "CountedMatrix":
        return cls(n, n, field, {(i, i): field.one for i in range(n)})

    def entry(self, r: int, c: int):
        return self.entries.get((r, c), self.field.zero)

    def rows_map(self) -> dict[int, list[tuple[int, object]]]:
        """row -> [(col, coeff), ...] with cols ascending; built once."""
        if self._row_cache is None:
            cache: dict[int, list] = {}
            for (r, c), v in sorted(self.entries.items()):
                cache.setdefault(r, []).append((c, v))
            self._row_cache = cache
        return self._row_cache

    def nnz(self) -> int:
        return len(self.entries)

    def row_nnz(self, r: int) -> int:
        return len(self.rows_map().get(r, ()))

    def to_dense(self):
        z = self.field.zero
        out = [[z] * self.cols for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def transpose(self) -> "CountedMatrix":
        return CountedMatrix(self.cols, self.rows, self.field,
                             {(c, r): v for (r, c), v in self.entries.items()})

    def scale(self, w) -> "CountedMatrix":
        ents = {rc: self.field.mul(v, w) for rc, v in self.entries.items()}
        return CountedMatrix(self.rows, self.cols, self.field, ents)

    def kron(self, other: "CountedMatrix") -> "CountedMatrix":
        self.field.check_same(other.field)
        ents = {}
        for (r1, c1), v1 in self.entries.items():
            for (r2, c2), v2 in other.entries.items():
                ents[(r1 * other.rows + r2, c1 * other.cols + c2)] = self.field.mul(v1, v2)
        return CountedMatrix(self.rows * other.rows, self.cols * other.cols,
                             self.field, ents)

    def matvec(self, v: list) -> list:
        """Exact product; the counting variant lives in kron_eval."""
        if len(v) != self.cols:
            raise DimMismatch(f"vector length {len(v)} != cols {self.cols}")
        f = self.field
        out = [f.zero] * self.rows
        for r, items in self.rows_map().items():
            acc = f.zero
            for c, coeff in items:
                acc = f.add(acc, f.mul(coeff, v[c]))
            out[r] = acc
        return out

    def matmul(self, other: "CountedMatrix") -> "CountedMatrix":
        self.field.check_same(other.field)
        if self.cols != other.rows:
            raise DimMismatch(f"{self.rows}x{self.cols} times {other.rows}x{other.cols}")
        f = self.field
        ents: dict[tuple[int, int], object] = {}
        other_rows = other.rows_map()
        for (r, c), v in self.entries.items():
            for c2, w in other_rows.get(c, ()):
                key = (r, c2)
                ents[key] = f.add(ents.get(key, f.zero), f.mul(v, w))
        return CountedMatrix(self.rows, other.cols, f, ents)

    def relabel_cols(self, sigma, new_cols: int | None = None) -> "CountedMatrix":
        """Apply a column bijection old->new (callable or dict)."""
        app = (lambda x: sigma[x]) if isinstance(sigma, dict) else sigma
        ents = {(r, app(c)): v for (r, c), v in self.entries.items()}
        if len(ents) != len(self.entries):
            raise DimMismatch("column relabel is not injective on the support")
        return CountedMatrix(self.rows, new_cols or self.cols, self.field, ents)

    def relabel_rows(self, sigma, new_rows: int | None = None) -> "CountedMatrix":
        app = (lambda x: sigma[x]) if isinstance(sigma, dict) else sigma
        ents = {(app(r), c): v for (r, c), v in self.entries.items()}
        if len(ents) != len(self.entries):
            raise DimMismatch("row relabel is not injective on the support")
        return CountedMatrix(new_rows or self.rows, self.cols, self.field, ents)

    def has_zero_row(self) -> bool:
        return len(self.rows_map()) < self.rows

    def has_zero_col(self) -> bool:
        return len({c for (_, c) in self.entries}) < self.cols

    def __eq__(self, other):
        return (
            isinstance(other, CountedMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.field == other.field
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.field, frozenset(self.entries.items())))

    def __repr__(self):
        return f"CountedMatrix({self.rows}x{self.cols}, nnz={self.nnz()})"


def vstack(mats: list[CountedMatrix]) -> CountedMatrix:
    if not mats:
        raise DimMismatch("vstack of nothing")
    cols, field = mats[0].cols, mats[0].field
    ents, off = {}, 0
    for m in mats:
        field.check_same(m.field)
        if m.cols != cols:
            raise DimMismatch("vstack column mismatch")
        for (r, c), v in m.entries.items():
            ents[(r + off, c)] = v
        off += m.rows
    return CountedMatrix(off, cols, field, ents)


def hstack(mats: list[CountedMatrix]) -> CountedMatrix:
    if not mats:
        raise DimMismatch("hstack of nothing")
    rows, field = mats[0].rows, mats[0].field
    ents, off = {}, 0
    for m in mats:
        field.check_same(m.field)
        if m.rows != rows:
            raise DimMismatch("hstack row mismatch")
        for (r, c), v in m.entries.items():
            ents[(r, c + off)] = v
        off += m.cols
    return CountedMatrix(rows, off, field, ents)


class BilinearAlgorithm:
    """enc_x: t×|A|, enc_y: t×|B|, dec_z: |C|×t; rank = t."""

    __slots__ = ("enc_x", "enc_y", "dec_z", "rank", "shape")

    def __init__(self, enc_x: CountedMatrix, enc_y: CountedMatrix,
                 dec_z: CountedMatrix, shape: MatMulShape | None = None):
        enc_x.field.check_same(enc_y.field)
        enc_x.field.check_same(dec_z.field)
        if enc_x.rows != enc_y.rows or dec_z.cols != enc_x.rows:
            raise DimMismatch(
                f"rank mismatch: enc_x {enc_x.rows}, enc_y {enc_y.rows}, dec_z cols {dec_z.cols}")
        if enc_x.rows < 1:
            raise DimMismatch("rank must be >= 1")
        self.enc_x = enc_x
        self.enc_y = enc_y
        self.dec_z = dec_z
        self.rank = enc_x.rows
        self.shape = shape

    @property
    def field(self) -> Field:
        return self.enc_x.field

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.enc_x.cols, self.enc_y.cols, self.dec_z.rows)

    def computed_tensor(self) -> Tensor:
        f = self.field
        ents: dict[tuple[int, int, int], object] = {}
        x_rows = self.enc_x.rows_map()
        y_rows = self.enc_y.rows_map()
        z_cols = self.dec_z.transpose().rows_map()
        for ell in range(self.rank):
            for i, xc in x_rows.get(ell, ()):
                for j, yc in y_rows.get(ell, ()):
                    xy = f.mul(xc, yc)
                    for k, zc in z_cols.get(ell, ()):
                        key = (i, j, k)
                        ents[key] = f.add(ents.get(key, f.zero), f.mul(xy, zc))
        return Tensor(self.dims, f, ents, shape=self.shape)

    def evaluate(self, a_vec: list, b_vec: list) -> list:
        """decode(encode(a) ⋆ encode(b)); exact, uncounted."""
        f = self.field
        ex = self.enc_x.matvec(a_vec)
        ey = self.enc_y.matvec(b_vec)
        prods = [f.mul(x, y) for x, y in zip(ex, ey)]
        return self.dec_z.matvec(prods)

    def scale_dec(self, w) -> "BilinearAlgorithm":
        """Same algorithm computing w·T (decoding matrix scaled by w)."""
        return BilinearAlgorithm(self.enc_x, self.enc_y, self.dec_z.scale(w),
                                 shape=self.shape)

    def __repr__(self):
        return f"BilinearAlgorithm(rank={self.rank}, dims={self.dims})"


def verify_computes(algo: BilinearAlgorithm, t: Tensor) -> bool:
    """Exact coefficient-by-coefficient check that algo computes t."""
    algo.field.check_same(t.field)
    if algo.dims != t.dims:
        raise DimMismatch(f"algorithm dims {algo.dims} vs tensor dims {t.dims}")
    return tensor_equal(algo.computed_tensor(), t)


def naive_algorithm(shape: MatMulShape, field: Field | None = None) -> BilinearAlgorithm:
    """Rank-nmd baseline: one elementwise product per scalar product term."""
    field = field or Rationals()
    n, m, d = shape
    one = field.one
    ex, ey, dz = {}, {}, {}
    ell = 0
    for i in range(n):
        for j in range(m):
            for k in range(d):
                ex[(ell, shape.a_index(i, j))] = one
                ey[(ell, shape.b_index(j, k))] = one
                dz[(shape.c_index(k, i), ell)] = one
                ell += 1
    t = n * m * d
    return BilinearAlgorithm(
        CountedMatrix(t, shape.a_dim, field, ex),
        CountedMatrix(t, shape.b_dim, field, ey),
        CountedMatrix(shape.c_dim, t, field, dz),
        shape=shape,
    )


# Strassen's rank-7 decomposition of <2,2,2>, row-major variable order
# (A11,A12,A21,A22) and (B11,B12,B21,B22).
_STRASSEN_ENC_X = (
    (1, 0, 0, 1),
    (0, 0, 1, 1),
    (1, 0, 0, 0),
    (0, 0, 0, 1),
    (1, 1, 0, 0),
    (-1, 0, 1, 0),
    (0, 1, 0, -1),
)
_STRASSEN_ENC_Y = (
    (1, 0, 0, 1),
    (1, 0, 0, 0),
    (0, 1, 0, -1),
    (-1, 0, 1, 0),
    (0, 0, 0, 1),
    (1, 1, 0, 0),
    (0, 0, 1, 1),
)
# Decoding rows give C11, C12, C21, C22 in terms of the seven products.
_STRASSEN_DEC_ROWMAJOR = (
    (1, 0, 0, 1, -1, 0, 1),
    (0, 0, 1, 0, 1, 0, 0),
    (0, 1, 0, 1, 0, 0, 0),
    (1, -1, 1, 0, 0, 1, 0),
)


def strassen(field: Field | None = None) -> BilinearAlgorithm:
    """The classical rank-7 algorithm for ⟨2,2,2⟩.

    The c-variable (k,i) convention stores output C^T row-major, so the
    decoding rows for C12 and C21 land at indices 2 and 1 respectively.
    """
    field = field or Rationals()
    shape = MatMulShape(2, 2, 2)
    dec_rows = [_STRASSEN_DEC_ROWMAJOR[i * 2 + k] for k in range(2) for i in range(2)]
    return BilinearAlgorithm(
        CountedMatrix.from_dense(field, _STRASSEN_ENC_X),
        CountedMatrix.from_dense(field, _STRASSEN_ENC_Y),
        CountedMatrix.from_dense(field, dec_rows),
        shape=shape,
    )


def tensor_product(b1: BilinearAlgorithm, b2: BilinearAlgorithm) -> BilinearAlgorithm:
    """Kronecker products of the matrices; ranks multiply.

    When both factors carry matmul shapes the variable axes are relabelled
    from kron-pair order into the composed shape's flattening, so a product
    of matmul algorithms is again a matmul algorithm verbatim.  The relabel
    is a pure permutation and does not change any operation count.
    """
    enc_x = b1.enc_x.kron(b2.enc_x)
    enc_y = b1.enc_y.kron(b2.enc_y)
    dec_z = b1.dec_z.kron(b2.dec_z)
    if b1.shape is None or b2.shape is None:
        return BilinearAlgorithm(enc_x, enc_y, dec_z)
    map_a, map_b, map_c = matmul_kron_maps(b1.shape, b2.shape)
    return BilinearAlgorithm(
        enc_x.relabel_cols(map_a),
        enc_y.relabel_cols(map_b),
        dec_z.relabel_rows(map_c),
        shape=b1.shape.compose(b2.shape),
    )


def algorithm_power(b: BilinearAlgorithm, k: int) -> BilinearAlgorithm:
    if k < 1:
        raise ValueError("need k >= 1")
    out = b
    for _ in range(k - 1):
        out = tensor_product(out, b)
    return out


def concat_algorithms(algos: list[BilinearAlgorithm], target_dims) -> BilinearAlgorithm:
    """Stack encodings by rows and decodings by columns: computes Σ_j T_j."""
    target_dims = tuple(target_dims)
    if not algos:
        raise DimMismatch("concat of nothing")
    for b in algos:
        if b.dims != target_dims:
            raise DimMismatch(f"algorithm dims {b.dims} != target {target_dims}")
    return BilinearAlgorithm(
        vstack([b.enc_x for b in algos]),
        vstack([b.enc_y for b in algos]),
        hstack([b.dec_z for b in algos]),
        shape=algos[0].shape if len(algos) == 1 else None,
    )


def blockdiag(mats: list[CountedMatrix]) -> CountedMatrix:
    if not mats:
        raise DimMismatch("blockdiag of nothing")
    field = mats[0].field
    ents, roff, coff = {}, 0, 0
    for m in mats:
        field.check_same(m.field)
        for (r, c), v in m.entries.items():
            ents[(roff + r, coff + c)] = v
        roff += m.rows
        coff += m.cols
    return CountedMatrix(roff, coff, field, ents)


def direct_sum_algorithms(algos: list[BilinearAlgorithm]) -> BilinearAlgorithm:
    """Block-diagonal stacking: computes the variable-disjoint sum ⊕_j T_j.

    Copy j's variables sit at offsets Σ_{i<j}|A_i| (resp. |B_i|, |C_i|), so
    for equal-shape inputs the identity witness (all indices, copy-major)
    exposes the copies.  Rank is additive; shape metadata does not survive.
    """
    if not algos:
        raise DimMismatch("direct sum of nothing")
    return BilinearAlgorithm(
        blockdiag([b.enc_x for b in algos]),
        blockdiag([b.enc_y for b in algos]),
        blockdiag([b.dec_z for b in algos]),
        shape=None,
    )


def rotate_algorithm(b: BilinearAlgorithm, which: str) -> BilinearAlgorithm:
    """Equal-rank algorithm for the rotated matmul tensor.

    "cyclic" sends ⟨n,m,d⟩ to ⟨d,n,m⟩ via (dec_z^T, enc_x, enc_y^T); the
    flattening conventions line up with no index rewriting.  "swap_ab"
    exchanges the roles of the two input matrices, landing on ⟨m,n,d⟩; all
    three axes are reindexed per the tensor_core swap bijections.
    """
    if b.shape is None:
        raise ShapeUnknown("rotation needs matmul shape metadata")
    n, m, d = b.shape
    if which == "cyclic":
        return BilinearAlgorithm(
            b.dec_z.transpose(), b.enc_x, b.enc_y.transpose(),
            shape=MatMulShape(d, n, m),
        )
    if which == "swap_ab":
        new = MatMulShape(m, n, d)

        def sig_a(a):
            i, j = divmod(a, m)
            return new.a_index(j, i)

        def sig_c_to_b(c):
            k, i = divmod(c, n)
            return new.b_index(i, k)

        def sig_b_to_c(bb):
            j, k = divmod(bb, d)
            return new.c_index(k, j)

        return BilinearAlgorithm(
            b.enc_x.relabel_cols(sig_a),
            b.dec_z.transpose().relabel_cols(sig_c_to_b, new.b_dim),
            b.enc_y.transpose().relabel_rows(sig_b_to_c, new.c_dim),
            shape=new,
        )
    raise ValueError(f"unknown rotation {which!r}")
