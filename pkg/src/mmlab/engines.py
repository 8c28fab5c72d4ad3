"""Matrix-multiplication engines, exact and operation-counted.

All engines return the same product as the naive triple loop; they differ
in how the work is organized and therefore in the measured OpCount.  Sizes
must be exact powers of the base shape; counts are static (data
independent), so measured numbers can be compared against the closed-form
bounds in cost_models.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .bilinear import BilinearAlgorithm, CountedMatrix, naive_algorithm
from .errors import (
    DimMismatch,
    KTooSmall,
    NotDivisible,
    ShapeMismatch,
    ShapeUnknown,
    WitnessInvalid,
)
from .fields import Field
from .kron_eval import (
    OpCount,
    Stage,
    apply_stage,
    flatten_stage_product,
    kron_plan,
    stage_as_rectangular,
)
from .tensors import MatMulShape, copies, digits, is_zero_out_of, matmul_tensor, undigits


@dataclass(frozen=True)
class MatrixPair:
    lhs: tuple
    rhs: tuple
    field: Field

    def __init__(self, lhs, rhs, field):
        object.__setattr__(self, "lhs", tuple(tuple(row) for row in lhs))
        object.__setattr__(self, "rhs", tuple(tuple(row) for row in rhs))
        object.__setattr__(self, "field", field)
        if self.inner != len(self.rhs):
            raise ShapeMismatch(
                f"inner dims disagree: lhs is {self.n}x{self.inner}, rhs has {len(self.rhs)} rows")

    @property
    def n(self) -> int:
        return len(self.lhs)

    @property
    def inner(self) -> int:
        return len(self.lhs[0])

    @property
    def d(self) -> int:
        return len(self.rhs[0])


@dataclass
class MultiplyResult:
    product: list
    count: OpCount
    trace: list | None = None


def zero_matrix(field: Field, rows: int, cols: int) -> list:
    return [[field.zero] * cols for _ in range(rows)]


def multiply_naive(pair: MatrixPair) -> MultiplyResult:
    """Triple loop; the n·m·d scalar products are its elementwise stage."""
    f = pair.field
    n, m, d = pair.n, pair.inner, pair.d
    out = zero_matrix(f, n, d)
    for i in range(n):
        row = pair.lhs[i]
        for k in range(d):
            acc = f.mul(row[0], pair.rhs[0][k])
            for j in range(1, m):
                acc = f.add(acc, f.mul(row[j], pair.rhs[j][k]))
            out[i][k] = acc
    return MultiplyResult(out, OpCount(n * d * (m - 1), 0, n * m * d))


def integer_root(value: int, k: int) -> int:
    root = round(value ** (1.0 / k))
    for cand in (root - 1, root, root + 1):
        if cand >= 1 and cand**k == value:
            return cand
    raise ShapeMismatch(f"{value} is not an exact {k}-th power")


def flatten_a_kron(a, shape: MatMulShape, k: int) -> list:
    """n^k×m^k matrix to the kron-ordered a-variable vector."""
    nm = shape.n * shape.m
    out = [None] * (nm**k)
    for big_i, row in enumerate(a):
        di = digits(big_i, shape.n, k)
        for big_j, v in enumerate(row):
            dj = digits(big_j, shape.m, k)
            out[undigits((x * shape.m + y for x, y in zip(di, dj)), nm)] = v
    return out


def flatten_b_kron(b, shape: MatMulShape, k: int) -> list:
    md = shape.m * shape.d
    out = [None] * (md**k)
    for big_j, row in enumerate(b):
        dj = digits(big_j, shape.m, k)
        for big_k, v in enumerate(row):
            dk = digits(big_k, shape.d, k)
            out[undigits((x * shape.d + y for x, y in zip(dj, dk)), md)] = v
    return out


def unflatten_c_kron(v: list, shape: MatMulShape, k: int, field: Field) -> list:
    """Kron-ordered c-variable vector back to the n^k×d^k product matrix."""
    dn = shape.d * shape.n
    out = zero_matrix(field, shape.n**k, shape.d**k)
    for idx, val in enumerate(v):
        dc = digits(idx, dn, k)
        big_k = undigits((c // shape.n for c in dc), shape.d)
        big_i = undigits((c % shape.n for c in dc), shape.n)
        out[big_i][big_k] = val
    return out


def multiply_recursive(algo: BilinearAlgorithm, pair: MatrixPair, k: int,
                       order: str = "last_axis_first") -> MultiplyResult:
    """Evaluate algo^{⊗k} through staged Kronecker plans."""
    if algo.shape is None:
        raise ShapeUnknown("recursive engine needs the base matmul shape")
    algo.field.check_same(pair.field)
    n, m, d = algo.shape
    if (pair.n, pair.inner, pair.d) != (n**k, m**k, d**k):
        raise ShapeMismatch(
            f"pair dims {(pair.n, pair.inner, pair.d)} are not {algo.shape}^{k}")
    f = algo.field
    trace = []
    count = OpCount()

    def run(matrix: CountedMatrix, name: str, vec: list) -> list:
        nonlocal count
        for i, stage in enumerate(kron_plan(matrix, k, order).stages):
            vec, c = apply_stage(stage, vec)
            count = count + c
            trace.append((name, i + 1, stage.block_count, c))
        return vec

    ex = run(algo.enc_x, "enc_x", flatten_a_kron(pair.lhs, algo.shape, k))
    ey = run(algo.enc_y, "enc_y", flatten_b_kron(pair.rhs, algo.shape, k))
    prods = [f.mul(x, y) for x, y in zip(ex, ey)]
    count = count + OpCount(0, 0, algo.rank**k)
    cz = run(algo.dec_z, "dec_z", prods)
    return MultiplyResult(unflatten_c_kron(cz, algo.shape, k, f), count, trace)


def block_extend(pair: MatrixPair, base: MatMulShape) -> list[MatrixPair]:
    """Split a (n·n′, m·m′, d·d′) problem into n′·m′·d′ base-shaped problems.

    Ordering is (row block, col block, inner block) with the inner block
    fastest; partial products sharing (row, col) must be summed by the
    caller, costing (m′−1)·n·d additions per assembled block.
    """
    n, m, d = base
    big_n, big_m, big_d = pair.n, pair.inner, pair.d
    if big_n % n or big_m % m or big_d % d:
        raise NotDivisible(f"{(big_n, big_m, big_d)} not divisible by {base}")
    fn, fm, fd = big_n // n, big_m // m, big_d // d
    out = []
    for rb in range(fn):
        for cb in range(fd):
            for ib in range(fm):
                lhs = [pair.lhs[rb * n + i][ib * m:(ib + 1) * m] for i in range(n)]
                rhs = [pair.rhs[ib * m + j][cb * d:(cb + 1) * d] for j in range(m)]
                out.append(MatrixPair(lhs, rhs, pair.field))
    return out


def multiply_blocked(pair: MatrixPair, base: MatMulShape, engine) -> MultiplyResult:
    """block_extend, run the engine per block, and sum/assemble partials."""
    n, m, d = base
    fn, fm, fd = pair.n // n, pair.inner // m, pair.d // d
    subs = block_extend(pair, base)
    f = pair.field
    out = zero_matrix(f, pair.n, pair.d)
    count = OpCount()
    pos = 0
    for rb in range(fn):
        for cb in range(fd):
            acc = None
            for _ in range(fm):
                res = engine(subs[pos])
                pos += 1
                count = count + res.count
                if acc is None:
                    acc = [row[:] for row in res.product]
                else:
                    for i in range(n):
                        for kk in range(d):
                            acc[i][kk] = f.add(acc[i][kk], res.product[i][kk])
                    count = count + OpCount(n * d, 0, 0)
            for i in range(n):
                for kk in range(d):
                    out[rb * n + i][cb * d + kk] = acc[i][kk]
    return MultiplyResult(out, count)


def _default_rect_backend(pair: MatrixPair) -> MultiplyResult:
    # Column split plus one-level recursion with the rank-nmd algorithm;
    # counts coincide with multiply_naive's.
    base = MatMulShape(pair.n, pair.inner, 1)
    algo = naive_algorithm(base, pair.field)
    return multiply_blocked(pair, base, lambda p: multiply_recursive(algo, p, 1))


def _axis_swap(v: list, a: int, mid: int, b: int) -> list:
    """Reorder (α, c, β) flattening to (α, β, c)."""
    out = [None] * len(v)
    for alpha in range(a):
        for c in range(mid):
            for beta in range(b):
                out[(alpha * b + beta) * mid + c] = v[(alpha * mid + c) * b + beta]
    return out


def _axis_unswap(v: list, a: int, mid: int, b: int) -> list:
    """Reorder (α, β, r) flattening back to (α, r, β)."""
    out = [None] * len(v)
    for alpha in range(a):
        for beta in range(b):
            for r in range(mid):
                out[(alpha * mid + r) * b + beta] = v[(alpha * b + beta) * mid + r]
    return out


def _stage_via_rect(stage: Stage, v: list, backend) -> tuple[list, OpCount, tuple]:
    """Run I_a ⊗ M ⊗ I_b as one rectangular product of width a·b."""
    m = stage.core
    a, b = stage.left, stage.right
    vp = _axis_swap(v, a, m.cols, b) if b > 1 else v
    wide = Stage(a * b, m, 1)
    core, mat = stage_as_rectangular(wide, vp)
    res = backend(MatrixPair(core.to_dense(), mat, m.field))
    flat = flatten_stage_product(wide, res.product)
    out = _axis_unswap(flat, a, m.rows, b) if b > 1 else flat
    return out, res.count, (m.rows, m.cols, a * b)


def multiply_via_rect(algo: BilinearAlgorithm, pair: MatrixPair, k: int,
                      rect_backend=None, order: str = "last_axis_first") -> MultiplyResult:
    """Square-from-rectangular reduction.

    With the default (reversed-factor) order, each of the k encoding stages
    is a single (t, n², n^{2(k-i)}·t^{i-1}) multiplication and each decoding
    stage is (n², t, t^{k-i}·n^{2(i-1)}).  The other stage order visits the
    same widths in reverse and costs the same.
    """
    if algo.shape is None:
        raise ShapeUnknown("rectangular engine needs the base matmul shape")
    n, m, d = algo.shape
    if not (n == m == d):
        raise ShapeMismatch("rectangular reduction needs a square base shape")
    if k < 2:
        raise ShapeMismatch("rectangular reduction needs k >= 2")
    algo.field.check_same(pair.field)
    if (pair.n, pair.inner, pair.d) != (n**k, n**k, n**k):
        raise ShapeMismatch(f"pair dims are not {algo.shape}^{k}")
    backend = rect_backend or _default_rect_backend
    f = algo.field
    t = algo.rank
    count = OpCount()
    trace = []

    def run(matrix: CountedMatrix, name: str, vec: list) -> list:
        nonlocal count
        for i, stage in enumerate(kron_plan(matrix, k, order).stages):
            vec, c, shape3 = _stage_via_rect(stage, vec, backend)
            count = count + c
            trace.append((name, i + 1, shape3, c))
        return vec

    ex = run(algo.enc_x, "enc_x", flatten_a_kron(pair.lhs, algo.shape, k))
    ey = run(algo.enc_y, "enc_y", flatten_b_kron(pair.rhs, algo.shape, k))
    prods = [f.mul(x, y) for x, y in zip(ex, ey)]
    count = count + OpCount(0, 0, t**k)
    cz = run(algo.dec_z, "dec_z", prods)
    return MultiplyResult(unflatten_c_kron(cz, algo.shape, k, f), count, trace)


def enclosing_power(shape: MatMulShape, dims: tuple[int, int, int]) -> int:
    """Smallest k with shape^k ≥ dims on every axis."""
    k = 0
    for base, want in zip(shape, dims):
        if want < 1:
            raise ShapeMismatch("dims must be positive")
        if base == 1:
            if want != 1:
                raise ShapeMismatch(f"axis of size {want} cannot grow from base 1")
            continue
        kk = 0
        cur = 1
        while cur < want:
            cur *= base
            kk += 1
        k = max(k, kk)
    return max(k, 1)


def pad_pair(pair: MatrixPair, shape: MatMulShape, k: int) -> MatrixPair:
    """Zero-pad a pair up to (n^k, m^k, d^k); crop the product afterwards.

    Padding with zeros never changes the top-left block of the product, so
    engines can keep their exact-power precondition.
    """
    n, m, d = shape.n**k, shape.m**k, shape.d**k
    if pair.n > n or pair.inner > m or pair.d > d:
        raise ShapeMismatch(f"pair exceeds {shape}^{k}")
    f = pair.field
    lhs = [[pair.lhs[i][j] if i < pair.n and j < pair.inner else f.zero
            for j in range(m)] for i in range(n)]
    rhs = [[pair.rhs[i][j] if i < pair.inner and j < pair.d else f.zero
            for j in range(d)] for i in range(m)]
    return MatrixPair(lhs, rhs, f)


def crop_product(product: list, rows: int, cols: int) -> list:
    return [list(product[i][:cols]) for i in range(rows)]


def _submatrix(mat, r0: int, c0: int, rows: int, cols: int) -> list:
    return [list(mat[r0 + i][c0:c0 + cols]) for i in range(rows)]


def _combine_blocks(items, blocks: dict, field: Field, rows: int, cols: int):
    """Σ coeff·block over one sparse matrix row; None means the zero block."""
    acc = None
    count = OpCount()
    size = rows * cols
    for col, coeff in items:
        blk = blocks.get(col)
        if blk is None:
            continue
        if field.is_pm_one(coeff):
            if coeff == field.one:
                term = blk
            else:
                term = [[field.neg(v) for v in row] for row in blk]
        else:
            term = [[field.mul(coeff, v) for v in row] for row in blk]
            count = count + OpCount(0, size, 0)
        if acc is None:
            acc = [row[:] for row in term]
        else:
            for i in range(rows):
                arow, trow = acc[i], term[i]
                for j in range(cols):
                    arow[j] = field.add(arow[j], trow[j])
            count = count + OpCount(size, 0, 0)
    return acc, count


def _witness_shapes(bsum, witness, pairs, k):
    keep_a, keep_b, keep_c = witness
    h = len(pairs)
    if h == 0:
        raise ShapeMismatch("need at least one pair")
    dims = (pairs[0].n, pairs[0].inner, pairs[0].d)
    for p in pairs:
        if (p.n, p.inner, p.d) != dims:
            raise ShapeMismatch("pairs have mixed shapes")
    n = integer_root(dims[0], k)
    m = integer_root(dims[1], k)
    d = integer_root(dims[2], k)
    if (len(keep_a), len(keep_b), len(keep_c)) != (h * n * m, h * m * d, h * d * n):
        raise WitnessInvalid(
            f"witness sizes {tuple(len(w) for w in witness)} do not match "
            f"{h} copies of {MatMulShape(n, m, d)}")
    return MatMulShape(n, m, d), h


def check_copies_witness(bsum: BilinearAlgorithm, witness, shape: MatMulShape, h: int):
    target = copies(h, matmul_tensor(shape, bsum.field))
    if not is_zero_out_of(target, bsum.computed_tensor(), witness, ordered=True):
        raise WitnessInvalid(
            f"witness does not expose {h} disjoint copies of {shape}")


def multiply_simultaneous(bsum: BilinearAlgorithm, witness, pairs: list[MatrixPair],
                          k: int, check: bool = True) -> list[MultiplyResult]:
    """Multiply H independent pairs at once through a sum-of-tensors algorithm.

    witness = ordered (keep_a, keep_b, keep_c) index lists proving that
    zeroing bsum's tensor leaves H disjoint copies of ⟨n,m,d⟩, copy-major
    with base-shape variable order inside each copy.  The H recursion trees
    share the rank-t elementwise stage, so products cost (t/H)^k·H overall.
    """
    shape, h = _witness_shapes(bsum, witness, pairs, k)
    if check:
        check_copies_witness(bsum, witness, shape, h)
        hyp = bsum.rank / h >= 2 * max(shape.n * shape.m, shape.m * shape.d,
                                       shape.n * shape.d)
        if not hyp:
            warnings.warn(
                "t/H < 2·max(nm, md, nd): products stay exact but the "
                "closed-form cost bound is not guaranteed", stacklevel=2)
    for p in pairs:
        bsum.field.check_same(p.field)
    products, count = _sim_level(bsum, witness, shape, h, list(pairs), k)
    results = [MultiplyResult(prod, OpCount()) for prod in products]
    # The shared count is attached to the first result; the work is joint.
    results[0].count = count
    return results


def _sim_level(bsum, witness, shape, h, pairs, level):
    f = bsum.field
    keep_a, keep_b, keep_c = witness
    n, m, d = shape
    if level == 0:
        prods = [[[f.mul(p.lhs[0][0], p.rhs[0][0])]] for p in pairs]
        return prods, OpCount(0, 0, h)
    nm, md, dn = n * m, m * d, d * n
    br, bc = n ** (level - 1), m ** (level - 1)
    qr, qc = m ** (level - 1), d ** (level - 1)
    xblocks: dict[int, list] = {}
    yblocks: dict[int, list] = {}
    for idx, p in enumerate(pairs):
        for i in range(n):
            for j in range(m):
                xblocks[keep_a[idx * nm + shape.a_index(i, j)]] = _submatrix(
                    p.lhs, i * br, j * bc, br, bc)
        for j in range(m):
            for kk in range(d):
                yblocks[keep_b[idx * md + shape.b_index(j, kk)]] = _submatrix(
                    p.rhs, j * qr, kk * qc, qr, qc)
    count = OpCount()
    sub_pairs = []
    x_rows = bsum.enc_x.rows_map()
    y_rows = bsum.enc_y.rows_map()
    for ell in range(bsum.rank):
        xb, c1 = _combine_blocks(x_rows.get(ell, ()), xblocks, f, br, bc)
        yb, c2 = _combine_blocks(y_rows.get(ell, ()), yblocks, f, qr, qc)
        count = count + c1 + c2
        if xb is None:
            xb = zero_matrix(f, br, bc)
        if yb is None:
            yb = zero_matrix(f, qr, qc)
        sub_pairs.append(MatrixPair(xb, yb, f))
    prods: list = [None] * bsum.rank
    full = bsum.rank // h
    for b in range(full):
        batch = sub_pairs[b * h:(b + 1) * h]
        got, c = _sim_level(bsum, witness, shape, h, batch, level - 1)
        count = count + c
        for off, blk in enumerate(got):
            prods[b * h + off] = blk
    for ell in range(full * h, bsum.rank):
        res = multiply_naive(sub_pairs[ell])
        prods[ell] = res.product
        count = count + res.count
    prod_blocks = {ell: prods[ell] for ell in range(bsum.rank)}
    z_rows = bsum.dec_z.rows_map()
    out = []
    for idx in range(h):
        cmat = zero_matrix(f, n**level, d**level)
        for kk in range(d):
            for i in range(n):
                row = keep_c[idx * dn + shape.c_index(kk, i)]
                blk, c3 = _combine_blocks(z_rows.get(row, ()), prod_blocks, f, br, qc)
                count = count + c3
                if blk is None:
                    blk = zero_matrix(f, br, qc)
                for rr in range(br):
                    for cc in range(qc):
                        cmat[i * br + rr][kk * qc + cc] = blk[rr][cc]
        out.append(cmat)
    return out, count


def bootstrap_levels(r: int, h: int) -> int:
    """⌈log_r H⌉: recursion depth needed to spawn at least H subproblems."""
    if h < 1:
        raise ValueError("need H >= 1")
    e = 0
    have = 1
    while have < h:
        have *= r
        e += 1
    return e


def the_algorithm(b_small: BilinearAlgorithm, bsum: BilinearAlgorithm, witness,
                  pair: MatrixPair, k: int, check: bool = True) -> MultiplyResult:
    """Bootstrap with b_small until ≥ H subproblems exist, then batch them
    through multiply_simultaneous; the last partial batch is padded with
    zero pairs (the cost bound carries the matching ⌈r^e/H⌉ factor).
    """
    if b_small.shape is None:
        raise ShapeUnknown("bootstrap algorithm needs the base matmul shape")
    shape = b_small.shape
    n, m, d = shape
    keep_a = witness[0]
    if len(keep_a) % (n * m):
        raise WitnessInvalid("witness a-size is not a multiple of n·m")
    h = len(keep_a) // (n * m)
    r = b_small.rank
    e = bootstrap_levels(r, h)
    if k <= e:
        raise KTooSmall(f"need k > ⌈log_r H⌉ = {e}, got k = {k}")
    if e == 0:
        return multiply_recursive(b_small, pair, k)
    f = b_small.field
    f.check_same(bsum.field)
    f.check_same(pair.field)
    if (pair.n, pair.inner, pair.d) != (n**k, m**k, d**k):
        raise ShapeMismatch(f"pair dims are not {shape}^{k}")
    if check:
        if (len(witness[1]), len(witness[2])) != (h * m * d, h * d * n):
            raise WitnessInvalid("witness sizes do not match H copies of the base shape")
        check_copies_witness(bsum, witness, shape, h)

    count = OpCount()
    x_rows = b_small.enc_x.rows_map()
    y_rows = b_small.enc_y.rows_map()
    z_rows = b_small.dec_z.rows_map()

    # Forward pass: level j turns each pending pair into r smaller pairs.
    levels = [[pair]]
    for j in range(1, e + 1):
        br, bc = n ** (k - j), m ** (k - j)
        qr, qc = m ** (k - j), d ** (k - j)
        nxt = []
        for p in levels[-1]:
            xb = {shape.a_index(i, jj): _submatrix(p.lhs, i * br, jj * bc, br, bc)
                  for i in range(n) for jj in range(m)}
            yb = {shape.b_index(jj, kk): _submatrix(p.rhs, jj * qr, kk * qc, qr, qc)
                  for jj in range(m) for kk in range(d)}
            for ell in range(r):
                xe, c1 = _combine_blocks(x_rows.get(ell, ()), xb, f, br, bc)
                ye, c2 = _combine_blocks(y_rows.get(ell, ()), yb, f, qr, qc)
                count = count + c1 + c2
                nxt.append(MatrixPair(xe or zero_matrix(f, br, bc),
                                      ye or zero_matrix(f, qr, qc), f))
        levels.append(nxt)

    leaves = levels[-1]
    zero_pair = MatrixPair(zero_matrix(f, n ** (k - e), m ** (k - e)),
                           zero_matrix(f, m ** (k - e), d ** (k - e)), f)
    padded = list(leaves) + [zero_pair] * ((-len(leaves)) % h)
    prods = []
    for b in range(len(padded) // h):
        batch = padded[b * h:(b + 1) * h]
        results = multiply_simultaneous(bsum, witness, batch, k - e, check=False)
        count = count + results[0].count
        prods.extend(res.product for res in results)
    prods = prods[:len(leaves)]

    # Backward pass: decode r-chunks of products into their parent product.
    for j in range(e, 0, -1):
        br, qc = n ** (k - j), d ** (k - j)
        parents = []
        for p0 in range(0, len(prods), r):
            chunk = {ell: prods[p0 + ell] for ell in range(r)}
            cmat = zero_matrix(f, n ** (k - j + 1), d ** (k - j + 1))
            for kk in range(d):
                for i in range(n):
                    blk, c3 = _combine_blocks(
                        z_rows.get(shape.c_index(kk, i), ()), chunk, f, br, qc)
                    count = count + c3
                    if blk is None:
                        blk = zero_matrix(f, br, qc)
                    for rr in range(br):
                        for cc in range(qc):
                            cmat[i * br + rr][kk * qc + cc] = blk[rr][cc]
            parents.append(cmat)
        prods = parents

    trace = [("bootstrap_levels", e), ("batches", (len(leaves) + h - 1) // h)]
    return MultiplyResult(prods[0], count, trace)


def schonhage_rank_bound(h: int, r: int, s: int) -> int:
    """H·⌈r/H⌉^s: products for the s-th power when H disjoint copies cost r.

    Splitting the r products into H groups of ⌈r/H⌉ lets each copy recurse
    independently, so doubling s multiplies the per-copy budget, not the
    copy count.
    """
    if h < 1 or r < 1 or s < 0:
        raise ValueError("need H >= 1, r >= 1, s >= 0")
    per_copy = -(-r // h)
    return h * per_copy**s
