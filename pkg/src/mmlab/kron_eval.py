"""Counted evaluation of Kronecker-power linear maps.

The cost model is the naive row-wise one: applying a sparse matrix to a
vector costs max(nnz(row)-1, 0) additions per row, plus one multiplication
per coefficient outside {0, 1, -1}.  This is static (data-independent) and
upper-bounds any smarter linear circuit, and every inequality asserted
downstream holds verbatim under it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bilinear import CountedMatrix
from .errors import DimMismatch, HypothesisViolated, ShapeMismatch


@dataclass(frozen=True)
class OpCount:
    additions: int = 0
    multiplications: int = 0
    elementwise_products: int = 0

    def total(self) -> int:
        return self.additions + self.multiplications + self.elementwise_products

    def __add__(self, other: "OpCount") -> "OpCount":
        return OpCount(
            self.additions + other.additions,
            self.multiplications + other.multiplications,
            self.elementwise_products + other.elementwise_products,
        )

    def scale(self, k: int) -> "OpCount":
        return OpCount(self.additions * k, self.multiplications * k,
                       self.elementwise_products * k)

    def leq(self, other: "OpCount") -> bool:
        return (
            self.additions <= other.additions
            and self.multiplications <= other.multiplications
            and self.elementwise_products <= other.elementwise_products
        )


def static_cost(m: CountedMatrix) -> OpCount:
    """Cost of one matrix-vector product under the naive model."""
    adds = sum(max(len(items) - 1, 0) for items in m.rows_map().values())
    mults = sum(1 for v in m.entries.values() if not m.field.is_pm_one(v))
    return OpCount(adds, mults, 0)


def matvec_counted(m: CountedMatrix, v: list) -> tuple[list, OpCount]:
    if len(v) != m.cols:
        raise DimMismatch(f"vector length {len(v)} != cols {m.cols}")
    return m.matvec(v), static_cost(m)


@dataclass(frozen=True)
class Stage:
    """One I_left ⊗ M ⊗ I_right factor."""

    left: int
    core: CountedMatrix
    right: int

    @property
    def in_len(self) -> int:
        return self.left * self.core.cols * self.right

    @property
    def out_len(self) -> int:
        return self.left * self.core.rows * self.right

    @property
    def block_count(self) -> int:
        return self.left * self.right


@dataclass(frozen=True)
class EvalPlan:
    """Ordered stages whose composition is core^{⊗k}; stages[0] runs first."""

    stages: tuple[Stage, ...]

    def __post_init__(self):
        for s1, s2 in zip(self.stages, self.stages[1:]):
            if s1.out_len != s2.in_len:
                raise DimMismatch("stage dims do not chain")

    @property
    def in_len(self) -> int:
        return self.stages[0].in_len

    @property
    def out_len(self) -> int:
        return self.stages[-1].out_len

    def predicted(self) -> OpCount:
        out = OpCount()
        for s in self.stages:
            out = out + static_cost(s.core).scale(s.block_count)
        return out


def kron_plan(m: CountedMatrix, k: int, order: str = "last_axis_first") -> EvalPlan:
    """Mixed-product factorization of M^{⊗k} into k sparse stages.

    last_axis_first: stage i (1-based, run first) is I_{cols^{k-i}} ⊗ M ⊗
    I_{rows^{i-1}}.  first_axis_first: stage j is I_{rows^{j-1}} ⊗ M ⊗
    I_{cols^{k-j}}.  Both compose to exactly M^{⊗k} and carry identical
    static cost; only the identity-block placement differs.
    """
    if k < 1:
        raise ValueError("need k >= 1")
    r, c = m.rows, m.cols
    if order == "last_axis_first":
        stages = tuple(Stage(c ** (k - i), m, r ** (i - 1)) for i in range(1, k + 1))
    elif order == "first_axis_first":
        stages = tuple(Stage(r ** (j - 1), m, c ** (k - j)) for j in range(1, k + 1))
    else:
        raise ValueError(f"unknown stage order {order!r}")
    return EvalPlan(stages)


def geometric_stage_sum(rows: int, cols: int, k: int) -> int:
    """Σ_{i=1..k} cols^{k-i}·rows^{i-1}; the closed forms of the power lemma."""
    if rows != cols:
        return (rows**k - cols**k) // (rows - cols)
    return k * cols ** (k - 1)


def kron_power_bound(m: CountedMatrix, k: int) -> OpCount:
    """T(M)·(rows^k − cols^k)/(rows − cols), componentwise (k·cols^{k-1} if square)."""
    return static_cost(m).scale(geometric_stage_sum(m.rows, m.cols, k))


def apply_stage(stage: Stage, v: list) -> tuple[list, OpCount]:
    if len(v) != stage.in_len:
        raise DimMismatch(f"vector length {len(v)} != stage input {stage.in_len}")
    m, a, b = stage.core, stage.left, stage.right
    f = m.field
    out = [f.zero] * stage.out_len
    rows_map = m.rows_map()
    in_block, out_block = m.cols * b, m.rows * b
    for alpha in range(a):
        base_in, base_out = alpha * in_block, alpha * out_block
        for beta in range(b):
            for r, items in rows_map.items():
                acc = f.zero
                for c, coeff in items:
                    acc = f.add(acc, f.mul(coeff, v[base_in + c * b + beta]))
                out[base_out + r * b + beta] = acc
    return out, static_cost(m).scale(stage.block_count)


def apply_plan(plan: EvalPlan, v: list) -> tuple[list, OpCount]:
    count = OpCount()
    for stage in plan.stages:
        v, c = apply_stage(stage, v)
        count = count + c
    return v, count


def stage_as_rectangular(stage: Stage, v: list):
    """Reshape one pure-sided stage into a (core, matrix) product.

    For (1, M, b) the vector becomes the cols×b matrix V[c][β] = v[c·b+β];
    for (a, M, 1) it becomes cols×a with blocks as columns.  In either case
    core·V, re-flattened by flatten_stage_product, equals the stage output.
    """
    if stage.left != 1 and stage.right != 1:
        raise ShapeMismatch("stage has identity blocks on both sides")
    if len(v) != stage.in_len:
        raise ShapeMismatch(f"vector length {len(v)} != stage input {stage.in_len}")
    cols = stage.core.cols
    if stage.left == 1:
        b = stage.right
        mat = [[v[c * b + beta] for beta in range(b)] for c in range(cols)]
    else:
        a = stage.left
        mat = [[v[alpha * cols + c] for alpha in range(a)] for c in range(cols)]
    return stage.core, mat


def flatten_stage_product(stage: Stage, product: list[list]) -> list:
    """Inverse of the reshape: dense rows×width product back to a vector."""
    rows = stage.core.rows
    if stage.left == 1:
        b = stage.right
        return [product[r][beta] for r in range(rows) for beta in range(b)]
    a = stage.left
    return [product[r][alpha] for alpha in range(a) for r in range(rows)]


def transpose_cost(m: CountedMatrix) -> OpCount:
    """Bound for T(M) via the transpose identity T(M) = T(M^T) + cols − rows.

    Exact under the naive model when M has no zero row or column:
    adds(M) = nnz − rows and adds(M^T) = nnz − cols.
    """
    if m.has_zero_row() or m.has_zero_col():
        raise HypothesisViolated("transpose identity needs no zero row/column")
    base = static_cost(m.transpose())
    return OpCount(base.additions + m.cols - m.rows, base.multiplications, 0)
