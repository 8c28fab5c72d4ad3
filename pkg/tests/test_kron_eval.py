import random
from fractions import Fraction

import pytest

from mmlab.bilinear import CountedMatrix, strassen
from mmlab.errors import DimMismatch, HypothesisViolated, ShapeMismatch
from mmlab.fields import PrimeField, Rationals
from mmlab.kron_eval import (
    OpCount,
    Stage,
    apply_plan,
    apply_stage,
    flatten_stage_product,
    geometric_stage_sum,
    kron_plan,
    kron_power_bound,
    matvec_counted,
    stage_as_rectangular,
    static_cost,
    transpose_cost,
)

QQ = Rationals()
F101 = PrimeField(101)


def dense_kron_power(m, k):
    out = m
    for _ in range(k - 1):
        out = out.kron(m)
    return out


def random_counted(rng, field, rows, cols, density=0.7):
    ents = {}
    for r in range(rows):
        for c in range(cols):
            if rng.random() < density:
                ents[(r, c)] = field.random(rng)
    m = CountedMatrix(rows, cols, field, ents)
    # Retry rather than return a degenerate all-zero matrix.
    return m if m.nnz() else random_counted(rng, field, rows, cols, density)


def test_opcount_algebra():
    a = OpCount(1, 2, 3)
    b = OpCount(4, 5, 6)
    assert (a + b).total() == 21
    assert a.scale(3) == OpCount(3, 6, 9)
    assert a.leq(b) and not b.leq(a)


def test_static_cost_identity_is_free():
    assert static_cost(CountedMatrix.identity(5, QQ)) == OpCount(0, 0, 0)


def test_static_cost_strassen_encoders():
    # 12 nonzeros across 7 rows, all coefficients ±1.
    b = strassen()
    assert static_cost(b.enc_x) == OpCount(5, 0, 0)
    assert static_cost(b.enc_y) == OpCount(5, 0, 0)
    assert static_cost(b.dec_z) == OpCount(8, 0, 0)


def test_static_cost_charges_general_coefficients():
    m = CountedMatrix.from_dense(QQ, [[2, 1]])
    out, count = matvec_counted(m, [Fraction(3), Fraction(4)])
    assert out == [Fraction(10)]
    assert count == OpCount(1, 1, 0)


def test_kron_plan_k1():
    m = CountedMatrix.from_dense(QQ, [[1, 1], [0, 1]])
    plan = kron_plan(m, 1)
    assert len(plan.stages) == 1
    assert plan.stages[0] == Stage(1, m, 1)


def test_geometric_stage_sum_closed_forms():
    assert geometric_stage_sum(7, 4, 3) == (7**3 - 4**3) // 3  # 93
    assert geometric_stage_sum(3, 3, 4) == 4 * 27


def test_strassen_encoder_power_bound():
    # T(M)=5 additions, so the k=3 bound is 5·(7³−4³)/(7−4) = 465.
    b = strassen()
    assert kron_power_bound(b.enc_x, 3).additions == 465


def test_apply_plan_matches_dense_oracle():
    rng = random.Random(101)
    cases = 0
    for field in (QQ, F101):
        for _ in range(25):
            rows, cols = rng.randint(1, 3), rng.randint(1, 3)
            k = rng.randint(1, 4)
            if cols**k > 100:
                k = 2
            m = random_counted(rng, field, rows, cols)
            v = [field.random(rng) for _ in range(cols**k)]
            plan = kron_plan(m, k)
            got, measured = apply_plan(plan, v)
            assert got == dense_kron_power(m, k).matvec(v)
            assert measured.leq(kron_power_bound(m, k))
            cases += 1
    assert cases == 50


def test_plan_orders_agree_and_cost_identical():
    rng = random.Random(7)
    for _ in range(10):
        m = random_counted(rng, QQ, 3, 2)
        v = [QQ.random(rng) for _ in range(2**3)]
        out1, c1 = apply_plan(kron_plan(m, 3, "last_axis_first"), v)
        out2, c2 = apply_plan(kron_plan(m, 3, "first_axis_first"), v)
        assert out1 == out2
        assert c1 == c2
    with pytest.raises(ValueError):
        kron_plan(m, 2, "zigzag")


def test_apply_plan_zero_vector():
    m = CountedMatrix.from_dense(QQ, [[1, -1], [2, 0], [0, 1]])
    plan = kron_plan(m, 2)
    out, _ = apply_plan(plan, [Fraction(0)] * 4)
    assert out == [Fraction(0)] * 9


def test_stage_as_rectangular_both_sides():
    rng = random.Random(13)
    m = random_counted(rng, QQ, 3, 2)
    for stage in (Stage(1, m, 4), Stage(4, m, 1)):
        v = [QQ.random(rng) for _ in range(stage.in_len)]
        expected, _ = apply_stage(stage, v)
        core, mat = stage_as_rectangular(stage, v)
        rows = len(mat)
        width = len(mat[0])
        product = [[QQ.zero] * width for _ in range(core.rows)]
        for (r, c), coeff in core.entries.items():
            for w in range(width):
                product[r][w] += coeff * mat[c][w]
        assert flatten_stage_product(stage, product) == expected
        assert rows == core.cols
    with pytest.raises(ShapeMismatch):
        stage_as_rectangular(Stage(2, m, 2), [Fraction(0)] * 8)


def test_stage_with_b1_is_plain_matvec():
    m = CountedMatrix.from_dense(QQ, [[1, 2], [3, 4]])
    v = [Fraction(1), Fraction(5)]
    core, mat = stage_as_rectangular(Stage(1, m, 1), v)
    assert [row[0] for row in mat] == v
    out, _ = apply_stage(Stage(1, m, 1), v)
    assert out == m.matvec(v)


def test_transpose_cost_identity_exact():
    # With no zero row/column: adds(M) = nnz − rows and adds(Mᵀ) = nnz − cols,
    # so the bound reproduces the naive cost exactly.
    rng = random.Random(29)
    checked = 0
    while checked < 20:
        m = random_counted(rng, QQ, rng.randint(1, 4), rng.randint(1, 4))
        if m.has_zero_row() or m.has_zero_col():
            continue
        bound = transpose_cost(m)
        direct = static_cost(m)
        assert bound.additions == direct.additions
        assert bound.multiplications == direct.multiplications
        checked += 1


def test_transpose_cost_permutation_matrix():
    perm = CountedMatrix(3, 3, QQ, {(0, 2): Fraction(1), (1, 0): Fraction(1),
                                    (2, 1): Fraction(1)})
    assert transpose_cost(perm) == OpCount(0, 0, 0)


def test_transpose_cost_strassen_decoder():
    b = strassen()
    # dec_z is 4×7 with 12 nonzeros: transpose costs 12−7=5, plus 7−4.
    assert transpose_cost(b.dec_z) == OpCount(8, 0, 0)


def test_transpose_cost_rejects_zero_column():
    m = CountedMatrix(2, 3, QQ, {(0, 0): Fraction(1), (1, 1): Fraction(1)})
    with pytest.raises(HypothesisViolated):
        transpose_cost(m)


def test_matvec_counted_dim_check():
    m = CountedMatrix.identity(2, QQ)
    with pytest.raises(DimMismatch):
        matvec_counted(m, [Fraction(1)])
