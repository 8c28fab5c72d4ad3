import random
from fractions import Fraction

import pytest

from mmlab.errors import DimMismatch, ShapeUnknown
from mmlab.fields import PrimeField, Rationals
from mmlab.tensors import (
    MatMulShape,
    Tensor,
    copies,
    digits,
    direct_sum,
    is_zero_out_of,
    kron,
    kron_power,
    matmul_kron_maps,
    matmul_tensor,
    relabel,
    rotate_tensor,
    tensor_equal,
    undigits,
    zero_out,
)

QQ = Rationals()


def random_matrix(rng, rows, cols):
    return [[Fraction(rng.randint(-5, 5)) for _ in range(cols)] for _ in range(rows)]


def trilinear_value(t, avec, bvec, cvec):
    acc = Fraction(0)
    for (i, j, k), coeff in t.entries.items():
        acc += coeff * avec[i] * bvec[j] * cvec[k]
    return acc


def test_matmul_tensor_trilinear_form_matches_products():
    # The form Σ T[a,b,c]·A_a·B_b·C_c must equal Σ_(i,k) (AB)_ik · C_(k,i).
    rng = random.Random(11)
    for n, m, d in ((2, 2, 2), (2, 3, 4), (1, 5, 2), (3, 1, 1)):
        shape = MatMulShape(n, m, d)
        t = matmul_tensor(shape)
        assert t.nnz() == n * m * d
        for _ in range(5):
            a = random_matrix(rng, n, m)
            b = random_matrix(rng, m, d)
            cw = random_matrix(rng, d, n)
            avec = [a[i][j] for i in range(n) for j in range(m)]
            bvec = [b[j][k] for j in range(m) for k in range(d)]
            cvec = [cw[k][i] for k in range(d) for i in range(n)]
            direct = sum(
                sum(a[i][j] * b[j][k] for j in range(m)) * cw[k][i]
                for i in range(n) for k in range(d)
            )
            assert trilinear_value(t, avec, bvec, cvec) == direct


def test_tensor_rejects_out_of_range_entries():
    with pytest.raises(DimMismatch):
        Tensor((2, 2, 2), QQ, {(0, 0, 5): Fraction(1)})


def test_tensor_add_scale():
    t = matmul_tensor(MatMulShape(2, 2, 2))
    z = t.add(t.scale(Fraction(-1)))
    assert z.nnz() == 0
    assert t.scale(Fraction(3)).coeff(0, 0, 0) == 3


def test_kron_matches_composed_matmul_after_relabel():
    s1, s2 = MatMulShape(2, 3, 2), MatMulShape(2, 2, 3)
    t12 = kron(matmul_tensor(s1), matmul_tensor(s2))
    maps = matmul_kron_maps(s1, s2)
    comp = s1.compose(s2)
    assert tensor_equal(relabel(t12, *maps, dims=comp.dims), matmul_tensor(comp))


def test_kron_power_shape_and_nnz():
    t = matmul_tensor(MatMulShape(2, 2, 2))
    t3 = kron_power(t, 3)
    assert t3.dims == (64, 64, 64)
    assert t3.nnz() == 8**3
    assert t3.shape == MatMulShape(8, 8, 8)


def test_kron_coefficients_multiply():
    t1 = Tensor((2, 1, 1), QQ, {(0, 0, 0): Fraction(2), (1, 0, 0): Fraction(3)})
    t2 = Tensor((1, 2, 1), QQ, {(0, 1, 0): Fraction(5)})
    t12 = kron(t1, t2)
    assert t12.coeff(0, 1, 0) == 10 and t12.coeff(1, 1, 0) == 15


def test_direct_sum_and_copies():
    t = matmul_tensor(MatMulShape(2, 2, 2))
    s = direct_sum(t, t)
    assert s.dims == (8, 8, 8) and s.nnz() == 16
    assert s.coeff(4, 4, 4) == t.coeff(0, 0, 0)
    c3 = copies(3, t)
    assert c3.dims == (12, 12, 12) and c3.nnz() == 24


def test_zero_out_predicate_and_compact():
    t = matmul_tensor(MatMulShape(2, 2, 2))
    # Keep only a-variables with i=0: kills every entry with i=1.
    cut = zero_out(t, keep_a=lambda a: a < 2)
    assert cut.dims == t.dims
    assert all(i < 2 for (i, _, _) in cut.entries)
    compacted = zero_out(t, keep_a=[0, 1], compact=True)
    assert compacted.dims == (2, 4, 4)
    # ⟨1,2,2⟩ sits inside ⟨2,2,2⟩ by keeping the first a-row and c-column.
    sub = matmul_tensor(MatMulShape(1, 2, 2))
    witness = ([0, 1], None, [0, 2])
    assert is_zero_out_of(sub, t, witness)


def test_zero_out_ordered_witness():
    t = matmul_tensor(MatMulShape(1, 2, 1))
    big = direct_sum(t, t)
    # The second copy read out in its natural order is the same tensor.
    assert is_zero_out_of(t, big, ([2, 3], [2, 3], [1]), ordered=True)
    # A scrambled order must not verify (it permutes b-variables).
    assert not is_zero_out_of(t, big, ([2, 3], [3, 2], [1]), ordered=True)
    with pytest.raises(DimMismatch):
        zero_out(big, keep_a=[2, 2], ordered=True)


def test_relabel_requires_injective():
    # On a matmul tensor the b/c axes pin the a-index, so collide all axes.
    t = Tensor((2, 1, 1), QQ, {(0, 0, 0): Fraction(1), (1, 0, 0): Fraction(1)})
    with pytest.raises(DimMismatch):
        relabel(t, lambda a: 0, lambda b: b, lambda c: c)


def test_rotate_cyclic_lands_on_rotated_matmul():
    for n, m, d in ((2, 2, 2), (2, 3, 4), (1, 2, 3)):
        t = matmul_tensor(MatMulShape(n, m, d))
        r = rotate_tensor(t, "cyclic")
        assert tensor_equal(r, matmul_tensor(MatMulShape(d, n, m)))
        # Three rotations come home.
        r3 = rotate_tensor(rotate_tensor(r, "cyclic"), "cyclic")
        assert tensor_equal(r3, t)


def test_rotate_swap_lands_on_swapped_matmul():
    for n, m, d in ((2, 2, 2), (2, 3, 4), (2, 1, 1)):
        t = matmul_tensor(MatMulShape(n, m, d))
        r = rotate_tensor(t, "swap")
        assert tensor_equal(r, matmul_tensor(MatMulShape(m, n, d)))
        assert tensor_equal(rotate_tensor(r, "swap"), t)
    with pytest.raises(ShapeUnknown):
        rotate_tensor(Tensor((2, 2, 2), QQ, {(0, 0, 0): Fraction(1)}), "swap")


def test_rotations_over_prime_field():
    f = PrimeField(101)
    t = matmul_tensor(MatMulShape(2, 3, 2), f)
    assert tensor_equal(rotate_tensor(t, "cyclic"), matmul_tensor(MatMulShape(2, 2, 3), f))


def test_digits_roundtrip():
    rng = random.Random(3)
    for _ in range(50):
        base = rng.randint(2, 7)
        length = rng.randint(1, 6)
        idx = rng.randrange(base**length)
        ds = digits(idx, base, length)
        assert len(ds) == length
        assert undigits(ds, base) == idx
    with pytest.raises(DimMismatch):
        digits(8, 2, 3)
