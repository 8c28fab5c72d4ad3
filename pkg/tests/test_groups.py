"""Group-algebra tensors, DFT algorithms, and the rank-sum bound."""

import random

import pytest

from mmlab.bilinear import CountedMatrix, verify_computes
from mmlab.errors import DimMismatch, NoSuitableRoot, TooLarge
from mmlab.fields import ExtensionField, PrimeField, Rationals
from mmlab.groups import (AbelianGroup, dft_matrix, group_bilinear,
                          group_tensor, rank_bound_sum, symmetric_convention)


def smallest_suitable_prime(e):
    """Smallest prime p with p = 1 mod e, so F_p holds an order-e root."""
    p = 2
    while True:
        if all(p % d for d in range(2, int(p ** 0.5) + 1)) and (p - 1) % e == 0:
            return p
        p += 1


def all_factor_tuples(order_max):
    """Every tuple of cyclic factors >= 2 with product <= order_max.

    Covers all isomorphism classes of abelian groups of order <= order_max
    (plus redundant presentations, which must also work).
    """
    out = [()]
    stack = [((), 1)]
    while stack:
        fac, prod = stack.pop()
        for n in range(max(2, fac[-1] if fac else 2), order_max + 1):
            if prod * n > order_max:
                break
            out.append(fac + (n,))
            stack.append((fac + (n,), prod * n))
    return out


def adjoint(m):
    # DFT entries are roots of unity, so conjugation is entrywise inversion.
    f = m.field
    return CountedMatrix(m.cols, m.rows, f,
                         {(c, r): f.inv(v) for (r, c), v in m.entries.items()})


class TestAbelianGroup:
    def test_order_and_exponent(self):
        g = AbelianGroup((4, 2, 3))
        assert g.order == 24
        assert g.exponent == 12
        assert AbelianGroup(()).order == 1
        assert AbelianGroup((1,)).exponent == 1

    def test_element_index_roundtrip(self):
        g = AbelianGroup((3, 2))
        tuples = [g.element(i) for i in range(g.order)]
        assert tuples == [(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1)]
        assert [g.index(t) for t in tuples] == list(range(6))

    def test_mul_is_componentwise_addition(self):
        g = AbelianGroup((4, 3))
        for i in range(g.order):
            for j in range(g.order):
                a, b = g.element(i), g.element(j)
                expect = tuple((x + y) % n for n, x, y in zip(g.factors, a, b))
                assert g.element(g.mul(i, j)) == expect

    def test_inverse(self):
        g = AbelianGroup((5, 2))
        for i in range(g.order):
            assert g.mul(i, g.inverse(i)) == g.identity

    def test_bad_factors(self):
        with pytest.raises(ValueError):
            AbelianGroup((2, 0))
        with pytest.raises(ValueError):
            AbelianGroup((-3,))

    def test_bad_indices(self):
        g = AbelianGroup((2, 2))
        with pytest.raises(ValueError):
            g.element(4)
        with pytest.raises(ValueError):
            g.index((2, 0))
        with pytest.raises(ValueError):
            g.index((0,))

    def test_irrep_dims_parseval(self):
        for fac in [(1,), (2,), (4, 2), (3, 3)]:
            g = AbelianGroup(fac)
            dims = g.irrep_dims()
            assert len(dims) == g.order
            assert set(dims) == {1}
            assert sum(d * d for d in dims) == g.order


class TestGroupTensor:
    def test_trivial_group(self):
        gt = group_tensor(AbelianGroup((1,)))
        assert gt.tensor.dims == (1, 1, 1)
        assert dict(gt.tensor.entries) == {(0, 0, 0): gt.tensor.field.one}

    def test_z2_is_xor_table(self):
        gt = group_tensor(AbelianGroup((2,)))
        assert sorted(gt.tensor.entries) == [(0, 0, 0), (0, 1, 1), (1, 0, 1),
                                             (1, 1, 0)]

    def test_z3_matches_cyclic_convolution_table(self):
        gt = group_tensor(AbelianGroup((3,)))
        expect = {(g, h, (g + h) % 3) for g in range(3) for h in range(3)}
        assert set(gt.tensor.entries) == expect

    def test_unit_entry_count(self):
        fld = PrimeField(5)
        gt = group_tensor(AbelianGroup((3, 2)), fld)
        assert len(gt.tensor.entries) == 36
        assert set(gt.tensor.entries.values()) == {fld.one}

    def test_order_cap(self):
        with pytest.raises(TooLarge):
            group_tensor(AbelianGroup((65,)))


class TestSymmetricConvention:
    def test_support_multiplies_to_identity(self):
        g = AbelianGroup((4, 2))
        sym = symmetric_convention(g, group_tensor(g).tensor)
        for (a, b, c) in sym.entries:
            assert g.mul(g.mul(a, b), c) == g.identity

    def test_involution(self):
        g = AbelianGroup((3, 2))
        t = group_tensor(g).tensor
        back = symmetric_convention(g, symmetric_convention(g, t))
        assert back.entries == t.entries

    def test_dim_mismatch(self):
        g = AbelianGroup((2,))
        with pytest.raises(DimMismatch):
            symmetric_convention(g, group_tensor(AbelianGroup((3,))).tensor)


class TestDftMatrix:
    def test_trivial_group(self):
        f = dft_matrix(AbelianGroup((1,)), PrimeField(3))
        assert f.to_dense() == [[1]]

    def test_z2_over_f5(self):
        f = dft_matrix(AbelianGroup((2,)), PrimeField(5))
        assert f.to_dense() == [[1, 1], [1, 4]]

    def test_z3_over_f7_uses_smallest_root(self):
        # omega = 2 is the smallest order-3 element of F_7, so the rows are
        # the Vandermonde rows of {1, 2, 4}.
        f = dft_matrix(AbelianGroup((3,)), PrimeField(7))
        assert f.to_dense() == [[1, 1, 1], [1, 2, 4], [1, 4, 2]]

    def test_z2_over_rationals(self):
        f = dft_matrix(AbelianGroup((2,)), Rationals())
        assert f.to_dense() == [[1, 1], [1, -1]]

    def test_kronecker_structure(self):
        fld = PrimeField(5)
        whole = dft_matrix(AbelianGroup((4, 2)), fld)
        parts = dft_matrix(AbelianGroup((4,)), fld).kron(
            dft_matrix(AbelianGroup((2,)), fld))
        assert whole == parts

    @pytest.mark.parametrize("fac,field", [
        ((2,), PrimeField(5)),
        ((3,), PrimeField(7)),
        ((4, 2), PrimeField(5)),
        ((3, 3), PrimeField(13)),
        ((3,), ExtensionField(2, 2)),
        ((2, 2), Rationals()),
    ])
    def test_unitarity(self, fac, field):
        g = AbelianGroup(fac)
        f = dft_matrix(g, field)
        prod = f.matmul(adjoint(f))
        n_elem = field.of_int(g.order)
        dense = prod.to_dense()
        for i in range(g.order):
            for j in range(g.order):
                assert dense[i][j] == (n_elem if i == j else field.zero)

    def test_no_suitable_root(self):
        with pytest.raises(NoSuitableRoot):
            dft_matrix(AbelianGroup((3,)), PrimeField(5))
        with pytest.raises(NoSuitableRoot):
            dft_matrix(AbelianGroup((3,)), Rationals())
        with pytest.raises(NoSuitableRoot):
            dft_matrix(AbelianGroup((4,)), PrimeField(7))


class TestGroupBilinear:
    def test_z2_over_f5(self):
        fld = PrimeField(5)
        g = AbelianGroup((2,))
        b = group_bilinear(g, fld)
        assert b.rank == 2
        assert verify_computes(b, group_tensor(g, fld).tensor)

    def test_trivial_group_is_scalar_product(self):
        b = group_bilinear(AbelianGroup((1,)))
        assert b.rank == 1
        assert verify_computes(b, group_tensor(AbelianGroup((1,))).tensor)

    def test_z4xz2_rank_8(self):
        fld = PrimeField(5)
        g = AbelianGroup((4, 2))
        b = group_bilinear(g, fld)
        assert b.rank == 8
        assert verify_computes(b, group_tensor(g, fld).tensor)

    def test_all_groups_up_to_16(self):
        for fac in all_factor_tuples(16):
            g = AbelianGroup(fac)
            fld = PrimeField(smallest_suitable_prime(g.exponent))
            b = group_bilinear(g, fld)
            assert b.rank == g.order
            assert verify_computes(b, group_tensor(g, fld).tensor), fac

    def test_extension_field(self):
        fld = ExtensionField(2, 2)
        g = AbelianGroup((3,))
        b = group_bilinear(g, fld)
        assert verify_computes(b, group_tensor(g, fld).tensor)

    @pytest.mark.parametrize("fac,p,seed", [
        ((3, 2), 7, 0),
        ((4,), 5, 1),
        ((2, 2, 2), 3, 2),
        ((5,), 11, 3),
    ])
    def test_pipeline_is_convolution(self, fac, p, seed):
        g = AbelianGroup(fac)
        fld = PrimeField(p)
        b = group_bilinear(g, fld)
        rng = random.Random(seed)
        n = g.order
        for _ in range(5):
            f_vec = [fld.of_int(rng.randrange(p)) for _ in range(n)]
            g_vec = [fld.of_int(rng.randrange(p)) for _ in range(n)]
            brute = [fld.zero] * n
            for a in range(n):
                for c in range(n):
                    k = g.mul(a, c)
                    brute[k] = fld.add(brute[k], fld.mul(f_vec[a], g_vec[c]))
            assert b.evaluate(f_vec, g_vec) == brute

    def test_order_cap(self):
        with pytest.raises(TooLarge):
            group_bilinear(AbelianGroup((5, 13)))


class TestRankBoundSum:
    def test_all_ones(self):
        assert rank_bound_sum([1] * 8, lambda d: d ** 3) == 8

    def test_mixed_dims(self):
        oracle = {1: 1, 2: 7}.__getitem__
        assert rank_bound_sum([1, 1, 2], oracle) == 9

    def test_single(self):
        assert rank_bound_sum([1], lambda d: d ** 3) == 1
