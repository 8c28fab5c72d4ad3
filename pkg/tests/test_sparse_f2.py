"""F2 sparse factorization: dependencies, peeling, and the counting bound."""

import math
import random
from fractions import Fraction
from itertools import combinations, product

import pytest

from mmlab.errors import PreconditionViolated
from mmlab.sparse_f2 import (BitMatrix, count_bound, default_size_bound,
                             find_dependency, sparse_factor)


def rand_bits(rng, rows, cols):
    return tuple(rng.getrandbits(cols) for _ in range(rows))


def xor_of(rows, subset):
    acc = 0
    for i in subset:
        acc ^= rows[i]
    return acc


def brute_min_dependency(rows):
    """Size of the smallest nonempty zero-XOR subset, or None."""
    for size in range(1, len(rows) + 1):
        for subset in combinations(range(len(rows)), size):
            if xor_of(rows, subset) == 0:
                return size
    return None


class TestBitMatrix:
    def test_identity_and_entry(self):
        m = BitMatrix.identity(3)
        assert m.to_lists() == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
        assert m.entry(2, 2) == 1 and m.entry(2, 0) == 0

    def test_from_lists_roundtrip(self):
        rows = [[1, 0, 1], [0, 1, 1]]
        assert BitMatrix.from_lists(rows).to_lists() == rows

    def test_mul_matches_dense_arithmetic(self):
        rng = random.Random(41)
        for _ in range(50):
            t, r, n = (rng.randrange(1, 7) for _ in range(3))
            a = BitMatrix(t, r, rand_bits(rng, t, r))
            b = BitMatrix(r, n, rand_bits(rng, r, n))
            prod = a.mul(b)
            for i in range(t):
                for j in range(n):
                    want = sum(a.entry(i, k) * b.entry(k, j) for k in range(r)) % 2
                    assert prod.entry(i, j) == want

    def test_nnz_and_cost(self):
        m = BitMatrix.from_lists([[1, 1, 1], [0, 0, 0], [1, 0, 0]])
        assert m.nnz() == 4
        assert m.naive_cost() == 2

    def test_validation(self):
        with pytest.raises(ValueError):
            BitMatrix(0, 3, ())
        with pytest.raises(ValueError):
            BitMatrix(1, 2, (4,))
        with pytest.raises(ValueError):
            BitMatrix(2, 2, (1,))


class TestFindDependency:
    def test_duplicate_rows(self):
        assert find_dependency([0b101, 0b011, 0b101]) == (0, 2)

    def test_zero_row_is_singleton(self):
        assert find_dependency([0b1, 0, 0b10]) == (1,)

    def test_independent_basis(self):
        assert find_dependency([1, 2, 4, 8]) == ()

    def test_pigeonhole_beyond_field_size(self):
        rng = random.Random(42)
        for cols in range(2, 7):
            rows = [rng.getrandbits(cols) for _ in range(2 ** cols + 1)]
            dep = find_dependency(rows)
            assert dep
            assert xor_of(rows, dep) == 0

    def test_matches_brute_force(self):
        rng = random.Random(43)
        for _ in range(60):
            rows = [rng.getrandbits(4) for _ in range(rng.randrange(1, 8))]
            dep = find_dependency(rows)
            best = brute_min_dependency(rows)
            if best is None:
                assert dep == ()
            else:
                assert dep and xor_of(rows, dep) == 0

    def test_bounded_is_complete(self):
        rng = random.Random(44)
        for _ in range(60):
            rows = [rng.getrandbits(5) for _ in range(rng.randrange(1, 10))]
            best = brute_min_dependency(rows)
            for bound in (1, 2, 3, 4):
                dep = find_dependency(rows, size_bound=bound)
                if best is not None and best <= bound:
                    assert dep and len(dep) <= bound
                    assert xor_of(rows, dep) == 0
                elif best is None:
                    assert dep == ()

    def test_bounded_planted(self):
        # Rows 0, 1, 2 XOR to zero; everything else is high-entropy.
        rng = random.Random(45)
        a, b = rng.getrandbits(30), rng.getrandbits(30)
        rows = [a, b, a ^ b] + [rng.getrandbits(30) | 1 for _ in range(9)]
        dep = find_dependency(rows, size_bound=3)
        assert dep and len(dep) <= 3 and xor_of(rows, dep) == 0

    def test_bad_arguments(self):
        with pytest.raises(PreconditionViolated):
            find_dependency([])
        with pytest.raises(PreconditionViolated):
            find_dependency([1], size_bound=0)


class TestSparseFactor:
    def test_product_identity_random(self):
        rng = random.Random(46)
        for _ in range(200):
            t = rng.randrange(1, 25)
            cols = rng.randrange(1, 11)
            x = BitMatrix(t, cols, rand_bits(rng, t, cols))
            x1, x2, report = sparse_factor(x)
            assert x1.mul(x2) == x
            assert (x1.rows, x1.cols) == (t, report["r"])
            assert (x2.rows, x2.cols) == (report["r"], cols)

    def test_duplicate_row_single_peel(self):
        x = BitMatrix.from_lists([[1, 0, 1], [0, 1, 1], [1, 0, 1]])
        x1, x2, report = sparse_factor(x)
        assert report["r"] == 2
        assert x1.mul(x2) == x
        # The non-identity row re-creates the duplicate with one nonzero.
        assert report["nnz"] == 3
        assert report["ratio"] == 0

    def test_tall_random_40x9(self):
        rng = random.Random(47)
        x = BitMatrix(40, 9, rand_bits(rng, 40, 9))
        x1, x2, report = sparse_factor(x)
        assert x1.mul(x2) == x
        assert report["r"] < 40
        assert report["ratio"] == Fraction(report["naive_cost"], 40 - report["r"])

    def test_20x4_peels_past_field_size(self):
        rng = random.Random(48)
        x = BitMatrix(20, 4, rand_bits(rng, 20, 4))
        x1, x2, report = sparse_factor(x)
        assert x1.mul(x2) == x
        # Only 16 distinct rows exist over F2^4, so at least 4 peels happen.
        assert report["peels"] >= 4
        assert report["r"] <= 16

    def test_independent_input_falls_back_to_identity(self):
        x = BitMatrix.identity(5)
        x1, x2, report = sparse_factor(x)
        assert x1 == BitMatrix.identity(5)
        assert x2 == x
        assert report["r"] == 5 and report["ratio"] is None

    def test_zero_matrix(self):
        x = BitMatrix(3, 4, (0, 0, 0))
        x1, x2, report = sparse_factor(x)
        assert x1.mul(x2) == x
        assert report["r"] == 1

    def test_default_bound_shape(self):
        assert default_size_bound(9) == math.ceil(18 / math.log2(9))
        assert default_size_bound(1) == 2


class TestCountBound:
    def test_hand_value(self):
        assert count_bound(2, 3, 1) == 48

    def test_empty_program(self):
        assert count_bound(5, 3, 0) == 3 ** 5

    def test_single_input_cannot_add(self):
        assert count_bound(4, 1, 1) == 0

    def test_monotone_grid(self):
        for t in range(1, 4):
            for r in range(2, 6):
                for c in range(0, 4):
                    here = count_bound(t, r, c)
                    assert count_bound(t + 1, r, c) >= here
                    assert count_bound(t, r + 1, c) >= here
                    assert count_bound(t, r, c + 1) >= here

    def test_dominates_reachable_matrices(self):
        # Enumerate every straight-line program with exactly c additions.
        for t, r, c in product(range(1, 3), range(1, 4), range(0, 3)):
            mats = set()

            def run(mem, steps):
                if steps == 0:
                    for out in product(range(len(mem)), repeat=t):
                        mats.add(tuple(mem[i] for i in out))
                    return
                for i, j in combinations(range(len(mem)), 2):
                    run(mem + [mem[i] ^ mem[j]], steps - 1)

            run([1 << i for i in range(r)], c)
            assert len(mats) <= count_bound(t, r, c)

    def test_preconditions(self):
        with pytest.raises(PreconditionViolated):
            count_bound(0, 3, 1)
        with pytest.raises(PreconditionViolated):
            count_bound(2, 3, -1)
