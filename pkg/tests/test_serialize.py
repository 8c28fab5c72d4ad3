"""Round trips and schema diagnostics for the JSON/CSV document formats."""

import random
from fractions import Fraction
from importlib import resources

import pytest

from mmlab.bilinear import CountedMatrix, naive_algorithm, strassen, verify_computes
from mmlab.cw import cw_tensor
from mmlab.errors import SchemaError
from mmlab.fields import Rationals, field_from_descriptor
from mmlab.kron_eval import OpCount
from mmlab.serialize import (algorithm_from_dict, algorithm_to_dict,
                             bitmatrix_from_dict, bitmatrix_from_text,
                             bitmatrix_to_dict, bitmatrix_to_text,
                             dense_from_csv, dense_to_csv, dumps, field_of,
                             loads, matrix_from_dict, matrix_to_dict,
                             opcount_from_dict, opcount_to_dict, show_number,
                             tensor_from_dict, tensor_to_dict)
from mmlab.sparse_f2 import BitMatrix
from mmlab.tensors import MatMulShape, Tensor, matmul_tensor, tensor_equal

QQ = Rationals()


def rand_tensor(field, dims, rng, density=0.4):
    entries = {}
    for i in range(dims[0]):
        for j in range(dims[1]):
            for k in range(dims[2]):
                if rng.random() < density:
                    v = field.parse(str(rng.randint(-9, 9)))
                    if not field.is_zero(v):
                        entries[(i, j, k)] = v
    return Tensor(dims, field, entries)


class TestTensorDocs:
    def test_matmul_round_trip_keeps_shape(self):
        t = matmul_tensor(MatMulShape(2, 3, 4))
        back = tensor_from_dict(tensor_to_dict(t))
        assert tensor_equal(t, back)
        assert back.shape == MatMulShape(2, 3, 4)

    @pytest.mark.parametrize("desc", ["rational", "fp:101", "fpext:5:2"])
    def test_random_round_trip(self, desc):
        rng = random.Random(11)
        field = field_from_descriptor(desc)
        for _ in range(10):
            t = rand_tensor(field, (3, 2, 4), rng)
            assert tensor_equal(t, tensor_from_dict(tensor_to_dict(t)))

    def test_doc_field_wins_over_argument(self):
        t = cw_tensor(1, field_from_descriptor("fp:7"))
        back = tensor_from_dict(tensor_to_dict(t), QQ)
        assert back.field.descriptor == "fp:7"

    def test_entries_sorted_lexicographically(self):
        doc = tensor_to_dict(matmul_tensor(MatMulShape(2, 2, 2)))
        assert doc["entries"] == sorted(doc["entries"])

    def test_bad_entry_arity_names_index(self):
        doc = tensor_to_dict(matmul_tensor(MatMulShape(2, 2, 2)))
        doc["entries"][3] = [0, 0, 0]
        with pytest.raises(SchemaError, match=r"entries\[3\]"):
            tensor_from_dict(doc)

    def test_bad_coefficient_names_index(self):
        doc = tensor_to_dict(matmul_tensor(MatMulShape(2, 2, 2)))
        doc["entries"][0][3] = "2/0"
        with pytest.raises(SchemaError, match=r"entries\[0\]"):
            tensor_from_dict(doc)

    def test_missing_dims(self):
        doc = tensor_to_dict(cw_tensor(1))
        del doc["dims"]
        with pytest.raises(SchemaError, match="dims"):
            tensor_from_dict(doc)

    def test_bad_field_descriptor(self):
        doc = tensor_to_dict(cw_tensor(1))
        doc["field"] = "fp:6"
        with pytest.raises(SchemaError, match="field"):
            tensor_from_dict(doc)

    def test_missing_field_without_default(self):
        with pytest.raises(SchemaError, match="field"):
            field_of({"dims": [1, 1, 1]}, "tensor")


class TestAlgorithmDocs:
    def test_strassen_round_trip(self):
        algo = strassen()
        back = algorithm_from_dict(algorithm_to_dict(algo))
        assert back.rank == 7
        assert back.shape == MatMulShape(2, 2, 2)
        assert verify_computes(back, matmul_tensor(back.shape))

    def test_finite_field_round_trip(self):
        f = field_from_descriptor("fp:13")
        algo = naive_algorithm(MatMulShape(2, 2, 3), f)
        back = algorithm_from_dict(algorithm_to_dict(algo))
        assert back.field == f
        assert verify_computes(back, matmul_tensor(algo.shape, f))

    def test_declared_rank_checked(self):
        doc = algorithm_to_dict(strassen())
        doc["rank"] = 8
        with pytest.raises(SchemaError, match="rank"):
            algorithm_from_dict(doc)

    def test_matrix_round_trip(self):
        m = strassen().dec_z
        back = matrix_from_dict(matrix_to_dict(m), QQ)
        assert (back.rows, back.cols) == (m.rows, m.cols)
        assert back.entries == m.entries

    def test_matrix_bad_entry_names_context(self):
        doc = matrix_to_dict(strassen().enc_x)
        doc["entries"][2] = [0, 0]
        with pytest.raises(SchemaError, match=r"algorithm.enc_x.entries\[2\]"):
            matrix_from_dict(doc, QQ, "algorithm.enc_x")


class TestOpCountDocs:
    def test_round_trip(self):
        c = OpCount(3, 4, 5)
        assert opcount_from_dict(opcount_to_dict(c)) == c

    def test_missing_key(self):
        with pytest.raises(SchemaError, match="prods"):
            opcount_from_dict({"adds": 1, "mults": 2})


class TestBitMatrixDocs:
    def test_dict_round_trip(self):
        m = BitMatrix.from_lists([[1, 0, 1], [0, 1, 1]])
        assert bitmatrix_from_dict(bitmatrix_to_dict(m)) == m

    def test_text_round_trip(self):
        m = BitMatrix.from_lists([[1, 0, 1], [0, 1, 1], [1, 1, 0]])
        assert bitmatrix_from_text(bitmatrix_to_text(m)) == m

    def test_declared_dims_checked(self):
        doc = bitmatrix_to_dict(BitMatrix.identity(3))
        doc["rows"] = 4
        with pytest.raises(SchemaError, match="declared"):
            bitmatrix_from_dict(doc)

    def test_text_rejects_stray_characters(self):
        with pytest.raises(SchemaError, match="line 2"):
            bitmatrix_from_text("101\n1x1\n")

    def test_text_rejects_ragged_rows(self):
        with pytest.raises(SchemaError, match="unequal"):
            bitmatrix_from_text("101\n10\n")

    def test_text_skips_blank_lines(self):
        m = bitmatrix_from_text("\n101\n\n011\n")
        assert m.to_lists() == [[1, 0, 1], [0, 1, 1]]


class TestDenseCsv:
    def test_round_trip_with_fractions(self):
        mat = [[Fraction(1, 3), Fraction(-2)], [Fraction(5, 7), Fraction(0)]]
        assert dense_from_csv(dense_to_csv(mat, QQ), QQ) == mat

    def test_prime_field_round_trip(self):
        f = field_from_descriptor("fp:7")
        mat = [[f.parse("3"), f.parse("6")], [f.parse("0"), f.parse("5")]]
        assert dense_from_csv(dense_to_csv(mat, f), f) == mat

    def test_bad_cell_names_line(self):
        with pytest.raises(SchemaError, match="line 2"):
            dense_from_csv("1,2\n3,oops\n", QQ)

    def test_ragged_rows_rejected(self):
        with pytest.raises(SchemaError, match="columns"):
            dense_from_csv("1,2\n3\n", QQ)

    def test_empty_rejected(self):
        with pytest.raises(SchemaError, match="empty"):
            dense_from_csv("\n\n", QQ)


class TestCanonicalText:
    def test_dumps_loads_fixed_point(self):
        doc = algorithm_to_dict(strassen())
        text = dumps(doc)
        assert dumps(loads(text)) == text

    def test_invalid_json_reports_line(self):
        with pytest.raises(SchemaError, match="line"):
            loads('{"dims": [1, 1, 1], }')

    def test_shipped_fixtures_are_canonical_and_current(self):
        # strassen.json / mm222.json / cw1.json must match the code that
        # generates them, byte for byte.
        fixtures = resources.files("mmlab") / "fixtures"
        expected = {
            "strassen.json": dumps(algorithm_to_dict(strassen())),
            "mm222.json": dumps(tensor_to_dict(matmul_tensor(MatMulShape(2, 2, 2)))),
            "cw1.json": dumps(tensor_to_dict(cw_tensor(1))),
        }
        for name, text in expected.items():
            assert (fixtures / name).read_text() == text


class TestShowNumber:
    def test_fractions(self):
        assert show_number(Fraction(3, 2)) == "3/2"
        assert show_number(Fraction(4, 2)) == "2"
        assert show_number(Fraction(-1, 3)) == "-1/3"

    def test_floats_six_significant_digits(self):
        assert show_number(0.123456789) == "0.123457"
        assert show_number(2.0) == "2"

    def test_ints_and_bools(self):
        assert show_number(7) == "7"
        assert show_number(True) == "1"
        assert show_number(False) == "0"
